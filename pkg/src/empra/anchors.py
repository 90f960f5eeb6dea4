"""Anchor construction: the texts each target sentence is steered toward.

Every sentence of the target document gets an ordered list of anchors
drawn from up to three kinds: the query itself, the full top-ranked
document, and the top-ranked document's sentence most similar to the
target sentence (its "aligned" sentence).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Document, Query

__all__ = [
    "ANCHOR_KINDS",
    "AnchorText",
    "AnchorSet",
    "most_similar_sentence",
    "build_anchor_set",
]

# Fixed emission order within each sentence's anchor list.
ANCHOR_KINDS = ("query", "top_doc", "aligned_sentence")


@dataclass(frozen=True)
class AnchorText:
    """One anchor: its text, its kind, and (for aligned sentences) its origin."""

    text: str
    kind: str
    source_sentence_idx: int | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("anchor text must be non-empty")
        if self.kind not in ANCHOR_KINDS:
            raise ValueError(f"anchor kind must be one of {ANCHOR_KINDS}")
        if self.kind == "aligned_sentence" and self.source_sentence_idx is None:
            raise ValueError("aligned_sentence anchors require source_sentence_idx")


@dataclass(frozen=True)
class AnchorSet:
    """Ordered anchors per sentence index of one target document."""

    per_sentence: dict

    def __post_init__(self):
        for idx, anchors in self.per_sentence.items():
            if not anchors:
                raise ValueError(f"sentence {idx} has an empty anchor list")
            kinds = [a.kind for a in anchors]
            if len(set(kinds)) != len(kinds):
                raise ValueError(f"sentence {idx} repeats an anchor kind")

    def __getitem__(self, idx: int):
        return self.per_sentence[idx]

    def __len__(self) -> int:
        return len(self.per_sentence)


def most_similar_sentence(s: str, top_doc: Document, embedder) -> tuple[str, int]:
    """The top-ranked document's sentence closest to ``s`` in cosine.

    Ties break toward the lowest sentence index.
    """
    if len(top_doc) < 1:
        raise ValueError("top-ranked document has no sentences")
    sv = embedder.embed([s])[0]
    mat = embedder.embed(list(top_doc.sentences))
    sn = np.linalg.norm(sv)
    norms = np.linalg.norm(mat, axis=1)
    cosines = np.zeros(len(top_doc))
    if sn > 0:
        nz = norms > 0
        cosines[nz] = (mat[nz] @ sv) / (norms[nz] * sn)
    idx = int(np.argmax(cosines))  # argmax takes the first of tied maxima
    return top_doc.sentences[idx], idx


def build_anchor_set(
    d: Document,
    q: Query,
    top_doc: Document | None,
    kinds,
    embedder,
) -> AnchorSet:
    """Anchors for every sentence of ``d``, ordered query, top_doc, aligned."""
    kinds = set(kinds)
    if not kinds:
        raise ValueError("at least one anchor kind is required")
    unknown = kinds - set(ANCHOR_KINDS)
    if unknown:
        raise ValueError(f"unknown anchor kinds: {sorted(unknown)}")
    if top_doc is None and kinds & {"top_doc", "aligned_sentence"}:
        raise ValueError("top-ranked document required for the requested anchor kinds")

    per_sentence: dict[int, tuple[AnchorText, ...]] = {}
    for idx, sentence in enumerate(d.sentences):
        anchors: list[AnchorText] = []
        if "query" in kinds:
            anchors.append(AnchorText(text=q.text, kind="query"))
        if "top_doc" in kinds:
            anchors.append(AnchorText(text=top_doc.text, kind="top_doc"))
        if "aligned_sentence" in kinds:
            text, src = most_similar_sentence(sentence, top_doc, embedder)
            anchors.append(
                AnchorText(text=text, kind="aligned_sentence", source_sentence_idx=src)
            )
        per_sentence[idx] = tuple(anchors)
    return AnchorSet(per_sentence=per_sentence)
