"""Candidate construction and selection: insertion, scoring, interpolation.

Stage 2 of an attack: every adversarial text is inserted at every
sentence gap of the target document, each candidate gets a coherence
score (piecewise next-sentence probabilities) and a relevance score,
relevance is min-max normalized over the candidate pool, and the
interpolated score picks the winner under strict greater-than with
first-wins ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .anchors import ANCHOR_KINDS
from .model import Document, Query
from .transporter import TransportParams
from .vecmath import cosine

__all__ = [
    "Candidate",
    "AttackConfig",
    "insert",
    "coherence_score",
    "normalize_relevance",
    "interp_score",
    "core_similarity",
    "score_pool",
    "select_best",
]


@dataclass(frozen=True)
class Candidate:
    """One scored member of the insertion pool.

    ``adv_text_idx`` and ``position`` are both None exactly when the
    candidate is the unmodified original document (the pool's fallback
    and, optionally, a real competitor).
    """

    doc: Document
    adv_text_idx: int | None
    position: int | None
    c_coh: float | None = None
    c_rel_raw: float | None = None
    c_rel_norm: float | None = None
    score_interp: float | None = None
    core_sim: float | None = None
    core_flagged: bool = False

    def __post_init__(self):
        if (self.adv_text_idx is None) != (self.position is None):
            raise ValueError("adv_text_idx and position must be set together")
        if self.position is not None and self.position < 0:
            raise ValueError("insertion position must be >= 0")
        for name in ("c_coh", "c_rel_norm", "score_interp"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.c_rel_raw is not None and not math.isfinite(self.c_rel_raw):
            raise ValueError("c_rel_raw must be finite")


@dataclass(frozen=True)
class AttackConfig:
    """Everything Stage 1 and Stage 2 need beyond the scorer handles.

    ``lexicon`` of None means the decoder vocabulary is built per target
    from the target document, its anchors, and the top-ranked document.
    ``lambda_core`` only flags low core-similarity winners in reports; it
    never rejects them.
    """

    alpha: float = 0.5
    transport: TransportParams = field(default_factory=TransportParams)
    anchor_kinds: tuple = ANCHOR_KINDS
    lambda_core: float = 0.0
    include_original_as_candidate: bool = False
    decode_final_only: bool = False
    max_accepted_edits: int = 8
    length_cap: int | None = None
    lexicon: tuple | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.lambda_core <= 1.0:
            raise ValueError(f"lambda_core must lie in [0, 1], got {self.lambda_core}")
        kinds = tuple(dict.fromkeys(self.anchor_kinds))
        if not kinds:
            raise ValueError("anchor_kinds must be non-empty")
        unknown = set(kinds) - set(ANCHOR_KINDS)
        if unknown:
            raise ValueError(f"unknown anchor kinds: {sorted(unknown)}")
        object.__setattr__(
            self, "anchor_kinds", tuple(k for k in ANCHOR_KINDS if k in kinds)
        )
        if self.max_accepted_edits < 0:
            raise ValueError("max_accepted_edits must be >= 0")
        if self.length_cap is not None and self.length_cap < 1:
            raise ValueError("length_cap must be positive")
        if self.lexicon is not None:
            object.__setattr__(self, "lexicon", tuple(dict.fromkeys(self.lexicon)))


def insert(d: Document, t: str, p: int) -> Document:
    """``t`` spliced into ``d`` as one new sentence slot at gap ``p``.

    Gap 0 prepends, gap |d| appends; the inserted text occupies a single
    slot even if it contains sentence terminators of its own.
    """
    if not 0 <= p <= len(d):
        raise ValueError(f"insertion position {p} outside [0, {len(d)}]")
    if not t.strip():
        raise ValueError("cannot insert empty text")
    sentences = d.sentences[:p] + (t,) + d.sentences[p:]
    return Document(docid=d.docid, text=" ".join(sentences), sentences=sentences)


def _coherence_pairs(d: Document, t: str, p: int) -> list[tuple[str, str]]:
    """The next-sentence pairs whose probabilities define coherence at gap p."""
    if p == 0:
        return [(t, d.text)]
    if p == len(d):
        return [(d.text, t)]
    prefix = " ".join(d.sentences[:p])
    suffix = " ".join(d.sentences[p:])
    return [(prefix, t + " " + suffix), (prefix + " " + t, suffix)]


def coherence_score(d: Document, t: str, p: int, nsp) -> float:
    """Piecewise coherence: edge gaps use one pair, interior gaps average two."""
    if not 0 <= p <= len(d):
        raise ValueError(f"insertion position {p} outside [0, {len(d)}]")
    pairs = _coherence_pairs(d, t, p)
    return float(np.mean(nsp.prob_next(pairs)))


def normalize_relevance(raw) -> list[float]:
    """Min-max over one candidate pool; a constant pool maps to all 0.5."""
    arr = np.asarray(list(raw), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty pool")
    if not np.all(np.isfinite(arr)):
        raise ValueError("relevance scores must be finite")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return [0.5] * arr.size
    return ((arr - lo) / (hi - lo)).tolist()


def interp_score(c_coh: float, c_rel_norm: float, alpha: float) -> float:
    """alpha * coherence + (1 - alpha) * normalized relevance."""
    for name, value in (("c_coh", c_coh), ("c_rel_norm", c_rel_norm), ("alpha", alpha)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return alpha * c_coh + (1.0 - alpha) * c_rel_norm


def core_similarity(d: Document, d_adv: Document, embedder) -> float:
    """Whole-document embedding cosine between original and adversarial."""
    vecs = embedder.embed([d.text, d_adv.text])
    return cosine(vecs[0], vecs[1])


def score_pool(
    d: Document,
    q: Query,
    t_adv,
    cfg: AttackConfig,
    roles,
) -> list[Candidate]:
    """Build and fully score the candidate pool, in enumeration order.

    Order: the original document first when configured as a candidate
    (with coherence pinned to 1.0 — nothing was inserted), then
    adversarial text index ascending, insertion gap ascending.  All
    next-sentence pairs go to the coherence role in one batch, all
    candidate texts to the relevance role in one batch.
    """
    entries: list[tuple[int | None, int | None, Document]] = []
    if cfg.include_original_as_candidate:
        entries.append((None, None, d))
    for i, t in enumerate(t_adv):
        for p in range(len(d) + 1):
            entries.append((i, p, insert(d, t, p)))
    if not entries:
        return []

    pairs: list[tuple[str, str]] = []
    spans: list[tuple[int, int] | None] = []
    for i, p, _doc in entries:
        if i is None:
            spans.append(None)
        else:
            batch = _coherence_pairs(d, t_adv[i], p)
            spans.append((len(pairs), len(pairs) + len(batch)))
            pairs.extend(batch)
    probs = np.asarray(roles.coherence.prob_next(pairs)) if pairs else np.zeros(0)
    rel_raw = np.asarray(roles.relevance.score(q.text, [e[2].text for e in entries]))
    rel_norm = normalize_relevance(rel_raw)

    pool: list[Candidate] = []
    for k, (i, p, doc) in enumerate(entries):
        c_coh = 1.0 if spans[k] is None else float(np.mean(probs[spans[k][0] : spans[k][1]]))
        pool.append(
            Candidate(
                doc=doc,
                adv_text_idx=i,
                position=p,
                c_coh=c_coh,
                c_rel_raw=float(rel_raw[k]),
                c_rel_norm=float(rel_norm[k]),
                score_interp=interp_score(c_coh, rel_norm[k], cfg.alpha),
            )
        )
    return pool


def select_best(
    d: Document,
    q: Query,
    t_adv,
    cfg: AttackConfig,
    roles,
) -> tuple[Document, Candidate]:
    """The pool's strict-argmax candidate, with core similarity attached.

    An empty pool (no adversarial texts, original not enrolled) returns
    the original document unscored, mirroring the best-so-far
    initialization of the selection loop.
    """
    pool = score_pool(d, q, t_adv, cfg, roles)
    if not pool:
        return d, Candidate(doc=d, adv_text_idx=None, position=None)
    best = pool[0]
    for cand in pool[1:]:
        if cand.score_interp > best.score_interp:
            best = cand
    core = core_similarity(d, best.doc, roles.embedder)
    flagged = cfg.lambda_core > 0.0 and core < cfg.lambda_core
    best = replace(best, core_sim=core, core_flagged=flagged)
    return best.doc, best
