"""Embedding-to-text decoding by greedy hypothesis refinement.

Given a target embedding, the decoder starts from a seed text and
repeatedly applies the single best token edit (substitution, insertion,
or deletion, drawn from a fixed lexicon) that strictly increases the
cosine between the hypothesis embedding and the target.  The search is
steepest-ascent and fully deterministic: every round enumerates all
moves in a fixed order, scores them in one embedder batch, and accepts
the first-enumerated best move only if it strictly improves.

Tokens here are whitespace tokens, so punctuation and case survive
decoding; the embedder applies its own normalization downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .vecmath import as_vector

__all__ = [
    "Hypothesis",
    "DecoderParams",
    "candidate_moves",
    "decode",
    "decode_trace",
    "build_lexicon",
]


@dataclass(frozen=True)
class Hypothesis:
    """One point of the search: token list, its join, and (optionally) its score."""

    tokens: tuple
    text: str
    score: float | None = None

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise ValueError("hypothesis must contain at least one token")
        if self.text != " ".join(self.tokens):
            raise ValueError("hypothesis text must be the single-space token join")
        if self.score is not None and not math.isfinite(self.score):
            raise ValueError(f"hypothesis score must be finite, got {self.score}")

    @classmethod
    def from_tokens(cls, tokens, score: float | None = None) -> "Hypothesis":
        tokens = tuple(tokens)
        return cls(tokens=tokens, text=" ".join(tokens), score=score)


@dataclass(frozen=True)
class DecoderParams:
    """Search vocabulary and budgets.

    ``lexicon`` is deduplicated preserving first occurrence.  A
    ``length_cap`` of None means 2 * |seed tokens| + 8, resolved per
    decode call.  ``max_accepted_edits`` of 0 disables editing entirely
    (the seed is returned as-is).
    """

    lexicon: tuple = field(default=())
    max_accepted_edits: int = 8
    length_cap: int | None = None

    def __post_init__(self):
        deduped = tuple(dict.fromkeys(self.lexicon))
        if not deduped:
            raise ValueError("decoder lexicon must be non-empty")
        object.__setattr__(self, "lexicon", deduped)
        if self.max_accepted_edits < 0:
            raise ValueError("max_accepted_edits must be >= 0")
        if self.length_cap is not None and self.length_cap < 1:
            raise ValueError("length_cap must be positive")

    def cap_for(self, seed_tokens) -> int:
        if self.length_cap is not None:
            return self.length_cap
        return 2 * len(seed_tokens) + 8


def candidate_moves(h: Hypothesis, params: DecoderParams) -> list[Hypothesis]:
    """All single-edit neighbors of ``h``, in deterministic order.

    Substitutions (by position, then lexicon order, skipping the
    incumbent token), then insertions (by position, then lexicon order;
    suppressed at the length cap), then deletions (by position;
    suppressed at length 1).  Scores are left unset; the caller batches
    the embedding work.
    """
    tokens = h.tokens
    cap = params.cap_for(tokens)
    moves: list[Hypothesis] = []
    for i in range(len(tokens)):
        for word in params.lexicon:
            if word != tokens[i]:
                moves.append(Hypothesis.from_tokens(tokens[:i] + (word,) + tokens[i + 1 :]))
    if len(tokens) < cap:
        for i in range(len(tokens) + 1):
            for word in params.lexicon:
                moves.append(Hypothesis.from_tokens(tokens[:i] + (word,) + tokens[i:]))
    if len(tokens) > 1:
        for i in range(len(tokens)):
            moves.append(Hypothesis.from_tokens(tokens[:i] + tokens[i + 1 :]))
    return moves


def _cosines_to_target(matrix: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Row-wise cosine to ``target`` with the zero-vector-scores-zero convention."""
    tn = np.linalg.norm(target)
    out = np.zeros(matrix.shape[0])
    if tn == 0.0:
        return out
    norms = np.linalg.norm(matrix, axis=1)
    nz = norms > 0
    out[nz] = (matrix[nz] @ target) / (norms[nz] * tn)
    return np.clip(out, -1.0, 1.0)


def decode_trace(
    target: np.ndarray,
    seed_text: str,
    embedder,
    params: DecoderParams,
) -> tuple[str, list[Hypothesis]]:
    """Run the greedy search; return the final text and all accepted states.

    The trace starts with the scored seed hypothesis; each later entry is
    one accepted edit, so its length minus one is the number of edits
    spent.  Seeds that tokenize to nothing are returned verbatim with an
    empty trace, as is any seed for which no edit strictly improves (so
    original whitespace survives an idle decode).
    """
    seed_tokens = tuple(seed_text.split())
    if not seed_tokens:
        return seed_text, []
    target = as_vector(target)
    current = Hypothesis.from_tokens(
        seed_tokens,
        score=float(_cosines_to_target(embedder.embed([" ".join(seed_tokens)]), target)[0]),
    )
    trace = [current]
    for _ in range(params.max_accepted_edits):
        moves = candidate_moves(current, params)
        if not moves:
            break
        scores = _cosines_to_target(embedder.embed([m.text for m in moves]), target)
        best = int(np.argmax(scores))
        if not scores[best] > current.score:
            break
        current = replace(moves[best], score=float(scores[best]))
        trace.append(current)
    final_text = seed_text if len(trace) == 1 else current.text
    return final_text, trace


def decode(
    target: np.ndarray,
    seed_text: str,
    embedder,
    params: DecoderParams,
) -> str:
    """Final text of the greedy search (see ``decode_trace``)."""
    text, _ = decode_trace(target, seed_text, embedder, params)
    return text


def build_lexicon(*texts: str) -> tuple:
    """Whitespace tokens of all texts, deduplicated preserving first occurrence."""
    seen: dict[str, None] = {}
    for text in texts:
        for token in text.split():
            seen.setdefault(token, None)
    return tuple(seen)
