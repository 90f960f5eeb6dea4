"""Tests for the greedy embedding-to-text decoder."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from empra.decoder import (
    DecoderParams,
    Hypothesis,
    build_lexicon,
    candidate_moves,
    decode,
    decode_trace,
)
from empra.scorers import CachingEmbedder, ReferenceEmbedder


def _score(embedder, text: str, target: np.ndarray) -> float:
    """Independent cosine-to-target used by the oracles below."""
    v = embedder.embed([text])[0]
    n1, n2 = np.linalg.norm(v), np.linalg.norm(target)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    return float(np.clip(v @ target / (n1 * n2), -1.0, 1.0))


def oracle_greedy(embedder, target, seed_tokens, lexicon, budget, cap):
    """From-scratch steepest ascent with the same move semantics."""
    cur = list(seed_tokens)
    cur_s = _score(embedder, " ".join(cur), target)
    for _ in range(budget):
        neighbors: list[list[str]] = []
        for i in range(len(cur)):
            for w in lexicon:
                if w != cur[i]:
                    neighbors.append(cur[:i] + [w] + cur[i + 1 :])
        if len(cur) < cap:
            for i in range(len(cur) + 1):
                for w in lexicon:
                    neighbors.append(cur[:i] + [w] + cur[i:])
        if len(cur) > 1:
            for i in range(len(cur)):
                neighbors.append(cur[:i] + cur[i + 1 :])
        best, best_s = None, cur_s
        for cand in neighbors:
            s = _score(embedder, " ".join(cand), target)
            if s > best_s:
                best, best_s = cand, s
        if best is None:
            break
        cur, cur_s = best, best_s
    return " ".join(cur), cur_s


class TestHypothesis:
    def test_join_invariant(self):
        h = Hypothesis.from_tokens(("a", "b"), score=0.5)
        assert h.text == "a b"

    def test_mismatched_text_rejected(self):
        with pytest.raises(ValueError):
            Hypothesis(tokens=("a", "b"), text="ab")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Hypothesis.from_tokens(())

    def test_nonfinite_score_rejected(self):
        with pytest.raises(ValueError):
            Hypothesis.from_tokens(("a",), score=float("nan"))


class TestDecoderParams:
    def test_empty_lexicon_rejected(self):
        with pytest.raises(ValueError):
            DecoderParams(lexicon=())

    def test_lexicon_deduped_in_order(self):
        p = DecoderParams(lexicon=("b", "a", "b", "c", "a"))
        assert p.lexicon == ("b", "a", "c")

    def test_negative_budget_rejected(self):
        with pytest.raises(ValueError):
            DecoderParams(lexicon=("a",), max_accepted_edits=-1)

    def test_zero_budget_allowed(self):
        assert DecoderParams(lexicon=("a",), max_accepted_edits=0).max_accepted_edits == 0

    def test_bad_length_cap_rejected(self):
        with pytest.raises(ValueError):
            DecoderParams(lexicon=("a",), length_cap=0)

    def test_default_cap_tracks_seed_length(self):
        p = DecoderParams(lexicon=("a",))
        assert p.cap_for(("x",)) == 2 * 1 + 8
        assert p.cap_for(("x", "y", "z")) == 2 * 3 + 8
        assert DecoderParams(lexicon=("a",), length_cap=3).cap_for(("x",)) == 3


class TestCandidateMoves:
    def test_single_token_two_word_lexicon(self):
        # Hand enumeration: substitute a->b; insert a,b at both positions.
        h = Hypothesis.from_tokens(("a",))
        moves = candidate_moves(h, DecoderParams(lexicon=("a", "b")))
        assert [m.text for m in moves] == ["b", "a a", "b a", "a a", "a b"]

    def test_at_length_cap_no_insertions(self):
        h = Hypothesis.from_tokens(("a", "b"))
        moves = candidate_moves(h, DecoderParams(lexicon=("c",), length_cap=2))
        texts = [m.text for m in moves]
        assert texts == ["c b", "a c", "b", "a"]  # substitutions then deletions

    def test_min_length_no_deletions(self):
        h = Hypothesis.from_tokens(("a",))
        moves = candidate_moves(h, DecoderParams(lexicon=("b",), length_cap=1))
        assert [m.text for m in moves] == ["b"]

    def test_deletions_ordered_by_position(self):
        h = Hypothesis.from_tokens(("a", "b", "c"))
        moves = candidate_moves(h, DecoderParams(lexicon=("a",), length_cap=3))
        deletions = [m.text for m in moves if len(m.tokens) == 2]
        assert deletions == ["b c", "a c", "a b"]

    def test_moves_are_unscored(self):
        h = Hypothesis.from_tokens(("a",))
        for m in candidate_moves(h, DecoderParams(lexicon=("a", "b"))):
            assert m.score is None


class TestDecode:
    def test_target_is_seed_embedding_returns_seed(self):
        emb = ReferenceEmbedder(dim=64, seed=0)
        seed = "prenatal vitamins help"
        target = emb.embed_one(seed)
        params = DecoderParams(lexicon=build_lexicon(seed, "iron folate zinc"))
        assert decode(target, seed, emb, params) == seed

    def test_empty_seed_verbatim(self):
        emb = ReferenceEmbedder(dim=8)
        params = DecoderParams(lexicon=("a",))
        for seed in ("", "   "):
            text, trace = decode_trace(emb.embed_one("a"), seed, emb, params)
            assert text == seed
            assert trace == []

    def test_tiny_universe_reaches_target_token(self):
        emb = ReferenceEmbedder(dim=8, seed=0)
        x, y = emb.embed_one("x"), emb.embed_one("y")
        assert float(x @ y) < 1.0  # premise: distinct embeddings
        params = DecoderParams(lexicon=("x", "y"))
        target = y
        out = decode(target, "x", emb, params)
        assert out == "y"
        # Brute force over every hypothesis of length <= cap: none beats "y".
        cap = params.cap_for(("x",))
        best = max(
            _score(emb, " ".join(tokens), target)
            for n in range(1, cap + 1)
            for tokens in itertools.product(("x", "y"), repeat=min(n, 4))
        )
        assert _score(emb, out, target) == pytest.approx(best)

    def test_trace_scores_strictly_increase(self):
        rng = np.random.default_rng(21)
        words = ["alpha", "beta", "gamma", "delta", "iron", "folate"]
        emb = CachingEmbedder(ReferenceEmbedder(dim=16, seed=2))
        for _ in range(15):
            seed = " ".join(rng.choice(words, size=rng.integers(1, 4)))
            goal = " ".join(rng.choice(words, size=rng.integers(1, 4)))
            target = emb.embed([goal])[0]
            _, trace = decode_trace(target, seed, emb, DecoderParams(lexicon=tuple(words)))
            scores = [h.score for h in trace]
            assert all(b > a for a, b in zip(scores, scores[1:]))
            assert scores[-1] >= scores[0]

    def test_budget_respected(self):
        emb = ReferenceEmbedder(dim=16, seed=2)
        target = emb.embed_one("gamma delta iron folate")
        params = DecoderParams(
            lexicon=("gamma", "delta", "iron", "folate"), max_accepted_edits=2
        )
        _, trace = decode_trace(target, "alpha", emb, params)
        assert len(trace) - 1 <= 2

    def test_zero_budget_returns_seed(self):
        emb = ReferenceEmbedder(dim=16, seed=2)
        target = emb.embed_one("gamma")
        params = DecoderParams(lexicon=("gamma",), max_accepted_edits=0)
        assert decode(target, "alpha", emb, params) == "alpha"

    def test_deterministic(self):
        emb = ReferenceEmbedder(dim=16, seed=5)
        target = emb.embed_one("iron folate zinc")
        params = DecoderParams(lexicon=("iron", "folate", "zinc", "alpha"))
        a = decode(target, "alpha alpha", emb, params)
        b = decode(target, "alpha alpha", emb, params)
        assert a == b

    def test_matches_exhaustive_greedy_oracle(self):
        # Small instances: <= 3-word lexicon, hypotheses capped at length 2.
        rng = np.random.default_rng(77)
        vocab = ["red", "green", "blue", "cyan", "teal"]
        for trial in range(15):
            emb = CachingEmbedder(ReferenceEmbedder(dim=8, seed=trial))
            lexicon = tuple(rng.choice(vocab, size=3, replace=False))
            seed_tokens = tuple(rng.choice(lexicon, size=rng.integers(1, 3)))
            goal = " ".join(rng.choice(vocab, size=2))
            target = emb.embed([goal])[0]
            params = DecoderParams(lexicon=lexicon, max_accepted_edits=4, length_cap=2)
            got_text, trace = decode_trace(target, " ".join(seed_tokens), emb, params)
            want_text, want_score = oracle_greedy(
                emb, target, seed_tokens, lexicon, budget=4, cap=2
            )
            assert got_text == want_text
            assert trace[-1].score == pytest.approx(want_score, abs=1e-12)


class TestBuildLexicon:
    def test_order_preserving_dedup(self):
        assert build_lexicon("b a", "a c b", "d") == ("b", "a", "c", "d")

    def test_empty_inputs(self):
        assert build_lexicon("", "   ") == ()

    def test_punctuation_kept_with_words(self):
        assert build_lexicon("Dr. Smith left.") == ("Dr.", "Smith", "left.")
