"""Attack performance metrics and Dale-Chall readability.

The three rank metrics follow the same shape: compute a per-query value
over that query's targets, then take the unweighted mean across queries
(a query with two targets counts as much as one with ten).  Readability
uses the classic Dale-Chall formula over a caller-supplied familiar-word
list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .model import split_sentences
from .scorers import tokenize

__all__ = [
    "group_by_qid",
    "asr",
    "boosted_topk",
    "avg_boost",
    "MetricsReport",
    "compute_metrics",
    "load_familiar_words",
    "dale_chall",
    "dale_chall_summary",
]


def _get(outcome, name):
    if isinstance(outcome, Mapping):
        return outcome[name]
    return getattr(outcome, name)


def group_by_qid(outcomes) -> dict[str, list]:
    """Outcomes bucketed by qid, in first-seen query order."""
    groups: dict[str, list] = {}
    for o in outcomes:
        groups.setdefault(_get(o, "qid"), []).append(o)
    if not groups:
        raise ValueError("no outcomes to aggregate")
    return groups


def _query_mean(outcomes, per_target) -> float:
    """Unweighted mean over queries of the mean of per_target within each."""
    groups = group_by_qid(outcomes)
    per_query = [
        sum(per_target(o) for o in group) / len(group) for group in groups.values()
    ]
    return sum(per_query) / len(per_query)


def asr(outcomes) -> float:
    """Fraction of targets whose rank strictly improved, averaged per query."""
    return _query_mean(
        outcomes, lambda o: 1.0 if _get(o, "adv_rank") < _get(o, "orig_rank") else 0.0
    )


def boosted_topk(outcomes, k: int) -> float:
    """Fraction of targets moved from outside the top-k into it, per query.

    Targets already at rank <= k can never count toward the numerator but
    stay in the denominator.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return _query_mean(
        outcomes,
        lambda o: 1.0 if _get(o, "orig_rank") > k and _get(o, "adv_rank") <= k else 0.0,
    )


def avg_boost(outcomes) -> float:
    """Mean rank improvement (orig - adv; demotions negative), per query."""
    return _query_mean(
        outcomes, lambda o: float(_get(o, "orig_rank") - _get(o, "adv_rank"))
    )


@dataclass(frozen=True)
class MetricsReport:
    """Corpus-level metrics plus their per-query decomposition."""

    asr: float
    boosted_top10: float
    boosted_top50: float
    avg_boost: float
    per_query: dict
    counts: dict

    def to_json_dict(self) -> dict:
        return {
            "asr": self.asr,
            "boosted_top10": self.boosted_top10,
            "boosted_top50": self.boosted_top50,
            "avg_boost": self.avg_boost,
            "per_query": self.per_query,
            "counts": self.counts,
        }


def compute_metrics(outcomes) -> MetricsReport:
    """All rank metrics at once, with per-query values and target counts."""
    groups = group_by_qid(outcomes)
    per_query = {
        qid: {
            "asr": asr(group),
            "boosted_top10": boosted_topk(group, 10),
            "boosted_top50": boosted_topk(group, 50),
            "avg_boost": avg_boost(group),
        }
        for qid, group in groups.items()
    }
    return MetricsReport(
        asr=asr(outcomes),
        boosted_top10=boosted_topk(outcomes, 10),
        boosted_top50=boosted_topk(outcomes, 50),
        avg_boost=avg_boost(outcomes),
        per_query=per_query,
        counts={
            "num_queries": len(groups),
            "targets_per_query": {qid: len(group) for qid, group in groups.items()},
        },
    )


def load_familiar_words(path: str) -> frozenset:
    """One lowercase word per line; blank lines ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word:
                words.add(word)
    return frozenset(words)


def dale_chall(text: str, familiar_words) -> float:
    """0.1579 * pct-unfamiliar + 0.0496 * avg sentence length, +3.6365 if hard.

    The bonus applies when strictly more than 5 percent of words fall
    outside the familiar list.  Texts without any countable word score 0.
    """
    words = tokenize(text)
    if not words:
        return 0.0
    sentences = split_sentences(text)
    unfamiliar = sum(1 for w in words if w not in familiar_words)
    pct_unfamiliar = 100.0 * unfamiliar / len(words)
    avg_sentence_len = len(words) / len(sentences)
    score = 0.1579 * pct_unfamiliar + 0.0496 * avg_sentence_len
    if pct_unfamiliar > 5.0:
        score += 3.6365
    return score


def dale_chall_summary(outcomes, familiar_words, text_field: str = "adv_text") -> dict:
    """Pooled and per-query mean readability of one report text field."""
    groups = group_by_qid(outcomes)
    scores = {
        qid: [dale_chall(_get(o, text_field), familiar_words) for o in group]
        for qid, group in groups.items()
    }
    all_scores = [s for group in scores.values() for s in group]
    return {
        "pooled": sum(all_scores) / len(all_scores),
        "per_query": {qid: sum(g) / len(g) for qid, g in scores.items()},
    }
