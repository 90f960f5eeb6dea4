"""A deterministic synthetic retrieval universe for experiments and tests.

Sixty-four documents over eight topics, eight single-topic queries, and
per-query ranked lists produced by actually scoring every document with
the configured victim scorer — so re-evaluating an unmodified document
always reproduces its run rank.  Documents mix topic vocabulary with
shared filler at tiered intensities, which spreads victim scores densely
across each ranking.
"""

from __future__ import annotations

import os

import numpy as np

from .model import Document, Query, RankedList, RunEntry, TargetSpec
from .scorers import ScorerRoles

__all__ = ["build_toy_universe", "rank_corpus", "write_toy_files", "mid_rank_targets"]

_TOPICS = (
    ["iron", "blood", "anemia", "hemoglobin", "oxygen", "fatigue", "red", "cells"],
    ["folate", "pregnancy", "prenatal", "neural", "tube", "growth", "fetal", "vitamin"],
    ["zinc", "skin", "healing", "wound", "immune", "enzyme", "repair", "mineral"],
    ["calcium", "bone", "density", "teeth", "dairy", "skeleton", "fracture", "milk"],
    ["sleep", "insomnia", "melatonin", "rest", "circadian", "night", "dream", "fatigue"],
    ["exercise", "muscle", "strength", "training", "cardio", "endurance", "fitness", "gym"],
    ["sugar", "glucose", "insulin", "diabetes", "carbohydrate", "energy", "sweet", "blood"],
    ["heart", "cardiac", "artery", "pressure", "cholesterol", "pulse", "valve", "oxygen"],
)

_FILLER = [
    "the", "a", "daily", "levels", "health", "body", "people", "often",
    "study", "research", "shows", "helps", "supports", "affects", "common",
    "important", "doctors", "patients", "diet", "intake",
]


def _sentence(rng, topic_words, filler_share: float) -> str:
    length = int(rng.integers(5, 9))
    words = []
    for _ in range(length):
        pool = _FILLER if rng.random() < filler_share else topic_words
        words.append(pool[int(rng.integers(0, len(pool)))])
    return (" ".join(words)).capitalize() + "."


def build_toy_universe(
    dim: int = 64,
    content_seed: int = 0,
    scorer_seed: int = 0,
    victim_seed: int | None = None,
    num_docs: int = 64,
    num_queries: int = 8,
):
    """Build (corpus, queries, runs, roles) with victim-consistent rankings.

    Victim scores are required to be distinct within each query (rank
    arithmetic in tests must be tie-free); the content seed is advanced
    internally until that holds, so the result is still a pure function
    of the arguments.
    """
    if not 1 <= num_queries <= len(_TOPICS):
        raise ValueError(f"num_queries must lie in [1, {len(_TOPICS)}]")
    roles = ScorerRoles.reference(dim=dim, seed=scorer_seed, victim_seed=victim_seed)
    for attempt in range(64):
        rng = np.random.default_rng(content_seed + 1000 * attempt)
        queries = {}
        for qi in range(num_queries):
            topic = _TOPICS[qi]
            words = [topic[int(rng.integers(0, len(topic)))] for _ in range(3)]
            queries[f"q{qi}"] = Query(qid=f"q{qi}", text=" ".join(words))
        corpus = {}
        for di in range(num_docs):
            topic = _TOPICS[di % num_queries]
            tier = di // num_queries  # higher tier -> more filler, lower scores
            filler_share = min(0.15 + 0.11 * tier, 0.95)
            n_sent = int(rng.integers(2, 5))
            body = [_sentence(rng, topic, filler_share) for _ in range(n_sent)]
            # Every query's tokens appear once in a closing sentence, which
            # keeps all query-document cosines nonzero and (with the body
            # variation) keeps per-query score rankings tie-free.
            tail_words = []
            for q in queries.values():
                tail_words.extend(q.text.split())
            body.append((" ".join(tail_words)).capitalize() + ".")
            docid = f"D{di:02d}"
            corpus[docid] = Document.from_text(docid, " ".join(body))
        runs = rank_corpus(queries, corpus, roles.victim)
        if all(_distinct_scores(r) for r in runs.values()):
            return corpus, queries, runs, roles
    raise RuntimeError("could not build a tie-free toy universe")


def _distinct_scores(ranked: RankedList) -> bool:
    scores = [e.score for e in ranked.entries]
    return len(set(scores)) == len(scores)


def rank_corpus(queries, corpus, scorer) -> dict[str, RankedList]:
    """Score every document per query and rank descending (docid tiebreak)."""
    docids = sorted(corpus)
    runs = {}
    for qid, q in queries.items():
        scores = scorer.score(q.text, [corpus[d].text for d in docids])
        order = sorted(zip(docids, scores), key=lambda t: (-t[1], t[0]))
        entries = tuple(
            RunEntry(docid=d, score=float(s), rank=i + 1)
            for i, (d, s) in enumerate(order)
        )
        runs[qid] = RankedList(qid=qid, entries=entries)
    return runs


def mid_rank_targets(runs, ranks=(20, 45), difficulty: str = "easy") -> list[TargetSpec]:
    """One TargetSpec per (query, requested rank), for mid-list attack demos."""
    targets = []
    for qid in sorted(runs):
        ranked = runs[qid]
        for rank in ranks:
            if rank > ranked.depth:
                raise ValueError(f"rank {rank} deeper than list for {qid!r}")
            entry = ranked.entries[rank - 1]
            targets.append(
                TargetSpec(
                    qid=qid, docid=entry.docid, difficulty=difficulty, original_rank=rank
                )
            )
    return targets


def write_toy_files(dirpath: str, **universe_kwargs) -> dict:
    """Materialize the toy universe as corpus.tsv, queries.tsv, and run.txt."""
    corpus, queries, runs, _roles = build_toy_universe(**universe_kwargs)
    paths = {
        "corpus": os.path.join(dirpath, "corpus.tsv"),
        "queries": os.path.join(dirpath, "queries.tsv"),
        "run": os.path.join(dirpath, "run.txt"),
    }
    with open(paths["corpus"], "w", encoding="utf-8") as fh:
        for docid in sorted(corpus):
            fh.write(f"{docid}\t{corpus[docid].text}\n")
    with open(paths["queries"], "w", encoding="utf-8") as fh:
        for qid in sorted(queries):
            fh.write(f"{qid}\t{queries[qid].text}\n")
    with open(paths["run"], "w", encoding="utf-8") as fh:
        for qid in sorted(runs):
            for e in runs[qid].entries:
                fh.write(f"{qid} Q0 {e.docid} {e.rank} {e.score:.17g} toy\n")
    return paths
