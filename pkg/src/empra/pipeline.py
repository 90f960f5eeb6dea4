"""End-to-end attack orchestration and target sampling.

Per target: build anchors, generate adversarial texts (Stage 1), pick
the best insertion (Stage 2), then — and only then — consult the victim
scorer to re-rank the perturbed document against the rest of its ranked
list.  Victim scores of the unperturbed competitors are computed once
per query and shared across that query's targets.
"""

from __future__ import annotations

import math
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .anchors import build_anchor_set
from .constructor import AttackConfig, insert, select_best
from .decoder import DecoderParams, build_lexicon, decode
from .model import Document, Query, RankedList, TargetSpec
from .transporter import transport

__all__ = [
    "AttackOutcome",
    "AttackError",
    "evaluate_rank",
    "generate_adversarial_texts",
    "attack_document",
    "query_plus_baseline",
    "sample_targets",
    "sample_mixture_pool",
    "attack_run",
]


@dataclass(frozen=True)
class AttackOutcome:
    """Everything reportable about one attacked target."""

    qid: str
    docid: str
    orig_rank: int
    adv_rank: int
    boost: int
    success: bool
    adv_text: str
    position: int | None
    c_coh: float | None
    c_rel_norm: float | None
    score_interp: float | None
    core_sim: float | None
    adv_document: str

    def __post_init__(self):
        if self.orig_rank < 1 or self.adv_rank < 1:
            raise ValueError("ranks must be positive")
        if self.boost != self.orig_rank - self.adv_rank:
            raise ValueError("boost must equal orig_rank - adv_rank")
        if self.success != (self.boost > 0):
            raise ValueError("success must mean a strictly positive boost")


@dataclass(frozen=True)
class AttackError:
    """A per-target failure that did not abort the batch."""

    qid: str
    docid: str
    message: str


def evaluate_rank(adv_score: float, other_scores) -> int:
    """Rank among fixed competitors; ties favor the incumbents."""
    if not math.isfinite(adv_score):
        raise ValueError(f"adversarial score must be finite, got {adv_score}")
    return 1 + sum(1 for s in other_scores if s >= adv_score)


def generate_adversarial_texts(
    d: Document,
    anchors,
    cfg: AttackConfig,
    embedder,
    extra_vocab_texts=(),
) -> list[str]:
    """Stage 1: one decoded text per (sentence, anchor), deduplicated.

    Each sentence embedding is transported toward each of its anchors;
    the decoder turns intermediate embeddings back into text, re-seeding
    from the previous hypothesis each iteration (or only after the final
    iteration when so configured).  Output order is sentence index, then
    anchor order; duplicates keep their first occurrence.
    """
    if not d.sentences:
        return []
    missing = [i for i in range(len(d.sentences)) if i not in anchors.per_sentence]
    if missing:
        raise ValueError(f"anchor set misses sentence indices {missing}")
    if cfg.lexicon is not None:
        lexicon = cfg.lexicon
    else:
        anchor_texts = [a.text for i in range(len(d)) for a in anchors[i]]
        lexicon = build_lexicon(d.text, *anchor_texts, *extra_vocab_texts)
    params = DecoderParams(
        lexicon=lexicon,
        max_accepted_edits=cfg.max_accepted_edits,
        length_cap=cfg.length_cap,
    )
    out: list[str] = []
    for idx, sentence in enumerate(d.sentences):
        svec = embedder.embed([sentence])[0]
        for anchor in anchors[idx]:
            avec = embedder.embed([anchor.text])[0]
            try:
                traj = transport(svec, avec, cfg.transport)
                if cfg.decode_final_only:
                    text = decode(traj.final, sentence, embedder, params)
                else:
                    text = sentence
                    for state in traj.states[1:]:
                        text = decode(state, text, embedder, params)
            except Exception as exc:
                raise RuntimeError(
                    f"stage 1 failed at sentence {idx}, anchor {anchor.kind!r}: {exc}"
                ) from exc
            out.append(text)
    return list(dict.fromkeys(out))


def attack_document(
    q: Query,
    d: Document,
    ranked: RankedList,
    corpus,
    cfg: AttackConfig,
    roles,
    victim_scores=None,
) -> AttackOutcome:
    """Run both stages on one target and evaluate its new rank.

    ``victim_scores`` may be a docid-to-score mapping for the ranked
    list, or a zero-argument callable producing one (evaluated only at
    rank-evaluation time, preserving black-box call ordering); when
    omitted, the scores are computed here.
    """
    orig_rank = ranked.rank_of(d.docid)
    if orig_rank is None:
        raise ValueError(f"document {d.docid!r} is not in the ranked list for {q.qid!r}")
    top_entry = next((e for e in ranked.entries if e.docid != d.docid), None)
    top_doc = corpus[top_entry.docid] if top_entry is not None else None

    anchors = build_anchor_set(d, q, top_doc, cfg.anchor_kinds, roles.embedder)
    extra_vocab = (top_doc.text,) if top_doc is not None else ()
    t_adv = generate_adversarial_texts(
        d, anchors, cfg, roles.embedder, extra_vocab_texts=extra_vocab
    )
    adv_doc, winner = select_best(d, q, t_adv, cfg, roles)

    # Rank evaluation: the only place the victim scorer is consulted.
    if callable(victim_scores):
        victim_scores = victim_scores()
    if victim_scores is None:
        scores = roles.victim.score(q.text, [corpus[e.docid].text for e in ranked.entries])
        victim_scores = {e.docid: float(s) for e, s in zip(ranked.entries, scores)}
    adv_score = float(roles.victim.score(q.text, [adv_doc.text])[0])
    others = [victim_scores[e.docid] for e in ranked.entries if e.docid != d.docid]
    adv_rank = evaluate_rank(adv_score, others)

    adv_text = adv_doc.sentences[winner.position] if winner.position is not None else ""
    return AttackOutcome(
        qid=q.qid,
        docid=d.docid,
        orig_rank=orig_rank,
        adv_rank=adv_rank,
        boost=orig_rank - adv_rank,
        success=adv_rank < orig_rank,
        adv_text=adv_text,
        position=winner.position,
        c_coh=winner.c_coh,
        c_rel_norm=winner.c_rel_norm,
        score_interp=winner.score_interp,
        core_sim=winner.core_sim,
        adv_document=adv_doc.text,
    )


def query_plus_baseline(q: Query, d: Document) -> Document:
    """The query text prepended as a new first sentence."""
    return insert(d, q.text, 0)


def _easy_draws(rng: random.Random) -> list[int]:
    return [rng.randint(51 + 10 * i, 60 + 10 * i) for i in range(5)]


_HARD_RANKS = (996, 997, 998, 999, 1000)


def sample_targets(ranked: RankedList, mode: str, rng_seed: int = 0) -> list[TargetSpec]:
    """Targets of one ranked list: easy decades, the hard tail, or both.

    easy5 draws one rank uniformly from each decade 51-60 through 91-100;
    hard5 is deterministically ranks 996-1000; mixture interleaves the
    two sequences (easy first).  Draws are reproducible from rng_seed.
    """
    if mode == "easy5":
        if ranked.depth < 100:
            raise ValueError(f"easy5 needs depth >= 100, got {ranked.depth}")
        picks = [(r, "easy") for r in _easy_draws(random.Random(rng_seed))]
    elif mode == "hard5":
        if ranked.depth < 1000:
            raise ValueError(f"hard5 needs depth >= 1000, got {ranked.depth}")
        picks = [(r, "hard") for r in _HARD_RANKS]
    elif mode == "mixture":
        if ranked.depth < 1000:
            raise ValueError(f"mixture needs depth >= 1000, got {ranked.depth}")
        easy = _easy_draws(random.Random(rng_seed))
        picks = []
        for e, h in zip(easy, _HARD_RANKS):
            picks.append((e, "easy"))
            picks.append((h, "hard"))
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    return [
        TargetSpec(
            qid=ranked.qid,
            docid=ranked.entries[rank - 1].docid,
            difficulty=difficulty,
            original_rank=rank,
        )
        for rank, difficulty in picks
    ]


def sample_mixture_pool(runs, total: int = 32, rng_seed: int = 0) -> list[TargetSpec]:
    """A cross-query pool assembled round-robin from per-query mixtures.

    Queries are visited in sorted qid order, taking one target from each
    query's interleaved easy/hard sequence per round until ``total``
    targets are collected.
    """
    qids = sorted(runs)
    if not qids:
        raise ValueError("no ranked lists to sample from")
    per_list = {
        qid: sample_targets(runs[qid], "mixture", rng_seed + i)
        for i, qid in enumerate(qids)
    }
    pool: list[TargetSpec] = []
    depth = max(len(v) for v in per_list.values())
    for j in range(depth):
        for qid in qids:
            if len(pool) == total:
                return pool
            if j < len(per_list[qid]):
                pool.append(per_list[qid][j])
    if len(pool) < total:
        raise ValueError(f"only {len(pool)} targets available, wanted {total}")
    return pool


class _SharedVictimTable:
    """Lazily computed victim scores of one query's ranked list."""

    def __init__(self, roles, q: Query, ranked: RankedList, corpus):
        self._roles = roles
        self._q = q
        self._ranked = ranked
        self._corpus = corpus
        self._lock = threading.Lock()
        self._table = None

    def __call__(self):
        with self._lock:
            if self._table is None:
                texts = [self._corpus[e.docid].text for e in self._ranked.entries]
                scores = self._roles.victim.score(self._q.text, texts)
                self._table = {
                    e.docid: float(s)
                    for e, s in zip(self._ranked.entries, scores)
                }
            return self._table


def attack_run(
    queries,
    corpus,
    runs,
    targets,
    cfg: AttackConfig,
    roles,
    workers: int = 1,
    progress=None,
) -> tuple[list[AttackOutcome], list[AttackError]]:
    """Attack every target, isolating per-target failures.

    Returns (outcomes, errors), both sorted by (qid, docid) so output is
    independent of completion order.  ``progress``, when given, is called
    with a one-line status string after each target.
    """
    tables: dict[str, _SharedVictimTable] = {}
    for t in targets:
        if t.qid in tables or t.qid not in queries or t.qid not in runs:
            continue
        tables[t.qid] = _SharedVictimTable(roles, queries[t.qid], runs[t.qid], corpus)

    def work(t: TargetSpec):
        if t.qid not in queries:
            result = AttackError(t.qid, t.docid, "unknown qid")
        elif t.qid not in runs:
            result = AttackError(t.qid, t.docid, "no ranked list for qid")
        elif t.docid not in corpus:
            result = AttackError(t.qid, t.docid, "docid not in corpus")
        else:
            try:
                result = attack_document(
                    queries[t.qid],
                    corpus[t.docid],
                    runs[t.qid],
                    corpus,
                    cfg,
                    roles,
                    victim_scores=tables[t.qid],
                )
            except Exception as exc:
                result = AttackError(t.qid, t.docid, str(exc))
        if progress is not None:
            if isinstance(result, AttackOutcome):
                progress(
                    f"{result.qid}/{result.docid}: rank {result.orig_rank} -> "
                    f"{result.adv_rank} (boost {result.boost})"
                )
            else:
                progress(f"{result.qid}/{result.docid}: ERROR {result.message}")
        return result

    if workers <= 1:
        results = [work(t) for t in targets]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, targets))

    outcomes = [r for r in results if isinstance(r, AttackOutcome)]
    errors = [r for r in results if isinstance(r, AttackError)]
    outcomes.sort(key=lambda o: (o.qid, o.docid))
    errors.sort(key=lambda e: (e.qid, e.docid))
    return outcomes, errors
