"""Embedding-space rank attacks on black-box retrieval systems.

The package runs a two-stage attack: sentence embeddings of a target
document are perturbed toward query-derived anchors and decoded back to
text (stage one), then each decoded sentence is inserted at the position
that best balances coherence and relevance (stage two).  The re-ranked
document is scored only afterwards, by a victim model the attack itself
never consults.
"""

from __future__ import annotations

from .anchors import ANCHOR_KINDS, AnchorSet, AnchorText, build_anchor_set, most_similar_sentence
from .constructor import AttackConfig, Candidate, insert, score_pool, select_best
from .decoder import DecoderParams, Hypothesis, build_lexicon, decode, decode_trace
from .metrics import (
    MetricsReport,
    asr,
    avg_boost,
    boosted_topk,
    compute_metrics,
    dale_chall,
    dale_chall_summary,
    load_familiar_words,
)
from .model import (
    Document,
    IngestError,
    ParseError,
    Query,
    RankedList,
    RunEntry,
    TargetSpec,
    load_corpus,
    load_queries,
    load_run,
    load_targets,
    read_report,
    split_sentences,
    write_report,
    write_targets,
)
from .pipeline import (
    AttackError,
    AttackOutcome,
    attack_document,
    attack_run,
    evaluate_rank,
    generate_adversarial_texts,
    query_plus_baseline,
    sample_mixture_pool,
    sample_targets,
)
from .scorers import (
    CachingEmbedder,
    EmbedderSpec,
    ReferenceEmbedder,
    RemoteClient,
    RemoteError,
    ScorerRoles,
)
from .toy import build_toy_universe, mid_rank_targets, rank_corpus, write_toy_files
from .transporter import BOUND_MODES, TransportParams, Trajectory, transport, transport_step
from .vecmath import as_vector, clip_vec, cosine, cosine_gradient, project_linf

__version__ = "0.1.0"

__all__ = [
    "ANCHOR_KINDS",
    "AnchorSet",
    "AnchorText",
    "AttackConfig",
    "AttackError",
    "AttackOutcome",
    "BOUND_MODES",
    "CachingEmbedder",
    "Candidate",
    "DecoderParams",
    "Document",
    "EmbedderSpec",
    "Hypothesis",
    "IngestError",
    "MetricsReport",
    "ParseError",
    "Query",
    "RankedList",
    "ReferenceEmbedder",
    "RemoteClient",
    "RemoteError",
    "RunEntry",
    "ScorerRoles",
    "TargetSpec",
    "Trajectory",
    "TransportParams",
    "as_vector",
    "asr",
    "attack_document",
    "attack_run",
    "avg_boost",
    "boosted_topk",
    "build_anchor_set",
    "build_lexicon",
    "build_toy_universe",
    "clip_vec",
    "compute_metrics",
    "cosine",
    "cosine_gradient",
    "dale_chall",
    "dale_chall_summary",
    "decode",
    "decode_trace",
    "evaluate_rank",
    "generate_adversarial_texts",
    "insert",
    "load_corpus",
    "load_familiar_words",
    "load_queries",
    "load_run",
    "load_targets",
    "mid_rank_targets",
    "most_similar_sentence",
    "project_linf",
    "query_plus_baseline",
    "rank_corpus",
    "read_report",
    "sample_mixture_pool",
    "sample_targets",
    "score_pool",
    "select_best",
    "split_sentences",
    "transport",
    "transport_step",
    "write_report",
    "write_targets",
    "write_toy_files",
]
