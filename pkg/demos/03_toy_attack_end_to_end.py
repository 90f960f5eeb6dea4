"""
A complete attack run on the synthetic toy universe
===================================================

Sixty-four documents, eight queries, reference scorers everywhere.  Mid-
ranked documents are attacked and re-ranked; the victim scorer is only
consulted after each adversarial document is finalized.
"""

import tempfile
from pathlib import Path

from empra import (
    AttackConfig,
    TransportParams,
    attack_run,
    build_toy_universe,
    compute_metrics,
    mid_rank_targets,
    read_report,
    write_report,
)

# The toy universe ranks every document by actually scoring it, so an
# unmodified document re-evaluates to exactly its run-file rank.
corpus, queries, runs, roles = build_toy_universe(dim=64, scorer_seed=0)
print(f"{len(corpus)} documents, {len(queries)} queries")
print(f"query q0: {queries['q0'].text!r}")

# Attack the documents at ranks 20 and 45 of each query's list.
targets = mid_rank_targets(runs, ranks=(20, 45))
cfg = AttackConfig(alpha=0.5, transport=TransportParams(iters=4), max_accepted_edits=4)
outcomes, errors = attack_run(queries, corpus, runs, targets, cfg, roles, workers=4)
assert not errors

print(f"\n{'target':>10} {'orig':>5} {'adv':>4} {'boost':>6}  inserted at")
for o in outcomes:
    print(
        f"{o.qid + '/' + o.docid:>10} {o.orig_rank:>5} {o.adv_rank:>4} "
        f"{o.boost:>+6}  gap {o.position}"
    )

# Reports are byte-deterministic JSONL, sorted by (qid, docid).
report_path = Path(tempfile.mkdtemp()) / "toy_report.jsonl"
write_report(outcomes, str(report_path))
rows = read_report(str(report_path))
print(f"\nwrote {len(rows)} outcomes to {report_path}")

metrics = compute_metrics(outcomes)
print(f"ASR {metrics.asr:.3f}, boosted@10 {metrics.boosted_top10:.3f}, "
      f"avg boost {metrics.avg_boost:.1f}")

sample = outcomes[0]
print(f"\none adversarial document ({sample.qid}/{sample.docid}):")
print(f"  inserted: {sample.adv_text!r}")
print(f"  {sample.adv_document}")
