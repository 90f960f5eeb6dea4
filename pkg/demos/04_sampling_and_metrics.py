"""
Target sampling regimes and evaluation metrics
==============================================

Easy-5 draws one target per rank decade between 51 and 100; Hard-5 takes
ranks 996-1000 outright; Mixture alternates the two.  Metrics average
per-query means, and Dale-Chall scores the inserted sentences' reading
level.
"""

from empra import (
    RankedList,
    RunEntry,
    boosted_topk,
    compute_metrics,
    dale_chall,
    sample_mixture_pool,
    sample_targets,
)

# A synthetic 1000-deep ranked list for one query.
deep = RankedList(
    qid="q1",
    entries=tuple(
        RunEntry(docid=f"d{i:04d}", score=float(1000 - i), rank=i + 1)
        for i in range(1000)
    ),
)

for mode in ("easy5", "hard5", "mixture"):
    targets = sample_targets(deep, mode, rng_seed=0)
    ranks = [t.original_rank for t in targets]
    print(f"{mode:>8}: {ranks}")

# Across queries, the mixture pool round-robins to a fixed total.
runs = {f"q{i}": deep for i in range(8)}
pool = sample_mixture_pool(runs, total=32, rng_seed=0)
print(f"mixture pool: {len(pool)} targets, "
      f"{sum(t.difficulty == 'easy' for t in pool)} easy, "
      f"{sum(t.difficulty == 'hard' for t in pool)} hard")

# Metrics are unweighted means over queries of per-query means.
outcomes = [
    {"qid": "q1", "docid": "a", "orig_rank": 91, "adv_rank": 1, "boost": 90},
    {"qid": "q1", "docid": "b", "orig_rank": 55, "adv_rank": 70, "boost": -15},
    {"qid": "q2", "docid": "c", "orig_rank": 996, "adv_rank": 11, "boost": 985},
]
report = compute_metrics(outcomes)
print(f"\nASR {report.asr:.3f}, avg boost {report.avg_boost:.1f}")
print(f"boosted@10 {report.boosted_top10:.3f}, boosted@50 {report.boosted_top50:.3f}")
# The 996 -> 11 outcome counts at k=50 but not at k=10.
print(f"boosted@k for the hard target alone: "
      f"k=10 {boosted_topk([outcomes[2]], 10):.0f}, "
      f"k=50 {boosted_topk([outcomes[2]], 50):.0f}")

# Readability: fraction of unfamiliar words plus sentence length.
familiar = {"the", "cat", "and", "dog", "ran", "to", "big", "barn"}
for text in ("The cat and the dog ran to the big barn.",
             "Ferritin saturation thresholds vary."):
    print(f"Dale-Chall {dale_chall(text, familiar):7.4f}  {text!r}")
