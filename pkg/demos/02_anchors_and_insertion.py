"""
Choosing anchors and the best insertion point
=============================================

Stage 2 of the attack: every adversarial sentence is tried at every gap
of the target document, and the gap is scored by interpolating coherence
(next-sentence compatibility on both sides) with normalized relevance.
"""

from empra import (
    AttackConfig,
    Document,
    Query,
    ScorerRoles,
    build_anchor_set,
    score_pool,
    select_best,
)

roles = ScorerRoles.reference(dim=64, seed=0)

q = Query(qid="q1", text="iron deficiency anemia treatment")
target = Document.from_text(
    "target",
    "Fatigue has many causes. Some people sleep badly. Diet also plays a role.",
)
top_ranked = Document.from_text(
    "leader",
    "Iron deficiency anemia responds to supplements. Doctors measure ferritin first.",
)

# Three anchor kinds per sentence: the query itself, the document that
# currently leads the ranking, and that document's most similar sentence.
anchors = build_anchor_set(target, q, top_ranked, ("query", "top_doc", "aligned_sentence"), roles.embedder)
for idx in range(len(target)):
    kinds = [a.kind for a in anchors[idx]]
    print(f"sentence {idx}: anchors {kinds}")

# Score a small hand-made pool: two candidate sentences, every gap.
t_adv = ["Iron supplements treat anemia.", "Ferritin tests guide treatment."]
cfg = AttackConfig(alpha=0.5)
pool = score_pool(target, q, t_adv, cfg, roles)

print(f"\n{len(pool)} candidates (2 texts x {len(target) + 1} gaps):")
print(f"{'text':>4} {'gap':>3} {'coh':>7} {'rel':>7} {'interp':>7}")
for cand in pool:
    print(
        f"{cand.adv_text_idx:>4} {cand.position:>3} "
        f"{cand.c_coh:7.4f} {cand.c_rel_norm:7.4f} {cand.score_interp:7.4f}"
    )

adv_doc, winner = select_best(target, q, t_adv, cfg, roles)
print(f"\nwinner: text {winner.adv_text_idx} at gap {winner.position}")
print(f"adversarial document: {adv_doc.text}")
