"""
Moving a sentence toward a query, then turning the vector back into text
========================================================================

Stage 1 of the attack in isolation: embed one document sentence, walk its
embedding toward a query anchor with small clipped gradient steps, and
decode the perturbed embedding back into a sentence.
"""

import numpy as np

from empra import DecoderParams, ReferenceEmbedder, TransportParams, build_lexicon, cosine, decode_trace, transport

# A deterministic embedder: hashed signed bag-of-words, unit-normalized.
embedder = ReferenceEmbedder(dim=64, seed=0)

sentence = "Leafy greens carry folate and other minerals."
query = "folate supplements during pregnancy"

s0 = embedder.embed([sentence])[0]
anchor = embedder.embed([query])[0]
print(f"cosine(sentence, query) before transport: {cosine(s0, anchor):+.4f}")

# Walk 25 steps; each per-coordinate move is bounded by eta * epsilon.
params = TransportParams(eta=0.1, epsilon=0.01, iters=25)
trajectory = transport(s0, anchor, params)
for t in (0, 5, 15, 25):
    c = cosine(trajectory.states[t], anchor)
    print(f"  step {t:>2}: cosine to anchor {c:+.4f}")

drift = np.max(np.abs(trajectory.final - s0))
print(f"max per-coordinate drift after 25 steps: {drift:.5f}")

# With default bounds the perturbation is tiny by design, so the decoder
# usually keeps the sentence as-is.  Exaggerate the walk to make the
# decoding visible: the decoder greedily edits the sentence -
# substituting, inserting, or deleting one word at a time - keeping any
# edit that moves the sentence embedding closer to the perturbed target.
strong = transport(s0, anchor, TransportParams(epsilon=0.05, iters=60))
lexicon = build_lexicon(sentence, query)
decoder_params = DecoderParams(lexicon=lexicon, max_accepted_edits=8)
text, trace = decode_trace(strong.final, sentence, embedder, decoder_params)

print(f"\ndecoded in {len(trace) - 1} accepted edits:")
for hyp in trace:
    print(f"  {hyp.score:+.4f}  {hyp.text}")
print(f"\nbefore: {sentence}")
print(f"after:  {text}")
final = embedder.embed([text])[0]
print(f"cosine(decoded, query): {cosine(final, anchor):+.4f}")
