"""Emit a witness IET from a depth-2 chain, replay its Rauzy path, and compare orbit frequencies."""

from fractions import Fraction as F

from ietnue.nue import endpoint_divergence, limit_segment, replay, witness_iet
from ietnue.paths import PAPER, build_chain, n1, sample_mk

spec = sample_mk(2, seed=0, profile=PAPER)
chain = build_chain(spec)
seg = limit_segment(chain, n1(spec.A[0], spec.r[0]))
print(f"columns cluster as {seg.clustering.labels} ({seg.clustering.rule})")

T = witness_iet(seg, F(1, 2))
rep = replay(T, spec.runs(), chain[-1])
moves = sum(n for _, n in rep.expected)
print(f"witness lengths ~ {[f'{float(x):.6f}' for x in T.lengths]}")
print(f"replayed {len(rep.expected)} runs ({len(str(moves))}-digit move count): matched={rep.matched}, in cylinder={rep.in_cylinder}")

comp = endpoint_divergence(seg, 20000)
print(f"orbit frequency gap between near-endpoint witnesses: {float(comp.witness.divergence):.2e}")
print(f"gap for two orbits of the golden rotation control:  {float(comp.control.divergence):.2e}")
print(f"L1 gap between the segment ends themselves:         {float(comp.expected_divergence):.2e}")
