"""Build the block matrices N1, N2 and a depth-2 chain M_1, M_2 from a seeded spec."""

from ietnue.paths import PAPER, block_runs, build_chain, n1, n2, sample_mk
from ietnue.sl2 import GOLDEN, h1, h2

A, r = GOLDEN @ h1(1), 3
print(f"N1(A, r) for A = {A.rows}, r = {r}:")
for row in n1(A, r).rows:
    print("  ", row)
print("its lower-right 2x2 block equals A H2^r H1 =", (A @ h2(r) @ h1(1)).rows)
print("N2 is the index-reversed twin:", n2(A, r).rows[0])
print("move word of N1 as runs:", [(m.value, n) for m, n in block_runs(A, r, 1)])

spec = sample_mk(2, seed=0, profile=PAPER)
print(f"\npaper-scale spec, seed 0, hash {spec.content_hash()[:16]}...")
for i, (a, rr) in enumerate(zip(spec.A, spec.r), start=3):
    print(f"  |A_{i}| = {a.norm}, r_{i + 1} has {len(str(rr))} digits")
for k, M in enumerate(build_chain(spec), start=1):
    print(f"M_{k}: largest entry has {M.max_digits()} digits, det = {M.det()}")
