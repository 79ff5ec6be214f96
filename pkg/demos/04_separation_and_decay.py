"""Measure the two column groups of paper-scale chains: separation, within-group decay, column sums."""

from ietnue.geometry import check_column_sums, decay_profile, span_separation_bound
from ietnue.paths import DESK, PAPER, build_chain, n1, sample_mk

spec = sample_mk(2, seed=0, profile=PAPER)
chain = build_chain(spec)
rep = span_separation_bound(chain, n1(spec.A[0], spec.r[0]))
print(f"certified separation after the recursion: {rep.certified} = {float(rep.certified):.4f}")
print(f"measured base sin^2 {float(rep.base_sin2):.3e}; along the chain {[f'{float(s):.3e}' for s in rep.measured_sin2]}")
print(f"base > 1/10 holds: {rep.base_ok}; measured > 1/900 holds: {rep.measured_ok}")

for k, M in enumerate(chain, start=1):
    cs = check_column_sums(M, k)
    print(f"column sums at k={k}: ok={cs.ok}; {cs.violations[:1]}")

prof = decay_profile(build_chain(sample_mk(4, seed=0, profile=DESK)), with_between=False)
print("\ndesk chain, log10 within-group angles:")
for k, a, b in zip(prof.ks, prof.log10_c12, prof.log10_c34):
    print(f"  k={k}: C1C2 {a:9.2f}   C3C4 {b:9.2f}")
print("cubic leading coefficients in log2 units:", {w: round(float(prof.fit(w, 3, 2)[0]), 3) for w in ("C12", "C34")})
