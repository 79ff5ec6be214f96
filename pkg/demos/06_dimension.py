"""Frostman ball-mass regressions on a cube, a segment tree and the nested S_k family."""

from ietnue.fractal import CubeFamily, DeletionRule, SkSource, ball_mass_exponent, build_family, dimension_bound, tree_family, verify_conditions

print("dimension_bound(12, 8/3) =", dimension_bound(12, "8/3"))
print(f"cube family slope:         {ball_mass_exponent(CubeFamily(), samples=16).slope:.3f}")
print(f"segment tree (4-ary) slope: {ball_mass_exponent(tree_family([4] * 6), samples=16).slope:.3f}")

fam = build_family(3, SkSource(), DeletionRule(neighborhood_from_level=1))
print(f"\nS_k family level sizes: {[L.n for L in fam.levels]}")
cond = verify_conditions(fam, check_overlaps=False)
print(f"child-count quadratic lead a = {cond.a:.3f} ({cond.a_method})")
print(f"boundary-clearance cubic lead -b, b = {cond.b:.3f} ({cond.b_method})")
fit = ball_mass_exponent(fam, samples=16)
print(f"ball-mass slope {fit.slope:.3f} against 1 + a/(3b) - 0.3 = {cond.bound - 0.3:.3f}")
