"""Walk the Rauzy class of (4321): nodes, edges, and one induction run."""

from fractions import Fraction as F

from ietnue import IntervalExchange, path_matrix, rauzy_class, rauzy_step
from ietnue.rauzy import RauzyUndefined
from ietnue.rauzy import inverse_labels

graph = rauzy_class("4321")
print(f"class of (4321): {len(graph.nodes)} permutations, {len(graph.edges)} edges")
for e in graph.edges:
    print(f"  {e.source} --{e.move.value}--> {e.target}")

print("\nthe same edges in the tabulated (inverse) labelling:")
for src, dst, M in inverse_labels(graph)[:4]:
    print(f"  {src} -> {dst}: rows {M.rows}")

M, end = path_matrix("4321", "BBB")
print(f"\nthe loop BBB returns to {end} with matrix rows {M.rows}")

T = IntervalExchange(tuple(F(x, 1020) for x in (101, 211, 307, 401)), "4321")
print("\ntwelve induction steps from lengths (101, 211, 307, 401)/1020:")
for _ in range(12):
    try:
        T, move, _ = rauzy_step(T)
    except RauzyUndefined:
        print("  tie between the two competing lengths; induction stops")
        break
    print(f"  {move.value}: perm {T.perm}, lengths {[str(x) for x in T.lengths]}")
