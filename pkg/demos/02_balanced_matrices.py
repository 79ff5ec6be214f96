"""Continued-fraction words for positive SL2 matrices and the quadratic count of balanced ones."""

from ietnue.sl2 import GOLDEN, count_balanced, decompose, growth_exponent, h1, h2, is_balanced, sin2_column_angle

A = h1(3) @ h2(2) @ h1(1)
print(f"A = {A.rows}, word {decompose(A).word()}, |A| = {A.norm}")
print(f"sin^2 of its column angle: {sin2_column_angle(A)}")
print(f"2-balanced? {is_balanced(A, 2)}; after the golden tail: {is_balanced(A @ GOLDEN, 2)}")

Rs = [2 ** e for e in range(4, 11)]
counts = [count_balanced(R, 2) for R in Rs]
for R, n in zip(Rs, counts):
    print(f"  R = {R:5d}: {n:7d} matrices, count/R^2 = {n / R**2:.3f}")
print(f"fitted growth exponent: {growth_exponent(Rs, counts):.3f}")
