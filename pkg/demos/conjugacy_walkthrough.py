"""Conjugates and biconjugates of functions of the support mapping.

The coupling c(x, y) = <x, y> / ||x|| (with c(0, y) = 0) is constant
along rays, so conjugating a function of the support mapping F o supp
reduces to a finite maximum over subsets.  For a strictly monotone
source norm the biconjugate recovers F o supp exactly on the whole
space; for the sup norm it does not, and this script exhibits the gap.

Run:  python3 demos/conjugacy_walkthrough.py
"""

import numpy as np

from capracalc.capra import (
    CapraContext,
    capra_biconjugate_fsm,
    capra_conjugate_fsm,
    capra_coupling,
    construct_subgradient,
    subdiff_membership,
)
from capracalc.norms import LpNorm
from capracalc.setfunctions import SetFunction
from capracalc.subsets import INF, support

print("=== The coupling is constant along rays ===")
ctx = CapraContext(LpNorm(2))
x, y = np.array([1.0, 2.0]), np.array([3.0, -1.0])
for t in (0.5, 1.0, 7.0):
    print(f"c({t:>3} * x, y) = {capra_coupling(ctx, t * x, y):.6f}")
print()

print("=== Conjugate of the cardinality of the support ===")
F = SetFunction.cardinality(2)
y = np.array([3.0, 4.0])
val = capra_conjugate_fsm(ctx, F, y)
print(f"F*(y) at y = {y}: {val:.6f}")
print("By hand: max over subsets K of [dual-coordinate norm of y at K")
print("minus F(K)] = max(0-0, 3-1, 4-1, 5-2) = 3.  The formula agrees.")
print()

print("=== Exact biconjugate recovery (strictly monotone source) ===")
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(20):
    G = SetFunction.random_nondecreasing(3, rng)
    ctx3 = CapraContext(LpNorm(2))
    x = rng.standard_normal(3)
    fsm = G.value(support(x))
    bi = capra_biconjugate_fsm(ctx3, G, x)
    worst = max(worst, abs(bi - fsm))
print(f"largest |biconjugate - F o supp| over 20 random instances: {worst:.2e}")
print()

print("=== The sup norm breaks recovery ===")
ctx_inf = CapraContext(LpNorm(INF))
G = SetFunction(2, [0.0, 1.0, 1.0, 2.0])
x = np.array([1.0, 0.3])
bi = capra_biconjugate_fsm(ctx_inf, G, x)
print(f"x = {x}: biconjugate = {bi:.4f} < F(supp(x)) = {G.value(support(x)):.4f}")
print("Under the sup norm distinct supports share dual exposed faces, so")
print("the convexification genuinely loses information off the axes.")
print()

print("=== Subgradients ===")
ctx = CapraContext(LpNorm(2))
F = SetFunction.cardinality(2)
x = np.array([0.0, 2.0])
g = construct_subgradient(ctx, F, x)
print(f"constructed subgradient at x = {x}: {g}")
print(f"membership check: {subdiff_membership(ctx, F, x, g).member}")
probe = np.array([1.0, 1.0])
lhs = F.value(support(probe))
rhs = F.value(support(x)) + capra_coupling(ctx, probe, g) - capra_coupling(ctx, x, g)
print(f"subgradient inequality at a probe: {lhs:.4f} >= {rhs:.4f}")
