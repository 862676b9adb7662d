"""The ray-constant coupling and its conjugacy calculus for functions
of the support mapping (FSM).

The coupling c(x, y) = <x, y> / ||x|| (and 0 at x = 0) is constant
along primal rays, so its conjugates see only the behaviour of a
function on the unit sphere of the source norm.  For an FSM
x -> F(supp(x)) the conjugate admits a closed form as a finite sup over
subsets of local dual norms, and the biconjugate is the hidden-convexity
function composed with normalization; both are implemented here and
cross-checked against sampling oracles in the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import variational
from .localnorms import LocalNormFamily
from .norms import NormSpec
from .setfunctions import SetFunction
from .subsets import (
    INF,
    as_vector,
    enumerate_subsets,
    low_add,
    support,
    upp_add,
)

#: absolute tolerance for equality certificates, scaled by magnitudes
EQ_TOL = 1e-6
#: slack allowed when testing membership of an argmax (tie tolerance)
TIE_TOL = 1e-9
#: cap of the doubling search for subgradient scalings
LAMBDA_CAP = 2**40


class CapraContext:
    """A source norm together with its local norm families."""

    def __init__(self, norm: NormSpec, seed: int = 0):
        self.norm = norm
        self.family = LocalNormFamily(norm, seed=seed)

    def coupling(self, x, y) -> float:
        x, y = as_vector(x), as_vector(y)
        if not np.any(x):
            return 0.0
        return float(x @ y) / self.norm.eval(x)

    def normalize(self, x) -> np.ndarray:
        x = as_vector(x)
        if not np.any(x):
            return x.copy()
        return x / self.norm.eval(x)


def capra_coupling(ctx: CapraContext, x, y) -> float:
    return ctx.coupling(x, y)


def normalize(ctx: CapraContext, x) -> np.ndarray:
    return ctx.normalize(x)


# ---------------------------------------------------------------------------
# Conjugates.


def fenchel_conjugate_fsm(F: SetFunction, y) -> float:
    """Classic Fenchel conjugate of the FSM (the reason the coupling is
    needed): sup of -F(empty) and the origin-indicator term, which makes
    the conjugate +inf off the origin whenever F is somewhere finite off
    the empty set."""
    y = as_vector(y)
    inf_off_empty = float(np.min(F.values[1:]))
    indicator = 0.0 if not np.any(y) else INF
    return max(-F.value(0), low_add(indicator, -inf_off_empty))


def capra_conjugate_fsm(ctx: CapraContext, F: SetFunction, y) -> float:
    """sup over subsets K of [dual_coordinate_norm(y, K) - F(K)] under
    Moreau lower addition.  When the source norm is orthant-monotonic
    the top-K-dual variant is computed as well and agreement asserted."""
    y = as_vector(y)
    fam = ctx.family
    best = -INF
    for K in enumerate_subsets(F.d):
        best = max(best, low_add(fam.dual_coordinate_norm(y, K), -F.value(K)))
    if ctx.norm.orthant_monotonic is True:
        alt = -INF
        for K in enumerate_subsets(F.d):
            alt = max(alt, low_add(fam.top_k_dual_norm(y, K), -F.value(K)))
        if math.isfinite(best) and math.isfinite(alt):
            if abs(best - alt) > 1e-8 * max(1.0, abs(best)):
                raise RuntimeError(
                    "orthant-monotone conjugate variants disagree: "
                    f"{best} vs {alt}"
                )
        elif best != alt:
            raise RuntimeError("orthant-monotone conjugate variants disagree at infinity")
    return best


@dataclass
class ConjugateEstimate:
    value: float
    approximate: bool = False
    budget_truncated: bool = False


def capra_reverse_conjugate(
    ctx: CapraContext, g_conj, x, closed_form=None, budget=None
) -> ConjugateEstimate:
    """Reverse conjugate of a function on dual space: the Fenchel
    conjugate of ``g_conj`` evaluated at the normalization of x.

    With ``closed_form`` (the Fenchel conjugate supplied analytically)
    the value is exact; otherwise the grid oracle supplies a lower
    estimate, and unbounded growth across the box is reported as a
    budget-truncated +inf.
    """
    from . import oracle

    x = as_vector(x)
    nx = ctx.normalize(x)
    if closed_form is not None:
        return ConjugateEstimate(float(closed_form(nx)))
    budget = budget or oracle.OracleBudget(grid_resolution=5e-2, box_radius=4.0)
    full = oracle.grid_fenchel_conjugate(g_conj, nx, budget)
    import dataclasses

    half = oracle.grid_fenchel_conjugate(
        g_conj, nx, dataclasses.replace(budget, box_radius=budget.box_radius / 2)
    )
    growth = math.isfinite(full) and math.isfinite(half) and (full - half) > 0.1 * abs(half) + 1e-6
    if growth:
        return ConjugateEstimate(INF, approximate=True, budget_truncated=True)
    return ConjugateEstimate(full, approximate=True)


def capra_biconjugate_fsm(ctx: CapraContext, F: SetFunction, x) -> float:
    """Biconjugate of the FSM under the coupling: the hidden-convexity
    value at the normalization of x.

    Computed through the simplex-of-balls program, which is valid for
    any finite-valued F; under the strict-monotonicity hypotheses
    (source and dual norms) with F nondecreasing it recovers F(supp(x))
    exactly.
    """
    x = as_vector(x)
    vals = F.values
    if np.all(np.isposinf(vals)):
        return INF
    if np.any(np.isneginf(vals)):
        return -INF
    nx = ctx.normalize(x)
    if not np.any(nx):
        return float(np.min(vals))
    state = variational.solve_lambda_form(ctx, _finite_clip(F), nx, "ball")
    return state.objective


def _finite_clip(F: SetFunction) -> SetFunction:
    """Replace +inf entries by an inert large sentinel for the solver
    (the lambda program never selects a +inf block at an optimum that
    has any finite-valued alternative)."""
    if F.finite_valued:
        return F
    vals = F.values.copy()
    big = 1e12
    vals[np.isposinf(vals)] = big
    return SetFunction(F.d, vals)


def theorem1_applies(ctx: CapraContext, F: SetFunction) -> bool:
    return variational.theorem_hypotheses_hold(ctx, F)


# ---------------------------------------------------------------------------
# Subdifferentials.


@dataclass
class SubdiffQueryResult:
    member: bool
    certificate: Dict[str, object] = field(default_factory=dict)


def subdiff_at_zero_membership(
    ctx: CapraContext, F: SetFunction, y, tol: float = EQ_TOL
) -> SubdiffQueryResult:
    """y belongs to the subdifferential of the FSM at the origin iff
    dual_coordinate_norm(y, K) <= F(K) (upper-minus) F(empty) for every
    subset, with the scaled-ball conventions: a negative bound gives the
    empty set, +inf no constraint."""
    y = as_vector(y)
    fam = ctx.family
    checks = []
    member = True
    for K in enumerate_subsets(F.d):
        bound = upp_add(F.value(K), -F.value(0))
        val = fam.dual_coordinate_norm(y, K)
        ok = (bound == INF) or (bound >= 0 and val <= bound + tol * max(1.0, abs(bound)))
        checks.append({"K": K, "value": val, "bound": bound, "ok": ok})
        member = member and ok
    return SubdiffQueryResult(member, {"ball_checks": checks})


def subdiff_membership(
    ctx: CapraContext, F: SetFunction, x, y,
    tol: float = EQ_TOL, tie_tol: float = TIE_TOL,
) -> SubdiffQueryResult:
    """Case split of the subdifferential characterization at x != 0.

    Finite case: (a) the pairing <x, y> attains
    coordinate_norm(x, L) * dual_coordinate_norm(y, L) with L = supp(x),
    and (b) L maximizes dual_coordinate_norm(y, .) - F(.) over subsets.
    """
    x, y = as_vector(x), as_vector(y)
    if not np.any(x):
        raise ValueError("use subdiff_at_zero_membership at the origin")
    fam = ctx.family
    L = support(x)
    fl = F.value(L)
    if fl == -INF or np.all(np.isposinf(F.values)):
        return SubdiffQueryResult(True, {"case": "degenerate-full"})
    if fl == INF:
        return SubdiffQueryResult(False, {"case": "infinite-at-support"})
    pairing = float(x @ y)
    target = fam.coordinate_norm(x, L) * fam.dual_coordinate_norm(y, L)
    res_a = abs(pairing - target)
    scale = max(1.0, abs(pairing), abs(target))
    ok_a = res_a <= tol * scale
    margin = low_add(fam.dual_coordinate_norm(y, L), -fl)
    best = -INF
    for K in enumerate_subsets(F.d):
        best = max(best, low_add(fam.dual_coordinate_norm(y, K), -F.value(K)))
    ok_b = margin >= best - tie_tol * max(1.0, abs(best) if math.isfinite(best) else 1.0)
    return SubdiffQueryResult(
        ok_a and ok_b,
        {
            "case": "finite",
            "pairing": pairing,
            "normal_cone_target": target,
            "normal_cone_residual": res_a,
            "argmax_margin": margin,
            "argmax_best": best,
            "ok_pairing": ok_a,
            "ok_argmax": ok_b,
        },
    )


class SubgradientSearchError(RuntimeError):
    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate


def construct_subgradient(ctx: CapraContext, F: SetFunction, x) -> np.ndarray:
    """A concrete subgradient of the FSM at x: a dual-aligned direction
    with the support of x, scaled up by a doubling search until the
    membership certificate accepts.  Requires strictly monotone source
    and dual norms and a nondecreasing finite F (which guarantee the
    search terminates)."""
    if ctx.norm.orthant_strictly_monotonic is not True or (
        ctx.norm.dual_orthant_strictly_monotonic is not True
    ):
        raise ValueError("subgradient construction requires OSM norm and OSM dual flags")
    if not (F.nondecreasing and F.finite_valued):
        raise ValueError("subgradient construction requires nondecreasing finite F")
    x = as_vector(x)
    if not np.any(x):
        return np.zeros(x.size)
    y0 = ctx.norm.dual_align(x)
    if y0 is None or support(y0) != support(x):
        raise ValueError("source norm does not provide a dual-aligned direction")
    # normalize so that the scaling sweep is comparable across instances
    y0 = y0 / ctx.norm.dual_eval(y0)
    lam = 1.0
    last = None
    while lam <= LAMBDA_CAP:
        res = subdiff_membership(ctx, F, x, lam * y0)
        if res.member:
            return lam * y0
        last = res
        lam *= 2.0
    raise SubgradientSearchError(
        "doubling search exhausted without membership (hypothesis violation?)",
        last.certificate if last else {},
    )


# ---------------------------------------------------------------------------
# Conditional infimum and indicator conjugates.


def conditional_infimum(
    ctx: CapraContext, f, x, ray_samples: int = 200, tol: float = 1e-9
) -> float:
    """inf over positive scalings of f(lam * x), for x on the unit
    sphere of the source norm or at the origin; +inf elsewhere.

    Approximated by log-spaced sampling of the scaling with one
    refinement pass around the incumbent; exact for ray-constant f.
    """
    x = as_vector(x)
    if not np.any(x):
        return float(f(x))
    if abs(ctx.norm.eval(x) - 1.0) > tol:
        return INF
    lams = np.logspace(-6, 6, ray_samples)
    vals = np.array([float(f(l * x)) for l in lams])
    i = int(np.argmin(vals))
    lo = lams[max(0, i - 1)]
    hi = lams[min(len(lams) - 1, i + 1)]
    fine = np.exp(np.linspace(np.log(lo), np.log(hi), ray_samples))
    vals_fine = [float(f(l * x)) for l in fine]
    return min(float(vals.min()), min(vals_fine))


def conjugate_of_indicator(ctx: CapraContext, points, y) -> float:
    """Coupling conjugate of the indicator of a finite point set: the
    support function of the normalized points."""
    if not len(points):
        raise ValueError("point set must be nonempty")
    y = as_vector(y)
    return max(float(ctx.normalize(u) @ y) for u in points)
