"""Variational formulations built on block decompositions.

Everything here reduces to one convex program over block variables
z_K living in the coordinate subspaces FlatR_K (one block per nonempty
subset K):

    minimize    sum_K  c_K * ||z_K||_(K)
    subject to  sum_K  z_K = x
                sum_K  ||z_K||_(K) <= cap          (optional)

where ||.||_(K) is the K-support dual seminorm.  The hidden-convexity
function, its lambda-simplex formulations, the exact support-value
formula with its canonical certificate, the aggregate dual norm
(inf-convolution, no cap), and the norm-ratio bounds are all thin
wrappers around this program.

For catalog l_p sources the program is solved exactly as a conic
program (block norms are closed-form p-norms there); for black-box
sources a derivative-free penalized search is used and results are
flagged approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .localnorms import AggregateNormSpec, LocalNormFamily, aggregate_support_dual_norm
from .norms import LpNorm
from .setfunctions import SetFunction
from .subsets import (
    INF,
    as_vector,
    enumerate_subsets,
    indices,
    mask_size,
    support,
)

#: default absolute tolerance for equality assertions
VALUE_TOL = 1e-4
#: slack below which a certificate counts as feasible
FEAS_TOL = 1e-7


@dataclass(frozen=True)
class SolverBudget:
    restarts: int = 10
    iterations: int = 400
    penalty: Optional[float] = None
    seed: int = 0
    tol: float = 1e-6


@dataclass
class Decomposition:
    """Map from nonempty subset masks to block vectors z_K in FlatR_K."""

    blocks: Dict[int, np.ndarray]

    def total(self, d: int) -> np.ndarray:
        out = np.zeros(d)
        for z in self.blocks.values():
            out += z
        return out

    def norm_sum(self, fam: LocalNormFamily) -> float:
        return sum(fam.k_support_dual_norm(z, K) for K, z in self.blocks.items())

    def objective(self, fam: LocalNormFamily, coeffs: Dict[int, float]) -> float:
        return sum(
            coeffs[K] * fam.k_support_dual_norm(z, K) for K, z in self.blocks.items()
        )


@dataclass
class SolverState:
    lam: Dict[int, float]
    z: Decomposition
    objective: float
    residuals: Dict[str, object] = field(default_factory=dict)


def _nonempty_masks(d: int):
    return [m for m in enumerate_subsets(d) if m != 0]


def _coeff_table(F, d: int) -> Dict[int, float]:
    if isinstance(F, SetFunction):
        return {m: F.value(m) for m in _nonempty_masks(d)}
    return dict(F)


# ---------------------------------------------------------------------------
# Conic backend (exact, catalog l_p sources).

_PROBLEM_CACHE: Dict[tuple, tuple] = {}
_SOLVER_NAME: Optional[str] = None


def _block_norm_expr(cp, source: LpNorm, z, mask: int):
    idx = list(indices(mask))
    if source.weights is None:
        scaled = z
    else:
        w = source.weights[idx]
        scaled = cp.multiply(w if source.p == INF else w ** (1.0 / source.p), z)
    return cp.norm(scaled, "inf") if source.p == INF else cp.pnorm(scaled, source.p)


def _compiled_problem(source: LpNorm, d: int, capped: bool, excluded: frozenset):
    key = (source.cache_key(), d, capped, excluded)
    if key in _PROBLEM_CACHE:
        return _PROBLEM_CACHE[key]
    import cvxpy as cp

    masks = [m for m in _nonempty_masks(d) if m not in excluded]
    zvars = {m: cp.Variable(mask_size(m)) for m in masks}
    norm_exprs = [_block_norm_expr(cp, source, zvars[m], m) for m in masks]
    c = cp.Parameter(len(masks), nonneg=True)
    xpar = cp.Parameter(d)
    total = 0
    for m in masks:
        E = np.zeros((d, mask_size(m)))
        for col, j in enumerate(indices(m)):
            E[j, col] = 1.0
        total = total + E @ zvars[m]
    constraints = [total == xpar]
    cap = None
    if capped:
        cap = cp.Parameter(nonneg=True)
        constraints.append(cp.sum(cp.hstack(norm_exprs)) <= cap)
    objective = c @ cp.hstack(norm_exprs)
    prob = cp.Problem(cp.Minimize(objective), constraints)
    entry = (prob, c, xpar, cap, zvars, masks)
    _PROBLEM_CACHE[key] = entry
    return entry


_SOLVER_SETTINGS = [
    ("CLARABEL", {}),
    ("CLARABEL", {"tol_gap_abs": 1e-11, "tol_gap_rel": 1e-11,
                  "tol_feas": 1e-11, "max_iter": 500}),
]


def _conic_solve(prob):
    """Solve with the default settings, retrying once with tightened
    tolerances when the solver reports an inaccurate solution.  The
    caller certifies the returned point against the exact constraints,
    so an inaccurate final status is acceptable here."""
    import cvxpy as cp

    last_err = None
    for name, opts in _SOLVER_SETTINGS:
        try:
            prob.solve(solver=name, **opts)
        except (cp.error.SolverError, KeyError) as err:
            last_err = err
            continue
        if prob.status is not None and not prob.status.endswith("inaccurate"):
            return
    if prob.status is not None:
        return
    raise RuntimeError(f"no conic solver available: {last_err}")  # pragma: no cover


def solve_block_decomposition(
    fam: LocalNormFamily,
    F,
    x,
    budget_cap: Optional[float] = None,
    budget: SolverBudget = None,
) -> SolverState:
    """Solve the block-decomposition program for coefficient table ``F``
    (a SetFunction or a mask->coefficient dict over nonempty subsets).

    Returns an infinite-objective state when the cap makes the program
    infeasible.  Coefficients of +inf exclude their block.
    """
    x = as_vector(x)
    d = x.size
    coeffs = _coeff_table(F, d)
    excluded = frozenset(m for m, v in coeffs.items() if v == INF)
    if len(excluded) == len(coeffs):
        # no usable block: only x = 0 is decomposable
        if np.any(x):
            return SolverState({}, Decomposition({}), INF, {"status": "infeasible"})
        return SolverState({}, Decomposition({}), 0.0, {"status": "trivial"})
    if any(v == -INF for v in coeffs.values()):
        raise ValueError("block coefficients must exceed -inf")
    if fam.is_exact and isinstance(fam.source, LpNorm):
        return _solve_conic(fam, coeffs, x, budget_cap, excluded)
    return _solve_numeric(fam, coeffs, x, budget_cap, excluded, budget or SolverBudget())


def _one_block_candidates(fam, coeffs, x, budget_cap, excluded):
    """Feasible single-block decompositions z_K = x for K containing
    supp(x): always feasible when the budget admits ||x|| at all, and
    the only feasible points of the capped program when the source norm
    is strictly convex and the cap is tight (triangle equality then
    forces every block onto the ray of x)."""
    L = support(x)
    out = []
    for m in coeffs:
        if m in excluded or (L & ~m):
            continue
        n = fam.k_support_dual_norm(x, m)
        if budget_cap is not None and n > budget_cap + FEAS_TOL * max(1.0, budget_cap):
            continue
        out.append((coeffs[m] * n, m, n))
    return out


def _candidate_state(fam, cand, x) -> SolverState:
    obj, m, n = cand
    dec = Decomposition({m: x.copy()})
    return SolverState({m: n}, dec, obj,
                       {"status": "optimal", "method": "certificate",
                        "approximate": False, "eq": 0.0, "cap": 0.0})


def _solve_conic(fam, coeffs, x, budget_cap, excluded) -> SolverState:
    d = x.size
    one_block = _one_block_candidates(fam, coeffs, x, budget_cap, excluded)
    if budget_cap is not None:
        xnorm = fam.source.eval(x)
        if budget_cap < xnorm - FEAS_TOL * max(1.0, xnorm):
            # block norms always add up to at least ||x||
            return SolverState({}, Decomposition({}), INF, {"status": "infeasible"})
        if (fam.source.strictly_convex is True
                and budget_cap - xnorm <= FEAS_TOL * max(1.0, xnorm)):
            # tight cap, strictly convex ball: triangle equality forces all
            # blocks onto the ray of x, so the single-block candidates are
            # the whole feasible set and the minimum is exact.  (The conic
            # program has no interior here and solvers drift into nearby
            # infeasible points with spuriously low objectives.)
            if not one_block:
                return SolverState({}, Decomposition({}), INF,
                                   {"status": "infeasible",
                                    "diagnostic": "no admissible block contains supp(x)"})
            return _candidate_state(fam, min(one_block), x)
    prob, c, xpar, cap, zvars, masks = _compiled_problem(
        fam.source, d, budget_cap is not None, excluded
    )
    c.value = np.array([coeffs[m] for m in masks])
    xpar.value = x
    if cap is not None:
        cap.value = float(budget_cap)
    _conic_solve(prob)
    status = prob.status
    if status in ("infeasible", "infeasible_inaccurate") and not one_block:
        return SolverState({}, Decomposition({}), INF, {"status": status})
    if prob.value is None or status not in ("optimal", "optimal_inaccurate"):
        if one_block:
            return _candidate_state(fam, min(one_block), x)
        raise RuntimeError(f"decomposition solver ended with status {status}")
    blocks = {}
    for m in masks:
        z = np.zeros(d)
        z[list(indices(m))] = np.asarray(zvars[m].value, dtype=float)
        if np.any(np.abs(z) > 1e-12):
            blocks[m] = z
    dec = Decomposition(blocks)
    lam = {m: fam.k_support_dual_norm(z, m) for m, z in dec.blocks.items()}
    resid = {
        "status": status,
        "method": "conic",
        "approximate": False,
        "eq": float(np.max(np.abs(dec.total(d) - x))) if blocks else float(np.max(np.abs(x))),
    }
    feasible = resid["eq"] <= FEAS_TOL * max(1.0, float(np.max(np.abs(x))))
    if budget_cap is not None:
        resid["cap"] = max(0.0, sum(lam.values()) - budget_cap)
        feasible = feasible and resid["cap"] <= FEAS_TOL * max(1.0, budget_cap)
    # the solver's point only counts once it verifies against the exact
    # constraints; otherwise fall back to the best certified candidate
    if not feasible:
        if one_block:
            return _candidate_state(fam, min(one_block), x)
        resid["diagnostic"] = "returned point failed feasibility verification"
        return SolverState(lam, dec, float(prob.value), resid)
    value = float(prob.value)
    if one_block and min(one_block)[0] < value:
        return _candidate_state(fam, min(one_block), x)
    return SolverState(lam, dec, value, resid)


def _solve_numeric(fam, coeffs, x, budget_cap, excluded, budget: SolverBudget) -> SolverState:
    """Derivative-free penalized fallback for non-catalog sources.

    Eliminates the full-set block through the equality constraint and
    runs a Powell search from the canonical start plus random restarts.
    Results carry ``approximate=True``.
    """
    from scipy.optimize import minimize

    d = x.size
    masks = [m for m in _nonempty_masks(d) if m not in excluded]
    if masks[-1] != (1 << d) - 1:
        # full-set block excluded: fall back to keeping the largest block last
        masks = sorted(masks, key=mask_size)
    layout = []
    col = 0
    for m in masks[:-1]:
        layout.append((m, slice(col, col + mask_size(m))))
        col += mask_size(m)
    last = masks[-1]
    mu = budget.penalty or 10.0 * (1.0 + max(abs(v) for v in coeffs.values()))

    def unpack(theta):
        blocks = {}
        acc = np.zeros(d)
        for m, sl in layout:
            z = np.zeros(d)
            z[list(indices(m))] = theta[sl]
            blocks[m] = z
            acc += z
        rest = x - acc
        if support(rest) & ~last:
            return None, INF  # eliminated block cannot represent the remainder
        blocks[last] = rest
        return blocks, None

    def penalized(theta):
        blocks, bad = unpack(theta)
        if blocks is None:
            return 1e18
        norms = {m: fam.k_support_dual_norm(z, m) for m, z in blocks.items()}
        val = sum(coeffs[m] * norms[m] for m in blocks)
        if budget_cap is not None:
            val += mu * max(0.0, sum(norms.values()) - budget_cap)
        return val

    rng = np.random.default_rng(budget.seed)
    L = support(x)
    starts = [np.zeros(col)]
    if L in dict(layout):
        theta0 = np.zeros(col)
        sl = dict(layout)[L]
        theta0[sl] = x[list(indices(L))]
        starts.append(theta0)
    scale = float(np.max(np.abs(x))) or 1.0
    for _ in range(budget.restarts):
        starts.append(rng.uniform(-scale, scale, size=col))
    best_val, best_theta = INF, np.zeros(col)
    for theta0 in starts:
        res = minimize(
            penalized, theta0, method="Powell",
            options={"maxiter": budget.iterations, "xtol": budget.tol},
        )
        if res.fun < best_val:
            best_val, best_theta = float(res.fun), np.asarray(res.x)
    blocks, _ = unpack(best_theta)
    blocks = {m: z for m, z in blocks.items() if np.any(np.abs(z) > 1e-12)}
    dec = Decomposition(blocks)
    lam = {m: fam.k_support_dual_norm(z, m) for m, z in dec.blocks.items()}
    obj = sum(coeffs[m] * lam[m] for m in dec.blocks)
    resid = {"status": "heuristic", "method": "powell", "approximate": True,
             "eq": float(np.max(np.abs(dec.total(d) - x)))}
    if budget_cap is not None:
        resid["cap"] = max(0.0, sum(lam.values()) - budget_cap)
        if resid["cap"] > FEAS_TOL * max(1.0, budget_cap):
            resid["status"] = "infeasible-iterate"
            obj = INF
    one_block = _one_block_candidates(fam, coeffs, x, budget_cap, excluded)
    if one_block and min(one_block)[0] < obj:
        state = _candidate_state(fam, min(one_block), x)
        state.residuals["approximate"] = True
        return state
    return SolverState(lam, dec, obj, resid)


# ---------------------------------------------------------------------------
# Hidden-convexity function and lambda formulations.


@dataclass
class L0FResult:
    value: float
    state: SolverState


def _require_theorem_f(F: SetFunction):
    if not F.nondecreasing or not F.finite_valued:
        raise ValueError("this operation requires a nondecreasing finite-valued set function")


def eval_L0F(ctx, F: SetFunction, x) -> L0FResult:
    """The convex function whose restriction to the unit sphere of the
    source norm equals F o supp.

    Evaluated through the capped decomposition program: minimize the
    F-weighted block norms under sum z_K = x with unit norm budget;
    budget slack is priced at F(empty set).  Points outside the unit
    ball have value +inf.
    """
    _require_theorem_f(F)
    x = as_vector(x)
    base = F.value(0)
    coeffs = {m: F.value(m) - base for m in _nonempty_masks(x.size)}
    if not np.any(x):
        return L0FResult(base, SolverState({0: 1.0}, Decomposition({}), base, {"status": "trivial"}))
    state = solve_block_decomposition(ctx.family, coeffs, x, budget_cap=1.0)
    if not math.isfinite(state.objective):
        return L0FResult(INF, state)
    value = state.objective + base
    state = SolverState(state.lam, state.z, value, state.residuals)
    return L0FResult(value, state)


def solve_lambda_form(ctx, F: SetFunction, x, ball_or_sphere: str = "ball") -> SolverState:
    """Minimize sum_K lambda_K F(K) over simplex weights lambda with x
    in the lambda-mix of the K-support dual unit balls (or spheres).

    Reduction: take lambda_K equal to the block norm of z_K; leftover
    simplex mass costs F(empty set) for spheres (it can only sit on the
    empty-set term) and min F for balls (0 belongs to every ball).
    """
    if not F.finite_valued:
        raise ValueError("lambda formulation requires a finite-valued set function")
    if ball_or_sphere not in ("ball", "sphere"):
        raise ValueError("ball_or_sphere must be 'ball' or 'sphere'")
    x = as_vector(x)
    d = x.size
    slack_cost = F.min_value() if ball_or_sphere == "ball" else F.value(0)
    slack_mask = (
        int(np.argmin(F.values)) if ball_or_sphere == "ball" else 0
    )
    if not np.any(x):
        return SolverState({slack_mask: 1.0}, Decomposition({}), slack_cost,
                           {"status": "trivial"})
    coeffs = {m: F.value(m) - slack_cost for m in _nonempty_masks(d)}
    state = solve_block_decomposition(ctx.family, coeffs, x, budget_cap=1.0)
    if not math.isfinite(state.objective):
        state.residuals["diagnostic"] = "x outside the reachable lambda-mix"
        return state
    lam = dict(state.lam)
    slack = max(0.0, 1.0 - sum(lam.values()))
    lam[slack_mask] = lam.get(slack_mask, 0.0) + slack
    return SolverState(lam, state.z, state.objective + slack_cost, state.residuals)


# ---------------------------------------------------------------------------
# Exact support-value formula with certificate.


@dataclass
class VariationalResult:
    value: float
    certificate: Decomposition
    state: SolverState
    theorem_applies: bool


def theorem_hypotheses_hold(ctx, F: SetFunction) -> bool:
    n = ctx.norm
    return (
        n.orthant_strictly_monotonic is True
        and n.dual_orthant_strictly_monotonic is True
        and F.nondecreasing
        and F.finite_valued
    )


def variational_value(ctx, F: SetFunction, x, tol: float = VALUE_TOL) -> VariationalResult:
    """(1/||x||) * min sum_K F(K) ||z_K||_(K)  with  sum ||z_K||_(K) <= ||x||
    and sum z_K = x.

    The one-block decomposition z_L = x, L = supp(x), is always
    feasible with objective F(L); under the strict-monotonicity
    hypotheses the solver cannot improve on it and the value is
    asserted equal to F(L) within ``tol``.
    """
    _require_theorem_f(F)
    if not F.normalized:
        raise ValueError("variational value requires F(empty set) = 0")
    x = as_vector(x)
    if not np.any(x):
        raise ValueError("variational value requires x != 0")
    fam = ctx.family
    xnorm = ctx.norm.eval(x)
    L = support(x)
    canonical = Decomposition({L: x.copy()})
    can_norm = fam.k_support_dual_norm(x, L)
    if fam.is_exact and abs(can_norm - xnorm) > FEAS_TOL * max(1.0, xnorm):
        raise RuntimeError("canonical certificate unexpectedly infeasible")
    state = solve_block_decomposition(ctx.family, F, x, budget_cap=xnorm)
    value = state.objective / xnorm
    applies = theorem_hypotheses_hold(ctx, F)
    if applies and abs(value - F.value(L)) > tol:
        raise RuntimeError(
            f"solver value {value} deviates from the certified F(supp(x)) = {F.value(L)}"
        )
    return VariationalResult(value, canonical, state, applies)


# ---------------------------------------------------------------------------
# Norm-ratio bounds.


@dataclass
class BoundsReport:
    lower: float
    value: float
    upper: float
    upper_variant: str  # 'K-containing-support' | 'all-K'
    upper_all_k: float


def bounds(ctx, F: SetFunction, x, upper_variant: str = "K-containing-support") -> BoundsReport:
    """Sandwich F(supp(x)) between the aggregate dual-norm ratio and the
    per-subset norm ratios.

    The upper bound defaults to minimizing over subsets containing the
    support: with seminorm extensions the all-K minimum can dip below
    the middle value, so it is reported separately and never asserted
    as an upper bound.
    """
    _require_theorem_f(F)
    if not F.normalized or np.any(F.values[1:] <= 0):
        raise ValueError("bounds require F normalized and positive off the empty set")
    if upper_variant not in ("K-containing-support", "all-K"):
        raise ValueError("unknown upper_variant")
    x = as_vector(x)
    if not np.any(x):
        raise ValueError("bounds require x != 0")
    fam = ctx.family
    xnorm = ctx.norm.eval(x)
    L = support(x)
    agg = AggregateNormSpec(fam, F)
    lower = aggregate_support_dual_norm(agg, x) / xnorm
    value = F.value(L)
    ratios_support = []
    ratios_all = []
    for K in _nonempty_masks(x.size):
        r = F.value(K) * fam.k_support_dual_norm(x, K) / xnorm
        ratios_all.append(r)
        if (L & ~K) == 0:
            ratios_support.append(r)
    upper_support = min(ratios_support)
    upper_all = min(ratios_all)
    upper = upper_support if upper_variant == "K-containing-support" else upper_all
    return BoundsReport(lower, value, upper, upper_variant, upper_all)


# ---------------------------------------------------------------------------
# Sparse-optimization reformulations.


def sparse_min_over_set(ctx, F: SetFunction, C, tol: float = VALUE_TOL) -> dict:
    """min over the finite candidate set C of F(supp(x)), computed both
    directly and through the inner variational program; per-point
    agreement is recorded."""
    if not C:
        raise ValueError("candidate set must be nonempty")
    best_val, best_x = INF, None
    residuals = []
    for x in C:
        x = as_vector(x)
        if not np.any(x):
            raise ValueError("candidate set must not contain 0")
        direct = F.value(support(x))
        var = variational_value(ctx, F, x, tol=tol)
        residuals.append(abs(direct - var.value))
        if direct < best_val:
            best_val, best_x = direct, x
    return {"value": best_val, "argmin": best_x, "residuals": residuals}


def sparse_constrained_min(
    ctx, F: SetFunction, f0, alpha: float, budget: SolverBudget = None, d: int = None
) -> dict:
    """Minimize f0 over points whose support cost is at most alpha,
    via the lifted block program

        min f0(sum z_K)  s.t.  sum ||z_K|| <= ||sum z_K||,
                               sum F(K) ||z_K|| <= alpha ||sum z_K||.

    Support patterns with F(L) <= alpha seed the search (a single-block
    point is feasible exactly when its support is affordable); a
    penalized derivative-free polish then runs on the block variables.
    The returned point is validated to satisfy F(supp(x)) <= alpha.
    """
    from scipy.optimize import minimize

    _require_theorem_f(F)
    if not F.normalized:
        raise ValueError("sparse reformulation requires F(empty set) = 0")
    budget = budget or SolverBudget()
    d = d or F.d
    fam = ctx.family
    masks = _nonempty_masks(d)
    affordable = [m for m in masks if F.value(m) <= alpha + budget.tol]

    candidates = [(float(f0(np.zeros(d))), np.zeros(d), Decomposition({}))]
    for L in affordable:
        idx = list(indices(L))

        def restricted(theta, idx=idx):
            z = np.zeros(d)
            z[idx] = theta
            return float(f0(z))

        res = minimize(restricted, np.zeros(len(idx)), method="Powell",
                       options={"maxiter": budget.iterations})
        z = np.zeros(d)
        z[idx] = res.x
        if support(z) == 0:
            continue
        candidates.append((float(res.fun), z, Decomposition({L: z})))

    best = min(candidates, key=lambda t: t[0])
    value, xbest, dec = best

    # penalized polish over all block variables
    layout = []
    col = 0
    for m in masks:
        layout.append((m, slice(col, col + mask_size(m))))
        col += mask_size(m)
    mu = budget.penalty or 10.0 * (1.0 + abs(value) + float(np.max(F.values)))

    def unpack(theta):
        blocks = {}
        for m, sl in layout:
            z = np.zeros(d)
            z[list(indices(m))] = theta[sl]
            if np.any(z):
                blocks[m] = z
        return blocks

    def penalized(theta):
        blocks = unpack(theta)
        xs = np.zeros(d)
        for z in blocks.values():
            xs += z
        xn = ctx.norm.eval(xs)
        norms = {m: fam.k_support_dual_norm(z, m) for m, z in blocks.items()}
        val = float(f0(xs))
        val += mu * max(0.0, sum(norms.values()) - xn)
        val += mu * max(0.0, sum(F.value(m) * n for m, n in norms.items()) - alpha * xn)
        return val

    theta0 = np.zeros(col)
    for m, sl in layout:
        if m in dec.blocks:
            theta0[sl] = dec.blocks[m][list(indices(m))]
    res = minimize(penalized, theta0, method="Powell",
                   options={"maxiter": budget.iterations})
    blocks = unpack(np.asarray(res.x))
    xs = np.zeros(d)
    for z in blocks.values():
        xs += z
    scale = max(1.0, float(np.max(np.abs(xs))))
    from .subsets import support_with_tol

    supp = support_with_tol(xs, 1e-9 * scale)
    if F.value(supp) <= alpha + budget.tol and float(f0(xs)) < value - budget.tol:
        value, xbest = float(f0(xs)), xs
        dec = Decomposition(blocks)

    if F.value(support_with_tol(xbest, 1e-12)) > alpha + budget.tol:
        raise RuntimeError("no feasible iterate found within budget")
    return {"value": value, "x": xbest, "z": dec}
