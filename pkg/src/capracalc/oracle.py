"""Independent brute-force reference implementations.

Every analytic formula in the library is validated against one of the
estimators below.  The estimators are deliberately one-sided:

* suprema / support functions are estimated from below (sampling can
  only miss the maximizer), and
* constrained minima are estimated from above (every accepted grid
  point is feasible up to an explicit slack),

so a disagreement beyond tolerance is conclusive evidence against the
closed form, never an artifact of the estimator.

All randomness is drawn in fixed-size chunks from a seeded generator,
which makes every estimate monotone under budget doubling: the first
half of a doubled sample stream is the original stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .subsets import (
    INF,
    as_vector,
    enumerate_subsets,
    indices,
    low_add,
    mask_size,
    project,
    support,
)

_CHUNK = 4096


@dataclass(frozen=True)
class OracleBudget:
    samples: int = 100_000
    grid_resolution: float = 1e-2
    box_radius: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.grid_resolution <= 0 or self.box_radius <= 0:
            raise ValueError("grid_resolution and box_radius must be positive")

    def with_seed(self, seed: int) -> "OracleBudget":
        return replace(self, seed=seed)


def _chunks(total: int):
    done = 0
    while done < total:
        n = min(_CHUNK, total - done)
        yield n
        done += n


def sampled_support_function(membership, y, budget: OracleBudget) -> float:
    """Lower estimate of the support function sup {<x, y> : x in S}.

    ``membership`` is a vectorized predicate mapping an (n, d) array of
    candidate points to a boolean array.  Candidates are drawn uniformly
    from the box [-R, R]^d.
    """
    y = as_vector(y)
    d = y.size
    rng = np.random.default_rng(budget.seed)
    best = -INF
    accepted = 0
    for n in _chunks(budget.samples):
        pts = rng.uniform(-budget.box_radius, budget.box_radius, size=(n, d))
        keep = np.asarray(membership(pts), dtype=bool)
        if keep.any():
            accepted += int(keep.sum())
            best = max(best, float((pts[keep] @ y).max()))
    if accepted == 0:
        raise RuntimeError("support-function oracle accepted zero samples")
    return best


def sampled_sphere_sup(norm_many, y, mask: int, budget: OracleBudget) -> float:
    """Lower estimate of sup {<x, y> : x in FlatR_K, ||x|| = 1}.

    ``norm_many`` evaluates the source norm on the rows of an (n, d)
    array.  Directions are Gaussian within the coordinate subspace and
    rescaled onto the unit sphere of the norm; the signed coordinate
    axes of the subspace are always included as deterministic
    candidates.
    """
    y = as_vector(y)
    d = y.size
    idx = list(indices(mask))
    if not idx:
        return 0.0
    rng = np.random.default_rng(budget.seed)
    best = -INF

    def feed(pts):
        nonlocal best
        norms = np.asarray(norm_many(pts), dtype=float)
        ok = norms > 0
        if ok.any():
            vals = (pts[ok] @ y) / norms[ok]
            best = max(best, float(vals.max()))

    axes = np.zeros((2 * len(idx), d))
    for i, j in enumerate(idx):
        axes[2 * i, j] = 1.0
        axes[2 * i + 1, j] = -1.0
    feed(axes)
    yk = project(y, mask)
    if np.any(yk != 0.0):
        feed(yk[None, :])
    for n in _chunks(budget.samples):
        pts = np.zeros((n, d))
        pts[:, idx] = rng.standard_normal(size=(n, len(idx)))
        feed(pts)
    return best


def _grid_axis(radius: float, resolution: float) -> np.ndarray:
    n = int(math.floor(radius / resolution))
    return np.arange(-n, n + 1) * resolution


def grid_fenchel_conjugate(f, y, budget: OracleBudget, f_many=None) -> float:
    """Lower estimate of the Fenchel conjugate sup_x [<x,y> - f(x)].

    The supremum combines terms with Moreau lower addition, so points
    with f(x) = +inf contribute -inf.  ``f`` maps a vector to an
    extended real; ``f_many``, if given, evaluates rows of an (n, d)
    array at once.
    """
    y = as_vector(y)
    d = y.size
    if d > 3:
        raise ValueError("grid Fenchel oracle supports d <= 3")
    axis = _grid_axis(budget.box_radius, budget.grid_resolution)
    best = -INF
    if f_many is None:
        f_many = lambda pts: np.array([f(p) for p in pts])
    # iterate over the first coordinate to bound memory
    rest = np.meshgrid(*([axis] * (d - 1)), indexing="ij") if d > 1 else []
    tail = (
        np.stack([r.ravel() for r in rest], axis=1) if d > 1 else np.zeros((1, 0))
    )
    for a in axis:
        pts = np.concatenate(
            [np.full((tail.shape[0], 1), a), tail], axis=1
        )
        vals = np.asarray(f_many(pts), dtype=float)
        dots = pts @ y
        terms = np.where(np.isposinf(vals), -INF, dots - np.where(np.isinf(vals), 0, vals))
        terms = np.where(np.isneginf(vals), INF, terms)
        m = float(terms.max()) if terms.size else -INF
        best = max(best, m)
    return best


def direct_capra_conjugate(ctx, f, y, budget: OracleBudget, f_many=None) -> float:
    """Lower estimate of the coupling conjugate sup_x [c(x,y) - f(x)].

    The coupling is constant along rays, so sampling is restricted to
    the union of the origin and the unit sphere; the sphere is sampled
    per support pattern so that sparse points (where a function of the
    support mapping drops) are reached with certainty.
    """
    y = as_vector(y)
    d = y.size
    norm_many = ctx.norm.eval_many
    if f_many is None:
        f_many = lambda pts: np.array([f(p) for p in pts])
    best = low_add(0.0, -float(f(np.zeros(d))))
    masks = [m for m in enumerate_subsets(d) if m != 0]
    per_mask = max(2, budget.samples // max(1, len(masks)))
    rng = np.random.default_rng(budget.seed)
    for mask in masks:
        idx = list(indices(mask))
        n_extra = 2 * len(idx) if mask_size(mask) == 1 else 0
        pts = np.zeros((per_mask + n_extra, d))
        pts[:per_mask, idx] = rng.standard_normal(size=(per_mask, len(idx)))
        if n_extra:
            j = idx[0]
            pts[per_mask, j] = 1.0
            pts[per_mask + 1, j] = -1.0
        norms = np.asarray(norm_many(pts), dtype=float)
        ok = norms > 0
        # keep only points whose support is exactly this mask
        ok &= np.array([support(p) == mask for p in pts])
        if not ok.any():
            continue
        sphere = pts[ok] / norms[ok][:, None]
        dots = sphere @ y
        vals = np.asarray(f_many(sphere), dtype=float)
        for c, v in zip(dots, vals):
            best = max(best, low_add(float(c), -float(v)))
    return best


def _nonempty_masks(d: int):
    return [m for m in enumerate_subsets(d) if m != 0]


def grid_decomposition_min(ctx, F, x, budget: OracleBudget) -> float:
    """Upper estimate of the Theorem-style decomposition minimum.

    Minimizes sum_K F(K) * ||z_K|| over block decompositions with
    sum_K z_K = x and sum_K ||z_K|| <= ||x|| (+ grid slack).  The last
    block (the full index set) is eliminated through the equality
    constraint; the remaining free block coordinates are swept on a
    grid at d=2 and sampled-then-refined at d=3.  Block norms use the
    source norm of the projected block, which matches the K-support
    dual seminorm for orthant-monotonic sources.
    """
    x = as_vector(x)
    d = x.size
    if d > 3:
        raise ValueError("grid decomposition oracle supports d <= 3")
    norm_many = ctx.norm.eval_many
    xnorm = float(ctx.norm.eval(x))
    if xnorm == 0.0:
        return 0.0
    masks = _nonempty_masks(d)
    free = masks[:-1]  # eliminate the full-set block
    layout = []  # (mask, column slice) into the free-variable vector
    col = 0
    for m in free:
        k = mask_size(m)
        layout.append((m, slice(col, col + k)))
        col += k
    nfree = col
    Fvals = {m: float(F.value(m)) for m in masks}
    slack = 3 * len(masks) * budget.grid_resolution

    def evaluate(Z):
        """Z: (n, nfree) free block coordinates -> (n,) objective, feasibility."""
        n = Z.shape[0]
        total = np.zeros(n)
        obj = np.zeros(n)
        acc = np.zeros((n, d))
        for m, sl in layout:
            blk = np.zeros((n, d))
            blk[:, list(indices(m))] = Z[:, sl]
            nb = np.asarray(norm_many(blk), dtype=float)
            total += nb
            obj += Fvals[m] * nb
            acc += blk
        last = x[None, :] - acc
        nb = np.asarray(norm_many(last), dtype=float)
        total += nb
        obj += Fvals[masks[-1]] * nb
        feas = total <= xnorm + slack
        return obj, feas

    best = Fvals[masks[-1]] * xnorm  # all-in-last-block decomposition
    if d == 2:
        axis = _grid_axis(budget.box_radius, budget.grid_resolution)
        aa, bb = np.meshgrid(axis, axis, indexing="ij")
        Z = np.stack([aa.ravel(), bb.ravel()], axis=1)
        incumbent = None
        for start in range(0, Z.shape[0], 65536):
            obj, feas = evaluate(Z[start : start + 65536])
            if feas.any():
                vals = np.where(feas, obj, INF)
                i = int(np.argmin(vals))
                if vals[i] < best:
                    best = float(vals[i])
                    incumbent = Z[start + i].copy()
        if incumbent is not None:
            fine = _grid_axis(
                10 * budget.grid_resolution, budget.grid_resolution / 10
            )
            fa, fb = np.meshgrid(fine, fine, indexing="ij")
            Zf = np.stack([fa.ravel(), fb.ravel()], axis=1) + incumbent
            obj, feas = evaluate(Zf)
            if feas.any():
                best = min(best, float(np.where(feas, obj, INF).min()))
        return best

    # d == 3: seeded sampling plus shrinking refinement around the incumbent
    rng = np.random.default_rng(budget.seed)
    center = np.zeros(nfree)
    scale = budget.box_radius
    for _ in range(6):
        for n in _chunks(budget.samples // 6 + 1):
            Z = center + rng.uniform(-scale, scale, size=(n, nfree))
            obj, feas = evaluate(Z)
            if feas.any():
                vals = np.where(feas, obj, INF)
                i = int(np.argmin(vals))
                if vals[i] < best:
                    best = float(vals[i])
                    center = Z[i].copy()
        scale /= 4.0
    return best
