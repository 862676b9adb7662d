"""Local norm families derived from a source norm.

For a source norm and a subset K of indices, four families arise:

* ``dual_coordinate_norm``   — sup over J within K of the
  restrict-then-dualize norms of y_J;
* ``coordinate_norm``        — its dual on the coordinate subspace;
* ``top_k_dual_norm``        — sup over J within K of the dual norm of y_J;
* ``k_support_dual_norm``    — its dual on the coordinate subspace.

All four are exposed through their seminorm extensions: any vector is
accepted and internally projected onto the subspace, and the value at
the empty subset is 0 by convention.

For orthant-monotonic sources the families collapse to closed forms
(``dual_norm(y_K)`` for both dual families, ``norm(x_K)`` for both
primal families); otherwise the primal members are approximated by
sampled support-function maximization over the relevant dual ball and
flagged approximate via ``is_exact``.
"""

from __future__ import annotations

import threading

import numpy as np

from . import oracle
from .norms import NormSpec, set_star_norm
from .setfunctions import SetFunction
from .subsets import as_vector, enumerate_submasks, indices, project

#: sampled directions used by the numeric dualization fallback
FALLBACK_DIRECTIONS = 2048


class LocalNormFamily:
    """All four local-norm families for one source norm, with a memo
    cache for sampled (non-closed-form) values.

    The cache is guarded by a lock; values are plain floats, so
    concurrent readers always observe complete entries.
    """

    def __init__(self, source: NormSpec, seed: int = 0):
        self.source = source
        self._cache: dict = {}
        self._lock = threading.Lock()
        self._seed = seed

    @property
    def is_exact(self) -> bool:
        """True when the orthant-monotone closed forms apply."""
        return self.source.orthant_monotonic is True

    def _memo(self, key, compute):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        val = compute()
        with self._lock:
            self._cache.setdefault(key, val)
        return val

    # -- dual families ------------------------------------------------------

    def dual_coordinate_norm(self, y, K: int) -> float:
        """sup over J within K of the set-star (restrict-then-dualize)
        norm of y_J; 0 at the empty subset."""
        y = as_vector(y)
        if K == 0:
            return 0.0
        yk = project(y, K)
        if not np.any(yk):
            return 0.0
        if self.is_exact:
            return self.source.dual_eval(yk)
        key = ("dcn", self.source.cache_key(), K, yk.tobytes())
        return self._memo(
            key,
            lambda: max(
                set_star_norm(self.source, project(yk, J), J)
                for J in enumerate_submasks(K)
                if J != 0
            ),
        )

    def top_k_dual_norm(self, y, K: int) -> float:
        """sup over J within K of the dual norm of y_J; 0 at the empty
        subset.  Collapses to dual_norm(y_K) for orthant-monotonic
        sources (whose duals are then orthant-monotonic too)."""
        y = as_vector(y)
        if K == 0:
            return 0.0
        yk = project(y, K)
        if not np.any(yk):
            return 0.0
        if self.is_exact:
            return self.source.dual_eval(yk)
        return max(
            self.source.dual_eval(project(yk, J))
            for J in enumerate_submasks(K)
            if J != 0
        )

    # -- primal families ----------------------------------------------------

    def coordinate_norm(self, x, K: int) -> float:
        """Dual, on the coordinate subspace, of dual_coordinate_norm
        (seminorm extension: evaluates at x_K)."""
        x = as_vector(x)
        if K == 0:
            return 0.0
        xk = project(x, K)
        if not np.any(xk):
            return 0.0
        if self.is_exact:
            return self.source.eval(xk)
        key = ("cn", self.source.cache_key(), K, xk.tobytes())
        return self._memo(
            key, lambda: self._dualize(xk, K, lambda v: self.dual_coordinate_norm(v, K))
        )

    def k_support_dual_norm(self, x, K: int) -> float:
        """Dual, on the coordinate subspace, of top_k_dual_norm
        (seminorm extension: evaluates at x_K)."""
        x = as_vector(x)
        if K == 0:
            return 0.0
        xk = project(x, K)
        if not np.any(xk):
            return 0.0
        if self.is_exact:
            return self.source.eval(xk)
        key = ("ksd", self.source.cache_key(), K, xk.tobytes())
        return self._memo(
            key, lambda: self._dualize(xk, K, lambda v: self.top_k_dual_norm(v, K))
        )

    def k_support_dual_norm_many(self, X, K: int) -> np.ndarray:
        """Batch k_support_dual_norm over the rows of X (solver hot path)."""
        X = np.asarray(X, dtype=float)
        if K == 0:
            return np.zeros(X.shape[0])
        cols = list(indices(K))
        Xk = np.zeros_like(X)
        Xk[:, cols] = X[:, cols]
        if self.is_exact:
            return self.source.eval_many(Xk)
        return np.array([self.k_support_dual_norm(row, K) for row in Xk])

    def _dualize(self, xk: np.ndarray, K: int, dual_value) -> float:
        """Sampled sup of <x_K, v> over {v in FlatR_K : dual_value(v) <= 1}."""
        idx = list(indices(K))
        rng = np.random.default_rng(self._seed)
        best = 0.0
        cands = list(np.eye(xk.size)[idx]) + [xk]
        for _ in range(FALLBACK_DIRECTIONS):
            cands.append(None)
        for c in cands:
            if c is None:
                v = np.zeros(xk.size)
                v[idx] = rng.standard_normal(len(idx))
            else:
                v = np.asarray(c, dtype=float)
            for s in (1.0, -1.0):
                dv = dual_value(s * v)
                if dv > 0:
                    best = max(best, float(xk @ (s * v)) / dv)
        return best


# ---------------------------------------------------------------------------
# Aggregate norm built from a positive set-function weight.


class AggregateNormSpec:
    """Pairs a local norm family with a weight F satisfying F(empty)=0
    and F(K) > 0 off the empty set; those conditions make both
    aggregate formulas below genuine norms."""

    def __init__(self, fam: LocalNormFamily, F: SetFunction):
        if not F.normalized:
            raise ValueError("aggregate weight must satisfy F(empty set) = 0")
        if np.any(F.values[1:] <= 0) or not np.all(np.isfinite(F.values[1:])):
            raise ValueError("aggregate weight must be finite and positive off the empty set")
        self.fam = fam
        self.F = F


def aggregate_top_dual_norm(agg: AggregateNormSpec, y) -> float:
    """sup over nonempty K of top_k_dual_norm(y, K) / F(K); its unit
    ball is the intersection of the F(K)-scaled top-K dual balls."""
    y = as_vector(y)
    if not np.any(y):
        return 0.0
    return max(
        agg.fam.top_k_dual_norm(y, K) / agg.F.value(K)
        for K in range(1, 1 << agg.F.d)
    )


def aggregate_support_dual_norm(agg: AggregateNormSpec, x, tol: float = 1e-9) -> float:
    """inf over block decompositions x = sum_K z_K of
    sum_K F(K) * k_support_dual_norm(z_K, K) — the inf-convolution dual
    of aggregate_top_dual_norm.  Solved by the decomposition solver."""
    from . import variational

    x = as_vector(x)
    if not np.any(x):
        return 0.0
    state = variational.solve_block_decomposition(
        agg.fam, agg.F, x, budget_cap=None
    )
    return state.objective
