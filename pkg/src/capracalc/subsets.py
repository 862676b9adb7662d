"""Index-set combinatorics, coordinate projections, and extended-real arithmetic.

Subsets of the index set {1, ..., d} are represented as plain integer
bitmasks: bit ``j`` (0-based) set means index ``j+1`` belongs to the
subset.  All exhaustive routines enumerate the ``2**d`` subsets and are
therefore hard-capped at ``d <= MAX_DIM``.

Extended reals are plain Python floats where ``math.inf`` and
``-math.inf`` are explicit, legitimate states.  NaN is never a value of
the calculus: the two extensions of addition (``low_add`` resolving
``(+inf) + (-inf)`` to ``-inf``, ``upp_add`` resolving it to ``+inf``)
guard against producing one.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

#: Hard cap for all exhaustive subset enumeration.
MAX_DIM = 16

INF = math.inf


def check_dim(d: int) -> None:
    """Raise ValueError unless 1 <= d <= MAX_DIM."""
    if not (1 <= d <= MAX_DIM):
        raise ValueError(f"dimension d={d} outside supported range [1, {MAX_DIM}]")


def full_mask(d: int) -> int:
    check_dim(d)
    return (1 << d) - 1


def complement(mask: int, d: int) -> int:
    return full_mask(d) & ~mask


def mask_size(mask: int) -> int:
    """Number of indices in the subset."""
    return int(mask).bit_count()


def indices(mask: int) -> tuple[int, ...]:
    """0-based index positions of the subset, ascending."""
    out = []
    j = 0
    m = mask
    while m:
        if m & 1:
            out.append(j)
        m >>= 1
        j += 1
    return tuple(out)


def mask_from_indices(idx, d: int) -> int:
    check_dim(d)
    mask = 0
    for j in idx:
        if not (0 <= j < d):
            raise ValueError(f"index {j} out of range for d={d}")
        mask |= 1 << j
    return mask


def format_mask(mask: int) -> str:
    """Human-readable subset, 1-based: '{1,3}' or '{}'."""
    return "{" + ",".join(str(j + 1) for j in indices(mask)) + "}"


def enumerate_subsets(d: int) -> Iterator[int]:
    """All 2**d subset masks, empty set first, full set last."""
    check_dim(d)
    return iter(range(1 << d))


def enumerate_submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, ascending, including 0 and ``mask``."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def as_vector(x) -> np.ndarray:
    """Validate and convert to a finite 1-d float array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("vector must be one-dimensional and nonempty")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def support(x) -> int:
    """Bitmask of indices with exactly nonzero entries.

    Exact comparison with 0.0 is intentional: test vectors in this
    library are constructed, not measured.  See support_with_tol for
    user data.
    """
    v = as_vector(x)
    mask = 0
    for j in range(v.size):
        if v[j] != 0.0:
            mask |= 1 << j
    return mask


def support_with_tol(x, eps: float) -> int:
    """Bitmask of indices with |x_j| > eps."""
    v = as_vector(x)
    mask = 0
    for j in range(v.size):
        if abs(v[j]) > eps:
            mask |= 1 << j
    return mask


def project(x, mask: int) -> np.ndarray:
    """Coordinate projection: keep entries in the subset, zero the rest."""
    v = as_vector(x).copy()
    if mask >> v.size:
        raise ValueError("subset mask uses indices beyond the vector dimension")
    keep = np.zeros(v.size, dtype=bool)
    for j in indices(mask):
        keep[j] = True
    v[~keep] = 0.0
    return v


def level_set_membership(x, mask: int) -> bool:
    """True iff supp(x) is contained in the subset."""
    return (support(x) & ~mask) == 0


# ---------------------------------------------------------------------------
# Extended-real (Moreau) additions.


def _check_not_nan(a: float, b: float) -> None:
    if math.isnan(a) or math.isnan(b):
        raise ValueError("NaN is not a valid extended real")


def low_add(a: float, b: float) -> float:
    """Lower addition: (+inf) + (-inf) resolves to -inf."""
    _check_not_nan(a, b)
    if (a == INF and b == -INF) or (a == -INF and b == INF):
        return -INF
    return a + b


def upp_add(a: float, b: float) -> float:
    """Upper addition: (+inf) + (-inf) resolves to +inf."""
    _check_not_nan(a, b)
    if (a == INF and b == -INF) or (a == -INF and b == INF):
        return INF
    return a + b
