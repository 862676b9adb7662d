"""Set functions F : 2^V -> extended reals, stored as full tables.

The canonical representation is a table of 2^d values indexed by subset
bitmask (empty set first).  Named generators expand to tables on
construction so that the declared flags (nondecreasing, finite-valued,
normalized) can always be validated against the actual values.
"""

from __future__ import annotations

import numpy as np

from .subsets import INF, check_dim, enumerate_subsets, mask_size


class SetFunction:
    def __init__(self, d: int, values, name: str = None, flags: dict = None):
        check_dim(d)
        vals = np.asarray(values, dtype=float)
        if vals.shape != (1 << d,):
            raise ValueError(f"expected {1 << d} values for d={d}, got shape {vals.shape}")
        if np.any(np.isnan(vals)):
            raise ValueError("set function values may be +-inf but never NaN")
        self.d = d
        self.values = vals
        self.values.setflags(write=False)
        self.name = name
        self.nondecreasing = self._compute_nondecreasing()
        self.finite_valued = bool(np.all(np.isfinite(vals)))
        self.normalized = vals[0] == 0.0
        if flags:
            for key in ("nondecreasing", "finite_valued", "normalized"):
                if key in flags and flags[key] != getattr(self, key):
                    raise ValueError(
                        f"declared flag {key}={flags[key]} contradicts the table"
                    )

    def _compute_nondecreasing(self) -> bool:
        vals = self.values
        for mask in enumerate_subsets(self.d):
            m = mask
            while m:
                low = m & -m
                if vals[mask ^ low] > vals[mask]:
                    return False
                m ^= low
        return True

    def value(self, mask: int) -> float:
        return float(self.values[mask])

    def min_value(self) -> float:
        return float(self.values.min())

    # -- named generators ---------------------------------------------------

    @classmethod
    def cardinality(cls, d: int) -> "SetFunction":
        vals = [mask_size(m) for m in range(1 << d)]
        return cls(d, vals, name="cardinality")

    @classmethod
    def sqrt_cardinality(cls, d: int) -> "SetFunction":
        vals = [np.sqrt(mask_size(m)) for m in range(1 << d)]
        return cls(d, vals, name="sqrt-cardinality")

    @classmethod
    def affine(cls, d: int, a: float, b: float) -> "SetFunction":
        """a + b*|K| on nonempty K, 0 on the empty set."""
        vals = [0.0] + [a + b * mask_size(m) for m in range(1, 1 << d)]
        return cls(d, vals, name="affine")

    @classmethod
    def from_config(cls, cfg: dict) -> "SetFunction":
        d = int(cfg["d"])
        if "values" in cfg:
            vals = [INF if v == "inf" else -INF if v == "-inf" else float(v)
                    for v in cfg["values"]]
            return cls(d, vals)
        name = cfg.get("name")
        if name == "cardinality":
            return cls.cardinality(d)
        if name == "sqrt-cardinality":
            return cls.sqrt_cardinality(d)
        if name == "affine":
            return cls.affine(d, float(cfg.get("a", 0.0)), float(cfg.get("b", 1.0)))
        raise ValueError(f"unknown set function config: {cfg!r}")

    def to_config(self) -> dict:
        vals = ["inf" if v == INF else "-inf" if v == -INF else v for v in self.values]
        return {"d": self.d, "values": vals}

    def cache_key(self) -> str:
        return "sf:" + ",".join(repr(v) for v in self.values)

    # -- randomized instances -----------------------------------------------

    @classmethod
    def random_nondecreasing(
        cls, d: int, rng, scale: float = 2.0, normalized: bool = True
    ) -> "SetFunction":
        """Random nondecreasing finite table with values in (0, ~scale].

        Raw per-subset draws are turned monotone by the running maximum
        over sub-subsets; off-empty values are bounded away from zero so
        the result is also usable as an aggregate-norm weight.
        """
        raw = rng.uniform(0.1 * scale, scale, size=1 << d)
        raw[0] = 0.0 if normalized else rng.uniform(0.0, 0.5 * scale)
        vals = raw.copy()
        for mask in range(1, 1 << d):
            m = mask
            while m:
                low = m & -m
                vals[mask] = max(vals[mask], vals[mask ^ low])
                m ^= low
        return cls(d, vals)
