import numpy as np
import pytest

from capracalc.setfunctions import SetFunction
from capracalc.subsets import INF, mask_size


def test_cardinality_table():
    F = SetFunction.cardinality(3)
    assert [F.value(m) for m in range(8)] == [0, 1, 1, 2, 1, 2, 2, 3]
    assert F.nondecreasing and F.finite_valued and F.normalized


def test_sqrt_cardinality_table():
    F = SetFunction.sqrt_cardinality(2)
    np.testing.assert_allclose(F.values, [0.0, 1.0, 1.0, np.sqrt(2.0)])


def test_affine_is_zero_at_empty_set():
    F = SetFunction.affine(2, a=0.5, b=2.0)
    assert F.value(0) == 0.0
    assert F.value(0b01) == 2.5
    assert F.value(0b11) == 4.5
    assert F.normalized


def test_computed_flags():
    F = SetFunction(2, [0.0, 2.0, 1.0, 1.5])  # {1,2} below {1}: not monotone
    assert not F.nondecreasing
    G = SetFunction(2, [1.0, 1.0, 2.0, INF])
    assert G.nondecreasing
    assert not G.finite_valued
    assert not G.normalized


def test_contradicting_declared_flag_raises():
    with pytest.raises(ValueError):
        SetFunction(2, [0.0, 2.0, 1.0, 1.5], flags={"nondecreasing": True})
    # consistent declarations are accepted
    SetFunction(2, [0.0, 1.0, 1.0, 2.0], flags={"nondecreasing": True, "normalized": True})


def test_nan_values_rejected():
    with pytest.raises(ValueError):
        SetFunction(1, [0.0, np.nan])


def test_wrong_table_length_rejected():
    with pytest.raises(ValueError):
        SetFunction(3, [0.0, 1.0])


def test_config_round_trip_with_infinities():
    F = SetFunction(2, [0.0, 1.0, INF, INF])
    cfg = F.to_config()
    assert cfg["values"][2] == "inf"
    G = SetFunction.from_config(cfg)
    np.testing.assert_array_equal(F.values, G.values)


def test_from_config_named_generators():
    F = SetFunction.from_config({"d": 3, "name": "cardinality"})
    assert F.value(0b111) == 3
    G = SetFunction.from_config({"d": 2, "name": "affine", "a": 1.0, "b": 0.0})
    assert G.values[1] == 1.0
    with pytest.raises(ValueError):
        SetFunction.from_config({"d": 2, "name": "no-such-generator"})


def test_random_nondecreasing_is_nondecreasing():
    rng = np.random.default_rng(0)
    for _ in range(50):
        F = SetFunction.random_nondecreasing(4, rng)
        assert F.nondecreasing
        assert F.normalized
        assert np.all(F.values[1:] > 0)
        # brute-force pairwise containment check, independent of the
        # bit-trick used inside the class
        for K in range(16):
            for J in range(16):
                if (J & ~K) == 0:
                    assert F.value(J) <= F.value(K) + 1e-15


def test_min_value_and_cache_key():
    F = SetFunction.cardinality(2)
    assert F.min_value() == 0.0
    assert F.cache_key() == SetFunction.cardinality(2).cache_key()
    assert F.cache_key() != SetFunction.sqrt_cardinality(2).cache_key()
