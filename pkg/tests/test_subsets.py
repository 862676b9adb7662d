import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capracalc.subsets import (
    INF,
    MAX_DIM,
    as_vector,
    complement,
    enumerate_submasks,
    enumerate_subsets,
    format_mask,
    full_mask,
    indices,
    level_set_membership,
    low_add,
    mask_from_indices,
    mask_size,
    project,
    support,
    support_with_tol,
    upp_add,
)


def test_full_mask_and_complement():
    assert full_mask(3) == 0b111
    assert complement(0b101, 3) == 0b010
    assert complement(0, 4) == 0b1111


def test_dimension_cap():
    with pytest.raises(ValueError):
        full_mask(MAX_DIM + 1)
    with pytest.raises(ValueError):
        full_mask(0)
    assert full_mask(MAX_DIM) == (1 << MAX_DIM) - 1


def test_indices_round_trip():
    for mask in range(1 << 5):
        assert mask_from_indices(indices(mask), 5) == mask
        assert mask_size(mask) == len(indices(mask))


def test_mask_from_indices_range_check():
    with pytest.raises(ValueError):
        mask_from_indices([3], 3)


def test_format_mask_is_one_based():
    assert format_mask(0) == "{}"
    assert format_mask(0b101) == "{1,3}"


def test_enumerate_subsets_order():
    subsets = list(enumerate_subsets(3))
    assert subsets == list(range(8))


def test_enumerate_submasks_matches_brute_force():
    for mask in range(1 << 5):
        got = sorted(enumerate_submasks(mask))
        want = sorted(s for s in range(1 << 5) if (s & ~mask) == 0)
        assert got == want


def test_support_is_exact():
    assert support([0.0, 1e-300, -2.0]) == 0b110
    assert support([0.0, 0.0]) == 0
    assert support_with_tol([1e-12, 0.5], 1e-9) == 0b10


def test_project_and_level_sets():
    x = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(project(x, 0b101), [1.0, 0.0, 3.0])
    assert level_set_membership([1.0, 0.0, 0.0], 0b011)
    assert not level_set_membership([1.0, 0.0, 1.0], 0b011)
    with pytest.raises(ValueError):
        project(x, 0b1000)


def test_as_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_vector([1.0, np.inf])


def test_moreau_additions_at_infinity():
    # the lower addition resolves (+inf) + (-inf) downward, the upper upward
    assert low_add(INF, -INF) == -INF
    assert low_add(-INF, INF) == -INF
    assert upp_add(INF, -INF) == INF
    assert upp_add(-INF, INF) == INF
    assert low_add(INF, INF) == INF
    assert upp_add(-INF, -INF) == -INF
    assert low_add(1.5, 2.0) == 3.5
    assert upp_add(1.5, 2.0) == 3.5


def test_moreau_additions_reject_nan():
    with pytest.raises(ValueError):
        low_add(math.nan, 1.0)
    with pytest.raises(ValueError):
        upp_add(1.0, math.nan)


@settings(max_examples=200, deadline=None)
@given(a=st.integers(0, (1 << 6) - 1), b=st.integers(0, (1 << 6) - 1))
def test_mask_size_is_additive_over_disjoint_parts(a, b):
    assert mask_size(a | b) + mask_size(a & b) == mask_size(a) + mask_size(b)


@settings(max_examples=100, deadline=None)
@given(mask=st.integers(0, (1 << 6) - 1))
def test_submask_count_is_power_of_two(mask):
    assert len(list(enumerate_submasks(mask))) == 1 << mask_size(mask)
