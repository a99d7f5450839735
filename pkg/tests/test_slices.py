import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensor_sandwich import (
    BudgetExceeded,
    PreconditionError,
    RankCapExceeded,
    SamplingOracle,
    SliceCompletionConfig,
    StructuralError,
    complete_slice,
    complete_slices,
    default_column_samples,
    default_slice_budget,
)
from tensor_sandwich.slices import column_samples_for_budget


def low_rank_tensor(n1, n2, n3, r, seed):
    rng = np.random.default_rng(seed)
    slices = [rng.standard_normal((n1, r)) @ rng.standard_normal((r, n2)) for _ in range(n3)]
    return np.stack(slices, axis=2)


def worst_cost(n1, n2, d, r):
    return n1 + (n2 - 1) * d + (r - 1) * (n1 - d)


def test_rank_one_slice():
    x, y = np.arange(1.0, 6.0), np.arange(1.0, 5.0)
    t = np.outer(x, y)[:, :, None]
    cfg = SliceCompletionConfig(rank_cap=1, per_column_samples=3, budget=100)
    res = complete_slice(SamplingOracle(t), 0, cfg)
    np.testing.assert_allclose(res.matrix, t[:, :, 0], rtol=1e-12)
    assert res.columns_fully_sampled == 1
    assert res.queries == 5 + 3 * 3


@pytest.mark.parametrize("seed", range(10))
def test_random_low_rank_exact(seed):
    n, r, d = 40, 3, 10
    t = low_rank_tensor(n, n, 2, r, seed)
    cfg = SliceCompletionConfig(rank_cap=r, per_column_samples=d,
                                budget=default_slice_budget(d, n, r), seed=seed)
    res = complete_slice(SamplingOracle(t), 1, cfg)
    err = np.linalg.norm(res.matrix - t[:, :, 1]) / np.linalg.norm(t[:, :, 1])
    assert err < 1e-10
    assert res.columns_fully_sampled == r
    assert res.queries <= worst_cost(n, n, d, r)
    np.testing.assert_allclose(res.basis.T @ res.basis, np.eye(r), atol=1e-12)


def test_budget_starved():
    t = low_rank_tensor(20, 20, 1, 3, 0)
    cfg = SliceCompletionConfig(rank_cap=3, per_column_samples=6, budget=50)
    oracle = SamplingOracle(t)
    with pytest.raises(BudgetExceeded) as info:
        complete_slice(oracle, 0, cfg)
    assert info.value.slice_index == 0
    assert info.value.budget == 50
    assert info.value.queries <= 50
    assert oracle.query_count <= 50


def test_rank_cap_raise_and_project():
    t = low_rank_tensor(20, 20, 1, 3, 1)
    cfg = SliceCompletionConfig(rank_cap=2, per_column_samples=8, budget=10_000)
    with pytest.raises(RankCapExceeded):
        complete_slice(SamplingOracle(t), 0, cfg)
    cfg = SliceCompletionConfig(rank_cap=2, per_column_samples=8, budget=10_000,
                                on_rank_cap="project")
    res = complete_slice(SamplingOracle(t), 0, cfg)
    assert res.basis.shape[1] == 2
    assert res.rank_cap_hits > 0


def test_reads_stay_in_slice():
    t = low_rank_tensor(10, 10, 3, 2, 2)
    o = SamplingOracle(t)
    complete_slices(o, [2], SliceCompletionConfig(rank_cap=2, per_column_samples=4,
                                                  budget=1000))
    assert set(o.observed().triples[:, 2]) == {2}
    assert o.phase_count("omega1") == o.query_count


def test_complete_slices_validation():
    o = SamplingOracle(np.zeros((3, 3, 3)))
    cfg = SliceCompletionConfig(rank_cap=1, per_column_samples=2, budget=100)
    with pytest.raises(StructuralError):
        complete_slices(o, [0, 0], cfg)
    with pytest.raises(StructuralError):
        complete_slices(o, [3], cfg)


def test_zero_slice():
    res = complete_slice(SamplingOracle(np.zeros((4, 5, 1))), 0,
                         SliceCompletionConfig(rank_cap=2, per_column_samples=3, budget=100))
    assert np.all(res.matrix == 0)


def test_default_column_samples():
    expected = math.ceil(2 * 1.0 * 2 * math.log(4 / 0.1) ** 2)
    assert default_column_samples(1.0, 2, 0.1, 1000) == expected
    assert default_column_samples(1.0, 3, 0.1, 40) == 40
    with pytest.raises(PreconditionError):
        default_column_samples(1.0, 2, 1.5, 10)


def test_column_samples_for_budget():
    assert column_samples_for_budget(100, 30, 30, 4) == 1
    for budget in (500, 2000):
        d = column_samples_for_budget(budget, 30, 30, 4)
        assert worst_cost(30, 30, d, 4) <= budget
        if d < 30:
            assert worst_cost(30, 30, d + 1, 4) > budget


def test_config_validation():
    with pytest.raises(PreconditionError):
        SliceCompletionConfig(rank_cap=0, per_column_samples=1, budget=1)
    with pytest.raises(PreconditionError):
        SliceCompletionConfig(rank_cap=1, per_column_samples=1, budget=1, on_rank_cap="x")


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 20), st.integers(1, 4), st.integers(1, 25), st.integers(0, 400),
       st.integers(0, 2**31))
def test_budget_never_exceeded(n, r, d, budget, seed):
    r = min(r, n)
    t = low_rank_tensor(n, n, 1, r, seed)
    oracle = SamplingOracle(t)
    cfg = SliceCompletionConfig(rank_cap=r, per_column_samples=d, budget=budget, seed=seed)
    try:
        res = complete_slice(oracle, 0, cfg)
        assert res.queries <= budget
    except (BudgetExceeded, RankCapExceeded):
        pass
    assert oracle.query_count <= budget
