from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freudgrid.weights import (INF, WeightSpec, check_condition_C, index_le,
                               inv_index, rate_exponents)


def test_inv_index():
    assert inv_index(2) == 0.5
    assert inv_index(INF) == 0.0
    assert index_le(2, 4)
    assert index_le(3, INF)
    assert not index_le(INF, 3)


def test_hermite_factory():
    spec = WeightSpec.hermite()
    assert spec.lam == 2.0 and spec.a == 0.5 and spec.b == 0.0
    x = np.linspace(-3, 3, 7)
    assert np.allclose(spec.weight_1d(x), np.exp(-x**2 / 2))
    assert np.allclose(spec.companion_1d(x), np.exp(-x**2))


def test_tensor_weight_factorizes():
    spec = WeightSpec.hermite().with_dim(3)
    pts = np.random.default_rng(0).normal(size=(11, 3))
    per_axis = np.prod([spec.with_dim(1).weight_1d(pts[:, i])
                        for i in range(3)], axis=0)
    assert np.allclose(spec.weight(pts), per_axis)


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        WeightSpec(lam=1.0, a=1.0)      # needs lam > 1
    with pytest.raises(ValueError):
        WeightSpec(lam=2.0, a=-1.0)


def test_rate_exponents_values():
    # lam=2, r=2: one-dimensional main exponent is (1-1/2)*2 = 1
    re = rate_exponents(2.0, 2, 2, 2)
    assert re.r_lambda == pytest.approx(1.0)
    assert re.delta == pytest.approx(0.0)
    assert re.r_lpq == pytest.approx(1.0)
    # p < q pays (1-1/lam)(1/p-1/q)
    re = rate_exponents(2.0, 2, 4, 2)
    assert re.delta == pytest.approx(0.5 * (0.5 - 0.25))
    assert re.r_lpq == pytest.approx(1.0 - 0.125)
    # p > q pays (1/lam)(1/q-1/p)
    re = rate_exponents(2.0, 4, 2, 2)
    assert re.delta == pytest.approx(0.5 * (0.5 - 0.25))
    # INF endpoints
    re = rate_exponents(4.0, INF, 2, 1)
    assert re.delta == pytest.approx((1.0 / 4.0) * 0.5)


@settings(max_examples=60)
@given(lam=st.floats(1.1, 8), r=st.integers(1, 5),
       p=st.sampled_from([1.0, 2.0, 3.0, 4.0]),
       q=st.sampled_from([1.0, 2.0, 3.0, 4.0]))
def test_rate_exponent_never_exceeds_main_term(lam, r, p, q):
    re = rate_exponents(lam, p, q, r)
    assert re.delta >= 0
    assert re.r_lpq <= re.r_lambda + 1e-12


def test_condition_boundary_is_exact():
    # tau + 1/p integer: must be flagged through exact rational arithmetic
    spec = WeightSpec(lam=2.0, a=0.5, tau=0.5)
    ok, _ = check_condition_C(spec, p=2)       # 1/2 + 1/2 = 1
    assert not ok
    ok, _ = check_condition_C(spec, p=4)       # 1/2 + 1/4 = 3/4, both clauses ok
    assert ok
    assert Fraction(1, 2) + Fraction(1, 2) == 1


def test_condition_second_clause():
    # -1/p < tau - mu/2 < 1 - 1/p - eta
    spec = WeightSpec(lam=2.0, a=0.5, tau=0.1, mu=0.0, eta=0.0)
    ok, _ = check_condition_C(spec, p=2)
    assert ok
    bad = WeightSpec(lam=2.0, a=0.5, tau=0.8, mu=0.0, eta=0.0)
    ok, why = check_condition_C(bad, p=2)      # 0.8 > 1 - 1/2
    assert not ok and why


@given(st.floats(1.2, 6), st.floats(0.1, 3), st.floats(0, 1), st.floats(0, 1),
       st.integers(1, 4))
@settings(max_examples=40)
def test_config_round_trip(lam, a, tau, eta, dim):
    spec = WeightSpec(lam=lam, a=a, tau=tau, eta=eta, dim=dim)
    assert WeightSpec.from_config(spec.to_config()) == spec
