import math

import numpy as np
import pytest

from freudgrid.interp1d import build_rule
from freudgrid.metrics import (
    QuadratureScheme,
    build_scheme,
    default_cutoff,
    graded_grid,
    inequality_probe,
    marcinkiewicz_norm,
    measure_Lq_norm,
    random_pstar_values,
    sobolev_norm,
    standard_panel,
    weighted_Lq_norm,
)
from freudgrid.weights import INF


def test_scheme_integrates_gaussian():
    sch = build_scheme(12.0, npts=2000)
    val = np.sum(np.exp(-sch.nodes ** 2) * sch.weights)
    assert abs(val - math.sqrt(math.pi)) < 1e-12


def test_weighted_L2_norm_of_one(hermite):
    # ||1||_{2,w} with w = e^{-x^2/2}: integral of e^{-x^2} is sqrt(pi)
    spec = hermite
    val = weighted_Lq_norm(spec, 2.0, lambda x: np.ones_like(x))
    assert abs(val - math.pi ** 0.25) < 1e-10


def test_weighted_L2_norm_of_x(hermite):
    # integral x^2 e^{-x^2} dx = sqrt(pi)/2
    spec = hermite
    val = weighted_Lq_norm(spec, 2.0, lambda x: x)
    assert abs(val - (math.sqrt(math.pi) / 2) ** 0.5) < 1e-10


def test_measure_norm_of_x_squared(hermite):
    # integral x^4 e^{-x^2/2} dx = 3 sqrt(2 pi); but w here is e^{-x^2/2}
    spec = hermite
    val = measure_Lq_norm(spec, 2.0, lambda x: x ** 2)
    assert abs(val - (3 * math.sqrt(2 * math.pi)) ** 0.5) < 1e-9


def test_sup_norm_weighted(hermite):
    spec = hermite
    # x * e^{-x^2/2} peaks at x=1 with value e^{-1/2}
    val = weighted_Lq_norm(spec, INF, lambda x: x)
    # grid-based sup: accurate only to the local grid resolution
    assert abs(val - math.exp(-0.5)) < 1e-4


def test_tensor_norm_factorizes(hermite):
    spec2 = hermite.with_dim(2)
    spec1 = hermite
    sch = build_scheme(default_cutoff(spec1), npts=800)
    f2 = lambda p: np.exp(-p[..., 0] ** 2 / 4) * np.exp(-p[..., 1] ** 2 / 4)
    f1 = lambda x: np.exp(-x ** 2 / 4)
    v2 = weighted_Lq_norm(spec2, 2.0, f2, scheme=sch)
    v1 = weighted_Lq_norm(spec1, 2.0, f1, scheme=sch)
    assert abs(v2 - v1 ** 2) < 1e-10 * v1 ** 2


def test_preweighted_matches_plain(hermite):
    spec = hermite
    f = lambda x: np.cos(x)
    g = lambda x: np.cos(x) * spec.weight_1d(x)
    a = weighted_Lq_norm(spec, 3.0, f)
    b = weighted_Lq_norm(spec, 3.0, g, preweighted=True)
    assert abs(a - b) < 1e-13


def test_graded_grid_shape(hermite):
    spec = hermite
    g = graded_grid(spec, 10.0)
    assert g.min() >= -10.0 and g.max() <= 10.0
    assert np.all(np.diff(g) > 0)


def test_standard_panel_derivatives():
    panel = standard_panel(dim=1, r_max=2)
    names = {tf.name for tf in panel}
    assert {"gauss", "bump", "kink_exp", "trunc_cubic"} <= names
    gauss = next(tf for tf in panel if tf.name == "gauss")
    x = np.linspace(-2, 2, 9)
    # d/dx e^{-x^2/4} = -x/2 e^{-x^2/4}
    expect = -x / 2 * np.exp(-x ** 2 / 4)
    assert np.allclose(gauss.partial(1, x), expect, atol=1e-12)


def test_panel_dim2_separable():
    panel = standard_panel(dim=2, r_max=1)
    tf = next(t for t in panel if t.name == "gauss")
    pts = np.array([[0.5, -1.0], [0.0, 0.0]])
    expect = np.exp(-pts[:, 0] ** 2 / 4) * np.exp(-pts[:, 1] ** 2 / 4)
    assert np.allclose(tf.value(pts), expect)
    mixed = tf.partial((1, 0), pts)
    expect_m = (-pts[:, 0] / 2 * np.exp(-pts[:, 0] ** 2 / 4)
                * np.exp(-pts[:, 1] ** 2 / 4))
    assert np.allclose(mixed, expect_m)


def test_sobolev_r0_equals_Lq(hermite):
    spec = hermite
    tf = standard_panel(dim=1, r_max=0)[0]
    a = sobolev_norm(spec, 2.0, 0, tf)
    b = weighted_Lq_norm(spec, 2.0, tf.value)
    assert abs(a - b) < 1e-13


def test_sobolev_monotone_in_r(hermite):
    spec = hermite
    tf = next(t for t in standard_panel(dim=1, r_max=3) if t.name == "gauss")
    vals = [sobolev_norm(spec, 2.0, r, tf) for r in range(3)]
    assert vals[0] < vals[1] < vals[2]


def test_sobolev_measure_flag(hermite):
    spec = hermite
    tf = standard_panel(dim=1, r_max=0)[0]
    a = sobolev_norm(spec, 2.0, 0, tf, measure=True)
    b = measure_Lq_norm(spec, 2.0, tf.value)
    assert abs(a - b) < 1e-13


def test_marcinkiewicz_inf_is_max(hermite, hermite_table):
    spec = hermite
    rule = build_rule(hermite_table, 16)
    vals = np.ones(rule.sample_count)
    got = marcinkiewicz_norm(spec, rule, INF, vals)
    assert abs(got - np.max(spec.weight_1d(rule.nodes))) < 1e-15


def test_marcinkiewicz_scaling(hermite, hermite_table):
    # doubling every node value doubles every p-norm
    spec = hermite
    rule = build_rule(hermite_table, 16)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(rule.sample_count)
    for p in (1.0, 2.0, 4.0, INF):
        a = marcinkiewicz_norm(spec, rule, p, vals)
        b = marcinkiewicz_norm(spec, rule, p, 2 * vals)
        assert abs(b - 2 * a) < 1e-12 * max(1.0, a)


def test_random_pstar_values_bounded(hermite, hermite_table, rng):
    spec = hermite
    rule = build_rule(hermite_table, 32)
    vals = random_pstar_values(spec, rule, rng)
    assert vals.shape == (rule.sample_count,)
    # weighted samples are standard normal by construction
    assert np.max(np.abs(vals * spec.weight_1d(rule.nodes))) < 8.0


@pytest.mark.parametrize("kind", ["bernstein", "nikolskii"])
def test_inequality_probe_bounded(kind, hermite, hermite_table):
    spec = hermite
    rep = inequality_probe(kind, spec, hermite_table, 2.0, q=4.0,
                           degrees=(8, 16, 32), trials=8, seed=1)
    assert rep["kind"] == kind
    ratios = [row["max_ratio"] for row in rep["rows"]]
    assert all(np.isfinite(ratios))
    # normalized constants stay within one order of magnitude of each other
    assert max(ratios) / min(ratios) < 10.0


def test_inequality_probe_unknown_kind(hermite, hermite_table):
    with pytest.raises(ValueError):
        inequality_probe("bogus", hermite, hermite_table, 2.0,
                         degrees=(8,), trials=1)
