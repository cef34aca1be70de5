"""Weighted L_q and mixed Sobolev norms, discrete Marcinkiewicz norms, and
empirical probes for the Bernstein / Nikol'skii-type inequalities."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import orthopoly as op
from .interp1d import InterpolationRule, interpolate
from .weights import INF, WeightSpec, inv_index, rate_exponents

__all__ = [
    "QuadratureScheme",
    "TestFunction",
    "CutoffTooSmall",
    "build_scheme",
    "default_cutoff",
    "graded_grid",
    "weighted_Lq_norm",
    "measure_Lq_norm",
    "sobolev_norm",
    "marcinkiewicz_norm",
    "random_pstar_values",
    "inequality_probe",
    "standard_panel",
]


class CutoffTooSmall(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureScheme:
    """Composite Gauss-Legendre panels on [-X, X] (single axis)."""

    nodes: np.ndarray
    weights: np.ndarray
    cutoff: float

    @property
    def size(self) -> int:
        return self.nodes.size


def build_scheme(X: float, npts: int = 4000, order: int = 12
                 ) -> QuadratureScheme:
    xg, wg = leggauss(order)
    edges = np.linspace(-X, X, max(2, npts // order + 1))
    a, b = edges[:-1], edges[1:]
    xs = ((a + b)[:, None] / 2 + (b - a)[:, None] / 2 * xg[None, :]).ravel()
    ws = ((b - a)[:, None] / 2 * wg[None, :]).ravel()
    return QuadratureScheme(nodes=xs, weights=ws, cutoff=X)


def default_cutoff(spec: WeightSpec) -> float:
    """Radius beyond which w(x)^q underflows for every q >= 1."""
    return (760.0 / spec.a) ** (1.0 / spec.lam)


def graded_grid(spec: WeightSpec, X: float, n: int = 2000) -> np.ndarray:
    """Sup-norm grid: uniform core plus geometric refinement toward the
    edges +-X and (when tau > 0) toward the origin."""
    core = np.linspace(-X, X, n)
    edge = X - np.geomspace(1e-10 * X, 0.2 * X, n // 8)
    parts = [core, edge, -edge]
    if spec.tau > 0:
        tiny = np.geomspace(1e-12 * X, 0.2 * X, n // 8)
        parts += [tiny, -tiny]
    return np.unique(np.concatenate(parts))


def _tensor_quad(scheme: QuadratureScheme, d: int):
    axes = [scheme.nodes] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    w = scheme.weights
    wt = w
    for _ in range(d - 1):
        wt = np.multiply.outer(wt, w)
    return pts, wt.ravel()


def weighted_Lq_norm(spec: WeightSpec, q, f, scheme: QuadratureScheme | None
                     = None, npts: int = 4000, preweighted: bool = False
                     ) -> float:
    """(integral |f*w|^q dx)^(1/q), or sup |f*w| on a graded grid for q=INF.

    ``f`` is a vectorized callable on points of shape (..., dim) for dim>1,
    or plain arrays in dimension 1.  With ``preweighted`` the callable is
    trusted to return the product f*w itself — the stable path when f alone
    would overflow (high-degree weighted polynomials).
    """
    d = spec.dim

    def wmul(vals, x):
        if preweighted:
            return np.asarray(vals)
        return np.asarray(vals) * (spec.weight_1d(x) if d == 1
                                   else spec.weight(x))

    if scheme is None:
        scheme = build_scheme(default_cutoff(spec), npts=npts)
    if q is INF:
        g = graded_grid(spec, scheme.cutoff)
        if d == 1:
            return float(np.max(np.abs(wmul(f(g), g))))
        mesh = np.meshgrid(*([g] * d), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        return float(np.max(np.abs(wmul(f(pts), pts))))
    q = float(q)
    if d == 1:
        x = scheme.nodes
        integrand = np.abs(wmul(f(x), x)) ** q
        val = float(np.sum(integrand * scheme.weights))
    else:
        pts, wt = _tensor_quad(scheme, d)
        integrand = np.abs(wmul(f(pts), pts)) ** q
        val = float(np.sum(integrand * wt))
    return val ** (1.0 / q)


def measure_Lq_norm(spec: WeightSpec, q, f, scheme: QuadratureScheme | None
                    = None, npts: int = 4000) -> float:
    """Norm in L_q(R^d; mu_w): (integral |f|^q w dx)^(1/q); ess-sup via a
    graded grid for q=INF."""
    d = spec.dim
    if scheme is None:
        scheme = build_scheme(default_cutoff(spec), npts=npts)
    if q is INF:
        g = graded_grid(spec, scheme.cutoff)
        if d == 1:
            return float(np.max(np.abs(np.asarray(f(g)))))
        mesh = np.meshgrid(*([g] * d), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        return float(np.max(np.abs(np.asarray(f(pts)))))
    q = float(q)
    if d == 1:
        x = scheme.nodes
        integrand = np.abs(np.asarray(f(x))) ** q * spec.weight_1d(x)
        val = float(np.sum(integrand * scheme.weights))
    else:
        pts, wt = _tensor_quad(scheme, d)
        integrand = np.abs(np.asarray(f(pts))) ** q * spec.weight(pts)
        val = float(np.sum(integrand * wt))
    return val ** (1.0 / q)


# -- test functions --------------------------------------------------------

@dataclass
class TestFunction:
    """Separable function with analytic mixed partials.

    ``factors[i][k]`` evaluates the k-th derivative of the i-th univariate
    factor; the mixed partial D^kvec is the product of per-axis derivatives.
    """

    name: str
    dim: int
    factors: list

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return self.factors[0][0](x if x.ndim else x[None])
        out = np.ones(x.shape[:-1])
        for i in range(self.dim):
            out = out * self.factors[i][0](x[..., i])
        return out

    __call__ = value

    def partial(self, kvec, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            k = kvec if np.isscalar(kvec) else kvec[0]
            return self.factors[0][k](x)
        out = np.ones(x.shape[:-1])
        for i in range(self.dim):
            out = out * self.factors[i][kvec[i]](x[..., i])
        return out


def _sympy_factor(expr_builder, r_max: int):
    import sympy as sp

    x = sp.Symbol("x", real=True)
    expr = expr_builder(x)
    fns = []
    for k in range(r_max + 1):
        der = sp.diff(expr, x, k) if k else expr
        fn = sp.lambdify(x, der, modules="numpy")
        fns.append(_vector_safe(fn))
    return fns


def _vector_safe(fn):
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(fn(x), dtype=float)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).copy()
        return np.nan_to_num(out)
    return wrapped


def standard_panel(dim: int = 1, r_max: int = 3) -> list[TestFunction]:
    """Default experiment panel: decaying-smooth and compactly supported
    shapes, each with analytic derivatives up to r_max."""
    import sympy as sp

    builders = {
        "gauss": lambda x: sp.exp(-x**2 / 4),
        "shifted_gauss": lambda x: sp.exp(-(x - sp.Rational(1, 2))**2 / 3),
        "bump": lambda x: sp.Piecewise(
            (sp.exp(-1 / (1 - (x / 3)**2)), abs(x) < 3), (0, True)),
        "poly_gauss": lambda x: (x**3 - x + 1) * sp.exp(-x**2 / 5),
        # finite-smoothness members: derivative jumps give genuine power-law
        # interpolation errors instead of spectral decay to the floor
        "kink_exp": lambda x: (1 + sp.Abs(x)) * sp.exp(-sp.Abs(x)),
        "trunc_cubic": lambda x: sp.Piecewise(
            ((1 - (x / 3)**2)**3, abs(x) < 3), (0, True)),
    }
    panel = []
    for name, builder in builders.items():
        fns = _sympy_factor(builder, r_max)
        panel.append(TestFunction(name=name, dim=dim, factors=[fns] * dim))
    return panel


def sobolev_norm(spec: WeightSpec, p, r: int, tf: TestFunction,
                 scheme: QuadratureScheme | None = None,
                 measure: bool = False) -> float:
    """Mixed-smoothness norm (sum_{|kvec|_inf <= r} ||D^kvec f||_p^p)^(1/p);
    weighted sense by default, L_p(mu_w) sense with measure=True; max over
    kvec for p=INF."""
    norm_fn = measure_Lq_norm if measure else weighted_Lq_norm
    kvecs = list(itertools.product(range(r + 1), repeat=spec.dim))
    terms = []
    for kv in kvecs:
        nrm = norm_fn(spec, p, lambda x, kv=kv: tf.partial(kv, x),
                      scheme=scheme)
        terms.append(nrm)
    if p is INF:
        return float(np.max(terms))
    p = float(p)
    return float(np.sum(np.asarray(terms) ** p) ** (1.0 / p))


# -- discrete norms and probes ---------------------------------------------

def marcinkiewicz_norm(spec: WeightSpec, rule: InterpolationRule, p,
                       samples) -> float:
    """(m^(1/lam-1) * sum_k |phi(x_k) w(x_k)|^p)^(1/p) over the rule nodes;
    max |phi*w| for p=INF."""
    samples = np.asarray(samples, dtype=float)
    wvals = spec.weight_1d(rule.nodes)
    prod = np.abs(samples * wvals)
    if p is INF:
        return float(np.max(prod))
    p = float(p)
    scale = rule.m ** (1.0 / spec.lam - 1.0)
    return float((scale * np.sum(prod ** p)) ** (1.0 / p))


def random_pstar_values(spec: WeightSpec, rule: InterpolationRule, rng
                        ) -> np.ndarray:
    """Random element of the interpolation range, drawn by node values with
    standard-normal *weighted* data (conditioning: the cardinal basis is
    well behaved in the weighted scale)."""
    g = rng.standard_normal(rule.sample_count)
    return g / spec.weight_1d(rule.nodes)


def _random_poly_weighted(table, spec, m, rng, x, deriv=False):
    """Random phi = sum c_j p_j with N(0,1) coefficients; returns w*phi
    (and w*phi') on x."""
    c = rng.standard_normal(m + 1)
    P, D = op.eval_basis_with_deriv(table, m, x)
    wfac = spec.weight_1d(x) / np.sqrt(table.density(x))
    wb = np.sqrt(table.density(x))
    phi_w = (c @ P) * wb * wfac
    if not deriv:
        return phi_w
    dphi_w = (c @ D) * wb * wfac
    return phi_w, dphi_w


def inequality_probe(kind: str, spec: WeightSpec, table, p, q=None,
                     degrees=(8, 16, 32), trials: int = 20, seed: int = 0,
                     delta: float = 0.1) -> dict:
    """Empirical constants for polynomial inequalities on P_m.

    kinds: 'bernstein'  -- ||phi'||_p <= C m^(1-1/lam) ||phi||_p
           'nikolskii'  -- ||phi||_q <= C m^delta_{lam,p,q} ||phi||_p
           'restricted_support' -- full-line vs I^delta_m norm ratio
    Reports the max normalized ratio per degree; a monotone blow-up across
    degrees indicates failure of the inequality at desk scale.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for m in degrees:
        am = op.mrs_number(spec.lam, m)
        X = 1.3 * am + 2.0
        sch = build_scheme(X, npts=max(1200, 24 * m))
        x = sch.nodes
        ratios = []
        for _ in range(trials):
            if kind == "bernstein":
                phi_w, dphi_w = _random_poly_weighted(table, spec, m, rng, x,
                                                      deriv=True)
                num = _disc_norm(dphi_w, sch.weights, p)
                den = _disc_norm(phi_w, sch.weights, p)
                ratios.append(num / (m ** (1.0 - 1.0 / spec.lam) * den))
            elif kind == "nikolskii":
                phi_w = _random_poly_weighted(table, spec, m, rng, x)
                delta_pq = rate_exponents(spec.lam, p, q, 1).delta
                num = _disc_norm(phi_w, sch.weights, q)
                den = _disc_norm(phi_w, sch.weights, p)
                ratios.append(num / (m ** abs(delta_pq) * den))
            elif kind == "restricted_support":
                phi_w = _random_poly_weighted(table, spec, m, rng, x)
                inner = np.abs(x) >= delta * am / m
                num = _disc_norm(phi_w, sch.weights, p)
                den = _disc_norm(np.where(inner, phi_w, 0.0), sch.weights, p)
                ratios.append(num / den)
            else:
                raise ValueError(f"unknown probe kind {kind!r}")
        rows.append({"m": m, "max_ratio": float(np.max(ratios)),
                     "median_ratio": float(np.median(ratios))})
    return {"kind": kind, "p": repr(p), "q": repr(q), "trials": trials,
            "seed": seed, "rows": rows}


def _disc_norm(vals_w, weights, p):
    if p is INF:
        return float(np.max(np.abs(vals_w)))
    p = float(p)
    return float(np.sum(np.abs(vals_w) ** p * weights) ** (1.0 / p))
