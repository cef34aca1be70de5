"""Truncated Lagrange interpolation at inner zeros of Freud orthonormal
polynomials, plus the dyadic detail operators built from it.

The fundamental polynomial attached to node x_{m,k} is

    l_{m,k}(x) = p_m(x) / (p_m'(x_{m,k}) (x - x_{m,k}))
                 * (a_m^2 - x^2) / (a_m^2 - x_{m,k}^2),

which vanishes at +-a_m and at every other node.  All magnitudes are kept in
mantissa/exponent form: both p_m(x) and 1/p_m'(x_k) individually overflow
double range long before the products do.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import orthopoly as op
from .orthopoly import RecurrenceTable

__all__ = [
    "InterpolationRule",
    "Interpolant",
    "NonFiniteSample",
    "build_rule",
    "fundamental_poly",
    "fundamental_matrix",
    "interpolate",
    "dyadic_degree",
    "DyadicFamily",
]


class NonFiniteSample(ValueError):
    pass


@dataclass(frozen=True)
class InterpolationRule:
    """Node set {x_{m,k} : |k| <= j(m)} with precomputed barycentric data."""

    table: RecurrenceTable
    m: int
    rho: float
    jm: int
    fallback: bool       # no zero reached rho*a_m; all positive zeros used
    am: float
    nodes: np.ndarray    # the 2*j(m) active nodes, ascending
    all_zeros: np.ndarray
    wu: np.ndarray       # mantissa of 1/(p_m'(x_k)*(a_m^2 - x_k^2))
    we: np.ndarray       # exponent, same convention: w_k = wu * 2^we

    @property
    def sample_count(self) -> int:
        return self.nodes.size

    def eps_node(self) -> np.ndarray:
        return 1e-12 * np.maximum(1.0, np.abs(self.nodes))


def build_rule(table: RecurrenceTable, m: int, rho: float = 0.9
               ) -> InterpolationRule:
    xs = op.zeros(table, m)
    jm, fallback = op.truncation_index(table, m, rho)
    am = op.mrs_number(table.lam, m)
    nodes = xs[m // 2 - jm: m // 2 + jm]
    du_u, du_e, du = op.eval_poly(table, m, nodes, with_deriv=True)
    # w_k = 1 / (p_m'(x_k) * (a_m^2 - x_k^2)); derivative shares exponent du_e
    wu = 1.0 / (du * (am**2 - nodes**2))
    we = -du_e
    return InterpolationRule(table=table, m=m, rho=rho, jm=jm,
                             fallback=fallback, am=am, nodes=nodes,
                             all_zeros=xs, wu=wu, we=we)


def _eval_sum(rule: InterpolationRule, values: np.ndarray, x: np.ndarray,
              log2_extra=None, chunk: int = 2048) -> np.ndarray:
    """sum_k values_k * l_{m,k}(x), optionally times 2^(log2_extra(x)).

    ``log2_extra`` supplies a per-point log2 factor (e.g. the weight w(x)) so
    the whole product is assembled in exponent space before exponentiation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    eps = rule.eps_node()
    coeffs = values * rule.wu
    for lo in range(0, x.size, chunk):
        xa = x[lo:lo + chunk]
        pu, pe = op.eval_poly(rule.table, rule.m, xa)
        diff = xa[:, None] - rule.nodes[None, :]
        near = np.abs(diff) < eps[None, :]
        safe = np.where(near, 1.0, diff)
        expo = pe[:, None] + rule.we[None, :]
        if log2_extra is not None:
            expo = expo + log2_extra(xa)[:, None]
        terms = (coeffs[None, :] / safe) * np.exp2(expo)
        terms = np.where(near, 0.0, terms)
        res = (rule.am**2 - xa**2) * pu * terms.sum(axis=1)
        hit = near.any(axis=1)
        if np.any(hit):
            # at (or within eps of) a node the interpolant takes the datum
            k_idx = near.argmax(axis=1)
            node_val = values[k_idx]
            if log2_extra is not None:
                node_val = node_val * np.exp2(log2_extra(xa))
            res = np.where(hit, node_val, res)
        out[lo:lo + chunk] = res
    return out


@dataclass
class Interpolant:
    """I_m f as a callable; ``weighted`` multiplies by a per-point weight
    given in log2 form (used for w * I_m f without overflow)."""

    rule: InterpolationRule
    values: np.ndarray

    def __call__(self, x):
        return _eval_sum(self.rule, self.values, x)

    def weighted(self, x, log2_weight):
        return _eval_sum(self.rule, self.values, x, log2_extra=log2_weight)


def interpolate(rule: InterpolationRule, f) -> Interpolant:
    """I_m f = sum_{|k|<=j(m)} f(x_{m,k}) l_{m,k}."""
    if callable(f):
        vals = np.asarray(f(rule.nodes), dtype=float)
    else:
        vals = np.asarray(f, dtype=float)
    if vals.shape != rule.nodes.shape:
        raise ValueError("sample vector does not match the rule's nodes")
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSample("non-finite sample at an interpolation node")
    return Interpolant(rule=rule, values=vals)


def fundamental_poly(rule: InterpolationRule, k: int, x):
    """l_{m,k}(x) for signed index k, 1 <= |k| <= j(m).

    Index -j..-1 counts left of the origin inward, 1..j right of it outward
    (so k and -k are mirror nodes)."""
    if k == 0 or abs(k) > rule.jm:
        raise ValueError("need 1 <= |k| <= j(m)")
    pos = rule.jm + k - 1 if k > 0 else rule.jm + k
    e = np.zeros(rule.sample_count)
    e[pos] = 1.0
    return _eval_sum(rule, e, x)


def fundamental_matrix(rule: InterpolationRule, x, log2_weight=None
                       ) -> np.ndarray:
    """Matrix L[i, k] = l_{m,k}(x_i) (optionally times 2^log2_weight(x_i));
    the workhorse for tensor-product application."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    eps = rule.eps_node()
    pu, pe = op.eval_poly(rule.table, rule.m, x)
    diff = x[:, None] - rule.nodes[None, :]
    near = np.abs(diff) < eps[None, :]
    safe = np.where(near, 1.0, diff)
    expo = pe[:, None] + rule.we[None, :]
    lw = np.zeros(x.size) if log2_weight is None else log2_weight(x)
    L = ((rule.am**2 - x**2) * pu)[:, None] \
        * (rule.wu[None, :] / safe) * np.exp2(expo + lw[:, None])
    hit_rows = near.any(axis=1)
    if np.any(hit_rows):
        L[hit_rows] = 0.0
        idx = near.argmax(axis=1)
        L[hit_rows, idx[hit_rows]] = np.exp2(lw[hit_rows])
    return L


def dyadic_degree(k: int) -> int:
    """m_k of the dyadic ladder: largest even degree with m_k + 1 <= 2^k,
    with the base levels 0 and 1 pinned to the smallest even degree 2."""
    if k < 0:
        raise ValueError("level must be nonnegative")
    return 2 if k <= 1 else 2**k - 2


class DyadicFamily:
    """Shared ladder of rules I_{m_k}; detail(k) = I_{m_k} - I_{m_{k-1}}."""

    def __init__(self, table: RecurrenceTable, rho: float = 0.9):
        self.table = table
        self.rho = rho
        self._rules: dict[int, InterpolationRule] = {}

    def rule(self, k: int) -> InterpolationRule:
        m = dyadic_degree(k)
        if m not in self._rules:
            self._rules[m] = build_rule(self.table, m, self.rho)
        return self._rules[m]

    def interpolation(self, k: int, f) -> Interpolant:
        return interpolate(self.rule(k), f)

    def detail(self, k: int, f):
        """Delta_k f as a callable (difference of consecutive ladder levels;
        level 0 is I_2 itself)."""
        hi = self.interpolation(k, f)
        if k == 0:
            return lambda x: hi(x)
        lo = self.interpolation(k - 1, f)
        return lambda x: hi(x) - lo(x)
