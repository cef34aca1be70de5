"""Orthonormal polynomials for generalized Freud densities.

Recurrence coefficients are computed with the Stieltjes procedure against
composite Gauss-Legendre panel quadrature on [0, X] (even symmetry), working
throughout with the weighted values p_m(x)*sqrt(rho(x)) so nothing overflows.
Moment-based constructions are avoided on purpose: they are catastrophically
ill-conditioned for these densities.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal

from .weights import WeightSpec

__all__ = [
    "RecurrenceTable",
    "QuadratureNonConvergence",
    "build_recurrence",
    "build_recurrence_density",
    "zeros",
    "mrs_number",
    "c_lambda",
    "eval_poly",
    "eval_weighted_basis",
    "truncation_index",
    "truncation_radius",
    "gauss_rule",
]

CACHE_VERSION = 1


class QuadratureNonConvergence(RuntimeError):
    pass


class EigenFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class RecurrenceTable:
    """Jacobi coefficients alpha_1..alpha_M for the density
    rho(x) = |x|^mu * exp(-c|x|^lam + c0).

    The diagonal is identically zero by evenness; ``alpha[m-1]`` holds
    alpha_m.  ``norm0`` is (integral of rho)^(-1/2), the value of p_0.
    """

    lam: float
    mu: float
    c: float
    c0: float
    max_degree: int
    alpha: np.ndarray
    norm0: float

    def __post_init__(self):
        if np.any(self.alpha <= 0):
            raise ValueError("all recurrence coefficients must be positive")

    def density(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            out = -self.c * ax**self.lam + self.c0
            if self.mu:
                out = out + self.mu * np.log(ax)
        return np.exp(out)


def c_lambda(lam: float) -> float:
    """The Mhaskar-Rakhmanov-Saff constant 2^(lam-1)*Gamma(lam/2)^2/Gamma(lam)."""
    return 2.0 ** (lam - 1) * math.gamma(lam / 2) ** 2 / math.gamma(lam)


def mrs_number(lam: float, m: int) -> float:
    """a_m = (C_lam * m)^(1/lam)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return (c_lambda(lam) * m) ** (1.0 / lam)


def truncation_radius(lam: float, c: float, log_peak: float = 0.0) -> float:
    """X with c*X^lam = 750 + max(log_peak, 0): beyond it exp(-c|x|^lam)
    is below 1e-320 of the integrand peak."""
    return ((750.0 + max(log_peak, 0.0)) / c) ** (1.0 / lam)


def _panel_grid(X: float, n_target: int, mu: float, order: int = 24):
    """Composite Gauss-Legendre nodes/weights on [0, X]."""
    xg, wg = leggauss(order)
    uniform = np.linspace(0.0, X, max(2, n_target // order + 1))
    if mu != 0.0:
        # graded panels toward the algebraic singularity at 0
        edges = np.concatenate([[0.0],
                                np.geomspace(1e-12 * X, uniform[1], 33),
                                uniform[2:]])
    else:
        edges = uniform
    a, b = edges[:-1], edges[1:]
    xs = ((a + b)[:, None] / 2 + (b - a)[:, None] / 2 * xg[None, :]).ravel()
    ws = ((b - a)[:, None] / 2 * wg[None, :]).ravel()
    return xs, ws


def _stieltjes(lam, mu, c, c0, M, n_target):
    """Stieltjes run on [0, X] for the weighted values p_m*sqrt(rho).

    Each grid point carries its own power-of-two exponent: sqrt(rho) spans
    thousands of binades across the integration range, far beyond double
    range, while the mantissas stay tame.
    """
    X = max(truncation_radius(lam, c),
            1.15 * (c_lambda(lam) * max(M, 1) / c) ** (1.0 / lam) + 4.0)
    xs, ws = _panel_grid(X, n_target, mu)
    with np.errstate(divide="ignore"):
        log_rho = -c * xs**lam + c0 + (mu * np.log(xs) if mu else 0.0)
    mom0 = 2.0 * np.sum(np.exp(log_rho) * ws)
    norm0 = 1.0 / math.sqrt(mom0)
    half_l2 = 0.5 * log_rho / math.log(2.0)
    e = np.floor(half_l2).astype(np.int64)
    u = norm0 * np.exp2(half_l2 - e)  # mantissa of p_0*sqrt(rho)
    u_prev = np.zeros_like(xs)
    alphas = np.empty(M)
    for m in range(M):
        t = xs * u - (alphas[m - 1] if m > 0 else 0.0) * u_prev
        contrib = np.ldexp(t * t, np.clip(2 * e, -3000, 3000).astype(np.int32))
        a2 = 2.0 * np.sum(contrib * ws)
        if not a2 > 0:
            raise QuadratureNonConvergence(
                f"nonpositive inner product at degree {m + 1}")
        alphas[m] = math.sqrt(a2)
        u_prev, u = u, t / alphas[m]
        mag = np.maximum(np.abs(u), np.abs(u_prev))
        big = mag > _RESCALE
        small = (mag < 1.0 / _RESCALE) & (mag > 0)
        if np.any(big) or np.any(small):
            shift = np.where(big, -64, np.where(small, 64, 0)).astype(np.int64)
            sc = np.ldexp(1.0, shift.astype(np.int32))
            u = u * sc
            u_prev = u_prev * sc
            e -= shift
    return alphas, norm0


def _cache_key(lam, mu, c, c0, M):
    blob = f"v{CACHE_VERSION}|{lam!r}|{mu!r}|{c!r}|{c0!r}|{M}"
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


@lru_cache(maxsize=32)
def build_recurrence_density(lam: float, mu: float, c: float, c0: float,
                             M: int, cache_dir: str | None = None
                             ) -> RecurrenceTable:
    """Stieltjes construction for the density |x|^mu exp(-c|x|^lam + c0),
    verified by rebuilding on a refined grid."""
    if cache_dir is not None:
        path = os.path.join(cache_dir, f"rec_{_cache_key(lam, mu, c, c0, M)}.npz")
        if os.path.exists(path):
            data = np.load(path)
            if int(data["version"]) == CACHE_VERSION:
                return RecurrenceTable(lam=lam, mu=mu, c=c, c0=c0,
                                       max_degree=M,
                                       alpha=data["alpha"],
                                       norm0=float(data["norm0"]))
    n_target = max(800, 8 * M)
    alpha, norm0 = _stieltjes(lam, mu, c, c0, M, n_target)
    alpha2, norm02 = _stieltjes(lam, mu, c, c0, M, int(1.5 * n_target))
    rel = np.max(np.abs(alpha - alpha2) / alpha2)
    if rel > 1e-9 or abs(norm0 - norm02) / norm02 > 1e-9:
        raise QuadratureNonConvergence(
            f"recurrence coefficients did not stabilize (rel dev {rel:.2e})")
    table = RecurrenceTable(lam=lam, mu=mu, c=c, c0=c0, max_degree=M,
                            alpha=alpha2, norm0=norm02)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        np.savez(path, version=CACHE_VERSION, alpha=table.alpha,
                 norm0=table.norm0)
    return table


def build_recurrence(spec: WeightSpec, M: int,
                     cache_dir: str | None = None) -> RecurrenceTable:
    """Table for the companion density v = |x|^mu exp(-2a|x|^lam + 2b)."""
    return build_recurrence_density(spec.lam, spec.mu, 2 * spec.a,
                                    2 * spec.b, M, cache_dir)


def zeros(table: RecurrenceTable, m: int) -> np.ndarray:
    """All m zeros of p_m, ascending; eigenvalues of the Jacobi matrix."""
    if m % 2 != 0:
        raise ValueError("m must be even")
    if m > table.max_degree:
        raise ValueError("m exceeds table degree")
    try:
        vals = eigh_tridiagonal(np.zeros(m), table.alpha[:m - 1],
                                eigvals_only=True)
    except Exception as exc:  # pragma: no cover
        raise EigenFailure(str(exc)) from exc
    vals = np.sort(vals)
    return (vals - vals[::-1]) / 2.0  # enforce exact symmetry about 0


# -- evaluation ------------------------------------------------------------

_RESCALE = 2.0 ** 64


def eval_poly(table: RecurrenceTable, m: int, x, with_deriv: bool = False):
    """(p_m(x), exponent) in mantissa/exponent form: p_m(x) = u * 2^e.

    With ``with_deriv`` also returns the derivative mantissa sharing the same
    exponent (obtained by differentiating the three-term recurrence).
    The mantissa is renormalized whenever it leaves [2^-64, 2^64].
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u_prev = np.zeros_like(x)
    u = np.full_like(x, table.norm0)
    e = np.zeros(x.shape, dtype=np.int64)
    du_prev = np.zeros_like(x)
    du = np.zeros_like(x)
    al = table.alpha
    for j in range(m):
        a1 = al[j]
        a0 = al[j - 1] if j > 0 else 0.0
        nxt = (x * u - a0 * u_prev) / a1
        if with_deriv:
            dn = (u + x * du - a0 * du_prev) / a1
            du_prev, du = du, dn
        u_prev, u = u, nxt
        mag = np.maximum(np.abs(u), np.abs(u_prev))
        big = mag > _RESCALE
        small = (mag < 1.0 / _RESCALE) & (mag > 0)
        if np.any(big) or np.any(small):
            shift = np.where(big, -64, np.where(small, 64, 0)).astype(np.int64)
            sc = np.ldexp(1.0, shift)
            u = u * sc
            u_prev = u_prev * sc
            e -= shift
            if with_deriv:
                du = du * sc
                du_prev = du_prev * sc
    if with_deriv:
        return u, e, du
    return u, e


def eval_weighted_basis(table: RecurrenceTable, mmax: int, x) -> np.ndarray:
    """Matrix [p_m(x)*sqrt(rho(x))]_{m=0..mmax}; bounded, overflow-free."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((mmax + 1, x.size))
    r_prev = np.zeros_like(x)
    r = table.norm0 * np.sqrt(table.density(x))
    out[0] = r
    for m in range(mmax):
        a1 = table.alpha[m]
        a0 = table.alpha[m - 1] if m > 0 else 0.0
        r_prev, r = r, (x * r - a0 * r_prev) / a1
        out[m + 1] = r
    return out


def eval_basis_with_deriv(table: RecurrenceTable, mmax: int, x):
    """Plain-double matrices P[m, i] = p_m(x_i), D[m, i] = p_m'(x_i) for
    m <= mmax.  No exponent scaling: intended for moderate degrees and
    |x| not far beyond a_mmax, where doubles suffice."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    P = np.empty((mmax + 1, x.size))
    D = np.zeros((mmax + 1, x.size))
    P[0] = table.norm0
    if mmax >= 1:
        P[1] = x * P[0] / table.alpha[0]
        D[1] = P[0] / table.alpha[0]
    for m in range(1, mmax):
        a1, a0 = table.alpha[m], table.alpha[m - 1]
        P[m + 1] = (x * P[m] - a0 * P[m - 1]) / a1
        D[m + 1] = (P[m] + x * D[m] - a0 * D[m - 1]) / a1
    return P, D


def truncation_index(table: RecurrenceTable, m: int, rho: float
                     ) -> tuple[int, bool]:
    """j(m): smallest k >= 1 with x_{m,k} >= rho*a_m.

    Falls back to m/2 (all positive zeros) with a flag when no zero reaches
    rho*a_m, keeping downstream operators total for tiny m.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0,1)")
    xs = zeros(table, m)
    pos = xs[m // 2:]  # positive zeros, ascending: x_{m,1} .. x_{m,m/2}
    am = mrs_number(table.lam, m)
    idx = np.nonzero(pos >= rho * am)[0]
    if idx.size == 0:
        return m // 2, True
    return int(idx[0]) + 1, False


def gauss_rule(table: RecurrenceTable, n: int):
    """Gauss rule for the table's density: integral f*rho ~= sum w_i f(x_i)."""
    if n > table.max_degree:
        raise ValueError("rule order exceeds table degree")
    vals, vecs = eigh_tridiagonal(np.zeros(n), table.alpha[:n - 1])
    order = np.argsort(vals)
    nodes = vals[order]
    wts = (vecs[0, order] ** 2) / table.norm0**2
    return nodes, wts
