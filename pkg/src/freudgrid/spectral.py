"""Spectral expansion machinery: the orthonormal family for the sampling
measure itself, polynomial-growth coefficient weights, the induced
reproducing-kernel space, and the exact derivative/string identities that
hold for the quartic exponential weight."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .orthopoly import (RecurrenceTable, _panel_grid, build_recurrence_density,
                        eval_basis_with_deriv, eval_weighted_basis, gauss_rule,
                        mrs_number, truncation_radius)
from .weights import WeightSpec

__all__ = [
    "TruncationInsufficient",
    "SpectralCoefficients",
    "RkhsWeights",
    "build_spectral_table",
    "spectral_analyze",
    "rkhs_weights",
    "rkhs_norm",
    "kernel_eval",
    "derivative_recurrence_check",
    "norm_equivalence_probe",
]


class TruncationInsufficient(RuntimeError):
    pass


def build_spectral_table(spec: WeightSpec, M: int,
                         cache_dir: str | None = None) -> RecurrenceTable:
    """Recurrence table for the sampling density w itself (tau = mu power,
    eta must vanish); the family p_m sqrt(w) is then orthonormal in L2 and
    coefficients against w implement the L2(mu_w) expansion."""
    if spec.eta != 0:
        raise ValueError("spectral tables require eta = 0")
    return build_recurrence_density(spec.lam, spec.tau, spec.a, spec.b, M,
                                    cache_dir)


@dataclass
class SpectralCoefficients:
    spec: WeightSpec
    box: tuple            # per-axis degree bound (inclusive)
    coeffs: np.ndarray    # shape box+1

    def __getitem__(self, k):
        return self.coeffs[k]

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


def _quad_basis(table: RecurrenceTable, kmax: int, nquad: int):
    nodes, wts = gauss_rule(table, nquad)
    P, _ = eval_basis_with_deriv(table, kmax, nodes)
    return nodes, wts, P


def spectral_analyze(table: RecurrenceTable, f, box,
                     nquad: int | None = None) -> SpectralCoefficients:
    """Coefficients fhat(k) = integral of f * phi_k against the density, by
    tensor Gauss quadrature; exact for polynomial f of matching degree."""
    if np.isscalar(box):
        box = (int(box),)
    box = tuple(int(b) for b in box)
    d = len(box)
    kmax = max(box)
    if nquad is None:
        nquad = min(table.max_degree, max(80, 2 * (kmax + 1)))
    nodes, wts, P = _quad_basis(table, kmax, nquad)
    mesh = np.meshgrid(*([nodes] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    vals = np.asarray(f(pts if d > 1 else pts[:, 0]), dtype=float)
    T = vals.reshape([nodes.size] * d)
    # contract one axis at a time with W[k, i] = w_i * p_k(x_i)
    for axis in range(d):
        W = (P[: box[axis] + 1] * wts[None, :])
        T = np.tensordot(T, W.T, axes=([0], [0]))
    spec = WeightSpec(lam=table.lam, a=table.c, b=table.c0, tau=table.mu,
                      dim=d)
    return SpectralCoefficients(spec=spec, box=box, coeffs=T)


@dataclass(frozen=True)
class RkhsWeights:
    r: float
    lam: float

    @property
    def r_lambda(self) -> float:
        return (1.0 - 1.0 / self.lam) * self.r

    def rho(self, k) -> float:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        return float(np.prod((k + 1.0) ** self.r_lambda))

    def rho_grid(self, box) -> np.ndarray:
        axes = [(np.arange(b + 1) + 1.0) ** self.r_lambda for b in box]
        out = axes[0]
        for ax in axes[1:]:
            out = np.multiply.outer(out, ax)
        return out


def rkhs_weights(lam: float, r: float) -> RkhsWeights:
    return RkhsWeights(r=float(r), lam=float(lam))


def rkhs_norm(coeffs: SpectralCoefficients, weights: RkhsWeights) -> float:
    rho = weights.rho_grid(coeffs.box)
    return float(np.sqrt(np.sum(np.abs(rho * coeffs.coeffs) ** 2)))


def kernel_eval(weights: RkhsWeights, table: RecurrenceTable, x, y, N: int,
                tail_tol: float = 1e-3):
    """K(x, y) = sum over the box k <= N (per axis) of rho^{-2} phi_k(x)
    phi_k(y); separable, so computed as a product of 1-D kernel sums.  The
    truncation tail is estimated from the degree-N term magnitude times the
    remaining rho^{-2} mass and must stay below tail_tol."""
    two_r = 2.0 * weights.r_lambda
    if two_r <= 1.0:
        raise ValueError("kernel requires r_lambda > 1/2")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim == 1:
        x = x.reshape(-1, 1)
        y = y.reshape(-1, 1)
    d = x.shape[1]
    rho2 = (np.arange(N + 1) + 1.0) ** (-two_r)
    out = np.ones(x.shape[0])
    tail = 0.0
    for i in range(d):
        Px, _ = eval_basis_with_deriv(table, N, x[:, i])
        Py, _ = eval_basis_with_deriv(table, N, y[:, i])
        out *= np.einsum("k,kn,kn->n", rho2, Px, Py)
        # remaining mass of (k+1)^{-2 r_lambda} beyond N, times the last
        # retained product magnitude as a proxy for |phi phi| growth
        mass = (N + 1.0) ** (1.0 - two_r) / (two_r - 1.0)
        tail = max(tail, float(np.max(np.abs(Px[N] * Py[N]))) * mass)
    if tail_tol is not None and tail > tail_tol:
        raise TruncationInsufficient(f"tail estimate {tail:.2e} > {tail_tol}")
    return out if out.size > 1 else float(out[0])


def band_coefficients(table: RecurrenceTable, m: int,
                      nquad: int | None = None) -> np.ndarray:
    """a_{m,k} = lam * c * integral of phi_m phi_k x^(lam-1) w dx for
    0 <= k < m (even lam); the expansion coefficients of phi_m'."""
    lam = int(round(table.lam))
    if nquad is None:
        nquad = max(1200, 6 * m)
    # composite quadrature on a symmetric interval with the bounded functions
    # p_k sqrt(density); Gauss weights of the table itself lose too much
    # relative accuracy at the outer nodes for this cancellation-heavy integral
    X = min(truncation_radius(table.lam, table.c, 0.0),
            1.3 * mrs_number(table.lam, 2 * m + lam) / table.c ** (1 / table.lam) + 6.0)
    xh, wh = _panel_grid(X, nquad, table.mu)
    x = np.concatenate([-xh[::-1], xh])
    wts = np.concatenate([wh[::-1], wh])
    R = eval_weighted_basis(table, m, x)
    integrand = R[m] * x ** (lam - 1) * wts
    return lam * table.c * (R[:m] @ integrand)


def derivative_recurrence_check(table: RecurrenceTable,
                                m_range=range(3, 41)) -> list[dict]:
    """Identity report for the quartic-weight table (lam=4, pure exponential):
    the three-term derivative recurrence, the string equation, the fourth-root
    normalization limit, and the general band structure of phi_m'."""
    report = []
    al = table.alpha
    a = table.c
    lam = int(round(table.lam))

    if lam == 4:
        # string equation: 4a alpha_m^2 (alpha_{m+1}^2+alpha_m^2+alpha_{m-1}^2) = m
        res = 0.0
        for m in m_range:
            s = 4 * a * al[m - 1] ** 2 * (al[m] ** 2 + al[m - 1] ** 2
                                          + al[m - 2] ** 2)
            res = max(res, abs(s - m) / m)
        report.append({"identity": "string_equation", "max_residual": res,
                       "tol": 1e-8, "passed": res < 1e-8})

        # derivative recurrence on a probe grid
        mmax = max(m_range)
        xs = np.linspace(-0.95 * (max(m_range) ** 0.25) * 2.0,
                         0.95 * (max(m_range) ** 0.25) * 2.0, 257)
        P, D = eval_basis_with_deriv(table, mmax, xs)
        res = 0.0
        for m in m_range:
            rhs = (m / al[m - 1]) * P[m - 1]
            if m >= 3:
                rhs = rhs + 4 * a * al[m - 1] * al[m - 2] * al[m - 3] * P[m - 3]
            scale = np.max(np.abs(D[m]))
            res = max(res, float(np.max(np.abs(D[m] - rhs))) / scale)
        report.append({"identity": "derivative_recurrence", "max_residual": res,
                       "tol": 1e-7, "passed": res < 1e-7})

        # normalization limit (12 a / m)^(1/4) alpha_m -> 1: trend only
        ms = sorted({m for m in (10, 20, max(m_range)) if m <= len(al)})
        vals = [(12 * a / m) ** 0.25 * al[m - 1] for m in ms]
        drift = abs(vals[-1] - 1.0)
        report.append({"identity": "alpha_limit", "max_residual": drift,
                       "tol": 5e-3, "passed": drift < 5e-3,
                       "values": vals})

    # band structure for even lam: phi_m' supported on degrees m-lam+1..m-1
    res_out, res_rep, amax = 0.0, 0.0, 0.0
    xs = np.linspace(-2.0 * max(m_range) ** (1.0 / lam) / table.c ** (1.0 / lam),
                     2.0 * max(m_range) ** (1.0 / lam) / table.c ** (1.0 / lam),
                     201)
    P, D = eval_basis_with_deriv(table, max(m_range), xs)
    for m in m_range:
        amk = band_coefficients(table, m)
        out_of_band = amk[: max(0, m - lam + 1)]
        if out_of_band.size:
            res_out = max(res_out, float(np.max(np.abs(out_of_band))))
        recon = amk @ P[:m]
        res_rep = max(res_rep,
                      float(np.max(np.abs(D[m] - recon)))
                      / float(np.max(np.abs(D[m]))))
        amax = max(amax, float(np.max(np.abs(amk))) / m ** (1.0 - 1.0 / lam))
    report.append({"identity": "band_support", "max_residual": res_out,
                   "tol": 1e-8, "passed": res_out < 1e-8})
    report.append({"identity": "band_reconstruction", "max_residual": res_rep,
                   "tol": 1e-7, "passed": res_rep < 1e-7})
    report.append({"identity": "band_magnitude", "max_residual": amax,
                   "tol": None, "passed": True})
    return report


def norm_equivalence_probe(spec: WeightSpec, panel, r: int,
                           box: int = 48, table: RecurrenceTable | None = None,
                           scheme=None) -> dict:
    """Ratio statistics of the coefficient-space norm against the mixed
    Sobolev norm in L2 of the sampling measure, across a function panel."""
    from .metrics import sobolev_norm

    if table is None:
        table = build_spectral_table(spec.with_dim(1), box + 40)
    wts = rkhs_weights(spec.lam, r)
    rows = []
    for tf in panel:
        coeffs = spectral_analyze(table, tf.value, (box,) * spec.dim)
        hn = rkhs_norm(coeffs, wts)
        sn = sobolev_norm(spec, 2, r, tf, scheme=scheme, measure=True)
        rows.append({"name": tf.name, "rkhs_norm": hn, "sobolev_norm": sn,
                     "ratio": hn / sn})
    ratios = [row["ratio"] for row in rows]
    return {"rows": rows, "min_ratio": min(ratios), "max_ratio": max(ratios),
            "spread": max(ratios) / min(ratios)}
