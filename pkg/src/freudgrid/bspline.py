"""Cardinal B-splines, quasi-interpolation masks, periodic dyadic details,
and the periodic Smolyak sampling operator R_m on the grids G^d(m)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .sparsegrid import combination_coefficients

__all__ = [
    "BSplineMask",
    "MaskError",
    "PeriodicSpline",
    "PeriodicPlan",
    "eval_cardinal_bspline",
    "build_mask",
    "quasi_interpolate_integer",
    "quasi_interpolate",
    "periodic_smolyak",
    "grid_G",
    "detail_stencils",
    "refinement_coefficients",
]


class MaskError(RuntimeError):
    pass


def eval_cardinal_bspline(ell: int, x):
    """M_ell: the cardinal B-spline of order ell, support exactly [0, ell]."""
    if ell < 2 or ell % 2:
        raise ValueError("ell must be an even integer >= 2")
    x = np.asarray(x, dtype=float)
    basis = BSpline.basis_element(np.arange(ell + 1.0), extrapolate=False)
    with np.errstate(invalid="ignore"):
        out = basis(x)
    return np.nan_to_num(out, nan=0.0)


@dataclass(frozen=True)
class BSplineMask:
    """Even coefficient sequence lam(j), |j| <= mu_mask, defining the
    quasi-interpolation functional Lambda(f, s) = sum_j lam(j) f(s-j+ell/2)."""

    ell: int
    mu_mask: int
    lam: np.ndarray  # lam[j] for j = 0..mu_mask; negative j by evenness

    def lam_at(self, j: int) -> float:
        return float(self.lam[abs(j)])

    def offsets(self):
        """Sample offsets and weights: Lambda(f, s) = sum w_j f(s + o_j)."""
        js = range(-self.mu_mask, self.mu_mask + 1)
        return [(-j + self.ell // 2, self.lam_at(j)) for j in js]

    def to_dict(self) -> dict:
        return {"ell": self.ell, "mu_mask": self.mu_mask,
                "lam": list(map(float, self.lam))}

    @classmethod
    def from_dict(cls, d: dict) -> "BSplineMask":
        return cls(ell=int(d["ell"]), mu_mask=int(d["mu_mask"]),
                   lam=np.asarray(d["lam"], dtype=float))


def quasi_interpolate_integer(mask: BSplineMask, f, x):
    """Non-periodic unit-scale Q(f)(x) = sum_s Lambda(f,s) M(x - s); the
    reference operator used by the polynomial-reproduction tests."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s_lo = int(np.floor(x.min())) - mask.ell - mask.mu_mask - 1
    s_hi = int(np.ceil(x.max())) + mask.mu_mask + 1
    out = np.zeros_like(x)
    for s in range(s_lo, s_hi + 1):
        lam_fs = sum(w * f(s + o) for o, w in mask.offsets())
        out += lam_fs * eval_cardinal_bspline(mask.ell, x - s)
    return out


def build_mask(ell: int, mu_mask: int | None = None) -> BSplineMask:
    """Solve the exactness conditions Q(x^nu) = x^nu, nu < ell, for the
    minimal even mask; raises MaskError when the residual is not tiny."""
    if mu_mask is None:
        mu_mask = max(0, ell // 2 - 1)
    xs = np.linspace(20.1, 21.3, 48)
    cols = []
    for t in range(mu_mask + 1):
        lam = np.zeros(mu_mask + 1)
        lam[t] = 1.0
        probe = BSplineMask(ell=ell, mu_mask=mu_mask, lam=lam)
        col = []
        for nu in range(ell):
            mono = lambda y, nu=nu: (y - 20.7) ** nu
            col.append(quasi_interpolate_integer(probe, mono, xs))
        cols.append(np.concatenate(col))
    A = np.stack(cols, axis=1)
    b = np.concatenate([(xs - 20.7) ** nu for nu in range(ell)])
    lam, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = np.max(np.abs(A @ lam - b))
    if resid > 1e-10:
        raise MaskError(f"mask exactness residual {resid:.2e} for ell={ell}, "
                        f"mu_mask={mu_mask}")
    return BSplineMask(ell=ell, mu_mask=mu_mask, lam=lam)


def refinement_coefficients(ell: int) -> np.ndarray:
    """M(x) = sum_j rc_j M(2x - j) with rc_j = 2^(1-ell) * binom(ell, j)."""
    return np.array([math.comb(ell, j) for j in range(ell + 1)]) * 2.0 ** (1 - ell)


# -- periodic machinery ----------------------------------------------------

def _level_size(ell: int, k: int) -> int:
    return ell * 2 ** k


def _level_grid(ell: int, k: int) -> np.ndarray:
    L = _level_size(ell, k)
    return np.arange(L) / L


def periodic_coeffs(mask: BSplineMask, f, levels) -> np.ndarray:
    """Tensor of coefficients a_{k,s}(f) for 1-periodic f: the mask applied
    circularly along each axis of the level-k sample grid."""
    grids = [_level_grid(mask.ell, k) for k in levels]
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    vals = np.asarray(f(pts if len(levels) > 1 else pts[:, 0]), dtype=float)
    A = vals.reshape([g.size for g in grids])
    for axis in range(len(levels)):
        acc = np.zeros_like(A)
        for o, w in mask.offsets():
            acc += w * np.roll(A, shift=-o, axis=axis)
        A = acc
    return A


@dataclass
class PeriodicSpline:
    """sum_s A_s prod_i N_{k_i, s_i}; N_k is the 1-periodization of
    M(ell 2^k x), shifted on the grid of pitch 1/(ell 2^k)."""

    mask: BSplineMask
    levels: tuple
    coeffs: np.ndarray

    def __call__(self, x):
        ell = self.mask.ell
        d = len(self.levels)
        x = np.asarray(x, dtype=float)
        if d == 1:
            x = np.atleast_1d(x).reshape(-1, 1)
        else:
            x = np.atleast_2d(x)
        N = x.shape[0]
        per_axis = []
        for i, k in enumerate(self.levels):
            L = _level_size(ell, k)
            t = (x[:, i] % 1.0) * L
            f0 = np.floor(t)
            frac = t - f0
            ii = np.arange(ell)
            sidx = (f0.astype(int)[:, None] - ii[None, :]) % L
            bval = eval_cardinal_bspline(ell, frac[:, None] + ii[None, :])
            per_axis.append((sidx, bval))
        out = np.zeros(N)
        for offs in itertools.product(range(ell), repeat=d):
            idx = tuple(per_axis[i][0][:, offs[i]] for i in range(d))
            w = per_axis[0][1][:, offs[0]].copy()
            for i in range(1, d):
                w *= per_axis[i][1][:, offs[i]]
            out += self.coeffs[idx] * w
        return out


def quasi_interpolate(mask: BSplineMask, f, levels) -> PeriodicSpline:
    """Periodic Q_k (tensorized when ``levels`` has several entries)."""
    if np.isscalar(levels):
        levels = (int(levels),)
    levels = tuple(int(k) for k in levels)
    if any(k < 0 for k in levels):
        raise ValueError("levels must be nonnegative")
    return PeriodicSpline(mask=mask, levels=levels,
                          coeffs=periodic_coeffs(mask, f, levels))


@dataclass
class PeriodicPlan:
    """Combination plan for R_m = sum_{|k|_1 <= m} prod_i (Q_{k_i}-Q_{k_i-1})
    with Q_{-1} := 0."""

    mask: BSplineMask
    dim: int
    m: int
    combo: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.combo:
            self.combo = combination_coefficients(self.dim, self.m)


class PeriodicSmolyak:
    def __init__(self, plan: PeriodicPlan, f):
        self.plan = plan
        self.terms = [(levels, coeff, quasi_interpolate(plan.mask, f, levels))
                      for levels, coeff in sorted(plan.combo.items())]

    def __call__(self, x):
        out = None
        for _levels, coeff, spline in self.terms:
            v = coeff * spline(x)
            out = v if out is None else out + v
        return out

    def sample_points(self) -> np.ndarray:
        """Distinct points touched (union of the active level grids)."""
        ell = self.plan.mask.ell
        mcap = max(sum(lv) for lv, _, _ in self.terms)
        den = _level_size(ell, mcap)
        seen = set()
        for levels, _c, _s in self.terms:
            grids = [np.arange(_level_size(ell, k)) * (den // _level_size(ell, k))
                     for k in levels]
            for tup in itertools.product(*grids):
                seen.add(tup)
        pts = np.array(sorted(seen), dtype=float) / den
        return pts


def periodic_smolyak(plan: PeriodicPlan, f) -> PeriodicSmolyak:
    return PeriodicSmolyak(plan, f)


def grid_G(dim: int, m: int, ell: int) -> np.ndarray:
    """G^d(m): union over |k|_1 = m of the tensor level grids, deduplicated
    by exact dyadic arithmetic."""
    den = _level_size(ell, m)
    seen = set()
    for k in itertools.product(range(m + 1), repeat=dim):
        if sum(k) != m:
            continue
        grids = [np.arange(_level_size(ell, ki)) * (den // _level_size(ell, ki))
                 for ki in k]
        for tup in itertools.product(*grids):
            seen.add(tup)
    return np.array(sorted(seen), dtype=float) / den


def detail_stencils(mask: BSplineMask, k: int) -> list[dict]:
    """1-D stencils of the detail coefficients: q_k f = sum_t c_{k,t} N_{k,t}
    with c_{k,t} = a_{k,t} - sum over refinement pairs of level k-1.

    Returns, per t, a dict {grid index at level k: weight}; every stencil
    touches a bounded number of sample points regardless of k."""
    ell = mask.ell
    L = _level_size(ell, k)
    rc = refinement_coefficients(ell)
    stencils = [dict() for _ in range(L)]

    def add(t, idx, w):
        st = stencils[t]
        st[idx] = st.get(idx, 0.0) + w

    for t in range(L):
        for o, wgt in mask.offsets():
            add(t, (t + o) % L, wgt)
    if k >= 1:
        Lc = _level_size(ell, k - 1)
        for s in range(Lc):
            for j in range(ell + 1):
                t = (2 * s + j) % L
                for o, wgt in mask.offsets():
                    # level k-1 sample (s+o)/Lc = 2(s+o)/L on the fine grid
                    add(t, (2 * (s + o)) % L, -rc[j] * wgt)
    return stencils
