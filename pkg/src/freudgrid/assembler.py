"""Assembling periodic samplers into global operators on R^d: smooth
partition of unity on integer-shifted cubes, exponential sample-budget
allocation over the lattice, hyperbolic-cross Fourier projection, and the
assembled sampling / linear operators built from them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bspline import BSplineMask, PeriodicPlan, grid_G, periodic_smolyak
from .weights import WeightSpec

__all__ = [
    "InvalidTheta",
    "BudgetInfeasible",
    "ResolutionTooLow",
    "NonFiniteSample",
    "PartitionOfUnity",
    "BudgetAllocation",
    "build_partition",
    "allocate_budget",
    "hyperbolic_cross_indices",
    "FourierProjection",
    "hyperbolic_cross_fourier",
    "spline_inner",
    "fourier_inner",
    "assembled_sample",
    "assembled_linear",
    "AssembledApproximation",
]


class InvalidTheta(ValueError):
    pass


class BudgetInfeasible(RuntimeError):
    pass


class ResolutionTooLow(RuntimeError):
    pass


class NonFiniteSample(RuntimeError):
    pass


def _smoothstep(t):
    """C-infinity monotone step: 0 for t<=0, 1 for t>=1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        lo = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        hi = np.where(t < 1, np.exp(-1.0 / np.maximum(1 - t, 1e-300)), 0.0)
    return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, lo / (lo + hi)))


@dataclass(frozen=True)
class PartitionOfUnity:
    """phi_k(x) = prod_i g(x_i - k_i), k in Z^d, with a univariate plateau g
    supported in (-theta/2, theta/2) satisfying sum_k g(x - k) = 1."""

    theta: float
    dim: int

    def g(self, x):
        c = self.theta / 2.0
        x = np.abs(np.asarray(x, dtype=float))
        t = (x - (1.0 - c)) / (self.theta - 1.0)
        return 1.0 - _smoothstep(t)

    def phi(self, k, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.ones(x.shape[0])
        for i, ki in enumerate(k):
            out *= self.g(x[:, i] - ki)
        return out

    def cells_at(self, x):
        """Integer cells k whose phi_k can be nonzero at the point x."""
        c = self.theta / 2.0
        ranges = []
        for xi in x:
            lo = math.ceil(xi - c)
            hi = math.floor(xi + c)
            ranges.append([k for k in range(lo, hi + 1) if abs(xi - k) < c])
        return list(itertools.product(*ranges))


def build_partition(theta: float, dim: int, r_max: int = 4) -> PartitionOfUnity:
    # the plateau construction needs the ramp [1-theta/2, theta/2] to be a
    # proper subinterval of [0, 1]
    if not 1.0 < theta < 2.0:
        raise InvalidTheta("theta must lie strictly between 1 and 2")
    return PartitionOfUnity(theta=float(theta), dim=int(dim))


# -- budget allocation -----------------------------------------------------

def _double_factorial(d: int) -> float:
    return float(math.prod(range(d, 0, -2)))


@dataclass
class BudgetAllocation:
    n: int
    alpha: float
    delta: float
    lam: float
    a: float
    dim: int
    m_n: float = 0.0
    rho: float = 0.0
    cells: dict = field(default_factory=dict)  # kvec -> n_k

    def total(self) -> int:
        return sum(self.cells.values())


def allocate_budget(n: int, alpha: float, delta: float, lam: float, a: float,
                    dim: int) -> BudgetAllocation:
    """n_k = floor(rho n exp(-(a delta/alpha)|k|^lambda) + 1) inside the
    Euclidean ball |k| < m_n, zero outside; sum over cells <= n."""
    if n < 2:
        raise BudgetInfeasible("need n >= 2")
    m_n = (lam * alpha * math.log(n) / delta) ** (1.0 / lam)
    if m_n < 1.0:
        raise BudgetInfeasible(f"m_n = {m_n:.3f} < 1; raise n")
    beta = a * delta / alpha
    inv_rho = (2.0 * (2.0 * math.pi) ** ((dim - 1) / 2.0) / _double_factorial(dim)
               * sum(s ** dim * math.exp(-beta * s ** lam)
                     for s in range(1, max(1000, int(10 * m_n)))))
    rho = 1.0 / inv_rho
    kmax = int(math.floor(m_n)) + 1
    lattice = [k for k in itertools.product(range(-kmax, kmax + 1), repeat=dim)
               if math.sqrt(sum(ki * ki for ki in k)) < m_n]
    if len(lattice) > n:
        # every active cell needs at least one sample
        raise BudgetInfeasible(
            f"{len(lattice)} cells inside |k| < {m_n:.2f} but only n={n} "
            f"samples; raise n or delta")
    # the closed-form normalizer bounds the lattice sum asymptotically; shrink
    # rho until the finite-n sum actually fits the budget
    for _ in range(400):
        cells = {k: int(math.floor(
            rho * n * math.exp(-beta * sum(ki * ki for ki in k) ** (lam / 2.0))
            + 1.0)) for k in lattice}
        if sum(cells.values()) <= n:
            break
        rho *= 0.95
    else:
        raise BudgetInfeasible("budget normalization did not converge")
    return BudgetAllocation(n=n, alpha=alpha, delta=delta, lam=lam, a=a,
                            dim=dim, m_n=m_n, rho=rho, cells=cells)


def default_delta(p: float, q: float) -> float:
    """Midpoint of the admissible interval (0, 1/q - 1/p) for q < p."""
    if not 1.0 / q > 1.0 / p:
        raise ValueError("requires q < p")
    return 0.5 * (1.0 / q - 1.0 / p)


# -- hyperbolic-cross Fourier ----------------------------------------------

def _axis_level(s: int) -> int:
    return 0 if s == 0 else abs(s).bit_length()


def hyperbolic_cross_indices(dim: int, m: int) -> np.ndarray:
    """Step hyperbolic cross: frequencies s with sum_j level(s_j) <= m where
    level(s) = 0 for s = 0 and floor(log2|s|) + 1 otherwise."""
    out = []

    def rec(prefix, budget):
        if len(prefix) == dim:
            out.append(prefix)
            return
        for s in range(-(2 ** budget - 1), 2 ** budget):
            lv = _axis_level(s)
            if lv <= budget:
                rec(prefix + (s,), budget - lv)

    rec((), m)
    return np.array(sorted(out), dtype=int).reshape(-1, dim)


@dataclass
class FourierProjection:
    """Trigonometric polynomial sum_s c_s exp(2 pi i s.x) over a frequency set."""

    freqs: np.ndarray   # (R, d) int
    coeffs: np.ndarray  # (R,) complex

    @property
    def rank(self) -> int:
        return len(self.freqs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim <= 1:
            x = np.atleast_1d(x).reshape(-1, self.freqs.shape[1])
        phase = np.exp(2j * np.pi * (x @ self.freqs.T))
        return phase @ self.coeffs


def hyperbolic_cross_fourier(f, dim: int, m: int,
                             resolution: int | None = None) -> FourierProjection:
    """F_{Delta(m)} f by FFT of f on a fine tensor grid (1-periodic f)."""
    if resolution is None:
        resolution = 2 ** (m + 2)
    if resolution < 2 ** (m + 1):
        raise ResolutionTooLow(f"resolution {resolution} < {2 ** (m + 1)}")
    R = resolution
    grids = [np.arange(R) / R] * dim
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    vals = np.asarray(f(pts if dim > 1 else pts[:, 0]))
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSample("non-finite sample in Fourier analysis")
    fhat = np.fft.fftn(vals.reshape([R] * dim)) / R ** dim
    freqs = hyperbolic_cross_indices(dim, m)
    coeffs = fhat[tuple((freqs % R).T)]
    return FourierProjection(freqs=freqs, coeffs=coeffs)


# -- inner operator factories ----------------------------------------------

def spline_inner(mask: BSplineMask, dim: int):
    """Inner factory: for a budget, the periodic combination operator at the
    largest level m with |G^d(m)| <= budget.  Returns None when even m = 0
    does not fit."""

    sizes = {}

    def factory(g, budget: int):
        m = -1
        while True:
            nxt = sizes.setdefault(m + 1, len(grid_G(dim, m + 1, mask.ell)))
            if nxt > budget:
                break
            m += 1
        if m < 0:
            return None
        plan = PeriodicPlan(mask=mask, dim=dim, m=m)
        op = periodic_smolyak(plan, g)
        return op, op.sample_points()

    return factory


def fourier_inner(dim: int):
    """Inner factory for the linear variant: hyperbolic-cross Fourier at the
    largest m whose rank fits the budget; rank is the sample count."""

    sizes = {}

    def factory(g, budget: int):
        m = -1
        while True:
            nxt = sizes.setdefault(m + 1,
                                   len(hyperbolic_cross_indices(dim, m + 1)))
            if nxt > budget:
                break
            m += 1
        if m < 0:
            return None
        op = hyperbolic_cross_fourier(g, dim, m)
        return op, op.rank

    return factory


# -- assembled operators ---------------------------------------------------

@dataclass
class _Cell:
    k: tuple
    budget: int
    op: object      # callable on [0,1)^d local coordinates
    samples: object  # ndarray of local sample points, or int rank


class AssembledApproximation:
    """sum over lattice cells of inner approximations of f phi_k, each living
    on the theta-cube k + [-theta/2, theta/2]^d via u -> k + theta(u - 1/2)."""

    def __init__(self, partition: PartitionOfUnity, cells: list, real: bool):
        self.partition = partition
        self.cells = cells
        self._real = real

    def __call__(self, x):
        th = self.partition.theta
        d = self.partition.dim
        x = np.asarray(x, dtype=float)
        if d == 1 and x.ndim <= 1:
            x = np.atleast_1d(x).reshape(-1, 1)
        out = np.zeros(x.shape[0], dtype=float if self._real else complex)
        for cell in self.cells:
            u = (x - np.array(cell.k, dtype=float)) / th + 0.5
            inside = np.all((u > 0.0) & (u < 1.0), axis=1)
            if not np.any(inside):
                continue
            out[inside] += cell.op(u[inside] if d > 1 else u[inside])
        return out.real if not self._real else out

    def sample_count(self) -> int:
        tot = 0
        for cell in self.cells:
            tot += cell.samples if np.isscalar(cell.samples) else len(cell.samples)
        return tot

    def sample_points(self):
        """(points, cell index array); empty for rank-based inner operators."""
        th = self.partition.theta
        pts, tags = [], []
        for idx, cell in enumerate(self.cells):
            if np.isscalar(cell.samples):
                continue
            loc = np.atleast_2d(cell.samples)
            if loc.shape[1] != self.partition.dim:
                loc = loc.reshape(-1, self.partition.dim)
            pts.append(np.array(cell.k, dtype=float) + th * (loc - 0.5))
            tags.append(np.full(len(loc), idx))
        if not pts:
            return np.empty((0, self.partition.dim)), np.empty(0, dtype=int)
        return np.concatenate(pts), np.concatenate(tags)


def _assemble(partition, allocation, factory, f, real):
    th = partition.theta
    d = partition.dim
    cells = []
    for k, n_k in sorted(allocation.cells.items()):
        if n_k < 1:
            continue
        karr = np.array(k, dtype=float)

        def g(u, karr=karr, k=k):
            u = np.atleast_1d(np.asarray(u, dtype=float))
            if d == 1 and u.ndim == 1:
                u = u.reshape(-1, 1)
            x = karr + th * (u - 0.5)
            vals = np.asarray(f(x if d > 1 else x[:, 0]), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise NonFiniteSample(f"non-finite sample in cell {k}")
            return vals * partition.phi(k, x)

        built = factory(g, n_k)
        if built is None:
            continue
        op, samples = built
        cells.append(_Cell(k=k, budget=n_k, op=op, samples=samples))
    return AssembledApproximation(partition, cells, real=real)


def assembled_sample(partition: PartitionOfUnity, allocation: BudgetAllocation,
                     inner_factory, f) -> AssembledApproximation:
    """The assembled sampling operator; inner_factory(g, budget) -> (op, samples)."""
    return _assemble(partition, allocation, inner_factory, f, real=True)


def assembled_linear(partition: PartitionOfUnity, allocation: BudgetAllocation,
                     f, inner_factory=None) -> AssembledApproximation:
    """The assembled linear operator with hyperbolic-cross Fourier cells."""
    if inner_factory is None:
        inner_factory = fourier_inner(partition.dim)
    return _assemble(partition, allocation, inner_factory, f, real=False)
