"""Smolyak tensorization of the 1-D interpolation ladder, the step
hyperbolic-cross sample grid H(m), and the fooling-function generator used
as a lower-bound witness."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import orthopoly as op
from .interp1d import DyadicFamily, fundamental_matrix
from .weights import INF, WeightSpec, inv_index

__all__ = [
    "SparsePlan",
    "SmolyakInterpolant",
    "FoolingFunction",
    "CellSearchFailure",
    "combination_coefficients",
    "build_plan",
    "smolyak_apply",
    "grid_points",
    "fooling_function",
]


class CellSearchFailure(RuntimeError):
    pass


def combination_coefficients(d: int, m: int) -> dict[tuple, int]:
    """Net coefficients of the tensor operators in
    sum_{|k|_1 <= m} prod_i (S_{k_i} - S_{k_i - 1}), with S_{-1} := 0
    (so a level-0 factor contributes S_0 alone)."""
    combo: dict[tuple, int] = {}
    for k in itertools.product(range(m + 1), repeat=d):
        if sum(k) > m:
            continue
        for bits in itertools.product((0, 1), repeat=d):
            lev = []
            dead = False
            for ki, b in zip(k, bits):
                if b and ki == 0:
                    dead = True    # the lowered factor is the zero operator
                    break
                lev.append(ki - b)
            if dead:
                continue
            key = tuple(lev)
            combo[key] = combo.get(key, 0) + (-1) ** sum(bits)
    return {k: v for k, v in combo.items() if v != 0}


@dataclass
class SparsePlan:
    """Combination-technique plan for P_m in dimension d.

    The same 1-D dyadic family backs every axis (isotropic weight)."""

    family: DyadicFamily
    dim: int
    m: int
    combo: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.combo:
            self.combo = combination_coefficients(self.dim, self.m)

    def rules_for(self, levels):
        return [self.family.rule(l) for l in levels]


def build_plan(family: DyadicFamily, dim: int, m: int) -> SparsePlan:
    return SparsePlan(family=family, dim=dim, m=m)


def _tensor_values(f, rules):
    grids = [r.nodes for r in rules]
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    vals = np.asarray(f(pts), dtype=float)
    return vals.reshape([g.size for g in grids])


_LETTERS = "abcdefgh"


class SmolyakInterpolant:
    """P_m f evaluated through the combination technique."""

    def __init__(self, plan: SparsePlan, f):
        self.plan = plan
        self.terms = []
        for levels, coeff in sorted(plan.combo.items()):
            rules = plan.rules_for(levels)
            vals = _tensor_values(f, rules)
            self.terms.append((levels, coeff, rules, vals))

    def _eval(self, x, log2_weight=None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        d = self.plan.dim
        spec_idx = ",".join(f"n{_LETTERS[i]}" for i in range(d))
        spec_str = f"{spec_idx},{_LETTERS[:d]}->n"
        for levels, coeff, rules, vals in self.terms:
            mats = [fundamental_matrix(rules[i], x[:, i],
                                       log2_weight=log2_weight)
                    for i in range(d)]
            out += coeff * np.einsum(spec_str, *mats, vals)
        return out

    def __call__(self, x):
        return self._eval(x)

    def weighted(self, x, log2_weight_1d):
        """w(x) * (P_m f)(x) with the per-axis weight supplied in log2 form
        (tensor weights factor across axes)."""
        return self._eval(x, log2_weight=log2_weight_1d)


def smolyak_apply(plan: SparsePlan, f) -> SmolyakInterpolant:
    return SmolyakInterpolant(plan, f)


def grid_points(plan: SparsePlan):
    """Deduplicated sample set H(m) with the smallest |k|_1 that uses each
    point.  Dedup relies on exact node identity (shared rule arrays)."""
    seen: dict[tuple, int] = {}
    for levels in sorted(plan.combo, key=lambda lv: (sum(lv), lv)):
        rules = plan.rules_for(levels)
        mesh = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=-1)
        l1 = sum(levels)
        for row in map(tuple, pts):
            if row not in seen:
                seen[row] = l1
    pts = np.array(list(seen.keys()), dtype=float)
    lv = np.array(list(seen.values()), dtype=int)
    return pts, lv


# -- fooling function ------------------------------------------------------

def _gamma_set(d: int, M: int):
    """Gamma_d(M) = {s in N^d : prod s_i <= 2M, s_i >= ceil(M^(1/d))}."""
    lo = math.ceil(M ** (1.0 / d) - 1e-9)
    cap = 2 * M

    def rec(prefix, prod):
        if len(prefix) == d:
            yield tuple(prefix)
            return
        s = lo
        while prod * s <= cap:
            yield from rec(prefix + [s], prod * s)
            s += 1

    yield from rec([], 1)


@dataclass
class FoolingFunction:
    """Smooth h-bar supported on a node-free cell, vanishing on all nodes."""

    spec: WeightSpec
    r: int
    p: object
    M_n: int
    delta: float
    cell: tuple          # the multi-index s of the chosen cell
    scale: float

    def _bump(self, t):
        out = np.zeros_like(t)
        inside = (t > 0) & (t < 1)
        ti = t[inside]
        out[inside] = np.exp(-1.0 / (ti * (1.0 - ti)))
        return out

    def g(self, x):
        """The compactly supported numerator (before dividing by w)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.ones(x.shape[0])
        for i, s in enumerate(self.cell):
            t = (x[:, i] - self.delta * (s - 1)) / self.delta
            out *= self._bump(t)
        return out

    def __call__(self, x):
        """h-bar(x) = scale * g(x) / w(x); evaluated as 0 wherever g
        vanishes, so the weight inverse never overflows."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        gv = self.scale * self.g(x)
        nz = gv != 0.0
        out = np.zeros(x.shape[0])
        if np.any(nz):
            out[nz] = gv[nz] / self.spec.weight(x[nz])
        return out

    def weighted_norm(self, q) -> float:
        """||h-bar||_{L_q,w}: exact product reduction, since h-bar * w is the
        scaled tensor bump."""
        if q is INF:
            peak = float(self._bump(np.array([0.5]))[0])
            return self.scale * peak ** len(self.cell)
        q = float(q)
        xg, wg = leggauss(120)
        t = (xg + 1) / 2
        phi_q = float(np.sum(self._bump(t) ** q * wg / 2))
        per_axis = self.delta * phi_q
        return self.scale * (per_axis ** len(self.cell)) ** (1.0 / q)


def fooling_function(spec: WeightSpec, nodes, r: int, p) -> FoolingFunction:
    """Build h-bar for an arbitrary finite node set: pick the smallest M with
    |Gamma_d(M)| > n, lay the cell mesh of pitch delta = M^((1/lam-1)/d),
    and drop a normalized bump into the first node-free cell."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    n, d = nodes.shape
    if d != spec.dim:
        raise ValueError("node dimension does not match spec")
    M = max(2, n // (2 ** (d - 1)))
    while sum(1 for _ in _gamma_set(d, M)) < n + 1:
        M += max(1, M // 8)
    delta = M ** ((1.0 / spec.lam - 1.0) / d)
    cell = None
    for s in sorted(_gamma_set(d, M)):
        lo = delta * (np.array(s) - 1)
        hi = delta * np.array(s)
        inside = np.all((nodes > lo) & (nodes < hi), axis=1)
        if not inside.any():
            cell = s
            break
    if cell is None:
        raise CellSearchFailure(
            f"no empty cell among {sum(1 for _ in _gamma_set(d, M))} cells "
            f"for {n} nodes")
    scale = M ** (-(1.0 - 1.0 / spec.lam) * (r - inv_index(p)))
    return FoolingFunction(spec=spec, r=r, p=p, M_n=M, delta=delta,
                           cell=cell, scale=scale)
