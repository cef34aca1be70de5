"""Freud-type weights on R^d and the rate exponents attached to them.

The generating univariate weight is

    w(x) = |x|^tau * (1+|x|)^eta * exp(-a*|x|^lam + b),   lam > 1, a > 0,

tensorized over coordinates in dimension d.  The companion weight

    v(x) = |x|^mu * exp(-2a*|x|^lam + 2b),   mu >= -1,

is the orthogonality density used by the interpolation node construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

__all__ = [
    "INF",
    "WeightSpec",
    "RateExponents",
    "inv_index",
    "index_le",
    "rate_exponents",
    "check_condition_C",
]


class _SupIndex:
    """Marker for the sup-norm index (p or q equal to infinity).

    A dedicated singleton, deliberately not ``float('inf')``: the 1/inf := 0
    convention has to be branch-explicit in the exponent formulas.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"


INF = _SupIndex()


def inv_index(p):
    """1/p with the convention 1/INF = 0."""
    if p is INF:
        return 0.0
    p = float(p)
    if p < 1:
        raise ValueError(f"norm index must lie in [1, inf], got {p}")
    return 1.0 / p


def index_le(p, q) -> bool:
    """p <= q with INF treated as the largest index."""
    if p is INF:
        return q is INF
    if q is INF:
        return True
    return float(p) <= float(q)


@dataclass(frozen=True)
class WeightSpec:
    """Parameter bundle for the weight pair (w, v)."""

    lam: float
    a: float
    b: float = 0.0
    tau: float = 0.0
    eta: float = 0.0
    mu: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if not self.lam > 1:
            raise ValueError(f"lam must exceed 1, got {self.lam}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.tau < 0 or self.eta < 0:
            raise ValueError("tau and eta must be nonnegative")
        if self.mu < -1:
            raise ValueError(f"mu must be >= -1, got {self.mu}")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")

    # -- common instances -------------------------------------------------

    @classmethod
    def hermite(cls, dim: int = 1) -> "WeightSpec":
        """lam=2, a=1/2, b=0: the companion weight v is exp(-x^2)."""
        return cls(lam=2.0, a=0.5, dim=dim)

    @classmethod
    def quartic(cls, dim: int = 1) -> "WeightSpec":
        """lam=4, a=1, b=0."""
        return cls(lam=4.0, a=1.0, dim=dim)

    def with_dim(self, dim: int) -> "WeightSpec":
        return replace(self, dim=dim)

    # -- evaluation --------------------------------------------------------

    def log_weight_1d(self, x):
        """log w(x) per coordinate; -inf at 0 when tau > 0."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            out = -self.a * ax**self.lam + self.b
            if self.tau:
                out = out + self.tau * np.log(ax)
            if self.eta:
                out = out + self.eta * np.log1p(ax)
        return out

    def weight_1d(self, x):
        """w(x) for scalar/array x (single coordinate)."""
        return np.exp(self.log_weight_1d(x))

    def weight(self, x):
        """Tensor-product weight; x has shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected last axis of size {self.dim}")
        return np.exp(np.sum(self.log_weight_1d(x), axis=-1))

    def companion_1d(self, x):
        """v(x) = |x|^mu exp(-2a|x|^lam + 2b)."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            out = -2 * self.a * ax**self.lam + 2 * self.b
            if self.mu:
                out = out + self.mu * np.log(ax)
        return np.exp(out)

    # -- (de)serialization -------------------------------------------------

    def to_config(self) -> dict:
        return {
            "lambda": self.lam,
            "tau": self.tau,
            "eta": self.eta,
            "a": self.a,
            "b": self.b,
            "mu": self.mu,
            "dim": self.dim,
        }

    @classmethod
    def from_config(cls, block: dict) -> "WeightSpec":
        return cls(
            lam=float(block["lambda"]),
            a=float(block["a"]),
            b=float(block.get("b", 0.0)),
            tau=float(block.get("tau", 0.0)),
            eta=float(block.get("eta", 0.0)),
            mu=float(block.get("mu", 0.0)),
            dim=int(block.get("dim", 1)),
        )


@dataclass(frozen=True)
class RateExponents:
    """The exponents r_lambda, delta_{lam,p,q} and r_{lam,p,q}."""

    p: object
    q: object
    r: int
    r_lambda: float
    delta: float
    r_lpq: float


def rate_exponents(lam: float, p, q, r: int) -> RateExponents:
    """Compute r_lambda = (1-1/lam)r and the two-branch delta correction.

    delta = (1-1/lam)(1/p - 1/q) when p <= q, else (1/lam)(1/q - 1/p).
    """
    if r < 1:
        raise ValueError("r must be a positive integer")
    ip, iq = inv_index(p), inv_index(q)
    r_lambda = (1.0 - 1.0 / lam) * r
    if index_le(p, q):
        delta = (1.0 - 1.0 / lam) * (ip - iq)
    else:
        delta = (1.0 / lam) * (iq - ip)
    return RateExponents(p=p, q=q, r=r, r_lambda=r_lambda, delta=delta,
                         r_lpq=r_lambda - delta)


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float) and x == int(x):
        return Fraction(int(x))
    return None


def check_condition_C(spec: WeightSpec, p) -> tuple[bool, str]:
    """Both clauses of Condition C for the pair (w, v) at norm index p.

    (i)  tau + 1/p is not an integer;
    (ii) -1/p < tau - mu/2 < 1 - 1/p - eta.

    Exact rational arithmetic is used for clause (i) whenever tau and p are
    exactly representable rationals; otherwise a 1e-12 tolerance guards the
    measure-zero exclusion against float noise.
    """
    if p is INF:
        raise ValueError("Condition C is stated for 1 < p < infinity")
    ftau, fp = _as_fraction(spec.tau), _as_fraction(p)
    if ftau is not None and fp is not None and fp != 0:
        s = ftau + Fraction(1) / fp
        clause_i = s.denominator != 1
    else:
        s = spec.tau + 1.0 / float(p)
        clause_i = abs(s - round(s)) > 1e-12
    if not clause_i:
        return False, f"clause (i) violated: tau + 1/p = {float(s)} is an integer"
    ip = 1.0 / float(p)
    mid = spec.tau - spec.mu / 2.0
    lo, hi = -ip, 1.0 - ip - spec.eta
    if not (lo < mid < hi):
        return False, (f"clause (ii) violated: need {lo} < tau - mu/2 = {mid}"
                       f" < {hi}")
    return True, "ok"
