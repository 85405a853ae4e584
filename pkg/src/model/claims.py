"""Claim-size distributions and their exponentially tilted moments."""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special

from src.errors import DivergentMomentError, ModelError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

EXPONENTIAL = "exponential"
TRUNCATED_EXPONENTIAL = "truncated_exponential"
DISCRETE = "discrete"
KINDS = (EXPONENTIAL, TRUNCATED_EXPONENTIAL, DISCRETE)

# exp() overflows a double above this argument
MAX_EXP_ARG = 700.0
QUAD_EPSREL = 1e-10
# below |s| * D of this size the lower incomplete gamma ratio is replaced by a series
SERIES_THRESHOLD = 1e-6


@dataclass(frozen=True)
class ClaimDistribution:
    """Law of a single claim size Z > 0.

    ``truncated_exponential`` has density a e^{-az} / (1 - e^{-aD}) on [0, D].
    """

    kind: str
    rate: float = 0.0
    cap: float = math.inf
    atoms: Tuple[float, ...] = ()
    weights: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ModelError(f"Unknown claim distribution kind '{self.kind}'")
        if self.kind in (EXPONENTIAL, TRUNCATED_EXPONENTIAL):
            if not (math.isfinite(self.rate) and self.rate > 0.0):
                raise ModelError(f"Claim rate must be positive and finite, got {self.rate}")
        if self.kind == TRUNCATED_EXPONENTIAL:
            if not (math.isfinite(self.cap) and self.cap > 0.0):
                raise ModelError(f"Truncation cap must be positive and finite, got {self.cap}")
        if self.kind == DISCRETE:
            atoms = np.asarray(self.atoms, dtype=float)
            weights = np.asarray(self.weights, dtype=float)
            if atoms.size == 0 or atoms.size != weights.size:
                raise ModelError("Discrete claims need one weight per atom")
            if not np.all(np.isfinite(atoms)) or np.any(atoms <= 0.0):
                raise ModelError(f"Claim atoms must be positive and finite: {self.atoms}")
            if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > 1e-12:
                raise ModelError(f"Claim weights must be non-negative and sum to 1: {self.weights}")

    @classmethod
    def exponential(cls, rate: float) -> "ClaimDistribution":
        return cls(EXPONENTIAL, rate=float(rate))

    @classmethod
    def truncated_exponential(cls, rate: float, cap: float) -> "ClaimDistribution":
        return cls(TRUNCATED_EXPONENTIAL, rate=float(rate), cap=float(cap))

    @classmethod
    def discrete(cls, atoms: Sequence[float], weights: Sequence[float]) -> "ClaimDistribution":
        return cls(
            DISCRETE,
            atoms=tuple(float(a) for a in atoms),
            weights=tuple(float(w) for w in weights),
        )

    @property
    def label(self) -> str:
        if self.kind == EXPONENTIAL:
            return f"exponential(rate={self.rate:g})"
        if self.kind == TRUNCATED_EXPONENTIAL:
            return f"truncated_exponential(rate={self.rate:g}, cap={self.cap:g})"
        return f"discrete({len(self.atoms)} atoms)"

    @property
    def support_bound(self) -> float:
        """Upper end D of the support (infinite for the exponential law)."""
        if self.kind == EXPONENTIAL:
            return math.inf
        if self.kind == TRUNCATED_EXPONENTIAL:
            return self.cap
        return max(self.atoms)

    @property
    def tilt_limit(self) -> float:
        """Supremum of the tilts c with finite E[e^{cZ}]."""
        return self.rate if self.kind == EXPONENTIAL else math.inf

    @cached_property
    def mean(self) -> float:
        return float(tilted_moment(self, 0.0, 1))

    @cached_property
    def second_moment(self) -> float:
        return float(tilted_moment(self, 0.0, 2))

    def quantile(self, p: float) -> float:
        if self.kind == EXPONENTIAL:
            return -math.log1p(-p) / self.rate
        if self.kind == TRUNCATED_EXPONENTIAL:
            return -math.log1p(-p * -math.expm1(-self.rate * self.cap)) / self.rate
        cumulative = np.cumsum(self.weights)
        return float(np.asarray(self.atoms)[min(np.searchsorted(cumulative, p), len(self.atoms) - 1)])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` independent claim sizes."""
        if self.kind == EXPONENTIAL:
            return rng.exponential(1.0 / self.rate, size)
        if self.kind == TRUNCATED_EXPONENTIAL:
            u = rng.random(size)
            return -np.log1p(-u * -math.expm1(-self.rate * self.cap)) / self.rate
        return rng.choice(np.asarray(self.atoms), size=size, p=np.asarray(self.weights))

    def to_dict(self) -> dict:
        if self.kind == EXPONENTIAL:
            return {"kind": self.kind, "rate": self.rate}
        if self.kind == TRUNCATED_EXPONENTIAL:
            return {"kind": self.kind, "rate": self.rate, "cap": self.cap}
        return {"kind": self.kind, "atoms": list(self.atoms), "weights": list(self.weights)}


def _exponential_moment(dist: ClaimDistribution, c: np.ndarray, order: int) -> np.ndarray:
    if np.any(c >= dist.rate):
        worst = float(np.max(c))
        logger.error(f"Tilt {worst} reaches the exponential rate {dist.rate}")
        raise DivergentMomentError(dist.label, worst, order, "tilt >= rate")
    a = dist.rate
    return a * math.factorial(order) / (a - c) ** (order + 1)


def _discrete_moment(dist: ClaimDistribution, c: np.ndarray, order: int) -> np.ndarray:
    atoms = np.asarray(dist.atoms)
    weights = np.asarray(dist.weights)
    exponents = np.multiply.outer(c, atoms)
    if np.any(exponents > MAX_EXP_ARG):
        worst = float(np.max(c))
        logger.error(f"Tilt {worst} overflows discrete moment")
        raise DivergentMomentError(dist.label, worst, order, "exp overflow")
    return np.sum(weights * atoms**order * np.exp(exponents), axis=-1)


def _truncated_integral(s: float, cap: float, order: int) -> float:
    """Integral of z^order e^{-s z} over [0, cap]."""
    x = s * cap
    if abs(x) < SERIES_THRESHOLD:
        k = order
        return cap ** (k + 1) * (
            1.0 / (k + 1) - x / (k + 2) + x * x / (2.0 * (k + 3)) - x**3 / (6.0 * (k + 4))
        )
    if s > 0.0:
        return (
            special.gamma(order + 1)
            * special.gammainc(order + 1, x)
            / s ** (order + 1)
        )
    # Growing integrand: substitute v = cap - z so the weight decays.
    b = -s
    value, _ = integrate.quad(
        lambda v: (cap - v) ** order * math.exp(-b * v),
        0.0,
        cap,
        epsabs=0.0,
        epsrel=QUAD_EPSREL,
        limit=200,
    )
    return math.exp(b * cap) * value


def _truncated_moment(dist: ClaimDistribution, c: np.ndarray, order: int) -> np.ndarray:
    a, cap = dist.rate, dist.cap
    if np.any((c - a) * cap > MAX_EXP_ARG):
        worst = float(np.max(c))
        logger.error(f"Tilt {worst} overflows truncated exponential moment")
        raise DivergentMomentError(dist.label, worst, order, "exp overflow")
    norm = a / -math.expm1(-a * cap)
    flat = np.asarray(c, dtype=float).ravel()
    out = np.empty_like(flat)
    positive = (a - flat) * cap >= SERIES_THRESHOLD
    if np.any(positive):
        s = a - flat[positive]
        out[positive] = (
            special.gamma(order + 1)
            * special.gammainc(order + 1, s * cap)
            / s ** (order + 1)
        )
    for i in np.flatnonzero(~positive):
        out[i] = _truncated_integral(a - flat[i], cap, order)
    return norm * out.reshape(np.shape(c))


def tilted_moment(dist: ClaimDistribution, c: ArrayLike, order: int) -> ArrayLike:
    """E[Z^order e^{cZ}] for order in {0, 1, 2}.

    Closed forms are used for the exponential and discrete laws and for the
    truncated exponential with c < rate; the remaining truncated case uses
    adaptive quadrature with relative tolerance 1e-10.

    Args:
        dist: Claim distribution.
        c: Tilt, scalar or array.
        order: Power of Z.

    Returns:
        The moment, with the shape of ``c``.

    Raises:
        DivergentMomentError: If the moment is infinite or overflows.
        ValueError: If ``order`` is not 0, 1 or 2.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"Moment order must be 0, 1 or 2, got {order}")
    cc = np.asarray(c, dtype=float)
    if dist.kind == EXPONENTIAL:
        out = _exponential_moment(dist, cc, order)
    elif dist.kind == DISCRETE:
        out = _discrete_moment(dist, cc, order)
    else:
        out = _truncated_moment(dist, cc, order)
    if np.ndim(c) == 0:
        return float(out)
    return np.asarray(out)


def tilted_moment_or_inf(dist: ClaimDistribution, c: float, order: int) -> float:
    """Scalar tilted moment with divergence mapped to +inf (for bracketing only)."""
    try:
        return float(tilted_moment(dist, c, order))
    except DivergentMomentError:
        return math.inf
