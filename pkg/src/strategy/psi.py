"""The pointwise objectives Psi_1, Psi_2 and their first-order conditions.

With gb = gamma B(t, T) and M_k(c) = E[Z^k e^{cZ}]:

    Psi_1(u)    = gb (q1 - c1) + lam1 (M_0(gb u) - 1)
    Psi_2(u, w) = gb (q2 - c2 + gb sigma^2 w^2 / 2 - w (mu - r))
                  + lam2 (M_0(gb (u + w k)) - 1)

for the multiplicative jump K(t, z) = k(t) z (k = 0 without shock). Then
dPsi_2/du = gb H and dPsi_2/dw = gb H_tilde with

    H       = dq2/du + lam2 M_1(gb (u + w k))
    H_tilde = gb sigma^2 w - (mu - r) + lam2 k M_1(gb (u + w k)).

All functions broadcast over numpy arrays of u and w.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from src.errors import OutOfRangeError
from src.model.claims import tilted_moment
from src.model.market import ModelConfig, risk_scale

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class MarketTerms:
    """Time-dependent market quantities entering Psi_2."""

    gb: float
    sigma2: float
    excess: float
    k: float


def market_terms(cfg: ModelConfig, t: float) -> MarketTerms:
    market = cfg.market
    return MarketTerms(
        gb=float(risk_scale(cfg, t)),
        sigma2=float(market.sigma(t)) ** 2,
        excess=float(market.mu(t)) - float(market.r(t)),
        k=float(market.jump.slope(t)),
    )


def _check_retention(u: ArrayLike, name: str) -> None:
    if np.any(np.asarray(u) < 0.0) or np.any(np.asarray(u) > 1.0):
        raise OutOfRangeError(f"{name} must lie in [0, 1], got {u}")


def _scalar(x: ArrayLike) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


def psi1(cfg: ModelConfig, t: float, y1: float, u1: ArrayLike, extended: bool = False) -> ArrayLike:
    """Psi_1(t, y1, u1); ``extended`` admits retentions outside [0, 1]."""
    if not extended:
        _check_retention(u1, "u1")
    line = cfg.line1
    gb = float(risk_scale(cfg, t))
    lam = line.lam(t, y1)
    value = gb * (line.q(t, y1, u1) - line.c(t, y1)) + lam * (
        tilted_moment(line.claims, gb * np.asarray(u1, dtype=float), 0) - 1.0
    )
    return _scalar(value)


def first_line_foc(cfg: ModelConfig, t: float, y1: float, u1: float) -> float:
    """dq1/du + lam1 M_1(gb u); dPsi_1/du = gb times this."""
    line = cfg.line1
    gb = float(risk_scale(cfg, t))
    return float(line.dq(t, y1, u1) + line.lam(t, y1) * tilted_moment(line.claims, gb * u1, 1))


def first_line_foc_du(cfg: ModelConfig, t: float, y1: float, u1: float) -> float:
    line = cfg.line1
    gb = float(risk_scale(cfg, t))
    return float(
        line.d2q(t, y1, u1) + line.lam(t, y1) * gb * tilted_moment(line.claims, gb * u1, 2)
    )


def psi2(
    cfg: ModelConfig, t: float, y2: float, u2: ArrayLike, w: ArrayLike, extended: bool = False
) -> ArrayLike:
    """Psi_2(t, y2, u2, w), including the common-shock jump integral.

    Raises:
        OutOfRangeError: If u2 is outside [0, 1] and ``extended`` is False.
        DivergentMomentError: If the jump integral is infinite.
    """
    if not extended:
        _check_retention(u2, "u2")
    line = cfg.line2
    m = market_terms(cfg, t)
    u = np.asarray(u2, dtype=float)
    ww = np.asarray(w, dtype=float)
    lam = line.lam(t, y2)
    # diffusion part, then the jump integral lam (E[e^{gb (u + w k) Z}] - 1)
    value = m.gb * (
        line.q(t, y2, u) - line.c(t, y2) + 0.5 * m.gb * m.sigma2 * ww**2 - ww * m.excess
    ) + lam * (tilted_moment(line.claims, m.gb * (u + ww * m.k), 0) - 1.0)
    return _scalar(value)


def H(cfg: ModelConfig, t: float, y2: float, u2: ArrayLike, w: ArrayLike) -> ArrayLike:
    """u-first-order condition of Psi_2 (premium extended outside [0, 1])."""
    line = cfg.line2
    m = market_terms(cfg, t)
    u = np.asarray(u2, dtype=float)
    tilt = m.gb * (u + np.asarray(w, dtype=float) * m.k)
    return _scalar(line.dq(t, y2, u) + line.lam(t, y2) * tilted_moment(line.claims, tilt, 1))


def H_tilde(cfg: ModelConfig, t: float, y2: float, u2: ArrayLike, w: ArrayLike) -> ArrayLike:
    """w-first-order condition of Psi_2."""
    line = cfg.line2
    m = market_terms(cfg, t)
    ww = np.asarray(w, dtype=float)
    tilt = m.gb * (np.asarray(u2, dtype=float) + ww * m.k)
    # k = 0 drops the shock term without evaluating the moment
    shock = line.lam(t, y2) * m.k * tilted_moment(line.claims, tilt, 1) if m.k else 0.0 * ww
    return _scalar(m.gb * m.sigma2 * ww - m.excess + shock)


@dataclass(frozen=True)
class FocJacobian:
    """Partial derivatives of (H, H_tilde) in (u, w)."""

    h_u: float
    h_w: float
    ht_u: float
    ht_w: float


def foc_jacobian(cfg: ModelConfig, t: float, y2: float, u2: float, w: float) -> FocJacobian:
    line = cfg.line2
    m = market_terms(cfg, t)
    lam = float(line.lam(t, y2))
    m2 = float(tilted_moment(line.claims, m.gb * (u2 + w * m.k), 2))
    curvature = lam * m.gb * m2
    # symmetric: h_w = ht_u
    return FocJacobian(
        h_u=float(line.d2q(t, y2, u2)) + curvature,
        h_w=curvature * m.k,
        ht_u=curvature * m.k,
        ht_w=m.gb * m.sigma2 + curvature * m.k**2,
    )


def psi2_hessian(cfg: ModelConfig, t: float, y2: float, u2: float, w: float) -> np.ndarray:
    """Exact 2x2 Hessian of Psi_2 in (u, w)."""
    gb = float(risk_scale(cfg, t))
    jac = foc_jacobian(cfg, t, y2, u2, w)
    return gb * np.array([[jac.h_u, jac.h_w], [jac.ht_u, jac.ht_w]])
