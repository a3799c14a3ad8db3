"""Closed-loop stability, decided numerically and in closed form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Rates, StateSpace, SystemConfig, build_state_space

# configs this close to the stability boundary are not expected to agree
KNIFE_EDGE = 1e-9


class StabilityError(RuntimeError):
    """Raised when an operation needs a stable (Hurwitz) network and did not get one."""


@dataclass(frozen=True)
class StabilityReport:
    hurwitz: bool
    max_real_eigen_numeric: float
    max_real_eigen_formula: float | None = None
    closed_form_holds: bool | None = None
    margin: float | None = None

    def to_dict(self) -> dict:
        return {
            "hurwitz": self.hurwitz,
            "max_real_eigen_numeric": self.max_real_eigen_numeric,
            "max_real_eigen_formula": self.max_real_eigen_formula,
            "closed_form_holds": self.closed_form_holds,
            "margin": self.margin,
        }


def hurwitz_check(ss: StateSpace) -> StabilityReport:
    """Eigenvalue test on the drift matrix; only the numeric fields are filled in."""
    eig = np.linalg.eigvals(ss.a_mat)
    if not np.all(np.isfinite(eig)):
        raise np.linalg.LinAlgError("eigenvalue computation returned non-finite values")
    max_real = float(np.max(eig.real))
    return StabilityReport(hurwitz=max_real < 0.0, max_real_eigen_numeric=max_real)


def _abs_cos_half(delta_theta: float) -> float:
    return abs(math.cos(delta_theta / 2.0))


def max_real_eigen_formula(rates: Rates | SystemConfig, delta_theta: float | None = None) -> float:
    """Largest real part of the drift eigenvalues, from the analytic spectrum.

    With a :class:`SystemConfig` the phase difference is taken from it;
    with bare :class:`Rates` it must be passed (default 0).
    """
    if isinstance(rates, SystemConfig):
        if delta_theta is None:
            delta_theta = rates.delta_theta
        rates = rates.rates
    c = _abs_cos_half(delta_theta or 0.0)
    eps, gam, kap, alpha = rates.epsilon, rates.gamma, rates.kappa, rates.alpha
    inner = eps**4 / 4 + alpha**2 * eps**2 * gam**2 + alpha * eps**3 * gam * c
    return -(gam + kap) / 2 + 0.5 * math.sqrt(eps**2 / 2 + alpha * eps * gam * c + math.sqrt(inner))


def stability_threshold(rates: Rates | SystemConfig, delta_theta: float | None = None) -> float:
    """Right-hand side of the stability inequality ``x*y < threshold``.

    Written in rates: ``x*y = epsilon/gamma`` and ``y*kappa/gamma_r = kappa/gamma``.
    """
    if isinstance(rates, SystemConfig):
        if delta_theta is None:
            delta_theta = rates.delta_theta
        rates = rates.rates
    s = 1.0 + rates.kappa / rates.gamma
    alpha = rates.alpha
    return s**2 / (math.sqrt(s**2 + alpha**2) + alpha * _abs_cos_half(delta_theta or 0.0))


def closed_form_stable(rates: Rates | SystemConfig, delta_theta: float | None = None) -> tuple[bool, float]:
    """Analytic verdict and margin ``threshold - x*y``; equality counts as unstable."""
    if isinstance(rates, SystemConfig):
        if delta_theta is None:
            delta_theta = rates.delta_theta
        rates = rates.rates
    margin = stability_threshold(rates, delta_theta) - rates.epsilon / rates.gamma
    return margin > 0.0, margin


def stability_report(config: SystemConfig, ss: StateSpace | None = None) -> StabilityReport:
    numeric = hurwitz_check(ss if ss is not None else build_state_space(config))
    holds, margin = closed_form_stable(config)
    return StabilityReport(
        hurwitz=numeric.hurwitz,
        max_real_eigen_numeric=numeric.max_real_eigen_numeric,
        max_real_eigen_formula=max_real_eigen_formula(config),
        closed_form_holds=holds,
        margin=margin,
    )


def require_stable(rates: Rates, delta_theta: float = 0.0) -> None:
    holds, margin = closed_form_stable(rates, delta_theta)
    if not holds:
        raise StabilityError(f"network is not stable (margin {margin:.3g})")
