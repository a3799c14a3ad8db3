"""Closed-form zero-frequency spectra and the optimal output compensation.

Everything here is expressed through the phase coordinates

    m = (theta1 - theta2) / 2,   n = (theta1 + theta2) / 2,   phi = phi1 + phi2

and evaluates to ``V+ = V-`` at omega = 0.  Polynomial coefficients are
evaluated on rates divided by gamma; the spectra are ratios of equal-degree
polynomials and do not change under that rescaling.

All spectrum functions broadcast over numpy arrays of m, n and phi.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .model import Rates, wrap_angle

# |cos m| at or below this picks the m = +-pi/2 branch
ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class LosslessCoeffs:
    b1: float
    b2: float
    b3: float
    b4: float


@dataclass(frozen=True)
class LossyCoeffs:
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    d1: float
    d2: float
    d3: float
    d4: float
    # pieces of d5 / d6, which depend on m
    _d56_base: float
    _d56_cos: float

    def d5(self, m: ArrayLike) -> np.ndarray | float:
        return (self._d56_base + self._d56_cos * np.cos(m)) ** 2

    def d6(self, m: ArrayLike) -> np.ndarray | float:
        return (self._d56_base - self._d56_cos * np.cos(m)) ** 2


def lossless_coeffs(epsilon: float, gamma: float) -> LosslessCoeffs:
    """b1..b4 evaluated on the rates as given (no rescaling)."""
    e, g = epsilon, gamma
    b1 = e**8 + 12 * e**6 * g**2 - 10 * e**4 * g**4 + 12 * e**2 * g**6 + g**8
    b2 = 4 * e * g * (e**2 - g**2) * (e**2 + g**2) ** 2
    b3 = 8 * e**2 * g**2 * (e**2 - g**2) ** 2
    b4 = e**8 - 4 * e**6 * g**2 + 22 * e**4 * g**4 - 4 * e**2 * g**6 + g**8
    return LosslessCoeffs(b1, b2, b3, b4)


def lossy_coeffs(epsilon: float, gamma: float, kappa: float, alpha: float) -> LossyCoeffs:
    """c1..c5 and the auxiliary d1..d4 (plus d5(m), d6(m)) on the rates as given."""
    e, g, k, a = epsilon, gamma, kappa, alpha
    bb = 1.0 - a * a  # beta^2
    c1 = (
        4 * a**4 * e**2 * g**2 * (k**4 + 8 * k * e**2 * g + (e**2 - g**2) ** 2 - 2 * k**2 * (e**2 + g**2))
        + a**2 * (-k**2 + e**2 + g**2) ** 2 * (
            k**4 + 4 * k**3 * g - 2 * k**2 * (e**2 - 3 * g**2) + 4 * k * g * (e**2 + g**2)
            + e**4 + 2 * (1 + 2 * bb) * e**2 * g**2 + g**4
        )
        + (k**2 - e**2 + 2 * k * g + g**2) ** 2 * (
            4 * g * (k + g) * (k**2 + e**2 + k * g) + bb * (-k**2 + e**2 + g**2) ** 2
        )
    )
    c2 = 4 * a * e * g * (-k**2 + e**2 + g**2) * (
        -k**4 - 4 * k**3 * g - 6 * k**2 * g**2 + 4 * a**2 * k * e**2 * g + e**4 - 4 * k * g**3 - g**4
    )
    c3 = 8 * a**2 * e**2 * g**2 * (-k + e - g) * (k + e + g) * (3 * k**2 + 2 * k * g + e**2 - g**2)
    c4 = (
        k**8 + 8 * k**7 * g - 4 * k**6 * (e**2 - 7 * g**2) - 8 * k**5 * (3 * e**2 * g - 7 * g**3)
        + k**4 * (6 * e**4 - 60 * e**2 * g**2 + 70 * g**4)
        + 8 * k**3 * (3 * e**4 * g - 10 * e**2 * g**3 + 7 * g**5)
        - 4 * k**2 * (e**2 - 7 * g**2) * (e**2 - g**2) ** 2
        + 8 * k * g * (-e**2 + g**2) ** 3
        + e**8 - 4 * e**6 * g**2 + 2 * (3 + 8 * a**4) * e**4 * g**4 - 4 * e**2 * g**6 + g**8
    )
    c5 = 8 * a**2 * e**2 * g**2 * (k**2 + 2 * k * g - e**2 + g**2) ** 2

    d1 = e**2 + g**2 - k**2
    d2 = -(g**4 - e**4) - 4 * k * g * (g**2 - a**2 * e**2) - 6 * k**2 * g**2 - 4 * k**3 * g - k**4
    d3 = (
        (k**2 + g**2 - e**2) ** 2 + 4 * k**2 * g**2 + 4 * a**2 * e**2 * g**2
        + 4 * k**3 * g + 4 * k * g * (g**2 - e**2)
    )
    d4 = 16 * a * e * g * d1 * d2
    base = (
        k**4 + e**4 + 4 * k**3 * g - 2 * e**2 * g**2 + 4 * a**2 * e**2 * g**2 + g**4
        - 2 * k**2 * (e**2 - 3 * g**2) + k * (-4 * e**2 * g + 4 * g**3)
    )
    cos_part = 4 * a * e * g * (k**2 - e**2 + 2 * k * g + g**2)
    return LossyCoeffs(c1, c2, c3, c4, c5, d1, d2, d3, d4, base, cos_part)


def _coeffs(rates: Rates) -> tuple[float, float, float, float, float]:
    """(num0, num_cos, num_cos2, den0, den_cos2) of the generic spectrum ratio."""
    r = rates.scaled()
    if rates.lossless:
        b = lossless_coeffs(r.epsilon, r.gamma)
        return b.b1, b.b2, b.b3, b.b4, b.b3
    c = lossy_coeffs(r.epsilon, r.gamma, r.kappa, r.alpha)
    return c.c1, c.c2, c.c3, c.c4, c.c5


def _ratio(p1, p2, p3, q1, q2, m, n, phi):
    cos2m = np.cos(2 * np.asarray(m, dtype=float))
    return 2 * (p1 + 2 * p2 * np.cos(m) * np.cos(np.add(n, phi)) + p3 * cos2m) / (q1 - q2 * cos2m)


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def v_pm_lossless(epsilon: float, gamma: float, m: ArrayLike, n: ArrayLike, phi: ArrayLike = 0.0):
    """V+- at omega=0 with no transmission or amplification loss."""
    b = lossless_coeffs(epsilon / gamma, 1.0)
    return _out(_ratio(b.b1, b.b2, b.b3, b.b4, b.b3, m, n, phi))


def v_pm_lossy(epsilon: float, gamma: float, kappa: float, alpha: float,
               m: ArrayLike, n: ArrayLike, phi: ArrayLike = 0.0):
    """V+- at omega=0 with transmission loss alpha and amplification loss kappa."""
    c = lossy_coeffs(epsilon / gamma, 1.0, kappa / gamma, alpha)
    return _out(_ratio(c.c1, c.c2, c.c3, c.c4, c.c5, m, n, phi))


def v_pm(rates: Rates, m: ArrayLike, n: ArrayLike, phi: ArrayLike = 0.0):
    """V+- at omega=0, choosing the lossless form when kappa=0 and alpha=1."""
    return _out(_ratio(*_coeffs(rates), m, n, phi))


def v_nops(rates: Rates) -> float:
    """Spectrum with no channel or output phase shifts."""
    return v_pm(rates, 0.0, 0.0, 0.0)


def v_ps(rates: Rates, m: ArrayLike, n: ArrayLike):
    """Spectrum under channel phase shifts with the output shifters at zero."""
    return v_pm(rates, m, n, 0.0)


def diagnostic_f(rates: Rates, m: ArrayLike, n: ArrayLike):
    """Degradation by the channel phases: V_ps(m, n) - V_nops."""
    return _out(np.asarray(v_ps(rates, m, n)) - v_nops(rates))


def diagnostic_g(rates: Rates, m: ArrayLike, n: ArrayLike, phi: ArrayLike):
    """Residual after compensation: V(m, n, phi) - V_nops.  Zero means full recovery."""
    return _out(np.asarray(v_pm(rates, m, n, phi)) - v_nops(rates))


def diagnostic_h(rates: Rates, m: ArrayLike, n: ArrayLike, phi: ArrayLike):
    """Gain from compensation: V(m, n, phi) - V_ps(m, n).  Negative means improvement."""
    return _out(np.asarray(v_pm(rates, m, n, phi)) - np.asarray(v_ps(rates, m, n)))


def v_im_curve(rates: Rates, m: ArrayLike):
    """Spectrum at the optimal compensation, as a function of m alone.

    Even in m.  At m = +-pi/2 the output shifters have no effect; the value
    there is 2 in the lossless case and 2 (c1 - c3) / (c4 + c5) otherwise.
    """
    p1, p2, p3, q1, q2 = _coeffs(rates)
    m_arr = np.asarray(m, dtype=float)
    cm = np.cos(m_arr)
    c2m = np.cos(2 * m_arr)
    smooth = 2 * (p1 + 2 * p2 * np.abs(cm) + p3 * c2m) / (q1 - q2 * c2m)
    edge = 2.0 if rates.lossless else 2 * (p1 - p3) / (q1 + q2)
    return _out(np.where(np.abs(cm) <= ANGLE_TOL, edge, smooth))


class Branch(enum.Enum):
    INNER = "inner"  # m in (-pi/2, pi/2)
    OUTER = "outer"  # m in (-pi, -pi/2) or (pi/2, pi]


@dataclass(frozen=True)
class PhasePlan:
    """Choice of the total output shift phi = phi1 + phi2.

    ``phi0`` is the representative in (-pi, pi]; ``alternates`` lists every
    equivalent minimiser in (-2pi, 2pi].  When ``effective`` is false (m = +-pi/2)
    no phi changes the spectrum and ``branch`` is None.
    """

    phi0: float
    alternates: tuple[float, ...]
    branch: Branch | None
    effective: bool
    v_im: float

    def to_dict(self) -> dict:
        return {
            "phi0": self.phi0,
            "alternates": list(self.alternates),
            "branch": self.branch.value if self.branch else None,
            "effective": self.effective,
            "v_im": self.v_im,
        }


def _congruent_in_double_period(angle: float) -> tuple[float, ...]:
    base = wrap_angle(angle)
    out = [base]
    other = base - 2 * math.pi if base > 0 else base + 2 * math.pi
    if -2 * math.pi < other <= 2 * math.pi:
        out.append(other)
    return tuple(sorted(out, reverse=True))


def optimal_phi(rates: Rates, m: float, n: float) -> PhasePlan:
    """Output compensation minimising the spectrum for channel phases (m, n).

    phi0 = -n when cos m > 0 and pi - n (equivalently -pi - n) when cos m < 0.
    """
    cm = math.cos(m)
    v_im = float(v_im_curve(rates, m))
    if abs(cm) <= ANGLE_TOL:
        phi0 = wrap_angle(-n)
        return PhasePlan(phi0, _congruent_in_double_period(phi0), None, False, v_im)
    branch = Branch.INNER if cm > 0 else Branch.OUTER
    phi0 = wrap_angle(-n if branch is Branch.INNER else math.pi - n)
    return PhasePlan(phi0, _congruent_in_double_period(phi0), branch, True, v_im)
