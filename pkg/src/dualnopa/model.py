"""Parameters and the quadrature state-space model of the dual-NOPA feedback loop.

Two NOPAs (modes a1, b1 at one end and a2, b2 at the other) are joined by two
lossy, phase-shifting channels: the b2 output feeds b1 through (alpha, theta2)
and the a1 output feeds a2 through (alpha, theta1).  The entangled outputs are
xi_out,b,1 and xi_out,a,2, each followed by an adjustable phase shifter
(phi1, phi2).

Quadratures follow ``q = a + a*`` and ``p = -i (a - a*)`` without a 1/sqrt(2)
factor, so the vacuum-level two-mode squeezing spectrum is 2 per quadrature
combination and the entanglement threshold on V = V+ + V- is 4.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from os import PathLike
from typing import Any, Mapping

import numpy as np
from numpy.typing import NDArray

GAMMA_R_DEFAULT = 7.2e7
KAPPA_SCALE_DEFAULT = 3e6 / (math.sqrt(2.0) * 0.6)


class ConfigError(ValueError):
    """Invalid network parameter.  ``field`` names the offending parameter."""

    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field = field_name


def wrap_angle(angle: float) -> float:
    """Map an angle onto (-pi, pi]."""
    return math.pi - (math.pi - angle) % (2.0 * math.pi)


def _in_half_open(value: float, tol: float = 0.0) -> bool:
    return -math.pi + tol < value <= math.pi + tol


@dataclass(frozen=True)
class Rates:
    """The rate parameters that the closed-form spectra depend on.

    ``epsilon`` (pump coupling), ``gamma`` (mirror decay) and ``kappa``
    (amplification loss) are angular rates; ``alpha`` is the channel
    transmission amplitude.  Ratios of the spectra are invariant under a
    common rescaling of the three rates.
    """

    epsilon: float
    gamma: float
    kappa: float = 0.0
    alpha: float = 1.0

    @property
    def beta(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.alpha**2))

    @property
    def lossless(self) -> bool:
        return self.kappa == 0.0 and self.alpha == 1.0

    def scaled(self, scale: float | None = None) -> "Rates":
        """Rates divided by ``scale`` (default ``gamma``), for well-conditioned polynomials."""
        s = self.gamma if scale is None else scale
        return Rates(self.epsilon / s, self.gamma / s, self.kappa / s, self.alpha)


@dataclass(frozen=True)
class SystemConfig:
    """All physical and phase parameters of the network.

    ``epsilon = x * gamma_r``, ``gamma = gamma_r / y`` and, unless ``kappa`` is
    given explicitly, ``kappa = kappa_scale * x``.  Angles are wrapped onto
    (-pi, pi] on construction.
    """

    x: float = 0.4
    y: float = 1.0
    gamma_r: float = GAMMA_R_DEFAULT
    kappa_scale: float = KAPPA_SCALE_DEFAULT
    alpha: float = 1.0
    theta1: float = 0.0
    theta2: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0
    kappa_override: float | None = field(default=None)

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f.name, f"{f.name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(f.name, f"{f.name} must be finite")
            object.__setattr__(self, f.name, float(value))
        if not 0.0 < self.x <= 1.0:
            raise ConfigError("x", "x out of (0,1]")
        if not 0.0 < self.y <= 1.0:
            raise ConfigError("y", "y out of (0,1]")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha", "alpha out of (0,1]")
        if self.gamma_r <= 0.0:
            raise ConfigError("gamma_r", "gamma_r must be positive")
        if self.kappa_scale < 0.0:
            raise ConfigError("kappa_scale", "kappa_scale must be nonnegative")
        if self.kappa_override is not None and self.kappa_override < 0.0:
            raise ConfigError("kappa_override", "kappa must be nonnegative")
        for name in ("theta1", "theta2", "phi1", "phi2"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))

    @property
    def epsilon(self) -> float:
        return self.x * self.gamma_r

    @property
    def gamma(self) -> float:
        return self.gamma_r / self.y

    @property
    def kappa(self) -> float:
        if self.kappa_override is not None:
            return self.kappa_override
        return self.kappa_scale * self.x

    @property
    def beta(self) -> float:
        return math.sqrt(1.0 - self.alpha**2)

    @property
    def delta_theta(self) -> float:
        return self.theta1 - self.theta2

    @property
    def rates(self) -> Rates:
        return Rates(self.epsilon, self.gamma, self.kappa, self.alpha)

    @property
    def phases(self) -> "PhaseDecomposition":
        return decompose_phases(self.theta1, self.theta2, self.phi1, self.phi2)

    def replace(self, **changes: Any) -> "SystemConfig":
        data = self.to_dict()
        data.update(changes)
        return SystemConfig(**data)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate_config(raw: Mapping[str, Any]) -> SystemConfig:
    """Build a :class:`SystemConfig` from a plain mapping, rejecting unknown keys.

    The key ``kappa`` is accepted as an alias for ``kappa_override``.
    """
    data = dict(raw)
    if "kappa" in data:
        if "kappa_override" in data:
            raise ConfigError("kappa", "give kappa or kappa_override, not both")
        data["kappa_override"] = data.pop("kappa")
    known = {f.name for f in fields(SystemConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], f"unknown config key(s): {', '.join(unknown)}")
    return SystemConfig(**data)


def load_config(path: str | PathLike[str]) -> SystemConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config document must be a JSON object")
    return validate_config(raw)


@dataclass(frozen=True)
class PhaseDecomposition:
    """Half-difference ``m``, half-sum ``n`` and total output shift ``phi``.

    ``canonical`` records whether m, n, m+n and n-m all lie in (-pi, pi],
    the domain the closed-form analysis is carried out on.
    """

    m: float
    n: float
    phi: float
    canonical: bool

    @property
    def theta1(self) -> float:
        return wrap_angle(self.n + self.m)

    @property
    def theta2(self) -> float:
        return wrap_angle(self.n - self.m)


def decompose_phases(theta1: float, theta2: float, phi1: float = 0.0, phi2: float = 0.0,
                     tol: float = 1e-12) -> PhaseDecomposition:
    """Split channel phases into (m, n) and the output shifts into phi = phi1 + phi2.

    The angles are used as given, not wrapped, so the ``canonical`` flag tells
    whether the caller's tuple sits in the analysed domain.  ``tol`` absorbs
    rounding at the closed end pi.
    """
    m = 0.5 * (theta1 - theta2)
    n = 0.5 * (theta1 + theta2)
    canonical = all(_in_half_open(v, tol) for v in (m, n, m + n, n - m))
    return PhaseDecomposition(m=m, n=n, phi=phi1 + phi2, canonical=canonical)


STATE_ORDER = ("a1_q", "a1_p", "b1_q", "b1_p", "a2_q", "a2_p", "b2_q", "b2_p")
INPUT_ORDER = (
    "in_a1_q", "in_a1_p", "in_b2_q", "in_b2_p",
    "loss_a1_q", "loss_a1_p", "loss_b1_q", "loss_b1_p",
    "loss_a2_q", "loss_a2_p", "loss_b2_q", "loss_b2_p",
    "bs1_q", "bs1_p", "bs2_q", "bs2_p",
)
OUTPUT_ORDER = ("out_b1_q", "out_b1_p", "out_a2_q", "out_a2_p")

# mode / field indices (each occupies a q,p pair)
_A1, _B1, _A2, _B2 = range(4)
_IN_A1, _IN_B2, _LOSS_A1, _LOSS_B1, _LOSS_A2, _LOSS_B2, _BS1, _BS2 = range(8)
_OUT_B1, _OUT_A2 = range(2)


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Real quadrature realisation ``dz = A z + B xi``, ``xi_out = C z + D xi``."""

    a_mat: NDArray[np.float64]
    b_mat: NDArray[np.float64]
    c_mat: NDArray[np.float64]
    d_mat: NDArray[np.float64]
    state_order: tuple[str, ...] = STATE_ORDER
    input_order: tuple[str, ...] = INPUT_ORDER
    output_order: tuple[str, ...] = OUTPUT_ORDER

    def __post_init__(self) -> None:
        for name, shape in (("a_mat", (8, 8)), ("b_mat", (8, 16)), ("c_mat", (4, 8)), ("d_mat", (4, 16))):
            mat = getattr(self, name)
            if mat.shape != shape:
                raise ValueError(f"{name} has shape {mat.shape}, expected {shape}")
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} has non-finite entries")
            mat.setflags(write=False)


def direct_block(c: complex) -> NDArray[np.float64]:
    """Quadrature block of a term ``c * b`` acting on (b_q, b_p)."""
    return np.array([[c.real, -c.imag], [c.imag, c.real]])


def conjugate_block(c: complex) -> NDArray[np.float64]:
    """Quadrature block of a term ``c * b*`` acting on (b_q, b_p)."""
    return np.array([[c.real, c.imag], [c.imag, -c.real]])


def rotation_block(angle: float) -> NDArray[np.float64]:
    return direct_block(complex(math.cos(angle), math.sin(angle)))


def _add(mat: NDArray[np.float64], row: int, col: int, block: NDArray[np.float64]) -> None:
    mat[2 * row:2 * row + 2, 2 * col:2 * col + 2] += block


def build_state_space(config: SystemConfig) -> StateSpace:
    """Expand the complex mode and output equations into real 2x2 quadrature blocks."""
    return state_space_from_rates(config.rates, config.theta1, config.theta2, config.phi1, config.phi2)


def state_space_from_rates(rates: Rates, theta1: float = 0.0, theta2: float = 0.0,
                           phi1: float = 0.0, phi2: float = 0.0) -> StateSpace:
    """Same realisation from bare rates; unlike SystemConfig this admits epsilon = 0."""
    eps, gam, kap = rates.epsilon, rates.gamma, rates.kappa
    alpha, beta = rates.alpha, rates.beta
    sg, sk = math.sqrt(gam), math.sqrt(kap)
    e1 = complex(math.cos(theta1), math.sin(theta1))
    e2 = complex(math.cos(theta2), math.sin(theta2))
    p1 = complex(math.cos(phi1), math.sin(phi1))
    p2 = complex(math.cos(phi2), math.sin(phi2))

    a = np.zeros((8, 8))
    b = np.zeros((8, 16))
    c = np.zeros((4, 8))
    d = np.zeros((4, 16))

    decay = direct_block(complex(-(gam + kap) / 2))
    pump = conjugate_block(complex(eps / 2))
    for mode in range(4):
        _add(a, mode, mode, decay)
    for i, j in ((_A1, _B1), (_B1, _A1), (_A2, _B2), (_B2, _A2)):
        _add(a, i, j, pump)
    _add(a, _B1, _B2, direct_block(-alpha * gam * e2))
    _add(a, _A2, _A1, direct_block(-alpha * gam * e1))

    _add(b, _A1, _IN_A1, direct_block(complex(-sg)))
    _add(b, _A1, _LOSS_A1, direct_block(complex(-sk)))
    _add(b, _B1, _IN_B2, direct_block(-alpha * sg * e2))
    _add(b, _B1, _LOSS_B1, direct_block(complex(-sk)))
    _add(b, _B1, _BS2, direct_block(complex(-beta * sg)))
    _add(b, _A2, _IN_A1, direct_block(-alpha * sg * e1))
    _add(b, _A2, _LOSS_A2, direct_block(complex(-sk)))
    _add(b, _A2, _BS1, direct_block(complex(-beta * sg)))
    _add(b, _B2, _IN_B2, direct_block(complex(-sg)))
    _add(b, _B2, _LOSS_B2, direct_block(complex(-sk)))

    _add(c, _OUT_B1, _B1, direct_block(sg * p1))
    _add(c, _OUT_B1, _B2, direct_block(alpha * sg * e2 * p1))
    _add(d, _OUT_B1, _IN_B2, direct_block(alpha * e2 * p1))
    _add(d, _OUT_B1, _BS2, direct_block(beta * p1))
    _add(c, _OUT_A2, _A2, direct_block(sg * p2))
    _add(c, _OUT_A2, _A1, direct_block(alpha * sg * e1 * p2))
    _add(d, _OUT_A2, _IN_A1, direct_block(alpha * e1 * p2))
    _add(d, _OUT_A2, _BS1, direct_block(beta * p2))

    return StateSpace(a, b, c, d)
