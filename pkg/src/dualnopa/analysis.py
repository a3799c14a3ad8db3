"""Entanglement-boundary roots, loss tables and parameter sweeps."""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from . import closedform as cf
from .model import Rates, SystemConfig, build_state_space
from .spectra import THRESHOLD_RTOL, squeezing_spectra, to_db
from .stability import StabilityError, closed_form_stable, hurwitz_check, max_real_eigen_formula, require_stable

PER_SPECTRUM_THRESHOLD = 2.0
HALF_PI = 0.5 * math.pi
TABLE_TOLERANCE = 1e-4

# Boundary roots [m1, m2] at x=0.4, y=1 (6 significant figures).
REFERENCE_TRANSMISSION = {1.0: (1.55208, 1.58951), 0.97: (1.52303, 1.61856), 0.95: (1.50311, 1.63848)}
REFERENCE_AMPLIFICATION = {0.1: (1.52003, 1.62156), 0.2: (1.51815, 1.62344),
                           0.5: (1.51252, 1.62907), 1.0: (1.50311, 1.63848)}


class NoBoundaryError(ValueError):
    """V_im never crosses 2 on a bracket.

    ``entangled_everywhere`` tells which side of the threshold the curve stays on.
    """

    def __init__(self, message: str, entangled_everywhere: bool):
        super().__init__(message)
        self.entangled_everywhere = entangled_everywhere


@dataclass(frozen=True)
class BoundaryRoots:
    """Roots of V_im(m) = 2 on [0, pi]; -m1 and -m2 are roots too."""

    m1: float
    m2: float
    residuals: tuple[float, float]
    degenerate: bool

    @property
    def width(self) -> float:
        return self.m2 - self.m1

    def to_dict(self) -> dict:
        return {"m1": self.m1, "m2": self.m2, "residuals": list(self.residuals),
                "degenerate": self.degenerate}


def find_boundary(rates: Rates, xtol: float = 1e-14) -> BoundaryRoots:
    """Bisect V_im(m) - 2 on [0, pi/2] and [pi/2, pi].

    V_im increases on (0, pi/2) and decreases on (pi/2, pi), so each bracket
    holds at most one root.
    """
    require_stable(rates, 0.0)

    def excess(m: float) -> float:
        return float(cf.v_im_curve(rates, m)) - PER_SPECTRUM_THRESHOLD

    # values within rounding of 2, e.g. the vacuum, are not entangled
    slack = PER_SPECTRUM_THRESHOLD * THRESHOLD_RTOL
    at_zero, at_edge, at_pi = excess(0.0), excess(HALF_PI), excess(math.pi)
    if at_zero >= -slack or at_pi >= -slack:
        raise NoBoundaryError("V_im(0) >= 2: no entanglement for any m", entangled_everywhere=False)
    if rates.lossless or abs(at_edge) <= slack:
        return BoundaryRoots(HALF_PI, HALF_PI, (abs(at_edge), abs(at_edge)), degenerate=True)
    if at_edge < 0.0:
        raise NoBoundaryError("V_im stays below 2: entangled for every m", entangled_everywhere=True)

    rtol = 4 * np.finfo(float).eps
    m1 = optimize.bisect(excess, 0.0, HALF_PI, xtol=xtol, rtol=rtol, maxiter=200)
    m2 = optimize.bisect(excess, HALF_PI, math.pi, xtol=xtol, rtol=rtol, maxiter=200)
    return BoundaryRoots(m1, m2, (abs(excess(m1)), abs(excess(m2))), degenerate=False)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def __contains__(self, value: float) -> bool:
        above = value >= self.lo if self.lo_closed else value > self.lo
        below = value <= self.hi if self.hi_closed else value < self.hi
        return above and below

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}


def entanglement_region(rates: Rates, resolution: int = 512) -> list[Interval]:
    """Intervals of m in (-pi, pi] where V_im(m) < 2.

    ``resolution`` sample points are used to confirm the intervals against
    the curve itself; a disagreement raises ``RuntimeError``.
    """
    try:
        roots = find_boundary(rates)
    except NoBoundaryError as exc:
        if exc.entangled_everywhere:
            region = [Interval(-math.pi, math.pi, False, True)]
        else:
            region = []
    else:
        region = [
            Interval(-math.pi, -roots.m2, False, False),
            Interval(-roots.m1, roots.m1, False, False),
            Interval(roots.m2, math.pi, False, True),
        ]

    ms = -math.pi + 2 * math.pi * (np.arange(resolution) + 1) / resolution
    vals = np.asarray(cf.v_im_curve(rates, ms))
    for m, v in zip(ms, vals):
        inside = any(m in iv for iv in region)
        near_edge = any(min(abs(m - iv.lo), abs(m - iv.hi)) < 1e-9 for iv in region)
        if inside != (v < PER_SPECTRUM_THRESHOLD * (1.0 - THRESHOLD_RTOL)) and not near_edge:
            raise RuntimeError(f"region disagrees with V_im at m={m:.6g}")
    return region


class LossTable(enum.Enum):
    TRANSMISSION = "transmission"
    AMPLIFICATION = "amplification"


@dataclass(frozen=True)
class TableRow:
    label: str
    alpha: float
    kappa: float
    roots: BoundaryRoots
    reference: tuple[float, float]

    @property
    def passed(self) -> bool:
        return (abs(self.roots.m1 - self.reference[0]) <= TABLE_TOLERANCE
                and abs(self.roots.m2 - self.reference[1]) <= TABLE_TOLERANCE)

    def to_dict(self) -> dict:
        return {
            "label": self.label, "alpha": self.alpha, "kappa": self.kappa,
            "negative": [-self.roots.m2, -self.roots.m1], "positive": [self.roots.m1, self.roots.m2],
            "reference": list(self.reference), "pass": self.passed,
        }


def reproduce_table(which: LossTable | str, base: SystemConfig | None = None) -> list[TableRow]:
    """Boundary roots for the transmission-loss or amplification-loss series at x=0.4, y=1."""
    which = LossTable(which)
    base = (base or SystemConfig()).replace(x=0.4, y=1.0)
    rows = []
    if which is LossTable.TRANSMISSION:
        for alpha, ref in REFERENCE_TRANSMISSION.items():
            cfg = base.replace(alpha=alpha, kappa_override=None)
            rows.append(TableRow(f"alpha={alpha:g}", alpha, cfg.kappa, find_boundary(cfg.rates), ref))
    else:
        for frac, ref in REFERENCE_AMPLIFICATION.items():
            kappa = frac * base.kappa_scale * base.x
            cfg = base.replace(alpha=0.95, kappa_override=kappa)
            rows.append(TableRow(f"kappa={frac:g}*kappa_scale*x", 0.95, kappa, find_boundary(cfg.rates), ref))
    return rows


class Quantity(enum.Enum):
    V = "v"                       # V(m, n, phi)
    V_PS = "v_ps"                 # V(m, n, 0)
    V_IM = "v_im"                 # V at optimal phi
    F = "f"
    G = "g"
    H = "h"
    VPS_MINUS_VNOPS = "v_ps-v_nops"
    VIM_MINUS_VPS = "v_im-v_ps"


PHASE_AXES = ("m", "n", "phi")
CONFIG_AXES = ("x", "y", "alpha", "kappa_scale")


@dataclass(frozen=True)
class AxisSpec:
    name: str
    lo: float
    hi: float
    count: int

    def __post_init__(self) -> None:
        if self.name not in PHASE_AXES + CONFIG_AXES:
            raise ValueError(f"unknown sweep variable {self.name!r}")
        if self.count < 2:
            raise ValueError(f"axis {self.name}: count must be at least 2")
        if not self.lo < self.hi:
            raise ValueError(f"axis {self.name}: lo must be below hi")

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """Parse ``name:lo:hi:count``."""
        try:
            name, lo, hi, count = text.split(":")
            return cls(name, float(lo), float(hi), int(count))
        except ValueError as exc:
            raise ValueError(f"bad axis spec {text!r}: {exc}") from None

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def to_dict(self) -> dict:
        return {"name": self.name, "lo": self.lo, "hi": self.hi, "count": self.count}


@dataclass
class SweepGrid:
    """Row-major grid of one quantity; unstable points are masked."""

    axes: tuple[AxisSpec, ...]
    quantity: Quantity
    values: np.ma.MaskedArray
    db: bool = False
    engine: str = "closed-form"

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    def points(self) -> Iterable[tuple[tuple[float, ...], float | None]]:
        coords = [a.values() for a in self.axes]
        flat = self.values.reshape(-1)
        for idx, point in enumerate(itertools.product(*coords)):
            yield tuple(float(p) for p in point), (None if flat.mask[idx] else float(flat.data[idx]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([a.name for a in self.axes] + [self.quantity.value + ("_db" if self.db else "")])
        for point, value in self.points():
            writer.writerow([_fmt(p) for p in point] + ["unstable" if value is None else _fmt(value)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "axes": [a.to_dict() for a in self.axes],
            "quantity": self.quantity.value,
            "db": self.db,
            "engine": self.engine,
            "rows": [
                {**dict(zip((a.name for a in self.axes), point)),
                 "value": "unstable" if value is None else float(_fmt(value))}
                for point, value in self.points()
            ],
        }
        return json.dumps(doc, indent=2)


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return f"{value:.9g}"


def _quantity_closed_form(quantity: Quantity, rates: Rates, m, n, phi, db: bool):
    conv = (lambda v: 10 * np.log10(v)) if db else (lambda v: v)
    if quantity is Quantity.V:
        return conv(np.asarray(cf.v_pm(rates, m, n, phi)))
    if quantity is Quantity.V_PS:
        return conv(np.asarray(cf.v_ps(rates, m, n)))
    if quantity is Quantity.V_IM:
        return conv(np.asarray(cf.v_im_curve(rates, m)))
    if quantity is Quantity.F:
        return np.asarray(cf.diagnostic_f(rates, m, n))
    if quantity is Quantity.G:
        return np.asarray(cf.diagnostic_g(rates, m, n, phi))
    if quantity is Quantity.H:
        return np.asarray(cf.diagnostic_h(rates, m, n, phi))
    if quantity is Quantity.VPS_MINUS_VNOPS:
        return conv(np.asarray(cf.v_ps(rates, m, n))) - conv(cf.v_nops(rates))
    if quantity is Quantity.VIM_MINUS_VPS:
        return conv(np.asarray(cf.v_im_curve(rates, m))) - conv(np.asarray(cf.v_ps(rates, m, n)))
    raise ValueError(quantity)


def _v_state_space(cfg: SystemConfig, m: float, n: float, phi: float) -> float:
    spec = squeezing_spectra(build_state_space(cfg.replace(theta1=n + m, theta2=n - m, phi1=phi, phi2=0.0)))
    return spec.v_plus


def _quantity_state_space(quantity: Quantity, cfg: SystemConfig, m: float, n: float, phi: float,
                          db: bool) -> float:
    conv = to_db if db else (lambda v: v)
    rates = cfg.rates
    v = lambda p: _v_state_space(cfg, m, n, p)  # noqa: E731
    v_im = lambda: _v_state_space(cfg, m, n, cf.optimal_phi(rates, m, n).phi0)  # noqa: E731
    nops = lambda: _v_state_space(cfg, 0.0, 0.0, 0.0)  # noqa: E731
    if quantity is Quantity.V:
        return conv(v(phi))
    if quantity is Quantity.V_PS:
        return conv(v(0.0))
    if quantity is Quantity.V_IM:
        return conv(v_im())
    if quantity is Quantity.F:
        return v(0.0) - nops()
    if quantity is Quantity.G:
        return v(phi) - nops()
    if quantity is Quantity.H:
        return v(phi) - v(0.0)
    if quantity is Quantity.VPS_MINUS_VNOPS:
        return conv(v(0.0)) - conv(nops())
    if quantity is Quantity.VIM_MINUS_VPS:
        return conv(v_im()) - conv(v(0.0))
    raise ValueError(quantity)


def sweep(base: SystemConfig, quantity: Quantity | str, axes: Sequence[AxisSpec], *,
          db: bool = False, engine: str = "closed-form") -> SweepGrid:
    """Evaluate ``quantity`` on the Cartesian grid spanned by ``axes``.

    Phase variables not swept are taken from ``base`` (m, n from its channel
    phases, phi = phi1 + phi2).  ``engine="state-space"`` evaluates every point
    through the transfer function instead of the closed forms.
    """
    quantity = Quantity(quantity)
    if engine not in ("closed-form", "state-space"):
        raise ValueError(f"unknown engine {engine!r}")
    if not axes:
        raise ValueError("at least one axis is required")
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ValueError("duplicate sweep axis")

    phases = base.phases
    shape = tuple(a.count for a in axes)
    mesh = np.meshgrid(*(a.values() for a in axes), indexing="ij")
    grids = dict(zip(names, mesh))
    full = lambda name, default: grids.get(name, np.full(shape, default))  # noqa: E731
    m_all, n_all, phi_all = full("m", phases.m), full("n", phases.n), full("phi", phases.phi)

    data = np.zeros(shape)
    mask = np.zeros(shape, dtype=bool)

    # group points sharing the same physical parameters so closed forms vectorise
    cfg_index_sets = itertools.product(*(range(a.count) for a in axes if a.name in CONFIG_AXES))
    cfg_positions = [i for i, a in enumerate(axes) if a.name in CONFIG_AXES]
    for combo in cfg_index_sets:
        sel = [slice(None)] * len(axes)
        changes = {}
        for pos, idx in zip(cfg_positions, combo):
            sel[pos] = idx
            changes[axes[pos].name] = float(axes[pos].values()[idx])
        sel_t = tuple(sel)
        cfg = base.replace(**changes) if changes else base
        rates = cfg.rates
        m_sub = np.asarray(m_all[sel_t], dtype=float)
        stable = _stable_mask(rates, m_sub, quantity)
        if engine == "closed-form":
            values = np.broadcast_to(_quantity_closed_form(quantity, rates, m_sub, n_all[sel_t],
                                                           phi_all[sel_t], db), m_sub.shape)
        else:
            values = np.empty(m_sub.shape)
            for idx in np.ndindex(m_sub.shape):
                if stable[idx]:
                    values[idx] = _quantity_state_space(quantity, cfg, float(m_sub[idx]),
                                                        float(n_all[sel_t][idx]), float(phi_all[sel_t][idx]), db)
        data[sel_t] = np.where(stable, values, 0.0)
        mask[sel_t] = ~stable
    return SweepGrid(tuple(axes), quantity, np.ma.array(data, mask=mask), db=db, engine=engine)


def _stable_mask(rates: Rates, m: np.ndarray, quantity: Quantity) -> np.ndarray:
    needs_nops = quantity in (Quantity.F, Quantity.G, Quantity.VPS_MINUS_VNOPS)
    if needs_nops and not closed_form_stable(rates, 0.0)[0]:
        return np.zeros(m.shape, dtype=bool)
    out = np.empty(m.shape, dtype=bool)
    for idx in np.ndindex(m.shape):
        out[idx] = closed_form_stable(rates, 2.0 * float(m[idx]))[0]
    return out


@dataclass
class ValidationResult:
    samples: int
    lossless_max_dev: float
    lossy_max_dev: float
    stability_disagreements: int
    eigen_max_dev: float
    tolerance: float = 1e-9
    eigen_tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return (self.lossless_max_dev <= self.tolerance and self.lossy_max_dev <= self.tolerance
                and self.stability_disagreements == 0 and self.eigen_max_dev <= self.eigen_tolerance)

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "lossless_max_dev": self.lossless_max_dev,
            "lossy_max_dev": self.lossy_max_dev,
            "stability_disagreements": self.stability_disagreements,
            "eigen_max_rel_dev": self.eigen_max_dev,
            "pass": self.passed,
        }


def random_config(rng: np.random.Generator, *, lossless: bool, base: SystemConfig | None = None,
                  stable: bool = True) -> SystemConfig:
    """Draw a config with x, y, alpha in (0, 1] and uniform phases; rejection-sample stability."""
    base = base or SystemConfig()
    while True:
        x, y = 1.0 - rng.random(2)
        alpha = 1.0 if lossless else 1.0 - rng.random()
        kappa = 0.0 if lossless else float(rng.uniform(0.0, 2.0)) * base.kappa_scale * x
        t1, t2, p1, p2 = rng.uniform(-math.pi, math.pi, 4)
        cfg = base.replace(x=float(x), y=float(y), alpha=float(alpha), kappa_override=kappa,
                           theta1=float(t1), theta2=float(t2), phi1=float(p1), phi2=float(p2))
        if not stable or closed_form_stable(cfg)[0]:
            return cfg


def relative_deviation(closed: float, numeric: float) -> float:
    return abs(closed - numeric) / max(1.0, abs(closed))


def cross_validate(samples: int = 1000, seed: int = 0, base: SystemConfig | None = None) -> ValidationResult:
    """Closed-form versus state-space spectra and stability on seeded random configs.

    ``base`` supplies gamma_r and kappa_scale; everything else is drawn.
    """
    rng = np.random.default_rng(seed)
    dev = {True: 0.0, False: 0.0}
    for lossless in (True, False):
        for _ in range(samples):
            cfg = random_config(rng, lossless=lossless, base=base)
            ph = cfg.phases
            closed = cf.v_pm(cfg.rates, ph.m, ph.n, ph.phi)
            spec = squeezing_spectra(build_state_space(cfg))
            dev[lossless] = max(dev[lossless], relative_deviation(closed, spec.v_plus),
                                relative_deviation(closed, spec.v_minus))

    disagreements = 0
    eig_dev = 0.0
    checked = 0
    while checked < samples:
        cfg = random_config(rng, lossless=bool(rng.random() < 0.3), base=base, stable=False)
        holds, margin = closed_form_stable(cfg)
        if abs(margin) <= 1e-9:
            continue
        checked += 1
        numeric = hurwitz_check(build_state_space(cfg))
        formula = max_real_eigen_formula(cfg)
        disagreements += numeric.hurwitz != holds
        eig_dev = max(eig_dev, abs(numeric.max_real_eigen_numeric - formula) / (cfg.gamma + cfg.kappa))
    return ValidationResult(samples, dev[True], dev[False], disagreements, eig_dev)


__all__ = [
    "BoundaryRoots", "Interval", "LossTable", "NoBoundaryError", "Quantity", "AxisSpec", "SweepGrid",
    "TableRow", "ValidationResult", "StabilityError", "find_boundary", "entanglement_region",
    "reproduce_table", "sweep", "cross_validate", "random_config", "REFERENCE_TRANSMISSION",
    "REFERENCE_AMPLIFICATION",
]
