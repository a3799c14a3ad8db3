"""Transfer functions and two-mode squeezing spectra of the output fields."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from .model import StateSpace, rotation_block
from .stability import StabilityError, hurwitz_check

ENTANGLEMENT_THRESHOLD = 4.0
# values within rounding of the threshold count as not entangled
THRESHOLD_RTOL = 1e-9

# row combinators: (q1 + q2) and (p1 - p2)
SUM_Q = np.array([1.0, 0.0, 1.0, 0.0])
DIFF_P = np.array([0.0, 1.0, 0.0, -1.0])

_COND_LIMIT = 1e13


class SingularResolventError(ArithmeticError):
    """``i*omega*I - A`` cannot be inverted reliably."""

    def __init__(self, omega: float, condition: float):
        super().__init__(f"resolvent at omega={omega:g} is singular (condition number {condition:.3g})")
        self.omega = omega
        self.condition = condition


class Entanglement(enum.Enum):
    ENTANGLED = "entangled"
    NOT_ENTANGLED = "not_entangled"


def to_db(value: float) -> float:
    if value <= 0.0:
        return -math.inf
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class Spectra:
    omega: float
    v_plus: float
    v_minus: float

    @property
    def v_total(self) -> float:
        return self.v_plus + self.v_minus

    @property
    def v_plus_db(self) -> float:
        return to_db(self.v_plus)

    @property
    def v_minus_db(self) -> float:
        return to_db(self.v_minus)

    @property
    def entangled(self) -> bool:
        return self.v_total < ENTANGLEMENT_THRESHOLD * (1.0 - THRESHOLD_RTOL)

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "v_plus": self.v_plus,
            "v_minus": self.v_minus,
            "v_total": self.v_total,
            "v_plus_db": self.v_plus_db,
            "v_minus_db": self.v_minus_db,
            "entangled": self.entangled,
        }


def classify_entanglement(spectra: Spectra) -> Entanglement:
    return Entanglement.ENTANGLED if spectra.entangled else Entanglement.NOT_ENTANGLED


def transfer_matrix(ss: StateSpace, omega: float = 0.0) -> NDArray[np.complex128]:
    """``H(i omega) = C (i omega I - A)^{-1} B + D`` as a 4x16 complex matrix."""
    resolvent = 1j * omega * np.eye(8) - ss.a_mat
    try:
        lu, piv = linalg.lu_factor(resolvent, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        raise SingularResolventError(omega, math.inf) from None
    rcond = _reciprocal_condition(resolvent, lu)
    if not rcond > 1.0 / _COND_LIMIT:
        raise SingularResolventError(omega, math.inf if rcond == 0 else 1.0 / rcond)
    return ss.c_mat @ linalg.lu_solve((lu, piv), ss.b_mat.astype(complex)) + ss.d_mat


def _reciprocal_condition(mat: NDArray, lu: NDArray) -> float:
    # LAPACK gecon on the existing factorisation; 1-norm estimate
    gecon, = linalg.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, np.linalg.norm(mat, 1), norm="1")
    if info != 0:
        return 0.0
    return float(rcond)


def _spectra_from_h(h: NDArray[np.complex128], omega: float) -> Spectra:
    h1 = SUM_Q @ h
    h2 = DIFF_P @ h
    return Spectra(omega=omega, v_plus=float(np.vdot(h1, h1).real), v_minus=float(np.vdot(h2, h2).real))


def _check_stable(ss: StateSpace) -> None:
    report = hurwitz_check(ss)
    if not report.hurwitz:
        raise StabilityError(f"drift matrix is not Hurwitz (max real eigenvalue {report.max_real_eigen_numeric:.4g})")


def squeezing_spectra(ss: StateSpace, omega: float = 0.0, *, check_stability: bool = True) -> Spectra:
    if check_stability:
        _check_stable(ss)
    return _spectra_from_h(transfer_matrix(ss, omega), omega)


def rotate_outputs(ss: StateSpace, psi1: float, psi2: float) -> StateSpace:
    """Apply extra output phase shifts psi1 (to xi_out,b,1) and psi2 (to xi_out,a,2)."""
    rot = np.zeros((4, 4))
    rot[0:2, 0:2] = rotation_block(psi1)
    rot[2:4, 2:4] = rotation_block(psi2)
    return StateSpace(ss.a_mat.copy(), ss.b_mat.copy(), rot @ ss.c_mat, rot @ ss.d_mat)


def rotated_spectra(ss: StateSpace, omega: float, psi1: float, psi2: float, *,
                    check_stability: bool = True) -> Spectra:
    return squeezing_spectra(rotate_outputs(ss, psi1, psi2), omega, check_stability=check_stability)


def min_rotated_total(ss: StateSpace, omega: float = 0.0, resolution: int = 64) -> float:
    """Smallest V over a ``resolution x resolution`` grid of (psi1, psi2).

    Entanglement vanishes in the rotated sense when this is not below 4.
    """
    _check_stable(ss)
    h = transfer_matrix(ss, omega)
    psis = -math.pi + 2.0 * math.pi * (np.arange(resolution) + 1) / resolution
    best = math.inf
    for psi1 in psis:
        for psi2 in psis:
            rot = np.zeros((4, 4))
            rot[0:2, 0:2] = rotation_block(psi1)
            rot[2:4, 2:4] = rotation_block(psi2)
            best = min(best, _spectra_from_h(rot @ h, omega).v_total)
    return best
