import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualnopa import (
    Rates,
    SystemConfig,
    build_state_space,
    closed_form_stable,
    hurwitz_check,
    max_real_eigen_formula,
    stability_report,
)
from dualnopa.analysis import random_config
from dualnopa.model import KAPPA_SCALE_DEFAULT
from dualnopa.stability import stability_threshold


def lossless(x, dtheta=0.0):
    return SystemConfig(x=x, y=1.0, alpha=1.0, kappa_scale=0.0, theta1=dtheta)


def test_hurwitz_below_threshold():
    assert hurwitz_check(build_state_space(lossless(0.4))).hurwitz


def test_unstable_above_threshold():
    cfg = lossless(0.42)
    assert stability_threshold(cfg) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert not hurwitz_check(build_state_space(cfg)).hurwitz
    assert not closed_form_stable(cfg)[0]


def test_phase_difference_pi_stabilises():
    cfg = lossless(0.6, math.pi)
    assert stability_threshold(cfg) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert hurwitz_check(build_state_space(cfg)).hurwitz


@pytest.mark.parametrize("dtheta,margin", [(0.0, 0.0142135624), (math.pi, 0.3071067812)])
def test_margin_values(dtheta, margin):
    holds, m = closed_form_stable(lossless(0.4, dtheta))
    assert holds
    assert m == pytest.approx(margin, abs=1e-9)


def test_strongly_pumped_unstable():
    holds, m = closed_form_stable(lossless(1.0))
    assert not holds and m < 0


def test_no_pump_is_pure_decay():
    r = Rates(epsilon=0.0, gamma=2.0, kappa=0.5, alpha=0.7)
    assert max_real_eigen_formula(r, 1.3) == -1.25


def test_formula_matches_eigenvalues_reference_point():
    cfg = lossless(0.4)
    numeric = hurwitz_check(build_state_space(cfg)).max_real_eigen_numeric
    assert numeric < 0
    assert max_real_eigen_formula(cfg) == pytest.approx(numeric, abs=1e-6 * cfg.gamma)


def test_formula_zero_on_boundary():
    # bisection for the x that puts the lossy, phase-shifted network on the boundary
    base = SystemConfig(y=0.7, alpha=0.9, theta1=1.1, theta2=-0.4)
    lo, hi = 1e-6, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if closed_form_stable(base.replace(x=mid))[1] > 0:
            lo = mid
        else:
            hi = mid
    edge = base.replace(x=lo)
    assert abs(closed_form_stable(edge)[1]) < 1e-12
    assert abs(max_real_eigen_formula(edge)) <= 1e-9 * edge.gamma


def test_equality_is_unstable():
    r = Rates(epsilon=stability_threshold(Rates(1.0, 1.0), 0.0), gamma=1.0)
    assert closed_form_stable(r, 0.0) == (False, 0.0)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(0, 40),
       st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi), st.floats(-10, 10))
def test_common_phase_offset_irrelevant(x, y, alpha, kf, t1, t2, c):
    cfg = SystemConfig(x=x, y=y, alpha=alpha, kappa_scale=kf * KAPPA_SCALE_DEFAULT, theta1=t1, theta2=t2)
    moved = cfg.replace(theta1=t1 + c, theta2=t2 + c)
    assert closed_form_stable(cfg)[1] == pytest.approx(closed_form_stable(moved)[1], abs=1e-9)
    if abs(closed_form_stable(cfg)[1]) > 1e-6:
        assert hurwitz_check(build_state_space(cfg)).hurwitz == hurwitz_check(build_state_space(moved)).hurwitz


@given(st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(0, 5))
def test_margin_monotone_in_cos(x, y, alpha, kf):
    cfg = SystemConfig(x=x, y=y, alpha=alpha, kappa_scale=kf * KAPPA_SCALE_DEFAULT)
    dthetas = np.linspace(0, math.pi, 33)  # |cos(dtheta/2)| decreasing
    margins = [closed_form_stable(cfg, d)[1] for d in dthetas]
    assert all(b >= a - 1e-15 for a, b in zip(margins, margins[1:]))
    if margins[0] > 0:
        assert all(m > 0 for m in margins)


def test_report_agreement_random(rng):
    checked = 0
    while checked < 300:
        cfg = random_config(rng, lossless=False, stable=False)
        rep = stability_report(cfg)
        if abs(rep.margin) <= 1e-9:
            continue
        checked += 1
        assert rep.hurwitz == rep.closed_form_holds
        assert abs(rep.max_real_eigen_numeric - rep.max_real_eigen_formula) <= 1e-6 * (cfg.gamma + cfg.kappa)
