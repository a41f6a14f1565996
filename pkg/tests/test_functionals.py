import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbec._validation import GridMismatchError, NumericalError
from dbec.functionals import (
    CouplingPair,
    FunctionalReport,
    Regime,
    classify,
    energy,
    evaluate,
    format_float,
    gradient,
    rayleigh_beta,
    residual,
)
from dbec.grid import Grid

FPT = 4 * math.pi / 3


def gaussian(g, widths=(1.0, 1.0, 1.0), amp=1.0):
    x1, x2, x3 = g.coords
    s1, s2, s3 = widths
    return amp * np.exp(-0.5 * ((x1 / s1) ** 2 + (x2 / s2) ** 2 + (x3 / s3) ** 2)).astype(complex)


@pytest.mark.parametrize(
    "l1, l2, tag",
    [(-1, 0, Regime.UNSTABLE), (0, 0, Regime.BOUNDARY), (10, 1, Regime.STABLE), (1, 0, Regime.STABLE),
     (0, 1, Regime.UNSTABLE), (8 * math.pi / 3, -1, Regime.BOUNDARY), (FPT, 1, Regime.BOUNDARY)],
)
def test_classify(l1, l2, tag):
    assert classify(CouplingPair(l1, l2)).tag is tag


def test_classify_discriminants():
    rc = classify(CouplingPair(10, 1))
    assert rc.d_plus == pytest.approx(10 - FPT)
    assert rc.d_minus == pytest.approx(10 + 2 * FPT)
    d = rc.to_dict()
    assert d["regime"] == "stable" and set(d) == {"regime", "d_plus", "d_minus"}


def test_coupling_pair_rejects_non_finite():
    with pytest.raises(ValueError):
        CouplingPair(math.nan, 0.0)
    with pytest.raises(ValueError):
        CouplingPair(0.0, math.inf)


@settings(max_examples=50)
@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


def test_gaussian_functionals_closed_form():
    # oracle: analytic integrals of exp(-|x|^2) densities
    g = Grid.cube(48, 8.0)
    u = gaussian(g)
    rep = evaluate(g, u, CouplingPair(-2.0, 0.0))
    assert rep.mass == pytest.approx(math.pi**1.5, rel=1e-12)
    assert rep.A == pytest.approx(1.5 * math.pi**1.5, rel=1e-12)
    assert rep.quartic == pytest.approx((math.pi / 2) ** 1.5, rel=1e-12)
    assert rep.C == pytest.approx((math.pi / 3) ** 1.5, rel=1e-12)
    assert rep.B == pytest.approx(-2 * rep.quartic)
    assert rep.E == pytest.approx(0.5 * rep.A + 0.25 * rep.B - rep.C / 6)
    assert rep.Q == pytest.approx(rep.A + 0.75 * rep.B - rep.C)


def test_report_json_round_trip():
    rep = FunctionalReport(1.0, 2.0, 3.0, 0.5, -1.25, 0.1 + 0.2)
    text = rep.to_json()
    assert set(json.loads(text)) == {"mass", "A", "B", "C", "E", "Q"}
    back = FunctionalReport.from_json(text)
    assert (back.mass, back.A, back.B, back.C) == (rep.mass, rep.A, rep.B, rep.C)


def test_mass_scaling_of_terms():
    g = Grid.cube(32, 6.0)
    cp = CouplingPair(-1.0, 0.7)
    u = gaussian(g, (1.0, 1.2, 0.8))
    r1, r2 = evaluate(g, u, cp), evaluate(g, 2 * u, cp)
    assert r2.mass == pytest.approx(4 * r1.mass)
    assert r2.A == pytest.approx(4 * r1.A)
    assert r2.B == pytest.approx(16 * r1.B)
    assert r2.C == pytest.approx(64 * r1.C)


def test_dilation_scaling_with_gaussian_widths():
    # u^t = t^(3/2) u(t x): A ~ t^2, B ~ t^3, C ~ t^6, mass fixed
    # the truncated kernel removes the periodic-image part of B, which does
    # not scale with the state
    g = Grid.cube(96, 10.0, dipole_cutoff=10.0)
    cp = CouplingPair(-1.0, 0.5)
    w = np.array([1.0, 1.1, 1.4])
    t = 1.3
    r1 = evaluate(g, gaussian(g, w), cp)
    r2 = evaluate(g, t**1.5 * gaussian(g, w / t), cp)
    assert r2.mass == pytest.approx(r1.mass, rel=1e-10)
    assert r2.A == pytest.approx(t**2 * r1.A, rel=1e-10)
    assert r2.B == pytest.approx(t**3 * r1.B, rel=1e-10)
    assert r2.C == pytest.approx(t**6 * r1.C, rel=1e-10)


def test_phase_invariance():
    g = Grid.cube(16, 4.0)
    cp = CouplingPair(-1.0, 2.0)
    u = gaussian(g, (1.0, 0.8, 1.3))
    assert energy(g, np.exp(0.7j) * u, cp) == pytest.approx(energy(g, u, cp), rel=1e-13)


def test_gradient_directional_derivative():
    rng = np.random.default_rng(0)
    g = Grid.cube(16, 4.0)
    cp = CouplingPair(-3.0, 1.5)
    u = gaussian(g, (1.0, 0.9, 1.2)) * (1 + 0.1j * rng.standard_normal(g.shape))
    v = gaussian(g, (0.7, 1.0, 1.0)) * rng.standard_normal(g.shape)
    h = 1e-4
    fd = (energy(g, u + h * v, cp) - energy(g, u - h * v, cp)) / (2 * h)
    exact = np.sum((gradient(g, u, cp).conj() * v).real) * g.dV
    assert fd == pytest.approx(exact, rel=1e-7)


def test_rayleigh_beta_minimises_residual():
    g = Grid.cube(16, 4.0)
    cp = CouplingPair(-1.0, 0.0)
    u = gaussian(g)
    b = rayleigh_beta(g, u, cp)
    r0 = residual(g, u, b, cp)
    assert r0 <= residual(g, u, b + 1e-3, cp) and r0 <= residual(g, u, b - 1e-3, cp)


def test_input_errors():
    g = Grid.cube(8, 1.0)
    cp = CouplingPair(-1.0, 0.0)
    with pytest.raises(GridMismatchError):
        evaluate(g, np.ones((8, 8, 9)), cp)
    with pytest.raises(NumericalError):
        evaluate(g, np.full(g.shape, np.inf), cp)
    with pytest.raises(ValueError):
        rayleigh_beta(g, np.zeros(g.shape), cp)
    with pytest.raises(ValueError):
        residual(g, np.zeros(g.shape), 0.0, cp)
