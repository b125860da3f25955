"""Trace expansions, half-strip rebuilds, exponential decay-rate fits."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brokenguide.decay import (
    ContaminatedFitError,
    ModalTrace,
    _frame_points,
    default_slice_positions,
    fit_decay_rate,
    halfstrip_solution,
    halfstrip_tail_bound,
    trace_coefficients,
)
from brokenguide.fem import evaluate_field
from conftest import HALF_PI, cached_solve

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def mode(k, y):
    return SQRT_2_OVER_PI * np.sin(k * np.asarray(y))


# --- trace expansion ----------------------------------------------------------

def test_trace_of_plain_sine():
    trace = trace_coefficients(np.sin, order=8)
    assert trace.coefficients[0] == pytest.approx(math.sqrt(math.pi / 2.0), abs=1e-12)
    assert np.abs(trace.coefficients[1:]).max() <= 1e-10


def test_trace_of_third_mode_is_a_unit_vector():
    trace = trace_coefficients(lambda y: mode(3, y), order=8)
    assert trace.coefficients[2] == pytest.approx(1.0, rel=1e-12)
    others = np.delete(trace.coefficients, 2)
    assert np.abs(others).max() <= 1e-10


def test_trace_of_zero_field():
    trace = trace_coefficients(lambda y: np.zeros_like(y), order=5)
    assert (trace.coefficients == 0.0).all()
    assert trace.tail_weight_fraction() == 0.0


def test_trace_from_uniform_samples():
    y = np.linspace(0.0, math.pi, 401)
    trace = trace_coefficients(np.sin(y), order=8)
    assert trace.coefficients[0] == pytest.approx(math.sqrt(math.pi / 2.0), abs=1e-9)
    assert np.abs(trace.coefficients[1:]).max() <= 1e-9


def test_sampled_trace_validation():
    with pytest.raises(ValueError, match="odd number"):
        trace_coefficients(np.ones(10), order=2)
    with pytest.raises(ValueError, match="odd number"):
        trace_coefficients(np.ones(7), order=2)  # below 4*order+1
    with pytest.raises(ValueError):
        trace_coefficients(np.sin, order=0)


@given(
    amps=st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=1, max_size=6),
)
@settings(max_examples=30, deadline=None)
def test_parseval_for_mode_mixtures(amps):
    amps = np.asarray(amps)

    def g(y):
        return sum(a * mode(k, y) for k, a in enumerate(amps, start=1))

    trace = trace_coefficients(g, order=10)
    assert trace.norm_squared() == pytest.approx(float(amps @ amps), abs=1e-9)
    # and the quadrature of g^2 agrees (orthonormality of the mode family)
    y, w = np.polynomial.legendre.leggauss(64)
    y = 0.5 * math.pi * (y + 1.0)
    w = 0.5 * math.pi * w
    assert float(w @ (g(y) ** 2)) == pytest.approx(trace.norm_squared(), abs=1e-9)


def test_tail_weight_flags_underresolved_traces():
    low = ModalTrace(np.array([1.0, 0.1, 0.0, 0.0]), lam=0.5)
    assert low.tail_weight_fraction() < 0.01
    high = ModalTrace(np.array([0.0, 0.0, 0.1, 1.0]), lam=0.5)
    assert high.tail_weight_fraction() > 0.9


# --- half-strip rebuild ---------------------------------------------------------

def test_single_mode_rebuild_is_exact():
    lam = 0.6
    trace = ModalTrace(np.array([1.7]), lam=lam)
    y = np.linspace(0.1, 3.0, 7)
    at_interface = halfstrip_solution(trace, 0.0, y)
    assert np.allclose(at_interface, 1.7 * mode(1, y), atol=1e-14)
    x = 2.3
    expected = 1.7 * math.exp(-x * math.sqrt(1.0 - lam)) * mode(1, y)
    assert np.allclose(halfstrip_solution(trace, x, y), expected, atol=1e-14)


def test_rebuild_rejects_unbound_energies():
    with pytest.raises(ValueError):
        halfstrip_solution(ModalTrace(np.array([1.0]), lam=1.0), 0.5, np.array([1.0]))


def test_tail_bound_decreases_and_caps_the_remainder():
    trace = ModalTrace(np.array([0.5, 0.3, 0.2, 0.1]), lam=0.4)
    bounds = [halfstrip_tail_bound(trace, x) for x in (1.0, 2.0, 4.0)]
    assert bounds == sorted(bounds, reverse=True)
    assert bounds[-1] >= 0.0


# --- rate fitting -----------------------------------------------------------------

def test_fit_recovers_synthetic_rate():
    def field(pts):
        return np.exp(-0.5 * pts[:, 0]) * np.sin(pts[:, 1])

    fit = fit_decay_rate(field, 0.75, np.linspace(2.0, 12.0, 10))
    assert fit.rate == pytest.approx(0.5, abs=1e-6)
    assert fit.predicted_rate == pytest.approx(0.5, rel=1e-15)
    assert fit.fit_residual < 1e-8
    assert fit.n_slices == 10


def test_two_mode_field_converges_to_the_slow_rate():
    lam = 0.5
    r1, r2 = math.sqrt(1.0 - lam), math.sqrt(4.0 - lam)

    def field(pts):
        return np.exp(-r1 * pts[:, 0]) * mode(1, pts[:, 1]) + 0.5 * np.exp(-r2 * pts[:, 0]) * mode(2, pts[:, 1])

    fit = fit_decay_rate(field, lam, np.linspace(8.0, 20.0, 10))
    assert fit.rate == pytest.approx(r1, abs=1e-6)


def test_contaminated_window_is_rejected():
    # a non-decaying floor (e.g. artificial-boundary reflection) bends the
    # log-norm curve; the fit must refuse rather than return a blend
    def field(pts):
        return (np.exp(-0.5 * pts[:, 0]) + 0.3) * np.sin(pts[:, 1])

    with pytest.raises(ContaminatedFitError):
        fit_decay_rate(field, 0.75, np.linspace(0.0, 16.0, 12))


def test_fit_needs_enough_slices_and_decay():
    def field(pts):
        return np.exp(-0.5 * pts[:, 0]) * np.sin(pts[:, 1])

    with pytest.raises(ValueError, match="4"):
        fit_decay_rate(field, 0.75, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="decay"):
        fit_decay_rate(field, 1.2, [1.0, 2.0, 3.0, 4.0])


def test_default_window_clears_corner_and_truncation():
    pos = default_slice_positions(0.5 * HALF_PI, "ModelGuide", 5)
    length_in_strip_frame = 2.0 * 5 * math.pi / math.sin(2.0 * 0.5 * HALF_PI)
    assert pos[0] == pytest.approx(math.pi)
    assert pos[-1] == pytest.approx(length_in_strip_frame - math.pi)
    assert pos.size == 12

    wide = default_slice_positions(0.9 * HALF_PI, "ModelGuide", 5)
    assert wide[0] >= math.pi * math.tan(0.9 * HALF_PI) - 1e-12

    with pytest.raises(ValueError, match="too short"):
        default_slice_positions(0.5 * HALF_PI, "ReferenceStrip", 1)


# --- the full loop against a real eigenvector --------------------------------------

def _fem_field(theta=0.5 * HALF_PI, length=5, level=16, degree=6, nval=6):
    mesh, basis, system, result = cached_solve("ModelGuide", theta, length, level, degree, nval)
    coeffs = system.expand(result.eigenvectors[:, 0])

    def field(points):
        return evaluate_field(mesh, basis, coeffs, points, numbering=system.numbering)

    return field, float(result.eigenvalues[0])


def test_halfstrip_rebuild_matches_fem_field():
    theta = 0.5 * HALF_PI
    field, lam = _fem_field()
    *_, coarse = cached_solve("ModelGuide", theta, 5, 8, 6, 6)
    # eigenvector error in the energy norm scales like the square root of
    # the eigenvalue gap between refinements
    estimate = math.sqrt(max(float(coarse.eigenvalues[0]) - lam, 1e-16))

    y, w = np.polynomial.legendre.leggauss(64)
    y = 0.5 * math.pi * (y + 1.0)
    w = 0.5 * math.pi * w

    # Sampled trace: the discrete eigenvector has derivative kinks at
    # element crossings along the section, so the adaptive Gauss path
    # cannot settle to quadrature precision.  Simpson on a dense uniform
    # grid is the intended route for mesh-borne data.
    y_grid = np.linspace(0.0, math.pi, 801)
    samples = field(_frame_points(theta, "ModelGuide", 0.0, y_grid))
    trace = trace_coefficients(samples, order=50, lam=lam)
    assert trace.tail_weight_fraction() <= 0.01

    num, den = 0.0, 0.0
    for x in np.linspace(math.pi, 2 * 5 * math.pi / math.sin(2 * theta) - math.pi, 8):
        rebuilt = halfstrip_solution(trace, x, y)
        actual = field(_frame_points(theta, "ModelGuide", x, y))
        num += float(w @ (rebuilt - actual) ** 2)
        den += float(w @ actual**2)
    rel = math.sqrt(num / den)
    assert rel <= 5.0 * estimate, (rel, estimate)


def test_fitted_rate_sits_in_the_predicted_band():
    theta = 0.5 * HALF_PI
    field, lam = _fem_field()
    fit = fit_decay_rate(
        field, lam, default_slice_positions(theta, "ModelGuide", 5), theta=theta, formulation="ModelGuide"
    )
    predicted = math.sqrt(1.0 - lam)
    assert predicted - 0.05 <= fit.rate <= predicted + 0.05
