#!/usr/bin/env python3
"""
Tests for the Duhamel cumulant objects and breakdown arithmetic
"""

import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from kinetics.collision import rayleigh_jeans
from kinetics.cumulant import (
    G22_CONSTANT,
    FourWaveArgs,
    HistorySpectra,
    bracket_B,
    breakdown_report,
    breakdown_scales,
    breakdown_time,
    connected_fourth,
    crossover_exponent,
    cubic_bracket,
    delta_eval,
    filon_weights,
    g22_prefactor,
    hierarchy_scales,
    hierarchy_term_sizes,
    matching_h11,
    matching_hll,
    memory_integral,
    phase_bounded_nodes,
    rescale_variables,
    unrescale_variables,
)
from kinetics.errors import DomainError, ParameterError
from kinetics.grid import exponential_spectrum, make_log_grid

RADIUS = math.sqrt(5.0) / 2.0

# momentum conserving, Ω = 0.52
OFF_SHELL = FourWaveArgs([1.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.3, 0.2, 0.1], [0.7, 0.3, -0.1])
# momentum and energy conserving
ON_SHELL = FourWaveArgs([1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.5, 1.0, RADIUS], [0.5, 1.0, -RADIUS])


@pytest.fixture
def frozen_history():
    grid = make_log_grid(1e-4, 50.0, 64)
    return HistorySpectra.frozen(exponential_spectrum(grid, 1.0), 20.0)


def test_four_wave_args_geometry():
    assert np.allclose(OFF_SHELL.mismatch, 0.0)
    assert OFF_SHELL.omega == pytest.approx(0.52)
    assert ON_SHELL.omega == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(OFF_SHELL.energies, [0.5, 0.125, 0.07, 0.295])
    assert OFF_SHELL.swapped().omega == pytest.approx(-0.52)
    with pytest.raises(ParameterError):
        FourWaveArgs([1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])


def test_history_validation_and_time_interpolation():
    grid = make_log_grid(1e-2, 10.0, 16)
    a, b = exponential_spectrum(grid, 1.0), exponential_spectrum(grid, 3.0)
    h = HistorySpectra(np.array([0.0, 2.0]), (a, b))
    assert h.n(1.0, 1.0) == pytest.approx(2.0 * math.exp(-1.0))
    with pytest.raises(DomainError):
        h.n(1.0, 2.5)
    with pytest.raises(ParameterError):
        HistorySpectra(np.array([0.0, 0.0]), (a, b))
    with pytest.raises(ParameterError):
        HistorySpectra(np.array([0.0]), (a,))


def test_cubic_bracket_is_antisymmetric():
    assert cubic_bracket(1.0, 2.0, 3.0, 4.0) == -cubic_bracket(3.0, 4.0, 1.0, 2.0)
    assert cubic_bracket(1.0, 2.0, 3.0, 4.0) == pytest.approx(2.0 * 7.0 - 3.0 * 12.0)


def test_bracket_vanishes_on_shell_for_rayleigh_jeans():
    grid = make_log_grid(1e-4, 50.0, 64)
    rj = rayleigh_jeans(grid, 1.0, 0.1)
    scale = max(abs(v) for v in rj.evaluate(ON_SHELL.energies)) ** 3
    assert abs(bracket_B(rj, ON_SHELL)) <= 1e-14 * scale
    assert abs(bracket_B(rj, OFF_SHELL)) > 0.0


def test_delta_matches_frozen_closed_form(frozen_history):
    t = 7.0
    b = bracket_B(frozen_history, OFF_SHELL, 0.0)
    theta = OFF_SHELL.omega / 2.0
    expected = b * (np.exp(1j * theta * t) - 1.0) / (1j * theta)
    assert abs(delta_eval(frozen_history, OFF_SHELL, t) - expected) <= 1e-10 * abs(expected)


def test_delta_on_resonance_is_bracket_times_t(frozen_history):
    b = bracket_B(frozen_history, ON_SHELL, 0.0)
    value = delta_eval(frozen_history, ON_SHELL, 3.0)
    assert value.real == pytest.approx(3.0 * b, rel=1e-13)
    assert abs(value.imag) <= 1e-13 * abs(b)


def test_delta_under_exchange(frozen_history):
    forward = delta_eval(frozen_history, OFF_SHELL, 5.0)
    backward = delta_eval(frozen_history, OFF_SHELL.swapped(), 5.0)
    assert abs(backward + np.conj(forward)) <= 1e-12 * abs(forward)


@pytest.mark.parametrize("t", [7.0, 13.0, 19.0])
def test_delta_modulus_is_bounded_by_bracket_integral(t):
    grid = make_log_grid(1e-4, 50.0, 64)
    h = HistorySpectra(
        np.array([0.0, 10.0, 20.0]),
        (exponential_spectrum(grid, 1.0), exponential_spectrum(grid, 3.0), exponential_spectrum(grid, 0.5)),
    )
    for args in (OFF_SHELL, OFF_SHELL.swapped()):
        modulus = lambda s: abs(bracket_B(h, args, s))
        bound, _ = integrate.quad(modulus, 0.0, t, points=[10.0] if t > 10.0 else None, limit=200)
        assert abs(delta_eval(h, args, t)) <= bound * (1.0 + 1e-9)


def test_delta_at_time_zero_and_outside_history(frozen_history):
    assert delta_eval(frozen_history, OFF_SHELL, 0.0) == 0j
    with pytest.raises(DomainError):
        delta_eval(frozen_history, OFF_SHELL, 25.0)


@pytest.mark.parametrize("omega", [0.0, 0.3, 4.0, 60.0])
def test_memory_integral_exact_for_linear_bracket(omega):
    t = 2.5
    theta = omega / 2.0
    mpmath.mp.dps = 30
    oracle = mpmath.quad(lambda s: mpmath.expj(theta * (t - s)) * s, mpmath.linspace(0, t, 20))
    value = memory_integral(lambda s: s, omega, t)
    assert abs(value - complex(oracle)) <= 1e-12 * max(abs(complex(oracle)), 1.0)


def test_memory_integral_accepts_scalar_bracket():
    value = memory_integral(lambda s: 2.0, 0.0, 1.5)
    assert value == pytest.approx(3.0)


def test_phase_bound_and_knots():
    nodes = phase_bounded_nodes(10.0, 4.0, knots=[3.3, 12.0])
    assert nodes[0] == 0.0 and nodes[-1] == 10.0
    assert 3.3 in nodes
    assert np.max(np.diff(nodes)) * 2.0 <= 0.1 + 1e-12


def test_filon_weights_reduce_to_trapezoid():
    nodes = np.linspace(0.0, 1.0, 5)
    left, right = filon_weights(nodes, 0.0, 1.0)
    assert np.allclose(left, 0.125) and np.allclose(right, 0.125)


def test_g22_prefactor_is_linear_in_coupling(frozen_history):
    small = g22_prefactor(frozen_history, OFF_SHELL, 4.0, 0.1)
    large = g22_prefactor(frozen_history, OFF_SHELL, 4.0, 0.2)
    assert large.value == pytest.approx(2.0 * small.value, rel=1e-14)
    delta = delta_eval(frozen_history, OFF_SHELL, 4.0)
    assert small.value == pytest.approx(G22_CONSTANT * 0.1 * delta / 1j, rel=1e-14)
    assert small.constraint == "delta(k1+k2-xi1-xi2)"
    assert small.to_dict()["mismatch"] == pytest.approx([0.0, 0.0, 0.0], abs=1e-15)


def test_connected_fourth_vanishes_for_gaussian_moments():
    c = np.array([[1.0, 0.3 + 0.2j], [0.3 - 0.2j, 2.0]])
    gaussian = c[0, 0] * c[1, 1] + c[0, 1] * c[1, 0]
    assert abs(connected_fourth(gaussian, c)) <= 1e-15
    assert connected_fourth(gaussian + 0.5, c) == pytest.approx(0.5)


def test_breakdown_time_against_high_precision():
    mpmath.mp.dps = 40
    beta, eps = mpmath.mpf("1.068"), mpmath.mpf("1e-3")
    oracle = eps ** (2 / (1 + 2 * beta))
    value = breakdown_time(1.068, 1e-3)
    assert value == pytest.approx(float(oracle), rel=1e-12)
    assert abs(value - 0.0122105) <= 1e-6
    assert crossover_exponent(1.068) == pytest.approx(0.637755, abs=1e-6)


@pytest.mark.parametrize("beta, eps", [(0.0, 0.1), (1.0, 0.0), (1.0, 1.5)])
def test_breakdown_time_domain(beta, eps):
    with pytest.raises(DomainError):
        breakdown_time(beta, eps)


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_scales_coincide_at_breakdown_time(eps):
    report = breakdown_report(1.068, eps)
    assert report.scales_ratio == pytest.approx(1.0, rel=1e-12)
    first, second, third = report.hierarchy
    assert second == pytest.approx(first, rel=1e-12)
    assert third == pytest.approx(first, rel=1e-12)
    for order in (1, 2, 5):
        sizes = hierarchy_term_sizes(1.068, eps, report.tau_star, order)
        assert max(sizes) == pytest.approx(min(sizes), rel=1e-12)
    assert report.to_dict()["tau_star"] == report.tau_star


def test_nonlinear_terms_dominate_after_breakdown():
    tau_star = breakdown_time(1.068, 1e-3)
    transport, nonlinear, mixed = hierarchy_scales(1.068, 1e-3, 10.0 * tau_star)
    assert nonlinear > mixed > transport
    g22, f11sq = breakdown_scales(1.068, 1e-3, 0.1 * tau_star)
    assert g22 < f11sq


def test_rescaled_variables_round_trip():
    tau_star = breakdown_time(1.068, 1e-2)
    rescaled = rescale_variables(1.068, 1e-2, -tau_star, 0.7, 2)
    assert rescaled.sigma_bar == -1.0
    tau, k, norm = unrescale_variables(1.068, 1e-2, rescaled.sigma_bar, rescaled.p, 2)
    assert tau == pytest.approx(-tau_star, rel=1e-15)
    assert k == pytest.approx(0.7, rel=1e-15)
    assert norm == rescaled.normalization


def test_matching_data():
    big_phi = lambda z: np.exp(-np.asarray(z) ** 2)
    assert matching_h11(0.5, -1.0, big_phi, 1.068) == pytest.approx(math.exp(-0.25))
    assert matching_h11(0.5, -2.0, big_phi, 1.0) == pytest.approx(2.0 ** -3 * math.exp(-0.0625))
    with pytest.raises(DomainError):
        matching_h11(0.5, 0.0, big_phi)

    data = matching_hll(3, -1.0, big_phi, 1.068)
    assert len(data) == 6
    assert data.terms[0][1] == pytest.approx((2.0 * math.pi) ** 9)
    smooth = data.smooth_values([0.1, 0.2, 0.3])
    assert np.allclose(smooth, (2.0 * math.pi) ** 9 * math.exp(-0.14))
    custom = matching_hll(2, -1.0, big_phi, prefactor=1.0)
    assert all(coeff == 1.0 for _, coeff in custom.terms)
