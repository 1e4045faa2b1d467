#!/usr/bin/env python3
"""
Tests for the energy grid, spectra and interpolation
"""

import numpy as np
import pytest

from kinetics.errors import DomainError, ParameterError
from kinetics.grid import (
    EnergyGrid,
    Spectrum,
    constant_spectrum,
    energy,
    exponential_spectrum,
    interp_loglog,
    make_log_grid,
    moment,
    particle_number,
    read_spectrum_csv,
    write_spectrum_csv,
)


def test_log_grid_endpoints_and_spacing():
    grid = make_log_grid(1e-4, 50.0, 256)
    assert grid.size == 256
    assert grid.eps_min == 1e-4
    assert grid.eps_max == 50.0
    ratios = grid.nodes[1:] / grid.nodes[:-1]
    assert np.allclose(ratios, ratios[0], rtol=1e-12)


def test_three_node_grid_is_geometric():
    grid = make_log_grid(1.0, 100.0, 3)
    assert np.allclose(grid.nodes, [1.0, 10.0, 100.0], rtol=1e-14)


@pytest.mark.parametrize("args", [(0.0, 1.0, 8), (1.0, 1.0, 8), (2.0, 1.0, 8), (1e-3, 1.0, 1), (1e-3, 1.0, 2.5)])
def test_log_grid_rejects_bad_parameters(args):
    with pytest.raises(ParameterError):
        make_log_grid(*args)


def test_weights_are_trapezoidal_box_widths(grid64):
    lower, upper = grid64.box_edges
    assert np.allclose(upper - lower, grid64.weights, rtol=1e-13)
    assert np.isclose(np.sum(grid64.weights), grid64.eps_max - grid64.eps_min, rtol=1e-13)


def test_from_nodes_rejects_unsorted_nodes():
    with pytest.raises(ParameterError):
        EnergyGrid.from_nodes(np.array([1.0, 3.0, 2.0]))


def test_interp_reproduces_power_law_exactly():
    grid = make_log_grid(1e-2, 1e2, 17)
    s = Spectrum(grid, grid.nodes ** -1.5)
    eps = np.array([0.0137, 0.5, 3.3, 77.0])
    assert np.allclose(interp_loglog(s, eps), eps ** -1.5, rtol=1e-12)


def test_interp_on_nodes_returns_values(grid64):
    s = exponential_spectrum(grid64).with_values(np.exp(-grid64.nodes))
    assert np.allclose(interp_loglog(s, grid64.nodes), s.values, rtol=1e-13)


def test_interp_tail_policy(grid64):
    s = Spectrum(grid64, np.exp(-grid64.nodes))
    assert interp_loglog(s, 1e-6) == s.values[0]
    assert interp_loglog(s, grid64.eps_max) == s.values[-1]
    assert interp_loglog(s, 2.0 * grid64.eps_max) == 0.0


def test_interp_falls_back_to_linear_for_zeros():
    grid = make_log_grid(1.0, 4.0, 3)
    s = Spectrum(grid, np.array([0.0, 2.0, 4.0]))
    assert interp_loglog(s, 1.5) == pytest.approx(1.0)


@pytest.mark.parametrize("eps", [0.0, -1.0])
def test_interp_rejects_nonpositive_energy(grid64, eps):
    s = Spectrum(grid64, np.ones(grid64.size))
    with pytest.raises(DomainError):
        interp_loglog(s, eps)


def test_moments_of_a_constant(grid256):
    s = constant_spectrum(grid256, 1.0)
    # trapezoid of a smooth integrand on a fine log grid
    assert particle_number(s) == pytest.approx((2.0 / 3.0) * (50.0 ** 1.5 - 1e-6), rel=1e-3)
    assert energy(s) == pytest.approx(0.4 * (50.0 ** 2.5 - 1e-10), rel=1e-3)
    assert moment(s, 0.0) == pytest.approx(50.0 - 1e-4, rel=1e-13)


def test_closed_form_spectrum_evaluates_exactly_off_grid(grid64):
    s = exponential_spectrum(grid64, 3.0)
    assert s.evaluate(0.123456) == pytest.approx(3.0 * np.exp(-0.123456), rel=1e-15)
    assert s.with_values(s.values).exact is None


def test_evaluate_inside_clamps_sampled_spectra(grid64):
    s = Spectrum(grid64, np.exp(-grid64.nodes))
    assert s.evaluate_inside(np.array([1e-9]))[0] == s.values[0]
    assert s.evaluate_inside(np.array([1e3]))[0] == s.values[-1]


def test_spectrum_rejects_wrong_length(grid64):
    with pytest.raises(ParameterError):
        Spectrum(grid64, np.ones(grid64.size - 1))


def test_csv_keeps_all_digits(tmp_path, grid64):
    s = Spectrum(grid64, np.exp(-grid64.nodes) / 3.0)
    path = write_spectrum_csv(tmp_path / "s.csv", s)
    assert path.read_text().splitlines()[0] == "epsilon,f"
    back = read_spectrum_csv(path)
    assert np.array_equal(back.grid.nodes, grid64.nodes)
    assert np.array_equal(back.values, s.values)


@pytest.mark.parametrize("q", [-4.0, -2.5, -1.0, 0.0, 0.5, 2.0])
def test_interp_is_exact_for_power_laws(q):
    grid = make_log_grid(1e-3, 1e3, 25)
    s = Spectrum(grid, grid.nodes ** q)
    eps = np.geomspace(1.1e-3, 0.9e3, 41)
    assert np.allclose(interp_loglog(s, eps), eps ** q, rtol=1e-12, atol=0.0)


def exponential_moment_errors(n_nodes: int):
    s = exponential_spectrum(make_log_grid(1e-4, 50.0, n_nodes), 1.0)
    # ∫ √ε e^{-ε} = Γ(3/2), ∫ ε^{3/2} e^{-ε} = Γ(5/2)
    n_exact = np.sqrt(np.pi) / 2.0
    e_exact = 3.0 * np.sqrt(np.pi) / 4.0
    return abs(particle_number(s) - n_exact) / n_exact, abs(energy(s) - e_exact) / e_exact


def test_moments_of_an_exponential():
    n_error, e_error = exponential_moment_errors(256)
    assert n_error <= 2e-3
    assert e_error <= 2e-3


def test_moment_errors_shrink_under_refinement():
    coarse = exponential_moment_errors(256)
    fine = exponential_moment_errors(512)
    # second order: about a quarter per doubling
    assert fine[0] <= 0.3 * coarse[0]
    assert fine[1] <= 0.3 * coarse[1]


def test_moments_are_linear(grid64):
    a = exponential_spectrum(grid64, 1.0)
    b = Spectrum(grid64, 1.0 / (1.0 + grid64.nodes))
    mixed = Spectrum(grid64, 2.0 * a.values - 0.5 * b.values)
    for p in (0.0, 0.5, 1.5):
        expected = 2.0 * moment(a, p) - 0.5 * moment(b, p)
        assert moment(mixed, p) == pytest.approx(expected, rel=1e-12)
