#!/usr/bin/env python3
"""
Tests for the isotropic collision operator
"""

import numpy as np
import pytest

from kinetics.collision import (
    DEFAULT_GAMMA,
    K_SPACE_GAMMA,
    KernelParams,
    collision_moments,
    collision_rhs,
    collision_rhs_at,
    conservative_rhs,
    conserve_moments,
    kernel_w,
    rayleigh_jeans,
)
from kinetics.errors import DomainError
from kinetics.grid import Spectrum, constant_spectrum, exponential_spectrum, make_log_grid, moment


def cubic_scale(s: Spectrum, params: KernelParams = KernelParams()) -> float:
    return params.gamma * s.sup ** 3 * s.grid.eps_max ** 2


def test_kernel_w_values():
    assert kernel_w(1.0, 2.0, 3.0, 4.0) == 1.0
    assert kernel_w(4.0, 1.0, 4.0, 1.0) == pytest.approx(0.5)
    assert kernel_w(1.0, 0.0, 0.5, 0.5) == 0.0


def test_kernel_w_domain():
    with pytest.raises(DomainError):
        kernel_w(0.0, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        kernel_w(1.0, -0.5, 0.25, 0.25)


def test_kernel_w_broadcasts():
    w = kernel_w(np.array([1.0, 4.0]), np.array([2.0, 1.0]), np.array([3.0, 4.0]), np.array([4.0, 1.0]))
    assert np.allclose(w, [1.0, 0.5])


def test_gamma_constants():
    assert DEFAULT_GAMMA == pytest.approx(1.0 / (8.0 * np.pi ** 6))
    assert KernelParams.k_space().gamma == pytest.approx(32.0 * np.pi ** 3)
    assert K_SPACE_GAMMA / DEFAULT_GAMMA == pytest.approx(256.0 * np.pi ** 9)


def test_zero_spectrum_gives_zero(grid64):
    s = Spectrum(grid64, np.zeros(grid64.size))
    assert np.all(collision_rhs(s) == 0.0)


def test_constant_spectrum_is_annihilated(grid256):
    s = constant_spectrum(grid256, 1.0)
    rate = collision_rhs(s)
    assert np.max(np.abs(rate)) <= 1e-10 * cubic_scale(s)


def test_rayleigh_jeans_is_annihilated(grid256):
    s = rayleigh_jeans(grid256, temperature=1.0, mu=0.1)
    rate = collision_rhs(s)
    assert np.max(np.abs(rate)) <= 1e-10 * cubic_scale(s)


def test_rate_scales_cubically_and_linearly_in_gamma(grid64):
    s = exponential_spectrum(grid64, 1.0)
    base = collision_rhs(s)
    tripled = collision_rhs(exponential_spectrum(grid64, 3.0))
    assert np.allclose(tripled, 27.0 * base, rtol=1e-12, atol=1e-300)
    doubled = collision_rhs(s, KernelParams(2.0 * DEFAULT_GAMMA))
    assert np.allclose(doubled, 2.0 * base, rtol=1e-14, atol=0.0)


def test_off_grid_rate_matches_node_rate(grid64):
    s = exponential_spectrum(grid64, 1.0)
    node = grid64.nodes[20]
    assert collision_rhs_at(s, node) == collision_rhs(s)[20]


def test_rate_rejects_nonpositive_energy(grid64):
    with pytest.raises(DomainError):
        collision_rhs_at(exponential_spectrum(grid64), 0.0)


def test_thread_count_does_not_change_result(grid64):
    s = exponential_spectrum(grid64, 2.0)
    assert np.array_equal(collision_rhs(s, threads=1), collision_rhs(s, threads=4))


def relative_drifts(n_nodes: int):
    s = exponential_spectrum(make_log_grid(1e-4, 50.0, n_nodes), 1.0)
    d_n, d_e, abs_n, abs_e = collision_moments(s)
    assert abs_n > 0.0 and abs_e > 0.0
    return abs(d_n) / abs_n, abs(d_e) / abs_e


def test_conservation_monitor_is_small_for_smooth_data():
    n_drift, e_drift = relative_drifts(512)
    assert n_drift <= 1e-2
    assert e_drift <= 1e-2


def test_conservation_monitor_shrinks_under_refinement():
    coarse = relative_drifts(256)
    fine = relative_drifts(512)
    assert fine[0] <= 0.5 * coarse[0]
    assert fine[1] <= 0.5 * coarse[1]


def test_conservative_projection_fixes_grid_moments(grid256):
    s = exponential_spectrum(grid256, 2.0)
    raw = collision_rhs(s)
    rate = conservative_rhs(s)
    for p in (0.5, 1.5):
        scale = moment(Spectrum(grid256, np.abs(raw)), p)
        assert abs(moment(Spectrum(grid256, rate), p)) <= 1e-12 * scale
    # the correction is of the size of the discretization leak
    change = moment(Spectrum(grid256, np.abs(rate - raw)), 0.5)
    assert change <= 0.1 * moment(Spectrum(grid256, np.abs(raw)), 0.5)


def test_conservative_projection_leaves_equilibria_alone(grid64):
    s = constant_spectrum(grid64, 1.0)
    assert np.array_equal(conservative_rhs(s), collision_rhs(s))
    zero = Spectrum(grid64, np.zeros(grid64.size))
    assert np.all(conserve_moments(zero, np.ones(grid64.size)) == 1.0)


def test_exponential_rate_has_gain_at_low_energy(grid64):
    # cascades fill small energies for an e^{-ε} spectrum
    s = exponential_spectrum(grid64, 1.0)
    assert collision_rhs_at(s, grid64.nodes[0]) > 0.0
