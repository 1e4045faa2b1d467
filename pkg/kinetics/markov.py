"""
Memory kernel, Markovian limit and Monte-Carlo evaluators in 3D wavevector space.

The non-Markovian rate

    ∂t n(k1) = 4ε² ∫dk2 ∫dξ1 ∫₀ᵗ ds cos((t−s)Ω/2) [(n1+n2) n3 n4 − n1 n2 (n3+n4)]

(ξ2 = k1 + k2 − ξ1) tends, at fixed τ = ε² t and ε → 0, to the Markovian rate

    ∂τ n(k1) = 8π ∫dk2 ∫dξ1 ∫dξ2 δ(Ω) δ(ξ1 + ξ2 − k1 − k2) [...]

because ∫ψ(Ω)(2/Ω) sin(τΩ/(2ε²)) dΩ → 2πψ(0).
"""

import logging
import math
from typing import Callable, Dict, List, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import erf

from kinetics.cumulant import HistorySpectra, cubic_bracket, filon_weights
from kinetics.errors import DomainError, ParameterError
from kinetics.grid import Spectrum
from kinetics.sampling import McConfig, McEstimate, run_blocks

logger = logging.getLogger(__name__)

IsotropicEvaluator = Union[Spectrum, Callable[[np.ndarray], np.ndarray]]

# Errors below this are treated as converged in the Markov limit table
QUADRATURE_FLOOR = 1e-12


def memory_weight(tau, omega, coupling: float):
    """∫₀^τ (dσ/ε²) cos(σΩ/(2ε²)) = (2/Ω) sin(τΩ/(2ε²)), τ/ε² at Ω = 0"""
    if not coupling > 0.0:
        raise DomainError("coupling must be positive")
    omega = np.asarray(omega, dtype=float)
    rate = np.asarray(tau, dtype=float) / (2.0 * coupling ** 2)
    safe = np.where(omega == 0.0, 1.0, omega)
    out = np.where(omega == 0.0, 2.0 * rate, 2.0 / safe * np.sin(rate * omega))
    return float(out) if out.ndim == 0 else out


def smeared_delta_apply(psi: np.ndarray, omega_grid: np.ndarray, tau: float, coupling: float) -> float:
    """
    Trapezoidal value of ∫ ψ(Ω) memory_weight(τ, Ω, ε) dΩ.

    Args:
        psi: Test function sampled on omega_grid
        omega_grid: Grid symmetric about 0
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != omega_grid.shape:
        raise ParameterError("ψ and the Ω grid must have the same length")
    if not np.allclose(omega_grid, -omega_grid[::-1], rtol=0.0, atol=1e-12 * np.max(np.abs(omega_grid))):
        raise ParameterError("Ω grid must be symmetric about 0")
    return float(trapezoid(psi * memory_weight(tau, omega_grid, coupling), omega_grid))


def smeared_delta_exact_gaussian(tau: float, coupling: float) -> float:
    """Closed form for ψ = e^{−Ω²}: 2π erf(τ/(4ε²))"""
    return 2.0 * math.pi * float(erf(tau / (4.0 * coupling ** 2)))


def markov_limit_table(
    tau: float,
    couplings: Sequence[float],
    half_width: float = 10.0,
    points: int = 65537,
) -> List[Dict[str, float]]:
    """Gaussian ψ pushed through the memory kernel at each coupling, against 2πψ(0)"""
    grid = np.linspace(-half_width, half_width, int(points))
    psi = np.exp(-grid * grid)
    limit = 2.0 * math.pi
    rows = []
    for coupling in couplings:
        value = smeared_delta_apply(psi, grid, tau, coupling)
        rows.append(
            {
                "coupling": float(coupling),
                "value": value,
                "closed_form": smeared_delta_exact_gaussian(tau, coupling),
                "rel_error": abs(value - limit) / limit,
            }
        )
    return rows


def errors_converging(errors: Sequence[float], floor: float = QUADRATURE_FLOOR) -> bool:
    """Strictly decreasing until the floor is reached, never increasing past it"""
    for before, after in zip(errors[:-1], errors[1:]):
        if before <= floor and after <= floor:
            continue
        if not after < before:
            return False
    return True


def _evaluator(n: IsotropicEvaluator) -> Callable[[np.ndarray], np.ndarray]:
    evaluate = n.evaluate if isinstance(n, Spectrum) else n
    tiny = np.finfo(float).tiny
    return lambda eps: np.asarray(evaluate(np.maximum(eps, tiny)), dtype=float)


def _proposal_sigma(cfg: McConfig) -> float:
    return math.sqrt(2.0 * cfg.proposal_scale)


def _gaussian_density(x: np.ndarray, sigma: float) -> np.ndarray:
    r2 = np.sum(x * x, axis=1)
    return np.exp(-r2 / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma) ** 1.5


def _half_energy(x: np.ndarray) -> np.ndarray:
    return 0.5 * np.sum(x * x, axis=-1)


def markovian_rhs_mc(n: IsotropicEvaluator, k1: float, cfg: McConfig, threads: int = 1) -> McEstimate:
    """
    Markovian rate at |k1| by sampling the resonant manifold.

    k2 comes from an isotropic Gaussian; ξ1 is uniform on the sphere of
    centre P/2 and radius R = |k1 − k2|/2 that solves both deltas, with
    surface 4πR² and energy-delta Jacobian 1/(4R).
    """
    if not k1 > 0.0:
        raise DomainError("|k1| must be positive")
    evaluate = _evaluator(n)
    sigma = _proposal_sigma(cfg)
    k1v = np.array([0.0, 0.0, float(k1)])
    n1 = float(evaluate(np.array([0.5 * k1 * k1]))[0])

    def sampler(rng: np.random.Generator, size: int):
        k2 = rng.normal(scale=sigma, size=(size, 3))
        direction = rng.normal(size=(size, 3))
        direction /= np.linalg.norm(direction, axis=1)[:, None]
        total = k1v + k2
        radius = 0.5 * np.linalg.norm(k1v - k2, axis=1)
        xi1 = 0.5 * total + radius[:, None] * direction
        xi2 = total - xi1

        n2 = evaluate(_half_energy(k2))
        n3 = evaluate(_half_energy(xi1))
        n4 = evaluate(_half_energy(xi2))
        gain_loss = -cubic_bracket(n1, n2, n3, n4)

        admissible = radius > 0.0
        measure = math.pi * radius
        values = np.where(admissible, 8.0 * math.pi * measure * gain_loss / _gaussian_density(k2, sigma), 0.0)
        return float(np.sum(values)), float(np.sum(values * values)), int(np.count_nonzero(admissible))

    return run_blocks(sampler, cfg, threads)


def _time_nodes(h: HistorySpectra, t: float, steps: int) -> np.ndarray:
    nodes = np.linspace(0.0, t, int(steps) + 1)
    inner = h.times[(h.times > 0.0) & (h.times < t)]
    return np.unique(np.concatenate((nodes, inner)))


def nonmarkovian_rhs_mc(
    h: HistorySpectra, k1: float, t: float, coupling: float, cfg: McConfig, threads: int = 1
) -> McEstimate:
    """
    Non-Markovian rate ∂t n(|k1|, t) with the full memory integral.

    (k2, q) are drawn from isotropic Gaussians with ξ1 = (k1 + k2)/2 + q; the
    time integral is exact for brackets linear between the time nodes.
    """
    if not k1 > 0.0:
        raise DomainError("|k1| must be positive")
    if not (h.times[0] <= 0.0 <= t <= h.times[-1]):
        raise DomainError(f"history does not cover [0, {t}]")
    if t == 0.0:
        return McEstimate(0.0, 0.0, int(cfg.n_samples), int(cfg.n_samples), int(cfg.seed), float(cfg.proposal_scale))

    sigma = _proposal_sigma(cfg)
    k1v = np.array([0.0, 0.0, float(k1)])
    nodes = _time_nodes(h, t, cfg.time_quadrature_steps)
    slot = np.clip(np.searchsorted(h.times, nodes, side="right") - 1, 0, len(h.times) - 2)
    lam = (nodes - h.times[slot]) / (h.times[slot + 1] - h.times[slot])
    n1_hist = h.snapshot_values(np.array([0.5 * k1 * k1]))[:, 0]
    n1 = (1.0 - lam) * n1_hist[slot] + lam * n1_hist[slot + 1]
    prefactor = 4.0 * coupling * coupling

    def in_time(eps: np.ndarray) -> np.ndarray:
        """n at every time node, shape (samples, nodes)"""
        values = h.snapshot_values(np.maximum(eps, np.finfo(float).tiny))
        return ((1.0 - lam)[:, None] * values[slot] + lam[:, None] * values[slot + 1]).T

    def sampler(rng: np.random.Generator, size: int):
        k2 = rng.normal(scale=sigma, size=(size, 3))
        q = rng.normal(scale=sigma, size=(size, 3))
        xi1 = 0.5 * (k1v + k2) + q
        xi2 = k1v + k2 - xi1
        e2, e3, e4 = _half_energy(k2), _half_energy(xi1), _half_energy(xi2)
        omega = 2.0 * (0.5 * k1 * k1 + e2 - e3 - e4)

        b = cubic_bracket(n1[None, :], in_time(e2), in_time(e3), in_time(e4))
        w_left, w_right = filon_weights(nodes, 0.5 * omega, t)
        memory = np.sum(w_left * b[:, :-1] + w_right * b[:, 1:], axis=1)

        density = _gaussian_density(k2, sigma) * _gaussian_density(q, sigma)
        values = prefactor * (-np.real(memory)) / density
        return float(np.sum(values)), float(np.sum(values * values)), size

    return run_blocks(sampler, cfg, threads)


def nonmarkovian_rhs_tau_mc(
    h: HistorySpectra, k1: float, tau: float, coupling: float, cfg: McConfig, threads: int = 1
) -> McEstimate:
    """Rate in rescaled time τ = ε² t, the form that tends to markovian_rhs_mc"""
    if not coupling > 0.0:
        raise DomainError("coupling must be positive")
    t = tau / coupling ** 2
    return nonmarkovian_rhs_mc(h, k1, t, coupling, cfg, threads).scaled(1.0 / coupling ** 2)
