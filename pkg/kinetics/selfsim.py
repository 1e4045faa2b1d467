"""
Self-similar blow-up: ansatz arithmetic, profile collapse and exponent fits.

Near the blow-up time T* the spectrum follows

    f(ε, t) = √(2β) (T* − t)^{−α} φ(ε / (T* − t)^{2β}),   φ(ω) ~ A ω^{−ν}

with α − 2β = 1/2 and ν = α/(2β), so one exponent fixes the other two.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from kinetics.collision import KernelParams, collision_rhs
from kinetics.errors import DomainError, FitError, NotAsymptoticError, ParameterError
from kinetics.evolve import TrajectoryRecord, estimate_blowup_time
from kinetics.grid import EnergyGrid, Spectrum, interp_loglog

logger = logging.getLogger(__name__)

DEFAULT_NU = 1.234
TAIL_WINDOW = (10.0, 1e3)
COLLAPSE_WINDOW = (0.1, 1e3)
# log-uniform T* − t levels compared across the final decade
DECADE_SAMPLES = 6


@dataclass(frozen=True)
class SelfSimExponents:
    """(α, β, ν) with α − 2β = 1/2 and ν = α/(2β); β is the wavevector exponent"""

    alpha: float
    beta: float
    nu: float

    @property
    def two_beta(self) -> float:
        return 2.0 * self.beta

    def as_dict(self) -> Dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta, "two_beta": self.two_beta, "nu": self.nu}


def exponents_from_nu(nu: float) -> SelfSimExponents:
    """2β = 1/(2(ν − 1)), α = ν/(2(ν − 1))"""
    if not nu > 1.0:
        raise DomainError(f"tail exponent must exceed 1, got {nu}")
    two_beta = 1.0 / (2.0 * (nu - 1.0))
    return SelfSimExponents(alpha=two_beta + 0.5, beta=0.5 * two_beta, nu=nu)


def exponents_from_beta(beta: float) -> SelfSimExponents:
    """Inverse relation: α = 2β + 1/2, ν = α/(2β)"""
    if not beta > 0.0:
        raise DomainError(f"β must be positive, got {beta}")
    alpha = 2.0 * beta + 0.5
    return SelfSimExponents(alpha=alpha, beta=beta, nu=alpha / (2.0 * beta))


def forward_ansatz(
    phi: Spectrum, grid: EnergyGrid, t: float, t_star: float, exps: SelfSimExponents
) -> Spectrum:
    """f(ε, t) on grid built from the profile φ"""
    tau = t_star - t
    if not tau > 0.0:
        raise DomainError("ansatz is defined for t < T*")
    amplitude = np.sqrt(exps.two_beta) * tau ** (-exps.alpha)
    stretch = tau ** exps.two_beta

    def f(eps: np.ndarray) -> np.ndarray:
        return amplitude * phi.evaluate(eps / stretch)

    if phi.exact is not None:
        return Spectrum(grid, f(grid.nodes), exact=f)
    return Spectrum(grid, f(grid.nodes))


def rescale_snapshot(s: Spectrum, t: float, t_star: float, exps: SelfSimExponents) -> Spectrum:
    """
    Profile φ on the ω-grid ω_i = ε_i/(T* − t)^{2β}.

    Returns:
        Spectrum on an "omega" grid with φ_i = f_i (T* − t)^α / √(2β)
    """
    tau = t_star - t
    if not tau > 0.0:
        raise DomainError(f"snapshot time {t} is not before T* = {t_star}")
    omega = s.grid.nodes / tau ** exps.two_beta
    values = s.values * tau ** exps.alpha / np.sqrt(exps.two_beta)
    return Spectrum(EnergyGrid.from_nodes(omega, kind="omega"), values)


def profile_in_k(phi: Spectrum, beta: float) -> Callable[[np.ndarray], np.ndarray]:
    """Wavevector profile Φ(z) = √(2β) φ(z²/2)"""
    scale = np.sqrt(2.0 * beta)

    def big_phi(z):
        z = np.asarray(z, dtype=float)
        return scale * phi.evaluate(np.maximum(0.5 * z * z, np.finfo(float).tiny))

    return big_phi


def ansatz_n(big_phi: Callable, beta: float, minus_tau: float, k):
    """n(k, τ) = (−τ)^{−2β−1/2} Φ(k/(−τ)^β)"""
    if not minus_tau > 0.0:
        raise DomainError("need −τ > 0")
    return minus_tau ** (-2.0 * beta - 0.5) * big_phi(np.asarray(k, dtype=float) / minus_tau ** beta)


@dataclass(frozen=True)
class TailFit:
    nu: float
    amplitude: float
    stderr: float
    n_points: int
    window: Tuple[float, float]


def fit_tail_exponent(profile: Spectrum, window: Tuple[float, float] = TAIL_WINDOW) -> TailFit:
    """
    Linear regression of log φ on log ω over the window.

    Raises:
        FitError: fewer than 8 nodes in the window, or non-positive values
    """
    lo, hi = window
    omega = profile.grid.nodes
    inside = (omega >= lo) & (omega <= hi)
    if np.count_nonzero(inside) < 8:
        raise FitError(f"tail window [{lo:g}, {hi:g}] holds fewer than 8 nodes")
    phi = profile.values[inside]
    if np.any(phi <= 0.0):
        raise FitError("non-positive profile values inside the tail window")
    fit = stats.linregress(np.log(omega[inside]), np.log(phi))
    return TailFit(
        nu=float(-fit.slope),
        amplitude=float(np.exp(fit.intercept)),
        stderr=float(fit.stderr),
        n_points=int(np.count_nonzero(inside)),
        window=(float(lo), float(hi)),
    )


def collapse_error(
    previous: Spectrum, current: Spectrum, window: Tuple[float, float] = COLLAPSE_WINDOW
) -> float:
    """Relative L² distance of two profiles over the window, measured in log ω"""
    lo = max(window[0], previous.grid.nodes[0], current.grid.nodes[0])
    hi = min(window[1], previous.grid.nodes[-1], current.grid.nodes[-1])
    omega = current.grid.nodes
    inside = (omega >= lo) & (omega <= hi)
    if np.count_nonzero(inside) < 2:
        raise FitError("profiles share fewer than 2 nodes inside the collapse window")
    x = np.log(omega[inside])
    b = current.values[inside]
    a = interp_loglog(previous, omega[inside])
    norm = trapezoid(b * b, x)
    if norm <= 0.0:
        raise FitError("profile vanishes on the collapse window")
    return float(np.sqrt(trapezoid((a - b) ** 2, x) / norm))


def selfsim_residual(
    phi: Spectrum, nu: float, params: Optional[KernelParams] = None, threads: int = 1
) -> Spectrum:
    """νφ + ωφ_ω − C[φ] at every ω node, on the grid of φ"""
    omega = phi.grid.nodes
    slope = np.gradient(phi.values, omega, edge_order=1)
    return Spectrum(phi.grid, nu * phi.values + omega * slope - collision_rhs(phi, params, threads))


@dataclass(frozen=True)
class PeakFit:
    two_beta: float
    stderr: float
    n_points: int


def _knee_position(s: Spectrum) -> float:
    """argmax of ε·f with a parabolic refinement in log ε"""
    x = np.log(s.grid.nodes)
    y = s.grid.nodes * s.values
    i = int(np.argmax(y))
    if 0 < i < len(y) - 1 and np.all(y[i - 1 : i + 2] > 0.0):
        ly = np.log(y[i - 1 : i + 2])
        denom = ly[0] - 2.0 * ly[1] + ly[2]
        if denom < 0.0:
            h = x[i + 1] - x[i]
            return float(np.exp(x[i] + 0.5 * h * (ly[0] - ly[2]) / denom))
    return float(s.grid.nodes[i])


def fit_peak_exponent(rec: TrajectoryRecord, t_star: float, indices: Sequence[int]) -> PeakFit:
    """2β from the knee scaling argmax_ε ε·f ∝ (T* − t)^{2β}"""
    if len(indices) < 3:
        raise FitError("need at least 3 snapshots for the peak scaling fit")
    tau = np.array([t_star - rec.times[i] for i in indices])
    if np.any(tau <= 0.0):
        raise DomainError("snapshots must precede T*")
    knees = np.array([_knee_position(rec.snapshots[i]) for i in indices])
    fit = stats.linregress(np.log(tau), np.log(knees))
    return PeakFit(two_beta=float(fit.slope), stderr=float(fit.stderr), n_points=len(indices))


@dataclass
class ProfileFit:
    """Result of the self-similar fitting pipeline"""

    t_star: float
    nu_fit: float
    amplitude: float
    exponents: SelfSimExponents
    collapse_errors: List[float]
    collapse_times: List[float]
    tail_window: Tuple[float, float]
    collapse_window: Tuple[float, float]
    blowup_residual: float
    tail_stderr: float
    profile: Spectrum
    peak_two_beta: Optional[float] = None
    history: List[Dict[str, float]] = field(default_factory=list)

    @property
    def collapse_error(self) -> float:
        return self.collapse_errors[-1] if self.collapse_errors else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t_star": self.t_star,
            "nu_fit": self.nu_fit,
            "alpha": self.exponents.alpha,
            "two_beta": self.exponents.two_beta,
            "beta": self.exponents.beta,
            "A": self.amplitude,
            "tail_stderr": self.tail_stderr,
            "collapse_error": self.collapse_error,
            "collapse_errors": list(self.collapse_errors),
            "collapse_times": list(self.collapse_times),
            "windows": {"tail": list(self.tail_window), "collapse": list(self.collapse_window)},
            "blowup_fit_residual": self.blowup_residual,
            "peak_two_beta": self.peak_two_beta,
            "iterations": list(self.history),
        }


def final_decade(rec: TrajectoryRecord, t_star: float, samples: Optional[int] = DECADE_SAMPLES) -> List[int]:
    """
    Snapshot indices with T* − t within a factor 10 of the last one (at least 2).

    With samples set, keeps the snapshots nearest to `samples` log-uniform
    levels of T* − t, so consecutive pairs are equally far apart in log τ.
    """
    tau = t_star - np.asarray(rec.times)
    last = tau[-1]
    idx = [i for i in range(len(tau)) if 0.0 < tau[i] <= 10.0 * last]
    if len(idx) < 2:
        return list(range(max(0, len(tau) - 2), len(tau)))
    if samples is None or len(idx) <= samples:
        return idx
    log_tau = np.log(tau[idx])
    levels = np.log(last) + np.log(10.0) * np.linspace(1.0, 0.0, samples)
    picked = {idx[int(np.argmin(np.abs(log_tau - level)))] for level in levels}
    return sorted(picked)


def fit_selfsim(
    rec: TrajectoryRecord,
    nu_guess: float = DEFAULT_NU,
    iterations: int = 2,
    tail_window: Tuple[float, float] = TAIL_WINDOW,
    collapse_window: Tuple[float, float] = COLLAPSE_WINDOW,
) -> ProfileFit:
    """
    Fit T*, ν and the collapsed profile from a blow-up trajectory.

    T* is extrapolated with α from the current ν, the last snapshot is
    rescaled, ν is refit from its tail and α recomputed; this repeats a fixed
    number of times.

    Raises:
        NotAsymptoticError: trajectory never entered the blow-up regime
        FitError: tail fit failed
    """
    if iterations < 1:
        raise ParameterError("need at least one iteration")
    exps = exponents_from_nu(nu_guess)
    history = []
    for _ in range(iterations):
        estimate = estimate_blowup_time(rec, exps.alpha)
        if not estimate.t_star > rec.times[-1]:
            raise NotAsymptoticError("extrapolated blow-up time precedes the last snapshot")
        profile = rescale_snapshot(rec.snapshots[-1], rec.times[-1], estimate.t_star, exps)
        tail = fit_tail_exponent(profile, tail_window)
        if not tail.nu > 1.0:
            raise FitError(f"fitted tail exponent {tail.nu:.4f} does not exceed 1")
        exps = exponents_from_nu(tail.nu)
        history.append({"t_star": estimate.t_star, "nu": tail.nu, "alpha": exps.alpha})
        logger.info("self-similar iteration: T*=%.9g nu=%.6f", estimate.t_star, tail.nu)

    t_star = estimate.t_star
    profile = rescale_snapshot(rec.snapshots[-1], rec.times[-1], t_star, exps)
    decade = final_decade(rec, t_star)
    profiles = [rescale_snapshot(rec.snapshots[i], rec.times[i], t_star, exps) for i in decade]
    errors = [collapse_error(p, q, collapse_window) for p, q in zip(profiles[:-1], profiles[1:])]

    peak = None
    try:
        peak = fit_peak_exponent(rec, t_star, decade).two_beta
    except (FitError, DomainError) as e:
        logger.warning("peak scaling fit skipped: %s", e)

    return ProfileFit(
        t_star=t_star,
        nu_fit=tail.nu,
        amplitude=tail.amplitude,
        exponents=exps,
        collapse_errors=errors,
        collapse_times=[rec.times[i] for i in decade[1:]],
        tail_window=tuple(tail_window),
        collapse_window=tuple(collapse_window),
        blowup_residual=estimate.residual,
        tail_stderr=tail.stderr,
        profile=profile,
        peak_two_beta=peak,
        history=history,
    )
