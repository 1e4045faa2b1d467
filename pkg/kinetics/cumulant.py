"""
Duhamel cumulant objects and closure-breakdown diagnostics.

The smooth part of the fourth-order cumulant is driven by

    Δ(k1, k2; ξ1, ξ2; t) = ∫₀ᵗ e^{i(t−s)Ω/2} B(s) ds,   Ω = |k1|² + |k2|² − |ξ1|² − |ξ2|²

with the cubic bracket B = n1 n2 (n3 + n4) − (n1 + n2) n3 n4. Dirac factors
are never evaluated; values that carry one are returned as TaggedValue with
the constraint recorded as text plus the numeric mismatch vector.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from kinetics.errors import DomainError, ParameterError
from kinetics.grid import Spectrum
from kinetics.wick import DeltaProductSum, all_permutations

DEFAULT_BETA = 1.068

# Largest phase advance of one quadrature piece, in radians
MAX_PHASE_STEP = 0.1


@dataclass(frozen=True, eq=False)
class FourWaveArgs:
    """Wavevectors (k1, k2; ξ1, ξ2) of a four-wave interaction"""

    k1: np.ndarray
    k2: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray

    def __post_init__(self):
        for name in ("k1", "k2", "xi1", "xi2"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (3,):
                raise ParameterError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, vec)

    @property
    def mismatch(self) -> np.ndarray:
        """k1 + k2 − ξ1 − ξ2, the argument of the momentum delta"""
        return self.k1 + self.k2 - self.xi1 - self.xi2

    @property
    def omega(self) -> float:
        return float(
            self.k1 @ self.k1 + self.k2 @ self.k2 - self.xi1 @ self.xi1 - self.xi2 @ self.xi2
        )

    @property
    def energies(self) -> np.ndarray:
        """ε = |k|²/2 for (k1, k2, ξ1, ξ2)"""
        vecs = np.stack((self.k1, self.k2, self.xi1, self.xi2))
        return 0.5 * np.sum(vecs * vecs, axis=1)

    def swapped(self) -> "FourWaveArgs":
        return FourWaveArgs(self.xi1, self.xi2, self.k1, self.k2)


@dataclass(frozen=True, eq=False)
class HistorySpectra:
    """Time-stamped isotropic spectra, linear in time between samples"""

    times: np.ndarray
    spectra: Tuple[Spectrum, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) < 2:
            raise ParameterError("history needs at least two samples")
        if np.any(np.diff(times) <= 0.0):
            raise ParameterError("history times must be strictly increasing")
        if len(self.spectra) != len(times):
            raise ParameterError("one spectrum per history time is required")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "spectra", tuple(self.spectra))

    @classmethod
    def frozen(cls, spectrum: Spectrum, t_end: float) -> "HistorySpectra":
        """Constant-in-time history on [0, t_end]"""
        return cls(np.array([0.0, float(t_end)]), (spectrum, spectrum))

    def covers(self, s) -> bool:
        s = np.asarray(s, dtype=float)
        return bool(np.all((s >= self.times[0]) & (s <= self.times[-1])))

    def snapshot_values(self, eps: np.ndarray) -> np.ndarray:
        """n at the given energies for every stored time, shape (J,) + eps.shape"""
        return np.stack([np.asarray(sp.evaluate(eps), dtype=float) for sp in self.spectra])

    def n(self, eps, s):
        """n(ε, s) with linear interpolation in time"""
        if not self.covers(s):
            raise DomainError(f"time {s} outside history [{self.times[0]}, {self.times[-1]}]")
        values = self.snapshot_values(np.atleast_1d(np.asarray(eps, dtype=float)))
        out = np.array([np.interp(s, self.times, column) for column in values.T])
        return out if np.ndim(eps) else out[0]


@dataclass(frozen=True)
class TaggedValue:
    """Smooth prefactor of a distribution; the Dirac factor is metadata"""

    value: complex
    constraint: str
    mismatch: Tuple[float, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "real": float(np.real(self.value)),
            "imag": float(np.imag(self.value)),
            "constraint": self.constraint,
            "mismatch": list(self.mismatch),
        }


IsotropicSource = Union[HistorySpectra, Spectrum, Callable[[np.ndarray], np.ndarray]]


def cubic_bracket(n1, n2, n3, n4):
    """B = n1 n2 (n3 + n4) − (n1 + n2) n3 n4"""
    return n1 * n2 * (n3 + n4) - (n1 + n2) * n3 * n4


def bracket_B(n: IsotropicSource, args: FourWaveArgs, s=0.0):
    """
    Cubic bracket at time s.

    Args:
        n: HistorySpectra (interpolated in s), or a single isotropic spectrum
        args: Wavevectors
        s: Time, scalar or array

    Raises:
        DomainError: s outside the history
    """
    eps = args.energies
    if isinstance(n, HistorySpectra):
        if not n.covers(s):
            raise DomainError(f"time outside history [{n.times[0]}, {n.times[-1]}]")
        values = n.snapshot_values(eps)
        n1, n2, n3, n4 = (np.interp(s, n.times, values[:, j]) for j in range(4))
    else:
        evaluate = n.evaluate if isinstance(n, Spectrum) else n
        n1, n2, n3, n4 = np.asarray(evaluate(eps), dtype=float)
    return cubic_bracket(n1, n2, n3, n4)


def _expm1_over_z(z: np.ndarray) -> np.ndarray:
    """(e^z − 1)/z, series near 0"""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5
    out = np.empty_like(z)
    zs = z[small]
    term = np.ones_like(zs)
    acc = np.zeros_like(zs)
    for n in range(20):
        acc = acc + term
        term = term * zs / (n + 2)
    out[small] = acc
    zl = z[~small]
    out[~small] = (np.exp(zl) - 1.0) / zl
    return out


def _ramp_over_z2(z: np.ndarray) -> np.ndarray:
    """(z e^z − e^z + 1)/z², series near 0"""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5
    out = np.empty_like(z)
    zs = z[small]
    acc = np.zeros_like(zs)
    power = np.ones_like(zs)
    for n in range(20):
        acc = acc + power * (n + 1) / math.factorial(n + 2)
        power = power * zs
    out[small] = acc
    zl = z[~small]
    out[~small] = (zl * np.exp(zl) - np.exp(zl) + 1.0) / (zl * zl)
    return out


def filon_weights(nodes: np.ndarray, theta, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weights of ∫ e^{iθ(t−s)} b(s) ds for b linear between nodes.

    Returns:
        (w_left, w_right) per piece; the integral is Σ w_left b_a + w_right b_b.
        theta may be an array, giving weights of shape theta.shape + (pieces,).
    """
    theta = np.asarray(theta, dtype=float)[..., None]
    h = np.diff(nodes)
    z = -1j * theta * h
    phase = np.exp(1j * theta * (t - nodes[:-1])) * h
    e1 = _expm1_over_z(z)
    e2 = _ramp_over_z2(z)
    return phase * (e1 - e2), phase * e2


def phase_bounded_nodes(t: float, omega: float, knots: Optional[Sequence[float]] = None,
                        max_phase_step: float = MAX_PHASE_STEP) -> np.ndarray:
    """Nodes on [0, t] containing the knots, with |Ω| Δs / 2 ≤ max_phase_step"""
    base = [0.0, float(t)]
    if knots is not None:
        base += [float(k) for k in knots if 0.0 < k < t]
    base = np.unique(base)
    theta = abs(omega) / 2.0
    pieces = []
    for a, b in zip(base[:-1], base[1:]):
        m = max(1, int(math.ceil(theta * (b - a) / max_phase_step)))
        pieces.append(np.linspace(a, b, m + 1)[:-1])
    pieces.append([base[-1]])
    return np.concatenate(pieces)


def memory_integral(
    bracket: Callable[[np.ndarray], np.ndarray],
    omega: float,
    t: float,
    knots: Optional[Sequence[float]] = None,
    max_phase_step: float = MAX_PHASE_STEP,
) -> complex:
    """
    ∫₀ᵗ e^{i(t−s)Ω/2} b(s) ds.

    The exponential is integrated exactly against the piecewise-linear
    interpolant of b, so constant and linear brackets are reproduced to
    roundoff. Pieces follow the knots and keep the phase advance per piece
    below max_phase_step.
    """
    if t < 0.0:
        raise DomainError("integration time must be non-negative")
    if t == 0.0:
        return 0j
    nodes = phase_bounded_nodes(t, omega, knots, max_phase_step)
    values = np.broadcast_to(np.asarray(bracket(nodes), dtype=float), nodes.shape)
    w_left, w_right = filon_weights(nodes, omega / 2.0, t)
    return complex(np.sum(w_left * values[:-1] + w_right * values[1:]))


def _check_window(h: HistorySpectra, t: float) -> None:
    if not (h.times[0] <= 0.0 <= t <= h.times[-1]):
        raise DomainError(f"history [{h.times[0]}, {h.times[-1]}] does not cover [0, {t}]")


def delta_eval(h: HistorySpectra, args: FourWaveArgs, t: float) -> complex:
    """Δ(k1, k2; ξ1, ξ2; t) from the spectrum history"""
    _check_window(h, t)
    return memory_integral(lambda s: bracket_B(h, args, s), args.omega, t, knots=h.times)


G22_CONSTANT = 2.0 * (2.0 * math.pi) ** 4.5


def g22_prefactor(h: HistorySpectra, args: FourWaveArgs, t: float, coupling: float) -> TaggedValue:
    """Smooth part (2(2π)^{9/2} ε / i) Δ of the fourth-order cumulant"""
    delta = delta_eval(h, args, t)
    return TaggedValue(
        value=complex(G22_CONSTANT * coupling / 1j * delta),
        constraint="delta(k1+k2-xi1-xi2)",
        mismatch=tuple(float(v) for v in args.mismatch),
    )


def connected_fourth(m4: complex, pair: np.ndarray) -> complex:
    """
    Cumulant G₂,₂ = F₂,₂ − (F₁,₁F₁,₁ + F₁,₁F₁,₁) for a 2×2 pair-correlation matrix.

    Vanishes for Gaussian fields.
    """
    c = np.asarray(pair, dtype=complex)
    if c.shape != (2, 2):
        raise ParameterError("pair correlations must form a 2x2 matrix")
    return complex(m4 - c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0])


def _check_beta_eps(beta: float, coupling: float) -> None:
    if not beta > 0.0:
        raise DomainError(f"β must be positive, got {beta}")
    if not 0.0 < coupling <= 1.0:
        raise DomainError(f"coupling must lie in (0, 1], got {coupling}")


def crossover_exponent(beta: float) -> float:
    return 2.0 / (1.0 + 2.0 * beta)


def breakdown_time(beta: float, coupling: float) -> float:
    """τ* = ε^{2/(1+2β)}"""
    _check_beta_eps(beta, coupling)
    return coupling ** crossover_exponent(beta)


def breakdown_scales(beta: float, coupling: float, minus_tau: float) -> Tuple[float, float]:
    """(ε^{−1}(−τ)^{−9β−1/2}, (−τ)^{−10β−1})"""
    if not minus_tau > 0.0:
        raise DomainError("need −τ > 0")
    g22 = minus_tau ** (-9.0 * beta - 0.5) / coupling
    f11sq = minus_tau ** (-10.0 * beta - 1.0)
    return g22, f11sq


def hierarchy_scales(beta: float, coupling: float, minus_tau: float) -> Tuple[float, float, float]:
    """The three terms of the rescaled hierarchy: 1/τ, τ^{2β}/ε², τ^{β−1/2}/ε"""
    if not minus_tau > 0.0:
        raise DomainError("need −τ > 0")
    return (
        1.0 / minus_tau,
        minus_tau ** (2.0 * beta) / coupling ** 2,
        minus_tau ** (beta - 0.5) / coupling,
    )


def hierarchy_term_sizes(beta: float, coupling: float, minus_tau: float, order: int) -> Tuple[float, float, float]:
    """Sizes of the three hierarchy terms acting on F̂_{L,L} ~ τ^{−(5βL + L/2)}"""
    if order < 1:
        raise ParameterError("order must be at least 1")
    base = minus_tau ** (-(5.0 * beta * order + 0.5 * order))
    return tuple(base * term for term in hierarchy_scales(beta, coupling, minus_tau))


@dataclass(frozen=True)
class RescaledVariables:
    sigma_bar: float
    p: Union[float, np.ndarray]
    normalization: float


def rescale_variables(beta: float, coupling: float, tau: float, k, order: int) -> RescaledVariables:
    """
    Crossover-scale variables.

    σ̄ = τ ε^{−2/(1+2β)}, p = k ε^{−2β/(1+2β)}, F̂_{L,L} = Ĥ_{L,L} / ε^{(10β+1)L/(1+2β)}
    """
    _check_beta_eps(beta, coupling)
    if order < 1:
        raise ParameterError("order must be at least 1")
    time_unit = coupling ** crossover_exponent(beta)
    k_unit = coupling ** (2.0 * beta / (1.0 + 2.0 * beta))
    norm = coupling ** ((10.0 * beta + 1.0) * order / (1.0 + 2.0 * beta))
    return RescaledVariables(tau / time_unit, k / k_unit, norm)


def unrescale_variables(beta: float, coupling: float, sigma_bar: float, p, order: int) -> Tuple[float, Any, float]:
    """Inverse of rescale_variables: (τ, k, normalization)"""
    _check_beta_eps(beta, coupling)
    time_unit = coupling ** crossover_exponent(beta)
    k_unit = coupling ** (2.0 * beta / (1.0 + 2.0 * beta))
    norm = coupling ** ((10.0 * beta + 1.0) * order / (1.0 + 2.0 * beta))
    return sigma_bar * time_unit, p * k_unit, norm


def matching_h11(p, sigma_bar: float, big_phi: Callable, beta: float = DEFAULT_BETA):
    """Smooth part (−σ̄)^{−(2β+1)} Φ(p/(−σ̄)^β) of the rescaled two-point function"""
    if not sigma_bar < 0.0:
        raise DomainError("matching holds for σ̄ < 0")
    minus = -sigma_bar
    return minus ** (-(2.0 * beta + 1.0)) * big_phi(np.asarray(p, dtype=float) / minus ** beta)


def matching_hll(
    order: int,
    sigma_bar: float,
    big_phi: Callable,
    beta: float = DEFAULT_BETA,
    prefactor: Optional[float] = None,
) -> DeltaProductSum:
    """
    Factorized matching data for Ĥ_{L,L}: one term per pairing.

    The default prefactor takes the outer (2π)^{3L/2} together with the
    (2π)^{3/2} carried by each Ĥ₁,₁ factor.
    """
    if prefactor is None:
        prefactor = (2.0 * math.pi) ** (3.0 * order)
    return DeltaProductSum(
        order=order,
        terms=tuple((perm, float(prefactor)) for perm in all_permutations(order)),
        amplitude=lambda p: matching_h11(p, sigma_bar, big_phi, beta),
    )


@dataclass
class BreakdownReport:
    """Scale comparison at one coupling; equality flags hold at τ*"""

    coupling: float
    beta: float
    tau_star: float
    minus_tau: float
    g22_scale: float
    f11sq_scale: float
    hierarchy: Tuple[float, float, float]
    ordering: List[int] = field(default_factory=list)

    @property
    def scales_ratio(self) -> float:
        return self.g22_scale / self.f11sq_scale

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coupling": self.coupling,
            "beta": self.beta,
            "two_beta": 2.0 * self.beta,
            "exponent": crossover_exponent(self.beta),
            "tau_star": self.tau_star,
            "minus_tau": self.minus_tau,
            "g22_scale": self.g22_scale,
            "f11sq_scale": self.f11sq_scale,
            "scales_ratio": self.scales_ratio,
            "hierarchy_scales": list(self.hierarchy),
            "hierarchy_ordering": list(self.ordering),
        }


def breakdown_report(beta: float, coupling: float, minus_tau: Optional[float] = None) -> BreakdownReport:
    """All breakdown scales at −τ (default τ*)"""
    tau_star = breakdown_time(beta, coupling)
    if minus_tau is None:
        minus_tau = tau_star
    g22, f11sq = breakdown_scales(beta, coupling, minus_tau)
    hier = hierarchy_scales(beta, coupling, minus_tau)
    return BreakdownReport(
        coupling=coupling,
        beta=beta,
        tau_star=tau_star,
        minus_tau=minus_tau,
        g22_scale=g22,
        f11sq_scale=f11sq,
        hierarchy=hier,
        ordering=[int(i) for i in np.argsort(hier, kind="stable")],
    )
