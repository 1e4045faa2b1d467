"""
Isotropic four-wave collision operator.

    C[f](ε1) = Γ ∫∫ dε3 dε4 W [(f1 + f2) f3 f4 − (f3 + f4) f1 f2],  ε2 = ε3 + ε4 − ε1

with W = min{1, √(ε2/ε1), √(ε3/ε1), √(ε4/ε1)}. The quadrature runs on the
tensor mesh of grid control boxes. Each box is weighted by the exact area it
shares with the band ε1 ≤ ε3 + ε4 ≤ ε1 + ε_max, so all four energies stay
inside the computed domain.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from kinetics.errors import DomainError, ParameterError
from kinetics.grid import EnergyGrid, Spectrum, moment, spectrum_from_function
from kinetics.parallel import ordered_map

logger = logging.getLogger(__name__)

# Γ = 1/(8π⁶)
DEFAULT_GAMMA = 1.0 / (8.0 * np.pi ** 6)

# Angular average of the resonant-manifold integral onto ∫∫ W[...] dε3 dε4
K_SPACE_GAMMA = 32.0 * np.pi ** 3


@dataclass(frozen=True)
class KernelParams:
    """Collision constant Γ"""

    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise ParameterError("collision constant must be finite")

    @classmethod
    def k_space(cls) -> "KernelParams":
        """Constant matching the k-space Markovian operator"""
        return cls(gamma=K_SPACE_GAMMA)


def kernel_w(eps1, eps2, eps3, eps4):
    """
    W = min{1, √(ε2/ε1), √(ε3/ε1), √(ε4/ε1)}.

    The caller guarantees ε2 = ε3 + ε4 − ε1. Accepts scalars or arrays.
    """
    eps1 = np.asarray(eps1, dtype=float)
    if np.any(eps1 <= 0.0):
        raise DomainError("ε1 must be positive")
    low = np.minimum(np.minimum(eps2, eps3), eps4)
    if np.any(np.asarray(low) < 0.0):
        raise DomainError("ε2, ε3, ε4 must be non-negative")
    w = np.minimum(1.0, np.sqrt(low / eps1))
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class _PairMesh:
    """Upper triangle (ε3 ≤ ε4) of the tensor mesh with box corner sums"""

    i3: np.ndarray
    i4: np.ndarray
    e3: np.ndarray
    e4: np.ndarray
    area: np.ndarray
    multiplicity: np.ndarray
    s00: np.ndarray
    s10: np.ndarray
    s01: np.ndarray
    s11: np.ndarray


@lru_cache(maxsize=8)
def _pair_mesh(grid: EnergyGrid) -> _PairMesh:
    lower, upper = grid.box_edges
    i3, i4 = np.triu_indices(grid.size)
    lo3, hi3 = lower[i3], upper[i3]
    lo4, hi4 = lower[i4], upper[i4]
    return _PairMesh(
        i3=i3,
        i4=i4,
        e3=grid.nodes[i3],
        e4=grid.nodes[i4],
        area=(hi3 - lo3) * (hi4 - lo4),
        multiplicity=np.where(i3 == i4, 1.0, 2.0),
        s00=lo3 + lo4,
        s10=hi3 + lo4,
        s01=lo3 + hi4,
        s11=hi3 + hi4,
    )


def _ramp(z: np.ndarray) -> np.ndarray:
    return 0.5 * np.maximum(z, 0.0) ** 2


def _area_below(mesh: _PairMesh, c: float) -> np.ndarray:
    """Area of each box below the line ε3 + ε4 = c"""
    area = np.where(c >= mesh.s11, mesh.area, 0.0)
    cut = (c > mesh.s00) & (c < mesh.s11)
    if np.any(cut):
        area[cut] = (
            _ramp(c - mesh.s00[cut])
            - _ramp(c - mesh.s10[cut])
            - _ramp(c - mesh.s01[cut])
            + _ramp(c - mesh.s11[cut])
        )
    return area


def collision_rhs_at(s: Spectrum, eps1: float, params: Optional[KernelParams] = None) -> float:
    """
    Collision rate C[f](ε1) at one energy, on or off the grid.

    Args:
        s: Spectrum supplying f3, f4 at nodes and f1, f2 off-grid
        eps1: Energy the rate is evaluated at
        params: Collision constant, default Γ = 1/(8π⁶)

    Returns:
        Rate ∂τ f(ε1)
    """
    if params is None:
        params = KernelParams()
    if not eps1 > 0.0:
        raise DomainError(f"ε1 must be positive, got {eps1}")

    mesh = _pair_mesh(s.grid)
    band = _area_below(mesh, eps1 + s.grid.eps_max) - _area_below(mesh, eps1)
    (idx,) = np.nonzero(band > 0.0)
    if idx.size == 0:
        return 0.0

    e3 = mesh.e3[idx]
    e2 = np.maximum(e3 + mesh.e4[idx] - eps1, 0.0)
    f1 = float(s.evaluate(eps1))
    f2 = s.evaluate_inside(e2)
    f3 = s.values[mesh.i3[idx]]
    f4 = s.values[mesh.i4[idx]]

    # e3 <= e4 on the folded mesh
    w = np.minimum(1.0, np.sqrt(np.minimum(e2, e3) / eps1))
    bracket = (f1 + f2) * f3 * f4 - (f3 + f4) * f1 * f2
    return params.gamma * float(np.sum(w * bracket * band[idx] * mesh.multiplicity[idx]))


def collision_rhs(
    s: Spectrum, params: Optional[KernelParams] = None, threads: int = 1
) -> np.ndarray:
    """Collision rate at every grid node; identical for any thread count"""
    if params is None:
        params = KernelParams()
    rates = ordered_map(lambda e: collision_rhs_at(s, e, params), s.grid.nodes, threads)
    return np.asarray(rates, dtype=float)


def conserve_moments(s: Spectrum, rate: np.ndarray) -> np.ndarray:
    """
    Project a rate so that the grid moments N and E are exactly stationary.

    Subtracts f·(a + bε), with (a, b) chosen so that the trapezoidal ε^{1/2}
    and ε^{3/2} moments of the result vanish. The correction is zero when the
    rate already conserves both, and it is skipped when f cannot carry it
    (f ≡ 0 or a single occupied node).

    Args:
        s: Spectrum the rate was computed from
        rate: Collision rate at the grid nodes

    Returns:
        Corrected rate
    """
    rate = np.asarray(rate, dtype=float)
    weights, nodes = s.grid.weights, s.grid.nodes
    basis = np.vstack([s.values, s.values * nodes])
    tests = np.vstack([weights * np.sqrt(nodes), weights * nodes ** 1.5])
    gram = tests @ basis.T
    try:
        coef = np.linalg.solve(gram, tests @ rate)
    except np.linalg.LinAlgError:
        return rate
    if not np.all(np.isfinite(coef)):
        return rate
    return rate - coef @ basis


def conservative_rhs(
    s: Spectrum, params: Optional[KernelParams] = None, threads: int = 1
) -> np.ndarray:
    """Collision rate at every grid node, projected by conserve_moments"""
    return conserve_moments(s, collision_rhs(s, params, threads))


def collision_moments(
    s: Spectrum, params: Optional[KernelParams] = None, threads: int = 1
) -> Tuple[float, float, float, float]:
    """
    Conservation monitor for the operator.

    Returns:
        (dN/dτ, dE/dτ, ∫|C|√ε dε, ∫|C|ε^{3/2} dε)
    """
    rate = collision_rhs(s, params, threads)
    as_rate = Spectrum(s.grid, rate)
    as_abs = Spectrum(s.grid, np.abs(rate))
    return (
        moment(as_rate, 0.5),
        moment(as_rate, 1.5),
        moment(as_abs, 0.5),
        moment(as_abs, 1.5),
    )


def rayleigh_jeans(grid: EnergyGrid, temperature: float = 1.0, mu: float = 0.0) -> Spectrum:
    """Equilibrium f = T/(ε + μ), evaluated exactly off-grid"""
    if temperature <= 0.0 or mu < 0.0:
        raise ParameterError("need T > 0 and μ >= 0")
    return spectrum_from_function(grid, lambda e: temperature / (e + mu))
