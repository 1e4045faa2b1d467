"""
Energy-axis discretization shared by all solvers.

Spectra live on a logarithmic grid in the energy variable ε = |k|²/2. Quadrature
uses the trapezoidal rule in ε (not in log ε); off-grid values come from
power-law interpolation, or from the generating function for closed-form families.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from kinetics.errors import DomainError, ParameterError

ArrayLike = Union[float, np.ndarray]
Evaluator = Callable[[np.ndarray], np.ndarray]


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Trapezoidal weights for a strictly increasing node set"""
    n = len(nodes)
    weights = np.empty(n)
    if n == 1:
        weights[0] = 0.0
        return weights
    gaps = np.diff(nodes)
    weights[0] = 0.5 * gaps[0]
    weights[-1] = 0.5 * gaps[-1]
    weights[1:-1] = 0.5 * (gaps[:-1] + gaps[1:])
    return weights


@dataclass(frozen=True, eq=False)
class EnergyGrid:
    """
    Positive, strictly increasing node set with trapezoidal weights.

    The midpoints between nodes bound the control box of each node; the box
    widths equal the trapezoidal weights.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "logarithmic"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise ParameterError("grid needs at least two nodes")
        if not np.all(np.isfinite(nodes)) or nodes[0] <= 0.0:
            raise ParameterError("grid nodes must be finite and positive")
        if np.any(np.diff(nodes) <= 0.0):
            raise ParameterError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @classmethod
    def from_nodes(cls, nodes: np.ndarray, kind: str = "logarithmic") -> "EnergyGrid":
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes=nodes, weights=trapezoid_weights(nodes), kind=kind)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def eps_min(self) -> float:
        return float(self.nodes[0])

    @property
    def eps_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def box_edges(self) -> tuple:
        """Lower and upper edges of each node's control box"""
        mids = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        lower = np.concatenate(([self.nodes[0]], mids))
        upper = np.concatenate((mids, [self.nodes[-1]]))
        return lower, upper


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Occupation density f(ε) sampled on an EnergyGrid.

    Args:
        grid: Node set the values live on
        values: f_i, one per node
        exact: Optional generating function for closed-form families; when
            present, off-grid evaluation uses it instead of interpolation
    """

    grid: EnergyGrid
    values: np.ndarray
    exact: Optional[Evaluator] = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ParameterError(
                f"spectrum has {values.size} values for {self.grid.size} nodes"
            )
        object.__setattr__(self, "values", values)

    def evaluate(self, eps: ArrayLike) -> ArrayLike:
        """f at arbitrary positive energies"""
        if self.exact is not None:
            eps_arr = np.asarray(eps, dtype=float)
            if np.any(eps_arr <= 0.0):
                raise DomainError("energy must be positive")
            return self.exact(eps_arr) if eps_arr.ndim else float(self.exact(eps_arr))
        return interp_loglog(self, eps)

    def evaluate_inside(self, eps: np.ndarray) -> np.ndarray:
        """
        f inside the computed domain, used by the collision operator.

        Sampled spectra are extended by constants at both ends instead of the
        tail truncation of interp_loglog.
        """
        if self.exact is not None:
            return self.exact(np.maximum(eps, np.finfo(float).tiny))
        clipped = np.clip(eps, self.grid.eps_min, self.grid.eps_max)
        return interp_loglog(self, clipped)

    def with_values(self, values: np.ndarray) -> "Spectrum":
        return Spectrum(self.grid, values)

    @property
    def sup(self) -> float:
        return float(np.max(self.values))


def make_log_grid(eps_min: float, eps_max: float, n: int) -> EnergyGrid:
    """
    Build n log-spaced nodes from eps_min to eps_max.

    Args:
        eps_min: Lowest node (> 0)
        eps_max: Highest node (> eps_min)
        n: Number of nodes (≥ 2)

    Returns:
        EnergyGrid with trapezoidal weights in ε
    """
    if not (np.isfinite(eps_min) and np.isfinite(eps_max)):
        raise ParameterError("grid bounds must be finite")
    if eps_min <= 0.0 or eps_max <= eps_min:
        raise ParameterError(f"need 0 < eps_min < eps_max, got ({eps_min}, {eps_max})")
    if int(n) != n or n < 2:
        raise ParameterError(f"need an integer node count n >= 2, got {n}")
    nodes = np.geomspace(eps_min, eps_max, int(n))
    nodes[0], nodes[-1] = eps_min, eps_max
    return EnergyGrid.from_nodes(nodes, kind="logarithmic")


def interp_loglog(s: Spectrum, eps: ArrayLike) -> ArrayLike:
    """
    Power-law interpolation of a sampled spectrum.

    Linear in (log ε, log f) between nodes, linear in ε when either bracketing
    value is not positive. Constant below ε_min, zero above ε_max.
    """
    eps_arr = np.asarray(eps, dtype=float)
    if np.any(~(eps_arr > 0.0)):
        raise DomainError("energy must be positive")
    nodes = s.grid.nodes
    f = s.values
    flat = np.atleast_1d(eps_arr).ravel()

    idx = np.searchsorted(nodes, flat, side="right") - 1
    idx = np.clip(idx, 0, len(nodes) - 2)
    lo, hi = nodes[idx], nodes[idx + 1]
    f_lo, f_hi = f[idx], f[idx + 1]
    theta = np.log(flat / lo) / np.log(hi / lo)

    positive = (f_lo > 0.0) & (f_hi > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(positive, f_hi / np.where(positive, f_lo, 1.0), 1.0)
        power = f_lo * ratio ** theta
    linear = f_lo + (f_hi - f_lo) * (flat - lo) / (hi - lo)
    out = np.where(positive, power, linear)

    out = np.where(flat <= nodes[0], f[0], out)
    out = np.where(flat == nodes[-1], f[-1], out)
    out = np.where(flat > nodes[-1], 0.0, out)

    if eps_arr.ndim == 0:
        return float(out[0])
    return out.reshape(eps_arr.shape)


def moment(s: Spectrum, p: float) -> float:
    """Trapezoidal value of ∫ f(ε) ε^p dε over the grid"""
    if s.grid.size == 0:
        return 0.0
    return float(np.sum(s.grid.weights * s.values * s.grid.nodes ** p))


def particle_number(s: Spectrum) -> float:
    return moment(s, 0.5)


def energy(s: Spectrum) -> float:
    return moment(s, 1.5)


def spectrum_from_function(grid: EnergyGrid, fn: Evaluator) -> Spectrum:
    """Sample a closed-form family and keep it for exact off-grid evaluation"""
    return Spectrum(grid, fn(grid.nodes), exact=fn)


def constant_spectrum(grid: EnergyGrid, c: float) -> Spectrum:
    if c < 0.0:
        raise ParameterError("occupation must be non-negative")
    return spectrum_from_function(grid, lambda e: np.full(np.shape(e), float(c)))


def exponential_spectrum(grid: EnergyGrid, amplitude: float = 1.0) -> Spectrum:
    """f(ε) = a·e^{−ε}"""
    if amplitude < 0.0:
        raise ParameterError("amplitude must be non-negative")
    return spectrum_from_function(grid, lambda e: amplitude * np.exp(-e))


def write_spectrum_csv(path: Union[str, Path], s: Spectrum, header: str = "epsilon,f") -> Path:
    """Write nodes and values with 17 significant digits"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack((s.grid.nodes, s.values))
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
    return path


def read_spectrum_csv(path: Union[str, Path], kind: str = "logarithmic") -> Spectrum:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    grid = EnergyGrid.from_nodes(data[:, 0], kind=kind)
    return Spectrum(grid, data[:, 1])
