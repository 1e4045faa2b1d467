"""
Time integration of ∂τ f = C[f] toward finite-time blow-up.

Steps use the Cash-Karp 5(4) embedded pair with an error-based step
controller. Steps are also rejected when they would drive a node negative.
By default the rate is projected so that the grid particle number and
energy are invariants of every step.
A run stops at t_end, when sup f has grown by blowup_growth_factor, or when
the step size falls below dt_min.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np
from scipy import stats

from kinetics.collision import KernelParams, collision_rhs, conservative_rhs, rayleigh_jeans
from kinetics.errors import NotAsymptoticError, FitError, ParameterError, StepUnderflowError
from kinetics.grid import EnergyGrid, Spectrum, constant_spectrum, energy, exponential_spectrum, particle_number

logger = logging.getLogger(__name__)

# Cash-Karp tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_ERR = (-277 / 64512, 0.0, 6925 / 370944, -6925 / 202752, -277 / 14336, 277 / 7084)

# First guess for the amplitude exponent α (tail exponent ν = 1.234)
DEFAULT_ALPHA = 2.639


class StopReason(str, Enum):
    REACHED_T_END = "reached_t_end"
    BLOWUP_DETECTED = "blowup_detected"
    DT_UNDERFLOW = "dt_underflow"


@dataclass(frozen=True)
class EvolveConfig:
    """Integrator settings"""

    dt_init: float = 1e-4
    dt_min: float = 1e-12
    safety: float = 0.9
    rtol: float = 1e-6
    atol: float = 1e-12
    max_growth: float = 5.0
    t_end: float = 1e3
    snapshot_every: int = 1
    blowup_growth_factor: float = 1e3
    negativity_tol: float = 1e-12
    conserve_moments: bool = True

    def __post_init__(self):
        if not (0.0 < self.dt_min < self.dt_init):
            raise ParameterError("need 0 < dt_min < dt_init")
        if not (1e-12 < self.rtol < 1e-1):
            raise ParameterError("rtol must lie in (1e-12, 1e-1)")
        if not (0.0 < self.safety < 1.0):
            raise ParameterError("safety must lie in (0, 1)")
        if self.max_growth <= 1.0:
            raise ParameterError("max_growth must exceed 1")
        if self.t_end <= 0.0:
            raise ParameterError("t_end must be positive")
        if int(self.snapshot_every) < 1:
            raise ParameterError("snapshot_every must be at least 1")
        if self.blowup_growth_factor <= 1.0:
            raise ParameterError("blowup_growth_factor must exceed 1")
        if self.atol < 0.0 or self.negativity_tol < 0.0:
            raise ParameterError("tolerances must be non-negative")


class StepResult(NamedTuple):
    spectrum: Spectrum
    accepted_dt: float
    next_dt: float
    rejected: int


@dataclass
class TrajectoryRecord:
    """Snapshots plus conserved-quantity and sup monitors"""

    times: List[float] = field(default_factory=list)
    snapshots: List[Spectrum] = field(default_factory=list)
    n_moment: List[float] = field(default_factory=list)
    e_moment: List[float] = field(default_factory=list)
    sup_f: List[float] = field(default_factory=list)
    stop_reason: Optional[StopReason] = None
    steps_accepted: int = 0
    steps_rejected: int = 0

    def append(self, t: float, s: Spectrum) -> None:
        if self.times and t <= self.times[-1]:
            return
        self.times.append(float(t))
        self.snapshots.append(s)
        self.n_moment.append(particle_number(s))
        self.e_moment.append(energy(s))
        self.sup_f.append(s.sup)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def grid(self) -> EnergyGrid:
        return self.snapshots[0].grid

    def to_dict(self) -> Dict[str, Any]:
        """JSON form; snapshot values are stored separately as CSV"""
        return {
            "times": list(self.times),
            "n_moment": list(self.n_moment),
            "e_moment": list(self.e_moment),
            "sup_f": list(self.sup_f),
            "stop_reason": self.stop_reason.value if self.stop_reason else None,
            "steps_accepted": self.steps_accepted,
            "steps_rejected": self.steps_rejected,
            "snapshots": [f"snap_{i:05d}.csv" for i in range(len(self.times))],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], snapshots: List[Spectrum]) -> "TrajectoryRecord":
        if len(snapshots) != len(data["times"]):
            raise ParameterError("snapshot count does not match the time series")
        reason = data.get("stop_reason")
        return cls(
            times=[float(t) for t in data["times"]],
            snapshots=list(snapshots),
            n_moment=[float(v) for v in data["n_moment"]],
            e_moment=[float(v) for v in data["e_moment"]],
            sup_f=[float(v) for v in data["sup_f"]],
            stop_reason=StopReason(reason) if reason else None,
            steps_accepted=int(data.get("steps_accepted", 0)),
            steps_rejected=int(data.get("steps_rejected", 0)),
        )


def initial_spectrum(
    grid: EnergyGrid,
    family: str = "exponential",
    amplitude: float = 50.0,
    temperature: float = 1.0,
    mu: float = 0.1,
) -> Spectrum:
    """Initial condition families used by run configs"""
    if family == "exponential":
        return exponential_spectrum(grid, amplitude)
    if family == "constant":
        return constant_spectrum(grid, amplitude)
    if family == "rayleigh_jeans":
        return rayleigh_jeans(grid, temperature, mu)
    raise ParameterError(f"unknown initial condition family '{family}'")


def step_adaptive(
    s: Spectrum,
    dt: float,
    cfg: EvolveConfig,
    params: Optional[KernelParams] = None,
    threads: int = 1,
) -> StepResult:
    """
    One accepted Cash-Karp step, halving dt on rejection.

    Args:
        s: Current spectrum
        dt: Trial step
        cfg: Integrator settings
        params: Collision constant
        threads: Workers for the right-hand side

    Returns:
        StepResult with the new spectrum, the step taken and the proposed next step

    Raises:
        StepUnderflowError: dt fell below cfg.dt_min
    """
    grid = s.grid
    y = np.array(s.values, dtype=float)
    sup = float(np.max(np.abs(y))) if y.size else 0.0
    tol = cfg.rtol * (sup + cfg.atol)
    floor = -cfg.negativity_tol * sup

    operator = conservative_rhs if cfg.conserve_moments else collision_rhs

    def rhs(values: np.ndarray) -> np.ndarray:
        return operator(Spectrum(grid, values), params, threads)

    k0 = rhs(y)
    rejected = 0
    while True:
        if dt < cfg.dt_min:
            raise StepUnderflowError(f"step size {dt:.3e} below dt_min", values=y, dt=dt)

        stages = [k0]
        for row in _A[1:]:
            increment = sum(a * k for a, k in zip(row, stages) if a != 0.0)
            stages.append(rhs(y + dt * increment))

        y5 = y + dt * sum(b * k for b, k in zip(_B5, stages) if b != 0.0)
        err = dt * float(np.max(np.abs(sum(e * k for e, k in zip(_ERR, stages) if e != 0.0))))

        if err > tol or float(np.min(y5)) < floor:
            logger.debug("step rejected: dt=%.3e err=%.3e tol=%.3e", dt, err, tol)
            dt *= 0.5
            rejected += 1
            continue

        if err == 0.0:
            growth = cfg.max_growth
        else:
            growth = min(cfg.max_growth, max(0.2, cfg.safety * (tol / err) ** 0.2))
        return StepResult(Spectrum(grid, np.maximum(y5, 0.0)), dt, dt * growth, rejected)


def run(
    f0: Spectrum,
    cfg: EvolveConfig,
    params: Optional[KernelParams] = None,
    threads: int = 1,
) -> TrajectoryRecord:
    """
    Integrate from f0 until t_end, blow-up detection or step underflow.

    Always returns a record; the termination cause is in stop_reason.
    """
    if np.any(f0.values < 0.0) or not np.all(np.isfinite(f0.values)):
        raise ParameterError("initial spectrum must be finite and non-negative")

    record = TrajectoryRecord()
    s = f0.with_values(f0.values)
    record.append(0.0, s)
    sup0 = s.sup
    t, dt, steps = 0.0, cfg.dt_init, 0
    record.stop_reason = StopReason.REACHED_T_END

    while t < cfg.t_end:
        trial = min(dt, cfg.t_end - t)
        try:
            result = step_adaptive(s, trial, cfg, params, threads)
        except StepUnderflowError as e:
            logger.warning("stopping at t=%.6g: %s", t, e)
            record.stop_reason = StopReason.DT_UNDERFLOW
            break

        clipped = trial == cfg.t_end - t and result.accepted_dt == trial
        t = cfg.t_end if clipped else t + result.accepted_dt
        s, dt = result.spectrum, result.next_dt
        steps += 1
        record.steps_accepted += 1
        record.steps_rejected += result.rejected

        blown = sup0 > 0.0 and s.sup >= cfg.blowup_growth_factor * sup0
        if blown or t >= cfg.t_end or steps % int(cfg.snapshot_every) == 0:
            record.append(t, s)
        logger.debug("t=%.9g dt=%.3e sup=%.6g", t, result.accepted_dt, s.sup)
        if blown:
            record.stop_reason = StopReason.BLOWUP_DETECTED
            logger.info("blow-up detected at t=%.9g (sup f = %.6g)", t, s.sup)
            break

    if record.times[-1] < t:
        record.append(t, s)
    logger.info(
        "run finished: %s after %d steps (%d rejected)",
        record.stop_reason.value,
        record.steps_accepted,
        record.steps_rejected,
    )
    return record


@dataclass(frozen=True)
class BlowupEstimate:
    t_star: float
    residual: float
    n_points: int
    slope: float
    intercept: float


def estimate_blowup_time(rec: TrajectoryRecord, alpha: float = DEFAULT_ALPHA) -> BlowupEstimate:
    """
    Extrapolate the blow-up time from sup f ∝ (T* − t)^{−α}.

    Fits sup_f^{−1/α} linearly in t over the last decade of growth (at least
    the last 10 snapshots) and returns the zero crossing.

    Raises:
        NotAsymptoticError: fewer than 10 snapshots or total growth below 10×
    """
    if alpha <= 0.0:
        raise ParameterError("α must be positive")
    times = np.asarray(rec.times, dtype=float)
    sup = np.asarray(rec.sup_f, dtype=float)
    if len(times) < 10:
        raise NotAsymptoticError(f"need at least 10 snapshots, have {len(times)}")
    if sup[0] <= 0.0 or sup[-1] / sup[0] < 10.0:
        raise NotAsymptoticError("sup f grew by less than 10x; no blow-up regime to fit")

    window = np.nonzero(sup >= sup[-1] / 10.0)[0]
    if window.size < 10:
        window = np.arange(len(times) - 10, len(times))
    t_fit = times[window]
    y = sup[window] ** (-1.0 / alpha)

    fit = stats.linregress(t_fit, y)
    if not fit.slope < 0.0:
        raise FitError("sup f^(-1/α) is not decreasing; cannot extrapolate blow-up")
    t_star = -fit.intercept / fit.slope
    spread = float(np.max(y) - np.min(y))
    rms = float(np.sqrt(np.mean((y - (fit.intercept + fit.slope * t_fit)) ** 2)))
    residual = rms / spread if spread > 0.0 else 0.0
    return BlowupEstimate(float(t_star), residual, int(window.size), float(fit.slope), float(fit.intercept))
