"""
Configuration management for wtkin
"""

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration"""


class Config:
    """Process-level settings read from the environment"""

    # Parallelism (raw text; parsed in validate)
    THREADS_SETTING: str = os.getenv("WTKIN_THREADS", "1")

    # Output
    OUTPUT_DIR: str = os.getenv("WTKIN_OUTPUT_DIR", "runs")

    # Feature Flags
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"

    @classmethod
    def validate(cls) -> tuple[bool, list[str]]:
        """Validate environment configuration"""
        errors = []

        threads = _parse_threads(cls.THREADS_SETTING)
        if threads is None:
            errors.append(f"WTKIN_THREADS must be an integer, got {cls.THREADS_SETTING!r}")
        elif threads < 1:
            errors.append("WTKIN_THREADS must be at least 1")

        if not cls.OUTPUT_DIR:
            errors.append("WTKIN_OUTPUT_DIR must not be empty")

        return len(errors) == 0, errors

    @classmethod
    def threads_override(cls) -> Union[int, None]:
        """
        WTKIN_THREADS when set in the environment, else None

        Raises:
            ConfigError: the variable is set but not an integer
        """
        value = os.getenv("WTKIN_THREADS")
        if not value:
            return None
        threads = _parse_threads(value)
        if threads is None:
            raise ConfigError(f"WTKIN_THREADS must be an integer, got {value!r}")
        return threads


def _parse_threads(text: str) -> Union[int, None]:
    try:
        return int(text.strip())
    except ValueError:
        return None


def _doc(text: str, echo: bool = True, **kwargs) -> Any:
    return field(metadata={"doc": text, "echo": echo}, **kwargs)


@dataclass
class RunConfig:
    """
    Settings of one wtkin command, parsed from a `key = value` file.

    Every field has a default; lists are comma separated.
    """

    # Grid
    eps_min: float = _doc("lowest grid energy", default=1e-4)
    eps_max: float = _doc("highest grid energy", default=50.0)
    n_nodes: int = _doc("number of log-spaced grid nodes", default=256)

    # Kernel
    gamma: float = _doc("collision constant Γ", default=1.0 / (8.0 * math.pi ** 6))

    # Initial condition
    ic_family: str = _doc("exponential | constant | rayleigh_jeans", default="exponential")
    ic_amplitude: float = _doc("amplitude a of a·e^{-ε}, or the constant value", default=50.0)
    ic_temperature: float = _doc("Rayleigh-Jeans T", default=1.0)
    ic_mu: float = _doc("Rayleigh-Jeans μ", default=0.1)

    # Integrator
    dt_init: float = _doc("first trial step", default=1e-4)
    dt_min: float = _doc("step size floor; below it the run stops", default=1e-12)
    safety: float = _doc("step controller safety factor", default=0.9)
    rtol: float = _doc("relative error tolerance", default=1e-6)
    atol: float = _doc("absolute floor added to sup f in the error scale", default=1e-12)
    max_growth: float = _doc("largest step growth per accepted step", default=5.0)
    t_end: float = _doc("final time", default=1e3)
    snapshot_every: int = _doc("accepted steps between snapshots", default=1)
    blowup_growth_factor: float = _doc("sup f growth that counts as blow-up", default=1e3)
    negativity_tol: float = _doc("allowed negativity relative to sup f", default=1e-12)
    conserve_moments: bool = _doc("project the collision rate so that grid N and E stay fixed", default=True)

    # Self-similar fit
    nu_guess: float = _doc("initial tail exponent", default=1.234)
    selfsim_iterations: int = _doc("T* / ν refinement passes", default=2)
    tail_omega_min: float = _doc("tail fit window start", default=10.0)
    tail_omega_max: float = _doc("tail fit window end", default=1e3)
    collapse_omega_min: float = _doc("collapse window start", default=0.1)
    collapse_omega_max: float = _doc("collapse window end", default=1e3)
    trajectory_dir: str = _doc("trajectory to fit; empty means the output directory", default="")

    # Monte-Carlo
    mc_samples: int = _doc("samples per Monte-Carlo estimate", default=1_000_000)
    seed: int = _doc("random seed", default=20240611)
    proposal_scale: float = _doc("energy scale of the Gaussian proposal", default=1.0)
    time_quadrature_steps: int = _doc("time pieces of the memory integral", default=64)
    oracle_energies: List[float] = _doc("ε1 values of the kinetic oracle", default_factory=lambda: [0.5, 1.0, 2.0])
    oracle_nodes: int = _doc("grid nodes of the isotropic side of the oracle", default=512)

    # Markov limit
    markov_couplings: List[float] = _doc("ε values of the limit table", default_factory=lambda: [0.3, 0.1, 0.03])
    markov_tau: float = _doc("rescaled time of the limit table", default=1.0)
    markov_omega_half_width: float = _doc("Ω grid half width", default=10.0)
    markov_omega_points: int = _doc("Ω grid points", default=65537)

    # Non-Markovian comparison
    nonmarkov_couplings: List[float] = _doc("ε values compared", default_factory=lambda: [0.5, 0.25])
    nonmarkov_tau: float = _doc("rescaled time τ = ε² t", default=0.5)
    nonmarkov_samples: int = _doc("samples per estimate", default=200_000)
    nonmarkov_energy: float = _doc("ε1 of the comparison", default=1.0)

    # Breakdown
    beta: float = _doc("wavevector exponent β", default=1.068)
    couplings: List[float] = _doc("ε values of the breakdown report", default_factory=lambda: [1e-2, 1e-3])

    # Wick
    wick_max_order: int = _doc("largest order checked by enumeration", default=5)
    wick_mc_samples: int = _doc("samples per Gaussian moment", default=200_000)
    wick_mc_max_order: int = _doc("largest order checked by sampling", default=3)

    # Execution
    # Left out of echo() and to_text()
    threads: int = _doc("worker threads (WTKIN_THREADS overrides)", echo=False, default=1)

    @classmethod
    def schema(cls) -> Dict[str, Tuple[type, str]]:
        """Field name → (type, doc)"""
        return {f.name: (f.type, f.metadata.get("doc", "")) for f in fields(cls)}

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """
        Parse `key = value` lines.

        Raises:
            ConfigError: unknown or duplicate key, malformed line or value
        """
        schema = cls.schema()
        values: Dict[str, Any] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {number}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in schema:
                raise ConfigError(f"line {number}: unknown key '{key}'")
            if key in values:
                raise ConfigError(f"line {number}: duplicate key '{key}'")
            values[key] = _parse_value(key, value, schema[key][0])
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, Path, None]) -> "RunConfig":
        """Load a config file; None gives all defaults"""
        if path is None:
            return cls()
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config '{path}': {e}") from e
        return cls.from_text(text)

    def apply_environment(self) -> "RunConfig":
        """Let WTKIN_THREADS override the threads key"""
        override = Config.threads_override()
        if override is not None:
            self.threads = override
        return self

    def validate(self) -> tuple[bool, list[str]]:
        """Semantic checks beyond parsing"""
        errors = []

        if not (0.0 < self.eps_min < self.eps_max):
            errors.append("need 0 < eps_min < eps_max")
        if self.n_nodes < 8:
            errors.append("n_nodes must be at least 8")
        if self.ic_family not in ("exponential", "constant", "rayleigh_jeans"):
            errors.append(f"unknown ic_family '{self.ic_family}'")
        if not (0.0 < self.dt_min < self.dt_init):
            errors.append("need 0 < dt_min < dt_init")
        if not (1e-12 < self.rtol < 1e-1):
            errors.append("rtol must lie in (1e-12, 1e-1)")
        if not (0.0 < self.safety < 1.0):
            errors.append("safety must lie in (0, 1)")
        if self.t_end <= 0.0:
            errors.append("t_end must be positive")
        if self.snapshot_every < 1:
            errors.append("snapshot_every must be at least 1")
        if self.nu_guess <= 1.0:
            errors.append("nu_guess must exceed 1")
        if self.mc_samples < 1000 or self.nonmarkov_samples < 1000 or self.wick_mc_samples < 1000:
            errors.append("Monte-Carlo sample counts must be at least 1000")
        if self.seed < 0:
            errors.append("seed must be non-negative")
        if self.proposal_scale <= 0.0:
            errors.append("proposal_scale must be positive")
        if self.beta <= 0.0:
            errors.append("beta must be positive")
        if any(not 0.0 < c <= 1.0 for c in self.couplings):
            errors.append("breakdown couplings must lie in (0, 1]")
        if any(c <= 0.0 for c in self.markov_couplings + self.nonmarkov_couplings):
            errors.append("couplings must be positive")
        if self.threads < 1:
            errors.append("threads must be at least 1")

        return len(errors) == 0, errors

    def echo(self) -> Dict[str, Any]:
        """Effective settings in declaration order"""
        return {f.name: getattr(self, f.name) for f in fields(self) if f.metadata.get("echo", True)}

    def to_text(self) -> str:
        """Render a config file that parses back to the same settings"""
        lines = []
        for f in fields(self):
            if not f.metadata.get("echo", True):
                continue
            value = getattr(self, f.name)
            lines.append(f"# {f.metadata.get('doc', '')}")
            lines.append(f"{f.name} = {_format_value(value)}")
        return "\n".join(lines) + "\n"


def _parse_value(key: str, text: str, kind: Any) -> Any:
    try:
        if kind is int:
            return int(float(text)) if float(text).is_integer() else _bad(key, text)
        if kind is float:
            return float(text)
        if kind is str:
            return text
        if kind is bool:
            return _parse_bool(key, text)
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"invalid value for '{key}': {text!r}") from e


def _bad(key: str, text: str):
    raise ConfigError(f"'{key}' needs an integer, got {text!r}")


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"'{key}' needs true or false, got {text!r}")


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# Export config instance
config = Config()
