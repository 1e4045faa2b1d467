"""
Shared pytest fixtures for wtkin
"""

import numpy as np
import pytest

from kinetics.grid import make_log_grid


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale runs (blow-up integration, 10^6-sample oracles)")


@pytest.fixture
def grid64():
    return make_log_grid(1e-4, 50.0, 64)


@pytest.fixture
def grid256():
    return make_log_grid(1e-4, 50.0, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    """Fresh output directory with the shared artifact store reset"""
    import utils.artifacts

    monkeypatch.setattr(utils.artifacts, "_store_instance", None)
    monkeypatch.delenv("WTKIN_THREADS", raising=False)
    return tmp_path / "run"


def _profile(omega: np.ndarray, nu: float) -> np.ndarray:
    """φ = 1 up to ω = 1, then ω^{-ν}"""
    return np.where(omega <= 1.0, 1.0, np.maximum(omega, 1.0) ** -nu)


@pytest.fixture
def synthetic_blowup():
    """Factory for a trajectory that follows the self-similar ansatz exactly"""
    from kinetics.evolve import StopReason, TrajectoryRecord
    from kinetics.grid import Spectrum
    from kinetics.selfsim import exponents_from_nu

    def build(nu: float = 1.234, t_star: float = 1.0, snapshots: int = 60, last_tau: float = 0.02):
        grid = make_log_grid(1e-4, 50.0, 256)
        exps = exponents_from_nu(nu)
        record = TrajectoryRecord()
        for tau in last_tau ** np.linspace(0.0, 1.0, snapshots):
            omega = grid.nodes / tau ** exps.two_beta
            values = np.sqrt(exps.two_beta) * tau ** -exps.alpha * _profile(omega, nu)
            record.append(t_star - tau, Spectrum(grid, values))
        record.stop_reason = StopReason.BLOWUP_DETECTED
        return record

    return build
