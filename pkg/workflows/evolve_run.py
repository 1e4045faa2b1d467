"""
Evolve workflow

Integrates the isotropic kinetic equation from the configured initial
condition and persists the trajectory:
1. Build the log grid and f₀
2. Run the adaptive integrator until t_end, blow-up or step underflow
3. Save trajectory.json plus one CSV per snapshot
4. Extrapolate T* when blow-up was detected
"""

from typing import Any, Dict, List

from kinetics import __version__
from kinetics.collision import KernelParams
from kinetics.errors import FitError, NotAsymptoticError
from kinetics.evolve import EvolveConfig, StopReason, estimate_blowup_time, initial_spectrum, run
from kinetics.grid import make_log_grid
from workflows.base import EXIT_NOT_ASYMPTOTIC, ReportWorkflow


def _drift(series: List[float]) -> float:
    return abs(series[-1] - series[0]) / series[0] if series[0] > 0.0 else 0.0


class EvolveWorkflow(ReportWorkflow):
    """Runs one integration and writes the trajectory"""

    command = "evolve"
    title = "Evolve"
    report_name = "evolve_report.json"

    def integrator_config(self) -> EvolveConfig:
        cfg = self.config
        return EvolveConfig(
            dt_init=cfg.dt_init,
            dt_min=cfg.dt_min,
            safety=cfg.safety,
            rtol=cfg.rtol,
            atol=cfg.atol,
            max_growth=cfg.max_growth,
            t_end=cfg.t_end,
            snapshot_every=cfg.snapshot_every,
            blowup_growth_factor=cfg.blowup_growth_factor,
            negativity_tol=cfg.negativity_tol,
            conserve_moments=cfg.conserve_moments,
        )

    def _execute(self, outcome: Dict[str, Any]) -> None:
        cfg = self.config
        grid = make_log_grid(cfg.eps_min, cfg.eps_max, cfg.n_nodes)
        f0 = initial_spectrum(grid, cfg.ic_family, cfg.ic_amplitude, cfg.ic_temperature, cfg.ic_mu)
        print(f"⏱  Integrating {cfg.ic_family} initial condition on {grid.size} nodes...")

        record = run(f0, self.integrator_config(), KernelParams(cfg.gamma), self.threads)
        path = self.store.save_trajectory(record, {"config": cfg.echo(), "version": __version__})
        print(f"✓ Saved {len(record)} snapshots to {path.parent}")

        results = {
            "stop_reason": record.stop_reason.value,
            "t_final": record.times[-1],
            "snapshots": len(record),
            "steps_accepted": record.steps_accepted,
            "steps_rejected": record.steps_rejected,
            "sup_growth": record.sup_f[-1] / record.sup_f[0] if record.sup_f[0] > 0.0 else None,
            "n_drift": _drift(record.n_moment),
            "e_drift": _drift(record.e_moment),
            "t_star": None,
            "blowup_fit_residual": None,
        }

        if record.stop_reason == StopReason.BLOWUP_DETECTED:
            try:
                estimate = estimate_blowup_time(record)
                results["t_star"] = estimate.t_star
                results["blowup_fit_residual"] = estimate.residual
                print(f"✓ Blow-up detected, extrapolated T* = {estimate.t_star:.9g}")
            except (NotAsymptoticError, FitError) as e:
                print(f"⚠️  Blow-up detected but T* extrapolation failed: {e}")
        elif record.stop_reason == StopReason.DT_UNDERFLOW:
            outcome["error"] = f"dt_underflow: step size fell below dt_min at t={record.times[-1]:.9g}"
            outcome["exit_code"] = EXIT_NOT_ASYMPTOTIC
            print(f"✗ {outcome['error']}")
        else:
            print(f"✓ Reached t_end = {record.times[-1]:.6g}")

        outcome["results"] = results

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        if not results:
            return []
        return [
            f"  Stop reason: {results['stop_reason']}",
            f"  Final time: {results['t_final']:.9g}",
            f"  Snapshots: {results['snapshots']}",
            f"  Steps accepted / rejected: {results['steps_accepted']} / {results['steps_rejected']}",
            f"  Particle number drift: {results['n_drift']:.3e}",
            f"  Energy drift: {results['e_drift']:.3e}",
        ]


def run_evolve(run_config, out_dir=None, threads=None) -> Dict[str, Any]:
    """
    Convenience function to run the evolve workflow

    Returns:
        Results dictionary
    """
    workflow = EvolveWorkflow(run_config, out_dir, threads)
    return workflow.run()
