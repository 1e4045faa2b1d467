"""
Residual workflow

Fits the collapsed profile of a stored trajectory and evaluates how far it
is from solving νφ + ωφ_ω = C[φ] on the collapse window.
"""

from typing import Any, Dict, List, Optional

import numpy as np

from kinetics.collision import KernelParams
from kinetics.errors import FitError
from kinetics.selfsim import selfsim_residual
from utils.reports import templates
from workflows.selfsim_fit import SelfSimFitWorkflow

RESIDUAL_RATIO_MAX = 0.1


class ResidualWorkflow(SelfSimFitWorkflow):
    """Residual of the nonlinear eigenvalue problem for the fitted profile"""

    command = "residual"
    title = "Self-Similar Residual"
    report_name = "residual_report.json"

    def _execute(self, outcome: Dict[str, Any]) -> None:
        cfg = self.config
        result = self.fit(self.load_trajectory())
        profile = result.profile

        print(f"🧮 Evaluating the residual on {profile.grid.size} ω nodes...")
        residual = selfsim_residual(profile, result.nu_fit, KernelParams(cfg.gamma), self.threads)
        self.store.write_spectrum("residual.csv", residual, header="omega,residual")

        omega = profile.grid.nodes
        inside = (omega >= cfg.collapse_omega_min) & (omega <= cfg.collapse_omega_max)
        scale = float(np.max(np.abs(result.nu_fit * profile.values[inside]), initial=0.0))
        if scale <= 0.0:
            raise FitError("profile vanishes on the collapse window")
        ratio = float(np.max(np.abs(residual.values[inside]))) / scale
        print(f"✓ ‖R‖∞ / ‖νφ‖∞ = {ratio:.4f}")

        outcome["results"] = {
            "nu_fit": result.nu_fit,
            "t_star": result.t_star,
            "residual_ratio": ratio,
            "window": [cfg.collapse_omega_min, cfg.collapse_omega_max],
            "n_points": int(np.count_nonzero(inside)),
            "trajectory_dir": str(self.trajectory_dir),
        }
        outcome["assertions"] = [
            templates.assertion("residual_ratio", ratio <= RESIDUAL_RATIO_MAX, ratio, 0.0, RESIDUAL_RATIO_MAX),
        ]

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        if not results:
            return []
        return [
            f"  ν: {results['nu_fit']:.6f}",
            f"  Residual ratio: {results['residual_ratio']:.4f} over {results['n_points']} nodes",
        ]


def run_residual(run_config, out_dir=None, threads=None, trajectory_dir: Optional[str] = None) -> Dict[str, Any]:
    """Convenience function to run the residual workflow"""
    workflow = ResidualWorkflow(run_config, out_dir, threads, trajectory_dir)
    return workflow.run()
