"""
Self-similar fit workflow

Reads a blow-up trajectory written by the evolve workflow, fits T*, ν and
the collapsed profile, and checks the exponents against the expected range.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from kinetics.errors import ParameterError
from kinetics.evolve import TrajectoryRecord
from kinetics.selfsim import ProfileFit, fit_selfsim
from utils.artifacts import ArtifactStore
from utils.reports import templates
from workflows.base import ReportWorkflow

NU_RANGE = (1.15, 1.30)
TWO_BETA_EXPECTED = 2.139
TWO_BETA_TOLERANCE = 0.1
COLLAPSE_SLACK = 1e-6


def collapse_nonincreasing(errors: List[float], slack: float = COLLAPSE_SLACK) -> bool:
    return all(b <= a * (1.0 + slack) + 1e-12 for a, b in zip(errors[:-1], errors[1:]))


class SelfSimFitWorkflow(ReportWorkflow):
    """Fits the self-similar profile of a stored trajectory"""

    command = "fit-selfsim"
    title = "Self-Similar Fit"
    report_name = "selfsim_report.json"

    def __init__(self, run_config, out_dir=None, threads=None, trajectory_dir: Union[str, Path, None] = None):
        super().__init__(run_config, out_dir, threads)
        self.trajectory_dir = Path(trajectory_dir or run_config.trajectory_dir or self.store.out_dir)

    def load_trajectory(self) -> TrajectoryRecord:
        try:
            record = ArtifactStore(self.trajectory_dir).load_trajectory()
        except (OSError, KeyError, ValueError) as e:
            raise ParameterError(f"cannot load trajectory from {self.trajectory_dir}: {e}") from e
        print(f"✓ Loaded {len(record)} snapshots from {self.trajectory_dir}")
        return record

    def fit(self, record: TrajectoryRecord) -> ProfileFit:
        cfg = self.config
        return fit_selfsim(
            record,
            nu_guess=cfg.nu_guess,
            iterations=cfg.selfsim_iterations,
            tail_window=(cfg.tail_omega_min, cfg.tail_omega_max),
            collapse_window=(cfg.collapse_omega_min, cfg.collapse_omega_max),
        )

    def _execute(self, outcome: Dict[str, Any]) -> None:
        record = self.load_trajectory()
        print("📐 Fitting T*, ν and the collapsed profile...")
        result = self.fit(record)
        self.store.write_spectrum("profile.csv", result.profile, header="omega,phi")
        print(f"✓ ν = {result.nu_fit:.6f}, 2β = {result.exponents.two_beta:.6f}, T* = {result.t_star:.9g}")

        outcome["results"] = {**result.to_dict(), "trajectory_dir": str(self.trajectory_dir)}
        outcome["assertions"] = [
            templates.assertion(
                "nu_fit_in_range",
                NU_RANGE[0] <= result.nu_fit <= NU_RANGE[1],
                result.nu_fit,
                list(NU_RANGE),
            ),
            templates.assertion(
                "two_beta_near_expected",
                abs(result.exponents.two_beta - TWO_BETA_EXPECTED) <= TWO_BETA_TOLERANCE,
                result.exponents.two_beta,
                TWO_BETA_EXPECTED,
                TWO_BETA_TOLERANCE,
            ),
            templates.assertion(
                "collapse_error_nonincreasing",
                collapse_nonincreasing(result.collapse_errors),
                result.collapse_errors,
                "nonincreasing",
                COLLAPSE_SLACK,
            ),
        ]

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        if not results:
            return []
        return [
            f"  T*: {results['t_star']:.9g}",
            f"  ν: {results['nu_fit']:.6f} ± {results['tail_stderr']:.2e}",
            f"  α: {results['alpha']:.6f}",
            f"  2β: {results['two_beta']:.6f}",
            f"  Collapse error: {results['collapse_error']:.3e}",
        ]


def run_fit_selfsim(run_config, out_dir=None, threads=None, trajectory_dir: Optional[str] = None) -> Dict[str, Any]:
    """
    Convenience function to run the self-similar fit workflow

    Returns:
        Results dictionary
    """
    workflow = SelfSimFitWorkflow(run_config, out_dir, threads, trajectory_dir)
    return workflow.run()
