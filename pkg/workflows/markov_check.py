"""
Markov check workflow

1. Push a Gaussian test function through the memory kernel for a sequence
   of couplings and check convergence to 2πψ(0)
2. Compare the Monte-Carlo Markovian rate in wavevector space with the
   isotropic collision operator for f = e^{-ε}
"""

import math
from typing import Any, Dict, List

import numpy as np

from kinetics.collision import DEFAULT_GAMMA, K_SPACE_GAMMA, KernelParams, collision_rhs_at
from kinetics.grid import exponential_spectrum, make_log_grid
from kinetics.markov import errors_converging, markov_limit_table, markovian_rhs_mc
from kinetics.sampling import McConfig
from utils.reports import templates
from workflows.base import ReportWorkflow

LIMIT_TOLERANCE = 0.05
ORACLE_RELATIVE = 0.05
ORACLE_STDERRS = 3.0


class MarkovCheckWorkflow(ReportWorkflow):
    """Markovian limit table and the kinetic-reduction oracle"""

    command = "markov-check"
    title = "Markov Check"
    report_name = "mc_report.json"

    def _execute(self, outcome: Dict[str, Any]) -> None:
        cfg = self.config
        assertions = outcome["assertions"]

        print("📈 Markovian limit of the memory kernel...")
        table = markov_limit_table(
            cfg.markov_tau, cfg.markov_couplings, cfg.markov_omega_half_width, cfg.markov_omega_points
        )
        errors = [row["rel_error"] for row in table]
        assertions.append(templates.assertion("limit_errors_converging", errors_converging(errors), errors, "decreasing"))
        assertions.append(
            templates.assertion("limit_final_error", errors[-1] <= LIMIT_TOLERANCE, errors[-1], 0.0, LIMIT_TOLERANCE)
        )
        print(f"✓ Relative errors: {', '.join(f'{e:.2e}' for e in errors)}")

        print("🎲 Kinetic-reduction oracle...")
        grid = make_log_grid(cfg.eps_min, cfg.eps_max, cfg.oracle_nodes)
        f = exponential_spectrum(grid, 1.0)
        k_space = KernelParams.k_space()
        oracle: List[Dict[str, Any]] = []
        for index, eps1 in enumerate(cfg.oracle_energies):
            mc_cfg = McConfig(cfg.mc_samples, cfg.seed + index, cfg.proposal_scale, cfg.time_quadrature_steps)
            estimate = markovian_rhs_mc(f, math.sqrt(2.0 * eps1), mc_cfg, self.threads)
            kinetic = collision_rhs_at(f, eps1, k_space)
            isotropic = collision_rhs_at(f, eps1, KernelParams(DEFAULT_GAMMA))
            diff = abs(estimate.mean - kinetic)
            relative = diff / abs(kinetic) if kinetic != 0.0 else float("inf")
            row = {
                "epsilon": eps1,
                "mc": estimate.to_dict(),
                "kinetic": kinetic,
                "relative_difference": relative,
                "measured_gamma_factor": estimate.mean / isotropic if isotropic != 0.0 else None,
            }
            oracle.append(row)
            passed = diff <= ORACLE_STDERRS * estimate.stderr and relative <= ORACLE_RELATIVE
            assertions.append(
                templates.assertion(
                    f"oracle_eps_{eps1:g}",
                    passed,
                    estimate.mean,
                    kinetic,
                    {"stderrs": ORACLE_STDERRS, "stderr": estimate.stderr, "relative": ORACLE_RELATIVE},
                )
            )
            marker = "✓" if passed else "✗"
            print(f"{marker} ε₁={eps1:g}: MC {estimate.mean:.6g} ± {estimate.stderr:.2g}, kinetic {kinetic:.6g}")

        factors = [row["measured_gamma_factor"] for row in oracle if row["measured_gamma_factor"] is not None]
        outcome["results"] = {
            "markov_limit": {"tau": cfg.markov_tau, "table": table},
            "oracle": oracle,
            "gamma": {
                "isotropic": DEFAULT_GAMMA,
                "k_space": K_SPACE_GAMMA,
                "expected_factor": K_SPACE_GAMMA / DEFAULT_GAMMA,
                "measured_factor": float(np.mean(factors)) if factors else None,
            },
        }

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        if not results:
            return []
        gamma = results["gamma"]
        measured = gamma["measured_factor"]
        return [
            f"  Limit table couplings: {len(results['markov_limit']['table'])}",
            f"  Oracle energies: {len(results['oracle'])}",
            f"  Γ factor expected / measured: {gamma['expected_factor']:.6g} / "
            + (f"{measured:.6g}" if measured is not None else "n/a"),
        ]


def run_markov_check(run_config, out_dir=None, threads=None) -> Dict[str, Any]:
    """Convenience function to run the Markov check workflow"""
    workflow = MarkovCheckWorkflow(run_config, out_dir, threads)
    return workflow.run()
