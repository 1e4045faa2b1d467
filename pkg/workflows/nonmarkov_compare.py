"""
Non-Markovian comparison workflow

For a frozen spectrum, the non-Markovian rate at fixed rescaled time τ must
approach the Markovian rate as the coupling decreases.
"""

import math
from typing import Any, Dict, List

from kinetics.cumulant import HistorySpectra
from kinetics.grid import exponential_spectrum, make_log_grid
from kinetics.markov import markovian_rhs_mc, nonmarkovian_rhs_tau_mc
from kinetics.sampling import McConfig
from utils.reports import templates
from workflows.base import ReportWorkflow

FINAL_GAP_MAX = 0.15
GAP_STDERRS = 3.0


class NonMarkovCompareWorkflow(ReportWorkflow):
    """Relative gap between non-Markovian and Markovian rates per coupling"""

    command = "nonmarkov-compare"
    title = "Non-Markovian Comparison"
    report_name = "nonmarkov_report.json"

    def _execute(self, outcome: Dict[str, Any]) -> None:
        cfg = self.config
        grid = make_log_grid(cfg.eps_min, cfg.eps_max, cfg.n_nodes)
        spectrum = exponential_spectrum(grid, 1.0)
        k1 = math.sqrt(2.0 * cfg.nonmarkov_energy)
        mc_cfg = McConfig(cfg.nonmarkov_samples, cfg.seed, cfg.proposal_scale, cfg.time_quadrature_steps)

        print("🎲 Markovian reference rate...")
        markov = markovian_rhs_mc(spectrum, k1, mc_cfg, self.threads)
        reference = abs(markov.mean)
        print(f"✓ Markovian rate {markov.mean:.6g} ± {markov.stderr:.2g}")

        rows: List[Dict[str, Any]] = []
        for coupling in cfg.nonmarkov_couplings:
            history = HistorySpectra.frozen(spectrum, cfg.nonmarkov_tau / coupling ** 2)
            estimate = nonmarkovian_rhs_tau_mc(history, k1, cfg.nonmarkov_tau, coupling, mc_cfg, self.threads)
            gap = abs(estimate.mean - markov.mean) / reference
            gap_stderr = math.hypot(estimate.stderr, markov.stderr) / reference
            rows.append({"coupling": coupling, "mc": estimate.to_dict(), "gap": gap, "gap_stderr": gap_stderr})
            print(f"  → ε={coupling:g}: rate {estimate.mean:.6g} ± {estimate.stderr:.2g}, gap {gap:.3%}")

        gaps = [row["gap"] for row in rows]
        decreasing = all(
            b["gap"] <= a["gap"] + GAP_STDERRS * math.hypot(a["gap_stderr"], b["gap_stderr"])
            for a, b in zip(rows[:-1], rows[1:])
        )
        final = rows[-1]
        outcome["assertions"] = [
            templates.assertion("gap_decreasing", decreasing, gaps, "decreasing", GAP_STDERRS),
            templates.assertion(
                "final_gap",
                final["gap"] <= FINAL_GAP_MAX + GAP_STDERRS * final["gap_stderr"],
                final["gap"],
                0.0,
                FINAL_GAP_MAX,
            ),
        ]
        outcome["results"] = {
            "tau": cfg.nonmarkov_tau,
            "epsilon1": cfg.nonmarkov_energy,
            "markovian": markov.to_dict(),
            "rows": rows,
        }

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        if not results:
            return []
        return [f"  ε={row['coupling']:g}: gap {row['gap']:.3%} ± {row['gap_stderr']:.1%}" for row in results["rows"]]


def run_nonmarkov_compare(run_config, out_dir=None, threads=None) -> Dict[str, Any]:
    """Convenience function to run the non-Markovian comparison workflow"""
    workflow = NonMarkovCompareWorkflow(run_config, out_dir, threads)
    return workflow.run()
