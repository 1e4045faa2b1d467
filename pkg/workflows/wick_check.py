"""
Wick check workflow

1. Enumerated Gaussian moments against Ryser permanents
2. Unbalanced moments vanish
3. Initial correlation data has L! pairing terms
4. Sampled Gaussian moments against the permanent
"""

import math
from typing import Any, Dict, List

import numpy as np

from kinetics.parallel import block_rng
from kinetics.sampling import McConfig
from kinetics.wick import initial_f_hat, mc_gaussian_moment, moment_pairings, permanent_ryser, random_psd
from utils.reports import templates
from workflows.base import ReportWorkflow

PERMANENT_RTOL = 1e-12
MC_STDERRS = 3.0


class WickCheckWorkflow(ReportWorkflow):
    """Wick factorization checks up to the configured order"""

    command = "wick-check"
    title = "Wick Check"
    report_name = "wick_report.json"

    def _execute(self, outcome: Dict[str, Any]) -> None:
        cfg = self.config
        assertions = outcome["assertions"]
        rng = block_rng(cfg.seed, 0)
        orders = range(1, cfg.wick_max_order + 1)
        matrices = {order: random_psd(order, rng) for order in orders}

        rows: List[Dict[str, Any]] = []
        for order in orders:
            c = matrices[order]
            enumerated = moment_pairings(order, order, c)
            ryser = permanent_ryser(c)
            rel = abs(enumerated - ryser) / max(abs(ryser), 1e-300)
            unbalanced = moment_pairings(order, order + 1)
            terms = len(initial_f_hat(order, lambda k: np.exp(-0.5 * k * k)))
            rows.append(
                {
                    "order": order,
                    "enumerated": enumerated,
                    "ryser": ryser,
                    "relative_difference": rel,
                    "unbalanced": unbalanced,
                    "terms": terms,
                }
            )
            assertions.append(templates.assertion(f"permanent_L{order}", rel <= PERMANENT_RTOL, rel, 0.0, PERMANENT_RTOL))
            assertions.append(templates.assertion(f"unbalanced_L{order}", unbalanced == 0j, abs(unbalanced), 0.0))
            assertions.append(
                templates.assertion(f"pairing_count_L{order}", terms == math.factorial(order), terms, math.factorial(order))
            )
        print(f"✓ Enumeration and Ryser checked for L ≤ {cfg.wick_max_order}")

        sampled: List[Dict[str, Any]] = []
        for order in range(1, min(cfg.wick_mc_max_order, cfg.wick_max_order) + 1):
            c = matrices[order]
            exact = permanent_ryser(c).real
            estimate = mc_gaussian_moment(c, order, McConfig(cfg.wick_mc_samples, cfg.seed + order), self.threads)
            passed = abs(estimate.mean - exact) <= MC_STDERRS * estimate.stderr
            sampled.append({"order": order, "exact": exact, "mc": estimate.to_dict()})
            assertions.append(templates.assertion(f"sampled_L{order}", passed, estimate.mean, exact, MC_STDERRS * estimate.stderr))
            marker = "✓" if passed else "✗"
            print(f"{marker} L={order}: MC {estimate.mean:.6g} ± {estimate.stderr:.2g}, permanent {exact:.6g}")

        structure = initial_f_hat(3, lambda k: 1.0).describe() if cfg.wick_max_order >= 3 else []
        outcome["results"] = {"orders": rows, "sampled": sampled, "order3_structure": structure}

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        if not results:
            return []
        worst = max((row["relative_difference"] for row in results["orders"]), default=0.0)
        return [
            f"  Orders checked: {len(results['orders'])}",
            f"  Worst enumeration/Ryser difference: {worst:.2e}",
            f"  Sampled orders: {len(results['sampled'])}",
        ]


def run_wick_check(run_config, out_dir=None, threads=None) -> Dict[str, Any]:
    """Convenience function to run the Wick check workflow"""
    workflow = WickCheckWorkflow(run_config, out_dir, threads)
    return workflow.run()
