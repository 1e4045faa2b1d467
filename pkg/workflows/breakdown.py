"""
Breakdown workflow

Evaluates the closure breakdown time τ* = ε^{2/(1+2β)} and checks that the
competing scales coincide there.
"""

import math
from typing import Any, Dict, List

from kinetics.cumulant import breakdown_report, hierarchy_term_sizes
from utils.reports import templates
from workflows.base import ReportWorkflow

EQUALITY_RTOL = 1e-10
HIERARCHY_ORDERS = (1, 2, 3)

# τ*(β=1.068, ε=1e-3) to 7 digits
REFERENCE_POINT = (1.068, 1e-3, 0.0122105)
REFERENCE_TOLERANCE = 1e-6


def _equal(values, rtol: float = EQUALITY_RTOL) -> bool:
    values = list(values)
    return all(math.isclose(a, b, rel_tol=rtol) for a in values for b in values)


class BreakdownWorkflow(ReportWorkflow):
    """Breakdown scales at τ* for each configured coupling"""

    command = "breakdown"
    title = "Breakdown"
    report_name = "breakdown_report.json"

    def _execute(self, outcome: Dict[str, Any]) -> None:
        cfg = self.config
        assertions = outcome["assertions"]
        rows = []
        for coupling in cfg.couplings:
            report = breakdown_report(cfg.beta, coupling)
            row = report.to_dict()
            sizes = {order: hierarchy_term_sizes(cfg.beta, coupling, report.tau_star, order) for order in HIERARCHY_ORDERS}
            row["hierarchy_term_sizes"] = {str(order): list(v) for order, v in sizes.items()}
            row["scales_equal"] = _equal((report.g22_scale, report.f11sq_scale))
            row["hierarchy_equal"] = _equal(report.hierarchy) and all(_equal(v) for v in sizes.values())
            rows.append(row)

            assertions.append(
                templates.assertion(
                    f"scales_equal_eps_{coupling:g}", row["scales_equal"], report.scales_ratio, 1.0, EQUALITY_RTOL
                )
            )
            assertions.append(
                templates.assertion(
                    f"hierarchy_equal_eps_{coupling:g}", row["hierarchy_equal"], list(report.hierarchy), "equal", EQUALITY_RTOL
                )
            )
            print(f"✓ ε={coupling:g}: τ* = {report.tau_star:.9g}")

            beta, ref_coupling, ref_tau = REFERENCE_POINT
            if math.isclose(cfg.beta, beta) and math.isclose(coupling, ref_coupling):
                assertions.append(
                    templates.assertion(
                        "tau_star_reference",
                        abs(report.tau_star - ref_tau) <= REFERENCE_TOLERANCE,
                        report.tau_star,
                        ref_tau,
                        REFERENCE_TOLERANCE,
                    )
                )

        outcome["results"] = {"beta": cfg.beta, "rows": rows}

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        if not results:
            return []
        return [f"  β = {results['beta']:g}"] + [
            f"  ε={row['coupling']:g}: τ* = {row['tau_star']:.9g}, G22/F11² = {row['scales_ratio']:.12g}"
            for row in results["rows"]
        ]


def run_breakdown(run_config, out_dir=None, threads=None) -> Dict[str, Any]:
    """Convenience function to run the breakdown workflow"""
    workflow = BreakdownWorkflow(run_config, out_dir, threads)
    return workflow.run()
