"""
Shared run loop of the wtkin workflows

Every workflow writes the echoed config, runs its computation, collects
assertions and writes one JSON report through the artifact store.
"""

from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from config import RunConfig
from kinetics.errors import KineticsError, NotAsymptoticError
from utils.artifacts import get_store
from utils.reports import templates

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NOT_ASYMPTOTIC = 2


class ReportWorkflow:
    """Base class; subclasses set command/report_name and implement _execute"""

    command = ""
    title = ""
    report_name = ""

    def __init__(
        self,
        run_config: RunConfig,
        out_dir: Union[str, Path, None] = None,
        threads: Optional[int] = None,
    ):
        self.config = run_config
        self.store = get_store(out_dir)
        self.threads = int(threads or run_config.threads)

        print(f"{self.title} workflow initialized (output: {self.store.out_dir})")

    def run(self) -> Dict[str, Any]:
        """
        Run the workflow and write its report

        Returns:
            Dict with results: {
                "results": Dict[str, Any],
                "assertions": List[Dict],
                "error": Optional[str],
                "exit_code": int,
                "report": str
            }
        """
        print(f"\n{'='*60}")
        print(f"wtkin {self.command} - {datetime.now().strftime('%Y-%m-%d %I:%M %p')}")
        print(f"{'='*60}\n")

        outcome: Dict[str, Any] = {
            "results": {},
            "assertions": [],
            "error": None,
            "exit_code": EXIT_OK,
        }
        self.store.write_config(self.config.to_text())

        try:
            self._execute(outcome)
        except NotAsymptoticError as e:
            outcome["error"] = templates.error_text(e)
            outcome["exit_code"] = EXIT_NOT_ASYMPTOTIC
            print(f"✗ {outcome['error']}")
        except KineticsError as e:
            outcome["error"] = templates.error_text(e)
            outcome["exit_code"] = EXIT_FAILED
            print(f"✗ {outcome['error']}")

        if outcome["exit_code"] == EXIT_OK and not templates.all_passed(outcome["assertions"]):
            outcome["exit_code"] = EXIT_FAILED

        report = templates.envelope(
            self.command,
            self.config.echo(),
            outcome["results"],
            outcome["assertions"],
            outcome["error"],
        )
        outcome["report"] = str(self.store.write_json(self.report_name, report))

        self._print_summary(outcome)
        return outcome

    def _execute(self, outcome: Dict[str, Any]) -> None:
        raise NotImplementedError

    def _summary_lines(self, results: Dict[str, Any]) -> List[str]:
        return []

    def _print_summary(self, outcome: Dict[str, Any]) -> None:
        lines = self._summary_lines(outcome["results"])
        lines.append(f"  Report: {outcome['report']}")
        if outcome["error"]:
            lines.append(f"  ⚠️  Error: {outcome['error']}")
        templates.print_summary(f"{self.title} Summary", lines, outcome["assertions"])
