"""
Report templates and console formatting for wtkin
"""

from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from kinetics import __version__


class ReportTemplates:
    """Building blocks of the JSON reports and console summaries"""

    @staticmethod
    def assertion(
        name: str,
        passed: bool,
        measured: Any,
        expected: Any,
        tolerance: Any = None,
    ) -> Dict[str, Any]:
        """
        One machine-readable check

        Args:
            name: Stable identifier of the check
            passed: Outcome
            measured: Value obtained by the run
            expected: Reference value or range
            tolerance: Allowed deviation, if any

        Returns:
            Assertion dict for the report's assertions array
        """
        return {
            "name": name,
            "passed": bool(passed),
            "measured": measured,
            "expected": expected,
            "tolerance": tolerance,
        }

    @staticmethod
    def envelope(
        command: str,
        config_echo: Dict[str, Any],
        results: Dict[str, Any],
        assertions: List[Dict[str, Any]],
        error: Optional[str] = None,
    ) -> Dict[str, Any]:
        """Full report; generated_at is the only field that varies between reruns"""
        return {
            "command": command,
            "version": __version__,
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "config": config_echo,
            "results": results,
            "assertions": assertions,
            "error": error,
        }

    @staticmethod
    def error_text(exc: BaseException) -> str:
        return f"{type(exc).__name__}: {exc}"

    @staticmethod
    def all_passed(assertions: List[Dict[str, Any]]) -> bool:
        return all(a["passed"] for a in assertions)

    @staticmethod
    def print_summary(title: str, lines: List[str], assertions: List[Dict[str, Any]]) -> None:
        """Boxed console summary with one marker per assertion"""
        print(f"\n{'='*60}")
        print(title)
        print(f"{'='*60}")
        for line in lines:
            print(line)
        if assertions:
            print()
            for a in assertions:
                marker = "✓" if a["passed"] else "✗"
                print(f"{marker} {a['name']}: measured={_short(a['measured'])} expected={_short(a['expected'])}")
        print(f"{'='*60}\n")


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)) and len(value) > 4:
        return f"[{len(value)} values]"
    return str(value)


# Export templates instance
templates = ReportTemplates()
