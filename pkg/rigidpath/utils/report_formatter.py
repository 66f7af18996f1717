"""
Console summaries of pipeline runs
"""

from typing import Mapping, Optional, Sequence

from colorama import Fore, Style

from rigidpath.metrics import MetricsReport


def _score_color(value: float) -> str:
    if value >= 0.95:
        return Fore.GREEN
    if value >= 0.8:
        return Fore.YELLOW
    return Fore.RED


def format_run_summary(labels: Mapping[int, int], counts: Mapping[str, int], flags: Sequence[str],
                       report: Optional[MetricsReport] = None) -> str:
    """
    Short coloured summary of a run

    Args:
        labels: Final labels
        counts: Pipeline counts (clips, candidates, edges, ...)
        flags: Raised assumption flags
        report: Metrics, when ground truth was given

    Returns:
        Multi-line string for the terminal
    """
    background = sum(1 for v in labels.values() if v == 1)
    lines = [
        f"{Fore.CYAN}rigidpath{Style.RESET_ALL}: {background}/{len(labels)} trajectories labeled background",
        "  " + ", ".join(f"{name} {value}" for name, value in counts.items()),
    ]
    if report is not None:
        for name, value in (("precision", report.precision), ("recall", report.recall),
                            ("F-score", report.f_score)):
            lines.append(f"  {name:<9} {_score_color(value)}{value:.4f}{Style.RESET_ALL}")
    if flags:
        lines.append(f"  {Fore.YELLOW}assumption flags: {', '.join(flags)}{Style.RESET_ALL}")
    return "\n".join(lines)


def format_scenarios(scenarios: Mapping) -> str:
    """One line per scenario, expected failures marked"""
    lines = []
    for name, scenario in scenarios.items():
        marker = f" {Fore.YELLOW}(expected to fail){Style.RESET_ALL}" if scenario.expected_fail else ""
        lines.append(f"{Fore.CYAN}{name:<24}{Style.RESET_ALL} {scenario.description}{marker}")
    return "\n".join(lines)
