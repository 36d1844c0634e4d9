"""
Human-readable console output. Everything here goes to stderr so that stdout
carries only JSON reports.
"""

from typing import Any, Iterable, Optional, Sequence

from rich import box
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

LEVELS = {"debug": 10, "info": 20, "success": 20, "warning": 30, "error": 40}
STYLES = {
    "debug": "dim",
    "info": "blue",
    "warning": "yellow",
    "error": "red",
    "success": "green",
}


class Reporter:
    """Leveled, styled logging plus summary panels and tables."""

    def __init__(self, verbose: bool = False, log_level: str = "info", console: Optional[Console] = None):
        self.verbose = verbose
        self.log_level = log_level if log_level in LEVELS else "info"
        self.console = console or Console(stderr=True)

    def enabled(self, level: str) -> bool:
        if level == "error":
            return True
        if not self.verbose and level in ("debug", "info"):
            return False
        return LEVELS.get(level, 20) >= LEVELS[self.log_level]

    def log(self, message: str, level: str = "info"):
        if not self.enabled(level):
            return
        style = STYLES.get(level, "white")
        self.console.print(f"[{style}]{escape(message)}[/{style}]")

    def panel(self, title: str, lines: Iterable[str], style: str = "green"):
        self.console.print(Panel("\n".join(lines), title=title, border_style=style, box=box.ROUNDED))

    def table(self, title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]):
        table = Table(title=title, box=box.ROUNDED)
        for i, name in enumerate(columns):
            table.add_column(name, style="cyan" if i == 0 else "white", no_wrap=i == 0)
        for row in rows:
            table.add_row(*(str(cell) for cell in row))
        self.console.print(table)


_default: Optional[Reporter] = None


def get_reporter() -> Reporter:
    global _default
    if _default is None:
        _default = Reporter()
    return _default


def set_reporter(reporter: Reporter):
    global _default
    _default = reporter
