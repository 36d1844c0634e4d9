"""
Step log for the constructions.
"""

import datetime
from collections import defaultdict
from typing import Any, Dict, List, Optional

from ..utils.reporting import Reporter


class ConstructionTrace:
    """
    Records construction steps and errors, optionally echoing them to a Reporter.
    """

    def __init__(self, reporter: Optional[Reporter] = None, max_items: Optional[int] = None):
        self.reporter = reporter
        self.max_items = max_items
        self.steps: List[Dict[str, Any]] = []
        self.errors: List[Dict[str, Any]] = []
        self.stage_counts: defaultdict = defaultdict(int)

    def add_step(self, stage: str, message: str, level: str = "info", **data: Any):
        record = {"stage": stage, "message": message, "timestamp": self._get_timestamp()}
        record.update(data)
        self.steps.append(record)
        self.stage_counts[stage] += 1
        if self.max_items is not None and len(self.steps) > self.max_items:
            self.steps.pop(0)
        if self.reporter is not None:
            self.reporter.log(f"[{stage}] {message}", level)

    def add_error(self, stage: str, error: str, **data: Any):
        record = {"stage": stage, "error": error, "timestamp": self._get_timestamp()}
        record.update(data)
        self.errors.append(record)
        if self.reporter is not None:
            self.reporter.log(f"[{stage}] {error}", "error")

    def get_recent(self, count: int = 3) -> List[Dict[str, Any]]:
        return self.steps[-count:] if self.steps else []

    def get_stage_counts(self) -> Dict[str, int]:
        return dict(self.stage_counts)

    def clear(self):
        self.steps.clear()
        self.errors.clear()
        self.stage_counts.clear()

    def export_trace(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "errors": self.errors,
            "stage_counts": dict(self.stage_counts),
        }

    def import_trace(self, data: Dict[str, Any]):
        self.steps = data.get("steps", [])
        self.errors = data.get("errors", [])
        self.stage_counts = defaultdict(int, data.get("stage_counts", {}))

    def _get_timestamp(self) -> str:
        return datetime.datetime.now().isoformat()


def note(trace: Optional[ConstructionTrace], stage: str, message: str, level: str = "debug", **data: Any):
    """Add a step when a trace is attached."""
    if trace is not None:
        trace.add_step(stage, message, level, **data)
