"""
The construction figure: stacked rows of dyadic intervals drawn to SVG.
"""

from typing import Any, Dict, List, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..core.dyadic import DyadicInterval
from ..core.errors import InputFormatError
from ..core.jones import IntervalFamily, member_set
from ..utils.codec import load_json
from ..utils.config import RunConfig
from .base_tools import BaseCommand, CommandOutcome

Row = Tuple[str, List[DyadicInterval]]

ROW_COLORS = ("#4c72b0", "#dd8452", "#55a868")
HASH_SALT = "haar-factor"


def _row(data: Any, name: str) -> List[DyadicInterval]:
    if not isinstance(data, list):
        raise InputFormatError(f"'{name}' must be a list of intervals")
    return sorted(DyadicInterval.from_json(item) for item in data)


def figure_rows(data: Any) -> List[Row]:
    """
    Row layout of the figure, top to bottom.

    A build-gg report gives three rows (parents, chosen halves, level-m cover);
    a family gives one row per index holding its members.
    """
    if isinstance(data, dict) and data.get("kind") == "gg_cover":
        cover = _row(data.get("cover"), "cover")
        if not cover:
            raise InputFormatError("the cover is empty; nothing to draw")
        level = data.get("level", "m")
        return [
            ("parents", _row(data.get("parents"), "parents")),
            (f"{data.get('side', 'left')} halves", _row(data.get("halves"), "halves")),
            (f"cover at level {level}", cover),
        ]
    family = IntervalFamily.from_json(data)
    if len(family) == 0:
        raise InputFormatError("the family has no indices; nothing to draw")
    rows: List[Row] = []
    for index in family.index_set:
        intervals: List[DyadicInterval] = []
        for member in family.members(index):
            intervals.extend([member] if isinstance(member, DyadicInterval) else member_set(member).components)
        rows.append((f"B{index}", sorted(intervals)))
    return rows


def render_figure(rows: List[Row], path: str):
    """Draw the rows as horizontal bars on [0, 1) and save a byte-stable SVG."""
    plt.rcParams["svg.hashsalt"] = HASH_SALT
    fig, ax = plt.subplots(figsize=(8, 0.6 * len(rows) + 1))
    for position, (label, intervals) in enumerate(rows):
        y = len(rows) - 1 - position
        color = ROW_COLORS[position % len(ROW_COLORS)]
        spans = [(float(i.left), float(i.measure)) for i in intervals]
        ax.broken_barh(spans, (y - 0.35, 0.7), facecolors=color, edgecolors="black", linewidth=0.5)
    ax.set_xlim(0, 1)
    ax.set_ylim(-0.6, len(rows) - 0.4)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels([label for label, _ in reversed(rows)])
    ax.set_xlabel("[0, 1)")
    ax.grid(True, axis="x", linestyle=":")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


class FigureCommand(BaseCommand):
    """Render a Gamlen-Gaudet cover step or a family as stacked interval rows."""

    owns_output = True

    def get_name(self) -> str:
        return "figure"

    def get_description(self) -> str:
        return "Draw the Gamlen-Gaudet cover (or a family) as an SVG figure"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "input": {
                "type": "path",
                "description": "A build-gg report or a family file",
                "required": True
            },
            "output": {
                "type": "path",
                "description": "SVG file to write",
                "required": True
            },
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(input=run.input_path, output=run.output_path)
        rows = figure_rows(load_json(run.input_path))
        render_figure(rows, run.output_path)
        self.log(f"wrote {run.output_path}", "success")
        report = {
            "kind": "figure",
            "path": run.output_path,
            "rows": [{"label": label, "intervals": [i.to_json() for i in intervals]} for label, intervals in rows],
        }
        return CommandOutcome(report=report, title="Figure", summary=[f"{len(rows)} rows", run.output_path])
