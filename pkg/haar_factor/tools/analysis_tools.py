"""
Commands that inspect vectors and families: norms, Jones checks, reiteration
and single Gamlen-Gaudet cover steps.
"""

from typing import Any, Dict, List

from ..core.dyadic import DyadicInterval
from ..core.errors import InputFormatError
from ..core.haar_space import HaarVector, convex_ascent, h1_norm, leaf_profile, sl_inf_norm_sq
from ..core.jones import IntervalFamily, check_jones, reiterate
from ..core.quasi_diag import LEFT, RIGHT, gamlen_gaudet_children
from ..utils.codec import load_json
from ..utils.config import RunConfig
from .base_tools import EXIT_OK, EXIT_VERIFY, INPUT_PARAM, OUTPUT_PARAM, BaseCommand, CommandOutcome


class NormsCommand(BaseCommand):
    """SL∞ and H¹ norms of a Haar vector."""

    def get_name(self) -> str:
        return "norms"

    def get_description(self) -> str:
        return "Exact SL∞ norm, H¹ estimate and leaf profile of a Haar vector"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "input": INPUT_PARAM,
            "ascent": {
                "type": "boolean",
                "description": "Also run the conditional-gradient ascent for sup⟨f, c⟩ over the SL∞ ball",
                "required": False,
                "default": False
            },
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(input=run.input_path)
        f = HaarVector.from_json(load_json(run.input_path))
        profile = leaf_profile(f, f.depth)
        h1 = h1_norm(f)
        report: Dict[str, Any] = {
            "kind": "norms",
            "depth": f.depth,
            "support": len(f),
            "sl_inf_norm_sq": str(sl_inf_norm_sq(f)),
            "h1": h1.to_json(),
            "leaf_profile": {
                "depth": profile.depth,
                "max": str(profile.maximum()),
                "min": str(min(profile.values)),
                "leaves": len(profile.values),
            },
        }
        if run.extra.get("ascent"):
            iterations = int(self.config.get('construction.ascent_iterations', 500))
            report["ascent"] = convex_ascent(f, iterations=iterations).to_json()
        summary = [
            f"sl_inf_norm_sq = {report['sl_inf_norm_sq']}",
            f"h1 = {h1.value:.12g} ± {h1.error:.2e}",
        ]
        return CommandOutcome(report=report, title="Norms", summary=summary)


class CheckJonesCommand(BaseCommand):
    """Check (J1)-(J4) for a family file."""

    def get_name(self) -> str:
        return "check-jones"

    def get_description(self) -> str:
        return "Check Jones' compatibility conditions (J1)-(J4) and report κ"

    def get_parameters(self) -> Dict[str, Any]:
        return {"input": INPUT_PARAM, "output": OUTPUT_PARAM}

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(input=run.input_path)
        family = IntervalFamily.from_json(load_json(run.input_path))
        result = check_jones(family, workers=self.workers())
        report = {"kind": "jones", **result.to_json()}
        for violation in result.violations:
            self.log(f"{violation.condition}: {violation.message}", "warning")
        summary = [
            f"satisfied = {result.satisfied}",
            f"κ = {result.kappa}",
            f"triples tested = {result.triples_tested}",
        ]
        return CommandOutcome(
            report=report,
            exit_code=EXIT_OK if result.satisfied else EXIT_VERIFY,
            title="Jones conditions",
            summary=summary,
        )


class ReiterateCommand(BaseCommand):
    """Compose a base family with a selector over its indices."""

    def get_name(self) -> str:
        return "reiterate"

    def get_description(self) -> str:
        return "Compose a base family with a selector family over its indices"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "input": {
                "type": "path",
                "description": "JSON with 'base' (a family) and 'selector' (index -> list of base indices)",
                "required": True
            },
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(input=run.input_path)
        data = load_json(run.input_path)
        if not isinstance(data, dict) or "base" not in data or not isinstance(data.get("selector"), dict):
            raise InputFormatError("reiterate input needs 'base' and a 'selector' map")
        base = IntervalFamily.from_json(data["base"])
        selector = {
            DyadicInterval.from_json(key): [DyadicInterval.from_json(i) for i in chosen]
            for key, chosen in data["selector"].items()
        }
        composed = reiterate(base, selector)
        result = check_jones(composed, workers=self.workers())
        report = {"kind": "reiterate", "family": composed.to_json(), "jones": result.to_json()}
        summary = [f"indices = {len(composed)}", f"κ = {result.kappa}"]
        return CommandOutcome(
            report=report,
            exit_code=EXIT_OK if result.satisfied else EXIT_VERIFY,
            title="Reiterated family",
            summary=summary,
        )


def _intervals(data: Any, name: str) -> List[DyadicInterval]:
    if not isinstance(data, list):
        raise InputFormatError(f"'{name}' must be a list of intervals")
    return [DyadicInterval.from_json(item) for item in data]


class BuildGGCommand(BaseCommand):
    """One Gamlen-Gaudet cover step: parents, chosen halves and the level-m cover."""

    def get_name(self) -> str:
        return "build-gg"

    def get_description(self) -> str:
        return "Cover the left or right halves of parent blocks by level-m intervals"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "input": {
                "type": "path",
                "description": "JSON with 'parents' (intervals), 'side' (left/right) and 'level' (m)",
                "required": True
            },
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(input=run.input_path)
        data = load_json(run.input_path)
        if not isinstance(data, dict):
            raise InputFormatError("build-gg input must be an object")
        parents = _intervals(data.get("parents"), "parents")
        side = data.get("side", LEFT)
        if side not in (LEFT, RIGHT):
            raise InputFormatError(f"side must be '{LEFT}' or '{RIGHT}', got {side!r}")
        try:
            level = int(data["level"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"build-gg input needs an integer 'level': {e}") from e
        cover = gamlen_gaudet_children(parents, side, level)
        halves = [p.halves()[0 if side == LEFT else 1] for p in sorted(parents)]
        report = {
            "kind": "gg_cover",
            "side": side,
            "level": level,
            "parents": [p.to_json() for p in sorted(parents)],
            "halves": [h.to_json() for h in halves],
            "cover": [k.to_json() for k in cover],
        }
        summary = [f"{len(parents)} parents", f"{len(cover)} intervals at level {level}"]
        return CommandOutcome(report=report, title="Gamlen-Gaudet cover", summary=summary)
