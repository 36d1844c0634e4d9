"""
Commands that build operators and certificates, and replay stored ones.
"""

from typing import Any, Dict, Optional

from ..core.block_ops import BlockBasis
from ..core.errors import InputFormatError
from ..core.factorization import factor_identity, replay_factorization
from ..core.generators import KINDS, GeneratorSpec, generate
from ..core.primarity import factor_primary, replay_primary
from ..core.quasi_diag import DiagonalizationCertificate, quasi_diagonalize, verify_certificate
from ..utils.codec import load_json
from ..utils.config import RunConfig
from .base_tools import EXIT_OK, EXIT_VERIFY, OPERATOR_PARAM, OUTPUT_PARAM, BaseCommand, CommandOutcome

INDEX_DEPTH_PARAM = {
    "type": "integer",
    "description": "Depth of the index tree 𝒟^d whose Haar span is factored (default: 1)",
    "required": False,
    "default": 1
}
TOL_PARAM = {
    "type": "rational",
    "description": "Neumann tolerance (default: factorization.tol from the config, 2^-40)",
    "required": False
}
SEED_PARAM = {
    "type": "integer",
    "description": "Seed for the random witnesses (default: 0)",
    "required": False,
    "default": 0
}
EMIT_PARAM = {
    "type": "boolean",
    "description": "Include the matrices R and S in the report",
    "required": False,
    "default": False
}


def factorization_settings(command: BaseCommand, run: RunConfig) -> Dict[str, Any]:
    """Witness and precision settings shared by factor and primary."""
    section = command.config.get_factorization_config()
    bits = section.get("neumann_precision_bits", 96)
    return {
        "tol": run.tol,
        "exhaustive_limit": int(section.get("exhaustive_limit", 12)),
        "random_witnesses": int(section.get("random_witnesses", 32)),
        "precision_bits": int(bits) if bits else None,
        "seed": run.seed,
        "workers": command.workers(),
        "trace": command.trace(),
    }


class GenerateCommand(BaseCommand):
    """Write a seeded test operator."""

    def get_name(self) -> str:
        return "generate"

    def get_description(self) -> str:
        return "Generate a reproducible test operator matrix"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "kind": {
                "type": "string",
                "description": "Operator family",
                "required": True,
                "choices": list(KINDS)
            },
            "depth": {"type": "integer", "description": "Haar depth N", "required": True},
            "delta": {"type": "rational", "description": "Diagonal floor (default: 1)", "required": False},
            "off_diagonal_mass": {
                "type": "rational",
                "description": "Cap on the off-diagonal ℓ¹ mass of each column and row (default: 0)",
                "required": False
            },
            "scale": {"type": "rational", "description": "Factor for scaled_diagonal (default: 1)", "required": False},
            "seed": {"type": "integer", "description": "64-bit seed (default: 0)", "required": False, "default": 0},
            "bandwidth": {
                "type": "integer",
                "description": "Largest generation gap of an off-diagonal entry (default: 1)",
                "required": False
            },
            "mask_level": {
                "type": "integer",
                "description": "Generation of the projection mask (default: 2)",
                "required": False
            },
            "entries_per_column": {
                "type": "integer",
                "description": "Off-diagonal draws per column (default: 2)",
                "required": False
            },
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(kind=run.extra.get("kind"), depth=run.depth)
        fields: Dict[str, Any] = {"kind": run.extra["kind"], "depth": run.depth, "seed": run.seed}
        if run.delta is not None:
            fields["delta"] = run.delta
        for key in ("off_diagonal_mass", "scale", "bandwidth", "mask_level", "entries_per_column"):
            if run.extra.get(key) is not None:
                fields[key] = run.extra[key]
        spec = GeneratorSpec(**fields)
        operator = generate(spec, budget=self.depth_budget())
        report = operator.to_json()
        report["generator"] = spec.to_json()
        summary = [
            f"{spec.kind} at depth {spec.depth}",
            f"{operator.nnz} nonzero entries",
            f"norm bound {operator.norm_bound} ({operator.norm_bound_source})",
        ]
        return CommandOutcome(report=report, title="Generated operator", summary=summary)


class DiagonalizeCommand(BaseCommand):
    """Run the quasi-diagonalization and write its certificate."""

    def ascent_iterations(self, run: RunConfig) -> int:
        if not run.extra.get("ascent"):
            return 0
        return int(self.config.get('construction.ascent_iterations', 500))

    def get_name(self) -> str:
        return "diagonalize"

    def get_description(self) -> str:
        return "Build an almost-diagonalizing block basis with its certificate"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "operator": OPERATOR_PARAM,
            "delta": {"type": "rational", "description": "Diagonal floor δ (default: 0)", "required": False},
            "eta": {"type": "rational", "description": "Budget scale η", "required": True},
            "index_depth": INDEX_DEPTH_PARAM,
            "ascent": {
                "type": "boolean",
                "description": "Cross-check each future bound with the conditional-gradient ascent",
                "required": False,
                "default": False
            },
            "no_normalize": {
                "type": "boolean",
                "description": "Skip the diagonal sign normalization (only with δ = 0)",
                "required": False,
                "default": False
            },
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(operator=run.operator_path, eta=run.eta)
        T = self.load_operator(run.operator_path)
        basis, certificate = quasi_diagonalize(
            T,
            run.delta or 0,
            run.eta,
            self.index_depth(run),
            normalize=not run.extra.get("no_normalize"),
            trace=self.trace(),
            workers=self.workers(),
            ascent_iterations=self.ascent_iterations(run),
        )
        report = {"kind": "diagonalize", "certificate": certificate.to_json(), "basis": basis.to_json()}
        if self.reporter.verbose:
            self.reporter.table(
                "Blocks",
                ["index", "level", "interaction", "diagonal", "Λ", "ok"],
                [
                    (r.index, r.level, r.interaction, r.diagonal, list(levels), r.ok)
                    for r, levels in zip(certificate.records, certificate.lambda_sets[1:])
                ],
            )
        summary = [
            f"frequencies {certificate.frequencies}",
            f"flipped diagonal signs: {len(certificate.diagonal_flips)}",
            f"feasible = {certificate.feasible}",
        ]
        return CommandOutcome(
            report=report,
            exit_code=EXIT_OK if certificate.feasible else EXIT_VERIFY,
            title="Quasi-diagonalization",
            summary=summary,
        )


class FactorCommand(BaseCommand):
    """Factor the identity through an operator with large diagonal."""

    def get_name(self) -> str:
        return "factor"

    def get_description(self) -> str:
        return "Factor the identity through T with ‖R‖‖S‖ ≤ (1+η)/δ"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "operator": OPERATOR_PARAM,
            "delta": {"type": "rational", "description": "Diagonal floor δ > 0", "required": True},
            "eta": {"type": "rational", "description": "Slack η > 0", "required": True},
            "index_depth": INDEX_DEPTH_PARAM,
            "tol": TOL_PARAM,
            "seed": SEED_PARAM,
            "emit_matrices": EMIT_PARAM,
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(operator=run.operator_path, delta=run.delta, eta=run.eta)
        T = self.load_operator(run.operator_path)
        result = factor_identity(T, run.delta, run.eta, self.index_depth(run), **factorization_settings(self, run))
        report = result.to_json(emit_matrices=run.emit_matrices)
        summary = [
            f"η' = {result.eta_prime}",
            f"contraction = {float(result.contraction):.3e}",
            f"‖R‖‖S‖ ≤ {result.norm_product_bound}",
            f"residual = {float(result.residual):.3e}",
            f"Neumann terms = {result.neumann.terms}",
        ]
        return CommandOutcome(report=report, title="Factorization", summary=summary)


class PrimaryCommand(BaseCommand):
    """Factor the identity through T or Id − T."""

    def get_name(self) -> str:
        return "primary"

    def get_description(self) -> str:
        return "Factor the identity through T or Id − T with ‖R‖‖S‖ ≤ 2 + η"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "operator": OPERATOR_PARAM,
            "eta": {"type": "rational", "description": "Slack η > 0", "required": True},
            "index_depth": INDEX_DEPTH_PARAM,
            "block_depth": {
                "type": "integer",
                "description": "Index depth of the underlying δ = 0 diagonalization (default: 2 × index depth)",
                "required": False
            },
            "tol": TOL_PARAM,
            "seed": SEED_PARAM,
            "emit_matrices": EMIT_PARAM,
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(operator=run.operator_path, eta=run.eta)
        T = self.load_operator(run.operator_path)
        block_depth: Optional[int] = run.extra.get("block_depth")
        choice, primary = factor_primary(
            T, run.eta, self.index_depth(run), block_depth=block_depth, **factorization_settings(self, run)
        )
        report = primary.to_json(emit_matrices=run.emit_matrices)
        summary = [
            f"choice = {choice}",
            f"δ used = {primary.result.delta}",
            f"‖R‖‖S‖ ≤ {primary.result.norm_product_bound}",
            f"residual = {float(primary.result.residual):.3e}",
        ]
        return CommandOutcome(report=report, title="Primary factorization", summary=summary)


def _recorded_feasible(data: Dict[str, Any]) -> bool:
    recorded = data.get("feasible")
    if not isinstance(recorded, bool):
        raise InputFormatError("the report has no boolean 'feasible' field")
    return recorded


class VerifyCommand(BaseCommand):
    """Replay a stored diagonalize, factor or primary report against its operator."""

    def get_name(self) -> str:
        return "verify"

    def get_description(self) -> str:
        return "Re-check a stored certificate using only the report and the operator"

    def get_parameters(self) -> Dict[str, Any]:
        return {
            "input": {"type": "path", "description": "Report written by diagonalize, factor or primary", "required": True},
            "operator": OPERATOR_PARAM,
            "output": OUTPUT_PARAM,
        }

    def execute(self, run: RunConfig) -> CommandOutcome:
        self.validate_parameters(input=run.input_path, operator=run.operator_path)
        data = load_json(run.input_path)
        T = self.load_operator(run.operator_path)
        kind = data.get("kind") if isinstance(data, dict) else None
        if kind == "diagonalize":
            certificate = DiagonalizationCertificate.from_json(data["certificate"])
            basis = BlockBasis.from_json(data["basis"], check=False)
            replay = verify_certificate(T, basis, certificate)
            recorded = certificate.feasible
        elif kind == "factor":
            replay = replay_factorization(T, data)
            recorded = _recorded_feasible(data)
        elif kind == "primary":
            replay = replay_primary(T, data)
            recorded = _recorded_feasible(data)
        else:
            raise InputFormatError(f"cannot verify a report of kind {kind!r}")
        consistent = replay.passed == recorded
        for failure in replay.failures:
            self.log(f"{failure.get('check')}: {failure}", "warning")
        report = {"kind": "verify", "report_kind": kind, "recorded_feasible": recorded, **replay.to_json()}
        summary = [f"{replay.checks} checks", f"passed = {replay.passed}", f"recorded feasible = {recorded}"]
        return CommandOutcome(
            report=report,
            exit_code=EXIT_OK if consistent else EXIT_VERIFY,
            title="Certificate replay",
            summary=summary,
        )
