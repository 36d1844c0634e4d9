"""
Base command interface and common functionality.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..core.errors import InputFormatError
from ..core.generators import GeneratorSpec, generate
from ..core.operators import OperatorMatrix
from ..core.trace import ConstructionTrace
from ..utils.codec import load_json
from ..utils.config import Config, RunConfig
from ..utils.reporting import Reporter, get_reporter
from ..utils.workers import worker_count

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


@dataclass
class CommandOutcome:
    """What a command hands back to the front end."""

    report: Dict[str, Any]
    exit_code: int = EXIT_OK
    title: str = ""
    summary: List[str] = field(default_factory=list)


class BaseCommand(ABC):
    """Abstract base class for all subcommands."""

    # True when --output names an artifact the command writes itself.
    owns_output = False

    def __init__(self, config: Optional[Config] = None, reporter: Optional[Reporter] = None):
        self.config = config or Config()
        self.reporter = reporter or get_reporter()

    @abstractmethod
    def get_name(self) -> str:
        """Get the command name."""
        pass

    @abstractmethod
    def get_description(self) -> str:
        """Get the command description."""
        pass

    @abstractmethod
    def get_parameters(self) -> Dict[str, Any]:
        """Get the parameter schema."""
        pass

    @abstractmethod
    def execute(self, run: RunConfig) -> CommandOutcome:
        """Execute the command on one parsed invocation."""
        pass

    def validate_parameters(self, **kwargs) -> bool:
        """Validate parameters before execution."""
        for param, spec in self.get_parameters().items():
            if spec.get('required', False) and kwargs.get(param) is None:
                raise InputFormatError(f"Missing required parameter: {param}")
        return True

    def log(self, message: str, level: str = "info"):
        self.reporter.log(f"[{self.get_name()}] {message}", level)

    def trace(self) -> ConstructionTrace:
        return ConstructionTrace(reporter=self.reporter)

    def workers(self) -> int:
        return worker_count(self.config.get('parallel.threads'))

    @staticmethod
    def index_depth(run: RunConfig) -> int:
        return 1 if run.index_depth is None else run.index_depth

    def depth_budget(self) -> int:
        return int(self.config.get('construction.depth_budget', 16))

    def load_operator(self, path: Optional[str]) -> OperatorMatrix:
        """An operator file, or a generator spec (any object with a 'kind' field)."""
        if not path:
            raise InputFormatError("an --operator file is required")
        data = load_json(path)
        if isinstance(data, dict) and "kind" in data:
            spec = GeneratorSpec.from_json(data)
            self.log(f"generating {spec.kind} operator at depth {spec.depth}", "debug")
            return generate(spec, budget=self.depth_budget())
        return OperatorMatrix.from_json(data)


# Shared parameter schemas
OUTPUT_PARAM = {
    "type": "path",
    "description": "Write the JSON report here instead of stdout",
    "required": False,
}
OPERATOR_PARAM = {
    "type": "path",
    "description": "Operator matrix JSON, or a generator spec JSON",
    "required": True,
}
INPUT_PARAM = {
    "type": "path",
    "description": "Input JSON file",
    "required": True,
}


class CommandRegistry:
    """Registry for managing available commands."""

    def __init__(self):
        self.commands: Dict[str, BaseCommand] = {}

    def register(self, command: BaseCommand):
        self.commands[command.get_name()] = command

    def get_command(self, name: str) -> Optional[BaseCommand]:
        return self.commands.get(name)

    def get_all_commands(self) -> Dict[str, BaseCommand]:
        return self.commands.copy()

    def get_command_names(self) -> List[str]:
        return list(self.commands.keys())

