"""
Command manager for organizing and executing subcommands.
"""

from typing import Any, Dict, List, Optional, Tuple

from ..utils.config import Config, RunConfig
from ..utils.reporting import Reporter, get_reporter
from .analysis_tools import BuildGGCommand, CheckJonesCommand, NormsCommand, ReiterateCommand
from .base_tools import BaseCommand, CommandOutcome, CommandRegistry
from .construction_tools import (
    DiagonalizeCommand,
    FactorCommand,
    GenerateCommand,
    PrimaryCommand,
    VerifyCommand,
)
from .figure_tools import FigureCommand


class CommandManager:
    """
    Holds every subcommand and runs one invocation at a time.
    """

    def __init__(self, config: Optional[Config] = None, reporter: Optional[Reporter] = None):
        self.config = config or Config()
        self.reporter = reporter or get_reporter()
        self.registry = CommandRegistry()
        self._register_default_commands()

    def _register_default_commands(self):
        # Analysis
        self.registry.register(NormsCommand(self.config, self.reporter))
        self.registry.register(CheckJonesCommand(self.config, self.reporter))
        self.registry.register(ReiterateCommand(self.config, self.reporter))
        self.registry.register(BuildGGCommand(self.config, self.reporter))

        # Construction
        self.registry.register(DiagonalizeCommand(self.config, self.reporter))
        self.registry.register(FactorCommand(self.config, self.reporter))
        self.registry.register(PrimaryCommand(self.config, self.reporter))
        self.registry.register(VerifyCommand(self.config, self.reporter))
        self.registry.register(GenerateCommand(self.config, self.reporter))

        # Output
        self.registry.register(FigureCommand(self.config, self.reporter))

    def get_command(self, name: str) -> Optional[BaseCommand]:
        return self.registry.get_command(name)

    def get_command_names(self) -> List[str]:
        return self.registry.get_command_names()

    def use_command(self, name: str, params: Dict[str, Any]) -> Tuple[RunConfig, CommandOutcome]:
        """Parse ``params`` into a RunConfig and execute the named command."""
        command = self.registry.get_command(name)
        if command is None:
            available = ", ".join(self.get_command_names())
            raise KeyError(f"Unknown command: {name}. Available commands: {available}")
        run = RunConfig.from_params(name, params, self.config)
        self.reporter.log(f"running {name}", "debug")
        return run, command.execute(run)
