#!/usr/bin/env python3
"""
haar-factor - Command Line Interface
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from rich.console import Console

from .core.errors import HaarFactorError, InfeasibleWithinDepth, VerificationFailure
from .tools.base_tools import BaseCommand
from .tools.manager import CommandManager
from .utils.codec import write_json
from .utils.config import Config
from .utils.reporting import Reporter, set_reporter

GLOBAL_KEYS = ("command", "config", "verbose", "log_level")


def _add_parameter(parser: argparse.ArgumentParser, name: str, spec: Dict[str, Any]):
    flags = [f"--{name.replace('_', '-')}"] + (["-o"] if name == "output" else [])
    help_text = spec.get("description", "")
    if spec.get("type") == "boolean":
        parser.add_argument(*flags, dest=name, action="store_true", help=help_text)
        return
    kwargs: Dict[str, Any] = {"dest": name, "help": help_text, "required": spec.get("required", False)}
    if spec.get("type") == "integer":
        kwargs["type"] = int
    if "choices" in spec:
        kwargs["choices"] = spec["choices"]
    parser.add_argument(*flags, **kwargs)


def build_parser(manager: CommandManager) -> argparse.ArgumentParser:
    """One subparser per registered command, built from its parameter schema."""
    parser = argparse.ArgumentParser(
        prog='haar-factor',
        description='Factorization of operators on the Haar system in SL∞ at desk scale',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  haar-factor generate --kind random_large_diagonal --depth 12 --delta 1/2 --off-diagonal-mass 1/10000 -o op.json
  haar-factor factor --operator op.json --delta 1/2 --eta 1 --index-depth 2 -o cert.json
  haar-factor verify --input cert.json --operator op.json
  haar-factor primary --operator mask.json --eta 1 --block-depth 2
        """
    )
    parser.add_argument('--config', help='Settings file (default: ~/.haar_factor.json)')
    parser.add_argument('--verbose', '-v', action='store_true', help='Show progress on stderr')
    parser.add_argument(
        '--log-level',
        choices=['debug', 'info', 'warning', 'error'],
        default=None,
        help='Lowest message level to show (default: output.log_level from the config)'
    )

    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True
    for name, command in manager.registry.get_all_commands().items():
        sub = subparsers.add_parser(name, help=command.get_description(), description=command.get_description())
        for param, spec in command.get_parameters().items():
            _add_parameter(sub, param, spec)
    return parser


def _emit(report: Dict[str, Any], command: Optional[BaseCommand], output: Optional[str]):
    if command is not None and command.owns_output:
        output = None
    text = write_json(report, output)
    if not output:
        sys.stdout.write(text + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point. Returns the exit code when it does not exit."""
    console = Console(stderr=True)
    config = Config()
    reporter = Reporter(console=console)
    manager = CommandManager(config, reporter)
    parser = build_parser(manager)
    args = parser.parse_args(argv)

    command: Optional[BaseCommand] = None
    output: Optional[str] = None
    try:
        if args.config:
            config.import_config(args.config)
        reporter.verbose = args.verbose or bool(config.get('output.verbose', False))
        reporter.log_level = args.log_level or config.get('output.log_level', 'info')
        set_reporter(reporter)

        params = {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS and v is not None}
        command = manager.get_command(args.command)
        output = params.get("output")
        run, outcome = manager.use_command(args.command, params)
        _emit(outcome.report, command, run.output_path)
        if outcome.title:
            reporter.panel(outcome.title, outcome.summary, style="green" if outcome.exit_code == 0 else "red")
        code = outcome.exit_code

    except KeyboardInterrupt:
        console.print("\n[yellow]⚠️ Run interrupted by user[/yellow]")
        code = 1
    except InfeasibleWithinDepth as e:
        console.print(f"[red]❌ Infeasible: {e}[/red]")
        _emit({"kind": "infeasible", "command": args.command, "message": str(e), "report": e.report}, command, output)
        code = e.exit_code
    except VerificationFailure as e:
        console.print(f"[red]❌ Verification failed: {e}[/red]")
        _emit({"kind": "verification_failure", "command": args.command, "message": str(e), "failures": e.failures},
              command, output)
        code = e.exit_code
    except HaarFactorError as e:
        console.print(f"[red]❌ Error: {e}[/red]")
        code = e.exit_code
    except (OSError, ValueError) as e:
        console.print(f"[red]❌ Error: {e}[/red]")
        code = 2
    except Exception as e:
        console.print(f"[red]❌ Error: {e}[/red]")
        code = 1
    return code


if __name__ == '__main__':
    sys.exit(main())
