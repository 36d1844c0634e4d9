"""
Subcommands of the haar-factor command line.
"""

from .base_tools import BaseCommand, CommandOutcome
from .manager import CommandManager

__all__ = [
    'CommandManager',
    'BaseCommand',
    'CommandOutcome'
]
