"""
Utility modules: configuration, JSON codec, console reporting and workers.
"""

from .config import Config, RunConfig, parse_rational
from .reporting import Reporter
from .workers import parallel_map, worker_count

__all__ = ['Config', 'RunConfig', 'parse_rational', 'Reporter', 'parallel_map', 'worker_count']
