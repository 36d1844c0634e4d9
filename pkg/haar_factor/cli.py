#!/usr/bin/env python3
"""
Command-line interface entry point for haar-factor.
This module provides the console script entry points.
"""

import sys

from .main import main


def cli_main():
    """Entry point for console scripts."""
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
