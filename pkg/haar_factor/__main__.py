#!/usr/bin/env python3
"""
Entry point for running haar-factor as a module.
Usage: python -m haar_factor factor --operator op.json --delta 1/2 --eta 1
"""

from .cli import cli_main

if __name__ == "__main__":
    cli_main()
