"""
Reading and writing JSON reports. Rationals travel as "p/q" strings.
"""

import json
import os
from typing import Any, Optional

from ..core.errors import InputFormatError


def load_json(path: str) -> Any:
    if not os.path.exists(path):
        raise InputFormatError(f"no such file: {path}")
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from e
    except (IOError, UnicodeDecodeError) as e:
        raise InputFormatError(f"{path}: cannot read ({e})") from e


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=False)


def write_json(data: Any, path: Optional[str] = None) -> str:
    """Write to ``path`` or return the text for stdout."""
    text = dumps(data)
    if path:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w') as f:
            f.write(text + "\n")
    return text
