#!/usr/bin/env python3
"""
JSON input and output for the toolkit.
Handles reports, oracle tables, input lists, and the results file that lets
batch runs skip inputs already processed.
"""

import json
import logging
import os
import sys
import threading
from pathlib import Path
from typing import List, Optional

from syntax import ParseError

# Set up logging
logger = logging.getLogger(__name__)

_results_lock = threading.Lock()


def read_json(path: str):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {str(e)}") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg}", e.lineno, e.colno) from None


def write_json(data, path: Optional[str] = None):
    """Write data with indent 2 to path, or to stdout when path is None or '-'."""
    if path is None or path == '-':
        json.dump(data, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
    logger.debug(f"Wrote {path}")


def write_text(text: str, path: Optional[str] = None):
    if path is None or path == '-':
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    logger.debug(f"Wrote {path}")


def load_oracle_table(path: str) -> List[int]:
    """A selector table: a JSON list of call indices, or an object with a 'table' list."""
    data = read_json(path)
    if isinstance(data, dict):
        data = data.get('table')
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a list of call indices")
    try:
        return [int(v) for v in data]
    except (TypeError, ValueError):
        raise ParseError(f"{path}: call indices must be integers") from None


def load_inputs(path: str) -> list:
    """Input values for the representation runner: a JSON list, or one value per line."""
    if path.endswith('.json'):
        data = read_json(path)
        if not isinstance(data, list):
            raise ParseError(f"{path}: expected a JSON list of inputs")
        return data
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return [line.strip() for line in f if line.strip()]
    except OSError as e:
        raise ParseError(f"cannot read {path}: {str(e)}") from None


def load_results(results_file: Optional[str]) -> dict:
    """Load the record of inputs already processed."""
    if results_file and os.path.exists(results_file):
        try:
            with open(results_file, 'r', encoding='utf-8') as f:
                return json.load(f)
        except Exception as e:
            logger.error(f"Error reading results file {results_file}: {str(e)}")
            return {}
    return {}


def update_results(results_file: Optional[str], input_file: str, command: str, result: dict):
    """Record the result of command on input_file together with the input's modification time."""
    if not results_file:
        return
    with _results_lock:
        results = load_results(results_file)
        results[f"{command}:{input_file}"] = {
            'command': command,
            'result': result,
            'modified_at': Path(input_file).stat().st_mtime if os.path.exists(input_file) else 0,
        }
        try:
            with open(results_file, 'w', encoding='utf-8') as f:
                json.dump(results, f, indent=2)
        except Exception as e:
            logger.error(f"Error updating results file {results_file}: {str(e)}")


def should_process(input_file: str, command: str, results: dict, force: bool = False) -> bool:
    """True unless the input was processed by command and has not changed since."""
    if force:
        return True
    entry = results.get(f"{command}:{input_file}")
    if entry is None:
        return True
    if not os.path.exists(input_file):
        return True
    return Path(input_file).stat().st_mtime != entry.get('modified_at', 0)
