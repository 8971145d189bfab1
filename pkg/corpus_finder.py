#!/usr/bin/env python3
"""
Locating input files for batch runs.
Proof scripts (.pll) and JSON vertex tables (.json) are found in directories;
plain file arguments are passed through.
"""

import logging
import os
from typing import Iterable, List, Sequence

# Set up logging
logger = logging.getLogger(__name__)

PROOF_EXTENSIONS = ('.pll', '.json')


def find_proof_files(input_dir: str, extensions: Sequence[str] = PROOF_EXTENSIONS) -> List[str]:
    """Recursively find all proof files in the input directory, sorted by path."""
    found = []
    for root, _, files in os.walk(input_dir):
        for file in files:
            if file.lower().endswith(tuple(extensions)):
                found.append(os.path.join(root, file))
    return sorted(found)


def expand_inputs(paths: Iterable[str], extensions: Sequence[str] = PROOF_EXTENSIONS) -> List[str]:
    """Files as given, directories replaced by the proof files they contain."""
    result = []
    for path in paths:
        if os.path.isdir(path):
            files = find_proof_files(path, extensions)
            if not files:
                logger.warning(f"No proof files found in {path}")
            else:
                logger.info(f"Found {len(files)} proof files in {path}")
            result.extend(files)
        elif os.path.exists(path):
            result.append(path)
        else:
            logger.warning(f"Input path does not exist: {path}")
    return result


def output_path_for(input_file: str, input_root: str, output_dir: str, suffix: str) -> str:
    """Mirror input_file's position under input_root inside output_dir, with a new suffix."""
    base = input_root if os.path.isdir(input_root) else os.path.dirname(input_root)
    rel = os.path.relpath(os.path.dirname(os.path.abspath(input_file)), os.path.abspath(base))
    target_dir = os.path.normpath(os.path.join(output_dir, rel))
    os.makedirs(target_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(input_file))[0]
    return os.path.join(target_dir, stem + suffix)
