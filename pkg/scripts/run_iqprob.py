#!/usr/bin/env python3
"""
Run iqprob from a source checkout, without installing the package.

Examples:
  python scripts/run_iqprob.py spin1 --reproduce --output pretty
  python scripts/run_iqprob.py suite all --jobs -1 --progress
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli import run  # noqa: E402

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
