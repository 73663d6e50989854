"""Run the acceptance criteria and print one PASS/FAIL line per criterion.

Usage: python3 scripts/run_acceptance.py

Runs ``tests/test_acceptance.py``, which executes ``quasimod verify all
--seed 1`` twice (a few minutes on one core).  The exit status is pytest's.
"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "-s", "-p", "no:cacheprovider"]))
