"""
Command-line entry for STL probability estimation.

Run from the repository root with ``python src/main.py <command> ...``;
``python -m stlhdr`` is equivalent once ``src`` is on the path.
"""
import sys

from stlhdr.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
