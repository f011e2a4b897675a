"""Module entry point so `python -m ictasim` matches the installed script."""

import sys

from ictasim.cli import main

if __name__ == "__main__":
    sys.exit(main())
