"""
Main entry point for the MomentSeg toolkit. Delegates to ``src.cli``.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
