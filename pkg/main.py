"""Entry point for the Dirac shell toolkit (same as the `dirac-shell` script)."""

import sys

from dirac_shell.cli import main

if __name__ == "__main__":
    sys.exit(main())
