#!/usr/bin/env python3
"""
rigidpath - finds the static background of a moving-camera video from its feature trajectories.
"""

import sys

from colorama import Fore, Style, init

# Initialize colorama
init(autoreset=True)

from rigidpath import __version__
from rigidpath.cli import main

RIGIDPATH_BANNER = f"""
{Fore.CYAN}rigidpath v{__version__}{Style.RESET_ALL}
{Fore.YELLOW}dominant rigid motion over clips -> static background{Style.RESET_ALL}
"""

if __name__ == "__main__":
    # Banner on interactive terminals only, stdout stays clean for pipes
    if sys.stderr.isatty():
        print(RIGIDPATH_BANNER, file=sys.stderr)
    sys.exit(main())
