import sys

from rigidpath.cli import main

sys.exit(main())
