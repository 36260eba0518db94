"""Run the command line interface with `python -m newformology`."""

import sys

from newformology.cli import main

sys.exit(main())
