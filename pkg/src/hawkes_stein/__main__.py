"""python -m hawkes_stein."""

import sys

from .cli import main

sys.exit(main())
