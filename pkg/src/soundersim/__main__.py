"""Run the CLI via ``python -m soundersim``."""

import sys

from .cli import main

sys.exit(main())
