#!/usr/bin/env python3
"""Free-flow dispersive decay: sup-norm exponent fit and L^4_t L^inf_x saturation."""

import sys
from pathlib import Path

from cqnls.config import load_config
from cqnls.experiments import run

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "free_decay.ini"

if __name__ == "__main__":
    sys.exit(run(load_config(sys.argv[1] if len(sys.argv) > 1 else CONFIG)))
