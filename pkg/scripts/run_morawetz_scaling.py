#!/usr/bin/env python3
"""Morawetz identity check and the T-scaling of averaged local sextic mass.

Runs a slowly dispersing multiscale packet to T in {40, 80, 160} with
R = T^(1/3) and fits the log-log slope of the time-averaged local L^6 mass
(expected near -2/3), alongside the dM/dt identity residual at R = 8.
"""

import sys
from pathlib import Path

from cqnls.config import load_config
from cqnls.experiments import run

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "morawetz_scaling.json"

if __name__ == "__main__":
    sys.exit(run(load_config(sys.argv[1] if len(sys.argv) > 1 else CONFIG)))
