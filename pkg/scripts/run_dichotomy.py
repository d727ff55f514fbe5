#!/usr/bin/env python3
"""Amplitude sweep across the dichotomy threshold.

Evolves gaussians of increasing amplitude (plus one concentrated cutoff
bubble) and tabulates classification vs. outcome.  Below the threshold the
table should show K-plus rows scattering or undecided and the K-minus
bubble blowing up.
"""

import sys
from pathlib import Path

from cqnls.config import load_config
from cqnls.experiments import run

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "dichotomy.ini"

if __name__ == "__main__":
    sys.exit(run(load_config(sys.argv[1] if len(sys.argv) > 1 else CONFIG)))
