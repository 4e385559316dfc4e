"""
Defaults shared by the library, the CLI and the validation script.
"""

import logging
import os
import sys

# Extended precision
DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 64
DEFAULT_TOLERANCE = "1e-12"
DEFAULT_DIGITS = 30

# Carleman scans
DEFAULT_REPORT_N = 10_000
DEFAULT_MARGIN_N = 100_000
DEFAULT_YANG_C = 1
# (n, bits) -> (1+1/n)^n entries kept between scans; one default scan fits
POW_CACHE_SIZE = 1 << 17

# Richardson sampling (n, 2n, 4n, ...)
DEFAULT_SAMPLE_START = 64
DEFAULT_SAMPLE_LEVELS = 10
DEFAULT_PROBE_RTOL = 1e-6

# Quadrature
DEFAULT_QUAD_TOLERANCE = "1e-14"
DEFAULT_QUAD_LEVELS = 10
GAUSS_PANELS = 4

# Worker count knob: never changes output bytes
WORKERS = int(os.environ.get("ESERIES_WORKERS", "1"))
MIN_PARALLEL_GRID = 2_000

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def configure_logging(level=logging.INFO):
    """Send log records to stderr so report output on stdout stays clean."""
    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
