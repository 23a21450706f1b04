"""Synthetic-benchmark evaluation pipeline for perturbation-based GNN explainers.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from gnnx._gnnx import *  # noqa: F401,F403
from gnnx._gnnx import __doc__  # noqa: F401

__version__ = "0.1.0"
