"""Grover preimage search on scaled ARX hashes, simulated exactly.

Subpackages cover the classical reference hashes, the reversible circuit
toolkit, the dense and sparse simulators, oracle construction, search
drivers, closed-form resource scaling, and the seeded experiment suite.
"""

__version__ = "0.1.0"

from .hashes import HashInstance  # noqa: F401
from .sim import Bipartition, NoiseModel, StateVector  # noqa: F401
