"""shiftlab: windowed numerics for structured infinite operators.

Exact scalar sequences, lazy banded operator expressions, weighted-shift
spectra and kernels, explicit shift/diagonal constructions, commutant
obstruction certificates, and Schauder-system diagnostics, all evaluated
exactly on finite windows.
"""

__version__ = "0.1.0"

from . import certs, commutant, opcore, seqcore, spectral  # noqa: F401
