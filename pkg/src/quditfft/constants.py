"""Shared numerical tolerances and size limits.

All comparison thresholds used across the package live here so that tests,
library code, and the CLI agree on what "equal" means.
"""

# Max deviation tolerated when checking unitary identities (norm preservation,
# matrix unitarity, exact permutation laws).
EPS_UNITARY = 1e-12

# Max norm deviation tolerated for a physical state (inputs to measurement,
# post-integration states).
EPS_STATE = 1e-9

# Default cap on the number of dense amplitudes a register may hold.
DEFAULT_MAX_AMPS = 2**20

# Environment variable that overrides the amplitude cap.
MAX_AMPS_ENV = "QUDITFFT_MAX_AMPS"
