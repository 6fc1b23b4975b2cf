"""Run-wide configuration constants.

Everything that makes a run reproducible or bounds its resource use lives
here; modules read these at call time so tests can monkeypatch them.
"""

# Public integer-width guard: arithmetic entry points accept n < 2**63.
INT_WIDTH_LIMIT = 1 << 63

# Largest sieve table the toolkit will allocate (one byte per integer).
SIEVE_LIMIT_CAP = 1 << 30

# Fixed seed for the randomized factor-splitting fallback.  Printed in every
# CLI run header so logs are attributable to one configuration.
FACTOR_RNG_SEED = 314159265

# Dimension cap for progression matrices: phi(w) must not exceed this.
MATRIX_DIM_CAP = 512

# Environment variable consulted for a default f-cache path.
CACHE_ENV_VAR = "CARMKIT_F_CACHE"

# CLI `verify` refuses bounds beyond these without an explicit --long flag.
LONG_RUN_A1_BOUND = 2_000_000
LONG_RUN_PP_BOUND = 10_000_000

# Fixpoint iteration cap for the closure cascade.
DEFAULT_MAX_CLOSURE_ITERS = 64
