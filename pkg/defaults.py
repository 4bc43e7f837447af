"""
Entropy Region Toolkit Defaults - Single Source of Truth
========================================================

This module holds ONLY the configuration constants and reference counts used
across the toolkit. Every tolerance and cap here can be overridden per call
(keyword argument) or per CLI run (flag).

Reference counts:
- Basic Shannon inequality counts and extremal ray / orbit counts of the
  Shannon cone for small ground sets
- Variable class counts of the standard copy instances
"""

import os

# =============================================================================
# GROUND SETS
# =============================================================================
# Soft cap on the number of elements. Masks are python ints, the cap only
# keeps dense 2^n tables at desk scale.

MAX_GROUND_SIZE = 26

# Element labels: a letter followed by digits, underscores or primes
LABEL_PATTERN = r"[A-Za-z][0-9_']*"

# =============================================================================
# FLOATING POINT TOLERANCES (distributions only)
# =============================================================================

PROFILE_TOLERANCE = 1e-9       # entropy profile assertions, bits
MASS_TOLERANCE = 1e-12         # probability mass normalization

# =============================================================================
# RESOURCE CAPS
# =============================================================================

MAX_TABLE_CELLS = 2 ** 24      # dense joint distribution tables
DEFAULT_MAX_RAYS = 2_000_000   # extreme rays or projected rows kept
DEFAULT_TIMEOUT = None         # seconds, None = no deadline
DEFAULT_JOBS = 1               # worker processes for redundancy checks
GENERIC_VECTOR_RETRIES = 200   # rejection sampling budget for generic vectors

# =============================================================================
# CLI EXIT CODES
# =============================================================================

EXIT_OK = 0          # success, implied, feasible as requested
EXIT_NEGATIVE = 1    # negative answer (not implied, infeasible target)
EXIT_USAGE = 2       # usage or input format error
EXIT_CAP = 3         # resource cap hit

# =============================================================================
# REFERENCE COUNTS
# =============================================================================
# Basic inequalities: n + C(n,2) * 2^(n-2)

SHANNON_COUNTS = {
    2: 3,
    3: 9,
    4: 28,
    5: 85,
    6: 246,
}

# Extremal rays of the Shannon cone and their classes under S_n
SHANNON_RAY_COUNTS = {
    2: (3, 2),
    3: (8, 4),
    4: (41, 11),
    5: (117983, 1320),   # long run only
}

# Rays of the 4-element cone with negative Ingleton value
VAMOS_TYPE_RAYS_N4 = 6

# Single step c'=c:ab on abcd: LP variables before and after eliminations
SINGLE_COPY_VARIABLES = (31, 9)

# Three step full copy sequence on a1 b1 c1 d1 with inherited symmetries
EQ13_GROUND_SIZE = 14
EQ13_VARIABLE_CLASSES = 2351

# =============================================================================
# TEST SUITE
# =============================================================================
# Hours-scale computations run only when explicitly requested

LONG_TESTS = os.environ.get("ENTROPY_LONG_TESTS", "") == "1"
