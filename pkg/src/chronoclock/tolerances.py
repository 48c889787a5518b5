"""Numerical tolerances shared by every module.

Kept in one place so that test calibration has a single knob.
"""

NORM = 1e-12          # normalization of state vectors
HERMITIAN = 1e-10     # hermiticity / unitarity / orthonormality checks
EIG = 1e-9            # eigen-residuals
RANK = 1e-10          # Schmidt coefficients below this count as zero
SUPPORT = 1e-12       # squared moduli below this count as zero
CYCLIC = 1e-8         # |exp(-i E N) - 1| for a cyclic spectrum
PHASE_CLUSTER = 1e-7  # eigenphase distance to the 2 pi k / N grid
ENTROPY = 1e-9        # entropy / majorization comparisons
