"""Default numerical tolerances and sizes, overridable per call or via the CLI."""

import math

TAU_HERM = 1e-10     # Hermitian-defect tolerance, relative to matrix scale
TAU_ORTH = 1e-10     # orthonormality defect of eigenvector frames
TAU_EIG = 1e-9       # eigendecomposition residual, relative
TAU_SYM = 1e-10      # conjugate-harmonic symmetry of real-valued series
TAU_SEP = 1e-8       # eigenvalue separation below which a pair counts as degenerate
TAU_RES = 1e-8       # eigenpair residual relative to matrix norm
TAU_IMAG = 1e-7      # imaginary leakage allowance, scaled by max(1, |lambda|)
TAU_CONV = 1e-7      # truncation convergence, relative eigenvalue drift
TAU_WR = 1e-6        # Wronskian/Liouville determinant drift
TOL_MOD = 1e-6       # distance of a multiplier from the unit circle
TAU_CROSS = 1e-5     # agreement between the two spectral routes
TAU_MERGE = 1e-8     # interval merge slack, scaled by spectral window size
TAU_DIAM = 1e-9      # diameter threshold in the gap-criteria test
TAU_TRACK = 0.5      # eigenvector overlap needed for unambiguous branch tracking

DEFAULT_STEPS = 2048       # fixed-step integrator resolution over one period
DEFAULT_T_POINTS = 257     # quasimomentum grid for band sweeps
DT_MAX = math.pi / 8       # coarsest admissible quasimomentum spacing
K_FLOOR = 16               # smallest admissible truncation half-width

# Truncation policy: half-width needed to certify bands up to |k| = k_max for
# coefficients with harmonics up to p_max.
def truncation_for(k_max, p_max):
    return max(K_FLOOR, 2 * abs(int(k_max)) + 2 * int(p_max))


TOLERANCES = {
    "tau_herm": TAU_HERM,
    "tau_orth": TAU_ORTH,
    "tau_eig": TAU_EIG,
    "tau_sym": TAU_SYM,
    "tau_sep": TAU_SEP,
    "tau_res": TAU_RES,
    "tau_imag": TAU_IMAG,
    "tau_conv": TAU_CONV,
    "tau_wr": TAU_WR,
    "tol_mod": TOL_MOD,
    "tau_cross": TAU_CROSS,
    "tau_merge": TAU_MERGE,
    "tau_diam": TAU_DIAM,
    "tau_track": TAU_TRACK,
}
