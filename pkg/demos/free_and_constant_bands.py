"""
free_and_constant_bands.py -- exact anchors for the Fourier fiber solver
- free operator (third order, two channels): eigenvalues are (2*pi*l + t)^3
- constant coefficient (fourth order): closed form theta^4 + mu_j theta^2
Both are solved per 2x2 harmonic block, so agreement should sit at roundoff.
"""

import numpy as np

from blochspec import (BlochProblem, OperatorSpec, constant_series, mean_matrix,
                       mu_pred, selfadjoint_operator, solve_bloch, sweep_bands)

K = 16
T_SAMPLES = (0.3, 1.0, np.pi + 0.2)

# ---------- free operator ----------
free = OperatorSpec(n=3, m=2, coefficients={}, self_adjoint_declared=True)
sol = solve_bloch(BlochProblem(spec=free, t=0.7, K=K))
exact = np.sort(np.repeat([(2 * np.pi * l + 0.7) ** 3 for l in range(-K, K + 1)], 2))
err = np.abs((np.sort(sol.eigenvalues.real) - exact) / exact).max()
print("free operator, t=0.7: %d eigenvalues, max relative error %.2e" %
      (len(exact), err))

# ---------- constant coefficient ----------
C = np.array([[1.0, 1j], [-1j, 1.0]])      # mean matrix eigenvalues 0 and 2
spec = selfadjoint_operator(4, constant_series(C))
avg = mean_matrix(spec)
print("constant P2, mu =", np.round(avg.mu, 12))
for t in T_SAMPLES:
    sol = solve_bloch(BlochProblem(spec=spec, t=t, K=K))
    exact = np.sort(np.concatenate([mu_pred(avg, 4, l, t) for l in range(-K, K + 1)]))
    err = np.abs((np.sort(sol.eigenvalues.real) - exact) / exact).max()
    print("  t = %-8.4f max relative error %.2e" % (t, err))

# ---------- the same closed form as band intervals ----------
# sweeping t across one period turns each (k, j) branch into a band; for the
# constant operator the band edges follow from the endpoints and the interior
# minimum of theta^4 + mu_j theta^2
bands = sweep_bands(spec, range(-2, 3), t_points=129)
print("\nbands for the constant operator, k in [-2, 2]:")
for b in sorted(bands, key=lambda b: (b.lo, b.hi)):
    flag = " (tracking ambiguous)" if b.tracking_ambiguous else ""
    print("  k=%+d j=%d  [%14.4f, %14.4f]%s" % (b.k, b.j, b.lo, b.hi, flag))
