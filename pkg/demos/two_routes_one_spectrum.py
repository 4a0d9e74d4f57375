"""
two_routes_one_spectrum.py -- cross-checking the Fourier route against the
transfer-matrix route.

Route 1 diagonalizes the quasiperiodic fiber in a truncated exponential
basis.  Route 2 integrates the first-order companion system across one
period and asks whether e^{it} is an eigenvalue of the resulting transfer
matrix.  Both see the same operator, so every Galerkin eigenvalue must make
the characteristic polynomial vanish at u = e^{it}, and bisecting the
transfer route back to the fiber must land on the Galerkin value.
"""

import numpy as np

from blochspec import (BlochProblem, bisect_to_fiber, char_poly_in_u,
                       in_spectrum, label_eigenvalues, mean_matrix,
                       selfadjoint_operator, series_from_harmonics, solve_bloch)

T = 1.0

C = np.array([[1.0, 1j], [-1j, 1.0]])
Q1 = np.array([[0.3, 0.2 - 0.1j], [0.1 + 0.05j, -0.2]])
mapping = {0: C, 1: 0.5 * Q1, -1: 0.5 * Q1.conj().T}
spec = selfadjoint_operator(3, series_from_harmonics(2, mapping))

sol = solve_bloch(BlochProblem(spec=spec, t=T, K=16))
labels = label_eigenvalues(sol, mean_matrix(spec), range(-1, 2))
lams = sorted(float(sol.eigenvalues[c].real) for c in labels.values())

print("Galerkin eigenvalues (k in [-1,1]):", ["%.4f" % v for v in lams])
print()
print("lambda          |S(e^it)|/max|coef|   bisected lambda     rel diff")
for lam in lams:
    cp = char_poly_in_u(spec, lam)
    at_fiber = abs(np.polyval(cp.coeffs, np.exp(1j * T))) / np.abs(cp.coeffs).max()
    refined = bisect_to_fiber(spec, T, lam)
    print("%13.6f   %18.3e   %16.8f   %10.2e" %
          (lam, at_fiber, refined.lam, abs(refined.lam - lam) / abs(lam)))

# membership by the multiplier criterion: points straddling a band edge
probe_in = lams[2]
probe_out = 0.5 * (lams[1] + lams[2])    # may or may not be in a gap
for lam in (probe_in, probe_out):
    hit = in_spectrum(spec, lam)
    print("in_spectrum(%10.4f) = %-5s  nearest multiplier off circle by %.2e"
          % (lam, hit.contains, hit.min_offcircle))
