"""
asymptotic_residuals.py -- how fast fiber eigenvalues settle onto their
constant-coefficient predictors as the block index k grows.

The operator is third order with a two-channel periodic part: a constant
Hermitian mean plus a small trigonometric perturbation with two harmonics.
For this order the eigenvalue residual should scale like ln k (the k^(n-3)
factor is 1) and the eigenfunction should converge to a single exponential
times the mean-matrix eigenvector at rate ln(k)/k.
"""

import numpy as np

from blochspec import (fit_error_constants, selfadjoint_operator,
                       series_from_harmonics, verify_eigenvalue_asymptotics)

EPS = 0.5
T = 1.0
K_RANGE = range(5, 41)

C = np.array([[1.0, 1j], [-1j, 1.0]])
Q1 = np.array([[0.3, 0.2 - 0.1j], [0.1 + 0.05j, -0.2]])
Q2 = np.array([[0.1, 0.05], [-0.05j, 0.2]])
mapping = {0: C, 1: EPS * Q1, -1: EPS * Q1.conj().T,
           2: EPS * Q2, -2: EPS * Q2.conj().T}
spec = selfadjoint_operator(3, series_from_harmonics(2, mapping))

diags = verify_eigenvalue_asymptotics(spec, T, K_RANGE, K=96)

print("k    j   lambda            |lambda - mu_pred|   /ln(k)      eigfn dev")
for d in diags:
    if d.k % 5 == 0:
        print("%-4d %d  %15.6f   %12.3e    %10.3e  %10.3e" %
              (d.k, d.j, d.lambda_computed, d.residual,
               d.normalized_residual, d.eigfn_deviation))

fit = fit_error_constants(diags)
print("\nfitted residual constant (global):  %.4f" % fit["c_delta"])
for j, c in sorted(fit["c_delta_by_j"].items()):
    print("  branch j=%d: %.4f" % (j, c))
print("worst normalized residual: %.4e" % fit["max_normalized"])

# the normalized columns should be flat-ish in k; a growing trend would mean
# the predictor order is wrong
lo = max(d.normalized_residual for d in diags if d.k <= 20)
hi = max(d.normalized_residual for d in diags if d.k >= 20)
print("normalized residual, max over k<=20: %.3e   max over k>=20: %.3e" % (lo, hi))
