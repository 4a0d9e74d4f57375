"""
gap_hunting.py -- band sweeps, interval merging, and the finite-gap criteria.

Two contrasting operators:
  * the classic second-order scalar problem with a 2*cos(2*pi*x) potential,
    which opens a gap near every integer multiple of pi^2 (the first one has
    width about 2);
  * a third-order scalar operator with the same potential, whose spectrum
    covers the whole real line (odd order, odd channel count), so the sweep
    must come back empty-handed.
Afterwards the averaged-matrix criteria are evaluated on their own for a
fourth-order three-channel example where only the diameter condition can
decide the question.
"""

import numpy as np

from blochspec import (certified_window, check_theorem3, constant_series,
                       in_spectrum, mean_matrix, merge_and_gaps,
                       selfadjoint_operator, series_from_harmonics, sweep_bands)

cos_series = series_from_harmonics(1, {1: [[1.0]], -1: [[1.0]]}, real_valued=True)

# ---------- second order: gaps open ----------
hill = selfadjoint_operator(2, cos_series)
bands = sweep_bands(hill, range(-2, 3))
window = certified_window(bands)
report = merge_and_gaps(bands, window)
print("second order, potential 2cos(2 pi x):")
print("  certified window [%.2f, %.2f], %d merged intervals, %d gaps"
      % (window[0], window[1], len(report.merged), len(report.gaps)))
for lo, hi in report.gaps[:4]:
    mid = 0.5 * (lo + hi)
    print("  gap [%9.4f, %9.4f]  width %7.4f  midpoint in spectrum: %s"
          % (lo, hi, hi - lo, in_spectrum(hill, mid).contains))
print("  (first gap sits near pi^2 = %.4f with width about 2)" % np.pi ** 2)

# ---------- third order: no gaps anywhere ----------
odd = selfadjoint_operator(3, cos_series)
bands = sweep_bands(odd, range(-2, 3))
window = certified_window(bands)
report = merge_and_gaps(bands, window)
crit = check_theorem3(mean_matrix(odd), odd.n, odd.m)
print("\nthird order, same potential:")
print("  %d gaps inside [%.1f, %.1f]; criteria predict: %s"
      % (len(report.gaps), window[0], window[1], crit.prediction))

# ---------- criteria without any sweep ----------
# for even order the decision rests on three simple averaged eigenvalues
# whose pairwise sums can never be equalized by any index triple
for mu in ([0.0, 1.0, 3.0], [0.0, 1.0, 2.0]):
    spec = selfadjoint_operator(4, constant_series(np.diag(mu)))
    crit = check_theorem3(mean_matrix(spec), 4, 3)
    print("\nfourth order, mu = %s:" % mu)
    print("  diameter condition applies: %s" % crit.c_applies)
    if crit.c_applies:
        print("  min diameter %.3f over index triples, witness %s, alpha bound %.4f"
              % (crit.min_diam, crit.c_witness, crit.alpha_bound))
    else:
        print("  equalizing triple %s gives diameter %.1f -> %s"
              % (crit.min_triple, crit.min_diam, crit.prediction))
