"""Band structure: sweep the quasimomentum window, track eigenvalue
branches into bands, merge band ranges into the spectrum, and evaluate
the finite-gap criteria on the averaged coefficient matrix.

Branches are followed across the t-grid by eigenvector overlap; when the
best and second-best overlaps for a branch come closer than tau_track the
assignment falls back to eigenvalue proximity and the branch is flagged
as ambiguous.  The comparison frame freezes during ambiguous steps, so a
branch that mixes at an exact degeneracy re-locks onto its continuation
one step later.  When the grid spans the whole window a closing sample at
exactly t = 3 pi / 2 is appended: that fiber repeats the one at -pi/2,
but assembling it without reducing t keeps the harmonic slots aligned
with the approach from the left, so tracked branches reach their true
endpoints and consecutive band ranges meet instead of stopping one grid
cell short.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .asymptotics import b_set_intervals, label_eigenvalues
from .coeffs import mean_matrix
from .defaults import (
    DEFAULT_T_POINTS,
    DT_MAX,
    TAU_DIAM,
    TAU_HERM,
    TAU_IMAG,
    TAU_MERGE,
    TAU_TRACK,
    truncation_for,
)
from .galerkin import BlochProblem, _assemble_window, solve_bloch

_T_LO = -np.pi / 2
_T_HI = 1.5 * np.pi


@dataclass(frozen=True)
class Band:
    """Range of one tracked eigenvalue branch over the quasimomentum grid."""

    k: int
    j: int
    samples: np.ndarray          # rows (t, lambda), sorted by t
    lo: float
    hi: float
    continuity_ok: bool
    tracking_ambiguous: bool = False


@dataclass(frozen=True)
class SpectrumReport:
    bands: list
    merged: list                 # disjoint closed intervals, sorted
    gaps: list                   # open intervals strictly inside the window
    window: tuple
    criteria: object = None


@dataclass(frozen=True)
class GapCriteriaReport:
    """Which of the three finite-gap conditions hold for (C, n, m)."""

    a_applies: bool
    b_applies: bool
    c_applies: bool
    c_witness: tuple = None      # (j1, j2, j3), 1-based, best triple found
    min_diam: float = None       # min over (i1,i2,i3) of the sum-set diameter
    min_triple: tuple = None     # the (i1,i2,i3) attaining min_diam, 1-based
    alpha_bound: float = None    # min_diam / 8 when condition (c) holds
    prediction: str = "no_conclusion"


def _validate_grid(grid):
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("t-grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("t-grid must be sorted strictly increasing")
    if grid[0] < _T_LO - 1e-12 or grid[-1] >= _T_HI:
        raise ValueError("t-grid must lie in [-pi/2, 3*pi/2)")
    worst = float(np.diff(grid).max())
    if worst > DT_MAX + 1e-12:
        raise ValueError("t-grid too coarse: spacing %.4f exceeds %.4f" % (worst, DT_MAX))


def _refinement_zones(spec, avg, ks):
    # even order only: branches of opposite k pinch near t = 0 and t = pi
    if spec.n % 2:
        return []
    simple = [j + 1 for j in range(avg.m) if avg.simple_flags[j]]
    if not simple:
        return []
    j = simple[0]
    others = np.delete(avg.mu, j - 1)
    alpha = 0.25 * float(np.abs(others - avg.mu[j - 1]).min()) if len(others) else 0.5
    zones = []
    for k in ks:
        if k == 0:
            continue
        near_zero, near_pi = b_set_intervals(avg, j, alpha, k, spec.n)
        zones.extend(near_zero)
        zones.extend(near_pi)
    return zones


def _build_grid(spec, avg, ks, t_points):
    if t_points < 17:
        raise ValueError("need at least 17 quasimomentum points")
    base = np.linspace(_T_LO, _T_HI, t_points, endpoint=False)
    zones = _refinement_zones(spec, avg, ks)
    if not zones:
        return base
    h = base[1] - base[0]
    pts = []
    for t in base:
        pts.append(t)
        if any(lo < t + h and hi > t for lo, hi in zones):
            pts.extend(t + h * q / 8.0 for q in range(1, 8))
    return np.array(pts)


def _wants_seam(grid):
    # close the sweep only when the grid actually spans the full window
    h = float(np.median(np.diff(grid)))
    return grid[0] <= _T_LO + 1e-9 and _T_HI - grid[-1] <= 2 * h + 1e-12


def _real_parts(eigenvalues):
    lams = np.asarray(eigenvalues)
    leak = float(np.abs(lams.imag).max(initial=0.0))
    scale = max(1.0, float(np.abs(lams).max(initial=0.0)))
    if leak > TAU_IMAG * scale:
        raise ValueError("fiber eigenvalues have imaginary leakage %.3e" % leak)
    return lams.real.astype(float)


def _closing_fiber(spec, K):
    ls = np.arange(-K, K + 1)
    m = spec.m
    if spec.p_max == 0:
        # block diagonal: keep the per-harmonic solve so tiny eigenvalues
        # stay accurate relative to their own block, not the whole matrix
        dim = m * len(ls)
        lams = np.empty(dim)
        vecs = np.zeros((dim, dim), dtype=complex)
        for i, l in enumerate(ls):
            blk = _assemble_window(spec, _T_HI, [l])
            w, v = np.linalg.eigh(0.5 * (blk + blk.conj().T))
            sl = slice(i * m, (i + 1) * m)
            lams[sl] = w
            vecs[sl, sl] = v
        return lams, vecs
    mat = _assemble_window(spec, _T_HI, ls)
    scale = max(1.0, float(np.abs(mat).max()))
    defect = float(np.abs(mat - mat.conj().T).max())
    if defect > TAU_HERM * scale:
        raise ValueError("closing fiber matrix is not Hermitian (defect %.3e)" % defect)
    lams, vecs = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    return lams.astype(float), vecs


def _track_step(prev_vecs, prev_lams, vecs, lams):
    overlap = np.abs(prev_vecs.conj().T @ vecs)
    dist = np.abs(lams[None, :] - prev_lams[:, None])
    dist = dist / (1.0 + dist.max(initial=0.0))
    # eigenvalue proximity only breaks ties the overlaps cannot resolve
    rows, cols = linear_sum_assignment(-overlap + 1e-3 * dist)
    assign = np.empty(overlap.shape[0], dtype=int)
    assign[rows] = cols
    flagged = np.zeros(overlap.shape[0], dtype=bool)
    for b in range(overlap.shape[0]):
        top = np.partition(overlap[b], -2)[-2:]
        if top[1] < TAU_TRACK or top[1] - top[0] < TAU_TRACK:
            flagged[b] = True
    return assign, flagged


def _jump_threshold(n, lam, dt):
    # free-branch slope is n|lambda|^(1-1/n); factor 8 covers pinches
    return 8.0 * n * (1.0 + abs(lam)) ** (1.0 - 1.0 / n) * dt + 1e-6 * max(1.0, abs(lam))


def sweep_bands(spec, k_range, t_grid=None, K=None, t_points=DEFAULT_T_POINTS):
    """Track the (k, j) eigenvalue branches over the quasimomentum window.

    Labels are assigned at the first grid point by matching against the
    constant-coefficient predictors, then carried forward by eigenvector
    overlap.  Returns one Band per (k, j) with k from k_range and j in
    1..m.  The default grid has t_points uniform samples, refined 8x near
    t = 0 and t = pi for even order where branches of opposite k pinch.
    """
    if not spec.self_adjoint_declared:
        raise ValueError("band sweeps need a spec declared self-adjoint")
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ValueError("empty k range")
    avg = mean_matrix(spec)
    if t_grid is None:
        grid = _build_grid(spec, avg, ks, t_points)
    else:
        grid = np.asarray(t_grid, dtype=float)
    _validate_grid(grid)
    if K is None:
        K = truncation_for(max(abs(ks[0]), abs(ks[-1])), spec.p_max)

    labels = [(k, j) for k in ks for j in range(1, spec.m + 1)]
    nb = len(labels)

    sol = solve_bloch(BlochProblem(spec, float(grid[0]), K))
    columns = label_eigenvalues(sol, avg, ks)
    order = [columns[lab] for lab in labels]
    ref_vecs = sol.vectors[:, order].copy()
    prev_lams = _real_parts(sol.eigenvalues)[order]
    prev_t = float(grid[0])
    samples = [[(prev_t, float(prev_lams[b]))] for b in range(nb)]
    ambiguous = np.zeros(nb, dtype=bool)
    continuous = np.ones(nb, dtype=bool)

    def step(t, lams, vecs):
        nonlocal prev_lams, prev_t
        assign, flagged = _track_step(ref_vecs, prev_lams, vecs, lams)
        dt = t - prev_t
        for b in range(nb):
            lam = float(lams[assign[b]])
            if abs(lam - prev_lams[b]) > _jump_threshold(spec.n, prev_lams[b], dt):
                continuous[b] = False
            samples[b].append((t, lam))
        ambiguous[flagged] = True
        # the reference frame only advances on unambiguous steps, so a
        # branch re-locks onto its own continuation after a degeneracy
        # (at an exact crossing the solver returns an arbitrary basis)
        keep = ~flagged
        picked = vecs[:, assign]
        ref_vecs[:, keep] = picked[:, keep]
        prev_lams = lams[assign]
        prev_t = t

    for t in grid[1:]:
        sol = solve_bloch(BlochProblem(spec, float(t), K))
        step(float(t), _real_parts(sol.eigenvalues), sol.vectors)

    if _wants_seam(grid):
        lams, vecs = _closing_fiber(spec, K)
        step(float(_T_HI), lams, vecs)

    bands = []
    for b, (k, j) in enumerate(labels):
        arr = np.array(samples[b])
        bands.append(Band(k=k, j=j, samples=arr,
                          lo=float(arr[:, 1].min()), hi=float(arr[:, 1].max()),
                          continuity_ok=bool(continuous[b]),
                          tracking_ambiguous=bool(ambiguous[b])))
    return bands


def certified_window(bands):
    """Hull of the computed band ranges; gaps are only classified inside it."""
    if not bands:
        raise ValueError("no bands to take a window from")
    return (min(b.lo for b in bands), max(b.hi for b in bands))


def merge_and_gaps(bands, window, tau_merge=TAU_MERGE):
    """Union the band ranges and list the open gaps inside the window.

    Ranges closer than tau_merge (relative to the overall scale) are
    fused.  Gaps are reported only between merged intervals and only when
    they lie entirely inside the certified window; the half-infinite
    regions beyond the outermost bands are never classified.
    """
    bands = list(bands)
    if not bands:
        raise ValueError("no bands to merge")
    lo_w, hi_w = float(window[0]), float(window[1])
    if not lo_w < hi_w:
        raise ValueError("empty spectral window")
    scale = max(1.0, max(max(abs(b.lo), abs(b.hi)) for b in bands))
    slack = tau_merge * scale
    ivals = sorted((b.lo, b.hi) for b in bands)
    merged = [list(ivals[0])]
    for lo, hi in ivals[1:]:
        if lo <= merged[-1][1] + slack:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    merged = [(a, b) for a, b in merged]
    gaps = []
    for left, right in zip(merged, merged[1:]):
        if left[1] >= lo_w - 1e-12 * scale and right[0] <= hi_w + 1e-12 * scale:
            gaps.append((left[1], right[0]))
    return SpectrumReport(bands=bands, merged=merged, gaps=gaps,
                          window=(lo_w, hi_w))


def check_theorem3(avg, n, m):
    """Finite-gap criteria from the averaged matrix eigenvalues alone.

    (a) n and m both odd; (b) n odd with at least one simple eigenvalue;
    (c) n even with three simple eigenvalues whose sum-sets with every
    index triple keep a diameter above tau_diam, checked by exhaustive
    enumeration of all m^3 triples.  alpha_bound = min_diam / 8 caps the
    admissible neighborhood half-width when (c) holds.
    """
    if m != avg.m:
        raise ValueError("size mismatch: averaged matrix is %d x %d, m=%d"
                         % (avg.m, avg.m, m))
    n = int(n)
    a_applies = bool(n % 2 == 1 and m % 2 == 1)
    b_applies = bool(n % 2 == 1 and n > 1 and np.any(avg.simple_flags))

    c_applies = False
    c_witness = min_diam = min_triple = alpha_bound = None
    if n % 2 == 0:
        simple = [j for j in range(m) if avg.simple_flags[j]]
        best = None
        for jt in itertools.combinations(simple, 3):
            worst = None
            for it in itertools.product(range(m), repeat=3):
                sums = [avg.mu[jt[q]] + avg.mu[it[q]] for q in range(3)]
                d = float(max(sums) - min(sums))
                if worst is None or d < worst[0]:
                    worst = (d, it)
            if best is None or worst[0] > best[0]:
                best = (worst[0], jt, worst[1])
        if best is not None:
            min_diam = best[0]
            c_witness = tuple(j + 1 for j in best[1])
            min_triple = tuple(i + 1 for i in best[2])
            c_applies = min_diam > TAU_DIAM
            if c_applies:
                alpha_bound = min_diam / 8.0

    if a_applies:
        prediction = "spectrum_is_R"
    elif b_applies or c_applies:
        prediction = "finitely_many_gaps"
    else:
        prediction = "no_conclusion"
    return GapCriteriaReport(a_applies=a_applies, b_applies=b_applies,
                             c_applies=c_applies, c_witness=c_witness,
                             min_diam=min_diam, min_triple=min_triple,
                             alpha_bound=alpha_bound, prediction=prediction)


def band_overlap_check(bands, j, k_threshold):
    """Overlap length of consecutive same-j band ranges (negative = gap)."""
    have = {b.k: b for b in bands if b.j == j}
    ks = [k for k in sorted(have) if k >= k_threshold]
    if len(ks) < 2:
        raise ValueError("need at least two bands at or above k=%d for j=%d"
                         % (k_threshold, j))
    out = []
    for k in range(ks[0], ks[-1]):
        if k not in have or k + 1 not in have:
            raise ValueError("missing consecutive band k=%d for j=%d" % (k + 1, j))
        lo = max(have[k].lo, have[k + 1].lo)
        hi = min(have[k].hi, have[k + 1].hi)
        out.append((k, hi - lo))
    return out
