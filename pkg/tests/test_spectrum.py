"""Band sweeps, interval merging, gap detection, and the finite-gap criteria.

The gap-criteria checks are verified against a brute-force enumeration
written independently here, and the n=2 scalar sweep is checked against
the classical result for a cosine potential: the first spectral gap of
-y'' + 2cos(2 pi x) y is centered near pi^2 with width close to 2.
"""

import itertools

import numpy as np
import pytest

from blochspec.asymptotics import error_scales, mu_pred
from blochspec.coeffs import (
    OperatorSpec,
    constant_series,
    mean_matrix,
    selfadjoint_operator,
    series_from_harmonics,
)
from blochspec.defaults import TAU_DIAM
from blochspec.monodromy import in_spectrum
from blochspec.spectrum import (
    Band,
    band_overlap_check,
    certified_window,
    check_theorem3,
    merge_and_gaps,
    sweep_bands,
)


def avg_for(mu):
    spec = selfadjoint_operator(4, constant_series(np.diag(mu).astype(complex)))
    return mean_matrix(spec)


def triple_oracle(mu):
    # exhaustive and deliberately dumb: every (j1<j2<j3), every (i1,i2,i3)
    mu = list(mu)
    m = len(mu)
    best = None
    for jt in itertools.combinations(range(m), 3):
        worst = None
        for it in itertools.product(range(m), repeat=3):
            sums = [mu[jt[q]] + mu[it[q]] for q in range(3)]
            d = max(sums) - min(sums)
            if worst is None or d < worst:
                worst = d
        if best is None or worst > best:
            best = worst
    return best


def free_band(k, j, lo, hi):
    # hand-built band for the pure interval-arithmetic tests
    samples = np.array([[0.0, lo], [0.1, hi]])
    return Band(k=k, j=j, samples=samples, lo=lo, hi=hi, continuity_ok=True)


def test_gap_criteria_passing_triple():
    report = check_theorem3(avg_for([0.0, 1.0, 3.0]), 4, 3)
    assert report.c_applies
    assert report.min_diam == 1.0
    assert report.alpha_bound == 0.125
    assert report.c_witness == (1, 2, 3)
    assert report.prediction == "finitely_many_gaps"
    assert triple_oracle([0.0, 1.0, 3.0]) == 1.0


def test_gap_criteria_failing_triple():
    report = check_theorem3(avg_for([0.0, 1.0, 2.0]), 4, 3)
    assert not report.c_applies
    assert report.alpha_bound is None
    assert report.min_diam == 0.0
    # the only way to level the three sums is mu_3, mu_2, mu_1 -> {2,2,2}
    assert report.min_triple == (3, 2, 1)
    assert report.prediction == "no_conclusion"
    assert triple_oracle([0.0, 1.0, 2.0]) == 0.0


def test_gap_criteria_matches_enumeration_oracle():
    rng = np.random.default_rng(11)
    for _ in range(12):
        mu = np.sort(rng.uniform(-3.0, 3.0, size=4))
        if np.diff(mu).min() < 1e-3:
            continue
        report = check_theorem3(avg_for(mu), 6, 4)
        assert report.min_diam == pytest.approx(triple_oracle(mu), abs=1e-12)
        assert report.c_applies == (report.min_diam > TAU_DIAM)
        if report.c_applies:
            assert 8.0 * report.alpha_bound < report.min_diam + TAU_DIAM


def test_gap_criteria_shift_invariance():
    rng = np.random.default_rng(7)
    mu = np.sort(rng.uniform(0.0, 4.0, size=3))
    base = check_theorem3(avg_for(mu), 4, 3)
    shifted = check_theorem3(avg_for(mu + 1.75), 4, 3)
    assert shifted.c_applies == base.c_applies
    assert shifted.min_diam == pytest.approx(base.min_diam, abs=1e-10)


def test_gap_criteria_odd_order_cases():
    both_odd = check_theorem3(avg_for([0.0, 1.0, 3.0]), 3, 3)
    assert both_odd.a_applies and both_odd.prediction == "spectrum_is_R"

    spec = selfadjoint_operator(3, constant_series(np.diag([0.0, 2.0]).astype(complex)))
    one_simple = check_theorem3(mean_matrix(spec), 3, 2)
    assert one_simple.b_applies and not one_simple.a_applies
    assert one_simple.prediction == "finitely_many_gaps"

    spec = selfadjoint_operator(3, constant_series(np.diag([1.0, 1.0]).astype(complex)))
    degenerate = check_theorem3(mean_matrix(spec), 3, 2)
    assert not degenerate.b_applies
    assert degenerate.prediction == "no_conclusion"

    with pytest.raises(ValueError):
        check_theorem3(avg_for([0.0, 1.0, 3.0]), 4, 5)


def test_free_third_order_bands_exact():
    spec = OperatorSpec(n=3, m=1, coefficients={}, self_adjoint_declared=True)
    grid = np.linspace(-np.pi / 2, 1.5 * np.pi, 65, endpoint=False)
    bands = sweep_bands(spec, range(1, 4), t_grid=grid)
    assert len(bands) == 3
    for band in bands:
        lo = (2 * np.pi * band.k - np.pi / 2) ** 3
        hi = (2 * np.pi * band.k + 1.5 * np.pi) ** 3
        assert band.lo == pytest.approx(lo, rel=1e-12)
        assert band.hi == pytest.approx(hi, rel=1e-12)
        assert band.continuity_ok and not band.tracking_ambiguous
        ts = band.samples[:, 0]
        assert np.all(np.diff(ts) > 0)
    # closed ranges of consecutive k meet exactly at the window endpoints
    overlaps = band_overlap_check(bands, 1, 1)
    assert [k for k, _ in overlaps] == [1, 2]
    for _, length in overlaps:
        assert abs(length) <= 1e-9


def test_constant_coefficient_bands_follow_closed_form(constant_spec):
    bands = sweep_bands(constant_spec, range(-2, 3), t_points=129)
    avg = mean_matrix(constant_spec)
    for band in bands:
        for t, lam in band.samples:
            want = mu_pred(avg, 4, band.k, t, band.j)
            assert lam == pytest.approx(want, rel=1e-10, abs=1e-10)
        assert band.continuity_ok
        if band.k != 0:
            # k=0 alone is flagged: its fiber block vanishes at t=0 and the
            # refined grid lands on that point exactly
            assert not band.tracking_ambiguous


def test_perturbed_bands_stay_in_predictor_tubes(a3_spec):
    grid = np.linspace(-np.pi / 2, 1.5 * np.pi, 65, endpoint=False)
    bands = sweep_bands(a3_spec, range(5, 9), t_grid=grid)
    avg = mean_matrix(a3_spec)
    for band in bands:
        tube, _ = error_scales(3, band.k, 0.0, c_delta=3.0)
        for t, lam in band.samples:
            assert abs(lam - mu_pred(avg, 3, band.k, t, band.j)) <= tube


def test_tracking_flags_fire_at_even_order_pinch(quartic_spec):
    base = np.linspace(-np.pi / 2, 1.5 * np.pi, 64, endpoint=False)
    grid = np.unique(np.concatenate([base, [0.0]]))
    bands = sweep_bands(quartic_spec, range(-1, 2), t_grid=grid)
    # this grid hits t=0 and t=pi exactly, where branches of opposite k
    # collide; every branch meets a partner at one of the two points, the
    # tracker must flag the ambiguity but still follow each branch through
    for band in bands:
        assert band.tracking_ambiguous
        assert band.continuity_ok


def test_sweep_input_validation(cosine_spec):
    with pytest.raises(ValueError, match="self-adjoint"):
        sweep_bands(OperatorSpec(n=3, m=1, coefficients={},
                                 self_adjoint_declared=False), [1])
    with pytest.raises(ValueError, match="k range"):
        sweep_bands(cosine_spec, [])
    with pytest.raises(ValueError, match="coarse"):
        sweep_bands(cosine_spec, [1],
                    t_grid=np.linspace(-np.pi / 2, 1.5 * np.pi, 9, endpoint=False))
    with pytest.raises(ValueError, match="sorted"):
        sweep_bands(cosine_spec, [1], t_grid=np.array([0.5, 0.1, 0.9]))
    with pytest.raises(ValueError):
        sweep_bands(cosine_spec, [1], t_grid=np.array([-2.0, 0.0, 2.0]))


def test_merge_intervals_and_windowed_gaps():
    bands = [free_band(0, 1, 0.0, 1.0), free_band(1, 1, 2.0, 3.0)]
    report = merge_and_gaps(bands, (0.0, 3.0))
    assert report.merged == [(0.0, 1.0), (2.0, 3.0)]
    assert report.gaps == [(1.0, 2.0)]
    assert report.criteria is None

    # a gap reaching past the certified window is not classified
    short = merge_and_gaps(bands, (0.0, 1.5))
    assert short.gaps == []

    touching = [free_band(0, 1, 0.0, 1.0), free_band(1, 1, 1.0 + 1e-12, 2.0)]
    assert merge_and_gaps(touching, (0.0, 2.0)).merged == [(0.0, 2.0)]

    with pytest.raises(ValueError):
        merge_and_gaps([], (0.0, 1.0))
    with pytest.raises(ValueError):
        merge_and_gaps(bands, (1.0, 1.0))


def test_band_overlap_check_requires_consecutive_k():
    bands = [free_band(1, 1, 0.0, 1.0), free_band(3, 1, 2.0, 3.0)]
    with pytest.raises(ValueError, match="consecutive"):
        band_overlap_check(bands, 1, 1)
    with pytest.raises(ValueError):
        band_overlap_check(bands, 2, 5)


def test_odd_scalar_spectrum_has_no_gaps(cosine_spec):
    bands = sweep_bands(cosine_spec, range(-2, 3))
    report = merge_and_gaps(bands, certified_window(bands))
    assert len(report.merged) == 1
    assert report.gaps == []
    lo, hi = report.merged[0]
    assert lo == pytest.approx((-4 * np.pi - np.pi / 2) ** 3, rel=1e-6)
    assert hi == pytest.approx((4 * np.pi + 1.5 * np.pi) ** 3, rel=1e-6)


def test_hill_cosine_gap_location_and_cross_route():
    # -y'' + 2cos(2 pi x): first gap edges sit near pi^2 (1 -+ 1/pi^2),
    # i.e. center close to pi^2 and width close to 2
    series = series_from_harmonics(1, {1: [[1.0]], -1: [[1.0]]}, real_valued=True)
    spec = selfadjoint_operator(2, series)
    bands = sweep_bands(spec, range(-2, 3))
    report = merge_and_gaps(bands, certified_window(bands))
    assert len(report.gaps) >= 1
    first = report.gaps[0]
    center = 0.5 * (first[0] + first[1])
    width = first[1] - first[0]
    assert abs(center - np.pi ** 2) < 1.0
    assert 1.5 < width < 2.5

    for lo, hi in report.gaps[:2]:
        assert not in_spectrum(spec, 0.5 * (lo + hi)).contains
    for lo, hi in report.merged[:3]:
        assert in_spectrum(spec, 0.5 * (lo + hi)).contains

    # every sampled eigenvalue lies inside some merged interval
    scale = max(1.0, abs(report.window[0]), abs(report.window[1]))
    for band in bands:
        for _, lam in band.samples:
            assert any(lo - 1e-9 * scale <= lam <= hi + 1e-9 * scale
                       for lo, hi in report.merged)
