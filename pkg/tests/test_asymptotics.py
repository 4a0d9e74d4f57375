"""Predictors, case partition, endpoint neighborhoods, deviation diagnostics."""

import math

import numpy as np
import pytest

from blochspec.asymptotics import (
    b_set_intervals,
    b_set_measure,
    b_set_membership,
    case_context,
    error_scales,
    fit_error_constants,
    label_eigenvalues,
    mu_pred,
    residual_identity_14,
    verify_eigenfunction_asymptotics,
    verify_eigenvalue_asymptotics,
)
from blochspec.coeffs import OperatorSpec, mean_matrix
from blochspec.galerkin import BlochProblem, solve_bloch


def test_mu_pred_reference_value(constant_spec):
    avg = mean_matrix(constant_spec)
    # hand value for n=3, k=1, t=0, mu=2: (2 pi)^3 + 2 * (2 pi)
    assert mu_pred(avg, 3, 1, 0.0, j=2) == pytest.approx(260.61658405675767, abs=1e-10)
    both = mu_pred(avg, 3, 1, 0.0)
    assert both[0] == pytest.approx((2 * np.pi) ** 3, abs=1e-10)
    with pytest.raises(ValueError):
        mu_pred(avg, 3, 1, 0.0, j=3)


def test_case_context_odd_order():
    ctx = case_context(3, 2, 7, 1.0)
    assert ctx.case_id == "1a" and ctx.a_set == (7,) and ctx.in_T


def test_case_context_even_order_partition():
    # every fiber falls in exactly one of {1b, 2, 3}; resonant sets match
    for k in (3, 10, 50):
        thr = 1.0 / math.log(k)
        grid = np.linspace(-np.pi / 2, 3 * np.pi / 2, 4001, endpoint=False)
        probes = np.concatenate([grid, [thr, -thr + 1e-15, np.pi - thr, np.pi + thr]])
        for t in probes:
            ctx = case_context(4, 2, k, t)
            near0 = abs(ctx.t) < thr
            nearpi = abs(ctx.t - np.pi) < thr
            assert [near0, nearpi, not (near0 or nearpi)].count(True) >= 1
            if near0:
                assert ctx.case_id == "2" and ctx.a_set == (k, -k)
            elif nearpi:
                assert ctx.case_id == "3" and ctx.a_set == (k, -k - 1)
            else:
                assert ctx.case_id == "1b" and ctx.a_set == (k,)
            assert ctx.in_T == (not near0 and not nearpi)
    # boundary points belong to the away-from-endpoints case
    thr = 1.0 / math.log(5)
    assert case_context(4, 1, 5, thr).case_id == "1b"
    assert case_context(4, 1, 5, np.pi + thr).case_id == "1b"
    with pytest.raises(ValueError):
        case_context(4, 1, 1, 0.5)


def test_error_scales_reference_value():
    delta, eps = error_scales(4, 10, bk=0.5)
    assert delta == pytest.approx(10 * math.log(10), rel=1e-12)
    assert eps == pytest.approx(10 * math.log(10) + 100 * 0.5, rel=1e-12)
    assert eps == pytest.approx(73.02585092994046, abs=1e-10)
    with pytest.raises(ValueError):
        error_scales(3, 1, 0.0)


def test_b_set_geometry(constant_spec):
    avg = mean_matrix(constant_spec)  # mu = {0, 2}
    # the s = j interval always centers the endpoint itself
    assert b_set_membership(0.0, 0.2, 5, avg, 1, 4)
    assert b_set_membership(np.pi, 0.2, 5, avg, 1, 4)
    zeros, pis = b_set_intervals(avg, 1, 0.2, 5, 4)
    assert len(zeros) == 2 and len(pis) == 2
    # interval widths: 2 alpha / (4 n pi k) near zero, 2 alpha / (2 n pi (2k+n-1)) near pi
    for lo, hi in zeros:
        assert hi - lo == pytest.approx(0.4 / (4 * 4 * np.pi * 5), rel=1e-12)
    for lo, hi in pis:
        assert hi - lo == pytest.approx(0.4 / (2 * 4 * np.pi * 13), rel=1e-12)
    # a fiber clearly away from both endpoints is outside
    assert not b_set_membership(0.8, 0.2, 5, avg, 1, 4)
    with pytest.raises(ValueError):
        b_set_membership(0.0, 3.0, 5, avg, 1, 4)  # alpha wider than the mu gap
    with pytest.raises(ValueError):
        b_set_intervals(avg, 1, 0.2, 0, 4)


def test_b_set_measure_scaling(constant_spec):
    avg = mean_matrix(constant_spec)
    # disjoint intervals: measure equals the summed widths
    expected = (2 * 0.4 / (4 * 4 * np.pi * 5)) + (2 * 0.4 / (2 * 4 * np.pi * 13))
    assert b_set_measure(avg, 1, 0.2, 5, 4) == pytest.approx(expected, rel=1e-12)
    # and it shrinks with k
    values = [b_set_measure(avg, 1, 0.2, k, 4) for k in range(3, 30)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_degenerate_mu_rejects_b_set():
    free = OperatorSpec(n=4, m=2, self_adjoint_declared=True)
    avg = mean_matrix(free)
    with pytest.raises(ValueError, match="not simple"):
        b_set_intervals(avg, 1, 0.1, 5, 4)


def test_eigenvalue_diagnostics_bounded(a3_spec):
    diags = verify_eigenvalue_asymptotics(a3_spec, t=1.0, k_range=range(5, 16))
    assert len(diags) == 11 * 2
    for d in diags:
        assert d.case_id == "1a"
        assert d.bk_term == 0.0  # p_max = 2 < 2k for every requested block
        assert d.residual <= 2.0  # order-one coupling, far below the band spacing
        assert d.normalized_residual <= 1.5
        assert d.normalized_eigfn_dev <= 1.5
        assert not d.ambiguous
    fits = fit_error_constants(diags)
    assert 0 < fits["c_delta"] <= 1.5
    assert set(fits["c_delta_by_j"]) == {1, 2}


def test_eigenvalue_diagnostics_preconditions(a3_spec, constant_spec):
    undeclared = OperatorSpec(n=3, m=2, coefficients=dict(a3_spec.coefficients))
    with pytest.raises(ValueError, match="self-adjoint"):
        verify_eigenvalue_asymptotics(undeclared, 1.0, [5])
    with pytest.raises(ValueError, match="endpoints"):
        verify_eigenvalue_asymptotics(constant_spec, 0.0, [5])
    with pytest.raises(ValueError, match=">= 2"):
        verify_eigenvalue_asymptotics(a3_spec, 1.0, [0, 5])


def test_eigenfunction_predictor_exact_for_constant(constant_spec):
    # with constant coefficients the eigenvector IS the single exponential
    avg = mean_matrix(constant_spec)
    sol = solve_bloch(BlochProblem(spec=constant_spec, t=1.0, K=16))
    dev, ndev = verify_eigenfunction_asymptotics(sol, avg, k=4, j=1)
    assert dev <= 1e-10
    dev2, _ = verify_eigenfunction_asymptotics(sol, avg, k=4, j=2)
    assert dev2 <= 1e-10


def test_eigenfunction_cluster_projection_for_degenerate_mu():
    free = OperatorSpec(n=3, m=2, self_adjoint_declared=True)
    avg = mean_matrix(free)  # mu = {0, 0}: a genuine cluster
    sol = solve_bloch(BlochProblem(spec=free, t=0.7, K=8))
    dev, _ = verify_eigenfunction_asymptotics(sol, avg, k=3, j=1)
    assert dev <= 1e-10  # any vector in the cluster span is acceptable


def test_label_eigenvalues_matches_sorted_blocks(a3_spec):
    avg = mean_matrix(a3_spec)
    sol = solve_bloch(BlochProblem(spec=a3_spec, t=1.0, K=24))
    cols = label_eigenvalues(sol, avg, range(-3, 4))
    assert len(cols) == 7 * 2
    assert len(set(cols.values())) == 14  # injective
    lams = {lab: sol.eigenvalues[col].real for lab, col in cols.items()}
    # the mu_2 - mu_1 split enters through theta^(n-2), so its sign flips
    # with theta = 2 pi k + t when n is odd
    for k in range(-3, 4):
        theta = 2 * np.pi * k + 1.0
        assert (lams[(k, 2)] - lams[(k, 1)]) * theta > 0
    with pytest.raises(ValueError):
        label_eigenvalues(sol, avg, [30])


def test_residual_identity_rows(a3_spec):
    avg = mean_matrix(a3_spec)
    sol = solve_bloch(BlochProblem(spec=a3_spec, t=1.0, K=40))
    for (k, j) in [(5, 1), (7, 2), (10, 1)]:
        lam = None
        for p in range(-12, 13):
            for s in (1, 2):
                res = residual_identity_14(sol, avg, k, j, p, s)
                col = label_eigenvalues(sol, avg, [k])[(k, j)]
                lam = abs(sol.eigenvalues[col])
                assert res <= 1e-6 * max(1.0, lam)
    with pytest.raises(ValueError):
        residual_identity_14(sol, avg, 5, 1, 60, 1)
    with pytest.raises(ValueError):
        residual_identity_14(sol, avg, 5, 1, 0, 3)
