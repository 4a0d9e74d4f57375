"""High-band predictors and the diagnostics that certify them.

For block index k and fiber t, the m eigenvalues near (2 pi k + t)^n are
predicted by

    mu_pred(k, j, t) = (2 pi k + t)^n + mu_j (2 pi k + t)^(n-2),

where mu_j runs over the eigenvalues of the averaged coefficient matrix.
The gap between prediction and computed eigenvalue scales like
|k|^(n-3) ln|k| (self-adjoint expression; for even order away from the
fiber endpoints t = 0, pi), and the matching eigenvector is v_j times a
single exponential up to O(ln|k| / |k|).  The helpers here measure those
deviations, classify (k, t) into the parity cases that control which
blocks resonate, and evaluate the small quasimomentum neighborhoods near
t = 0 and t = pi where even-order predictions are allowed to degrade.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .coeffs import b_k_bound, mean_matrix
from .defaults import TAU_SEP, truncation_for
from .galerkin import BlochProblem, match_to_predictors, reduce_t, solve_bloch


def _bk_quiet(spec, k):
    # zero coupling at large |k| is the expected decay here, not a misuse
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return b_k_bound(spec, k)


def mu_pred(avg, n, k, t, j=None):
    """Leading-order eigenvalue location(s) for block k at fiber t.

    With j (1-based) returns a scalar; without, the length-m array over all
    averaged eigenvalues in ascending mu order.
    """
    theta = 2 * np.pi * k + t
    preds = theta ** n + avg.mu * theta ** (n - 2)
    if j is None:
        return preds
    if not 1 <= j <= avg.m:
        raise ValueError("label j=%d outside 1..m=%d" % (j, avg.m))
    return float(preds[j - 1])


@dataclass(frozen=True)
class CaseContext:
    """Parity/fiber classification of one (k, t) pair.

    case_id is one of "1a" (odd order), "1b" (even order, t away from both
    endpoints), "2" (even order, |t| < 1/ln|k|), "3" (even order,
    |t - pi| < 1/ln|k|).  a_set lists the block indices that resonate with
    k in that regime; in_T says whether t avoids both endpoint
    neighborhoods.
    """

    n: int
    m: int
    k: int
    t: float
    case_id: str
    a_set: tuple
    in_T: bool
    threshold: float


def case_context(n, m, k, t):
    k = int(k)
    if abs(k) < 2:
        raise ValueError("case classification needs |k| >= 2 (log threshold undefined below)")
    t = reduce_t(t)
    threshold = 1.0 / math.log(abs(k))
    near_zero = abs(t) < threshold
    near_pi = abs(t - math.pi) < threshold
    in_T = not (near_zero or near_pi)
    if n % 2 == 1:
        case_id, a_set = "1a", (k,)
    elif near_zero:
        case_id, a_set = "2", (k, -k)
    elif near_pi:
        case_id, a_set = "3", (k, -k - 1)
    else:
        case_id, a_set = "1b", (k,)
    return CaseContext(n=n, m=m, k=k, t=t, case_id=case_id, a_set=a_set,
                       in_T=in_T, threshold=threshold)


def error_scales(n, k, bk, c_delta=1.0, c_eps=1.0):
    """(delta_k, eps_k): the eigenvalue and eigenfunction error scales.

    delta_k = c_delta |k|^(n-3) ln|k|; eps_k adds the resonant-coupling
    term |k|^(n-2) * bk on top of c_eps |k|^(n-3) ln|k|.
    """
    k = abs(int(k))
    if k < 2:
        raise ValueError("error scales need |k| >= 2")
    base = float(k) ** (n - 3) * math.log(k)
    return c_delta * base, c_eps * base + float(k) ** (n - 2) * bk


def _alpha_window(avg, j, alpha_j):
    if not 1 <= j <= avg.m:
        raise ValueError("label j=%d outside 1..m=%d" % (j, avg.m))
    if not avg.simple_flags[j - 1]:
        raise ValueError("mu_%d is not simple; endpoint neighborhoods are undefined" % j)
    others = np.delete(avg.mu, j - 1)
    limit = float(np.abs(others - avg.mu[j - 1]).min()) if len(others) else np.inf
    if not 0 < alpha_j < limit:
        raise ValueError(
            "alpha_j must lie strictly between 0 and the distance %g to the nearest mu" % limit
        )


def b_set_intervals(avg, j, alpha_j, k, n):
    """Endpoint neighborhoods for label j: intervals near t=0 and near t=pi.

    Near zero the s-th interval is ((mu_s - mu_j -+ alpha_j) / (4 n pi k));
    near pi the denominator is 2 n pi (2k + n - 1) and the center shifts
    by pi.  Returns (intervals_zero, intervals_pi) as lists of (lo, hi).
    """
    _alpha_window(avg, j, alpha_j)
    k = int(k)
    if k == 0:
        raise ValueError("endpoint neighborhoods need k != 0")
    mu_j = avg.mu[j - 1]
    zero_den = 4.0 * n * np.pi * k
    pi_den = 2.0 * n * np.pi * (2 * k + n - 1)
    zeros, pis = [], []
    for mu_s in avg.mu:
        a = (mu_s - mu_j - alpha_j) / zero_den
        b = (mu_s - mu_j + alpha_j) / zero_den
        zeros.append((min(a, b), max(a, b)))
        a = np.pi + (mu_s - mu_j - alpha_j) / pi_den
        b = np.pi + (mu_s - mu_j + alpha_j) / pi_den
        pis.append((min(a, b), max(a, b)))
    return zeros, pis


def b_set_membership(t, alpha_j, k, avg, j, n):
    """True iff the reduced t lies in one of the endpoint neighborhoods."""
    t = reduce_t(t)
    zeros, pis = b_set_intervals(avg, j, alpha_j, k, n)
    return any(lo < t < hi for lo, hi in zeros + pis)


def _merged_length(intervals):
    merged = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return sum(hi - lo for lo, hi in merged)


def b_set_measure(avg, j, alpha_j, k, n):
    """Total length of the endpoint neighborhoods (unions merged)."""
    zeros, pis = b_set_intervals(avg, j, alpha_j, k, n)
    return _merged_length(zeros) + _merged_length(pis)


@dataclass(frozen=True)
class AsymptoticDiagnostics:
    """One (k, j) comparison between computed eigenpair and its predictor."""

    k: int
    j: int
    t: float
    lambda_computed: float
    mu_pred: float
    residual: float
    normalized_residual: float
    eigfn_deviation: float
    normalized_eigfn_dev: float
    bk_term: float
    case_id: str
    ambiguous: bool


def label_eigenvalues(solution, avg, k_range):
    """Injective map (k, j) -> eigenvalue column via total-distance matching."""
    spec = solution.problem.spec
    t = solution.problem.t
    labels = []
    preds = []
    for k in sorted(set(int(k) for k in k_range)):
        if abs(k) > solution.problem.K:
            raise ValueError("k=%d outside the truncation window K=%d"
                             % (k, solution.problem.K))
        block = mu_pred(avg, spec.n, k, t)
        for j in range(1, avg.m + 1):
            labels.append((k, j))
            preds.append(block[j - 1])
    cols = match_to_predictors(solution.eigenvalues, np.array(preds))
    return {lab: int(col) for lab, col in zip(labels, cols)}


def _embed_block(dim, m, K, k, block):
    vec = np.zeros(dim, dtype=complex)
    base = (k + K) * m
    vec[base:base + m] = block
    return vec


def verify_eigenfunction_asymptotics(solution, avg, k, j, tau_sep=TAU_SEP,
                                     column=None):
    """Distance of the (k, j) eigenvector from its single-exponential shape.

    For a simple mu_j the predictor is v_j placed on harmonic k, compared
    after rotating the eigenvector so its harmonic-k component aligns with
    v_j.  For a mu_j inside a near-degenerate cluster the predictor is the
    projection of the harmonic-k block onto the cluster's v-span, so only
    leakage out of the cluster (and off the harmonic) is counted.  Returns
    (deviation, normalized) with the normalization ln|k|/|k| + b_k.
    """
    spec = solution.problem.spec
    if column is None:
        column = label_eigenvalues(solution, avg, [k])[(k, j)]
    K, m = solution.problem.K, spec.m
    x = solution.vectors[:, column]
    block = solution.coeff_block(column, k)
    cluster = np.nonzero(np.abs(avg.mu - avg.mu[j - 1]) <= tau_sep)[0]
    if avg.simple_flags[j - 1]:
        v = avg.v[:, j - 1]
        inner = np.vdot(v, block)
        if abs(inner) > 0:
            x = x * (np.conj(inner) / abs(inner))
        pred = _embed_block(len(x), m, K, k, v)
    else:
        V = avg.v[:, cluster]
        pred = _embed_block(len(x), m, K, k, V @ (V.conj().T @ block))
    deviation = float(np.linalg.norm(x - pred))
    kk = abs(int(k))
    if kk < 2:
        raise ValueError("eigenfunction comparison needs |k| >= 2")
    scale = math.log(kk) / kk + _bk_quiet(spec, k)
    return deviation, deviation / scale


def verify_eigenvalue_asymptotics(spec, t, k_range, K=None, c_for_flagging=1.0):
    """Compare fiber eigenvalues against predictors over a block range.

    Requires a declared self-adjoint operator; for even order the fiber
    must avoid t = 0 and t = pi exactly (predictions degrade there by
    design).  Returns a list of AsymptoticDiagnostics sorted by (k, j).
    A pair is flagged ambiguous when two predictors sit closer than twice
    the nominal eigenvalue error scale.
    """
    if not spec.self_adjoint_declared:
        raise ValueError("asymptotic verification assumes a self-adjoint operator")
    t_red = reduce_t(t)
    if spec.n % 2 == 0 and (t_red == 0.0 or t_red == float(np.pi)):
        raise ValueError("even order excludes the fiber endpoints t = 0 and t = pi")
    ks = sorted(set(int(k) for k in k_range))
    if any(abs(k) < 2 for k in ks):
        raise ValueError("asymptotic scales need |k| >= 2 for every requested block")
    avg = mean_matrix(spec)
    if K is None:
        K = truncation_for(max(abs(k) for k in ks), spec.p_max)
    solution = solve_bloch(BlochProblem(spec=spec, t=t_red, K=K))
    columns = label_eigenvalues(solution, avg, ks)
    out = []
    for k in ks:
        preds = mu_pred(avg, spec.n, k, t_red)
        delta_k, _ = error_scales(spec.n, k, 0.0, c_delta=c_for_flagging)
        gaps = np.abs(preds[None, :] - preds[:, None]) + np.diag([np.inf] * avg.m)
        bk = _bk_quiet(spec, k)
        ctx = case_context(spec.n, spec.m, k, t_red)
        for j in range(1, avg.m + 1):
            col = columns[(k, j)]
            lam = solution.eigenvalues[col]
            residual = abs(lam - preds[j - 1])
            scale = abs(k) ** (spec.n - 3) * math.log(abs(k))
            dev, ndev = verify_eigenfunction_asymptotics(solution, avg, k, j, column=col)
            out.append(AsymptoticDiagnostics(
                k=k, j=j, t=t_red,
                lambda_computed=float(lam.real),
                mu_pred=float(preds[j - 1]),
                residual=float(residual),
                normalized_residual=float(residual / scale),
                eigfn_deviation=dev,
                normalized_eigfn_dev=ndev,
                bk_term=bk,
                case_id=ctx.case_id,
                ambiguous=bool(gaps[j - 1].min() < 2 * delta_k),
            ))
    return out


def residual_identity_14(solution, avg, k, j, p, s, column=None):
    """Projection identity residual for eigenpair (k, j) at row (p, s).

    In coefficient space, with c the eigenvector and theta_l = 2 pi l + t,
    the identity reads

        (lam - mu_pred(p, s)) <c_p, v_s>
            = < sum_l coeff2(p-l) theta_l^(n-2) c_l - theta_p^(n-2) C c_p
                + sum_{nu>=3} sum_l (i theta_l)^(n-nu) coeffnu(p-l) c_l , v_s >.

    Returns |lhs - rhs|; small values certify that the computed pair
    satisfies the projected eigenvalue equation row by row.
    """
    spec = solution.problem.spec
    if column is None:
        column = label_eigenvalues(solution, avg, [k])[(k, j)]
    if not 1 <= s <= avg.m:
        raise ValueError("label s=%d outside 1..m=%d" % (s, avg.m))
    K, m, n, t = solution.problem.K, spec.m, spec.n, solution.problem.t
    if abs(p) > K:
        raise ValueError("row harmonic p=%d outside truncation window K=%d" % (p, K))
    lam = solution.eigenvalues[column]
    v_s = avg.v[:, s - 1]
    c_p = solution.coeff_block(column, p)
    theta_p = 2 * np.pi * p + t
    lhs = (lam - mu_pred(avg, n, p, t, j=s)) * np.vdot(v_s, c_p)
    rhs_vec = -(theta_p ** (n - 2)) * (avg.c @ c_p)
    for nu, series in spec.coefficients.items():
        for r in range(-series.p_max, series.p_max + 1):
            l = p - r
            if abs(l) > K:
                continue
            theta_l = 2 * np.pi * l + t
            weight = theta_l ** (n - 2) if nu == 2 else (1j * theta_l) ** (n - nu)
            rhs_vec = rhs_vec + weight * (series.coeff(r) @ solution.coeff_block(column, l))
    rhs = np.vdot(v_s, rhs_vec)
    return float(abs(lhs - rhs))


def fit_error_constants(diagnostics):
    """Least-squares constants tying residuals to their |k|^(n-3) ln|k| scales.

    Returns {"c_delta": global fit, "c_delta_by_j": {j: fit}, "max_normalized":
    worst normalized residual, "c_eps_by_j": {j: eigenfunction fit}}.
    """
    if not diagnostics:
        raise ValueError("no diagnostics to fit")

    def lsq(pairs):
        num = sum(r * s for r, s in pairs)
        den = sum(s * s for r, s in pairs)
        return num / den if den > 0 else 0.0

    scales = {}
    for d in diagnostics:
        base = d.residual / d.normalized_residual if d.normalized_residual else 0.0
        scales[(d.k, d.j)] = base
    all_pairs = [(d.residual, scales[(d.k, d.j)]) for d in diagnostics]
    by_j = {}
    eig_by_j = {}
    for d in diagnostics:
        by_j.setdefault(d.j, []).append((d.residual, scales[(d.k, d.j)]))
        eig_scale = d.eigfn_deviation / d.normalized_eigfn_dev if d.normalized_eigfn_dev else 0.0
        eig_by_j.setdefault(d.j, []).append((d.eigfn_deviation, eig_scale))
    return {
        "c_delta": lsq(all_pairs),
        "c_delta_by_j": {j: lsq(pairs) for j, pairs in sorted(by_j.items())},
        "c_eps_by_j": {j: lsq(pairs) for j, pairs in sorted(eig_by_j.items())},
        "max_normalized": max(d.normalized_residual for d in diagnostics),
    }
