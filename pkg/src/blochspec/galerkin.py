"""Quasimomentum fiber matrices in the Fourier exponential basis.

For a fixed quasimomentum t the fiber operator acts on vector functions
obeying y^(nu)(1) = exp(it) y^(nu)(0).  In the orthonormal basis
e_q exp(i(2 pi l + t)x), |l| <= K, the expression

    (-i)^n y^(n) + (-i)^(n-2) P_2 y^(n-2) + sum_{nu>=3} P_nu y^(n-nu)

turns into a dense m(2K+1) x m(2K+1) matrix whose entry at row (p, s),
column (l, q) is, with theta = 2 pi l + t,

    theta^n delta_pl delta_sq
      + theta^(n-2) * coeff2(p - l)[s, q]
      + sum_{nu>=3} (i theta)^(n-nu) * coeffnu(p - l)[s, q].

The (-i)^(n-2) prefactor cancels against the (i theta)^(n-2) derivative
factor, which is why the P_2 weight is the real power theta^(n-2); the
assembly is cross-checked against direct quadrature in the test suite.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .coeffs import mean_matrix
from .defaults import TAU_CONV, TAU_HERM, TAU_RES, truncation_for


def reduce_t(t):
    """Map quasimomentum into the fundamental window [-pi/2, 3*pi/2)."""
    return float((t + np.pi / 2) % (2 * np.pi) - np.pi / 2)


@dataclass(frozen=True)
class BlochProblem:
    """One fiber: an operator spec, a reduced quasimomentum, and a cutoff K."""

    spec: object
    t: float
    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("truncation half-width K must be an integer >= 1")
        object.__setattr__(self, "t", reduce_t(self.t))
        object.__setattr__(self, "K", int(self.K))

    @property
    def dim(self):
        return self.spec.m * (2 * self.K + 1)

    @property
    def l_values(self):
        return np.arange(-self.K, self.K + 1)


def _assemble_window(spec, t, ls):
    """Fiber matrix on an arbitrary contiguous harmonic window `ls`."""
    ls = np.asarray(ls, dtype=int)
    n, m = spec.n, spec.m
    theta = 2 * np.pi * ls + t
    dim = m * len(ls)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[np.arange(dim), np.arange(dim)] = np.repeat(theta ** n, m)
    for nu, series in spec.coefficients.items():
        if nu == 2:
            weights = theta.astype(complex) ** (n - 2)
        else:
            weights = (1j * theta) ** (n - nu)
        for r in range(-series.p_max, series.p_max + 1):
            block = series.coeff(r)
            if not np.any(block):
                continue
            for col in range(len(ls)):
                row = col + r
                if 0 <= row < len(ls):
                    mat[row * m:(row + 1) * m, col * m:(col + 1) * m] += weights[col] * block
    return mat


def assemble_bloch_matrix(problem):
    """Dense fiber matrix for the problem's truncation window |l| <= K."""
    return _assemble_window(problem.spec, problem.t, problem.l_values)


def _fix_phases(vectors):
    # deterministic gauge: largest-magnitude entry of each column real positive
    for j in range(vectors.shape[1]):
        idx = int(np.argmax(np.abs(vectors[:, j])))
        pivot = vectors[idx, j]
        if abs(pivot) > 0:
            vectors[:, j] *= np.conj(pivot) / abs(pivot)
    return vectors


@dataclass
class BlochSolution:
    """Eigenpairs of one fiber matrix.

    eigenvalues are sorted by (real, imag); vectors holds the matching unit
    coefficient columns in the basis ordered block-by-harmonic, so the
    coefficient of e_q exp(i(2 pi l + t)x) sits at row (l + K)*m + q.
    """

    problem: BlochProblem
    eigenvalues: np.ndarray
    vectors: np.ndarray
    hermitian_residual: float
    is_hermitian: bool
    matrix_scale: float
    max_residual: float
    notes: list = field(default_factory=list)

    def coeff_block(self, col, l):
        """m-vector of coefficients at harmonic l for eigenvector column col."""
        K, m = self.problem.K, self.problem.spec.m
        if abs(l) > K:
            raise ValueError("harmonic l=%d outside truncation window K=%d" % (l, K))
        base = (l + K) * m
        return self.vectors[base:base + m, col]


def solve_bloch(problem, tau_herm=TAU_HERM, tau_res=TAU_RES):
    """Diagonalize one fiber matrix.

    When every coefficient is constant (p_max = 0) the matrix is block
    diagonal over harmonics and each m x m block is solved on its own; that
    keeps the relative accuracy of small eigenvalues independent of the
    large theta^n entries elsewhere in the window, and of K itself.
    Otherwise the dense matrix is solved with the Hermitian path whenever
    the assembly is Hermitian within tau_herm times its scale, and with
    the general solver (plus a recorded note) when it is not.
    """
    spec = problem.spec
    notes = []
    if spec.p_max == 0:
        return _solve_block_diagonal(problem, tau_herm, notes)
    mat = assemble_bloch_matrix(problem)
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    herm = float(np.abs(mat - mat.conj().T).max(initial=0.0))
    if herm <= tau_herm * scale:
        vals, vecs = np.linalg.eigh(0.5 * (mat + mat.conj().T))
        vals = vals.astype(complex)
        is_herm = True
    else:
        if spec.self_adjoint_declared:
            notes.append(
                "declared self-adjoint but fiber matrix has Hermitian defect %.3e" % herm
            )
            warnings.warn(notes[-1], stacklevel=2)
        vals, vecs = scipy.linalg.eig(mat)
        is_herm = False
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    vecs = vecs[:, order]
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    vecs = _fix_phases(vecs)
    resid = float(np.abs(mat @ vecs - vecs * vals[None, :]).max(initial=0.0))
    sol = BlochSolution(
        problem=problem,
        eigenvalues=vals,
        vectors=vecs,
        hermitian_residual=herm,
        is_hermitian=is_herm,
        matrix_scale=scale,
        max_residual=resid,
        notes=notes,
    )
    if resid > tau_res * scale:
        warnings.warn("fiber eigenpair residual %.3e exceeds %.3e" % (resid, tau_res * scale),
                      stacklevel=2)
    return sol


def _solve_block_diagonal(problem, tau_herm, notes):
    spec = problem.spec
    n, m, t = spec.n, spec.m, problem.t
    ls = problem.l_values
    dim = problem.dim
    vals = np.zeros(dim, dtype=complex)
    vecs = np.zeros((dim, dim), dtype=complex)
    herm_worst = 0.0
    resid_worst = 0.0
    scale_worst = 1.0
    is_herm = True
    for pos, l in enumerate(ls):
        theta = 2 * np.pi * l + t
        block = (theta ** n) * np.eye(m, dtype=complex)
        for nu, series in spec.coefficients.items():
            weight = theta ** (n - 2) if nu == 2 else (1j * theta) ** (n - nu)
            block = block + weight * series.coeff(0)
        scale = max(1.0, float(np.abs(block).max(initial=0.0)))
        herm = float(np.abs(block - block.conj().T).max(initial=0.0))
        herm_worst = max(herm_worst, herm)
        scale_worst = max(scale_worst, scale)
        if herm <= tau_herm * scale:
            bvals, bvecs = np.linalg.eigh(0.5 * (block + block.conj().T))
            bvals = bvals.astype(complex)
        else:
            bvals, bvecs = scipy.linalg.eig(block)
            is_herm = False
        resid = float(np.abs(block @ bvecs - bvecs * bvals[None, :]).max(initial=0.0))
        resid_worst = max(resid_worst, resid)
        base = pos * m
        vals[base:base + m] = bvals
        vecs[base:base + m, base:base + m] = bvecs
    if not is_herm and spec.self_adjoint_declared:
        notes.append("declared self-adjoint but a constant block is not Hermitian")
        warnings.warn(notes[-1], stacklevel=2)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    vecs = vecs[:, order]
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    vecs = _fix_phases(vecs)
    return BlochSolution(
        problem=problem,
        eigenvalues=vals,
        vectors=vecs,
        hermitian_residual=herm_worst,
        is_hermitian=is_herm,
        matrix_scale=scale_worst,
        max_residual=resid_worst,
        notes=notes,
    )


def match_to_predictors(eigenvalues, predictors):
    """Injective minimum-total-distance assignment of predictors to eigenvalues.

    predictors is a 1-d array; returns an integer array giving, for each
    predictor, the index of its matched eigenvalue.
    """
    eigenvalues = np.asarray(eigenvalues)
    predictors = np.asarray(predictors)
    if len(predictors) > len(eigenvalues):
        raise ValueError("more predictors than available eigenvalues")
    cost = np.abs(eigenvalues[None, :] - predictors[:, None])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(len(predictors), dtype=int)
    out[rows] = cols
    return out


def _predictor_table(spec, t, ks):
    """Leading-order eigenvalue locations (free power plus averaged shift)."""
    avg = mean_matrix(spec)
    n = spec.n
    ks = np.asarray(ks, dtype=int)
    table = {}
    for k in ks:
        theta = 2 * np.pi * k + t
        for j in range(spec.m):
            table[(int(k), j + 1)] = theta ** n + avg.mu[j] * theta ** (n - 2)
    return table


@dataclass(frozen=True)
class ConvergenceReport:
    """Eigenvalue drift between truncations K and 2K over a harmonic window."""

    t: float
    K: int
    K_fine: int
    k_window: tuple
    drift: dict
    max_drift: float
    tau_conv: float
    passed: bool


def convergence_check(spec, t, K, k_window, tau_conv=TAU_CONV):
    """Compare eigenvalues at truncation K against 2K over the given k window.

    Eigenvalues in both solves are matched to the same leading-order
    predictor labels (k, j); the report carries the worst relative drift.
    """
    k_window = sorted(int(k) for k in k_window)
    if not k_window:
        raise ValueError("empty harmonic window")
    k_abs = max(abs(k) for k in k_window)
    needed = truncation_for(k_abs, spec.p_max)
    if K < needed:
        raise ValueError(
            "truncation K=%d below the policy value %d for |k| <= %d" % (K, needed, k_abs)
        )
    table = _predictor_table(spec, reduce_t(t), k_window)
    labels = sorted(table)
    preds = np.array([table[lab] for lab in labels])
    matched = {}
    for cutoff in (K, 2 * K):
        sol = solve_bloch(BlochProblem(spec=spec, t=t, K=cutoff))
        idx = match_to_predictors(sol.eigenvalues, preds)
        matched[cutoff] = sol.eigenvalues[idx]
    drift = {}
    for pos, lab in enumerate(labels):
        coarse = matched[K][pos]
        fine = matched[2 * K][pos]
        drift[lab] = abs(coarse - fine) / max(1.0, abs(fine))
    max_drift = max(drift.values())
    return ConvergenceReport(
        t=reduce_t(t),
        K=K,
        K_fine=2 * K,
        k_window=tuple(k_window),
        drift=drift,
        max_drift=float(max_drift),
        tau_conv=tau_conv,
        passed=bool(max_drift <= tau_conv),
    )
