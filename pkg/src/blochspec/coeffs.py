"""Periodic matrix coefficients in Fourier form.

A coefficient is a 1-periodic m x m matrix function held through finitely many
harmonics,

    P(x) = sum_{|p| <= p_max}  coeff(p) * exp(2 pi i p x),

with the convention coeff(p) = integral_0^1 P(x) exp(-2 pi i p x) dx.  All
downstream machinery (quasimomentum matrices, transfer matrices, asymptotic
predictors) consumes this representation, so sampled data is converted here
once and exactly (the DFT recovers trigonometric polynomials of degree
<= p_max whenever the sample count is at least 2*p_max + 1).
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .defaults import TAU_HERM, TAU_SEP, TAU_SYM


@dataclass(frozen=True)
class FourierMatrixSeries:
    """Finite two-sided harmonic expansion of an m x m periodic matrix function.

    Attributes
    ----------
    m : int
        Matrix dimension.
    p_max : int
        Largest stored harmonic index; entries outside read as zero.
    data : ndarray, shape (2*p_max + 1, m, m)
        data[p + p_max] is the harmonic-p coefficient matrix.
    real_valued : bool
        If set, the function is entrywise real, which forces
        coeff(-p) == conj(coeff(p)); validated on construction.
    """

    m: int
    p_max: int
    data: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.shape != (2 * self.p_max + 1, self.m, self.m):
            raise ValueError(
                "harmonic array has shape %r, expected %r"
                % (data.shape, (2 * self.p_max + 1, self.m, self.m))
            )
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        if self.real_valued:
            defect = self.conjugate_symmetry_defect()
            if defect > TAU_SYM * max(1.0, float(np.abs(data).max(initial=0.0))):
                raise ValueError(
                    "series flagged real-valued but coeff(-p) != conj(coeff(p)); "
                    "max defect %.3e" % defect
                )

    def coeff(self, p):
        """Harmonic-p coefficient matrix; zero for any p outside the stored range."""
        if abs(p) > self.p_max:
            return np.zeros((self.m, self.m), dtype=complex)
        return self.data[p + self.p_max]

    def harmonics(self):
        """Dict view {p: matrix} of the stored harmonics."""
        return {p - self.p_max: self.data[p] for p in range(2 * self.p_max + 1)}

    def conjugate_symmetry_defect(self):
        flipped = np.conj(self.data[::-1])
        return float(np.abs(self.data - flipped).max(initial=0.0))

    def hermitian_symmetry_defect(self):
        """Max |coeff(-p) - coeff(p)^H|; zero iff P(x) is Hermitian for every x."""
        flipped = np.conj(np.swapaxes(self.data[::-1], 1, 2))
        return float(np.abs(self.data - flipped).max(initial=0.0))

    def values(self, x):
        """Evaluate P at the points x (scalar or 1-d array) by direct synthesis."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ps = np.arange(-self.p_max, self.p_max + 1)
        phases = np.exp(2j * np.pi * np.outer(x, ps))
        vals = np.tensordot(phases, self.data, axes=(1, 0))
        return vals

    def derivative(self, order=1):
        """Series of the order-th derivative: harmonic p scales by (2 pi i p)^order."""
        ps = np.arange(-self.p_max, self.p_max + 1)
        factors = (2j * np.pi * ps) ** order
        return FourierMatrixSeries(self.m, self.p_max, factors[:, None, None] * self.data)

    def scaled(self, factor):
        return FourierMatrixSeries(self.m, self.p_max, factor * self.data)

    def mean(self):
        return self.coeff(0)


def series_from_harmonics(m, mapping, real_valued=False):
    """Build a FourierMatrixSeries from a {p: matrix} mapping."""
    if mapping:
        p_max = max(abs(int(p)) for p in mapping)
    else:
        p_max = 0
    data = np.zeros((2 * p_max + 1, m, m), dtype=complex)
    for p, mat in mapping.items():
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("non-square coefficient matrix")
        if mat.shape != (m, m):
            raise ValueError("coefficient matrix has size %r, expected %d" % (mat.shape, m))
        data[int(p) + p_max] = mat
    return FourierMatrixSeries(m, p_max, data, real_valued=real_valued)


def constant_series(matrix):
    matrix = np.asarray(matrix, dtype=complex)
    return series_from_harmonics(matrix.shape[0], {0: matrix})


def fourier_coefficients(samples, p_max):
    """Harmonics of a coefficient given on a uniform grid over one period.

    Parameters
    ----------
    samples : array_like, shape (S, m, m)
        Values P(s/S) for s = 0..S-1.
    p_max : int
        Largest harmonic to keep.  Requires S >= 2*p_max + 1; under that
        condition the result is exact for trigonometric polynomials of
        degree <= p_max (no aliasing into the kept band).

    Returns
    -------
    FourierMatrixSeries
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
        raise ValueError("non-square coefficient matrix")
    S = samples.shape[0]
    if S < 2 * p_max + 1:
        raise ValueError(
            "%d samples cannot resolve harmonics up to p_max=%d (need >= %d)"
            % (S, p_max, 2 * p_max + 1)
        )
    spec = np.fft.fft(samples, axis=0) / S
    m = samples.shape[1]
    data = np.zeros((2 * p_max + 1, m, m), dtype=complex)
    for p in range(-p_max, p_max + 1):
        data[p + p_max] = spec[p % S]
    return FourierMatrixSeries(m, p_max, data)


@dataclass(frozen=True)
class OperatorSpec:
    """Order-n periodic differential expression with m x m matrix coefficients.

    The expression acting on a vector function y is

        (-i)^n y^(n) + (-i)^(n-2) P_2 y^(n-2) + sum_{nu=3..n} P_nu y^(n-nu),

    so `coefficients` maps nu in 2..n to the series for P_nu (absent means
    identically zero).  There is no first-order correction term: the nu = 1
    slot does not exist in this normal form.
    """

    n: int
    m: int
    coefficients: dict = field(default_factory=dict)
    self_adjoint_declared: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("operator order n must be an integer >= 2")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("matrix dimension m must be an integer >= 1")
        coeffs = {}
        for nu, series in dict(self.coefficients).items():
            nu = int(nu)
            if not 2 <= nu <= self.n:
                raise ValueError("coefficient index nu=%d outside 2..n=%d" % (nu, self.n))
            if not isinstance(series, FourierMatrixSeries):
                raise TypeError("coefficient nu=%d is not a FourierMatrixSeries" % nu)
            if series.m != self.m:
                raise ValueError(
                    "coefficient nu=%d has dimension %d, expected m=%d" % (nu, series.m, self.m)
                )
            coeffs[nu] = series
        object.__setattr__(self, "coefficients", MappingProxyType(coeffs))

    @property
    def p_max(self):
        """Largest harmonic index stored by any coefficient."""
        return max((s.p_max for s in self.coefficients.values()), default=0)

    def coefficient(self, nu):
        """Series for P_nu, or None when that term is absent."""
        return self.coefficients.get(nu)


@dataclass(frozen=True)
class AveragedMatrix:
    """Mean of the leading perturbing coefficient and its spectral data.

    c is the period average of P_2, mu its eigenvalues in ascending order,
    v the matching orthonormal eigenvector columns, and simple_flags marks
    the eigenvalues isolated from every other one by more than tau_sep.
    """

    c: np.ndarray
    mu: np.ndarray
    v: np.ndarray
    simple_flags: np.ndarray

    @property
    def m(self):
        return self.mu.shape[0]


def mean_matrix(spec, tau_herm=TAU_HERM, tau_sep=TAU_SEP):
    """Average P_2 over one period and diagonalize the result.

    The mean must be Hermitian within tau_herm (relative to its own scale);
    everything downstream that predicts eigenvalue locations keys off this
    matrix, so a non-Hermitian mean is a hard error rather than a warning.
    """
    series = spec.coefficient(2)
    if series is None:
        c = np.zeros((spec.m, spec.m), dtype=complex)
    else:
        c = np.array(series.mean(), dtype=complex)
    defect = float(np.abs(c - c.conj().T).max(initial=0.0))
    if defect > tau_herm * max(1.0, float(np.abs(c).max(initial=0.0))):
        raise ValueError("averaged coefficient matrix is not Hermitian (defect %.3e)" % defect)
    c = 0.5 * (c + c.conj().T)
    mu, v = np.linalg.eigh(c)
    order = np.argsort(mu, kind="stable")
    mu = mu[order]
    v = v[:, order]
    # canonical phase: largest-magnitude entry of each column real positive
    for j in range(v.shape[1]):
        idx = int(np.argmax(np.abs(v[:, j])))
        pivot = v[idx, j]
        if abs(pivot) > 0:
            v[:, j] *= np.conj(pivot) / abs(pivot)
    if len(mu) == 1:
        flags = np.array([True])
    else:
        gaps = np.array([min(abs(mu[j] - mu[q]) for q in range(len(mu)) if q != j)
                         for j in range(len(mu))])
        flags = gaps > tau_sep
    return AveragedMatrix(c=c, mu=mu, v=v, simple_flags=flags)


def b_k_bound(spec, k):
    """Size of the P_2 harmonics that control coupling at block index k.

    Returns max over the four offsets p in {2k, -2k, 2k+1, -2k-1} of the
    largest entry magnitude of coeff(p).  Offsets beyond the stored p_max
    contribute zero; a warning records that the series was too short to
    say anything nontrivial there.
    """
    series = spec.coefficient(2)
    if series is None:
        return 0.0
    k = int(k)
    offsets = (2 * k, -2 * k, 2 * k + 1, -2 * k - 1)
    if all(abs(p) > series.p_max for p in offsets):
        warnings.warn(
            "all coupling offsets for k=%d exceed stored p_max=%d; bound is zero"
            % (k, series.p_max),
            stacklevel=2,
        )
    return max(float(np.abs(series.coeff(p)).max(initial=0.0)) for p in offsets)


def selfadjoint_operator(n, p2, extra=None):
    """Formally self-adjoint order-n expression with prescribed P_2.

    Symmetrizing the P_2 term,

        (-i)^(n-2) * (P_2 D^(n-2) + D^(n-2) P_2) / 2,

    and expanding the right summand by the Leibniz rule yields lower-order
    corrections P_(2+j) = (1/2) * (-i)^(n-2) * binom(n-2, j) * P_2^(j) for
    j >= 1.  P_2 must be pointwise Hermitian (coeff(-p) == coeff(p)^H).

    `extra` optionally maps nu -> FourierMatrixSeries added on top of the
    corrections; the caller is responsible for keeping the sum self-adjoint.
    """
    defect = p2.hermitian_symmetry_defect()
    if defect > TAU_SYM * max(1.0, float(np.abs(p2.data).max(initial=0.0))):
        raise ValueError("P_2 is not pointwise Hermitian (defect %.3e)" % defect)
    coeffs = {2: p2}
    for j in range(1, n - 1):
        nu = 2 + j
        weight = 0.5 * (-1j) ** (n - 2) * math.comb(n - 2, j)
        term = p2.derivative(order=j).scaled(weight)
        if float(np.abs(term.data).max(initial=0.0)) == 0.0:
            continue
        coeffs[nu] = term
    if extra:
        for nu, series in extra.items():
            if nu in coeffs:
                if series.p_max >= coeffs[nu].p_max:
                    big, small = series, coeffs[nu]
                else:
                    big, small = coeffs[nu], series
                data = big.data.copy()
                lo = big.p_max - small.p_max
                data[lo:lo + 2 * small.p_max + 1] += small.data
                coeffs[nu] = FourierMatrixSeries(p2.m, big.p_max, data)
            else:
                coeffs[nu] = series
    return OperatorSpec(n=n, m=p2.m, coefficients=coeffs, self_adjoint_declared=True)


def _complex_from_json(value):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(part, (int, float)) for part in value
    ):
        return complex(value[0], value[1])
    raise ValueError("complex entries must be numbers or [re, im] pairs, got %r" % (value,))


def _matrix_from_json(rows, m):
    if not isinstance(rows, list) or len(rows) != m or any(
        not isinstance(r, list) or len(r) != m for r in rows
    ):
        raise ValueError("non-square coefficient matrix")
    return np.array([[_complex_from_json(v) for v in row] for row in rows], dtype=complex)


def load_operator_spec(source):
    """Read an OperatorSpec from a JSON document.

    `source` may be a path, a JSON string, or an already-parsed dict.  The
    document carries n, m, self_adjoint, and a `coefficients` object keyed by
    nu; each entry holds either `harmonics` (records {p, matrix}, complex
    entries as [re, im] pairs) or `samples` (matrices on a uniform grid over
    one period, plus the target p_max).
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = None
        try:
            with open(source, "r") as handle:
                text = handle.read()
        except (OSError, TypeError):
            if isinstance(source, str):
                text = source
            else:
                raise ValueError("cannot read operator description from %r" % (source,))
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError("malformed operator description: %s" % exc) from exc
    if not isinstance(doc, dict):
        raise ValueError("operator description must be a JSON object")
    try:
        n = int(doc["n"])
        m = int(doc["m"])
    except (KeyError, TypeError, ValueError):
        raise ValueError("operator description must carry integer fields n and m")
    self_adjoint = bool(doc.get("self_adjoint", False))
    raw_coeffs = doc.get("coefficients", {})
    if not isinstance(raw_coeffs, dict):
        raise ValueError("coefficients must be an object keyed by nu")
    coeffs = {}
    for key, entry in raw_coeffs.items():
        try:
            nu = int(key)
        except (TypeError, ValueError):
            raise ValueError("coefficient key %r is not an integer nu" % (key,))
        if not isinstance(entry, dict):
            raise ValueError("coefficient nu=%d must be an object" % nu)
        if "harmonics" in entry:
            declared = entry.get("p_max")
            mapping = {}
            for record in entry["harmonics"]:
                p = int(record["p"])
                if declared is not None and abs(p) > int(declared):
                    raise ValueError(
                        "harmonic p=%d outside declared p_max=%d for nu=%d"
                        % (p, int(declared), nu)
                    )
                mapping[p] = _matrix_from_json(record["matrix"], m)
            series = series_from_harmonics(m, mapping)
            if declared is not None and int(declared) > series.p_max:
                pad = int(declared)
                data = np.zeros((2 * pad + 1, m, m), dtype=complex)
                data[pad - series.p_max: pad + series.p_max + 1] = series.data
                series = FourierMatrixSeries(m, pad, data)
        elif "samples" in entry:
            if "p_max" not in entry:
                raise ValueError("sampled coefficient nu=%d needs an explicit p_max" % nu)
            grids = [_matrix_from_json(rows, m) for rows in entry["samples"]]
            series = fourier_coefficients(np.array(grids), int(entry["p_max"]))
        else:
            raise ValueError("coefficient nu=%d carries neither harmonics nor samples" % nu)
        coeffs[nu] = series
    return OperatorSpec(n=n, m=m, coefficients=coeffs, self_adjoint_declared=self_adjoint)
