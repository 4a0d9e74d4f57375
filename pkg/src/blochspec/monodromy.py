"""Transfer-matrix route to the spectrum.

The eigenvalue equation

    (-i)^n y^(n) + (-i)^(n-2) P_2 y^(n-2) + sum_{nu>=3} P_nu y^(n-nu) = lambda y

rewrites as a first-order system z' = B(x; lambda) z on the stacked vector
z = (y, y', ..., y^(n-1)), the top slot being

    y^(n) = i^n (lambda y - (-i)^(n-2) P_2 y^(n-2) - sum_{nu>=3} P_nu y^(n-nu)).

B is trace-free, so the transfer matrix M(lambda) over one period has
determinant exactly 1; the drift of |det M| from 1 is the integration
quality gate.  A real lambda belongs to the spectrum of the full-line
operator iff some eigenvalue u of M(lambda) sits on the unit circle, and
u = exp(it) then names the quasimomentum fiber that attains lambda.  For a
formally self-adjoint expression and real lambda the eigenvalues of M come
in pairs (u, 1/conj(u)), which for odd n*m forces at least one of them onto
the circle.

Entries of M grow like exp(c * |lambda|^(1/n)), so the route loses digits
once |lambda|^(1/n) reaches a few tens; keep lambda windows moderate and
lean on the Fourier route for high bands.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .defaults import DEFAULT_STEPS, TAU_WR, TOL_MOD
from .galerkin import reduce_t

_MAX_STEPS = 1 << 17


@dataclass(frozen=True)
class CompanionSystem:
    """First-order rewrite z' = B(x) z of the order-n eigenvalue equation."""

    spec: object
    lam: complex

    @property
    def size(self):
        return self.spec.n * self.spec.m

    def value(self, x):
        """B at the points x: array of shape (len(x), n*m, n*m)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return _b_nodes(self.spec, x) + self.lam * _lambda_slot(self.spec)[None, :, :]


def _lambda_slot(spec):
    """Constant matrix multiplying lambda inside B: i^n on the (n-1, 0) block."""
    n, m = spec.n, spec.m
    nm = n * m
    slot = np.zeros((nm, nm), dtype=complex)
    slot[(n - 1) * m:, :m] = (1j ** n) * np.eye(m)
    return slot


def _b_nodes(spec, x):
    """lambda-independent part of B evaluated on the grid x."""
    n, m = spec.n, spec.m
    nm = n * m
    npts = len(x)
    nodes = np.zeros((npts, nm, nm), dtype=complex)
    for i in range(n - 1):
        nodes[:, i * m:(i + 1) * m, (i + 1) * m:(i + 2) * m] = np.eye(m)
    base = (n - 1) * m
    for nu, series in spec.coefficients.items():
        vals = series.values(x)
        col = (n - nu) * m
        if nu == 2:
            weight = 1.0  # -i^n * (-i)^(n-2) = +1
        else:
            weight = -(1j ** n)
        nodes[:, base:base + m, col:col + m] += weight * vals
    return nodes


class TransferIntegrator:
    """Fixed-step 4th-order integrator for one operator, reusable across lambda.

    Coefficient values are synthesized once on the half-step grid; each
    monodromy evaluation only adds the lambda slot and runs the stepper.
    """

    def __init__(self, spec, steps=DEFAULT_STEPS):
        if steps < 2 or steps % 2:
            raise ValueError("step count must be even and >= 2")
        self.spec = spec
        self.steps = int(steps)
        grid = np.arange(2 * self.steps + 1) / (2.0 * self.steps)
        self._nodes = _b_nodes(spec, grid)
        self._slot = _lambda_slot(spec)

    def transfer(self, lam):
        nodes = self._nodes + lam * self._slot[None, :, :]
        return _rk4_transfer(nodes, self.steps)


def _rk4_transfer(nodes, steps):
    # nodes sampled at spacing h/2, so step i uses 2i, 2i+1, 2i+2
    h = 1.0 / steps
    Z = np.eye(nodes.shape[1], dtype=complex)
    for i in range(steps):
        Ba = nodes[2 * i]
        Bm = nodes[2 * i + 1]
        Bb = nodes[2 * i + 2]
        k1 = Ba @ Z
        k2 = Bm @ (Z + (0.5 * h) * k1)
        k3 = Bm @ (Z + (0.5 * h) * k2)
        k4 = Bb @ (Z + h * k3)
        Z = Z + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return Z


@dataclass(frozen=True)
class MonodromyMatrix:
    """Transfer matrix over one period plus integration diagnostics."""

    lam: complex
    mat: np.ndarray
    steps: int
    det: complex
    liouville_defect: float
    est_error: float


def companion_system(spec, lam):
    return CompanionSystem(spec=spec, lam=complex(lam))


def monodromy_matrix(spec, lam, steps=DEFAULT_STEPS, tau_wr=TAU_WR,
                     estimate_error=True, integrator=None):
    """Integrate the companion system across one period.

    The determinant of the result must stay within exp(+-tau_wr) of 1
    (trace-free system); a larger drift raises with the advice to increase
    the step count.  est_error is a step-doubling estimate comparing the
    requested resolution with half of it.
    """
    if integrator is None or integrator.steps != steps:
        integrator = TransferIntegrator(spec, steps)
    fine = integrator.transfer(lam)
    det = complex(np.linalg.det(fine))
    defect = abs(np.log(abs(det))) if det != 0 else np.inf
    if defect > tau_wr:
        raise ValueError(
            "integration inaccurate; increase steps (|det| drift %.3e at %d steps)"
            % (defect, steps)
        )
    est = 0.0
    if estimate_error:
        coarse = _rk4_transfer(integrator._nodes[::2] + lam * integrator._slot[None], steps // 2)
        scale = max(1.0, float(np.abs(fine).max()))
        est = float(np.abs(fine - coarse).max()) / 15.0 / scale
    return MonodromyMatrix(lam=complex(lam), mat=fine, steps=steps, det=det,
                           liouville_defect=float(defect), est_error=est)


@dataclass(frozen=True)
class CharPolyInU:
    """det(u I - M(lambda)) as a monic polynomial in the multiplier u.

    coeffs is leading-first (coeffs[0] == 1, degree n*m); roots are the
    multipliers, and arg(root) of an on-circle root is a quasimomentum
    witness for lambda.
    """

    lam: complex
    coeffs: np.ndarray
    roots: np.ndarray
    steps: int
    liouville_defect: float


def _charpoly_from_hessenberg(H):
    # determinant recurrence on the upper Hessenberg form, leading-first arrays
    size = H.shape[0]
    polys = [np.array([1.0 + 0j])]
    for r in range(1, size + 1):
        term = np.polymul(np.array([1.0, -H[r - 1, r - 1]]), polys[r - 1])
        prod = 1.0 + 0j
        for i in range(r - 1, 0, -1):
            prod = prod * H[i, i - 1]
            coupling = H[i - 1, r - 1] * prod
            if coupling != 0:
                term = np.polyadd(term, -coupling * polys[i - 1])
        polys.append(term)
    return polys[size]


def char_poly_in_u(spec, lam, steps=DEFAULT_STEPS, tau_wr=TAU_WR):
    """Characteristic polynomial of the transfer matrix at lambda.

    The integration step count is doubled until the determinant gate
    passes (or a hard cap is hit), so callers normally never see the
    Liouville error.
    """
    current = steps
    mono = None
    while True:
        try:
            mono = monodromy_matrix(spec, lam, steps=current, tau_wr=tau_wr,
                                    estimate_error=False)
            break
        except ValueError:
            current *= 2
            if current > _MAX_STEPS:
                raise
    H = scipy.linalg.hessenberg(mono.mat)
    coeffs = _charpoly_from_hessenberg(H)
    roots = np.roots(coeffs)
    return CharPolyInU(lam=complex(lam), coeffs=coeffs, roots=roots,
                       steps=current, liouville_defect=mono.liouville_defect)


def root_pairing_defect(roots):
    """How far the root multiset is from closure under u -> 1/conj(u)."""
    roots = np.asarray(roots)
    worst = 0.0
    for u in roots:
        target = 1.0 / np.conj(u)
        near = np.abs(roots - target).min()
        worst = max(worst, near / max(1.0, abs(target)))
    return float(worst)


@dataclass(frozen=True)
class SpectrumMembership:
    contains: bool
    witness_t: float
    min_offcircle: float
    lam: float


def in_spectrum(spec, lam, tol_mod=TOL_MOD, steps=DEFAULT_STEPS):
    """Decide lambda in spectrum by testing multipliers against the unit circle.

    Requires a declared self-adjoint operator (the circle criterion is the
    self-adjoint characterization).  witness_t is the quasimomentum of the
    multiplier closest to the circle, reduced to [-pi/2, 3*pi/2).
    """
    if not spec.self_adjoint_declared:
        raise ValueError("spectrum membership by multipliers needs a self-adjoint operator")
    cp = char_poly_in_u(spec, float(lam), steps=steps)
    off = np.abs(np.abs(cp.roots) - 1.0)
    best = int(np.argmin(off))
    witness = reduce_t(float(np.angle(cp.roots[best])))
    return SpectrumMembership(
        contains=bool(off[best] <= tol_mod),
        witness_t=witness,
        min_offcircle=float(off[best]),
        lam=float(lam),
    )


def _wrap_to_pi(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def _fiber_mismatch(integrator, lam, t_target, circle_slack=0.2):
    mono = _rk4_transfer(integrator._nodes + lam * integrator._slot[None], integrator.steps)
    roots = np.linalg.eigvals(mono)
    off = np.abs(np.abs(roots) - 1.0)
    near = off <= circle_slack
    if not np.any(near):
        near = off <= off.min() + 1e-12  # fall back to the closest root
    candidates = roots[near]
    diffs = _wrap_to_pi(np.angle(candidates) - t_target)
    return float(diffs[np.argmin(np.abs(diffs))])


@dataclass(frozen=True)
class FiberBisection:
    lam: float
    mismatch: float
    iterations: int
    bracket: tuple


def bisect_to_fiber(spec, t_target, lam_guess, rel_bracket=1e-4,
                    steps=DEFAULT_STEPS, max_iter=90):
    """Refine lambda so a unit-circle multiplier lands on the fiber t_target.

    Classic bisection on the (wrapped) angular mismatch between the nearest
    multiplier and exp(i t_target), bracketing around lam_guess.  Used to
    feed transfer-matrix spectra back against the Fourier route.
    """
    integrator = TransferIntegrator(spec, steps)
    t_target = reduce_t(t_target)
    half = max(abs(lam_guess), 1.0) * rel_bracket
    lo, hi = lam_guess - half, lam_guess + half
    f_lo = _fiber_mismatch(integrator, lo, t_target)
    f_hi = _fiber_mismatch(integrator, hi, t_target)
    grow = 0
    while f_lo * f_hi > 0 and grow < 24:
        half *= 2.0
        lo, hi = lam_guess - half, lam_guess + half
        f_lo = _fiber_mismatch(integrator, lo, t_target)
        f_hi = _fiber_mismatch(integrator, hi, t_target)
        grow += 1
    if f_lo * f_hi > 0:
        raise ValueError("no sign change in fiber mismatch around lambda=%g" % lam_guess)
    xtol = 1e-12 * max(1.0, abs(lam_guess))
    iterations = 0
    while hi - lo > xtol and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        f_mid = _fiber_mismatch(integrator, mid, t_target)
        if f_mid == 0.0:
            lo = hi = mid
            break
        if f_lo * f_mid < 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
        iterations += 1
    lam = 0.5 * (lo + hi)
    return FiberBisection(
        lam=float(lam),
        mismatch=_fiber_mismatch(integrator, lam, t_target),
        iterations=iterations,
        bracket=(float(lo), float(hi)),
    )
