"""Shared reference operators for the test suite."""

import numpy as np
import pytest

from blochspec.coeffs import OperatorSpec, constant_series, selfadjoint_operator, series_from_harmonics

# 2x2 Hermitian with eigenvalues {0, 2} (char poly lambda^2 - 2 lambda by hand)
C_HAND = np.array([[1.0, 1j], [-1j, 1.0]])

# Hermitian trig perturbation with harmonics up to 2 and zero mean
Q_HARMONICS = {
    1: np.array([[0.5, -0.15j], [-0.15j, 0.0]]),
    -1: np.array([[0.5, 0.15j], [0.15j, 0.0]]),
    2: np.array([[0.0, 0.1j], [-0.1j, -0.25]]),
    -2: np.array([[0.0, 0.1j], [-0.1j, -0.25]]),
}


def perturbed_third_order(eps=0.5):
    """Order-3 self-adjoint operator, P_2 = C_HAND + eps * Q(x), mean C_HAND."""
    mapping = {0: C_HAND}
    for p, mat in Q_HARMONICS.items():
        mapping[p] = eps * mat
    return selfadjoint_operator(3, series_from_harmonics(2, mapping))


def scalar_cosine_third_order():
    """Order 3, scalar, P_2 = 2 cos(2 pi x), self-adjoint completion included."""
    p2 = series_from_harmonics(1, {1: [[1.0]], -1: [[1.0]]})
    return selfadjoint_operator(3, p2)


def constant_fourth_order():
    """Order 4 with constant P_2 = C_HAND (block-diagonal fibers)."""
    return OperatorSpec(n=4, m=2, coefficients={2: constant_series(C_HAND)},
                        self_adjoint_declared=True)


def perturbed_fourth_order(eps=0.5):
    """Order-4 twin of the perturbed family; +-k branches pinch at t=0."""
    mapping = {0: C_HAND}
    for p, mat in Q_HARMONICS.items():
        mapping[p] = eps * mat
    return selfadjoint_operator(4, series_from_harmonics(2, mapping))


@pytest.fixture(scope="session")
def a3_spec():
    return perturbed_third_order()


@pytest.fixture(scope="session")
def cosine_spec():
    return scalar_cosine_third_order()


@pytest.fixture(scope="session")
def constant_spec():
    return constant_fourth_order()


@pytest.fixture(scope="session")
def quartic_spec():
    return perturbed_fourth_order()
