"""Shared fixtures. Expensive expansions are session-scoped and reused."""

import numpy as np
import pytest

from eigenpath import (
    ChebRequest,
    ParametricProblem,
    TaylorRequest,
    cheb_expand_all,
    expansion_series,
    make_jordan,
    make_spring_chain,
    make_torus_kernel,
    taylor_expand_all,
)


def linear_problem():
    """The 1x1 problem A(mu) = [mu]."""

    def eval_at(mu):
        return np.array([[mu]])

    def derivs_at(mu0, p):
        derivs = np.zeros((p + 1, 1, 1))
        derivs[0, 0, 0] = mu0
        if p >= 1:
            derivs[1, 0, 0] = 1.0
        return derivs

    return ParametricProblem(
        name="linear", n=1, eval_at=eval_at, derivs_at=derivs_at, hermitian=True
    )


def constant_problem(a0, hermitian=False):
    """A(mu) = A0 for all mu."""
    a0 = np.asarray(a0, dtype=float)
    n = a0.shape[0]

    def eval_at(mu):
        return a0.copy()

    def derivs_at(mu0, p):
        derivs = np.zeros((p + 1, n, n))
        derivs[0] = a0
        return derivs

    return ParametricProblem(
        name="constant", n=n, eval_at=eval_at, derivs_at=derivs_at, hermitian=hermitian
    )


def shift_problem(a0, mu0):
    """A(mu) = A0 + (mu - mu0) I: uniform spectral shift."""
    a0 = np.asarray(a0, dtype=float)
    n = a0.shape[0]

    def eval_at(mu):
        return a0 + (mu - mu0) * np.eye(n)

    def derivs_at(point, p):
        derivs = np.zeros((p + 1, n, n))
        derivs[0] = eval_at(point)
        if p >= 1:
            derivs[1] = np.eye(n)
        return derivs

    return ParametricProblem(
        name="shift", n=n, eval_at=eval_at, derivs_at=derivs_at, hermitian=False
    )


@pytest.fixture(scope="session")
def torus8():
    return make_torus_kernel(8)


@pytest.fixture(scope="session")
def spring8():
    return make_spring_chain(8)


@pytest.fixture(scope="session")
def jordan8():
    return make_jordan(8)


@pytest.fixture(scope="session")
def taylor_e1_p6(torus8):
    return expansion_series(taylor_expand_all(TaylorRequest(torus8, 0.2, 6)))


@pytest.fixture(scope="session")
def taylor_e1_p20(torus8):
    return expansion_series(taylor_expand_all(TaylorRequest(torus8, 0.2, 20)))


@pytest.fixture(scope="session")
def cheb_e1_p10(torus8):
    return expansion_series(cheb_expand_all(ChebRequest(torus8, (0.25, 1.0), 10)))


@pytest.fixture(scope="session")
def cheb_e1_p20(torus8):
    return expansion_series(cheb_expand_all(ChebRequest(torus8, (0.25, 1.0), 20)))
