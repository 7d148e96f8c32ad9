"""Dense eigendecomposition, bordered linear systems, and the Schur-reduced
fast solve used by the expansion order loops.

The bordered matrix is

    E = [ 0   b^T ]        b = v0 (conjugated when the problem is Hermitian)
        [ v0  lam0 I - A0 ]

Each expansion order solves E x = rhs with the same E, so the LU factors are
computed once. When all eigenpairs are wanted, a single Schur form
A0 = Q T Q^H reduces every solve to O(n^2) triangular work.
"""

import numpy as np
import scipy.linalg

from dataclasses import dataclass, field

from .errors import EigenSolverError, NonSimpleEigenvalueError

SINGULARITY_RCOND = 1e-12


def _check_square(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError("expected a square matrix with n >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def phase_fix(v):
    """Rotate v so its largest-magnitude component is real and positive.

    Removes the unit-modulus gauge freedom deterministically; ties resolve
    to the first maximal component.
    """
    idx = int(np.argmax(np.abs(v)))
    pivot = v[idx]
    if pivot == 0:
        return v
    return v * (abs(pivot) / pivot)


def _sort_order(values):
    # Descending real part, ties broken by descending imaginary part.
    return np.lexsort((-values.imag, -values.real))


@dataclass(frozen=True)
class EigenDecomposition:
    """Full dense eigendecomposition plus Schur factors A = Q T Q^H.

    Eigenvalues are sorted by descending real part (ties by descending
    imaginary part); eigenvectors are unit 2-norm columns with the phase fix
    applied. T is diagonal for Hermitian input.
    """

    values: np.ndarray
    vectors: np.ndarray
    schur_q: np.ndarray
    schur_t: np.ndarray
    hermitian: bool = False

    @property
    def n(self):
        return self.values.shape[0]


def eigen_all(a, hermitian=False):
    """All eigenpairs of a dense matrix, with Schur factors for reuse."""
    a = _check_square(a)
    try:
        if hermitian:
            values, vectors = np.linalg.eigh(a)
            values = values.astype(complex)
            schur_t = None
        else:
            schur_t, schur_q = scipy.linalg.schur(a, output="complex")
            values, vectors = scipy.linalg.eig(a)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigenSolverError(
            f"dense eigensolver failed to converge: {exc}",
            diagnostics={"n": a.shape[0], "reason": str(exc)},
        ) from exc
    order = _sort_order(values)
    values = values[order]
    vectors = vectors[:, order].astype(complex)
    for i in range(vectors.shape[1]):
        col = vectors[:, i]
        vectors[:, i] = phase_fix(col / np.linalg.norm(col))
    if hermitian:
        # T is diagonal, so the phase-fixed eigenvector matrix is a valid Q
        # and Q's column j is exactly the returned eigenvector j.
        schur_q = vectors.copy()
        schur_t = np.diag(values)
    for arr in (values, vectors, schur_q, schur_t):
        arr.setflags(write=False)
    return EigenDecomposition(values, vectors, schur_q, schur_t, hermitian)


def border_row(v0, hermitian):
    """Border row of E: v0^T in general, v0^H for Hermitian problems.

    The unconjugated transpose keeps the system linear over the complex
    field; the conjugate transpose preserves Hermitian structure.
    """
    return np.conj(v0) if hermitian else np.asarray(v0)


def assemble_bordered(a0, v0, lam0, hermitian=False):
    """Assemble the (n+1) x (n+1) bordered matrix E."""
    a0 = np.asarray(a0, dtype=complex)
    v0 = np.asarray(v0, dtype=complex)
    n = a0.shape[0]
    e = np.zeros((n + 1, n + 1), dtype=complex)
    e[0, 1:] = border_row(v0, hermitian)
    e[1:, 0] = v0
    e[1:, 1:] = lam0 * np.eye(n) - a0
    return e


@dataclass(frozen=True)
class BorderedSystem:
    """Bordered matrix with its one-time LU factorization.

    Immutable after construction; concurrent solves against one
    factorization are safe (scipy's lu_solve does not mutate the factors).
    """

    matrix: np.ndarray
    border: np.ndarray
    lam0: complex
    hermitian: bool
    lu: tuple = field(repr=False)
    condition_estimate: float = 0.0

    @property
    def size(self):
        return self.matrix.shape[0]


def _rcond_from_lu(e, lu_piv):
    anorm = np.linalg.norm(e, 1)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (e,))
    rcond, info = gecon(lu_piv[0], anorm, norm="1")
    if info != 0:
        raise EigenSolverError(f"condition estimation failed (info={info})")
    return float(rcond)


def build_bordered(a0, v0, lam0, hermitian=False, unit_norm_check=True, single_precision=False):
    """Build and factorize the bordered system for (lam0, v0) at A0.

    Raises NonSimpleEigenvalueError when the reciprocal condition estimate
    falls below 1e-12, which happens exactly when lam0 is not a simple
    eigenvalue of A0. ``single_precision`` rounds the assembled matrix to
    single precision before factorization (error-floor experiment).
    """
    a0 = _check_square(a0)
    v0 = np.asarray(v0, dtype=complex)
    if unit_norm_check and abs(np.linalg.norm(v0) - 1.0) > 1e-12:
        raise ValueError("v0 must have unit 2-norm")
    e = assemble_bordered(a0, v0, lam0, hermitian)
    if single_precision:
        e = e.astype(np.complex64).astype(np.complex128)
    lu_piv = scipy.linalg.lu_factor(e)
    rcond = _rcond_from_lu(e, lu_piv)
    if rcond < SINGULARITY_RCOND:
        raise NonSimpleEigenvalueError(
            f"non-simple eigenvalue at expansion point (rcond={rcond:.2e}); "
            "the bordered matrix is singular when lam0 is not simple"
        )
    e.setflags(write=False)
    return BorderedSystem(
        matrix=e,
        border=v0.copy(),
        lam0=complex(lam0),
        hermitian=hermitian,
        lu=lu_piv,
        condition_estimate=rcond,
    )


def solve_bordered(system, rhs):
    """Solve E [lam_k; v_k] = rhs; returns the split (lam_k, v_k)."""
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape != (system.size,):
        raise ValueError(f"rhs must have length {system.size}")
    x = scipy.linalg.lu_solve(system.lu, rhs)
    return complex(x[0]), x[1:]


def solve_bordered_reduced(q, t, v0, lam0, rhs, hermitian=False):
    """Solve the bordered system through the Schur factors of A0 in O(n^2).

    With A0 = Q T Q^H the bordered matrix factors through a system whose
    core lam0 I - T is upper triangular (diagonal when Hermitian). The rhs
    vector part is transformed by Q^H, the triangular system is solved by
    block elimination around the near-zero pivot at the matched diagonal
    entry, and the result is transformed back by Q.

    The elimination treats (w_j, lam_k) as terminal unknowns: suffix and
    prefix rows are solved with the right sides parameterized affinely in
    those two, and a final 2x2 system determines them. Nothing is dropped,
    so the result agrees with the dense solve to backward-error accuracy.
    """
    q = np.asarray(q, dtype=complex)
    t = np.asarray(t, dtype=complex)
    v0 = np.asarray(v0, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    n = q.shape[0]
    if rhs.shape != (n + 1,):
        raise ValueError(f"rhs must have length {n + 1}")

    z, y = rhs[0], rhs[1:]
    c = q.conj().T @ v0                     # transformed border column
    r = border_row(v0, hermitian) @ q       # transformed border row
    yhat = q.conj().T @ y

    diag = np.diagonal(t)
    j = int(np.argmin(np.abs(lam0 - diag)))
    s = lam0 * np.eye(n) - t

    scale = 1.0 + abs(lam0) + float(np.max(np.abs(diag)))
    off_pivot = np.abs(lam0 - np.delete(diag, j))
    if off_pivot.size and np.min(off_pivot) < SINGULARITY_RCOND * scale:
        raise NonSimpleEigenvalueError(
            "non-simple eigenvalue at expansion point (repeated Schur diagonal entry)"
        )

    lo = slice(0, j)
    hi = slice(j + 1, n)
    n_hi = n - j - 1

    # Suffix rows i > j: w_hi = alpha_hi + beta_hi * lam.
    if n_hi:
        cols = np.column_stack((yhat[hi], -c[hi]))
        sol = scipy.linalg.solve_triangular(s[hi, hi], cols, lower=False)
        alpha_hi, beta_hi = sol[:, 0], sol[:, 1]
    else:
        alpha_hi = beta_hi = np.zeros(0, dtype=complex)

    # Prefix rows i < j: w_lo = alpha_lo + beta_lo * lam + delta_lo * w_j.
    if j:
        s_lo_hi = s[lo, hi]
        cols = np.column_stack(
            (
                yhat[lo] - s_lo_hi @ alpha_hi,
                -c[lo] - s_lo_hi @ beta_hi,
                -s[lo, j],
            )
        )
        sol = scipy.linalg.solve_triangular(s[lo, lo], cols, lower=False)
        alpha_lo, beta_lo, delta_lo = sol[:, 0], sol[:, 1], sol[:, 2]
    else:
        alpha_lo = beta_lo = delta_lo = np.zeros(0, dtype=complex)

    # Remaining equations: Schur row j and the border row, in (w_j, lam).
    s_j_hi = s[j, hi]
    m00 = s[j, j]
    m01 = c[j] + s_j_hi @ beta_hi
    b0 = yhat[j] - s_j_hi @ alpha_hi
    m10 = r[lo] @ delta_lo + r[j]
    m11 = r[lo] @ beta_lo + r[hi] @ beta_hi
    b1 = z - r[lo] @ alpha_lo - r[hi] @ alpha_hi

    det = m00 * m11 - m01 * m10
    pivot_scale = max(abs(m00) + abs(m01), abs(m10) + abs(m11), 1.0)
    if abs(det) < SINGULARITY_RCOND * pivot_scale:
        raise NonSimpleEigenvalueError(
            "non-simple eigenvalue at expansion point (eliminated pivot below 1e-12)"
        )
    w_j = (b0 * m11 - m01 * b1) / det
    lam_k = (m00 * b1 - m10 * b0) / det

    w = np.empty(n, dtype=complex)
    w[lo] = alpha_lo + beta_lo * lam_k + delta_lo * w_j
    w[j] = w_j
    w[hi] = alpha_hi + beta_hi * lam_k
    return complex(lam_k), q @ w
