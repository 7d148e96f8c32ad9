"""Chebyshev-U expansion of eigenpaths over an interval: matrix-coefficient
projection by Gauss-Chebyshev quadrature, a warm start from the simplified
block-lower-triangular system, and Newton refinement of the full coupled
system.

The coupled system collects, for each retained degree k, the U_k coefficient
of A(mu) v(mu) - lambda(mu) v(mu) (vector rows) and of v(mu)^T v(mu) - 1
(scalar rows), where products expand through
U_i U_j = U_{i+j} + U_{i+j-2} + ... + U_{|i-j|} and terms of degree above
the truncation order are discarded (Galerkin projection onto span U_0..U_p).
The unknown vector packs (lam_0, v_0, ..., lam_p, v_p), one scalar row and n
vector rows per block, giving a dense Jacobian of size (p+1)(n+1).

On accuracy: a degree-p best approximation interpolates the target at p+1
unknown points, so its error is governed by the (p+1)-st derivative at an
unknown intermediate point. That bound is informative for eigenvalue paths
(whose derivatives stay moderate away from crossings) but can blow up for
eigenvector paths near close eigenvalues. Because the intermediate points
are unknowable, no certified bound is computed here; accuracy is assessed
empirically against direct eigensolves (see the analysis module), and the
computed coefficients additionally carry the Newton residual perturbation.
"""

import warnings

import numpy as np
import scipy.linalg

from dataclasses import dataclass

from .errors import JacobianSingularError, NewtonDivergenceError, NumericalError
from .linalg import build_bordered, eigen_all, solve_bordered
from .series import (
    EigenPairSeries,
    MatrixSeries,
    ScalarSeries,
    SeriesBasis,
    VectorSeries,
    eval_cheb_u,
    u_values,
)
from .taylor import ExpansionFailure, taylor_rhs

DEFAULT_NEWTON_TOL = 1e-12
DEFAULT_NEWTON_MAX_ITER = 30
COLLISION_TOL = 1e-8


@dataclass(frozen=True)
class ChebRequest:
    """Expansion request over [mu1, mu2] with quadrature and Newton controls.

    ``quad_m`` defaults to max(64, 4(p+1)) and must exceed 2p so the
    projection quadrature is exact with margin for the retained degrees.
    """

    problem: object
    interval: tuple
    order: int
    quad_m: int | None = None
    selector: object = "all"
    newton_tol: float = DEFAULT_NEWTON_TOL
    newton_max_iter: int = DEFAULT_NEWTON_MAX_ITER

    def __post_init__(self):
        mu1, mu2 = self.interval
        if not mu1 < mu2:
            raise ValueError("interval must satisfy mu1 < mu2")
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        m = self.resolved_quad_m
        if m <= 2 * self.order:
            raise ValueError("quadrature size must exceed 2p")

    @property
    def resolved_quad_m(self):
        if self.quad_m is not None:
            return self.quad_m
        return max(64, 4 * (self.order + 1))


def gauss_chebyshev_u(m):
    """Gauss-Chebyshev nodes and weights for the weight sqrt(1 - s^2).

    Nodes s_j = cos(j pi / (m+1)) and weights (pi/(m+1)) sin^2(j pi/(m+1)),
    j = 1..m; exact for polynomial integrands of degree <= 2m - 1.
    """
    j = np.arange(1, m + 1)
    angles = j * np.pi / (m + 1)
    return np.cos(angles), (np.pi / (m + 1)) * np.sin(angles) ** 2


def project_matrix_coeffs(problem, interval, p, m=None):
    """Project A(mu) onto U_0..U_p over the interval by quadrature.

    A_i = (2/pi) sum_j w_j A(mu(s_j)) U_i(s_j). Unlike the Taylor case,
    A_0 here is a weighted average of A over the interval, not A at a point.
    """
    basis = SeriesBasis.chebyshev(*interval)
    if m is None:
        m = max(64, 4 * (p + 1))
    if m <= 2 * p:
        raise ValueError("quadrature size must exceed 2p")
    nodes, weights = gauss_chebyshev_u(m)
    mus = basis.from_affine(nodes)
    samples = np.empty((m, problem.n, problem.n), dtype=complex)
    for idx, mu in enumerate(mus):
        sample = np.asarray(problem.eval_at(mu), dtype=complex)
        if not np.all(np.isfinite(sample)):
            raise NumericalError(
                f"A(mu) is not finite at quadrature node {idx + 1} (mu={mu})"
            )
        samples[idx] = sample
    u_table = u_values(nodes, p)
    coeffs = (2.0 / np.pi) * np.einsum("j,ij,jkl->ikl", weights, u_table, samples)
    return MatrixSeries(basis, coeffs)


def pack_unknowns(lams, vs):
    """Pack (lam_0, v_0, ..., lam_p, v_p) into one vector."""
    blocks = []
    for lam, v in zip(lams, vs):
        blocks.append(np.concatenate(([lam], v)))
    return np.concatenate(blocks).astype(complex)


def unpack_unknowns(x, n):
    """Split a packed vector into (lams, vs) arrays."""
    blocks = x.reshape(-1, n + 1)
    return blocks[:, 0].copy(), blocks[:, 1:].copy()


def degree_pairs(k, p):
    """Ordered pairs (i, j) with i, j <= p whose product U_i U_j contains U_k."""
    pairs = []
    for i in range(p + 1):
        for j in range(p + 1):
            if abs(i - j) <= k <= i + j and (i + j - k) % 2 == 0:
                pairs.append((i, j))
    return pairs


def _degree_pair_table(p):
    return [degree_pairs(k, p) for k in range(p + 1)]


def warm_start(coeffs, eigindex):
    """Initial packed unknowns from the block-lower-triangular simplification.

    Keeping only the leading U_{i+j} term of every product makes the coupled
    system forward-substitutable: block 0 is an eigenpair of A_0 normalized
    to v_0^T v_0 = 1, and block k solves the same bordered system as the
    Taylor recursion but with all binomial weights equal to 1.
    """
    a_list = coeffs.coeffs
    p = coeffs.order
    a0 = np.asarray(a_list[0])
    decomp = eigen_all(a0)
    if not 0 <= eigindex < decomp.n:
        raise ValueError(f"eigenpair index {eigindex} out of range for n={decomp.n}")
    lam0 = complex(decomp.values[eigindex])
    v0 = decomp.vectors[:, eigindex].copy()

    bilinear = v0 @ v0
    if abs(bilinear) < 1e-8:
        raise NumericalError(
            "cannot normalize v0^T v0 = 1: eigenvector is numerically isotropic"
        )
    v0 = v0 / np.sqrt(bilinear)

    system = build_bordered(a0, v0, lam0, hermitian=False, unit_norm_check=False)
    lams = [lam0]
    vs = [v0]
    for k in range(1, p + 1):
        z, y = taylor_rhs(k, a_list, vs, lams, hermitian=False, unit_weights=True)
        lam_k, v_k = solve_bordered(system, np.concatenate(([z], y)))
        lams.append(lam_k)
        vs.append(v_k)
    return pack_unknowns(lams, vs)


def cheb_residual(x, coeffs):
    """Residual of the Galerkin-truncated coupled system at packed x.

    Zero exactly when the truncated series satisfy the projected
    eigenproblem and the truncated normalization v^T v = 1.
    """
    n = coeffs.n
    p = coeffs.order
    a_list = coeffs.coeffs
    lams, vs = unpack_unknowns(np.asarray(x, dtype=complex), n)
    table = _degree_pair_table(p)
    residual = np.zeros((p + 1) * (n + 1), dtype=complex)
    for k in range(p + 1):
        vec = np.zeros(n, dtype=complex)
        nrm = -1.0 if k == 0 else 0.0
        for i, j in table[k]:
            vec += a_list[i] @ vs[j] - lams[i] * vs[j]
            nrm += vs[i] @ vs[j]
        base = k * (n + 1)
        residual[base] = nrm
        residual[base + 1 : base + n + 1] = vec
    return residual


def cheb_jacobian(x, coeffs):
    """Exact Jacobian of :func:`cheb_residual` with respect to packed x.

    Block (k, m) holds sum over coupled degrees of A_i - lam_i I in the
    vector rows, -v_j in the lambda column, and 2 v_i^T in the scalar row.
    """
    n = coeffs.n
    p = coeffs.order
    a_list = coeffs.coeffs
    lams, vs = unpack_unknowns(np.asarray(x, dtype=complex), n)
    size = (p + 1) * (n + 1)
    jac = np.zeros((size, size), dtype=complex)
    eye = np.eye(n)
    for k in range(p + 1):
        row = k * (n + 1)
        for m in range(p + 1):
            col = m * (n + 1)
            # Degrees i with k in degrees(i, m): same parity/triangle test.
            indices = [
                i for i in range(p + 1) if abs(i - m) <= k <= i + m and (i + m - k) % 2 == 0
            ]
            if not indices:
                continue
            block = np.zeros((n, n), dtype=complex)
            lam_col = np.zeros(n, dtype=complex)
            nrm_row = np.zeros(n, dtype=complex)
            for i in indices:
                block += a_list[i] - lams[i] * eye
                lam_col -= vs[i]
                nrm_row += 2.0 * vs[i]
            jac[row, col + 1 : col + n + 1] = nrm_row
            jac[row + 1 : row + n + 1, col] = lam_col
            jac[row + 1 : row + n + 1, col + 1 : col + n + 1] = block
    return jac


def _series_from_packed(x, coeffs, diagnostics):
    lams, vs = unpack_unknowns(x, coeffs.n)
    lam = ScalarSeries(coeffs.basis, lams)
    vec = VectorSeries(coeffs.basis, vs)
    return EigenPairSeries(lam, vec, diagnostics)


def newton_refine(x0, coeffs, tol=DEFAULT_NEWTON_TOL, max_iter=DEFAULT_NEWTON_MAX_ITER):
    """Full-step Newton iteration on the coupled system.

    Stops when ||R||_inf <= tol * (1 + max_i ||A_i||_F). Raises
    JacobianSingularError on a pivot below 1e-14 of the factor scale and
    NewtonDivergenceError (carrying the best iterate) when the budget runs
    out.
    """
    scale = 1.0 + max(float(np.linalg.norm(a)) for a in coeffs.coeffs)
    threshold = tol * scale
    x = np.asarray(x0, dtype=complex).copy()
    residual = cheb_residual(x, coeffs)
    norm = float(np.max(np.abs(residual)))
    history = [norm]
    best_x, best_norm = x.copy(), norm
    iterations = 0
    while norm > threshold:
        if iterations >= max_iter:
            raise NewtonDivergenceError(
                f"Newton did not reach {threshold:.2e} in {max_iter} iterations "
                f"(best residual {best_norm:.2e})",
                best_x=best_x,
                best_residual=best_norm,
                iterations=iterations,
            )
        jac = cheb_jacobian(x, coeffs)
        lu, piv = scipy.linalg.lu_factor(jac)
        diag = np.abs(np.diagonal(lu))
        if diag.min() < 1e-14 * max(1.0, diag.max()):
            raise JacobianSingularError(
                f"Jacobian singular at Newton iteration {iterations}"
            )
        x = x - scipy.linalg.lu_solve((lu, piv), residual)
        residual = cheb_residual(x, coeffs)
        norm = float(np.max(np.abs(residual)))
        history.append(norm)
        iterations += 1
        if norm < best_norm:
            best_x, best_norm = x.copy(), norm
    diagnostics = {
        "method": "chebyshev",
        "newton_iterations": iterations,
        "final_residual": norm,
        "residual_history": history,
        "residual_scale": scale,
    }
    return _series_from_packed(x, coeffs, diagnostics)


def _detect_collisions(pairs, basis):
    """Flag result pairs whose eigenvalue paths coincide at 5 probe points."""
    mu1, mu2 = basis.interval
    probes = np.linspace(mu1, mu2, 5)
    evaluated = []
    for pair in pairs:
        if isinstance(pair, EigenPairSeries):
            evaluated.append(np.array([eval_cheb_u(pair.lam, mu) for mu in probes]))
        else:
            evaluated.append(None)
    collisions = []
    for a in range(len(pairs)):
        if evaluated[a] is None:
            continue
        for b in range(a + 1, len(pairs)):
            if evaluated[b] is None:
                continue
            if np.max(np.abs(evaluated[a] - evaluated[b])) < COLLISION_TOL:
                collisions.append((a, b))
                pairs[a].diagnostics.setdefault("collisions", []).append(b)
                pairs[b].diagnostics.setdefault("collisions", []).append(a)
    if collisions:
        warnings.warn(
            f"Chebyshev expansion produced coinciding eigenpaths: {collisions}; "
            "Newton offers no guarantee of n distinct eigenpairs",
            stacklevel=2,
        )
    return collisions


def cheb_expand_eigenpair(request, eigindex=None):
    """Warm start plus Newton refinement for one eigenpair."""
    if eigindex is None:
        if request.selector == "all":
            raise ValueError("an eigenpair index is required")
        eigindex = int(request.selector)
    coeffs = project_matrix_coeffs(
        request.problem, request.interval, request.order, request.resolved_quad_m
    )
    x0 = warm_start(coeffs, eigindex)
    return newton_refine(x0, coeffs, request.newton_tol, request.newton_max_iter)


def cheb_expand_all(request):
    """Warm start plus Newton for every eigenvalue of the averaged matrix A_0.

    Per-pair Newton failures are reported individually as ExpansionFailure
    entries; coinciding eigenpaths are flagged in diagnostics and warned
    about, not treated as failures.
    """
    coeffs = project_matrix_coeffs(
        request.problem, request.interval, request.order, request.resolved_quad_m
    )
    decomp = eigen_all(np.asarray(coeffs.coeffs[0]))
    out = []
    for index in range(decomp.n):
        try:
            x0 = warm_start(coeffs, index)
            pair = newton_refine(x0, coeffs, request.newton_tol, request.newton_max_iter)
            out.append(pair)
        except NumericalError as exc:
            out.append(ExpansionFailure(index, complex(decomp.values[index]), exc))
    _detect_collisions(out, coeffs.basis)
    return out
