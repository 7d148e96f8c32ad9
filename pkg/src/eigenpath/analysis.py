"""Pointwise evaluation, Rayleigh-quotient refinement, grid error reports
against direct eigensolves, Monte-Carlo sampling, and timing benchmarks.

Eigenvalue matching is greedy over ascending |difference| per grid point,
which equals the optimal assignment whenever direct eigenvalues are
separated by much more than the approximation error. The eigenvector
deviation metric is max over approximated vectors of
| max_i |v_direct_i^H v_hat| - 1 |, insensitive to phase.
"""

import csv
import time

import numpy as np

from dataclasses import dataclass

from .errors import DegenerateEvaluationError
from .linalg import eigen_all, phase_fix
from .series import (
    CHEBYSHEV_U,
    TAYLOR,
    clenshaw_u,
    eval_cheb_u,
    eval_taylor,
    horner,
    taylor_scaled_coeffs,
)
from .taylor import TaylorRequest, taylor_expand_all

HISTOGRAM_BINS = 50

SAMPLE_METHODS = ("taylor-eval", "cheb-eval", "rayleigh", "direct")


def eigpath_eval(pair, mu):
    """Evaluate one eigenpath at mu: (lambda, unit-norm phase-fixed vector)."""
    if pair.basis.kind == TAYLOR:
        lam = eval_taylor(pair.lam, mu)
        vec = eval_taylor(pair.vec, mu)
    else:
        lam = eval_cheb_u(pair.lam, mu)
        vec = eval_cheb_u(pair.vec, mu)
    norm = np.linalg.norm(vec)
    if norm < 1e-14:
        raise DegenerateEvaluationError(
            f"evaluated eigenvector at mu={mu} has norm {norm:.2e}"
        )
    return complex(lam), phase_fix(vec / norm)


def rayleigh_refine(problem, pair, mu):
    """Rayleigh quotient q^H A(mu) q / q^H q with q the normalized v(mu).

    For symmetric problems the eigenvalue error is quadratic in the
    eigenvector error; for non-symmetric problems no improvement is
    promised.
    """
    _, q = eigpath_eval(pair, mu)
    a = np.asarray(problem.eval_at(mu), dtype=complex)
    return complex((np.conj(q) @ (a @ q)) / (np.conj(q) @ q))


def greedy_match(approx, direct):
    """Match approximations to distinct direct values, closest pairs first.

    Returns an index array m with m[i] the direct index assigned to
    approx[i]; a bijection onto a subset of the direct values.
    """
    approx = np.asarray(approx)
    direct = np.asarray(direct)
    if approx.shape[0] > direct.shape[0]:
        raise ValueError("more approximations than direct values to match")
    diffs = np.abs(approx[:, None] - direct[None, :])
    assignment = np.full(approx.shape[0], -1, dtype=int)
    taken = np.zeros(direct.shape[0], dtype=bool)
    for flat in np.argsort(diffs, axis=None, kind="stable"):
        i, j = divmod(int(flat), direct.shape[0])
        if assignment[i] < 0 and not taken[j]:
            assignment[i] = j
            taken[j] = True
            if np.all(assignment >= 0):
                break
    return assignment


@dataclass(frozen=True)
class ErrorReport:
    """Grid-matched eigenvalue errors and eigenvector deviations."""

    grid: np.ndarray
    eig_errors: np.ndarray       # shape (len(grid), n_pairs)
    vec_deviation: np.ndarray    # shape (len(grid),)
    matching: np.ndarray         # shape (len(grid), n_pairs), direct indices
    max_error: float
    median_error: float

    @property
    def n_pairs(self):
        return self.eig_errors.shape[1]


def error_report(problem, pairs, grid):
    """Compare eigenpath series against direct eigensolves on a grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    n_pairs = len(pairs)
    eig_errors = np.zeros((grid.size, n_pairs))
    deviations = np.zeros(grid.size)
    matching = np.zeros((grid.size, n_pairs), dtype=int)
    for g, mu in enumerate(grid):
        decomp = eigen_all(problem.eval_at(mu), hermitian=problem.hermitian)
        lam_hat = np.zeros(n_pairs, dtype=complex)
        vec_hat = np.zeros((problem.n, n_pairs), dtype=complex)
        for i, pair in enumerate(pairs):
            lam_hat[i], vec_hat[:, i] = eigpath_eval(pair, mu)
        assignment = greedy_match(lam_hat, decomp.values)
        matching[g] = assignment
        eig_errors[g] = np.abs(lam_hat - decomp.values[assignment])
        overlaps = np.abs(decomp.vectors.conj().T @ vec_hat)
        deviations[g] = float(np.max(np.abs(overlaps.max(axis=0) - 1.0)))
    return ErrorReport(
        grid=grid,
        eig_errors=eig_errors,
        vec_deviation=deviations,
        matching=matching,
        max_error=float(eig_errors.max()),
        median_error=float(np.median(eig_errors)),
    )


def rayleigh_errors(problem, pairs, grid):
    """Absolute errors of Rayleigh-refined eigenvalues on a grid.

    Matched against direct eigenvalues the same way as error_report.
    """
    grid = np.asarray(grid, dtype=float)
    out = np.zeros((grid.size, len(pairs)))
    for g, mu in enumerate(grid):
        decomp = eigen_all(problem.eval_at(mu), hermitian=problem.hermitian)
        refined = np.array([rayleigh_refine(problem, pair, mu) for pair in pairs])
        assignment = greedy_match(refined, decomp.values)
        out[g] = np.abs(refined - decomp.values[assignment])
    return out


@dataclass(frozen=True)
class SampleSet:
    """Sampled eigenvalue realizations for tracked pairs, with timings.

    Reproducible: the same (seed, distribution, count, method) yields
    bitwise-identical samples and values.
    """

    seed: int
    mean: float
    stddev: float
    count: int
    method: str
    samples: np.ndarray          # shape (count,)
    values: np.ndarray           # shape (count, n_pairs), complex
    setup_seconds: float
    sampling_seconds: float


def draw_samples(mean, stddev, count, seed):
    rng = np.random.default_rng(seed)
    return rng.normal(mean, stddev, size=count)


def _eval_lambda_vectorized(pair, mus):
    if pair.basis.kind == TAYLOR:
        return horner(taylor_scaled_coeffs(pair.lam.coeffs), mus - pair.basis.mu0)
    return clenshaw_u(pair.lam.coeffs, pair.basis.affine(mus))


def sample_eigenvalues(problem, pairs, dist, count, seed, method, setup_seconds=0.0):
    """Sample tracked eigenvalues with the chosen evaluation method.

    ``method``: taylor-eval / cheb-eval evaluate the eigenvalue series
    directly; rayleigh evaluates the eigenvector series and refines through
    the Rayleigh quotient; direct solves the full dense eigenproblem per
    sample and matches each tracked pair to the nearest direct eigenvalue.
    """
    if count < 1:
        raise ValueError("sample count must be >= 1")
    if method not in SAMPLE_METHODS:
        raise ValueError(f"unknown sampling method {method!r}")
    mean, stddev = dist
    mus = draw_samples(mean, stddev, count, seed)
    n_pairs = len(pairs)
    values = np.zeros((count, n_pairs), dtype=complex)

    start = time.perf_counter()
    if method in ("taylor-eval", "cheb-eval"):
        expected = TAYLOR if method == "taylor-eval" else CHEBYSHEV_U
        for i, pair in enumerate(pairs):
            if pair.basis.kind != expected:
                raise ValueError(f"method {method} requires {expected} series")
            values[:, i] = _eval_lambda_vectorized(pair, mus)
    elif method == "rayleigh":
        for s, mu in enumerate(mus):
            a = np.asarray(problem.eval_at(mu), dtype=complex)
            for i, pair in enumerate(pairs):
                _, q = eigpath_eval(pair, mu)
                values[s, i] = (np.conj(q) @ (a @ q)) / (np.conj(q) @ q)
    else:  # direct
        predicted = np.column_stack([_eval_lambda_vectorized(p, mus) for p in pairs])
        for s, mu in enumerate(mus):
            decomp = eigen_all(problem.eval_at(mu), hermitian=problem.hermitian)
            assignment = greedy_match(predicted[s], decomp.values)
            values[s] = decomp.values[assignment]
    elapsed = time.perf_counter() - start

    return SampleSet(
        seed=seed,
        mean=float(mean),
        stddev=float(stddev),
        count=count,
        method=method,
        samples=mus,
        values=values,
        setup_seconds=float(setup_seconds),
        sampling_seconds=elapsed,
    )


def histogram_counts(values, lo, hi, bins=HISTOGRAM_BINS):
    """Counts over fixed equal-width bins; values outside [lo, hi] clip out."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=(lo, hi))
    return edges, counts


@dataclass(frozen=True)
class BenchRow:
    n: int
    p: int
    seconds: float
    ratio: float | None


def bench_complexity(make_problem, n_list, p_list, mu0=0.2, repeats=3):
    """Time taylor_expand_all across (n, p) combinations.

    Rows iterate p-major with n innermost, matching the doubling-table
    reading order; each ratio is against the previous row. Each cell is the
    median of ``repeats`` runs of the monotonic wall clock.
    """
    if not n_list or not p_list:
        raise ValueError("n_list and p_list must be nonempty")
    rows = []
    previous = None
    for p in p_list:
        for n in n_list:
            problem = make_problem(n)
            request = TaylorRequest(problem, mu0, p)
            times = []
            for _ in range(repeats):
                start = time.perf_counter()
                taylor_expand_all(request)
                times.append(time.perf_counter() - start)
            seconds = float(np.median(times))
            ratio = None if previous is None else seconds / previous
            rows.append(BenchRow(n=n, p=p, seconds=seconds, ratio=ratio))
            previous = seconds
    return rows


# ---------------------------------------------------------------------------
# CSV export. All floating-point values carry 17 significant digits.
# ---------------------------------------------------------------------------


def _fmt(value):
    return f"{value:.17g}"


def write_error_report_csv(report, path, rayleigh=None):
    """Columns: mu, pair_index, abs_err_lambda, vec_deviation.

    With ``rayleigh`` (an array from :func:`rayleigh_errors`), appends an
    abs_err_rayleigh column.
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        header = ["mu", "pair_index", "abs_err_lambda", "vec_deviation"]
        if rayleigh is not None:
            header.append("abs_err_rayleigh")
        writer.writerow(header)
        for g, mu in enumerate(report.grid):
            for i in range(report.n_pairs):
                row = [
                    _fmt(mu),
                    str(i),
                    _fmt(report.eig_errors[g, i]),
                    _fmt(report.vec_deviation[g]),
                ]
                if rayleigh is not None:
                    row.append(_fmt(rayleigh[g, i]))
                writer.writerow(row)


def write_samples_csv(sample_sets, path):
    """Per-sample eigenvalue realizations, one column pair per method/pair."""
    if not sample_sets:
        raise ValueError("at least one sample set is required")
    count = sample_sets[0].count
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        header = ["sample_index", "mu"]
        for ss in sample_sets:
            for i in range(ss.values.shape[1]):
                header.append(f"re_{ss.method}_pair{i}")
                header.append(f"im_{ss.method}_pair{i}")
        writer.writerow(header)
        for s in range(count):
            row = [str(s), _fmt(sample_sets[0].samples[s])]
            for ss in sample_sets:
                for i in range(ss.values.shape[1]):
                    row.append(_fmt(ss.values[s, i].real))
                    row.append(_fmt(ss.values[s, i].imag))
            writer.writerow(row)


def write_histogram_csv(sample_sets, path, bins=HISTOGRAM_BINS):
    """Columns: pair_index, bin_lo, bin_hi, then one count column per method.

    Bins span the combined sample range of all methods for each pair.
    """
    n_pairs = sample_sets[0].values.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        header = ["pair_index", "bin_lo", "bin_hi"]
        header += [f"count_{ss.method}" for ss in sample_sets]
        writer.writerow(header)
        for i in range(n_pairs):
            reals = [ss.values[:, i].real for ss in sample_sets]
            lo = min(float(r.min()) for r in reals)
            hi = max(float(r.max()) for r in reals)
            if hi <= lo:
                hi = lo + 1.0
            edges = None
            counts = []
            for r in reals:
                edges, c = histogram_counts(r, lo, hi, bins)
                counts.append(c)
            for b in range(bins):
                row = [str(i), _fmt(edges[b]), _fmt(edges[b + 1])]
                row += [str(int(c[b])) for c in counts]
                writer.writerow(row)


def write_timing_csv(rows, path):
    """Columns: n, p, seconds, ratio (blank in the first row)."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "p", "seconds", "ratio"])
        for row in rows:
            writer.writerow(
                [
                    str(row.n),
                    str(row.p),
                    _fmt(row.seconds),
                    "" if row.ratio is None else _fmt(row.ratio),
                ]
            )


def write_sampling_summary_csv(sample_sets, path):
    """Timing summary per method; speedup columns appear when a direct
    baseline is present in the same run."""
    direct = next((ss for ss in sample_sets if ss.method == "direct"), None)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["method", "setup_seconds", "sampling_seconds", "combined_seconds",
             "speedup_vs_direct", "combined_speedup_vs_direct"]
        )
        for ss in sample_sets:
            combined = ss.setup_seconds + ss.sampling_seconds
            if direct is None or ss.method == "direct":
                speedup = combined_speedup = ""
            else:
                speedup = _fmt(direct.sampling_seconds / ss.sampling_seconds)
                combined_speedup = _fmt(direct.sampling_seconds / combined)
            writer.writerow(
                [
                    ss.method,
                    _fmt(ss.setup_seconds),
                    _fmt(ss.sampling_seconds),
                    _fmt(combined),
                    speedup,
                    combined_speedup,
                ]
            )
