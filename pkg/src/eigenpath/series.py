"""Series bases, coefficient containers, evaluation recurrences, and the
product rule for second-kind Chebyshev polynomials.

Two bases are supported:

* Taylor about mu0. Coefficient k stores the k-th derivative value, so the
  represented function is sum_k coeffs[k] * (mu - mu0)^k / k!.
* Chebyshev-U on [mu1, mu2]. The represented function is
  sum_k coeffs[k] * U_k(s(mu)) with the unnormalized second-kind polynomials
  (U_0 = 1, U_1(s) = 2s, U_{k+1} = 2 s U_k - U_{k-1}) composed with the
  affine map s(mu) = (2 mu - mu2 - mu1) / (mu2 - mu1).

All containers are immutable after construction and safe to share between
threads; coefficient arrays are marked read-only.
"""

import json
import math

import numpy as np

from dataclasses import dataclass, field

TAYLOR = "taylor"
CHEBYSHEV_U = "chebyshev-u"


@dataclass(frozen=True)
class SeriesBasis:
    """Expansion basis: Taylor about a point or Chebyshev-U on an interval."""

    kind: str
    mu0: float | None = None
    interval: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind == TAYLOR:
            if self.mu0 is None or not math.isfinite(self.mu0):
                raise ValueError("Taylor basis requires a finite expansion point mu0")
            if self.interval is not None:
                raise ValueError("Taylor basis takes no interval")
        elif self.kind == CHEBYSHEV_U:
            if self.interval is None:
                raise ValueError("Chebyshev basis requires an interval")
            mu1, mu2 = self.interval
            if not (math.isfinite(mu1) and math.isfinite(mu2) and mu2 - mu1 > 0):
                raise ValueError("Chebyshev interval must be finite with mu2 > mu1")
            if self.mu0 is not None:
                raise ValueError("Chebyshev basis takes no expansion point")
            object.__setattr__(self, "interval", (float(mu1), float(mu2)))
        else:
            raise ValueError(f"unknown basis kind {self.kind!r}")

    @classmethod
    def taylor(cls, mu0):
        return cls(kind=TAYLOR, mu0=float(mu0))

    @classmethod
    def chebyshev(cls, mu1, mu2):
        return cls(kind=CHEBYSHEV_U, interval=(mu1, mu2))

    def affine(self, mu):
        """Map mu to s in [-1, 1]; s(mu1) = -1 and s(mu2) = +1 up to roundoff."""
        mu1, mu2 = self.interval
        return (2.0 * mu - mu2 - mu1) / (mu2 - mu1)

    def from_affine(self, s):
        """Inverse of :meth:`affine`."""
        mu1, mu2 = self.interval
        return 0.5 * (mu2 - mu1) * s + 0.5 * (mu1 + mu2)

    def contains(self, mu):
        """Whether mu lies inside the approximation domain (always for Taylor)."""
        if self.kind == TAYLOR:
            return True
        mu1, mu2 = self.interval
        return mu1 <= mu <= mu2


def _freeze(coeffs, ndim):
    arr = np.asarray(coeffs, dtype=complex)
    if arr.ndim != ndim:
        raise ValueError(f"expected {ndim}-dimensional coefficient array, got {arr.ndim}")
    if arr.shape[0] == 0:
        raise ValueError("at least the order-0 coefficient is required")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarSeries:
    """Complex scalar coefficients, orders 0..p, in one basis."""

    basis: SeriesBasis
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _freeze(self.coeffs, 1))

    @property
    def order(self):
        return self.coeffs.shape[0] - 1


@dataclass(frozen=True)
class VectorSeries:
    """Complex n-vector coefficients, orders 0..p. coeffs has shape (p+1, n)."""

    basis: SeriesBasis
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _freeze(self.coeffs, 2))

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def n(self):
        return self.coeffs.shape[1]


@dataclass(frozen=True)
class MatrixSeries:
    """Complex n-by-n coefficients, orders 0..p. coeffs has shape (p+1, n, n)."""

    basis: SeriesBasis
    coeffs: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.coeffs, 3)
        if arr.shape[1] != arr.shape[2]:
            raise ValueError("matrix coefficients must be square")
        object.__setattr__(self, "coeffs", arr)

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def n(self):
        return self.coeffs.shape[1]


@dataclass(frozen=True)
class EigenPairSeries:
    """Paired eigenvalue/eigenvector series for one eigenpath, plus diagnostics.

    ``diagnostics`` typically records per-order bordered residuals (Taylor)
    or Newton iteration counts and residual history (Chebyshev).
    """

    lam: ScalarSeries
    vec: VectorSeries
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lam.basis != self.vec.basis:
            raise ValueError("eigenvalue and eigenvector series must share one basis")
        if self.lam.order != self.vec.order:
            raise ValueError("eigenvalue and eigenvector series must share one order")

    @property
    def basis(self):
        return self.lam.basis

    @property
    def order(self):
        return self.lam.order

    @property
    def n(self):
        return self.vec.n


@dataclass(frozen=True)
class SeriesValue:
    """Evaluation result; ``extrapolated`` flags mu outside a Chebyshev interval."""

    value: complex | np.ndarray
    extrapolated: bool


def _check_point(mu):
    mu = float(mu)
    if not math.isfinite(mu):
        raise ValueError("evaluation point must be finite")
    return mu


def taylor_scaled_coeffs(coeffs):
    """Divide derivative values by k! so Horner's rule applies directly."""
    p = coeffs.shape[0] - 1
    scale = np.array([1.0 / math.factorial(k) for k in range(p + 1)])
    return coeffs * scale.reshape((-1,) + (1,) * (coeffs.ndim - 1))


def horner(scaled_coeffs, dx):
    """Evaluate sum_k scaled_coeffs[k] * dx^k by Horner's recurrence.

    dx may be a scalar or, for one-dimensional coefficients, an array of
    evaluation points (used by the vectorized sampling paths).
    """
    dx = np.asarray(dx, dtype=float) if np.ndim(dx) else float(dx)
    acc = scaled_coeffs[-1] + 0.0 * dx
    for k in range(scaled_coeffs.shape[0] - 2, -1, -1):
        acc = scaled_coeffs[k] + dx * acc
    return acc


def eval_taylor(series, mu):
    """Evaluate a Taylor series at mu: sum_k coeffs[k] (mu - mu0)^k / k!."""
    if series.basis.kind != TAYLOR:
        raise ValueError("eval_taylor requires a Taylor-basis series")
    mu = _check_point(mu)
    return horner(taylor_scaled_coeffs(series.coeffs), mu - series.basis.mu0)


def clenshaw_u(coeffs, s):
    """Evaluate sum_k coeffs[k] U_k(s) by the backward recurrence
    b_k = coeffs[k] + 2 s b_{k+1} - b_{k+2}; the result is b_0.

    s may be a scalar or, for one-dimensional coefficients, an array.
    """
    s = np.asarray(s, dtype=float) if np.ndim(s) else float(s)
    two_s = 2.0 * s
    b1 = b2 = 0.0 * (coeffs[0] + 0.0 * two_s)
    for k in range(coeffs.shape[0] - 1, -1, -1):
        b1, b2 = coeffs[k] + two_s * b1 - b2, b1
    return b1


def eval_cheb_u(series, mu):
    """Evaluate a Chebyshev-U series at mu (extrapolation permitted)."""
    if series.basis.kind != CHEBYSHEV_U:
        raise ValueError("eval_cheb_u requires a Chebyshev-basis series")
    mu = _check_point(mu)
    return clenshaw_u(series.coeffs, series.basis.affine(mu))


def evaluate_series(series, mu):
    """Evaluate in either basis, flagging extrapolation outside the interval."""
    if series.basis.kind == TAYLOR:
        return SeriesValue(eval_taylor(series, mu), extrapolated=False)
    value = eval_cheb_u(series, mu)
    return SeriesValue(value, extrapolated=not series.basis.contains(mu))


def u_product_degrees(i, j):
    """Degrees appearing in U_i * U_j = U_{i+j} + U_{i+j-2} + ... + U_{|i-j|}.

    All coefficients are 1; the list has min(i, j) + 1 entries.
    """
    if i < 0 or j < 0:
        raise ValueError("degrees must be nonnegative")
    return list(range(i + j, abs(i - j) - 1, -2))


def u_values(s, pmax):
    """Table of U_0(s)..U_pmax(s) via the three-term recurrence.

    Returns an array of shape (pmax + 1,) + shape(s).
    """
    s = np.asarray(s, dtype=float)
    out = np.empty((pmax + 1,) + s.shape)
    out[0] = 1.0
    if pmax >= 1:
        out[1] = 2.0 * s
    for k in range(1, pmax):
        out[k + 1] = 2.0 * s * out[k] - out[k - 1]
    return out


# ---------------------------------------------------------------------------
# JSON serialization
#
# Schema: { "basis": {...}, "n": int, "p": int, "coeffs": [[re, im], ...] }
# with coefficients nested one level deeper per tensor dimension. Floats go
# through Python's repr-exact JSON encoding, so round-trips are lossless.
# ---------------------------------------------------------------------------


def _basis_to_dict(basis):
    if basis.kind == TAYLOR:
        return {"kind": TAYLOR, "mu0": basis.mu0}
    return {"kind": CHEBYSHEV_U, "interval": [basis.interval[0], basis.interval[1]]}


def _basis_from_dict(doc):
    kind = doc.get("kind")
    if kind == TAYLOR:
        return SeriesBasis.taylor(doc["mu0"])
    if kind == CHEBYSHEV_U:
        mu1, mu2 = doc["interval"]
        return SeriesBasis.chebyshev(mu1, mu2)
    raise ValueError(f"unknown basis kind in document: {kind!r}")


def _coeffs_to_nested(arr):
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [_coeffs_to_nested(sub) for sub in arr]


def _coeffs_from_nested(doc):
    doc = np.asarray(doc, dtype=float)
    if doc.shape[-1] != 2:
        raise ValueError("coefficient leaves must be [re, im] pairs")
    return doc[..., 0] + 1j * doc[..., 1]


def series_to_dict(series):
    """Serialize a Scalar/Vector/MatrixSeries to the documented JSON schema."""
    coeffs = series.coeffs
    n = 1 if coeffs.ndim == 1 else coeffs.shape[1]
    return {
        "basis": _basis_to_dict(series.basis),
        "n": n,
        "p": coeffs.shape[0] - 1,
        "coeffs": _coeffs_to_nested(coeffs),
    }


def series_from_dict(doc):
    """Inverse of :func:`series_to_dict`; nesting depth selects the container."""
    basis = _basis_from_dict(doc["basis"])
    coeffs = _coeffs_from_nested(doc["coeffs"])
    if coeffs.ndim == 1:
        return ScalarSeries(basis, coeffs)
    if coeffs.ndim == 2:
        return VectorSeries(basis, coeffs)
    if coeffs.ndim == 3:
        return MatrixSeries(basis, coeffs)
    raise ValueError("unsupported coefficient nesting depth")


def _json_safe_diag(diagnostics):
    out = {}
    for key, value in diagnostics.items():
        if isinstance(value, np.ndarray):
            value = value.tolist()
        elif isinstance(value, (np.floating, np.integer)):
            value = value.item()
        elif isinstance(value, complex):
            value = [value.real, value.imag]
        out[key] = value
    return out


def eigenpair_to_dict(pair):
    """Serialize an EigenPairSeries (eigenvalue + eigenvector + diagnostics)."""
    return {
        "basis": _basis_to_dict(pair.basis),
        "n": pair.n,
        "p": pair.order,
        "lambda": _coeffs_to_nested(pair.lam.coeffs),
        "v": _coeffs_to_nested(pair.vec.coeffs),
        "diagnostics": _json_safe_diag(pair.diagnostics),
    }


def eigenpair_from_dict(doc):
    basis = _basis_from_dict(doc["basis"])
    lam = ScalarSeries(basis, _coeffs_from_nested(doc["lambda"]))
    vec = VectorSeries(basis, _coeffs_from_nested(doc["v"]))
    return EigenPairSeries(lam, vec, dict(doc.get("diagnostics", {})))


def save_eigenpair(pair, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(eigenpair_to_dict(pair), handle, indent=1)
        handle.write("\n")


def load_eigenpair(path):
    with open(path, encoding="utf-8") as handle:
        return eigenpair_from_dict(json.load(handle))
