"""Scalar special functions: Gamma, Beta, Kummer's 1F1 and a generalized 2F2.

All evaluations are plain double precision and return an explicit
truncation/roundoff estimate alongside the value, so callers can decide
whether a result is trustworthy.  Arbitrary-precision arithmetic is not
used here; high-precision references live in the test suite only.

Two implementation notes that matter in practice:

* ``kummer_1f1`` applies the standard transformation
  1F1(a, b; z) = exp(z) * 1F1(b - a, b; -z) for z < 0, so the summed
  series always has a non-negative argument.
* ``hyp_2f2`` detects the contiguous parameter pattern
  2F2(A, B; A+1, b; z) with z < 0 and reroutes it through a series of
  lower incomplete gamma functions whose terms carry at most a couple of
  sign changes.  The naive alternating series loses all digits already
  for z around -40; the rerouted form is uniformly stable, which the
  radial-integral callers in :mod:`susyqm.coulomb` rely on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

from .errors import CancellationWarning, ConvergenceError, DomainError, PoleError

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class SeriesSettings:
    """Termination policy for the hypergeometric series.

    A series stops once ``consecutive`` successive terms fall below
    ``rel_tol`` times the running sum; it fails with
    :class:`~susyqm.errors.ConvergenceError` after ``max_terms`` terms.
    Arguments beyond ``max_abs_z`` are rejected up front.
    """

    rel_tol: float = 1e-16
    consecutive: int = 3
    max_terms: int = 10_000
    max_abs_z: float = 200.0


DEFAULT_SETTINGS = SeriesSettings()


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series plus an absolute error estimate."""

    value: float
    est_error: float
    terms_used: int

    def __post_init__(self):
        if math.isfinite(self.value) and not (
            math.isfinite(self.est_error) and self.est_error >= 0.0
        ):
            raise ValueError("est_error must be finite and non-negative")


def _nonpositive_integer(x: float, tol: float = 1e-12) -> bool:
    return x < 0.5 and abs(x - round(x)) <= tol


def gamma_fn(x: float) -> float:
    """Gamma function on the real line.

    Raises :class:`PoleError` at 0, -1, -2, ... and lets the underlying
    libm raise ``OverflowError`` when the result exceeds double range.
    """
    if _nonpositive_integer(x):
        raise PoleError(f"gamma_fn({x}): pole at non-positive integer")
    return math.gamma(x)


def _signed_loggamma(x: float) -> tuple[float, float]:
    """Return (log|Gamma(x)|, sign(Gamma(x))) for non-pole real x."""
    if _nonpositive_integer(x):
        raise PoleError(f"log-gamma pole at {x}")
    if x > 0:
        return math.lgamma(x), 1.0
    # Gamma alternates sign between consecutive negative integers.
    sign = -1.0 if (math.floor(x) % 2 != 0) else 1.0
    return math.lgamma(x), sign


def beta_fn(x: float, y: float) -> float:
    """Signed Beta function B(x, y) = Gamma(x)Gamma(y)/Gamma(x+y).

    Computed through log-gamma differences so moderate arguments never
    overflow.  Negative non-integer arguments are allowed and the sign of
    each gamma factor is tracked explicitly.
    """
    for arg in (x, y, x + y):
        if _nonpositive_integer(arg):
            raise PoleError(f"beta_fn({x}, {y}): pole (argument {arg})")
    lx, sx = _signed_loggamma(x)
    ly, sy = _signed_loggamma(y)
    lxy, sxy = _signed_loggamma(x + y)
    return sx * sy * sxy * math.exp(lx + ly - lxy)


def _series_1f1(a: float, b: float, z: float, s: SeriesSettings):
    """Direct power series for 1F1.  Returns (value, est_error, terms)."""
    total = 1.0
    comp = 0.0
    term = 1.0
    max_term = 1.0
    terms = 1
    small = 0
    for m in range(s.max_terms):
        term *= (a + m) * z / ((b + m) * (m + 1.0))
        if term == 0.0:
            # a hit a non-positive integer: the series is a polynomial
            break
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        terms += 1
        max_term = max(max_term, abs(term))
        if abs(term) <= s.rel_tol * abs(total):
            small += 1
            if small >= s.consecutive:
                break
        else:
            small = 0
    else:
        raise ConvergenceError(
            f"1F1({a}, {b}; {z}) did not converge in {s.max_terms} terms"
        )
    est = 3.0 * abs(term) + _EPS * (2.0 * max_term + abs(total))
    return total, est, terms


def kummer_1f1(
    a: float, b: float, z: float, settings: SeriesSettings | None = None
) -> SeriesResult:
    """Confluent hypergeometric function 1F1(a, b; z).

    For a in {0, -1, -2, ...} the series is a polynomial and is summed
    exactly with ``terms_used = |a| + 1``.  For z < 0 the Kummer
    transformation maps the evaluation onto a non-negative argument.
    """
    s = settings or DEFAULT_SETTINGS
    if _nonpositive_integer(b):
        raise DomainError(f"kummer_1f1: b={b} is a non-positive integer")
    if abs(z) > s.max_abs_z:
        raise DomainError(f"kummer_1f1: |z|={abs(z)} exceeds {s.max_abs_z}")
    if _nonpositive_integer(a):
        value, est, terms = _series_1f1(round(a), b, z, s)
        return SeriesResult(value, est, terms)
    if z < 0.0:
        value, est, terms = _series_1f1(b - a, b, -z, s)
        scale = math.exp(z)
        return SeriesResult(value * scale, est * scale + _EPS * abs(value * scale), terms)
    value, est, terms = _series_1f1(a, b, z, s)
    return SeriesResult(value, est, terms)


def kummer_1f1_deriv(
    a: float, b: float, z: float, settings: SeriesSettings | None = None
) -> SeriesResult:
    """d/dz 1F1(a, b; z) = (a/b) * 1F1(a+1, b+1; z)."""
    if _nonpositive_integer(b) or _nonpositive_integer(b + 1.0):
        raise DomainError(f"kummer_1f1_deriv: b={b} not admissible")
    inner = kummer_1f1(a + 1.0, b + 1.0, z, settings)
    scale = a / b
    return SeriesResult(
        scale * inner.value, abs(scale) * inner.est_error, inner.terms_used
    )


def _kummer_1f1_array(
    a: float, b: float, z: np.ndarray, settings: SeriesSettings | None = None
):
    """Vectorized 1F1 over an array of arguments of uniform sign.

    Returns (values, max_est_error, terms_used).  Same mathematics as
    :func:`kummer_1f1`; exists so grid-wide evaluations do not pay a
    Python-loop per point.
    """
    s = settings or DEFAULT_SETTINGS
    if _nonpositive_integer(b):
        raise DomainError(f"b={b} is a non-positive integer")
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        return z.copy(), 0.0, 1
    if np.max(np.abs(z)) > s.max_abs_z:
        raise DomainError("argument exceeds configured |z| range")
    if np.min(z) < 0.0 < np.max(z):
        raise DomainError("mixed-sign argument arrays are not supported")
    scale = None
    aa = a
    if np.max(z) <= 0.0 and not _nonpositive_integer(a):
        scale = np.exp(z)
        aa, z = b - a, -z
    else:
        aa = round(a) if _nonpositive_integer(a) else a
    total = np.ones_like(z)
    term = np.ones_like(z)
    max_term = np.ones_like(z)
    terms = 1
    small = 0
    for m in range(s.max_terms):
        term = term * ((aa + m) / ((b + m) * (m + 1.0))) * z
        if not np.any(term):
            break
        total = total + term
        terms += 1
        np.maximum(max_term, np.abs(term), out=max_term)
        rel = float(np.max(np.abs(term) / (np.abs(total) + 1e-300)))
        if rel <= s.rel_tol:
            small += 1
            if small >= s.consecutive:
                break
        else:
            small = 0
    else:
        raise ConvergenceError(f"1F1 array evaluation hit {s.max_terms} terms")
    est = 3.0 * np.abs(term) + _EPS * (2.0 * max_term + np.abs(total))
    if scale is not None:
        total = total * scale
        est = est * scale + _EPS * np.abs(total)
    return total, float(np.max(est)), terms


def _series_2f2(a1, a2, b1, b2, z, s: SeriesSettings):
    """Direct compensated power series for 2F2."""
    total = 1.0
    comp = 0.0
    term = 1.0
    max_term = 1.0
    terms = 1
    small = 0
    for m in range(s.max_terms):
        term *= (a1 + m) * (a2 + m) * z / ((b1 + m) * (b2 + m) * (m + 1.0))
        if term == 0.0:
            break
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        terms += 1
        max_term = max(max_term, abs(term))
        if abs(term) <= s.rel_tol * abs(total):
            small += 1
            if small >= s.consecutive:
                break
        else:
            small = 0
    else:
        raise ConvergenceError(
            f"2F2({a1},{a2};{b1},{b2};{z}) did not converge in {s.max_terms} terms"
        )
    est = 3.0 * abs(term) + _EPS * (2.0 * max_term + abs(total))
    return total, est, terms


def _igamma_series(
    A: float,
    B: float,
    b: float,
    s_arr: np.ndarray,
    s: SeriesSettings,
    log_amplitude=0.0,
    kind: str = "lower",
):
    """exp(log_amplitude) * sum_j c_j igamma(A+j, s), c_j = (b-B)_j/((b)_j j!).

    Building block for 2F2(A, B; A+1, b; -s): with ``kind="lower"`` and
    log_amplitude = 0 that function equals A * s^{-A} times this sum.
    ``log_amplitude`` (scalar or per-point array) is folded into the
    exponent of every term so callers can attach large outer coefficients
    without intermediate overflow.  Terms are single-signed apart from at
    most ceil(|b-B|) early flips, so no digits are lost to alternating
    cancellation.

    ``kind`` selects the lower incomplete gamma, its upper complement, or
    the full Gamma(A+j); the last two require the series to truncate
    (b - B a non-positive integer) since they diverge otherwise.
    Returns (values, est_errors, terms_used).
    """
    s_arr = np.asarray(s_arr, dtype=float)
    d = b - B
    if kind != "lower" and not _nonpositive_integer(d):
        raise DomainError("upper/full gamma sums require a truncating series")
    out = np.zeros_like(s_arr)
    est = np.zeros_like(s_arr)
    smax = float(np.max(s_arr, initial=0.0))
    log_c, sign_c = 0.0, 1.0
    small = 0
    last = np.zeros_like(s_arr)
    terms = 0
    exact = False
    for j in range(s.max_terms):
        aj = A + j
        if kind == "lower":
            frac = gammainc(aj, s_arr)
        elif kind == "upper":
            frac = gammaincc(aj, s_arr)
        else:
            frac = np.ones_like(s_arr)
        with np.errstate(divide="ignore"):
            logfrac = np.where(
                frac > 0.0, np.log(np.where(frac > 0.0, frac, 1.0)), -np.inf
            )
        last = sign_c * np.exp(log_c + gammaln(aj) + logfrac + log_amplitude)
        out += last
        est += _EPS * np.abs(last)
        terms += 1
        rel = float(np.max(np.abs(last) / (np.abs(out) + 1e-300)))
        fac = (d + j) / ((b + j) * (j + 1.0))
        if fac == 0.0:
            exact = True  # (b-B) is a non-positive integer: finite sum, done
            break
        if rel <= s.rel_tol:
            small += 1
            # Incomplete gammas keep growing until A+j passes s, so do not
            # stop on a transiently small early term.
            if small >= s.consecutive and aj > smax + 8.0:
                break
        else:
            small = 0
        log_c += math.log(abs(fac))
        sign_c *= 1.0 if fac > 0 else -1.0
    else:
        raise ConvergenceError("2F2 incomplete-gamma series hit the term cap")
    if not exact:
        est += 3.0 * np.abs(last)
    est += _EPS * np.abs(out)
    return out, est, terms


def _hyp2f2_contig_array(
    A: float, B: float, b: float, s_arr: np.ndarray, s: SeriesSettings
):
    """2F2(A, B; A+1, b; -s) for s >= 0, elementwise over an array."""
    s_arr = np.asarray(s_arr, dtype=float)
    pos = s_arr > 0.0
    logs = np.log(np.where(pos, s_arr, 1.0))
    out, est, terms = _igamma_series(
        A, B, b, s_arr, s, log_amplitude=math.log(A) - A * logs
    )
    out = np.where(pos, out, 1.0)
    est = np.where(pos, est, 0.0)
    return out, est, terms


def _contiguous_arrangement(a1, a2, b1, b2):
    """Find (A, B, b) with {A, B} = {a1, a2}, {A+1, b} = {b1, b2}, A > 0."""
    for A, B in ((a1, a2), (a2, a1)):
        for bc, bo in ((b1, b2), (b2, b1)):
            if A > 0 and abs(bc - (A + 1.0)) <= 1e-12:
                return A, B, bo
    return None


def hyp_2f2(
    a1: float,
    a2: float,
    b1: float,
    b2: float,
    z: float,
    settings: SeriesSettings | None = None,
) -> SeriesResult:
    """Generalized hypergeometric function 2F2(a1, a2; b1, b2; z).

    Negative z with a contiguous upper/lower pair (b = a + 1) is rerouted
    through the stable incomplete-gamma form; everything else is the
    compensated power series.  A :class:`CancellationWarning` is emitted
    when the estimated error exceeds 1e-6 of the value.
    """
    s = settings or DEFAULT_SETTINGS
    for b in (b1, b2):
        if _nonpositive_integer(b):
            raise DomainError(f"hyp_2f2: lower parameter {b} is a non-positive integer")
    if abs(z) > s.max_abs_z:
        raise DomainError(f"hyp_2f2: |z|={abs(z)} exceeds {s.max_abs_z}")
    if z == 0.0:
        return SeriesResult(1.0, 0.0, 1)
    if _nonpositive_integer(a1) or _nonpositive_integer(a2):
        value, est, terms = _series_2f2(a1, a2, b1, b2, z, s)
        return SeriesResult(value, est, terms)
    if z < 0.0:
        arr = _contiguous_arrangement(a1, a2, b1, b2)
        if arr is not None:
            A, B, b = arr
            vals, ests, terms = _hyp2f2_contig_array(A, B, b, np.array([-z]), s)
            return SeriesResult(float(vals[0]), float(ests[0]), terms)
    value, est, terms = _series_2f2(a1, a2, b1, b2, z, s)
    result = SeriesResult(value, est, terms)
    if value != 0.0 and est / abs(value) > 1e-6:
        warnings.warn(
            f"hyp_2f2({a1},{a2};{b1},{b2};{z}): catastrophic cancellation, "
            f"relative error estimate {est / abs(value):.2e}",
            CancellationWarning,
            stacklevel=2,
        )
    return result
