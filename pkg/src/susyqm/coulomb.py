"""Closed-form ingredients for the radial Coulomb problem.

Units are hbar = e = m = 1, effective potential
V(r) = -2/r + l(l+1)/r^2, bound spectrum E_n = -1/n^2 for n >= l+1.

The seed solution regular at the origin is

    u(r) = N (2 kappa r)^{l+1} exp(-kappa r) 1F1(l+1 - 1/kappa, 2l+2; 2 kappa r)

with kappa = sqrt(-eps).  For eps = E_n the normalization N makes u the
unit-norm radial eigenfunction; for generic eps the radicand of N can go
negative and its absolute value is taken, so the overall constant is a
convention (it only rescales w0).

The key function w(r) = w0 - int_0^r u^2 is also available in series
form: an infinite sum of Beta-weighted 2F2 terms for generic eps, which
truncates to n - l terms when eps = E_n.  Both go through the stable
incomplete-gamma route in :mod:`susyqm.specfun`, so they hold full double
precision on the whole grid; the quadrature of u^2 stays available as an
independent cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CancellationWarning, ConvergenceError, DomainError, InadmissibleW0Error, PoleError
from .numerics import Grid, SampledFunction, Spectrum
from .specfun import (
    DEFAULT_SETTINGS,
    SeriesSettings,
    _igamma_series,
    _kummer_1f1_array,
    _nonpositive_integer,
    _signed_loggamma,
)
from .susy import (
    BOUND_STATE,
    VANISHES_AT_ORIGIN,
    ConfluentTransform,
    SeedSolution,
    confluent_partner,
    confluent_w,
)

_W0_SERIES_SETTINGS = SeriesSettings(max_terms=5_000)


@dataclass(frozen=True)
class CoulombParams:
    """Quantum numbers and transform constant for one configuration.

    ``n`` is set exactly when eps sits on a bound level -1/n^2 with
    n >= l+1; it is auto-detected when omitted.
    """

    l: int
    eps: float
    w0: float
    n: int | None = None

    def __post_init__(self):
        if self.l < 0:
            raise DomainError(f"l must be >= 0, got {self.l}")
        if not self.eps < 0.0:
            raise DomainError(f"factorization energy must be negative, got {self.eps}")
        if self.n is None:
            cand = round(1.0 / math.sqrt(-self.eps))
            if cand >= self.l + 1 and abs(self.eps + 1.0 / cand**2) < 1e-12:
                object.__setattr__(self, "n", cand)
        else:
            if self.n < self.l + 1:
                raise DomainError(f"n={self.n} must be >= l+1 = {self.l + 1}")
            if abs(self.eps + 1.0 / self.n**2) >= 1e-12:
                raise DomainError(
                    f"n={self.n} set but eps={self.eps} != -1/n^2 = {-1.0 / self.n**2}"
                )

    @classmethod
    def bound(cls, l: int, n: int, w0: float) -> "CoulombParams":
        return cls(l=l, eps=-1.0 / n**2, w0=w0, n=n)

    @property
    def kappa(self) -> float:
        return math.sqrt(-self.eps)


def coulomb_potential(p: CoulombParams, grid: Grid) -> SampledFunction:
    """Effective radial potential -2/r + l(l+1)/r^2, with analytic derivative."""
    r = grid.r
    ll = p.l * (p.l + 1)
    return SampledFunction(grid, -2.0 / r + ll / r**2, deriv=2.0 / r**2 - 2.0 * ll / r**3)


def coulomb_spectrum(l: int, n_max: int) -> Spectrum:
    """Exact bound levels -1/n^2 for n = l+1 .. n_max, node counts n-l-1."""
    if n_max < l + 1:
        raise DomainError(f"n_max={n_max} below the lowest level n={l + 1}")
    return Spectrum(tuple((-1.0 / n**2, n - l - 1) for n in range(l + 1, n_max + 1)))


def _seed_norm(p: CoulombParams) -> float:
    """|N| with N^2 = (-eps) G(l+1+1/k) / (G(1/k-l) G(2l+2)^2), k = kappa.

    The radicand sign is dropped for generic eps (the constant is a
    convention there); the gamma poles at 1/kappa - l in {0, -1, ...}
    surface as PoleError.
    """
    ik = 1.0 / p.kappa
    if _nonpositive_integer(ik - p.l):
        raise PoleError(
            f"seed normalization pole: Gamma({ik - p.l:.6g}) with eps={p.eps}"
        )
    la, _ = _signed_loggamma(p.l + 1.0 + ik)
    lb, _ = _signed_loggamma(ik - p.l)
    lg = math.lgamma(2.0 * p.l + 2.0)
    return math.exp(0.5 * (math.log(-p.eps) + la - lb - 2.0 * lg))


def coulomb_seed(p: CoulombParams, grid: Grid) -> SeedSolution:
    """Closed-form seed solution vanishing at the origin, with derivative.

    For eps = -1/n^2 the hypergeometric factor is the usual polynomial and
    u is the normalized bound state; the derivative is assembled from the
    contiguous 1F1 via the product rule (no finite differences).
    """
    kap = p.kappa
    ik = 1.0 / kap
    a = p.l + 1.0 - ik
    b = 2.0 * p.l + 2.0
    z = 2.0 * kap * grid.r
    F, _, _ = _kummer_1f1_array(a, b, z)
    Fp_inner, _, _ = _kummer_1f1_array(a + 1.0, b + 1.0, z)
    Fp = (a / b) * Fp_inner
    N = _seed_norm(p)
    zl = z ** (p.l + 1)
    decay = np.exp(-0.5 * z)
    u = N * zl * decay * F
    du = (
        2.0
        * kap
        * N
        * decay
        * ((p.l + 1.0) * z**p.l * F - 0.5 * zl * F + zl * Fp)
    )
    tag = BOUND_STATE if p.n is not None else VANISHES_AT_ORIGIN
    return SeedSolution(
        eps=p.eps,
        u=SampledFunction(grid, u, deriv=du),
        boundary_tag=tag,
        origin_power=p.l + 1.0,
    )


def _w_series_bound(p: CoulombParams, grid: Grid) -> SampledFunction:
    """Finite w-series for eps = -1/n^2: n - l terms of igamma sums.

    Evaluated in complementary form, w = (w0 - S) + T(r) with S the full
    gamma sums (analytically the norm of u, i.e. 1) and T(r) the upper
    incomplete tail sums.  The naive ``w0 - lower-sum`` form cannot
    resolve the exponentially small tail of w when w0 = 1: the partner at
    that endpoint needs the tail to full relative precision.
    """
    n, l = p.n, p.l
    s = 2.0 * grid.r / n
    tail = np.zeros(grid.n)
    full = 0.0
    est = np.zeros(grid.n)
    lg2l1 = math.lgamma(2 * l + 2)  # (2l+1)!
    for m in range(0, n - l):
        A = 2 * l + m + 3
        # The outer power s^A cancels the s^-A inside the 2F2, leaving the
        # bare incomplete-gamma sum times this coefficient (sign (-1)^m).
        lbeta = (
            math.lgamma(n - l - m) + math.lgamma(2 * l + m + 1) - math.lgamma(n + l + 1)
        )
        logc = (
            math.log(A)
            - math.log(2 * l + m + 3)
            - math.log(2 * l + m + 1)
            - math.log(2 * n)
            - lg2l1
            - math.lgamma(m + 1)
            - lbeta
        )
        sign = -1.0 if m % 2 else 1.0
        up, err_up, _ = _igamma_series(
            A, n + l + 1, 2 * l + 2, s, _W0_SERIES_SETTINGS, log_amplitude=logc,
            kind="upper",
        )
        fl, err_fl, _ = _igamma_series(
            A, n + l + 1, 2 * l + 2, s[:1], _W0_SERIES_SETTINGS, log_amplitude=logc,
            kind="full",
        )
        tail += sign * up
        full += sign * float(fl[0])
        est += err_up + float(err_fl[0])
    # The full-gamma sums add up to the squared norm of the seed, which is
    # exactly 1 on a bound level; use the exact constant (the float sum
    # would pollute the exponentially small tail) but verify it.
    if abs(full - 1.0) > 1e-12:
        raise ConvergenceError(
            f"w-series normalization identity violated: sum={full!r}"
        )
    _warn_if_cancelled(est, tail, p)
    return SampledFunction(grid, (p.w0 - 1.0) + tail)


def _w_series_generic(p: CoulombParams, grid: Grid) -> SampledFunction:
    """Infinite w-series for generic eps, truncated by term size."""
    kap = p.kappa
    ik = 1.0 / kap
    l = p.l
    s = 2.0 * kap * grid.r
    lg2l1 = math.lgamma(2 * l + 2)
    lden, sden = _signed_loggamma(ik - l)
    lden2, sden2 = _signed_loggamma(l + 1.0 - ik)
    # log of 1 / B(1/kappa - l, l + 1 - 1/kappa); the pair sums to Gamma(1).
    log_invB = -(lden + lden2)
    sign_invB = sden * sden2
    lnum_a, snum_a = _signed_loggamma(l + 1.0 + ik)
    total = np.zeros(grid.n)
    est = np.zeros(grid.n)
    settings = _W0_SERIES_SETTINGS
    small = 0
    for m in range(settings.max_terms):
        A = 2 * l + m + 3
        y = l + 1.0 + m - ik
        if _nonpositive_integer(y):
            raise PoleError(
                f"w-series beta pole at m={m} for eps={p.eps}; "
                "energy is too close to a bound level for the generic series"
            )
        ly, sy = _signed_loggamma(y)
        # B(l+1+1/k, l+1+m-1/k) = G(l+1+1/k) G(y) / G(2l+m+2); the outer
        # power s^A cancels against the s^-A inside the 2F2.
        lbeta_num = lnum_a + ly - math.lgamma(2 * l + m + 2.0)
        sbeta_num = snum_a * sy
        logc = (
            math.log(kap)
            + lbeta_num
            + log_invB
            + math.log(A)
            - math.log(2.0)
            - math.log(2 * l + m + 3.0)
            - lg2l1
            - math.lgamma(m + 1.0)
        )
        vals, errs, _ = _igamma_series(
            A, l + 1.0 + ik, 2 * l + 2.0, s, settings, log_amplitude=logc
        )
        term = sbeta_num * sign_invB * vals
        total += term
        est += errs
        rel = float(np.max(np.abs(term) / (np.abs(total) + np.abs(p.w0) + 1e-300)))
        if rel <= settings.rel_tol:
            small += 1
            if small >= settings.consecutive:
                break
        else:
            small = 0
    else:
        raise ConvergenceError("generic w-series hit the outer term cap")
    _warn_if_cancelled(est, total, p)
    return SampledFunction(grid, p.w0 - total)


def _warn_if_cancelled(est: np.ndarray, total: np.ndarray, p: CoulombParams) -> None:
    scale = max(float(np.max(np.abs(total))), abs(p.w0), 1e-300)
    worst = float(np.max(est)) / scale
    if worst > 1e-6:
        warnings.warn(
            f"w-series relative error estimate {worst:.2e} for eps={p.eps}; "
            "fall back to the quadrature route",
            CancellationWarning,
            stacklevel=3,
        )


def coulomb_w_series(p: CoulombParams, grid: Grid) -> SampledFunction:
    """Series form of w(r) = w0 - int_0^r u^2 on the grid.

    Dispatches on whether eps sits on a bound level (finite sum) or not
    (infinite sum, truncated by the configured term policy).  A
    :class:`CancellationWarning` asks the caller to fall back to
    quadrature; with the incomplete-gamma evaluation this does not fire
    for the supported argument range.
    """
    if p.n is not None:
        return _w_series_bound(p, grid)
    return _w_series_generic(p, grid)


@dataclass(frozen=True)
class AdmissibleW0:
    """Closed union of intervals where w stays nodeless, plus the endpoint
    values whose partner deletes/relocates the level at eps."""

    intervals: tuple[tuple[float, float], ...]
    endpoint_cases: tuple[float, ...]

    def contains(self, w0: float) -> bool:
        return any(lo <= w0 <= hi for lo, hi in self.intervals)

    def is_endpoint(self, w0: float) -> bool:
        return any(w0 == e for e in self.endpoint_cases)

    def describe(self) -> str:
        parts = []
        for lo, hi in self.intervals:
            left = "(-inf" if lo == -math.inf else f"[{lo:g}"
            right = "inf)" if hi == math.inf else f"{hi:g}]"
            parts.append(f"{left}, {right}")
        return " U ".join(parts)


def w0_admissible(p: CoulombParams) -> AdmissibleW0:
    """Nodeless domain of w0: (-inf, 0] always, plus [1, inf) on a bound level."""
    if p.n is not None:
        return AdmissibleW0(
            intervals=((-math.inf, 0.0), (1.0, math.inf)),
            endpoint_cases=(0.0, 1.0),
        )
    return AdmissibleW0(intervals=((-math.inf, 0.0),), endpoint_cases=(0.0,))


def coulomb_partner(p: CoulombParams, grid: Grid) -> ConfluentTransform:
    """Full confluent transform of the Coulomb potential for params p.

    w comes from the truncating series on bound levels and from quadrature
    of u^2 otherwise (the generic series is kept for cross-checks; its
    cost grows with the grid).  Inadmissible w0 raises before any
    numerics run.
    """
    adm = w0_admissible(p)
    if not adm.contains(p.w0):
        raise InadmissibleW0Error(
            f"w0={p.w0} outside the nodeless domain {adm.describe()}",
            allowed=adm.describe(),
        )
    seed = coulomb_seed(p, grid)
    V = coulomb_potential(p, grid)
    w = _w_series_bound(p, grid) if p.n is not None else confluent_w(seed, p.w0)
    return confluent_partner(V, seed, p.w0, w=w)


def partner_closed_l0n1(w0: float, grid: Grid) -> SampledFunction:
    """Explicit partner family for l=0, eps=-1 (ground-level seed).

    The textbook form carries exp(+2r) in numerator and denominator;
    both are rescaled by exp(-2r) before dividing so the evaluation
    stays finite at large r.
    """
    r = grid.r
    decay = np.exp(-2.0 * r)
    den = (1.0 + 2.0 * r + 2.0 * r**2) * decay + (w0 - 1.0)
    _guard_bracket(den, w0)
    num = -(1.0 + r) * decay + (w0 - 1.0) * (r - 1.0)
    return SampledFunction(grid, -2.0 / r - 16.0 * r * num * decay / den**2)


def partner_closed_l0n2(w0: float, grid: Grid) -> SampledFunction:
    """Explicit partner family for l=0, eps=-1/4 (first excited seed)."""
    r = grid.r
    decay = np.exp(-r)
    den = (8.0 + 8.0 * r + 4.0 * r**2 + r**4) * decay + 8.0 * (w0 - 1.0)
    _guard_bracket(den, w0)
    num = (-8.0 + 4.0 * r + 6.0 * r**2 + 2.0 * r**3 + r**4) * decay - 2.0 * (
        w0 - 1.0
    ) * (4.0 - 6.0 * r + r**2)
    return SampledFunction(grid, -2.0 / r + 8.0 * r * (r - 2.0) * num * decay / den**2)


def _guard_bracket(den: np.ndarray, w0: float) -> None:
    scale = float(np.max(np.abs(den)))
    if scale == 0.0 or float(np.min(np.abs(den))) < 1e-12 * scale:
        raise InadmissibleW0Error(
            f"partner denominator vanishes on the grid for w0={w0}; "
            "w0 lies outside the nodeless domain",
            allowed="(-inf, 0] U [1, inf)",
        )
