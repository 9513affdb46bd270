"""Second-order SUSY transforms on the half-line.

Two constructions are provided:

* the non-confluent transform, driven by the Wronskian of two seed
  solutions at distinct real factorization energies, and
* the confluent transform, driven by a single seed u and the function
  w(r) = w0 - int_0^r u^2, which equals (up to a constant) the Wronskian
  of u with a rank-2 generalized eigenfunction v solving (H - eps) v = u.

``verify_wronskian_formula`` measures exactly that equivalence on the
grid.  The generalized eigenfunction is obtained by integrating the
inhomogeneous equation rather than from the quadrature formula
u * (k + int w/u^2), whose integrand blows up at every node of u; the
quadrature form is still available for cross-checks on node-free
subintervals.

Denominator samples smaller than 1e-12 of their global scale are flagged
singular (NaN) rather than raising; residual reports state the excluded
fraction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import (
    DomainError,
    NonNormalizableWarning,
    SingularTransformError,
    UnsupportedFeatureError,
)
from .numerics import (
    SampledFunction,
    _diff4,
    _diff4_second,
    cumulative_integral,
    solve_inhomogeneous,
)

_SINGULAR_REL = 1e-12

VANISHES_AT_ORIGIN = "vanishes_at_origin"
VANISHES_AT_INFINITY = "vanishes_at_infinity"
BOUND_STATE = "bound_state"
_TAGS = (VANISHES_AT_ORIGIN, VANISHES_AT_INFINITY, BOUND_STATE)


@dataclass(frozen=True)
class SeedSolution:
    """A solution u of -u'' + V u = eps u used to seed a transform.

    ``u`` must carry its derivative.  ``origin_power`` is the exponent of
    the leading power-law behaviour u ~ c r^p at the origin, used to close
    integrals over the off-grid segment (0, r_min); when None it is
    estimated from the first two samples.
    """

    eps: float
    u: SampledFunction
    boundary_tag: str
    origin_power: float | None = None

    def __post_init__(self):
        if isinstance(self.eps, complex):
            raise UnsupportedFeatureError(
                "complex factorization energies are not supported"
            )
        if self.boundary_tag not in _TAGS:
            raise DomainError(f"unknown boundary_tag {self.boundary_tag!r}")
        if self.u.deriv is None:
            raise DomainError("seed solution requires u with deriv populated")

    def origin_power_estimate(self) -> float:
        if self.origin_power is not None:
            return self.origin_power
        r = self.u.grid.r
        u0, u1 = abs(self.u.values[0]), abs(self.u.values[1])
        if u0 == 0.0 or u1 == 0.0:
            return 1.0
        return math.log(u1 / u0) / math.log(r[1] / r[0])


def zero_seed(grid, eps: float = -1.0) -> SeedSolution:
    """The trivial seed u = 0 (switches the transform off)."""
    z = np.zeros(grid.n)
    return SeedSolution(eps, SampledFunction(grid, z, deriv=z), VANISHES_AT_ORIGIN, 1.0)


def _singular_mask(den: np.ndarray) -> np.ndarray:
    """True where a denominator is large enough to divide by."""
    scale = float(np.max(np.abs(den), initial=0.0))
    if scale == 0.0:
        return np.zeros_like(den, dtype=bool)
    return np.abs(den) > _SINGULAR_REL * scale


def _flagged_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    ok = _singular_mask(den)
    out = np.full_like(num, np.nan)
    np.divide(num, den, out=out, where=ok)
    return out


def masked_max_abs(values: np.ndarray) -> tuple[float, float]:
    """(max |values| over finite samples, excluded fraction)."""
    finite = np.isfinite(values)
    excluded = 1.0 - finite.mean()
    if not finite.any():
        return math.inf, excluded
    return float(np.max(np.abs(values[finite]))), excluded


def schrodinger_residual(
    V: SampledFunction, f: SampledFunction, eps: float
) -> np.ndarray:
    """Samples of -f'' + (V - eps) f, with f'' by finite differences."""
    fpp = _diff4_second(f.values, f.grid.h)
    return -fpp + (V.values - eps) * f.values


def seed_residual(V: SampledFunction, seed: SeedSolution) -> float:
    """Relative sup-norm Schrodinger residual of the seed."""
    res = schrodinger_residual(V, seed.u, seed.eps)
    umax = float(np.max(np.abs(seed.u.values)))
    return float(np.max(np.abs(res))) / (umax if umax > 0 else 1.0)


def riccati_beta(seed: SeedSolution) -> SampledFunction:
    """Logarithmic derivative u'/u; samples at nodes of u come back NaN."""
    return SampledFunction(
        seed.u.grid, _flagged_divide(seed.u.deriv, seed.u.values)
    )


def confluent_w(seed: SeedSolution, w0: float) -> SampledFunction:
    """w(r) = w0 - int_0^r u^2, Simpson plus analytic closure over (0, r_min)."""
    u = seed.u
    p = 2.0 * seed.origin_power_estimate()
    r0 = u.grid.r_min
    c = u.values[0] ** 2 / r0**p if r0 > 0 else 0.0
    usq = SampledFunction(u.grid, u.values**2)
    integral = cumulative_integral(usq, closure=(p, c))
    return SampledFunction(u.grid, w0 - integral.values)


def _interior_nodes(f: SampledFunction) -> tuple[float, ...]:
    """Midpoints of resolvable interior sign changes, for the node guard.

    Samples below the singular-flag threshold (1e-12 of the global scale)
    are numerically indistinguishable from zero and are skipped, matching
    the convention used for flagged denominators: an exponentially small
    tail that dips into roundoff must not read as a node.
    """
    v = f.values
    r = f.grid.r
    idx = np.nonzero(_singular_mask(v))[0]
    vv, rr = v[idx], r[idx]
    flips = np.nonzero(np.sign(vv[:-1]) * np.sign(vv[1:]) < 0.0)[0]
    return tuple(0.5 * (rr[i] + rr[i + 1]) for i in flips)


@dataclass(frozen=True)
class ConfluentTransform:
    """Record of a confluent transform at factorization energy eps.

    Carries the source potential V, the seed, the key function w, the
    superpotential-like eta = u^2/w with its analytic derivative, and the
    partner potential V_new = V + 4 u u'/w + 2 u^4/w^2.
    """

    eps: float
    w0: float
    u: SeedSolution
    w: SampledFunction
    eta: SampledFunction
    V: SampledFunction
    V_new: SampledFunction
    eta_prime: SampledFunction

    @property
    def mean_energy(self) -> float:
        return self.eps

    def missing_state_raw(self) -> SampledFunction:
        """Unnormalized candidate eigenfunction u/w of the partner."""
        return SampledFunction(self.u.u.grid, _flagged_divide(self.u.u.values, self.w.values))

    def to_json_dict(self) -> dict:
        from .numerics import Spectrum  # noqa: F401  (kept local; no cycle)

        diag = transform_diagnostics(self)
        return {
            "eps": self.eps,
            "w0": self.w0,
            "grid": self.u.u.grid.to_json_dict(),
            "u": [float(x) for x in self.u.u.values],
            "w": [float(x) for x in self.w.values],
            "V_new": [float(x) for x in self.V_new.values],
            "diagnostics": diag,
        }


@dataclass(frozen=True)
class NonConfluentTransform:
    """Record of a real non-confluent transform at energies eps1 != eps2."""

    eps1: float
    eps2: float
    u1: SeedSolution
    u2: SeedSolution
    wronskian: SampledFunction
    eta: SampledFunction
    V: SampledFunction
    V_new: SampledFunction
    eta_prime: SampledFunction

    @property
    def mean_energy(self) -> float:
        return 0.5 * (self.eps1 + self.eps2)

    @property
    def psi_eps1(self) -> SampledFunction:
        """Partner eigenfunction candidate at eps1 (proportional to u2/W)."""
        return SampledFunction(
            self.wronskian.grid,
            _flagged_divide(self.u2.u.values, self.wronskian.values),
        )

    @property
    def psi_eps2(self) -> SampledFunction:
        """Partner eigenfunction candidate at eps2 (proportional to u1/W)."""
        return SampledFunction(
            self.wronskian.grid,
            _flagged_divide(self.u1.u.values, self.wronskian.values),
        )


def confluent_partner(
    V: SampledFunction,
    seed: SeedSolution,
    w0: float,
    w: SampledFunction | None = None,
) -> ConfluentTransform:
    """Build the confluent transform; fails if w has interior nodes.

    ``w`` may be supplied by a caller holding a closed form; by default it
    is accumulated from the seed by quadrature.
    """
    if w is None:
        w = confluent_w(seed, w0)
    nodes = _interior_nodes(w)
    if nodes:
        raise SingularTransformError(
            f"w has {len(nodes)} interior node(s) near r = "
            + ", ".join(f"{x:.6g}" for x in nodes),
            nodes=nodes,
        )
    u = seed.u.values
    up = seed.u.deriv
    usq = u * u
    # The node guard certifies w does not change sign, so plain division
    # is safe here; anything non-finite (an exact zero in a roundoff
    # floor) is flagged NaN rather than propagated as inf.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        eta = usq / w.values
        eta_prime = (2.0 * u * up * w.values + usq * usq) / w.values**2
        # Expanded partner form: avoids numerically differentiating eta.
        correction = 4.0 * u * up / w.values + 2.0 * (usq / w.values) ** 2
    eta = np.where(np.isfinite(eta), eta, np.nan)
    eta_prime = np.where(np.isfinite(eta_prime), eta_prime, np.nan)
    correction = np.where(np.isfinite(correction), correction, np.nan)
    grid = V.grid
    return ConfluentTransform(
        eps=seed.eps,
        w0=w0,
        u=seed,
        w=w,
        eta=SampledFunction(grid, eta),
        V=V,
        V_new=SampledFunction(grid, V.values + correction),
        eta_prime=SampledFunction(grid, eta_prime),
    )


def nonconfluent_partner(
    V: SampledFunction, seed1: SeedSolution, seed2: SeedSolution
) -> NonConfluentTransform:
    """Build the real non-confluent transform from two seeds.

    The Wronskian derivative identity W' = (eps1 - eps2) u1 u2 makes every
    ingredient analytic in the samples; no finite differencing enters the
    partner potential.
    """
    if isinstance(seed1.eps, complex) or isinstance(seed2.eps, complex):
        raise UnsupportedFeatureError("complex-energy transforms are not supported")
    if seed1.eps == seed2.eps:
        raise DomainError("non-confluent transform requires eps1 != eps2")
    if seed1.u.grid is not seed2.u.grid and seed1.u.grid != seed2.u.grid:
        raise DomainError("seeds must share a grid")
    W = wronskian_of(seed1.u, seed2.u)
    nodes = _interior_nodes(W)
    if nodes:
        raise SingularTransformError(
            f"W(u1, u2) has {len(nodes)} interior node(s) near r = "
            + ", ".join(f"{x:.6g}" for x in nodes),
            nodes=nodes,
        )
    de = seed1.eps - seed2.eps
    u1, u1p = seed1.u.values, seed1.u.deriv
    u2, u2p = seed2.u.values, seed2.u.deriv
    Wp = de * u1 * u2
    Wpp = de * (u1p * u2 + u1 * u2p)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        eta = -Wp / W.values
        # (ln W)'' = (W'' W - W'^2) / W^2; V_new = V - 2 (ln W)''.
        lnWpp = (Wpp * W.values - Wp * Wp) / W.values**2
        eta_prime = eta * eta - Wpp / W.values
    eta = np.where(np.isfinite(eta), eta, np.nan)
    lnWpp = np.where(np.isfinite(lnWpp), lnWpp, np.nan)
    eta_prime = np.where(np.isfinite(eta_prime), eta_prime, np.nan)
    grid = V.grid
    return NonConfluentTransform(
        eps1=seed1.eps,
        eps2=seed2.eps,
        u1=seed1,
        u2=seed2,
        wronskian=W,
        eta=SampledFunction(grid, eta),
        V=V,
        V_new=SampledFunction(grid, V.values - 2.0 * lnWpp),
        eta_prime=SampledFunction(grid, eta_prime),
    )


def generalized_eigenfunction(
    V: SampledFunction,
    seed: SeedSolution,
    w: SampledFunction | None = None,
    k: float = 0.0,
    route: str = "ode",
    boundary: tuple[float, float] | None = None,
) -> SampledFunction:
    """Rank-2 generalized eigenfunction v with (H - eps) v = u.

    The default route integrates the inhomogeneous equation outward with
    v(r_min) = k u(r_min), v'(r_min) = k u'(r_min): k only admixes a
    multiple of u, which drops out of every Wronskian built with u.

    ``route="quadrature"`` instead evaluates u * (k + int_{r_min} w/u^2),
    which requires ``w`` and is singular at nodes of u (NaN there); it is
    kept for cross-validation on node-free subintervals.
    """
    u = seed.u
    if route == "ode":
        if boundary is None:
            boundary = (k * u.values[0], k * u.deriv[0])
        return solve_inhomogeneous(V, seed.eps, u, boundary=boundary)
    if route == "quadrature":
        if w is None:
            raise DomainError("quadrature route requires w")
        integrand = _flagged_divide(w.values, u.values**2)
        if not np.all(np.isfinite(integrand)):
            raise DomainError(
                "quadrature route is singular at nodes of u on this grid"
            )
        inner = cumulative_simpson(integrand, dx=u.grid.h, initial=0.0)
        return SampledFunction(u.grid, u.values * (k + inner))
    raise DomainError(f"unknown route {route!r}")


def wronskian_of(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """Pointwise Wronskian f g' - g f' (both inputs need derivatives)."""
    if f.deriv is None or g.deriv is None:
        raise DomainError("wronskian_of requires deriv on both functions")
    return SampledFunction(f.grid, f.values * g.deriv - g.values * f.deriv)


@dataclass(frozen=True)
class WronskianReport:
    """Outcome of the Wronskian/key-function equivalence check.

    ``const_offset`` is the fitted additive constant between W(u, v) and
    w; ``max_residual`` the sup-norm mismatch after removing it;
    ``diff_max_residual`` the sup norm of d/dr W(u, v) + u^2, which is
    constant-free.
    """

    const_offset: float
    max_residual: float
    diff_max_residual: float
    excluded_fraction: float


def verify_wronskian_formula(
    seed: SeedSolution, v: SampledFunction, w: SampledFunction
) -> WronskianReport:
    """Compare W(u, v) against w up to a constant, plus the differential form."""
    v = v.with_deriv()
    W = wronskian_of(seed.u, v)
    D = W.values - w.values
    finite = np.isfinite(D)
    excluded = 1.0 - finite.mean()
    offset = float(np.median(D[finite]))
    max_residual = float(np.max(np.abs(D[finite] - offset)))
    dW = _diff4(W.values, W.grid.h)
    diff_res = dW + seed.u.values**2
    diff_max = float(np.max(np.abs(diff_res[np.isfinite(diff_res)])))
    return WronskianReport(offset, max_residual, diff_max, excluded)


def missing_state(
    t: ConfluentTransform, tail_fraction_limit: float = 0.01
) -> SampledFunction:
    """Eigenfunction candidate u/w of the partner at the factorization energy.

    Returned with unit discrete L2 norm when the norm integral has settled
    on the grid (the last tenth of the grid contributes less than
    ``tail_fraction_limit`` of the total); otherwise a
    :class:`NonNormalizableWarning` is emitted and the raw samples are
    returned.
    """
    psi = t.missing_state_raw()
    vals = np.where(np.isfinite(psi.values), psi.values, 0.0)
    if not np.any(vals):
        return SampledFunction(psi.grid, vals)
    density = vals**2
    mass = cumulative_simpson(density, dx=psi.grid.h, initial=0.0)
    total = float(mass[-1])
    tail_start = int(0.9 * psi.grid.n)
    tail_fraction = (total - float(mass[tail_start])) / total if total > 0 else 1.0
    if tail_fraction > tail_fraction_limit:
        warnings.warn(
            f"u/w norm has not stabilized (tail fraction {tail_fraction:.3g}); "
            "the factorization energy does not join the partner spectrum",
            NonNormalizableWarning,
            stacklevel=2,
        )
        return SampledFunction(psi.grid, vals)
    return SampledFunction(psi.grid, vals / math.sqrt(total))


def apply_intertwiner(
    f: SampledFunction,
    t: ConfluentTransform | NonConfluentTransform,
    d: float | None = None,
) -> SampledFunction:
    """Apply A = d^2/dr^2 + eta d/dr + gamma to sampled f.

    gamma = d - V + eta^2/2 - eta'/2 with d the mean factorization energy
    of the transform (overridable).  f'' comes from direct 4th-order
    stencils; samples where eta is flagged singular stay NaN.
    """
    if d is None:
        d = t.mean_energy
    fp = f.deriv if f.deriv is not None else _diff4(f.values, f.grid.h)
    fpp = _diff4_second(f.values, f.grid.h)
    eta = t.eta.values
    gamma = d - t.V.values + 0.5 * eta * eta - 0.5 * t.eta_prime.values
    return SampledFunction(f.grid, fpp + eta * fp + gamma * f.values)


def bernoulli_residual(t: ConfluentTransform) -> tuple[float, float]:
    """Sup-norm of eta' - eta^2 - 2 beta eta over non-singular samples.

    Returns (max_residual, excluded_fraction).  Checks the first-order
    equation the confluent superpotential must satisfy, using the analytic
    eta' carried by the transform.
    """
    beta = riccati_beta(t.u).values
    res = t.eta_prime.values - t.eta.values**2 - 2.0 * beta * t.eta.values
    return masked_max_abs(res)


def ansatz_residual(t: NonConfluentTransform) -> tuple[float, float]:
    """Sup-norm of eta' - eta^2 - 2 beta1 eta + (eps1 - eps2), masked."""
    beta1 = riccati_beta(t.u1).values
    res = (
        t.eta_prime.values
        - t.eta.values**2
        - 2.0 * beta1 * t.eta.values
        + (t.eps1 - t.eps2)
    )
    return masked_max_abs(res)


def riccati_residual(
    V: SampledFunction, seed: SeedSolution, r_min_eval: float = 0.5
) -> tuple[float, float]:
    """Sup-norm of beta' + beta^2 - (V - eps) with beta = u'/u.

    beta' is taken by finite differences, which near the centrifugal edge
    amplifies the 1/r steepness of beta; the residual is therefore
    evaluated for r >= ``r_min_eval`` and NaN-adjacent samples are masked
    (stencil width 2).  Returns (max_residual, excluded_fraction) over the
    evaluated window.
    """
    beta = riccati_beta(seed).values
    bad = ~np.isfinite(beta)
    for shift in (-2, -1, 1, 2):
        bad |= np.roll(~np.isfinite(beta), shift)
    bp = _diff4(np.where(np.isfinite(beta), beta, 0.0), seed.u.grid.h)
    res = bp + beta**2 - (V.values - seed.eps)
    res = np.where(bad, np.nan, res)
    window = seed.u.grid.r >= r_min_eval
    return masked_max_abs(res[window])


def expanded_route_residual(t: ConfluentTransform, r_min_eval: float = 0.05) -> float:
    """Max |V_new - (V + 2 eta'_fd)| for r >= r_min_eval.

    Cross-checks the expanded partner formula against the derivative
    route with eta' taken numerically; differentiation noise dominates
    below ~0.05 so that edge region is skipped.
    """
    eta = t.eta.values
    ok = np.isfinite(eta)
    etap = _diff4(np.where(ok, eta, 0.0), t.eta.grid.h)
    alt = t.V.values + 2.0 * etap
    res = np.abs(t.V_new.values - alt)
    bad = ~ok
    for shift in (-2, -1, 1, 2):
        bad |= np.roll(~ok, shift)
    res = np.where(bad, np.nan, res)
    window = t.eta.grid.r >= r_min_eval
    mx, _ = masked_max_abs(res[window])
    return mx


def transform_diagnostics(t: ConfluentTransform) -> dict:
    """Headline residuals for serialization next to a transform table."""
    bern, bern_excl = bernoulli_residual(t)
    v = generalized_eigenfunction(t.V, t.u)
    report = verify_wronskian_formula(t.u, v, t.w)
    # w' + u^2 on interior samples: the one-sided edge stencils amplify
    # the startup wiggle of the cumulative quadrature by 1/h.
    wp = _diff4(t.w.values, t.w.grid.h)
    usq = t.u.u.values ** 2
    wprime_res = float(np.max(np.abs((wp + usq)[2:-2]))) / max(
        float(np.max(usq)), 1e-300
    )
    return {
        "bernoulli_residual": bern,
        "bernoulli_excluded_fraction": bern_excl,
        "wronskian_residual": report.max_residual,
        "wronskian_diff_residual": report.diff_max_residual,
        "w_prime_relative_residual": wprime_res,
        "nodes": len(_interior_nodes(t.w)),
    }
