"""Radial grids, quadrature, differentiation, and Numerov-based solvers.

Everything lives on a uniform grid over (0, r_max].  The left endpoint is
strictly positive because the potentials of interest are singular at the
origin; the segment (0, r_min) is handled analytically where an integral
needs it (see :func:`cumulative_integral`).

The Numerov recurrence is solved as a lower-banded triangular linear
system (LAPACK via ``scipy.linalg.solve_banded``), which is numerically
identical to explicit marching but runs at C speed.  Marching proceeds in
chunks so the running solution can be rescaled when it threatens to
overflow; the accumulated log of the rescale factors is reported on the
returned function.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.linalg import solve_banded

from .errors import ConvergenceError, DomainError

_RESCALE_LIMIT = 1e150
_CHUNK = 8192


@dataclass(frozen=True)
class Grid:
    """Uniform radial mesh r_i = r_min + i*h on (0, r_max]."""

    r_min: float
    r_max: float
    n: int

    def __post_init__(self):
        if not (0.0 < self.r_min < self.r_max):
            raise DomainError(f"require 0 < r_min < r_max, got ({self.r_min}, {self.r_max})")
        if self.n < 16:
            raise DomainError(f"require n >= 16 grid points, got {self.n}")

    @property
    def h(self) -> float:
        return (self.r_max - self.r_min) / (self.n - 1)

    @cached_property
    def r(self) -> np.ndarray:
        r = np.linspace(self.r_min, self.r_max, self.n)
        r.setflags(write=False)
        return r

    def to_json_dict(self) -> dict:
        return {"r_min": self.r_min, "r_max": self.r_max, "n": self.n}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Grid":
        return cls(float(d["r_min"]), float(d["r_max"]), int(d["n"]))


def make_grid(r_min: float, r_max: float, n: int) -> Grid:
    """Uniform grid constructor; validates 0 < r_min < r_max and n >= 16."""
    return Grid(float(r_min), float(r_max), int(n))


@dataclass(frozen=True)
class SampledFunction:
    """Real function sampled on a :class:`Grid`, optionally with derivative.

    ``values`` may contain NaN at samples flagged singular (for example a
    log-derivative at a node); norms and residuals are expected to mask
    those out.  ``log_scale`` is nonzero only for solver output that had to
    be rescaled mid-integration: the represented function is
    ``values * exp(log_scale)``.
    """

    grid: Grid
    values: np.ndarray
    deriv: np.ndarray | None = None
    log_scale: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise DomainError(
                f"values shape {vals.shape} does not match grid size {self.grid.n}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.deriv is not None:
            der = np.asarray(self.deriv, dtype=float)
            if der.shape != (self.grid.n,):
                raise DomainError("deriv length does not match grid size")
            der = der.copy()
            der.setflags(write=False)
            object.__setattr__(self, "deriv", der)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def with_deriv(self) -> "SampledFunction":
        """Return self if a derivative is attached, else attach one by
        4th-order finite differences."""
        if self.deriv is not None:
            return self
        return replace(self, deriv=_diff4(self.values, self.grid.h))

    def to_csv(self) -> str:
        """Two-column CSV (r, value) with 17 significant digits."""
        buf = io.StringIO()
        buf.write("r,value\n")
        for ri, vi in zip(self.grid.r, self.values):
            buf.write(f"{ri:.17g},{vi:.17g}\n")
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {"grid": self.grid.to_json_dict(), "values": [float(v) for v in self.values]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SampledFunction":
        return cls(Grid.from_json_dict(d["grid"]), np.asarray(d["values"], dtype=float))

    @classmethod
    def from_csv(cls, text: str) -> "SampledFunction":
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        r = np.array([float(a) for a, _ in rows])
        v = np.array([float(b) for _, b in rows])
        grid = make_grid(r[0], r[-1], r.size)
        return cls(grid, v)


@dataclass(frozen=True)
class Spectrum:
    """Ordered bound-state energies with interior node counts."""

    levels: tuple[tuple[float, int], ...]

    def __post_init__(self):
        energies = [e for e, _ in self.levels]
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise DomainError("spectrum energies must be strictly increasing")

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for e, _ in self.levels])

    @property
    def node_counts(self) -> tuple[int, ...]:
        return tuple(k for _, k in self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    def to_json_dict(self) -> dict:
        return {
            "levels": [
                {"energy": float(e), "node_count": int(k)} for e, k in self.levels
            ]
        }


def cumulative_integral(
    f: SampledFunction, closure: tuple[float, float] | None = None
) -> SampledFunction:
    """Cumulative integral F(r_i) of f from 0, composite Simpson on the grid.

    The grid starts at r_min > 0; the missing piece over (0, r_min) is
    closed analytically from a caller-supplied power law f ~ c * r**p,
    contributing c * r_min**(p+1) / (p+1).  ``closure=None`` treats the
    segment as zero (appropriate when f vanishes fast at the origin).
    """
    if closure is not None:
        p, c = closure
        if p <= -1.0:
            raise DomainError(f"closure exponent p={p} <= -1: integral diverges at 0")
        head = c * f.grid.r_min ** (p + 1.0) / (p + 1.0)
    else:
        head = 0.0
    body = cumulative_simpson(f.values, dx=f.grid.h, initial=0.0)
    return SampledFunction(f.grid, body + head)


# One-sided and centered 4th-order first-derivative stencils.
_D1_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
# 4th-order second-derivative stencils (centered; one-sided, 6 points).
_D2_EDGE0 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_D2_EDGE1 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


def _diff4(v: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    out[0] = _D1_EDGE0 @ v[:5] / h
    out[1] = _D1_EDGE1 @ v[:5] / h
    out[-1] = -(_D1_EDGE0 @ v[-1:-6:-1]) / h
    out[-2] = -(_D1_EDGE1 @ v[-1:-6:-1]) / h
    return out


def _diff4_second(v: np.ndarray, h: float) -> np.ndarray:
    h2 = h * h
    out = np.empty_like(v)
    out[2:-2] = (-v[:-4] + 16.0 * v[1:-3] - 30.0 * v[2:-2] + 16.0 * v[3:-1] - v[4:]) / (
        12.0 * h2
    )
    out[0] = _D2_EDGE0 @ v[:6] / h2
    out[1] = _D2_EDGE1 @ v[:6] / h2
    out[-1] = _D2_EDGE0 @ v[-1:-7:-1] / h2
    out[-2] = _D2_EDGE1 @ v[-1:-7:-1] / h2
    return out


def differentiate(f: SampledFunction) -> SampledFunction:
    """First derivative by 4th-order differences (one-sided at the edges)."""
    return SampledFunction(f.grid, _diff4(f.values, f.grid.h))


def second_derivative(f: SampledFunction) -> SampledFunction:
    """Second derivative by direct 4th-order stencils (not chained)."""
    return SampledFunction(f.grid, _diff4_second(f.values, f.grid.h))


def _require_finite(V: SampledFunction) -> None:
    if not np.all(np.isfinite(V.values)):
        bad = int(np.sum(~np.isfinite(V.values)))
        raise DomainError(
            f"potential has {bad} non-finite sample(s); "
            "integration needs finite values everywhere"
        )


def _march_numerov(Q, h, u0, u1, source=None):
    """Solve u'' = Q u + g given the first two samples, u[0]=u0, u[1]=u1.

    Returns (u, log_scale).  The three-term Numerov recurrence is cast as
    a lower-triangular banded system and solved chunk by chunk; whenever
    the running amplitude exceeds 1e150 everything accumulated (and the
    remaining source) is divided down and the log of the factor recorded.
    """
    n = Q.size
    u = np.empty(n)
    u[0], u[1] = u0, u1
    log_scale = 0.0
    if n <= 2:
        return u, log_scale
    alpha = 1.0 - (h * h / 12.0) * Q
    beta = 2.0 + (10.0 * h * h / 12.0) * Q
    if source is not None:
        src_row = np.zeros(n)
        src_row[2:] = (h * h / 12.0) * (source[2:] + 10.0 * source[1:-1] + source[:-2])
    src_scale = 1.0
    start = 2
    while start < n:
        stop = min(start + _CHUNK, n)
        m = stop - start
        ab = np.zeros((3, m))
        rhs = np.zeros(m)
        ab[0, :] = alpha[start:stop]
        if m > 1:
            ab[1, : m - 1] = -beta[start : stop - 1]
        if m > 2:
            ab[2, : m - 2] = alpha[start : stop - 2]
        rhs[0] = beta[start - 1] * u[start - 1] - alpha[start - 2] * u[start - 2]
        if m > 1:
            rhs[1] = -alpha[start - 1] * u[start - 1]
        if source is not None:
            rhs += src_row[start:stop] * src_scale
        u[start:stop] = solve_banded((2, 0), ab, rhs)
        peak = float(np.max(np.abs(u[start:stop])))
        if not math.isfinite(peak):
            raise OverflowError("Numerov integration overflowed despite rescaling")
        if peak > _RESCALE_LIMIT:
            u[:stop] /= peak
            src_scale /= peak
            log_scale += math.log(peak)
        start = stop
    return u, log_scale


def _taylor_second_point(Q, h, value, slope, source=None):
    """Series start for the second sample from (value, slope) at the first.

    Uses u'' = Q u + g and one-sided differences for the Q and g
    derivatives.  Only valid when Q is smooth on the scale of h near the
    boundary; for potentials with an unresolved 1/r**2 edge pass explicit
    ``start_values`` to the solvers instead.
    """
    q0 = Q[0]
    qp = (-3.0 * Q[0] + 4.0 * Q[1] - Q[2]) / (2.0 * h)
    qpp = (Q[0] - 2.0 * Q[1] + Q[2]) / (h * h)
    g0, gp, gpp = 0.0, 0.0, 0.0
    if source is not None:
        g0 = source[0]
        gp = (-3.0 * source[0] + 4.0 * source[1] - source[2]) / (2.0 * h)
        gpp = (source[0] - 2.0 * source[1] + source[2]) / (h * h)
    d2 = q0 * value + g0
    d3 = qp * value + q0 * slope + gp
    d4 = qpp * value + 2.0 * qp * slope + q0 * d2 + gpp
    return value + h * slope + (h**2 / 2.0) * d2 + (h**3 / 6.0) * d3 + (h**4 / 24.0) * d4


def numerov_solve(
    V: SampledFunction,
    eps: float,
    direction: str = "outward",
    boundary: tuple[float, float] = (0.0, 1.0),
    start_values: tuple[float, float] | None = None,
) -> SampledFunction:
    """Integrate -u'' + (V - eps) u = 0 across the grid.

    ``direction`` is "outward" (start at r_min) or "inward" (start at
    r_max); ``boundary`` is (value, slope) at the starting point, in
    physical r regardless of direction.  ``start_values`` overrides the
    Taylor construction of the second sample with explicit values for the
    first two samples in marching order; use it when the potential is too
    singular near the start for a Taylor step (e.g. a centrifugal edge).
    """
    if direction not in ("outward", "inward"):
        raise DomainError(f"direction must be outward|inward, got {direction!r}")
    _require_finite(V)
    h = V.grid.h
    Q = V.values - eps
    if direction == "inward":
        Q = Q[::-1]
    if start_values is not None:
        u0, u1 = start_values
    else:
        value, slope = boundary
        if direction == "inward":
            slope = -slope  # marching coordinate runs opposite to r
        u0 = value
        u1 = _taylor_second_point(Q, h, value, slope)
    u, log_scale = _march_numerov(Q, h, u0, u1)
    if direction == "inward":
        u = u[::-1]
    return SampledFunction(V.grid, u, log_scale=log_scale)


def solve_inhomogeneous(
    V: SampledFunction,
    eps: float,
    source: SampledFunction,
    boundary: tuple[float, float] = (0.0, 0.0),
    start_values: tuple[float, float] | None = None,
) -> SampledFunction:
    """Integrate -v'' + (V - eps) v = source outward from r_min.

    Fourth-order inhomogeneous Numerov recurrence; ``boundary`` is
    (value, slope) at r_min.
    """
    _require_finite(V)
    h = V.grid.h
    Q = V.values - eps
    g = -source.values  # v'' = Q v - source
    if start_values is not None:
        v0, v1 = start_values
    else:
        value, slope = boundary
        v0 = value
        v1 = _taylor_second_point(Q, h, value, slope, source=g)
    v, log_scale = _march_numerov(Q, h, v0, v1, source=g)
    return SampledFunction(V.grid, v, log_scale=log_scale)


def count_nodes(f: SampledFunction, exclude_endpoints: bool = True) -> int:
    """Number of strict sign changes of f across the grid.

    Samples that are exactly zero are transparent (a crossing through a
    sampled zero counts once).  With ``exclude_endpoints`` a leading or
    trailing zero sample is ignored rather than paired with the interior.
    """
    v = f.values
    if exclude_endpoints:
        v = np.trim_zeros(v)
    v = v[v != 0.0]
    if v.size < 2:
        return 0
    s = np.sign(v)
    return int(np.sum(s[:-1] * s[1:] < 0.0))


def _frobenius_start(r: np.ndarray, V: np.ndarray, eps: float) -> tuple[float, float]:
    """First two samples of the regular solution near a power-law edge.

    Fits V(r) * r^2 ~ L + A r on the first three samples, takes the regular
    Frobenius exponent p from p(p-1) = L, and expands
    u = r^p (1 + c1 r + c2 r^2).  Exact for Coulomb-plus-centrifugal tails
    and accurate to O(r^3) for the partner potentials built here.
    """
    x = r[:3]
    y = V[:3] * x * x
    coeffs = np.polyfit(x, y, 2)
    L, A = float(coeffs[2]), float(coeffs[1])
    disc = 1.0 + 4.0 * L
    p = 0.5 * (1.0 + math.sqrt(disc)) if disc > 0.0 else 1.0
    c1 = A / (2.0 * p)
    c2 = (A * c1 - eps) / (4.0 * p + 2.0)
    vals = x[:2] ** p * (1.0 + c1 * x[:2] + c2 * x[:2] ** 2)
    return float(vals[0]), float(vals[1])


def _wkb_inward_start(r: np.ndarray, V: np.ndarray, eps: float) -> tuple[float, float]:
    """First two samples, in marching order, of the decaying tail at r_max.

    WKB with amplitude factor: u ~ k^{-1/2} exp(-int k), k = sqrt(V - E).
    The start only has to be roughly right; the admixture of the wrong
    (outward-decaying) mode shrinks as the integration proceeds inward.
    """
    k2a = V[-1] - eps
    k2b = V[-2] - eps
    if k2a <= 0.0 or k2b <= 0.0:
        raise DomainError("energy is not below the potential at r_max")
    ka, kb = math.sqrt(k2a), math.sqrt(k2b)
    h = r[-1] - r[-2]
    ratio = math.sqrt(ka / kb) * math.exp(0.5 * h * (ka + kb))
    return 1.0, ratio


def _outward_solution(V: SampledFunction, eps: float, upto: int | None = None):
    r = V.grid.r
    Q = V.values - eps
    u0, u1 = _frobenius_start(r, V.values, eps)
    sl = slice(None) if upto is None else slice(0, upto)
    u, _ = _march_numerov(Q[sl], V.grid.h, u0, u1)
    return u


def _count_nodes_at(V: SampledFunction, eps: float) -> int:
    u = _outward_solution(V, eps)
    v = u[u != 0.0]
    s = np.sign(v)
    return int(np.sum(s[:-1] * s[1:] < 0.0))


def _matching_index(V: SampledFunction, eps: float) -> int:
    """Outermost classical turning point, clamped inside the grid."""
    inside = np.nonzero(V.values - eps < 0.0)[0]
    m = int(inside[-1]) if inside.size else int(0.75 * V.grid.n)
    return min(max(m, 4), V.grid.n - 5)


def _match_determinant(V: SampledFunction, eps: float) -> float:
    """Scaled Wronskian mismatch of outward and inward solutions.

    Evaluated at the outermost turning point; the root in energy is the
    eigenvalue.  Normalized to be O(1) so bisection on the sign is safe.
    """
    h = V.grid.h
    m = _matching_index(V, eps)
    uo = _outward_solution(V, eps, upto=m + 3)
    Q = (V.values - eps)[m - 2 :][::-1]
    v0, v1 = _wkb_inward_start(V.grid.r, V.values, eps)
    ui_rev, _ = _march_numerov(Q, h, v0, v1)
    ui = ui_rev[::-1]
    stencil = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    duo = float(stencil @ uo[m - 2 : m + 3])
    dui = float(stencil @ ui[0:5])
    det = uo[m] * dui - ui[2] * duo
    scale = abs(uo[m] * dui) + abs(ui[2] * duo) + 1e-300
    return det / scale


def _assembled_nodes(V: SampledFunction, eps: float) -> int:
    """Interior nodes of the matched two-sided eigenfunction."""
    m = _matching_index(V, eps)
    uo = _outward_solution(V, eps, upto=m + 1)
    Q = (V.values - eps)[m:][::-1]
    v0, v1 = _wkb_inward_start(V.grid.r, V.values, eps)
    ui, _ = _march_numerov(Q, V.grid.h, v0, v1)
    ui = ui[::-1]
    scale = uo[m] / ui[0] if ui[0] != 0.0 else 1.0
    full = np.concatenate([uo[:m], ui * scale])
    return count_nodes(SampledFunction(V.grid, full))


def shoot_spectrum(
    V: SampledFunction, e_lo: float, e_hi: float, max_levels: int
) -> Spectrum:
    """Bound states of -u'' + V u = E u in (e_lo, e_hi), lowest first.

    Levels are first isolated by bisection on the interior node count of
    the outward solution (monotone in E), then polished to |dE| < 1e-9 by
    bisection plus a secant step on the matching determinant.
    """
    if not e_lo < e_hi:
        raise DomainError("require e_lo < e_hi")
    _require_finite(V)
    if max_levels <= 0:
        return Spectrum(())
    # The inward start needs a classically forbidden region at r_max.
    e_cap = float(V.values[-1]) - 1e-4
    hi = min(e_hi, e_cap)
    if hi <= e_lo:
        return Spectrum(())
    nodes_lo = _count_nodes_at(V, e_lo)
    nodes_hi = _count_nodes_at(V, hi)
    levels: list[tuple[float, int]] = []
    for target in range(nodes_lo, min(nodes_hi, nodes_lo + max_levels)):
        # Bisect on node count until the transition target -> target+1 is
        # isolated in a window much narrower than the level spacing.
        a, b = e_lo, hi
        na, nb = nodes_lo, nodes_hi
        while b - a > 1e-4 * (abs(a) + 1e-3):
            mid = 0.5 * (a + b)
            nm = _count_nodes_at(V, mid)
            if nm > target:
                b, nb = mid, nm
            else:
                a, na = mid, nm
        # The node transition sits at the hard-wall eigenvalue, which can
        # differ from the matched eigenvalue by more than the window, so
        # widen before hunting for the determinant sign change.
        width = max(b - a, 1e-6 * (abs(b) + 1e-3))
        lo, up = a - 3.0 * width, min(b + 3.0 * width, e_cap)
        flo, fup = _match_determinant(V, lo), _match_determinant(V, up)
        grow = 0
        while flo * fup > 0.0 and grow < 12:
            lo, up = lo - 2.0 * width, min(up + 2.0 * width, e_cap)
            flo, fup = _match_determinant(V, lo), _match_determinant(V, up)
            grow += 1
        if flo * fup > 0.0:
            raise ConvergenceError(
                f"no determinant sign change near level {target} in ({lo}, {up})"
            )
        e = _refine_root(lambda E: _match_determinant(V, E), lo, up, flo, fup)
        levels.append((e, _assembled_nodes(V, e)))
    return Spectrum(tuple(levels))


def _refine_root(f, lo, up, flo, fup, tol=1e-9, max_iter=200):
    """Bisection to ~100*tol, then secant polish to |dE| < tol."""
    it = 0
    while up - lo > 100.0 * tol:
        it += 1
        if it > max_iter:
            raise ConvergenceError("eigenvalue bisection exceeded iteration cap")
        mid = 0.5 * (lo + up)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            up, fup = mid, fm
        else:
            lo, flo = mid, fm
    x0, x1 = lo, up
    f0, f1 = flo, fup
    for _ in range(60):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not lo <= x2 <= up:
            x2 = 0.5 * (lo + up)
        if abs(x2 - x1) < tol:
            return x2
        x0, f0 = x1, f1
        x1, f1 = x2, f(x2)
    return 0.5 * (lo + up)
