"""Sampled paths, development, antidevelopment, holonomy and the developing map.

A :class:`SampledPath` stores values on a grid ``t_0 = 0 < ... < t_N = 1``
together with one omega sample per interval, taken at the interval midpoint.
Development is the left ODE ``g' = g omega(gamma')`` solved by midpoint
exponential stepping ``g_{n+1} = g_n exp(dt omega_n)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .algebra import Field, Mat, mat_log
from .geometry import EscapeError, GeometryHandle, quotient_lift
from .models import AlgebraElement, ModelSpec, gminus_section, reduce_center, subgroup_member

FD_STEP = 1e-6


class PathDependenceError(RuntimeError):
    """Two connecting paths developed to different endpoints."""


class HolonomyError(RuntimeError):
    pass


def _log(model: ModelSpec, M: Mat) -> Mat:
    return reduce_center(model, mat_log(M))


@dataclass(frozen=True)
class SampledPath:
    geometry: GeometryHandle
    t: np.ndarray
    values: tuple
    omegas: tuple
    breakpoints: tuple = ()
    source: tuple | None = field(default=None, compare=False)  # (fn, dfn) when known

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise ValueError("grid must be strictly increasing with at least two points")
        if len(self.values) != t.size or len(self.omegas) != t.size - 1:
            raise ValueError("need one value per grid point and one omega per interval")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "omegas", tuple(self.omegas))

    @property
    def model(self) -> ModelSpec:
        return self.geometry.model

    @property
    def n(self) -> int:
        return self.t.size - 1

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def start(self) -> Mat:
        return self.values[0]

    @property
    def end(self) -> Mat:
        return self.values[-1]

    # constructors ---------------------------------------------------------
    @classmethod
    def from_function(
        cls,
        G: GeometryHandle,
        fn: Callable[[float], Mat],
        n: int = 1000,
        dfn: Callable[[float], Mat] | None = None,
        breakpoints: Sequence[float] = (),
        grid: np.ndarray | None = None,
    ) -> "SampledPath":
        """Sample ``fn`` on a uniform grid, with omega taken at the interval midpoints."""
        t = np.linspace(0.0, 1.0, n + 1) if grid is None else np.asarray(grid, dtype=float)
        if dfn is None:
            dfn = _central_difference(fn)
        values = [fn(float(s)) for s in t]
        mids = 0.5 * (t[1:] + t[:-1])
        omegas = [G.omega_at(fn(float(s)), dfn(float(s))) for s in mids]
        return cls(G, t, values, omegas, tuple(breakpoints), (fn, dfn))

    @classmethod
    def from_values(cls, G: GeometryHandle, values: Sequence[Mat], t=None, breakpoints=()) -> "SampledPath":
        """Omega samples from ``log(g_n^-1 g_{n+1}) / dt`` (exact telescoping for flat variants)."""
        t = np.linspace(0.0, 1.0, len(values)) if t is None else np.asarray(t, dtype=float)
        model = G.model
        omegas = []
        for k in range(len(values) - 1):
            dt = t[k + 1] - t[k]
            Y = mat_log(values[k].inv() @ values[k + 1]).scale(1.0 / dt)
            if model.field is not Field.REAL:
                Y = reduce_center(model, Y)
            if G.variant == "perturbed":
                gm = values[k] @ Y.scale(dt / 2).exp()
                omegas.append(G.omega_at(gm, gm @ Y))
            else:
                omegas.append(AlgebraElement(model, Y))
        return cls(G, t, list(values), omegas, tuple(breakpoints))

    @classmethod
    def from_omegas(cls, G: GeometryHandle, start: Mat, omegas: Sequence[AlgebraElement], t=None) -> "SampledPath":
        """The path whose omega samples are given, built from omega-constant flows."""
        t = np.linspace(0.0, 1.0, len(omegas) + 1) if t is None else np.asarray(t, dtype=float)
        vals = [start]
        for k, w in enumerate(omegas):
            vals.append(G._flow_cover(vals[-1], w, t[k + 1] - t[k]))
        return cls(G, t, vals, list(omegas))

    @classmethod
    def constant(cls, G: GeometryHandle, g: Mat, n: int = 10) -> "SampledPath":
        zero = AlgebraElement(G.model, Mat.zeros(G.model.size, G.model.size, G.model.field))
        return cls(G, np.linspace(0.0, 1.0, n + 1), [g] * (n + 1), [zero] * n)

    # sampling -------------------------------------------------------------
    def interval(self, s: float) -> int:
        k = int(np.searchsorted(self.t, s, side="right") - 1)
        return min(max(k, 0), self.n - 1)

    def omega(self, s: float) -> AlgebraElement:
        return self.omegas[self.interval(s)]

    def value_at(self, s: float) -> Mat:
        """Off-grid value ``g_n exp((s - t_n) omega_n)`` (exact for flat variants)."""
        k = self.interval(s)
        if s == self.t[k]:
            return self.values[k]
        if s == self.t[k + 1]:
            return self.values[k + 1]
        return self.geometry._flow_cover(self.values[k], self.omegas[k], s - self.t[k])

    def length(self) -> float:
        """sum ||omega_n|| dt in the Frobenius inner product."""
        return float(sum(w.norm() * d for w, d in zip(self.omegas, self.dt)))

    def midpoint_residual(self) -> float:
        """max ||log(g_n^-1 g_{n+1}) / dt - omega_n|| (flat variants)."""
        model = self.model
        worst = 0.0
        for k, d in enumerate(self.dt):
            Y = _log(model, self.values[k].inv() @ self.values[k + 1]).scale(1.0 / d)
            worst = max(worst, (Y - reduce_center(model, self.omegas[k].matrix)).norm())
        return worst

    # transformations ------------------------------------------------------
    def reparametrize(self, tau: Callable[[float], float], dtau: Callable[[float], float] | None = None, n: int | None = None) -> "SampledPath":
        """gamma o tau for an orientation-preserving tau with tau(0)=0, tau(1)=1."""
        n = n or self.n
        grid = np.linspace(0.0, 1.0, n + 1)
        taus = np.array([tau(float(s)) for s in grid])
        if abs(taus[0]) > 1e-12 or abs(taus[-1] - 1.0) > 1e-12:
            raise ValueError("tau must fix 0 and 1")
        if np.any(np.diff(taus) <= 0):
            raise ValueError("tau must be strictly increasing")
        # a kink must land on a grid node, else one cell mixes both sides
        pre = []
        for b in self.breakpoints:
            j = int(np.searchsorted(taus, b))
            if j <= n and taus[j] == b:
                pre.append(float(grid[j]))
            elif 0 < j <= n:
                pre.append(brentq(lambda s: tau(s) - b, grid[j - 1], grid[j], xtol=1e-15))
        if pre:
            grid = np.union1d(grid, pre)
            taus = np.array([tau(float(s)) for s in grid])
        n = len(grid) - 1
        bps = tuple(sorted(pre))
        if dtau is None:
            dtau = lambda s: (tau(min(s + FD_STEP, 1.0)) - tau(max(s - FD_STEP, 0.0))) / (min(s + FD_STEP, 1.0) - max(s - FD_STEP, 0.0))  # noqa: E731
        G = self.geometry
        if self.source is not None:
            fn, dfn = self.source
            return SampledPath.from_function(
                G, lambda s: fn(tau(s)), n, lambda s: dfn(tau(s)).scale(dtau(s)), bps, grid=grid
            )
        mids = 0.5 * (grid[1:] + grid[:-1])
        vals = [self.value_at(float(s)) for s in taus]
        omegas = [self.omega(tau(float(s))).scale(dtau(float(s))) for s in mids]
        return SampledPath(G, grid, vals, omegas, bps)

    def translate_left(self, g0: Mat) -> "SampledPath":
        return replace(self, values=tuple(g0 @ v for v in self.values), source=None)

    def translate_right(self, h: Mat) -> "SampledPath":
        hinv = h.inv()
        om = [AlgebraElement(self.model, hinv @ w.matrix @ h) for w in self.omegas]
        return replace(self, values=tuple(v @ h for v in self.values), omegas=tuple(om), source=None)

    def to_arclength(self) -> "SampledPath":
        """Same samples, re-timed so the parameter is proportional to length."""
        speeds = np.array([w.norm() for w in self.omegas])
        keep = speeds > 0
        if not np.any(keep):
            return self
        seg = speeds * self.dt
        idx = np.flatnonzero(keep)
        L = seg[keep].sum()
        new_t = np.concatenate([[0.0], np.cumsum(seg[keep]) / L])
        new_t[-1] = 1.0
        vals = [self.values[0]] + [self.values[k + 1] for k in idx]
        om = [self.omegas[k].scale(self.dt[k] / (new_t[j + 1] - new_t[j])) for j, k in enumerate(idx)]
        return SampledPath(self.geometry, new_t, vals, om)


def _central_difference(fn: Callable[[float], Mat], h: float = FD_STEP) -> Callable[[float], Mat]:
    def d(s: float) -> Mat:
        lo, hi = max(s - h, 0.0), min(s + h, 1.0)
        return (fn(hi) - fn(lo)).scale(1.0 / (hi - lo))

    return d


# ---------------------------------------------------------------------------
# development


def develop(gamma: SampledPath) -> SampledPath:
    """Development into the model group, starting at e."""
    model = gamma.model
    Gm = GeometryHandle.klein(model)
    vals = [Mat.eye_like(model.size, model.field)]
    for w, d in zip(gamma.omegas, gamma.dt):
        if not np.all(np.isfinite(w.matrix.data)):
            raise ValueError("inconsistent derivative samples")
        vals.append(vals[-1] @ w.matrix.scale(d).exp())
    return SampledPath(Gm, gamma.t, vals, gamma.omegas, gamma.breakpoints)


def develop_endpoint(gamma: SampledPath) -> Mat:
    return develop(gamma).end


def develop_endpoint_reparam(gamma: SampledPath, tau, dtau=None, n: int | None = None) -> Mat:
    return develop_endpoint(gamma.reparametrize(tau, dtau, n))


def _points_match(G: GeometryHandle, a: Mat, b: Mat, tol: float) -> bool:
    return (G.reduce(a) - G.reduce(b)).norm() <= tol * max(1.0, a.norm())


def concat(g1: SampledPath, g2: SampledPath, tol: float = 1e-10) -> SampledPath:
    """Half-speed concatenation with a breakpoint at 1/2."""
    if g1.geometry != g2.geometry:
        raise ValueError("paths live on different geometries")
    G = g1.geometry
    if not _points_match(G, g1.end, g2.start, tol):
        raise ValueError("endpoint mismatch: gamma1(1) != gamma2(0)")
    v2 = list(g2.values)
    if G.variant == "quotient":
        # continue in the cover so the concatenation stays continuous
        shift = np.round(g1.end.data[: G.rank, -1] - g2.start.data[: G.rank, -1])
        v2 = [G.deck(shift) @ v for v in v2]
    t = np.concatenate([g1.t / 2.0, 0.5 + g2.t[1:] / 2.0])
    om = [w.scale(2.0) for w in g1.omegas] + [w.scale(2.0) for w in g2.omegas]
    bps = tuple(sorted({b / 2 for b in g1.breakpoints} | {0.5} | {0.5 + b / 2 for b in g2.breakpoints}))
    return SampledPath(G, t, list(g1.values) + v2[1:], om, bps)


def reverse(g: SampledPath) -> SampledPath:
    t = (1.0 - g.t)[::-1].copy()
    t[0], t[-1] = 0.0, 1.0
    om = [w.scale(-1.0) for w in g.omegas[::-1]]
    src = None
    if g.source is not None:
        fn, dfn = g.source
        src = (lambda s: fn(1.0 - s), lambda s: dfn(1.0 - s).scale(-1.0))
    return SampledPath(g.geometry, t, list(g.values[::-1]), om, tuple(sorted(1.0 - b for b in g.breakpoints)), src)


@dataclass(frozen=True)
class PathMetricValue:
    point: float
    derivative: float

    @property
    def total(self) -> float:
        return self.point + self.derivative

    def __float__(self) -> float:
        return self.total


def _chord(G: GeometryHandle, a: Mat, b: Mat) -> float:
    if G.variant == "quotient":
        b = G.deck(-np.round(b.data[: G.rank, -1] - a.data[: G.rank, -1])) @ b
    M = a.inv() @ b
    if (M - Mat.eye_like(M.rows, M.field)).norm() < 1e-15:
        return 0.0
    return _log(G.model, M).norm()


def path_distance(g1: SampledPath, g2: SampledPath, merge_tol: float = 1e-12) -> PathMetricValue:
    """sup chord distance of values plus sup of omega differences on the merged grid.

    The chord distance between values is the length ``||log(a^-1 b)||`` of the
    connecting omega-constant flow; the derivative term is evaluated at merged
    interval midpoints, which never meet a breakpoint.
    """
    if g1.model != g2.model:
        raise ValueError("paths on different models")
    G = g1.geometry
    grid = np.unique(np.round(np.concatenate([g1.t, g2.t]) / merge_tol) * merge_tol)
    point = max(_chord(G, g1.value_at(float(s)), g2.value_at(float(s))) for s in grid)
    mids = 0.5 * (grid[1:] + grid[:-1])
    deriv = max(
        (reduce_center(g1.model, g1.omega(float(s)).matrix - g2.omega(float(s)).matrix)).norm() for s in mids
    )
    return PathMetricValue(float(point), float(deriv))


@dataclass(frozen=True)
class ContinuityReport:
    distances: list
    sup_gaps: list
    ratios: list
    bound: float

    @property
    def bounded(self) -> bool:
        return all(r <= self.bound for r in self.ratios)


def solution_path(model: ModelSpec, f: Callable[[float], AlgebraElement], n: int = 1000) -> SampledPath:
    """Development of the omega-derivative function f: g' = g f(t), g(0) = e."""
    Gm = GeometryHandle.klein(model)
    t = np.linspace(0.0, 1.0, n + 1)
    mids = 0.5 * (t[1:] + t[:-1])
    e = Mat.eye_like(model.size, model.field)
    return develop(SampledPath.from_omegas(Gm, e, [f(float(s)) for s in mids], t))


def develop_continuity_probe(model: ModelSpec, fs: Sequence[Callable], f_inf: Callable, n: int = 400, bound: float = 10.0) -> ContinuityReport:
    """d(solution_k, solution_inf) against sup ||f_k - f_inf|| on the grid."""
    sol_inf = solution_path(model, f_inf, n)
    t = np.linspace(0.0, 1.0, n + 1)
    mids = 0.5 * (t[1:] + t[:-1])
    dists, gaps, ratios = [], [], []
    for f in fs:
        sol = solution_path(model, f, n)
        d = path_distance(sol, sol_inf).total
        gap = max((f(float(s)) - f_inf(float(s))).norm() for s in mids)
        dists.append(d)
        gaps.append(gap)
        ratios.append(0.0 if gap == 0.0 and d == 0.0 else d / gap)
    return ContinuityReport(dists, gaps, ratios, bound)


def shrinking_probe(paths: Sequence[SampledPath]) -> list[float]:
    """||dev(gamma_k)(1) - e|| for a family of paths shrinking to a constant path."""
    out = []
    for p in paths:
        end = develop_endpoint(p)
        out.append((end - Mat.eye_like(end.rows, end.field)).norm())
    return out


# ---------------------------------------------------------------------------
# antidevelopment


def antidevelop(G: GeometryHandle, gamma_model: SampledPath, start: Mat, tol: float = 1e-9) -> SampledPath:
    """Path in the geometry from ``start`` whose development is ``gamma_model``.

    Each step follows the omega-constant flow of the model path's omega sample.
    Leaving the domain raises :class:`EscapeError` with the exit time.
    """
    if gamma_model.model != G.model:
        raise ValueError("model path from a different model")
    e = Mat.eye_like(G.model.size, G.model.field)
    if (gamma_model.start - e).norm() > 1e-10:
        raise ValueError("model path must start at e")
    G.check_point(start)
    vals = [start]
    t = gamma_model.t
    for k, w in enumerate(gamma_model.omegas):
        d = t[k + 1] - t[k]
        nxt = G._flow_cover(vals[-1], w, d)
        if not G.contains(nxt):
            lo, hi = 0.0, d
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if G.contains(G._flow_cover(vals[-1], w, mid)):
                    lo = mid
                else:
                    hi = mid
            raise EscapeError(t[k] + 0.5 * (lo + hi))
        vals.append(nxt)
    return SampledPath(G, t, vals, gamma_model.omegas, gamma_model.breakpoints)


def _boundary_distance(G: GeometryHandle, pt: Mat, directions: np.ndarray, rmax: float, tol: float) -> float:
    x0 = G.base(pt)

    def inside(y):
        d = np.array(pt.data, copy=True)
        d[:-1, -1] = y
        return G.contains(Mat(d, Field.REAL))

    best = np.inf
    for u in directions:
        r, step = 0.0, min(0.05, rmax)
        hit = None
        while r < min(rmax, best):
            r_next = min(r + step, rmax)
            if not inside(x0 + r_next * u):
                hit = (r, r_next)
                break
            r = r_next
            step *= 1.5
        if hit is None:
            continue
        lo, hi = hit
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if inside(x0 + mid * u):
                lo = mid
            else:
                hi = mid
        best = min(best, lo)
    return best


def antidev_radius(G: GeometryHandle, pt: Mat, n_dirs: int = 64, seed: int = 0, rmax: float = 1e3, tol: float = 1e-10) -> float:
    """Certified lower bound on the antidevelopment radius at pt (Frobenius inner product).

    The base distance delta to the domain boundary is estimated by ray
    sampling (coordinate axes plus seeded random directions) with bisection.
    For Iso(m) the base point moves at most as fast as ||omega||, so the bound
    is delta; for Aff(m) ``|dx| <= ||A_0|| e^s ds`` gives ``log(1 + delta/||A_0||)``.
    Complete geometries return ``inf``.
    """
    if G.variant != "open_restriction":
        return np.inf
    if G.model.kind not in ("affine", "euclid"):
        raise ValueError("certified radius is implemented for affine/euclid models")
    G.check_point(pt)
    d = G.model.m
    rng = np.random.default_rng(seed)
    dirs = [np.eye(d)[i] * s for i in range(d) for s in (1.0, -1.0)]
    R = rng.standard_normal((n_dirs, d))
    dirs += list(R / np.linalg.norm(R, axis=1, keepdims=True))
    delta = _boundary_distance(G, pt, np.array(dirs), rmax, tol)
    if not np.isfinite(delta):
        return np.inf
    if G.model.kind == "euclid":
        return float(delta)
    a0 = float(np.linalg.norm(pt.data[:-1, :-1], 2))
    return float(np.log1p(delta / a0))


# ---------------------------------------------------------------------------
# holonomy and the developing map


def lift_base_path(G: GeometryHandle, base_values: Sequence[np.ndarray], start: Mat) -> list[Mat]:
    """Lift ``s(b(t)) h0`` of a base path through the G- section, with ``h0 = s(b(0))^-1 start``."""
    model = G.model
    b = [np.asarray(v, dtype=float) for v in base_values]
    if G.variant == "quotient":
        b = quotient_lift(G, b).values
    h0 = gminus_section(model, b[0]).inv() @ start
    return [gminus_section(model, v) @ h0 for v in b]


def holonomy(G: GeometryHandle, loop: Sequence[np.ndarray], start: Mat | None = None, tol: float = 1e-10) -> Mat:
    """gamma_G(1) h^-1 for the lift of a base loop, where the lift ends at start * h."""
    model = G.model
    start = G.identity() if start is None else start
    b = np.asarray(loop, dtype=float)
    gap = b[-1] - b[0]
    if G.variant == "quotient":
        gap[: G.rank] -= np.round(gap[: G.rank])
    if np.linalg.norm(gap) > tol:
        raise HolonomyError("base loop does not close")
    if np.linalg.norm(G.base(start) - b[0]) > 1e-9:
        raise HolonomyError("lift start does not lie over the loop's base point")
    vals = lift_base_path(G, b, start)
    for v in vals:
        if not G.contains(v):
            raise EscapeError(0.0, "lift left the domain")
    path = SampledPath.from_values(G, vals)
    gG = develop_endpoint(path)
    h = start.inv() @ G.reduce(vals[-1])
    if G.variant == "quotient":
        h = start.inv() @ G.deck(-np.round(vals[-1].data[: G.rank, -1] - start.data[: G.rank, -1])) @ vals[-1]
    if not subgroup_member(model, h, "P", tol=1e-8):
        raise HolonomyError("fiber discrepancy is not in H")
    return gG @ h.inv()


def _interp_path(G: GeometryHandle, a: Mat, b: Mat, detour: Callable[[float], np.ndarray] | None = None) -> Callable[[float], Mat]:
    """Path from a to b: the base moves along a line (plus detour), the H factor along a log segment."""
    model = G.model
    ya, yb = G.base(a), G.base(b)
    ha = gminus_section(model, ya).inv() @ a
    hb = gminus_section(model, yb).inv() @ b
    L = mat_log(ha.inv() @ hb)

    def fn(s: float) -> Mat:
        y = (1 - s) * ya + s * yb
        if detour is not None:
            y = y + detour(s)
        return gminus_section(model, y) @ ha @ L.scale(s).exp()

    return fn


def developing_map(G: GeometryHandle, pt: Mat, base: Mat | None = None, n: int = 64, tol: float = 1e-8) -> Mat:
    """dev(pt) = gamma_G(1) for a path gamma from ``base`` to ``pt``, checked against a second path.

    The second path is a bent detour in the base; on a quotient it winds once
    around the first circle factor.  Disagreement raises :class:`PathDependenceError`.
    """
    base = G.identity() if base is None else base
    m = G.model.base_dim
    if G.variant == "quotient":
        e1 = np.zeros(m)
        e1[0] = 1.0
        bent = lambda s: s * e1  # noqa: E731
    else:
        # bend along a direction the slab does not constrain, when there is one
        axis = 0
        if G.variant == "open_restriction" and G.domain.name == "slab" and m > 1:
            axis = 1 if G.domain.params["axis"] == 0 else 0
        off = np.zeros(m)
        off[axis] = 0.1
        bent = lambda s: np.sin(np.pi * s) * off  # noqa: E731
    ends = []
    for det in (None, bent):
        fn = _interp_path(G, base, pt, det)
        vals = [fn(float(s)) for s in np.linspace(0.0, 1.0, n + 1)]
        if not all(G.contains(v) for v in vals):
            raise EscapeError(0.0, "connecting path left the domain")
        ends.append(develop_endpoint(SampledPath.from_values(G, vals)))
    if (ends[0] - ends[1]).norm() > tol * max(1.0, ends[0].norm()):
        raise PathDependenceError(f"developments differ by {(ends[0] - ends[1]).norm():.3e}")
    return ends[0]


# ---------------------------------------------------------------------------
# CSV


def _flat(M: Mat) -> list[float]:
    return [float(v) for v in M.real_parts()]


def write_path_csv(path: SampledPath, fname) -> None:
    """Columns: t, flattened real parts of the value, then of omega (empty on the last row)."""
    nv = len(_flat(path.values[0]))
    with open(fname, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"v{i}" for i in range(nv)] + [f"w{i}" for i in range(nv)])
        for k, s in enumerate(path.t):
            om = _flat(path.omegas[k].matrix) if k < path.n else [""] * nv
            w.writerow([repr(float(s))] + [repr(v) for v in _flat(path.values[k])] + [repr(v) if v != "" else "" for v in om])


def _unflat(model: ModelSpec, row: list[float]) -> Mat:
    N = model.size
    arr = np.array(row, dtype=float)
    if model.field is Field.QUATERNION:
        return Mat(arr.reshape(N, N, 4), model.field)
    if model.field is Field.COMPLEX:
        a = arr.reshape(N, N, 2)
        return Mat(a[..., 0] + 1j * a[..., 1], model.field)
    return Mat(arr.reshape(N, N), model.field)


def read_path_csv(G: GeometryHandle, fname) -> SampledPath:
    with open(fname, newline="") as fh:
        rows = list(csv.reader(fh))
    header, rows = rows[0], rows[1:]
    nv = (len(header) - 1) // 2
    t = [float(r[0]) for r in rows]
    vals = [_unflat(G.model, [float(x) for x in r[1 : 1 + nv]]) for r in rows]
    om = [AlgebraElement(G.model, _unflat(G.model, [float(x) for x in r[1 + nv :]])) for r in rows[:-1]]
    return SampledPath(G, np.array(t), vals, om)
