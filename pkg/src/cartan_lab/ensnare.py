"""Ensnaring checks for unipotent isotropies of the three parabolic models.

An :class:`EnsnareCase` fixes a model and ``a`` in P+.  The checks measure
the orbit formulas, fixed sets, the shrinking access path ``zeta_U``, the
decay of the chart Jacobians of ``a^k`` and the conjugation-contraction
hypothesis.  Everything is done in the standard chart ``r = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

from .algebra import Field, Mat, Quaternion
from .algebra.scalars import hamilton, qconj, qinv
from .models import (
    ChartError,
    HomogeneousPoint,
    IsotropyElement,
    ModelSpec,
    _c2r,
    _r2c,
    act,
    from_chart,
    gminus_section,
    point_distance,
    subgroup_member,
    to_chart,
)

FD_JAC_STEP = 1e-5
GRID_CAP = 10_000


class RejectedCase(ValueError):
    """The case lies outside the hypotheses (e.g. a null cr isotropy)."""


# ---------------------------------------------------------------------------
# case


@dataclass(frozen=True)
class EnsnareCase:
    model: ModelSpec
    a: IsotropyElement
    y: np.ndarray | None = None  # zeta_U direction (cproj/quat), beta(y) > 0
    ball_center: np.ndarray | None = None
    ball_radius: float = 1.0

    @property
    def beta_y(self) -> float:
        if self.model.kind == "cr":
            raise ValueError("beta(y) is a cproj/quat quantity")
        v = self.a.beta_of(self.y)
        return float(v[0] if self.model.field is Field.QUATERNION else np.real(v))

    @property
    def fixed_descriptor(self) -> str:
        if self.model.kind in ("cproj", "quat"):
            return "beta(x)=0"
        return "c=0" if self.a.beta_zero else "beta(x)=0 and c=0"

    @property
    def codimension(self) -> int:
        if self.model.kind == "cproj":
            return 2
        if self.model.kind == "quat":
            return 4
        return 2 if self.a.beta_zero else 4

    def in_fixed(self, pt: HomogeneousPoint, tol: float = 1e-12) -> bool:
        """Evaluate the analytic fixed-set descriptor on homogeneous coordinates."""
        v = pt.vector
        if self.model.kind in ("cproj", "quat"):
            return float(np.linalg.norm(self.a.beta_of(v[1:]))) <= tol
        c = v[-1]
        if self.a.beta_zero:
            return abs(c) <= tol if self.a.s != 0 else True
        return abs(c) <= tol and abs(self.a.beta_of(v[1:-1])) <= tol


def make_case(model: ModelSpec, beta, s: float = 0.0, y=None, ball_center=None, ball_radius: float = 1.0) -> EnsnareCase:
    """Case with default zeta direction ``y = conj(beta)/|beta|^2`` (so beta(y) = 1).

    The default Jacobian ball has radius 1 and its centre at chart distance 2
    from Fix(a), so the whole ball stays at distance >= 1 from it.
    """
    from .models import isotropy_from_config

    a = isotropy_from_config(model, beta, s)
    if model.kind in ("cproj", "quat") and y is None and not a.beta_zero:
        y = _conj_field(model, a.beta) / _beta_norm2(a)
    if y is not None:
        y = np.asarray(y, dtype=float if model.field is Field.QUATERNION else complex)
        if model.field is Field.QUATERNION:
            y = y.reshape(model.n, 4) if y.size == 4 * model.n else np.stack([y, *(np.zeros_like(y),) * 3], -1)
    if ball_center is None:
        ball_center = default_ball_center(model, a)
    return EnsnareCase(model, a, y, np.asarray(ball_center, dtype=float), float(ball_radius))


def _conj_field(model, v):
    return qconj(v) if model.field is Field.QUATERNION else np.conj(v)


def _beta_norm2(a: IsotropyElement) -> float:
    return float(np.sum(np.abs(a.beta) ** 2))


def default_ball_center(model: ModelSpec, a: IsotropyElement, dist: float = 2.0) -> np.ndarray:
    if model.kind in ("cproj", "quat"):
        if a.beta_zero:
            return np.zeros(model.base_dim)
        nb = np.sqrt(_beta_norm2(a))
        u = _conj_field(model, a.beta) / nb  # unit normal to ker beta
        return dist * (u.reshape(-1) if model.field is Field.QUATERNION else _c2r(u))
    # cr: Fix in the chart lies inside {Im c = 0}; use the point (x, Im c) = (0, dist)
    c = np.zeros(model.base_dim)
    c[-1] = dist
    return c


def case_from_config(model: ModelSpec, cfg: dict) -> EnsnareCase:
    cfg = dict(cfg)
    allowed = {"beta", "s", "y", "ball_center", "ball_radius"}
    extra = set(cfg) - allowed
    if extra:
        raise ValueError(f"unknown case fields: {sorted(extra)}")
    beta = _parse_vec(cfg.get("beta", [1.0] * model.n), model)
    y = cfg.get("y")
    if y is not None:
        y = _parse_vec(y, model)
    return make_case(model, beta, float(cfg.get("s", 0.0)), y, cfg.get("ball_center"), float(cfg.get("ball_radius", 1.0)))


def _parse_vec(v, model):
    """Config vectors: reals, [re, im] pairs, or [w, x, y, z] quaternions."""
    arr = np.asarray(v, dtype=float)
    if model.field is Field.QUATERNION:
        return arr if arr.ndim == 2 else arr.reshape(-1)
    if arr.ndim == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    return arr.astype(complex)


# ---------------------------------------------------------------------------
# orbits


def orbit_vector(case: EnsnareCase, v: np.ndarray, k: int) -> tuple[np.ndarray, object]:
    """Closed-form ``a^k v`` on homogeneous coordinates, plus the first entry r_k."""
    a, model = case.a, case.model
    v = np.array(v, copy=True)
    if model.kind in ("cproj", "quat"):
        bx = a.beta_of(v[1:])
        v[0] = v[0] + k * bx
        return v, v[0]
    r, x, c = v[0], v[1:-1], v[-1]
    rk = r + k * (a.beta_of(x) + 1j * c * a.s) - 0.5 * c * k * k * a.b
    v[0] = rk
    v[1:-1] = x - k * c * (model.Ipq @ a.beta.conj())
    return v, rk


def orbit(case: EnsnareCase, pt: HomogeneousPoint, k: int) -> HomogeneousPoint:
    v, _ = orbit_vector(case, pt.vector, k)
    return HomogeneousPoint.from_vector(case.model, v)


def orbit_debug(case: EnsnareCase, pt: HomogeneousPoint, k: int) -> dict:
    """Orbit point together with the internal denominator r_k."""
    v, rk = orbit_vector(case, pt.vector, k)
    return {"point": HomogeneousPoint.from_vector(case.model, v), "r_k": rk}


def orbit_chart(case: EnsnareCase, pt: HomogeneousPoint, k: int, tol: float = 1e-12) -> np.ndarray:
    """Chart coordinates of a^k(pt); raises ChartError if the denominator vanishes."""
    v, rk = orbit_vector(case, pt.vector, k)
    if np.linalg.norm(rk) < tol * np.linalg.norm(v):
        raise ChartError(f"chart denominator vanishes at k = {k}")
    return to_chart(HomogeneousPoint.from_vector(case.model, v))


def orbit_oracle(case: EnsnareCase, pt: HomogeneousPoint, k: int) -> HomogeneousPoint:
    """Matrix power a^k (repeated squaring of the matrix) acting on pt."""
    return act(case.a.matrix.power(k), pt)


def chart_map(case: EnsnareCase, Y: np.ndarray, k: int) -> np.ndarray:
    """Vectorised ``a^k`` in real chart coordinates; rows of Y are chart points."""
    model, a = case.model, case.a
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    P = Y.shape[0]
    if model.kind == "cproj":
        X = Y.reshape(P, -1, 2)
        x = X[..., 0] + 1j * X[..., 1]
        den = 1.0 + k * (x @ a.beta)
        out = x / den[:, None]
        return np.stack([out.real, out.imag], -1).reshape(P, -1)
    if model.kind == "quat":
        x = Y.reshape(P, -1, 4)
        bx = np.sum(hamilton(a.beta[None], x), axis=1)
        den = bx * k
        den[:, 0] += 1.0
        out = hamilton(x, qinv(den)[:, None, :])
        return out.reshape(P, -1)
    X = Y[:, :-1].reshape(P, -1, 2)
    x = X[..., 0] + 1j * X[..., 1]
    Ipq = model.Ipq
    c = 1j * Y[:, -1] - 0.5 * np.einsum("pi,ij,pj->p", x.conj(), Ipq, x).real
    rk = 1.0 + k * (x @ a.beta + 1j * c * a.s) - 0.5 * c * k * k * a.b
    xn = (x - k * c[:, None] * (Ipq @ a.beta.conj())[None]) / rk[:, None]
    un = np.imag(c / rk)
    return np.concatenate([np.stack([xn.real, xn.imag], -1).reshape(P, -1), un[:, None]], axis=1)


# ---------------------------------------------------------------------------
# zeta_U and tau_k


def check_hypotheses(case: EnsnareCase) -> None:
    a = case.a
    if not a.nontrivial:
        raise RejectedCase("a is the identity")
    if case.model.kind == "cr" and not a.non_null:
        raise RejectedCase("cr isotropy is null: beta I conj(beta)^T = 0 with beta != 0")
    if case.model.kind == "cr" and a.beta_zero and a.s == 0:
        raise RejectedCase("a is the identity")
    if case.model.kind in ("cproj", "quat"):
        by = a.beta_of(case.y)
        if case.model.field is Field.QUATERNION:
            ok = by[0] > 0 and np.linalg.norm(by[1:]) < 1e-12 * abs(by[0])
        else:
            ok = by.real > 0 and abs(by.imag) < 1e-12 * abs(by.real)
        if not ok:
            raise RejectedCase("beta(y) must be a positive real number")


def zeta_vector(case: EnsnareCase, t: float) -> np.ndarray:
    model, a = case.model, case.a
    if model.kind in ("cproj", "quat"):
        if model.field is Field.QUATERNION:
            v = np.zeros((model.size, 4))
            v[0, 0] = 1.0
            v[1:] = t * case.y
            return v
        return np.concatenate([[1.0 + 0j], t * case.y])
    s = a.s
    if a.beta_zero:
        # the displayed path divided by t, which keeps zeta(0) = q(e)
        return np.concatenate([[t - s], np.zeros(model.n), [1j * t]]).astype(complex)
    ib = model.Ipq @ a.beta.conj()
    return np.concatenate([[t * (t - s) - 0.5j * a.b], -1j * t * ib, [1j * t * t]])


def zeta_point(case: EnsnareCase, t: float) -> HomogeneousPoint:
    return HomogeneousPoint.from_vector(case.model, zeta_vector(case, t))


def tau_k(case: EnsnareCase, k: float):
    """Reparametrisation sending a^k(zeta(tau_k(t))) to zeta(t / (1 + k c)), c = beta(y) or 1."""
    c = case.beta_y if case.model.kind != "cr" else 1.0

    def tau(t):
        return t / (1.0 + k * c * (1.0 - t))

    def dtau(t):
        return (1.0 + k * c) / (1.0 + k * c * (1.0 - t)) ** 2

    return tau, dtau


@dataclass(frozen=True)
class ZetaPath:
    case: EnsnareCase
    t: np.ndarray
    points: tuple
    charts: np.ndarray
    derivatives: np.ndarray

    def null_residual(self) -> float:
        return max(p.null_residual() for p in self.points)

    def bundle_function(self):
        """t -> G- section over zeta(t), a path in the model group from e."""
        case = self.case
        return lambda t: gminus_section(case.model, to_chart(zeta_point(case, t)))


def zeta_path(case: EnsnareCase, n: int = 200) -> ZetaPath:
    check_hypotheses(case)
    t = np.linspace(0.0, 1.0, n + 1)
    pts = [zeta_point(case, float(s)) for s in t]
    charts = np.array([to_chart(p) for p in pts])
    return ZetaPath(case, t, tuple(pts), charts, np.gradient(charts, t, axis=0, edge_order=2))


# ---------------------------------------------------------------------------
# decay series


@dataclass(frozen=True)
class DecaySeries:
    name: str
    k: np.ndarray
    values: np.ndarray
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.shape != v.shape or np.any(np.diff(k) <= 0):
            raise ValueError("k must be strictly increasing and match values")
        if np.any(v <= 0):
            raise ValueError("decay series must be strictly positive")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "values", v)

    def fit_exponent(self, kmin: float | None = None, kmax: float | None = None) -> float:
        """Least-squares slope of log(value) on log(k), over the last half by default."""
        mask = self.k > 0
        if kmin is None and kmax is None:
            idx = np.flatnonzero(mask)
            idx = idx[len(idx) // 2 :]
            mask = np.zeros_like(mask)
            mask[idx] = True
        else:
            if kmin is not None:
                mask &= self.k >= kmin
            if kmax is not None:
                mask &= self.k <= kmax
        if mask.sum() < 2:
            raise ValueError("not enough points to fit")
        slope, _ = np.polyfit(np.log(self.k[mask]), np.log(self.values[mask]), 1)
        return float(slope)

    @property
    def exponent(self) -> float:
        return self.fit_exponent()

    @property
    def burn_in(self) -> int:
        """First index after which the series decreases strictly."""
        d = np.diff(self.values)
        bad = np.flatnonzero(d >= 0)
        return int(bad[-1] + 1) if bad.size else 0

    def monotone_after(self, index: int) -> bool:
        return bool(np.all(np.diff(self.values[index:]) < 0))

    @property
    def last(self) -> float:
        return float(self.values[-1])


def default_ks(k_max: int, count: int = 40, include_zero: bool = True) -> np.ndarray:
    ks = np.unique(np.round(np.geomspace(1, k_max, count)).astype(int))
    return np.concatenate([[0], ks]) if include_zero else ks


def c1_sup(charts: np.ndarray, t: np.ndarray) -> tuple[float, float]:
    """sup |X(t)| and sup |X'(t)| of a sampled chart curve (second-order np.gradient)."""
    d = np.gradient(charts, t, axis=0, edge_order=2)
    return float(np.max(np.linalg.norm(charts, axis=1))), float(np.max(np.linalg.norm(d, axis=1)))


def shrink_check(case: EnsnareCase, k_max: int = 1000, n: int = 400, ks=None) -> DecaySeries:
    """C^1 chart distance of a^k(zeta_U o tau_k) to the constant path at q(e).

    The distance is sup |X_k| + sup |X_k'| for the chart curve X_k; it is
    cross-checked against the closed form zeta(t / (1 + k c)).
    """
    if k_max < 10:
        raise ValueError("k_max must be at least 10")
    check_hypotheses(case)
    ks = default_ks(k_max) if ks is None else np.asarray(ks)
    t = np.linspace(0.0, 1.0, n + 1)
    cconst = case.beta_y if case.model.kind != "cr" else 1.0
    vals, gaps = [], []
    for k in ks:
        tau, _ = tau_k(case, float(k))
        ch = np.array([to_chart(act(case.a.power(int(k)), zeta_point(case, tau(float(s))))) for s in t])
        closed = np.array([to_chart(zeta_point(case, float(s) / (1.0 + k * cconst))) for s in t])
        p, d = c1_sup(ch, t)
        vals.append(p + d)
        gaps.append(float(np.max(np.abs(ch - closed))))
    return DecaySeries("shrink", ks, np.array(vals), {"closed_form_gap": max(gaps)})


# ---------------------------------------------------------------------------
# jacobians


def ball_grid(center: np.ndarray, radius: float, per_axis: int | None = None, cap: int = GRID_CAP) -> np.ndarray:
    """per_axis^d grid on the cube, pushed radially onto the closed ball.

    The map y -> y |y|_inf / |y|_2 keeps every grid point, which matters in
    high dimension where few cube points fall inside the ball.
    """
    d = center.size
    if per_axis is None:
        per_axis = 11 if 11**d <= cap else int(np.floor(cap ** (1.0 / d) + 1e-9))
    ax = np.linspace(-1.0, 1.0, per_axis)
    mesh = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), -1).reshape(-1, d)
    l2 = np.linalg.norm(mesh, axis=1)
    linf = np.max(np.abs(mesh), axis=1)
    scale = np.divide(linf, l2, out=np.zeros_like(l2), where=l2 > 0)
    return center + radius * mesh * scale[:, None]


def fd_jacobians(case: EnsnareCase, Y: np.ndarray, k: int, h: float = FD_JAC_STEP) -> np.ndarray:
    """Central-difference chart Jacobians of a^k at the rows of Y, shape (P, d, d)."""
    P, d = Y.shape
    J = np.empty((P, d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        J[:, :, j] = (chart_map(case, Y + e, k) - chart_map(case, Y - e, k)) / (2 * h)
    return J


def analytic_jacobian_cproj(case: EnsnareCase, y: np.ndarray, k: int) -> np.ndarray:
    """Real form of ``xi -> [xi + k(beta(x) xi - beta(xi) x)] / (1 + k beta(x))^2``."""
    if case.model.kind != "cproj":
        raise ValueError("closed-form Jacobian is implemented for cproj")
    x = _r2c(y)
    beta = case.a.beta
    w = 1.0 + k * (beta @ x)
    C = ((w) * np.eye(x.size) - k * np.outer(x, beta)) / w**2
    m = x.size
    R = np.zeros((2 * m, 2 * m))
    R[0::2, 0::2] = C.real
    R[0::2, 1::2] = -C.imag
    R[1::2, 0::2] = C.imag
    R[1::2, 1::2] = C.real
    return R


def jacobian_decay(case: EnsnareCase, k_max: int = 1000, center=None, radius: float | None = None, per_axis: int | None = None, ks=None) -> DecaySeries:
    """sup over a chart ball of the operator norm of the chart Jacobian of a^k."""
    center = case.ball_center if center is None else np.asarray(center, dtype=float)
    radius = case.ball_radius if radius is None else radius
    Y = ball_grid(center, radius, per_axis)
    # precondition: the ball must stay away from Fix(a)
    pts_fixed = [case.in_fixed(from_chart(case.model, y), tol=1e-9) for y in Y[:: max(1, len(Y) // 200)]]
    if any(pts_fixed):
        raise ValueError("grid touches Fix(a)")
    ks = default_ks(k_max) if ks is None else np.asarray(ks)
    vals = []
    for k in ks:
        J = fd_jacobians(case, Y, int(k))
        vals.append(float(np.max(np.linalg.norm(J, ord=2, axis=(1, 2)))))
    extra = {"grid_points": int(len(Y))}
    if case.model.kind == "cproj":
        extra["analytic_rel_error"] = jacobian_crosscheck(case, Y[:: max(1, len(Y) // 50)], ks)
    return DecaySeries("jacobian", ks, np.array(vals), extra)


def jacobian_crosscheck(case: EnsnareCase, Y: np.ndarray, ks) -> float:
    """Max relative gap between FD and closed-form cproj Jacobians."""
    worst = 0.0
    for k in ks:
        J = fd_jacobians(case, Y, int(k))
        for y, Jf in zip(Y, J):
            Ja = analytic_jacobian_cproj(case, y, int(k))
            worst = max(worst, float(np.linalg.norm(Jf - Ja, 2) / np.linalg.norm(Ja, 2)))
    return worst


def orbit_decay(case: EnsnareCase, points, k_max: int = 1000, ks=None) -> DecaySeries:
    """max over points of the chart distance |a^k(pt)| to q(e) (the chart origin)."""
    Y = np.array([to_chart(p) for p in points])
    ks = default_ks(k_max, include_zero=False) if ks is None else np.asarray(ks)
    vals = [float(np.max(np.linalg.norm(chart_map(case, Y, int(k)), axis=1))) for k in ks]
    return DecaySeries("orbit", ks, np.array(vals), {"points": len(Y)})


def orbit_rates(case: EnsnareCase, points, kmin: int = 50, kmax: int = 1000, count: int = 30) -> dict:
    """Per-point log-log slope of |a^k(pt)| over [kmin, kmax] and C = max k |a^k(pt)|."""
    Y = np.array([to_chart(p) for p in points])
    ks = np.unique(np.round(np.geomspace(kmin, kmax, count)).astype(int))
    D = np.stack([np.linalg.norm(chart_map(case, Y, int(k)), axis=1) for k in ks], axis=1)
    slopes = np.polyfit(np.log(ks), np.log(D).T, 1)[0]
    return {"slopes": slopes, "C": float(np.max(ks * D)), "ks": ks, "distances": D}


# ---------------------------------------------------------------------------
# sampling


def sample_complement(case: EnsnareCase, rng: np.random.Generator, n: int, shell=(0.5, 1.5), kmax: int = 1000) -> list[HomogeneousPoint]:
    """Chart points off Fix(a) whose forward orbits stay inside the chart.

    cproj/quat: ``x = x_ker + conj(beta) w / |beta|^2`` with ``|beta(x)| / |beta|``
    in the shell; cr: x in the unit ball and Im c in +-shell.
    """
    model, a = case.model, case.a
    out: list[HomogeneousPoint] = []
    ks = np.arange(0, kmax + 1)
    while len(out) < n:
        if model.kind in ("cproj", "quat"):
            f = model.field.real_dim
            z = rng.standard_normal(model.n * f)
            z = z.reshape(-1, 4) if f == 4 else _r2c(z)
            nb2 = _beta_norm2(a)
            bz = a.beta_of(z)
            conjb = _conj_field(model, a.beta)
            if f == 4:
                xker = z - hamilton(conjb, bz[None]) / nb2
                w = rng.standard_normal(4)
                w *= np.sqrt(nb2) * rng.uniform(*shell) / np.linalg.norm(w)
                x = xker + hamilton(conjb, w[None]) / nb2
                den = np.stack([np.ones_like(ks, dtype=float), *(np.zeros_like(ks, dtype=float),) * 3], -1) + ks[:, None] * w
                ok = np.min(np.linalg.norm(den, axis=1)) >= 0.2
                y = x.reshape(-1)
            else:
                xker = z - conjb * bz / nb2
                w = np.sqrt(nb2) * rng.uniform(*shell) * np.exp(2j * np.pi * rng.uniform())
                x = xker + conjb * w / nb2
                ok = np.min(np.abs(1.0 + ks * w)) >= 0.2
                y = _c2r(x)
        else:
            x = rng.standard_normal(2 * model.n)
            x *= rng.uniform() ** (1.0 / x.size) / np.linalg.norm(x)
            u = rng.choice([-1.0, 1.0]) * rng.uniform(*shell)
            y = np.concatenate([x, [u]])
            xc = _r2c(x)
            c = 1j * u - 0.5 * (xc.conj() @ model.Ipq @ xc).real
            rk = 1.0 + ks * (a.beta @ xc + 1j * c * a.s) - 0.5 * c * ks**2 * (a.b if not a.beta_zero else 0.0)
            ok = np.min(np.abs(rk)) >= 0.2
        if ok:
            out.append(from_chart(model, y))
    return out


def _null_in(basis: np.ndarray, Ipq: np.ndarray, rng) -> np.ndarray | None:
    """Nonzero x in span(basis) with conj(x) I x = 0, if the span has both signs."""
    if basis.shape[1] == 0:
        return None
    for _ in range(50):
        u = basis @ (rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1]))
        v = basis @ (rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1]))
        qu, qv = (u.conj() @ Ipq @ u).real, (v.conj() @ Ipq @ v).real
        if qu > 1e-3 and qv < -1e-3:
            cross = u.conj() @ Ipq @ v
            phase = np.exp(1j * (np.pi / 2 - np.angle(cross))) if abs(cross) > 0 else 1.0
            return np.sqrt(-qv) * u + np.sqrt(qu) * phase * v
    return None


def sample_fixed(case: EnsnareCase, rng: np.random.Generator, n: int) -> list[HomogeneousPoint]:
    """Points satisfying the analytic fixed-set descriptor (some off the chart)."""
    model, a = case.model, case.a
    out = []
    for j in range(n):
        off_chart = j % 4 == 3
        if model.kind in ("cproj", "quat"):
            f = model.field.real_dim
            z = rng.standard_normal(model.n * f)
            z = z.reshape(-1, 4) if f == 4 else _r2c(z)
            if not a.beta_zero:
                conjb = _conj_field(model, a.beta)
                bz = a.beta_of(z)
                z = z - (hamilton(conjb, bz[None]) if f == 4 else conjb * bz) / _beta_norm2(a)
                if np.linalg.norm(z) < 1e-12:  # ker beta = 0 (m = 1)
                    z = np.zeros_like(z)
            if f == 4:
                r = np.zeros(4) if off_chart and np.any(z) else rng.standard_normal(4)
                v = np.concatenate([r[None], z])
            else:
                r = 0.0 if off_chart and np.any(z) else complex(*rng.standard_normal(2))
                v = np.concatenate([[r], z])
        else:
            basis = np.eye(model.n, dtype=complex) if a.beta_zero else null_space(a.beta[None, :])
            x = _null_in(basis, model.Ipq, rng)
            if x is None:
                x = np.zeros(model.n, dtype=complex)
            r = 0.0 if off_chart and np.any(x) else complex(*rng.standard_normal(2))
            v = np.concatenate([[r], x, [0.0]])
        out.append(HomogeneousPoint.from_vector(model, v))
    return out


# ---------------------------------------------------------------------------
# contraction hypothesis


def exact_matrix(a: IsotropyElement) -> list[list[Quaternion]]:
    """Exact copy of a with Fraction entries (complex numbers as w + x i)."""
    model = a.model
    N, n = model.size, model.n

    def q(v) -> Quaternion:
        if model.field is Field.QUATERNION:
            return Quaternion(*(Fraction(float(c)) for c in v))
        v = complex(v)
        return Quaternion(Fraction(v.real), Fraction(v.imag), Fraction(0), Fraction(0))

    one, zero = Quaternion(Fraction(1), Fraction(0), Fraction(0), Fraction(0)), Quaternion(*(Fraction(0),) * 4)
    A = [[one if i == j else zero for j in range(N)] for i in range(N)]
    beta = [q(b) for b in a.beta]
    if model.kind in ("cproj", "quat"):
        for j in range(n):
            A[0][j + 1] = beta[j]
        return A
    signs = [Fraction(1)] * model.p + [Fraction(-1)] * model.q
    b = sum((bj * sg * bj.conj() for bj, sg in zip(beta, signs)), zero)
    s = Fraction(a.s)
    for j in range(n):
        A[0][j + 1] = beta[j]
        A[j + 1][N - 1] = -(beta[j].conj() * signs[j])
    A[0][N - 1] = Quaternion(Fraction(0), s, Fraction(0), Fraction(0)) - b * Fraction(1, 2)
    return A


def _exact_mul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    zero = Quaternion(*(Fraction(0),) * 4)
    return [[sum((A[i][k] * B[k][j] for k in range(m)), zero) for j in range(p)] for i in range(n)]


def unipotency_certificate(a: IsotropyElement) -> dict:
    """Exact nilpotency index of a - 1 in rational arithmetic."""
    A = exact_matrix(a)
    N = len(A)
    one = Quaternion(Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    D = [[A[i][j] - (one if i == j else 0) for j in range(N)] for i in range(N)]
    P = D
    index = None
    for j in range(1, N + 1):
        if all(e.is_zero() for row in P for e in row):
            index = j
            break
        P = _exact_mul(P, D)
    expected = a.nilpotency_order() if a.nontrivial else 1
    if a.model.kind == "cr" and a.beta_zero and a.s != 0:
        expected = 2
    return {"index": index, "expected": expected, "unipotent": index is not None, "exact": True}


def _embed(model: ModelSpec, g: Mat) -> np.ndarray:
    return g.to_complex().data if model.field is Field.QUATERNION else np.asarray(g.data, dtype=complex)


def _normalised(model: ModelSpec, E: np.ndarray) -> np.ndarray:
    """Representative with determinant 1 (Study determinant for the real center)."""
    N = E.shape[0]
    det = complex(np.linalg.det(E))
    if model.field is Field.QUATERNION:
        return E / abs(det) ** (1.0 / N)
    return E / det ** (1.0 / N)


def _dist_e(model: ModelSpec, E: np.ndarray) -> np.ndarray:
    """min over central roots of unity z of ||z M - I||_F for det-1 representatives.

    Works on stacks; uses ||zM - I||^2 = ||M||^2 + N - 2 Re(z tr M).
    """
    N = E.shape[-1]
    nrm2 = np.sum(np.abs(E) ** 2, axis=(-2, -1))
    tr = np.trace(E, axis1=-2, axis2=-1)
    if model.field is Field.QUATERNION:
        best = np.abs(tr.real)  # roots +-1; the embedding doubles every term
        return np.sqrt(np.maximum(nrm2 + N - 2 * best, 0.0) / 2)
    roots = np.exp(2j * np.pi * np.arange(N) / N)
    best = np.max(np.real(np.multiply.outer(tr, roots)), axis=-1)
    return np.sqrt(np.maximum(nrm2 + N - 2 * best, 0.0))


@dataclass(frozen=True)
class ContractionOutcome:
    kind: str  # "identity" | "divergence" | "constant" | "levi" | "inconclusive"
    k: int | None
    d0: float


def _power_coeffs(case: EnsnareCase):
    """a^k = I + k B1 + k^2 B2 (exact: the closed form is quadratic in k)."""
    model = case.model
    P1, Pm = _embed(model, case.a.power(1)), _embed(model, case.a.power(-1))
    eye = np.eye(P1.shape[0])
    return (P1 - Pm) / 2, (P1 + Pm) / 2 - eye


def conjugation_witness(case: EnsnareCase, g: Mat, kmax: int = 1000, factor: float = 1e3, tol: float = 1e-9) -> ContractionOutcome:
    """Classify the orbit a^k g a^-k, k <= kmax, against convergence to e."""
    model = case.model
    Mn = _normalised(model, _embed(model, g))
    d0 = float(_dist_e(model, Mn))
    if d0 <= tol:
        return ContractionOutcome("identity", 0, d0)
    # Levi witness: conjugation by P+ keeps the G0 projection of an element of P
    if subgroup_member(model, g, "P", tol=1e-9):
        lev = _levi_part(model, g)
        if float(_dist_e(model, _normalised(model, _embed(model, lev)))) > tol:
            return ContractionOutcome("levi", 0, d0)
    B1, B2 = _power_coeffs(case)
    k = np.arange(1, kmax + 1, dtype=float)[:, None, None]
    eye = np.eye(Mn.shape[0])
    Ak = eye + k * B1 + k * k * B2
    Aik = eye - k * B1 + k * k * B2
    Mk = Ak @ Mn @ Aik
    dk = _dist_e(model, Mk)
    hit = np.flatnonzero(dk > factor * d0)
    if hit.size:
        return ContractionOutcome("divergence", int(hit[0] + 1), d0)
    if np.max(np.linalg.norm(Mk - Mn, axis=(1, 2))) <= tol * max(1.0, np.linalg.norm(Mn)):
        return ContractionOutcome("constant", kmax, d0)
    return ContractionOutcome("inconclusive", None, d0)


def _levi_part(model: ModelSpec, g: Mat) -> Mat:
    keep = (model.grade_table == 0).astype(float)
    if g.field is Field.QUATERNION:
        return Mat(g.data * keep[:, :, None], g.field)
    return Mat(g.data * keep, g.field)


def contraction_hypothesis(case: EnsnareCase, samples, kmax: int = 1000) -> dict:
    cert = unipotency_certificate(case.a)
    outcomes = [conjugation_witness(case, g, kmax) for g in samples]
    counts: dict[str, int] = {}
    for o in outcomes:
        counts[o.kind] = counts.get(o.kind, 0) + 1
    return {
        "certificate": cert,
        "outcomes": outcomes,
        "counts": counts,
        "inconclusive": counts.get("inconclusive", 0),
        "pass": cert["unipotent"] and cert["index"] == cert["expected"] and counts.get("inconclusive", 0) == 0,
    }


def random_group_samples(model: ModelSpec, rng: np.random.Generator, n: int, scale: float = 1.0) -> list[Mat]:
    """Products of exponentials of random algebra elements (generic elements of G)."""
    from .models import random_algebra_element

    out = []
    for _ in range(n):
        X = random_algebra_element(model, rng, scale=scale)
        out.append(X.exp())
    return out


# ---------------------------------------------------------------------------
# verdict


def ensnare_verdict(case: EnsnareCase, tolerances: dict | None = None, seed: int = 0) -> dict:
    """Aggregate the ensnaring sub-checks into a pass/fail-with-evidence record."""
    tol = {
        "fixed": 1e-10,
        "move": 1e-6,
        "exponent_window": (-1.2, -0.8),
        "jacobian_window": (-2.2, -0.8),
        "k_max": 1000,
        "n_samples": 50,
    }
    tol.update(tolerances or {})
    rng = np.random.default_rng(seed)
    report: dict = {"model": case.model.describe(), "descriptor": case.fixed_descriptor, "codimension": case.codimension}
    if not case.a.nontrivial:
        report.update(status="FAIL", reason="a is the identity: Fix(a) is everything, so U is empty")
        return report
    try:
        check_hypotheses(case)
    except RejectedCase as exc:
        report.update(status="REJECTED", reason=str(exc))
        return report
    ns = tol["n_samples"]
    fixed = sample_fixed(case, rng, ns)
    fixed_err = max(point_distance(act(case.a.matrix, p), p) for p in fixed)
    comp = sample_complement(case, rng, ns)
    moves = [float(np.linalg.norm(orbit_chart(case, p, 1) - to_chart(p))) for p in comp]
    invariant = all(not case.in_fixed(orbit(case, p, 1), tol=1e-9) for p in comp)
    sh = shrink_check(case, tol["k_max"])
    jac = jacobian_decay(case, tol["k_max"])
    orb = orbit_decay(case, comp, tol["k_max"])
    gs = random_group_samples(case.model, rng, ns)
    con = contraction_hypothesis(case, gs, tol["k_max"])
    lo, hi = tol["exponent_window"]
    jlo, jhi = tol["jacobian_window"]
    checks = {
        "fixed_set_exact": fixed_err <= tol["fixed"],
        "complement_moves": min(moves) > tol["move"],
        "U_invariant": invariant,
        "shrink_decay": lo <= sh.exponent <= hi and sh.monotone_after(sh.burn_in) and sh.burn_in < len(sh.k) // 2,
        "jacobian_decay": jlo <= jac.exponent <= jhi and jac.last < jac.values[0],
        "orbit_decay": lo <= orb.exponent <= hi,
        "contraction": con["pass"],
    }
    report.update(
        status="PASS" if all(checks.values()) else "FAIL",
        checks=checks,
        evidence={
            "fixed_error": fixed_err,
            "min_move": min(moves),
            "shrink_exponent": sh.exponent,
            "shrink_last": sh.last,
            "jacobian_exponent": jac.exponent,
            "jacobian_last": jac.last,
            "orbit_exponent": orb.exponent,
            "unipotency_index": con["certificate"]["index"],
            "witness_counts": con["counts"],
        },
        series={"shrink": sh, "jacobian": jac, "orbit": orb},
    )
    return report
