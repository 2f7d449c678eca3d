"""Cartan geometries (bundle, omega) realised through group-valued charts.

Bundle points are :class:`Mat` group representatives and tangent vectors are
ambient matrices ``gdot`` of the same shape.  Four variants:

klein             the model group with its Maurer-Cartan form
open_restriction  the Maurer-Cartan form on an open subset given by a predicate
quotient          Z^r \\ G for integer translations (affine/euclid only)
perturbed         omega_MC + eps * f(x) <c, dx> Ad(A^{-1}) B0, a non-flat
                  geometry on Aff(m) or Iso(m)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import Field, Mat
from .models import (
    AlgebraElement,
    HomogeneousPoint,
    ModelSpec,
    act,
    bracket,
    to_chart,
)

VARIANTS = ("klein", "open_restriction", "quotient", "perturbed")


class EscapeError(RuntimeError):
    """A flow or antidevelopment left the domain; ``t_escape`` is the exit time."""

    def __init__(self, t_escape: float, msg: str = ""):
        super().__init__(msg or f"escaped the domain at t = {t_escape:.9g}")
        self.t_escape = float(t_escape)


class DomainError(ValueError):
    pass


class LiftError(RuntimeError):
    pass


def base_point(model: ModelSpec, g: Mat) -> np.ndarray:
    """Real chart coordinates of the projection of g to G/H."""
    if model.kind in ("affine", "euclid"):
        return np.array(g.data[:-1, -1], dtype=float)
    return to_chart(act(g, HomogeneousPoint.basepoint(model)))


@dataclass(frozen=True)
class Domain:
    """Open subset of G, described by a predicate on group representatives."""

    predicate: Callable[[Mat], bool]
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, g: Mat) -> bool:
        return bool(self.predicate(g))


def slab_domain(model: ModelSpec, width: float, axis: int = 0, center: float = 0.0) -> Domain:
    """Points whose base coordinate ``axis`` lies strictly within ``width/2`` of ``center``."""
    half = width / 2.0

    def pred(g: Mat) -> bool:
        return abs(base_point(model, g)[axis] - center) < half

    return Domain(pred, "slab", {"width": width, "axis": axis, "center": center})


def ball_domain(model: ModelSpec, radius: float, center=None) -> Domain:
    c0 = np.zeros(model.base_dim) if center is None else np.asarray(center, dtype=float)

    def pred(g: Mat) -> bool:
        return float(np.linalg.norm(base_point(model, g) - c0)) < radius

    return Domain(pred, "ball", {"radius": radius, "center": c0.tolist()})


@dataclass(frozen=True)
class Perturbation:
    """Data of the curvature perturbation ``f(x) <c, dx> B0`` placed in the H block."""

    B0: np.ndarray
    c: np.ndarray
    x0: np.ndarray
    radius: float = 1.0

    def bump(self, x: np.ndarray) -> float:
        u = float(np.sum((np.asarray(x) - self.x0) ** 2)) / self.radius**2
        if u >= 1.0:
            return 0.0
        return float(np.exp(1.0 - 1.0 / (1.0 - u)))

    def grad(self, x: np.ndarray) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.x0
        u = float(np.sum(d**2)) / self.radius**2
        if u >= 1.0:
            return np.zeros_like(d)
        return self.bump(x) * (-1.0 / (1.0 - u) ** 2) * 2.0 * d / self.radius**2


def default_perturbation(model: ModelSpec) -> Perturbation:
    m = model.m
    if m < 2:
        raise ValueError("perturbed geometry needs m >= 2")
    B0 = np.zeros((m, m))
    if model.kind == "euclid":
        B0[0, 1], B0[1, 0] = 2.0, -2.0
    else:
        B0[0, 1], B0[1, 0] = 2.0, 1.0
    c = np.zeros(m)
    c[0] = 1.0
    return Perturbation(B0=B0, c=c, x0=np.zeros(m), radius=1.0)


@dataclass(frozen=True)
class GeometryHandle:
    model: ModelSpec
    variant: str = "klein"
    domain: Domain | None = None
    rank: int = 0
    eps: float = 0.0
    perturbation: Perturbation | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "open_restriction" and self.domain is None:
            raise ValueError("open_restriction needs a domain")
        if self.variant in ("quotient", "perturbed") and self.model.kind not in ("affine", "euclid"):
            raise ValueError(f"{self.variant} geometry is only built over affine/euclid models")
        if self.variant == "quotient" and not 1 <= self.rank <= self.model.m:
            raise ValueError("quotient rank must be between 1 and m")
        if self.variant == "perturbed":
            if self.perturbation is None:
                object.__setattr__(self, "perturbation", default_perturbation(self.model))
            B0 = self.perturbation.B0
            if self.model.kind == "euclid" and np.linalg.norm(B0 + B0.T) > 1e-14:
                raise ValueError("euclid perturbation must be antisymmetric")

    # constructors ---------------------------------------------------------
    @classmethod
    def klein(cls, model: ModelSpec) -> "GeometryHandle":
        return cls(model, "klein")

    @classmethod
    def open_restriction(cls, model: ModelSpec, domain: Domain) -> "GeometryHandle":
        return cls(model, "open_restriction", domain=domain)

    @classmethod
    def quotient(cls, model: ModelSpec, rank: int) -> "GeometryHandle":
        return cls(model, "quotient", rank=rank)

    @classmethod
    def perturbed(cls, model: ModelSpec, eps: float, perturbation: Perturbation | None = None) -> "GeometryHandle":
        return cls(model, "perturbed", eps=eps, perturbation=perturbation)

    # basic data -----------------------------------------------------------
    def identity(self) -> Mat:
        return Mat.eye_like(self.model.size, self.model.field)

    def contains(self, g: Mat) -> bool:
        if self.variant == "open_restriction":
            return self.domain(g)
        return True

    def check_point(self, g: Mat) -> None:
        if not self.contains(g):
            raise DomainError("point outside the domain")

    def reduce(self, g: Mat) -> Mat:
        """Fundamental-domain representative (identity map except for quotients)."""
        if self.variant != "quotient":
            return g
        return self.deck(-np.floor(g.data[: self.rank, -1])) @ g

    def deck(self, n) -> Mat:
        """Left translation by the integer vector n (padded to m)."""
        m = self.model.m
        d = np.eye(m + 1)
        d[: len(n), -1] = n
        return Mat(d, Field.REAL)

    def base(self, g: Mat) -> np.ndarray:
        return base_point(self.model, g)

    # omega ----------------------------------------------------------------
    def _pert_block(self, g: Mat) -> np.ndarray:
        # Ad(A^{-1}) B0 as an (m+1)x(m+1) matrix in the H block
        m = self.model.m
        A = g.data[:m, :m]
        K = np.zeros((m + 1, m + 1))
        K[:m, :m] = np.linalg.solve(A, self.perturbation.B0 @ A)
        return K

    def omega_at(self, g: Mat, gdot: Mat) -> AlgebraElement:
        self.check_point(g)
        Y = g.inv() @ gdot
        if self.variant != "perturbed" or self.eps == 0.0:
            return AlgebraElement(self.model, Y)
        P = self.perturbation
        x, dx = g.data[:-1, -1], gdot.data[:-1, -1]
        coef = self.eps * P.bump(x) * float(P.c @ dx)
        return AlgebraElement(self.model, Y + Mat(coef * self._pert_block(g), Field.REAL))

    def omega_inv(self, g: Mat, X: AlgebraElement) -> Mat:
        """The tangent vector at g with omega value X."""
        self.check_point(g)
        if self.variant != "perturbed" or self.eps == 0.0:
            return g @ X.matrix
        return self._vf_raw(g, X)

    def omega_analytic_curvature(self, g: Mat, X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
        """Omega(omega^-1 X, omega^-1 Y), differentiating omega in closed form.

        Uses Omega(u, w) = D_u omega(w) - D_w omega(u) + [omega(u), omega(w)]
        for ambient constant vectors u, w.
        """
        u, w = self.omega_inv(g, X).data, self.omega_inv(g, Y).data
        gi = g.inv().data

        def D(a, b):
            # derivative along a of omega_g(b) with b held fixed
            out = -gi @ a @ gi @ b
            if self.variant == "perturbed" and self.eps != 0.0:
                P = self.perturbation
                m = self.model.m
                x = g.data[:m, m]
                K = self._pert_block(g)
                Ahat_inv_a = np.zeros_like(K)
                Ahat_inv_a[:m, :m] = np.linalg.solve(g.data[:m, :m], a[:m, :m])
                dK = K @ Ahat_inv_a - Ahat_inv_a @ K
                cb = float(P.c @ b[:m, m])
                out = out + self.eps * (float(P.grad(x) @ a[:m, m]) * cb * K + P.bump(x) * cb * dK)
            return out

        Om = D(u, w) - D(w, u) + X.matrix.data @ Y.matrix.data - Y.matrix.data @ X.matrix.data
        return AlgebraElement(self.model, Mat(Om, self.model.field))

    # flows ----------------------------------------------------------------
    def _flow_cover(self, g: Mat, X: AlgebraElement, t: float, substeps: int | None = None) -> Mat:
        """Flow on group representatives, ignoring domain and quotient."""
        if t == 0.0:
            return g
        if self.variant != "perturbed" or self.eps == 0.0:
            return g @ X.matrix.scale(t).exp()
        n = substeps or max(1, int(np.ceil(abs(t) / 0.01)))
        dt = t / n
        Gm = g
        for _ in range(n):
            # classical RK4 in the ambient matrix space
            k1 = self._vf_raw(Gm, X)
            k2 = self._vf_raw(Gm + k1.scale(dt / 2), X)
            k3 = self._vf_raw(Gm + k2.scale(dt / 2), X)
            k4 = self._vf_raw(Gm + k3.scale(dt), X)
            Gm = Gm + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6)
        return Gm

    def _vf_raw(self, g: Mat, X: AlgebraElement) -> Mat:
        # the perturbation never touches the translation column, so dx = A v with v from X
        P = self.perturbation
        x = g.data[:-1, -1]
        dx = g.data[:-1, :-1] @ X.matrix.data[:-1, -1]
        coef = self.eps * P.bump(x) * float(P.c @ dx)
        return g @ (X.matrix - Mat(coef * self._pert_block(g), Field.REAL))

    def flow_const(self, g: Mat, X: AlgebraElement, t: float, samples: int = 64, tol: float = 1e-9) -> Mat:
        """Endpoint of the omega-constant flow of X for time t from g."""
        self.check_point(g)
        if t == 0.0:
            return g
        if self.variant == "open_restriction":
            self._check_escape(g, X, t, samples, tol)
        return self.reduce(self._flow_cover(g, X, t))

    def _check_escape(self, g: Mat, X: AlgebraElement, t: float, samples: int, tol: float) -> None:
        ts = np.linspace(0.0, t, samples + 1)
        prev = 0.0
        for s in ts[1:]:
            if not self.domain(self._flow_cover(g, X, s)):
                lo, hi = prev, s
                while abs(hi - lo) > tol:
                    mid = 0.5 * (lo + hi)
                    if self.domain(self._flow_cover(g, X, mid)):
                        lo = mid
                    else:
                        hi = mid
                raise EscapeError(0.5 * (lo + hi))
            prev = s

    # curvature ------------------------------------------------------------
    def curvature_fd(self, g: Mat, X: AlgebraElement, Y: AlgebraElement, h: float) -> AlgebraElement:
        """Commutator-of-flows estimate of Omega(omega^-1 X, omega^-1 Y).

        q = phi^Y_{-h} phi^X_{-h} phi^Y_h phi^X_h (g) and Omega ~ [X, Y] - omega_g((q - g) / h^2);
        the error is O(h).
        """
        if h <= 0:
            raise ValueError("h must be positive")
        self.check_point(g)
        q = g
        for Z, s in ((X, h), (Y, h), (X, -h), (Y, -h)):
            q = self._flow_cover(q, Z, s, substeps=1)
            if not self.contains(q):
                raise EscapeError(h, "stencil flow left the domain")
        tangent = (q - g).scale(1.0 / (h * h))
        return bracket(X, Y) - self.omega_at(g, tangent)


def geometry_from_config(cfg: dict, model: ModelSpec) -> GeometryHandle:
    cfg = dict(cfg)
    variant = cfg.pop("variant", "klein")
    allowed = {"eps", "rank", "width", "axis", "center", "radius"}
    extra = set(cfg) - allowed
    if extra:
        raise ValueError(f"unknown geometry fields: {sorted(extra)}")
    if variant == "klein":
        return GeometryHandle.klein(model)
    if variant == "quotient":
        return GeometryHandle.quotient(model, int(cfg.get("rank", model.m)))
    if variant == "perturbed":
        return GeometryHandle.perturbed(model, float(cfg.get("eps", 1e-2)))
    if variant == "open_restriction":
        if "radius" in cfg:
            return GeometryHandle.open_restriction(model, ball_domain(model, float(cfg["radius"])))
        width = float(cfg.get("width", 1.0))
        return GeometryHandle.open_restriction(
            model, slab_domain(model, width, int(cfg.get("axis", 0)), float(cfg.get("center", 0.0)))
        )
    raise ValueError(f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# quotient lifts


@dataclass(frozen=True)
class LiftResult:
    values: list  # unwrapped representatives (Mat) or base points (arrays)
    crossings: list  # (sample index, deck vector applied there)
    deck: np.ndarray  # total integer translation accumulated


def quotient_lift(G: GeometryHandle, values, max_step: float = 0.4) -> LiftResult:
    """Continuous lift through the fundamental domain of a sampled path on Z^r \\ G.

    ``values`` is a sequence of Mat representatives or of base points in R^m.
    A crossing is detected as a nearest-integer jump between consecutive samples.
    """
    if G.variant != "quotient":
        raise ValueError("quotient_lift needs a quotient geometry")
    r = G.rank
    as_mat = isinstance(values[0], Mat)
    xs = [np.asarray(v.data[:r, -1] if as_mat else np.asarray(v, dtype=float)[:r]) for v in values]
    total = np.zeros(r)
    out = [values[0]]
    crossings = []
    for n in range(1, len(values)):
        step = xs[n] - xs[n - 1]
        jump = np.round(step)
        if np.max(np.abs(step - jump)) > max_step:
            raise LiftError(f"sample step {n} too coarse to resolve the lift")
        if np.any(jump != 0):
            crossings.append((n, -jump.astype(int)))
            total = total - jump
        if as_mat:
            out.append(G.deck(total) @ values[n])
        else:
            v = np.array(values[n], dtype=float, copy=True)
            v[:r] += total
            out.append(v)
    return LiftResult(out, crossings, total.astype(int))
