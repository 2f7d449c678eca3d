"""Model geometries (G, P): gradings, subgroups, homogeneous points and charts.

Supported kinds:

* ``cproj(m)``  PGL(m+1, C) with the stabiliser of a line, basepoint ``e_0``
* ``quat(m)``   PGL(m+1, H), same block structure over the quaternions
* ``cr(p, q)``  PU(h_pq) acting on the null cone of the Hermitian form
  ``2 Re(conj(z_0) z_{n+1}) + sum_{j<=p} |z_j|^2 - sum_{j>p} |z_j|^2``
* ``affine(m)`` and ``euclid(m)``  Aff(m) / Iso(m) as ``[[A, x], [0, 1]]``;
  no grading, used for the flat torus and the perturbed test geometry.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import CenterTag, Field, Mat, canon
from .algebra.scalars import hamilton, qinv

KINDS = ("cproj", "quat", "cr", "affine", "euclid")
PARABOLIC = ("cproj", "quat", "cr")
SUBGROUPS = ("G-", "G0", "P+", "P")


class ModelMismatchError(ValueError):
    pass


class NotInAlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    m: int = 1
    p: int = 0
    q: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "cr":
            if self.p < 0 or self.q < 0 or self.p + self.q < 1:
                raise ValueError("cr(p, q) needs p, q >= 0 and p + q >= 1")
        elif self.m < 1:
            raise ValueError("m must be positive")

    @classmethod
    def cproj(cls, m: int) -> "ModelSpec":
        return cls("cproj", m=m)

    @classmethod
    def quat(cls, m: int) -> "ModelSpec":
        return cls("quat", m=m)

    @classmethod
    def cr(cls, p: int, q: int) -> "ModelSpec":
        return cls("cr", m=p + q, p=p, q=q)

    @classmethod
    def affine(cls, m: int) -> "ModelSpec":
        return cls("affine", m=m)

    @classmethod
    def euclid(cls, m: int) -> "ModelSpec":
        return cls("euclid", m=m)

    @property
    def n(self) -> int:
        """Size of the middle block (m, or p+q for cr)."""
        return self.p + self.q if self.kind == "cr" else self.m

    @property
    def size(self) -> int:
        return self.n + 2 if self.kind == "cr" else self.m + 1

    @property
    def field(self) -> Field:
        return {"cproj": Field.COMPLEX, "cr": Field.COMPLEX, "quat": Field.QUATERNION}.get(
            self.kind, Field.REAL
        )

    @property
    def center_tag(self) -> CenterTag:
        return {
            "cproj": CenterTag.COMPLEX,
            "quat": CenterTag.REAL,
            "cr": CenterTag.U1,
        }.get(self.kind, CenterTag.TRIVIAL)

    @property
    def depth(self) -> int | None:
        return {"cproj": 1, "quat": 1, "cr": 2}.get(self.kind)

    @property
    def is_parabolic(self) -> bool:
        return self.kind in PARABOLIC

    @property
    def base_dim(self) -> int:
        """Real dimension of G/H (= length of real chart vectors)."""
        f = self.field.real_dim
        if self.kind == "cr":
            return 2 * self.n + 1
        if self.kind in ("affine", "euclid"):
            return self.m
        return f * self.m

    @cached_property
    def Ipq(self) -> np.ndarray:
        return np.diag([1.0] * self.p + [-1.0] * self.q)

    @cached_property
    def hform(self) -> np.ndarray:
        """Gram matrix of h_pq; only meaningful for cr."""
        N = self.size
        Hm = np.zeros((N, N), dtype=complex)
        Hm[0, N - 1] = Hm[N - 1, 0] = 1.0
        Hm[1 : N - 1, 1 : N - 1] = self.Ipq
        return Hm

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.zeros(self.size, dtype=int)
        if self.is_parabolic:
            w[0] = 1
            if self.kind == "cr":
                w[-1] = -1
        return w

    @cached_property
    def grade_table(self) -> np.ndarray:
        """Grade of matrix entry (i, j), equal to w_i - w_j."""
        w = self.weights
        return w[:, None] - w[None, :]

    def grades(self) -> list[int]:
        k = self.depth
        if k is None:
            raise ValueError(f"{self.kind} carries no grading")
        return list(range(-k, k + 1))

    def describe(self) -> str:
        if self.kind == "cr":
            return f"cr({self.p},{self.q})"
        return f"{self.kind}({self.m})"


def model_from_config(cfg: dict) -> ModelSpec:
    """Build a model from ``{kind, m}`` or ``{kind: "cr", p, q}``."""
    cfg = dict(cfg)
    kind = cfg.pop("kind")
    allowed = {"p", "q"} if kind == "cr" else {"m"}
    extra = set(cfg) - allowed
    if extra:
        raise ValueError(f"unknown model fields: {sorted(extra)}")
    if kind == "cr":
        return ModelSpec.cr(int(cfg.get("p", 1)), int(cfg.get("q", 0)))
    return ModelSpec(kind, m=int(cfg.get("m", 1)))


# ---------------------------------------------------------------------------
# Lie algebra


def _mask(model: ModelSpec, M: Mat, keep: np.ndarray) -> Mat:
    if M.field is Field.QUATERNION:
        return Mat(M.data * keep[:, :, None], M.field)
    return Mat(M.data * keep, M.field)


def algebra_residual(model: ModelSpec, X: Mat) -> float:
    """How far X is from satisfying the defining relations of the Lie algebra."""
    if X.field is not model.field or X.shape != (model.size, model.size):
        raise ModelMismatchError(f"matrix {X!r} does not belong to {model.describe()}")
    if model.kind == "cr":
        Hm = model.hform
        return float(np.linalg.norm(X.data.conj().T @ Hm + Hm @ X.data))
    if model.kind in ("affine", "euclid"):
        res = float(np.linalg.norm(X.data[-1]))
        if model.kind == "euclid":
            A = X.data[:-1, :-1]
            res += float(np.linalg.norm(A + A.T))
        return res
    return 0.0


def reduce_center(model: ModelSpec, X: Mat) -> Mat:
    """Canonical representative of X modulo the centre of the Lie algebra."""
    n = model.size
    if model.kind == "cproj":
        return X - Mat.eye_like(n, X.field).scale(X.trace() / n)
    if model.kind == "quat":
        return X - Mat.eye_like(n, X.field).scale(X.trace().w / n)
    if model.kind == "cr":
        return X - Mat.eye_like(n, X.field).scale(1j * np.imag(X.trace()) / n)
    return X


@dataclass(frozen=True)
class AlgebraElement:
    model: ModelSpec
    matrix: Mat

    def __post_init__(self):
        if self.matrix.field is not self.model.field:
            raise ModelMismatchError("field of matrix does not match model")
        if self.matrix.shape != (self.model.size, self.model.size):
            raise ModelMismatchError("matrix size does not match model")

    def check(self, tol: float = 1e-10) -> "AlgebraElement":
        res = algebra_residual(self.model, self.matrix)
        if res > tol * max(1.0, self.matrix.norm()):
            raise NotInAlgebraError(f"not in the Lie algebra of {self.model.describe()} (residual {res:.2e})")
        return self

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_model(self, other)
        return AlgebraElement(self.model, self.matrix + other.matrix)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_model(self, other)
        return AlgebraElement(self.model, self.matrix - other.matrix)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.model, -self.matrix)

    def scale(self, c: float) -> "AlgebraElement":
        return AlgebraElement(self.model, self.matrix.scale(float(c)))

    def reduced(self) -> "AlgebraElement":
        return AlgebraElement(self.model, reduce_center(self.model, self.matrix))

    def norm(self) -> float:
        return self.matrix.norm()

    def exp(self) -> Mat:
        return self.matrix.exp()

    def grade_split(self, tol: float = 1e-10) -> dict[int, "AlgebraElement"]:
        return grade_split(self, tol)

    def component(self, i: int) -> "AlgebraElement":
        keep = (self.model.grade_table == i).astype(float)
        return AlgebraElement(self.model, _mask(self.model, self.matrix, keep))

    def off_pattern(self, i: int) -> float:
        """Norm of the entries outside the block pattern of grade ``i``."""
        keep = (self.model.grade_table != i).astype(float)
        return _mask(self.model, self.matrix, keep).norm()


def _same_model(X, Y):
    if X.model != Y.model:
        raise ModelMismatchError(f"{X.model.describe()} vs {Y.model.describe()}")


def bracket(X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    _same_model(X, Y)
    A, B = X.matrix, Y.matrix
    return AlgebraElement(X.model, reduce_center(X.model, A @ B - B @ A))


def grade_split(X: AlgebraElement, tol: float = 1e-10) -> dict[int, AlgebraElement]:
    """Components of X indexed by grade; they sum back to X."""
    model = X.model
    X.check(tol)
    return {i: X.component(i) for i in model.grades()}


def _unit(model: ModelSpec, i: int, j: int, unit) -> np.ndarray:
    N = model.size
    if model.field is Field.QUATERNION:
        d = np.zeros((N, N, 4))
        d[i, j] = unit
    else:
        d = np.zeros((N, N), dtype=complex if model.field is Field.COMPLEX else float)
        d[i, j] = unit
    return d


def _units(field: Field) -> list:
    if field is Field.QUATERNION:
        return list(np.eye(4))
    if field is Field.COMPLEX:
        return [1.0, 1j]
    return [1.0]


def _anti_hermitian_basis(n: int) -> list[np.ndarray]:
    out = []
    for a in range(n):
        S = np.zeros((n, n), dtype=complex)
        S[a, a] = 1j
        out.append(S)
    for a in range(n):
        for b in range(a + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[a, b], S[b, a] = 1.0, -1.0
            out.append(S)
            S = np.zeros((n, n), dtype=complex)
            S[a, b] = S[b, a] = 1j
            out.append(S)
    return out


def component_basis(model: ModelSpec, i: int) -> list[AlgebraElement]:
    """Real basis of the grading component g_i (before the centre quotient)."""
    N, n = model.size, model.n
    mats: list[np.ndarray] = []
    if model.kind in ("cproj", "quat"):
        units = _units(model.field)
        if i == -1:
            mats = [_unit(model, a, 0, u) for a in range(1, N) for u in units]
        elif i == 1:
            mats = [_unit(model, 0, b, u) for b in range(1, N) for u in units]
        elif i == 0:
            mats = [_unit(model, 0, 0, u) for u in units]
            mats += [_unit(model, a, b, u) for a in range(1, N) for b in range(1, N) for u in units]
    elif model.kind == "cr":
        Ipq = model.Ipq
        if i in (-2, 2):
            mats = [_unit(model, N - 1, 0, 1j) if i == -2 else _unit(model, 0, N - 1, 1j)]
        elif i in (-1, 1):
            for a in range(n):
                for u in (1.0, 1j):
                    vec = np.zeros(n, dtype=complex)
                    vec[a] = u
                    d = np.zeros((N, N), dtype=complex)
                    if i == -1:
                        d[1 : N - 1, 0] = vec
                        d[N - 1, 1 : N - 1] = -vec.conj() @ Ipq
                    else:
                        d[0, 1 : N - 1] = vec
                        d[1 : N - 1, N - 1] = -Ipq @ vec.conj()
                    mats.append(d)
        elif i == 0:
            for r in (1.0, 1j):
                d = np.zeros((N, N), dtype=complex)
                d[0, 0], d[N - 1, N - 1] = r, -np.conj(r)
                mats.append(d)
            for S in _anti_hermitian_basis(n):
                d = np.zeros((N, N), dtype=complex)
                d[1 : N - 1, 1 : N - 1] = Ipq @ S
                mats.append(d)
    else:
        raise ValueError(f"{model.kind} carries no grading")
    return [AlgebraElement(model, Mat(d, model.field)) for d in mats]


def algebra_dim(model: ModelSpec) -> int:
    """Real dimension of the matrix Lie algebra, from the rank of its defining relations."""
    N = model.size
    if model.kind in ("cproj", "quat"):
        return model.field.real_dim * N * N
    if model.kind == "affine":
        return model.m * (model.m + 1)
    if model.kind == "euclid":
        return model.m + model.m * (model.m - 1) // 2
    # cr: kernel of the real-linear map X -> X^* H + H X on C^{N x N}
    Hm = model.hform
    cols = []
    for a in range(N):
        for b in range(N):
            for u in (1.0, 1j):
                X = np.zeros((N, N), dtype=complex)
                X[a, b] = u
                Y = X.conj().T @ Hm + Hm @ X
                cols.append(np.concatenate([Y.real.ravel(), Y.imag.ravel()]))
    L = np.array(cols).T
    return 2 * N * N - int(np.linalg.matrix_rank(L, tol=1e-9))


def random_algebra_element(model: ModelSpec, rng: np.random.Generator, grade: int | None = None, scale: float = 1.0) -> AlgebraElement:
    if model.kind in ("affine", "euclid"):
        m = model.m
        d = np.zeros((m + 1, m + 1))
        A = rng.standard_normal((m, m))
        d[:m, :m] = A - A.T if model.kind == "euclid" else A
        d[:m, m] = rng.standard_normal(m)
        return AlgebraElement(model, Mat(scale * d, Field.REAL))
    grades = [grade] if grade is not None else model.grades()
    total = None
    for g in grades:
        for B in component_basis(model, g):
            term = B.scale(scale * rng.standard_normal())
            total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------
# group


def _admissible_unit_scale(model: ModelSpec, g: Mat, i: int, j: int, tol: float):
    """Rescale g by an admissible central scalar so that entry (i, j) becomes 1."""
    tag = model.center_tag
    if g.field is Field.QUATERNION:
        v = g.data[i, j]
        if np.linalg.norm(v[1:]) > tol * max(1.0, abs(v[0])) or abs(v[0]) < tol:
            return None
        return g.scale(1.0 / v[0])
    v = g.data[i, j]
    if tag is CenterTag.TRIVIAL:
        return g if abs(v - 1) <= tol else None
    if abs(v) < tol:
        return None
    if tag is CenterTag.REAL and abs(np.imag(v)) > tol * abs(v):
        return None
    if tag is CenterTag.U1 and abs(abs(v) - 1) > tol:
        return None
    return g.scale(1.0 / v)


def unitary_residual(model: ModelSpec, g: Mat) -> float:
    Hm = model.hform
    return float(np.linalg.norm(g.data.conj().T @ Hm @ g.data - Hm))


def subgroup_member(model: ModelSpec, g: Mat, which: str, tol: float = 1e-10) -> bool:
    """Block-pattern membership of g (mod centre) in G-, G0, P+ or P."""
    if which == "H":
        which = "P"
    if which not in SUBGROUPS:
        raise ValueError(f"unknown subgroup {which!r}")
    N, n = model.size, model.n
    scale = max(1.0, g.norm())
    if model.kind == "cr" and unitary_residual(model, g) > tol * scale * scale:
        return False
    if model.kind == "euclid":
        A = g.data[:-1, :-1]
        if np.linalg.norm(A.T @ A - np.eye(model.m)) > tol * scale * scale:
            return False
    zero = lambda M: M.norm() <= tol * scale  # noqa: E731
    eye = lambda M: (M - Mat.eye_like(M.rows, M.field)).norm() <= tol * scale  # noqa: E731

    if model.kind in ("affine", "euclid"):
        m = model.m
        if not zero(g[m : m + 1, :m]) or abs(g.data[m, m] - 1) > tol:
            return False
        if which == "G-":
            return eye(g[:m, :m])
        if which == "P+":
            return eye(g[:m, :m]) and zero(g[:m, m : m + 1])
        return zero(g[:m, m : m + 1])

    if which in ("G0", "P"):
        low_ok = zero(g[1:N, 0:1])
        if model.kind == "cr":
            low_ok = low_ok and zero(g[N - 1 : N, 1 : N - 1])
        if which == "P":
            return low_ok
        up_ok = zero(g[0:1, 1:N])
        if model.kind == "cr":
            up_ok = up_ok and zero(g[1 : N - 1, N - 1 : N])
        return low_ok and up_ok

    h = _admissible_unit_scale(model, g, 0, 0, tol * scale)
    if h is None:
        return False
    if model.kind in ("cproj", "quat"):
        if which == "G-":
            return zero(h[0:1, 1:N]) and eye(h[1:N, 1:N])
        return zero(h[1:N, 0:1]) and eye(h[1:N, 1:N])
    # cr: unitarity already fixes the remaining entries given the pattern
    mid = h[1 : N - 1, 1 : N - 1]
    if which == "G-":
        return zero(h[0:1, 1:N]) and zero(h[1 : N - 1, N - 1 : N]) and eye(mid) and abs(h.data[-1, -1] - 1) <= tol * scale
    return zero(h[1:N, 0:1]) and zero(h[N - 1 : N, 1 : N - 1]) and eye(mid) and abs(h.data[-1, -1] - 1) <= tol * scale


def adjoint(g: Mat, X: AlgebraElement) -> AlgebraElement:
    if g.field is not X.model.field or g.shape != X.matrix.shape:
        raise ModelMismatchError("adjoint: group element does not match model")
    return AlgebraElement(X.model, reduce_center(X.model, g @ X.matrix @ g.inv()))


def group_equiv(model: ModelSpec, A: Mat, B: Mat, tol: float = 1e-10) -> bool:
    """Equality in G, i.e. modulo the centre."""
    cA, cB = canon(A, model.center_tag), canon(B, model.center_tag)
    return (cA - cB).norm() <= tol * max(1.0, cA.norm())


# ---------------------------------------------------------------------------
# homogeneous space


def _c2r(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1).reshape(-1)


def _r2c(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1, 2)
    return v[:, 0] + 1j * v[:, 1]


class ChartError(ValueError):
    """Point lies on the boundary of the standard chart."""


@dataclass(frozen=True)
class HomogeneousPoint:
    model: ModelSpec
    coords: Mat  # column, scaled to unit norm

    def __post_init__(self):
        c = self.coords
        if c.field is not self.model.field or c.shape != (self.model.size, 1):
            raise ModelMismatchError("coordinate vector does not match model")
        nrm = c.norm()
        if nrm < 1e-300:
            raise ValueError("zero homogeneous coordinate vector")
        if self.model.kind in ("affine", "euclid"):
            last = c.data[-1, 0]
            if abs(last) < 1e-14:
                raise ValueError("affine point at infinity")
            object.__setattr__(self, "coords", c.scale(1.0 / last))
        else:
            object.__setattr__(self, "coords", c.scale(1.0 / nrm))

    @classmethod
    def from_vector(cls, model: ModelSpec, vec) -> "HomogeneousPoint":
        if model.field is Field.QUATERNION:
            return cls(model, Mat(np.asarray(vec, dtype=float).reshape(-1, 1, 4), model.field))
        return cls(model, Mat(np.asarray(vec).reshape(-1, 1), model.field))

    @classmethod
    def basepoint(cls, model: ModelSpec) -> "HomogeneousPoint":
        """q(e): the first basis vector (the origin for affine kinds)."""
        if model.kind in ("affine", "euclid"):
            v = np.zeros(model.size)
            v[-1] = 1.0
            return cls.from_vector(model, v)
        v = np.zeros((model.size, 4)) if model.field is Field.QUATERNION else np.zeros(model.size, dtype=complex)
        v[0] = 1.0
        return cls.from_vector(model, v)

    # pieces (r, x, c) of the coordinate vector
    @property
    def vector(self) -> np.ndarray:
        return self.coords.data[:, 0]

    def null_residual(self) -> float:
        """Relative value of the h_pq quadratic form (cr only)."""
        if self.model.kind != "cr":
            return 0.0
        v = self.vector
        return float(abs(np.vdot(v, self.model.hform @ v)) / np.vdot(v, v).real)

    def equivalent(self, other: "HomogeneousPoint", tol: float = 1e-10) -> bool:
        return point_distance(self, other) <= tol

    def to_chart(self) -> np.ndarray:
        return to_chart(self)


def point_distance(a: HomogeneousPoint, b: HomogeneousPoint) -> float:
    """Residual of the best right-scalar fit ``b ~ a lam`` for unit representatives."""
    if a.model != b.model:
        raise ModelMismatchError("points from different models")
    if a.model.kind in ("affine", "euclid"):
        return float(np.linalg.norm(a.vector - b.vector))
    u, w = a.coords, b.coords
    u, w = u.scale(1.0 / u.norm()), w.scale(1.0 / w.norm())
    lam_m = u.H @ w  # 1x1
    if u.field is Field.QUATERNION:
        lam = lam_m.data[0, 0]
    else:
        lam = lam_m.data[0, 0].item()
    return (u.scale(lam, side="right") - w).norm()


def act(g: Mat, pt: HomogeneousPoint) -> HomogeneousPoint:
    """Left action of a group representative on homogeneous coordinates."""
    if g.field is not pt.model.field or g.shape != (pt.model.size, pt.model.size):
        raise ModelMismatchError("act: group element does not match model")
    out = g @ pt.coords
    if out.norm() < 1e-14 * max(1.0, g.norm()):
        raise ValueError("act: image coordinate vector numerically zero")
    return HomogeneousPoint(pt.model, out)


def chart_denominator(pt: HomogeneousPoint):
    return pt.vector[0] if pt.model.is_parabolic else pt.vector[-1]


def to_chart(pt: HomogeneousPoint, tol: float = 1e-14) -> np.ndarray:
    """Real chart coordinates.

    cproj/quat: ``x r^{-1}``; cr: ``(x / r, Im(c / r))``; affine: the point.
    """
    model, v = pt.model, pt.vector
    if model.kind in ("affine", "euclid"):
        return np.real(v[:-1]).astype(float)
    if model.field is Field.QUATERNION:
        r = v[0]
        if np.linalg.norm(r) < tol:
            raise ChartError("r = 0: point outside the chart")
        return hamilton(v[1:], qinv(r)).reshape(-1)
    r = v[0]
    if abs(r) < tol:
        raise ChartError("r = 0: point outside the chart")
    if model.kind == "cproj":
        return _c2r(v[1:] / r)
    w = v / r
    return np.concatenate([_c2r(w[1:-1]), [w[-1].imag]])


def from_chart(model: ModelSpec, y) -> HomogeneousPoint:
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != model.base_dim:
        raise ValueError(f"chart vector of length {y.size}, expected {model.base_dim}")
    if model.kind in ("affine", "euclid"):
        return HomogeneousPoint.from_vector(model, np.concatenate([y, [1.0]]))
    if model.field is Field.QUATERNION:
        v = np.zeros((model.size, 4))
        v[0, 0] = 1.0
        v[1:] = y.reshape(-1, 4)
        return HomogeneousPoint.from_vector(model, v)
    if model.kind == "cproj":
        return HomogeneousPoint.from_vector(model, np.concatenate([[1.0], _r2c(y)]))
    x = _r2c(y[:-1])
    c = 1j * y[-1] - (x.conj() @ model.Ipq @ x).real / 2
    return HomogeneousPoint.from_vector(model, np.concatenate([[1.0], x, [c]]))


def random_point(model: ModelSpec, rng: np.random.Generator, scale: float = 1.0) -> HomogeneousPoint:
    return from_chart(model, scale * rng.standard_normal(model.base_dim))


# ---------------------------------------------------------------------------
# isotropy in P+


@dataclass(frozen=True)
class IsotropyElement:
    """``a`` in P+, parametrised by the covector beta (and s for cr)."""

    model: ModelSpec
    beta: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        model = self.model
        if not model.is_parabolic:
            raise ValueError("isotropy elements live in parabolic models")
        if model.field is Field.QUATERNION:
            b = np.asarray(self.beta, dtype=float).reshape(model.n, 4)
        else:
            b = np.asarray(self.beta, dtype=complex).reshape(model.n)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        if model.kind != "cr" and self.s != 0:
            raise ValueError("s is only defined for cr isotropies")
        object.__setattr__(self, "s", float(self.s))

    @property
    def b(self) -> float:
        """``beta I_pq conj(beta)^T`` (cr), real by construction."""
        if self.model.kind != "cr":
            raise ValueError("b is a cr quantity")
        return float((self.beta @ self.model.Ipq @ self.beta.conj()).real)

    @property
    def beta_zero(self) -> bool:
        return not np.any(self.beta)

    @property
    def nontrivial(self) -> bool:
        return not self.beta_zero or self.s != 0

    @property
    def non_null(self) -> bool:
        if not self.nontrivial:
            return False
        if self.model.kind == "cr" and not self.beta_zero:
            return self.b != 0.0
        return True

    def power(self, k: int) -> Mat:
        """Closed form of ``a^k`` (any integer k)."""
        model, N = self.model, self.model.size
        if model.field is Field.QUATERNION:
            d = np.zeros((N, N, 4))
            d[np.arange(N), np.arange(N), 0] = 1.0
            d[0, 1:] = k * self.beta
            return Mat(d, model.field)
        d = np.eye(N, dtype=complex)
        if model.kind == "cproj":
            d[0, 1:] = k * self.beta
            return Mat(d, model.field)
        d[0, 1 : N - 1] = k * self.beta
        d[0, N - 1] = 1j * k * self.s - 0.5 * k * k * self.b
        d[1 : N - 1, N - 1] = -k * (model.Ipq @ self.beta.conj())
        return Mat(d, model.field)

    @property
    def matrix(self) -> Mat:
        return self.power(1)

    def beta_of(self, x: np.ndarray):
        """``beta(x)`` for x in field format (quaternion rows or complex)."""
        if self.model.field is Field.QUATERNION:
            return np.sum(hamilton(self.beta, np.asarray(x, dtype=float).reshape(-1, 4)), axis=0)
        return complex(self.beta @ np.asarray(x, dtype=complex))

    def nilpotency_order(self) -> int:
        """Expected n with (a - 1)^n = 0."""
        if self.model.kind == "cr" and not self.beta_zero:
            return 3
        return 2


def isotropy_from_config(model: ModelSpec, beta, s: float = 0.0) -> IsotropyElement:
    beta = np.asarray(beta)
    if model.field is Field.QUATERNION:
        beta = np.asarray(beta, dtype=float)
        if beta.ndim == 1 and beta.size == model.n:  # real covector
            beta = np.stack([beta, *(np.zeros_like(beta),) * 3], axis=-1)
    elif np.iscomplexobj(beta) or beta.ndim == 1:
        beta = np.asarray(beta, dtype=complex)
    else:  # (n, 2) real pairs
        beta = beta[..., 0] + 1j * beta[..., 1]
    return IsotropyElement(model, beta, s)




def gminus_section(model: ModelSpec, y) -> Mat:
    """Group element over the chart point y that maps q(e) to it.

    Translations for affine kinds; the G- element for parabolic kinds (the
    Heisenberg-type lower block for cr).
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    N = model.size
    if model.kind in ("affine", "euclid"):
        d = np.eye(N)
        d[:-1, -1] = y
        return Mat(d, Field.REAL)
    if model.field is Field.QUATERNION:
        d = np.zeros((N, N, 4))
        d[np.arange(N), np.arange(N), 0] = 1.0
        d[1:, 0] = y.reshape(-1, 4)
        return Mat(d, model.field)
    d = np.eye(N, dtype=complex)
    if model.kind == "cproj":
        d[1:, 0] = _r2c(y)
        return Mat(d, model.field)
    v = _r2c(y[:-1])
    Ipq = model.Ipq
    d[1 : N - 1, 0] = v
    d[N - 1, 0] = 1j * y[-1] - 0.5 * (v.conj() @ Ipq @ v).real
    d[N - 1, 1 : N - 1] = -v.conj() @ Ipq
    return Mat(d, model.field)
