"""Dense matrices over R, C or H.

Real and complex matrices are plain 2-D numpy arrays.  Quaternionic matrices
are float arrays of shape ``(rows, cols, 4)``.  Every :class:`Mat` is
read-only; arithmetic returns new objects.
"""
from __future__ import annotations

from numbers import Number

import numpy as np

from .scalars import (
    Field,
    FieldMismatchError,
    Quaternion,
    complex_pair_to_quat,
    hamilton,
    qconj,
    quat_to_complex_pair,
)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class Mat:
    __slots__ = ("data", "field")

    def __init__(self, data, field: Field | str | None = None):
        arr = np.asarray(data)
        if field is None:
            field = Field.COMPLEX if np.iscomplexobj(arr) else Field.REAL
        field = Field(field)
        if field is Field.QUATERNION:
            arr = np.asarray(arr, dtype=float)
            if arr.ndim == 2:
                arr = np.stack([arr, *(np.zeros_like(arr),) * 3], axis=-1)
            if arr.ndim != 3 or arr.shape[-1] != 4:
                raise ValueError("quaternionic matrix data must have shape (r, c, 4)")
        elif field is Field.COMPLEX:
            arr = np.asarray(arr, dtype=complex)
        else:
            if np.iscomplexobj(arr):
                if np.any(arr.imag != 0):
                    raise FieldMismatchError("complex entries in a real matrix")
                arr = arr.real
            arr = np.asarray(arr, dtype=float)
        if field is not Field.QUATERNION and arr.ndim != 2:
            raise ValueError("matrix data must be 2-D")
        object.__setattr__(self, "data", _freeze(arr))
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, value):
        raise AttributeError("Mat is immutable")

    # construction -------------------------------------------------------
    @classmethod
    def identity(cls, n: int, field: Field | str = Field.REAL) -> "Mat":
        return cls.eye_like(n, Field(field))

    @classmethod
    def eye_like(cls, n: int, field: Field) -> "Mat":
        if field is Field.QUATERNION:
            d = np.zeros((n, n, 4))
            d[np.arange(n), np.arange(n), 0] = 1.0
            return cls(d, field)
        return cls(np.eye(n, dtype=complex if field is Field.COMPLEX else float), field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: Field | str = Field.REAL) -> "Mat":
        field = Field(field)
        if field is Field.QUATERNION:
            return cls(np.zeros((rows, cols, 4)), field)
        return cls(np.zeros((rows, cols), dtype=complex if field is Field.COMPLEX else float), field)

    # shape ----------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def _check(self, other: "Mat", op: str) -> None:
        if not isinstance(other, Mat):
            raise TypeError(f"{op}: expected Mat, got {type(other).__name__}")
        if other.field is not self.field:
            raise FieldMismatchError(f"{op}: {self.field.value} vs {other.field.value}")

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: "Mat") -> "Mat":
        self._check(other, "add")
        if self.shape != other.shape:
            raise ValueError(f"add: shape {self.shape} vs {other.shape}")
        return Mat(self.data + other.data, self.field)

    def __sub__(self, other: "Mat") -> "Mat":
        self._check(other, "sub")
        if self.shape != other.shape:
            raise ValueError(f"sub: shape {self.shape} vs {other.shape}")
        return Mat(self.data - other.data, self.field)

    def __neg__(self) -> "Mat":
        return Mat(-self.data, self.field)

    def __matmul__(self, other: "Mat") -> "Mat":
        self._check(other, "matmul")
        if self.cols != other.rows:
            raise ValueError(f"matmul: shape {self.shape} @ {other.shape}")
        if self.field is Field.QUATERNION:
            return Mat(_qmatmul(self.data, other.data), self.field)
        return Mat(self.data @ other.data, self.field)

    def scale(self, lam, side: str = "left") -> "Mat":
        """Multiply every entry by the scalar ``lam`` (on the given side for H)."""
        if self.field is Field.QUATERNION:
            q = _as_quat_array(lam)
            d = hamilton(q, self.data) if side == "left" else hamilton(self.data, q)
            return Mat(d, self.field)
        if isinstance(lam, Quaternion):
            raise FieldMismatchError("quaternionic scalar on a non-quaternionic matrix")
        if self.field is Field.REAL and isinstance(lam, complex) and lam.imag != 0:
            raise FieldMismatchError("complex scalar on a real matrix")
        return Mat(self.data * lam, self.field)

    def __mul__(self, lam) -> "Mat":
        if isinstance(lam, Mat):
            raise TypeError("use @ for matrix products")
        if self.field is Field.QUATERNION and not isinstance(lam, Number | Quaternion):
            raise TypeError("bad scalar")
        return self.scale(lam, side="right")

    def __rmul__(self, lam) -> "Mat":
        return self.scale(lam, side="left")

    def __truediv__(self, lam) -> "Mat":
        if isinstance(lam, Quaternion):
            return self.scale(lam.inverse(), side="right")
        return self.scale(1.0 / lam, side="right")

    # structure ------------------------------------------------------------
    @property
    def H(self) -> "Mat":
        """Conjugate transpose."""
        if self.field is Field.QUATERNION:
            return Mat(qconj(np.transpose(self.data, (1, 0, 2))), self.field)
        return Mat(self.data.conj().T, self.field)

    @property
    def T(self) -> "Mat":
        if self.field is Field.QUATERNION:
            return Mat(np.transpose(self.data, (1, 0, 2)), self.field)
        return Mat(self.data.T, self.field)

    def conj(self) -> "Mat":
        if self.field is Field.QUATERNION:
            return Mat(qconj(self.data), self.field)
        return Mat(self.data.conj(), self.field)

    def __getitem__(self, idx) -> "Mat":
        rows, cols = idx
        d = self.data[rows, cols]
        # keep 2-D shape for integer indices
        if isinstance(rows, int | np.integer):
            d = np.expand_dims(d, 0)
        if isinstance(cols, int | np.integer):
            d = np.expand_dims(d, 1)
        return Mat(d, self.field)

    def entry(self, i: int, j: int):
        """Scalar entry: float, complex or :class:`Quaternion`."""
        v = self.data[i, j]
        if self.field is Field.QUATERNION:
            return Quaternion.from_array(v)
        return v.item()

    def with_block(self, rows: slice, cols: slice, block: "Mat") -> "Mat":
        self._check(block, "with_block")
        d = np.array(self.data, copy=True)
        d[rows, cols] = block.data
        return Mat(d, self.field)

    def real_parts(self) -> np.ndarray:
        """Flat vector of all real components (the real structure of the entries)."""
        if self.field is Field.QUATERNION:
            return self.data.reshape(-1).copy()
        if self.field is Field.COMPLEX:
            return np.stack([self.data.real, self.data.imag], axis=-1).reshape(-1)
        return self.data.reshape(-1).copy()

    def trace(self):
        if not self.is_square:
            raise ValueError("trace of non-square matrix")
        if self.field is Field.QUATERNION:
            return Quaternion.from_array(np.einsum("iic->c", self.data))
        return np.trace(self.data).item()

    def norm(self) -> float:
        """Frobenius norm (root of the sum of squared real components)."""
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2)))

    def inner(self, other: "Mat") -> float:
        """Real Frobenius inner product ``Re tr(A^* B)``."""
        self._check(other, "inner")
        return float(np.dot(self.real_parts(), other.real_parts()))

    def allclose(self, other: "Mat", tol: float = 1e-10) -> bool:
        self._check(other, "allclose")
        return self.shape == other.shape and (self - other).norm() <= tol

    # field-changing maps ---------------------------------------------------
    def to_complex(self) -> "Mat":
        """Standard embedding of an H-matrix as a 2n x 2n complex matrix."""
        if self.field is Field.COMPLEX:
            return self
        if self.field is Field.REAL:
            return Mat(self.data.astype(complex), Field.COMPLEX)
        z1, z2 = quat_to_complex_pair(self.data)
        top = np.concatenate([z1, z2], axis=1)
        bot = np.concatenate([-z2.conj(), z1.conj()], axis=1)
        return Mat(np.concatenate([top, bot], axis=0), Field.COMPLEX)

    @classmethod
    def from_complex_embedding(cls, m: "Mat | np.ndarray", rows: int, cols: int) -> "Mat":
        d = m.data if isinstance(m, Mat) else np.asarray(m)
        z1 = d[:rows, :cols]
        z2 = d[:rows, cols:]
        return cls(complex_pair_to_quat(z1, z2), Field.QUATERNION)

    def inv(self) -> "Mat":
        if not self.is_square:
            raise ValueError("inverse of non-square matrix")
        if self.field is Field.QUATERNION:
            c = np.linalg.inv(self.to_complex().data)
            return Mat.from_complex_embedding(c, self.rows, self.cols)
        return Mat(np.linalg.inv(self.data), self.field)

    def power(self, k: int) -> "Mat":
        if k < 0:
            return self.inv().power(-k)
        result = Mat.eye_like(self.rows, self.field)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def exp(self) -> "Mat":
        from .expm import mat_exp

        return mat_exp(self)

    def __repr__(self) -> str:
        return f"Mat({self.field.value}, shape={self.shape})"


def _as_quat_array(lam) -> np.ndarray:
    if isinstance(lam, Quaternion):
        return lam.to_array()
    if isinstance(lam, complex):
        return np.array([lam.real, lam.imag, 0.0, 0.0])
    if isinstance(lam, Number):
        return np.array([float(lam), 0.0, 0.0, 0.0])
    arr = np.asarray(lam, dtype=float)
    if arr.shape != (4,):
        raise TypeError("quaternionic scalar must have 4 components")
    return arr


def _qmatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # via the complex pair split: (A1 + A2 j)(B1 + B2 j)
    a1, a2 = quat_to_complex_pair(a)
    b1, b2 = quat_to_complex_pair(b)
    c1 = a1 @ b1 - a2 @ b2.conj()
    c2 = a1 @ b2 + a2 @ b1.conj()
    return complex_pair_to_quat(c1, c2)


def column(values, field: Field | str | None = None) -> Mat:
    """Column vector from a sequence of entries (quaternions as 4-arrays)."""
    arr = np.asarray(values)
    if field is not None and Field(field) is Field.QUATERNION:
        arr = np.asarray(values, dtype=float).reshape(-1, 1, 4)
        return Mat(arr, Field.QUATERNION)
    return Mat(arr.reshape(-1, 1), field)
