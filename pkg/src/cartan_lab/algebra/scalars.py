"""Scalar fields and quaternion arithmetic.

Quaternions are stored as 4-tuples ``(w, x, y, z)`` over the real basis
``{1, i, j, ij}``.  The :class:`Quaternion` class is generic over its
component type, so it works with ``fractions.Fraction`` for exact checks as
well as with floats.  Array-valued quaternions use a trailing axis of length
4 and are multiplied with :func:`hamilton`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from numbers import Number
from typing import Any

import numpy as np


class Field(str, Enum):
    REAL = "real"
    COMPLEX = "complex"
    QUATERNION = "quaternion"

    @property
    def real_dim(self) -> int:
        return {"real": 1, "complex": 2, "quaternion": 4}[self.value]


class FieldMismatchError(TypeError):
    """Raised when operands live over different scalar fields."""


@dataclass(frozen=True)
class Quaternion:
    w: Any = 0
    x: Any = 0
    y: Any = 0
    z: Any = 0

    field = Field.QUATERNION

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        w, x, y, z = (float(c) for c in np.asarray(arr, dtype=float))
        return cls(w, x, y, z)

    @classmethod
    def from_complex(cls, c: complex) -> "Quaternion":
        return cls(c.real, c.imag, 0, 0)

    def components(self) -> tuple:
        return (self.w, self.x, self.y, self.z)

    def to_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.components()])

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self):
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return float(self.norm2()) ** 0.5

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0:
            raise ZeroDivisionError("quaternion inverse of zero")
        c = self.conj()
        return Quaternion(c.w / n2, c.x / n2, c.y / n2, c.z / n2)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.components())

    def _coerce(self, other) -> "Quaternion":
        if isinstance(other, Quaternion):
            return other
        if isinstance(other, Number) and not isinstance(other, complex):
            return Quaternion(other, 0, 0, 0)
        raise FieldMismatchError(f"cannot combine Quaternion with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        return Quaternion(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return quat_mul(self, self._coerce(other))

    def __rmul__(self, other):
        return quat_mul(self._coerce(other), self)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a * b``."""
    if not (isinstance(a, Quaternion) and isinstance(b, Quaternion)):
        raise FieldMismatchError("quat_mul expects two quaternions")
    a0, a1, a2, a3 = a.components()
    b0, b1, b2, b3 = b.components()
    return Quaternion(
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def hamilton(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Broadcasting Hamilton product over a trailing axis of length 4."""
    p0, p1, p2, p3 = np.moveaxis(np.asarray(p, dtype=float), -1, 0)
    q0, q1, q2, q3 = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qconj(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=float, copy=True)
    out[..., 1:] *= -1
    return out


def qinv(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n2 = np.sum(q * q, axis=-1, keepdims=True)
    if np.any(n2 == 0):
        raise ZeroDivisionError("quaternion inverse of zero")
    return qconj(q) / n2


def quat_to_complex_pair(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``q = z1 + z2 j`` with ``z1 = w + x i`` and ``z2 = y + z i``."""
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def complex_pair_to_quat(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)
