"""Matrices modulo a central subgroup of scalars."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .matrix import Mat
from .scalars import Field, FieldMismatchError


class CenterTag(str, Enum):
    REAL = "real"  # nonzero real multiples of the identity
    COMPLEX = "complex"  # nonzero complex multiples
    U1 = "u1"  # unit complex multiples
    TRIVIAL = "trivial"


def _entry_magnitudes(A: Mat) -> np.ndarray:
    d = A.data
    if A.field is Field.QUATERNION:
        mags = np.sqrt(np.sum(d * d, axis=-1))
        return mags.T.reshape(-1), np.transpose(d, (1, 0, 2)).reshape(-1, 4)
    return np.abs(d).T.reshape(-1), d.T.reshape(-1)


def _pivot(A: Mat):
    # first entry (column-major) whose magnitude is at least half the largest one
    mags, flat = _entry_magnitudes(A)
    top = mags.max() if mags.size else 0.0
    if top == 0.0:
        raise ValueError("zero matrix has no projective class")
    k = int(np.argmax(mags >= 0.5 * top))
    return flat[k]


def canon(A: Mat, center: CenterTag | str) -> Mat:
    """Deterministic representative of the class of ``A`` modulo ``center``.

    The pivot is the first column-major entry with at least half the largest
    magnitude.  Complex centers divide by the pivot; U(1) rotates its phase
    to the positive reals; real centers divide by the pivot's modulus times
    the sign of its dominant real component.
    """
    center = CenterTag(center)
    if center is CenterTag.TRIVIAL:
        return A
    p = _pivot(A)
    if center is CenterTag.COMPLEX:
        if A.field is Field.QUATERNION:
            raise FieldMismatchError("complex center on a quaternionic matrix")
        return A.scale(1.0 / complex(p))
    if center is CenterTag.U1:
        if A.field is not Field.COMPLEX:
            raise FieldMismatchError("U(1) center needs a complex matrix")
        return A.scale(np.conj(p) / abs(p))
    comps = np.atleast_1d(np.asarray(p, dtype=complex if A.field is Field.COMPLEX else float))
    if A.field is Field.COMPLEX:
        comps = np.array([comps[0].real, comps[0].imag])
    mag = float(np.sqrt(np.sum(np.abs(comps) ** 2)))
    lead = comps[int(np.argmax(np.abs(comps) >= 0.5 * np.max(np.abs(comps))))]
    return A.scale(1.0 / (mag * np.sign(lead.real)))


def proj_equiv(A: Mat, B: Mat, center: CenterTag | str, tol: float = 1e-10) -> bool:
    """Whether ``B = lam * A`` for an admissible central scalar ``lam``."""
    if A.field is not B.field:
        raise FieldMismatchError("proj_equiv: field mismatch")
    if A.shape != B.shape:
        raise ValueError("proj_equiv: shape mismatch")
    cA, cB = canon(A, center), canon(B, center)
    return (cA - cB).norm() <= tol * max(1.0, cA.norm())


def central_distance_to_identity(M: Mat, center: CenterTag | str) -> float:
    """``min ||lam M - I||`` over the admissible central scalars ``lam``."""
    center = CenterTag(center)
    eye = Mat.eye_like(M.rows, M.field)
    if center is CenterTag.TRIVIAL:
        return (M - eye).norm()
    n2 = M.norm() ** 2
    if M.field is Field.QUATERNION:
        tr = float(np.sum(M.data[np.arange(M.rows), np.arange(M.rows), 0]))
        return (M.scale(tr / n2) - eye).norm()
    tr = complex(np.trace(M.data))  # <M, I> = conj(tr M)
    if center is CenterTag.REAL:
        lam = tr.real / n2
    elif center is CenterTag.COMPLEX:
        lam = np.conj(tr) / n2
    else:
        lam = np.conj(tr) / abs(tr) if tr != 0 else 1.0
    return (M.scale(lam) - eye).norm()


@dataclass(frozen=True)
class ProjClass:
    representative: Mat
    center: CenterTag

    def canonical(self) -> Mat:
        return canon(self.representative, self.center)

    def equivalent(self, other: "ProjClass | Mat", tol: float = 1e-10) -> bool:
        B = other.representative if isinstance(other, ProjClass) else other
        return proj_equiv(self.representative, B, self.center, tol)
