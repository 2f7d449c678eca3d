from .expm import mat_exp, mat_log, nilpotency_index, pade_coefficients
from .matrix import Mat, column
from .projective import CenterTag, ProjClass, canon, central_distance_to_identity, proj_equiv
from .scalars import Field, FieldMismatchError, Quaternion, hamilton, qconj, qinv, quat_mul

__all__ = [
    "CenterTag",
    "Field",
    "FieldMismatchError",
    "Mat",
    "ProjClass",
    "Quaternion",
    "canon",
    "central_distance_to_identity",
    "column",
    "hamilton",
    "mat_exp",
    "mat_log",
    "nilpotency_index",
    "pade_coefficients",
    "proj_equiv",
    "qconj",
    "qinv",
    "quat_mul",
]
