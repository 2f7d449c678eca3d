from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cartan_lab.algebra import (
    CenterTag,
    Field,
    FieldMismatchError,
    Mat,
    ProjClass,
    Quaternion,
    canon,
    hamilton,
    mat_exp,
    mat_log,
    nilpotency_index,
    proj_equiv,
    qconj,
    quat_mul,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
quats = st.tuples(finite, finite, finite, finite).map(np.array)


def _sympy_quat(q):
    return sympy.algebras.Quaternion(*[sympy.nsimplify(float(c)) for c in q])


# ---------------------------------------------------------------- scalars


def test_quaternion_basis_relations():
    i, j, ij = Quaternion(0, 1, 0, 0), Quaternion(0, 0, 1, 0), Quaternion(0, 0, 0, 1)
    assert quat_mul(Quaternion(1, 0, 0, 0), Quaternion(2, 3, 4, 5)) == Quaternion(2, 3, 4, 5)
    assert quat_mul(i, j) == ij
    assert quat_mul(j, i) == -ij
    assert quat_mul(i, i) == Quaternion(-1, 0, 0, 0)


def test_quat_mul_against_structure_constant_oracle():
    # sympy's quaternion algebra is the independent oracle for the real structure constants
    a, b = Quaternion(1, 1, 0, 0), Quaternion(0, 0, 1, 0)
    ref = _sympy_quat([1, 1, 0, 0]) * _sympy_quat([0, 0, 1, 0])
    assert quat_mul(a, b).components() == (ref.a, ref.b, ref.c, ref.d)
    assert quat_mul(a, b) == Quaternion(0, 0, 1, 1)


@settings(max_examples=60, deadline=None)
@given(quats, quats)
def test_hamilton_matches_sympy(p, q):
    ref = _sympy_quat(p) * _sympy_quat(q)
    got = hamilton(p, q)
    assert np.allclose(got, [float(ref.a), float(ref.b), float(ref.c), float(ref.d)], atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(quats, quats, quats)
def test_quaternion_identities(a, b, c):
    assert np.allclose(hamilton(hamilton(a, b), c), hamilton(a, hamilton(b, c)), atol=1e-12 * (1 + np.abs(a).sum() * np.abs(b).sum() * np.abs(c).sum()))
    assert np.allclose(qconj(hamilton(a, b)), hamilton(qconj(b), qconj(a)), atol=1e-12 * (1 + np.abs(a).sum() * np.abs(b).sum()))
    assert abs(np.linalg.norm(hamilton(a, b)) - np.linalg.norm(a) * np.linalg.norm(b)) <= 1e-12 * (1 + np.linalg.norm(a) * np.linalg.norm(b))


def test_quaternion_associative_exactly_on_rationals():
    F = Fraction
    a = Quaternion(F(1, 2), F(-3), F(2, 7), F(5))
    b = Quaternion(F(4), F(1, 3), F(-1), F(2, 5))
    c = Quaternion(F(-2, 9), F(1), F(3), F(-7, 4))
    assert (a * b) * c == a * (b * c)
    assert (a * b).conj() == b.conj() * a.conj()


def test_quaternion_rejects_complex():
    with pytest.raises(FieldMismatchError):
        Quaternion(1, 0, 0, 0) + 1j


# ---------------------------------------------------------------- matrices


def test_mixed_field_and_shape_rejected():
    A = Mat(np.eye(2))
    B = Mat(np.eye(2, dtype=complex), Field.COMPLEX)
    with pytest.raises(FieldMismatchError):
        A @ B
    with pytest.raises(ValueError):
        A + Mat(np.eye(3))


def test_frobenius_submultiplicative(rng):
    for field in (Field.REAL, Field.COMPLEX, Field.QUATERNION):
        for _ in range(30):
            shape = (3, 3, 4) if field is Field.QUATERNION else (3, 3)
            a = rng.standard_normal(shape) + (1j * rng.standard_normal(shape) if field is Field.COMPLEX else 0)
            b = rng.standard_normal(shape) + (1j * rng.standard_normal(shape) if field is Field.COMPLEX else 0)
            A, B = Mat(a, field), Mat(b, field)
            assert (A @ B).norm() <= A.norm() * B.norm() + 1e-10


def test_quaternion_matrix_embedding_is_homomorphism(rng):
    A = Mat(rng.standard_normal((3, 3, 4)), Field.QUATERNION)
    B = Mat(rng.standard_normal((3, 3, 4)), Field.QUATERNION)
    assert np.allclose((A @ B).to_complex().data, A.to_complex().data @ B.to_complex().data, atol=1e-12)


# ---------------------------------------------------------------- exp / log


def test_exp_zero_and_nilpotent():
    assert mat_exp(Mat(np.zeros((3, 3)))).allclose(Mat(np.eye(3)), 0.0)
    N = np.zeros((3, 3), dtype=complex)
    N[0, 1:] = [2.0, 1j]
    E = mat_exp(Mat(N, Field.COMPLEX))
    assert nilpotency_index(Mat(N, Field.COMPLEX)) == 2
    assert np.array_equal(E.data, np.eye(3) + N)  # series truncates exactly


def test_exp_against_higher_order_pade_and_scipy(rng):
    for _ in range(20):
        X = Mat(rng.standard_normal((3, 3)))
        e13 = mat_exp(X).data
        e15 = mat_exp(X, pade_degree=15).data
        assert np.allclose(e13, e15, rtol=1e-10, atol=1e-10)
        assert np.allclose(e13, scipy.linalg.expm(X.data), rtol=1e-10, atol=1e-12)


def test_quaternion_exp_via_embedding(rng):
    X = Mat(0.7 * rng.standard_normal((2, 2, 4)), Field.QUATERNION)
    assert np.allclose(mat_exp(X).to_complex().data, scipy.linalg.expm(X.to_complex().data), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 5.0))
def test_exp_inverse(seed, size):
    r = np.random.default_rng(seed)
    x = r.standard_normal((4, 4)) + 1j * r.standard_normal((4, 4))
    X = Mat(size * x / np.linalg.norm(x), Field.COMPLEX)
    prod = mat_exp(X) @ mat_exp(-X)
    assert prod.allclose(Mat.identity(4, Field.COMPLEX), 1e-10)


def test_log_inverts_exp(rng):
    X = Mat(0.4 * rng.standard_normal((3, 3)))
    assert mat_log(mat_exp(X)).allclose(X, 1e-10)


# ---------------------------------------------------------------- projective classes


def test_proj_equiv_examples(rng):
    A = Mat(rng.standard_normal((3, 3)))
    assert proj_equiv(A, A.scale(3.0), CenterTag.REAL)
    assert proj_equiv(A, A.scale(-3.0), CenterTag.REAL)
    C = Mat(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)), Field.COMPLEX)
    assert proj_equiv(C, C.scale(1j), CenterTag.U1)
    assert not proj_equiv(C, C.scale(2j), CenterTag.U1)
    assert proj_equiv(C, C.scale(2j), CenterTag.COMPLEX)
    # distinct entries, perturbed in one entry
    D = Mat(np.arange(1.0, 10.0).reshape(3, 3))
    E = np.array(D.data)
    E[0, 0] += 1e-3
    for tag in (CenterTag.REAL, CenterTag.COMPLEX):
        M = D if tag is CenterTag.REAL else Mat(D.data.astype(complex), Field.COMPLEX)
        N = Mat(E) if tag is CenterTag.REAL else Mat(E.astype(complex), Field.COMPLEX)
        assert not proj_equiv(M, N, tag)


def test_canonical_idempotent_and_equivalence(rng):
    for _ in range(30):
        A = Mat(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)), Field.COMPLEX)
        lam = complex(*rng.standard_normal(2))
        for tag in (CenterTag.COMPLEX, CenterTag.U1):
            c = canon(A, tag)
            assert canon(c, tag).allclose(c, 1e-12)
        assert ProjClass(A, CenterTag.COMPLEX).equivalent(ProjClass(A.scale(lam), CenterTag.COMPLEX))
        B = A.scale(lam)
        C = B.scale(complex(*rng.standard_normal(2)))
        # reflexive, symmetric, transitive
        assert proj_equiv(A, A, "complex")
        assert proj_equiv(A, B, "complex") and proj_equiv(B, A, "complex")
        assert proj_equiv(A, C, "complex")


def test_quaternion_real_center(rng):
    A = Mat(rng.standard_normal((2, 2, 4)), Field.QUATERNION)
    assert proj_equiv(A, A.scale(-2.5), CenterTag.REAL)
    q = np.array([0.0, 1.0, 0.0, 0.0])  # i is not central
    assert not proj_equiv(A, A.scale(q), CenterTag.REAL)
    with pytest.raises(FieldMismatchError):
        canon(A, CenterTag.COMPLEX)
