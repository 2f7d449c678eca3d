import numpy as np
import pytest
import scipy.integrate

from cartan_lab.algebra import Mat, proj_equiv
from cartan_lab.development import (
    PathDependenceError,
    SampledPath,
    antidev_radius,
    antidevelop,
    concat,
    develop,
    develop_continuity_probe,
    develop_endpoint,
    developing_map,
    holonomy,
    path_distance,
    read_path_csv,
    reverse,
    shrinking_probe,
    solution_path,
    write_path_csv,
)
from cartan_lab.geometry import EscapeError, GeometryHandle, slab_domain
from cartan_lab.models import AlgebraElement, ModelSpec, random_algebra_element, reduce_center

CP = ModelSpec.cproj(2)
AFF = ModelSpec.affine(2)
K = GeometryHandle.klein(CP)


def _exp_path(G, X, n=200, g0=None):
    g0 = G.identity() if g0 is None else g0
    fn = lambda t: g0 @ X.scale(t).exp()  # noqa: E731
    return SampledPath.from_function(G, fn, n, lambda t: fn(t) @ X.matrix)


def _transl(v):
    d = np.zeros((3, 3))
    d[:2, 2] = v
    return AlgebraElement(AFF, Mat(d))


def _point(x):
    d = np.eye(3)
    d[:2, 2] = x
    return Mat(d)


@pytest.fixture
def XY(rng):
    return random_algebra_element(CP, rng, scale=0.4), random_algebra_element(CP, rng, scale=0.4)


# ---------------------------------------------------------------- development


def test_constant_path_develops_to_e(rng):
    g = random_algebra_element(CP, rng).exp()
    dev = develop(SampledPath.constant(K, g))
    assert all((v - K.identity()).norm() == 0.0 for v in dev.values)


def test_one_parameter_path(XY):
    X, _ = XY
    p = _exp_path(K, X, 1000)
    dev = develop(p)
    assert (dev.end - X.exp()).norm() <= 1e-8
    assert max((a - b).norm() for a, b in zip(dev.values, p.values)) <= 1e-8


def test_left_translation_invariance(XY, rng):
    X, _ = XY
    g0 = random_algebra_element(CP, rng).exp()
    assert (develop_endpoint(_exp_path(K, X, 300, g0)) - X.exp()).norm() <= 1e-10


def test_right_translate_twists_development(XY, rng):
    X, Y = XY
    fn = lambda t: X.scale(t).exp() @ Y.scale(t * t).exp()  # noqa: E731
    p = SampledPath.from_function(K, fn, 400)
    h = random_algebra_element(CP, rng, grade=0, scale=0.5).exp()
    a = develop(p.translate_right(h))
    b = develop(p)
    for va, vb in zip(a.values[::40], b.values[::40]):
        assert (va - h.inv() @ vb @ h).norm() <= 1e-7


def test_develop_agrees_with_scipy_ode(XY):
    # independent oracle: integrate g' = g (X + tY) with scipy's adaptive RK
    X, Y = XY
    A, B = X.matrix.data, Y.matrix.data

    def rhs(t, y):
        g = y.reshape(3, 3)
        return (g @ (A + t * B)).ravel()

    sol = scipy.integrate.solve_ivp(rhs, (0, 1), np.eye(3, dtype=complex).ravel(), rtol=1e-12, atol=1e-12)
    ref = sol.y[:, -1].reshape(3, 3)
    got = solution_path(CP, lambda t: X + Y.scale(t), 800).end.data
    assert np.linalg.norm(got - ref) <= 1e-5


def test_step_halving_second_order(XY):
    X, Y = XY
    f = lambda t: X + Y.scale(t)  # noqa: E731
    ref = solution_path(CP, f, 3200).end
    errs = [(solution_path(CP, f, n).end - ref).norm() for n in (100, 200, 400)]
    for a, b in zip(errs, errs[1:]):
        assert 3.0 <= a / b <= 5.0


def test_midpoint_consistency(XY):
    X, Y = XY
    p = SampledPath.from_function(K, lambda t: X.scale(t).exp() @ Y.scale(t * t).exp(), 100)
    q = SampledPath.from_function(K, lambda t: X.scale(t).exp() @ Y.scale(t * t).exp(), 200)
    r1, r2 = p.midpoint_residual(), q.midpoint_residual()
    assert r1 < 1e-3
    assert 3.0 <= r1 / r2 <= 5.0


# ---------------------------------------------------------------- reparametrization


def test_reparametrization(XY):
    X, _ = XY
    p = _exp_path(K, X, 1000)
    base = develop_endpoint(p)
    assert (develop_endpoint(p.reparametrize(lambda t: t, lambda t: 1.0)) - base).norm() <= 1e-15
    sq = develop_endpoint(p.reparametrize(lambda t: t * t, lambda t: 2 * t))
    assert (sq - X.exp()).norm() <= 1e-7
    with pytest.raises(ValueError):
        p.reparametrize(lambda t: np.sin(3 * t) / np.sin(3.0))


def test_length_reparametrization_invariant(XY):
    X, Y = XY
    fn = lambda t: X.scale(t).exp() @ Y.scale(t * t).exp()  # noqa: E731
    p = SampledPath.from_function(K, fn, 2000)
    L = p.length()
    for tau, dtau in ((lambda t: t**2, lambda t: 2 * t), (lambda t: (np.exp(t) - 1) / (np.e - 1), lambda t: np.exp(t) / (np.e - 1))):
        assert abs(p.reparametrize(tau, dtau).length() - L) <= 1e-6
    assert abs(p.to_arclength().length() - L) <= 1e-12


# ---------------------------------------------------------------- concatenation


def test_concat_with_reverse_is_trivial(XY):
    X, Y = XY
    p = SampledPath.from_function(K, lambda t: X.scale(t).exp() @ Y.scale(t * t).exp(), 300)
    loop = concat(p, reverse(p))
    assert 0.5 in loop.breakpoints
    assert (develop_endpoint(loop) - K.identity()).norm() <= 1e-12


def test_concat_cocycle(XY):
    X, Y = XY
    p1 = _exp_path(K, X, 200)
    p2 = _exp_path(K, Y, 200, g0=p1.end)
    c = concat(p1, p2)
    assert (develop_endpoint(c) - develop_endpoint(p1) @ develop_endpoint(p2)).norm() <= 1e-10
    assert (develop_endpoint(c) - X.exp() @ Y.exp()).norm() <= 1e-10
    r = develop_endpoint(c.reparametrize(lambda t: t * t, lambda t: 2 * t, n=4000))
    assert (r - X.exp() @ Y.exp()).norm() <= 1e-6
    with pytest.raises(ValueError):
        concat(p1, _exp_path(K, Y, 200))


# ---------------------------------------------------------------- path metric


def test_path_metric_examples(XY):
    X, Y = XY
    a, b = _exp_path(K, X, 100), _exp_path(K, Y, 100)
    assert path_distance(a, a).total == 0.0
    d = path_distance(a, b)
    assert d.derivative == pytest.approx(reduce_center(CP, X.matrix - Y.matrix).norm(), rel=1e-9)
    assert d.total == pytest.approx(path_distance(b, a).total, rel=1e-12)
    const = SampledPath.constant(K, K.identity(), 100)
    seq = [path_distance(_exp_path(K, X.scale(1.0 / k), 100), const).total for k in (1, 2, 4, 8, 16)]
    assert all(y < x for x, y in zip(seq, seq[1:]))
    assert seq[-1] == pytest.approx(seq[0] / 16, rel=1e-9)


def test_path_metric_triangle_on_translations(rng):
    G = GeometryHandle.klein(AFF)
    for _ in range(20):
        paths = [_exp_path(G, _transl(rng.standard_normal(2)), 50) for _ in range(3)]
        d = lambda p, q: path_distance(p, q).total  # noqa: E731
        assert d(paths[0], paths[2]) <= d(paths[0], paths[1]) + d(paths[1], paths[2]) + 1e-8


# ---------------------------------------------------------------- continuity


def test_continuity_probe(XY):
    X, _ = XY
    rep = develop_continuity_probe(CP, [lambda t: X] * 3, lambda t: X, n=100)
    assert rep.distances == [0.0, 0.0, 0.0]
    fs = [(lambda t, k=k: X.scale(1 + 1 / k)) for k in (1, 2, 4, 8, 16, 32)]
    rep = develop_continuity_probe(CP, fs, lambda t: X, n=100)
    assert rep.bounded
    assert all(y < x for x, y in zip(rep.distances, rep.distances[1:]))
    # closed form: solutions exp((1 + 1/k) t X)
    sol = solution_path(CP, fs[2], 100)
    assert (sol.end - X.scale(1.25).exp()).norm() <= 1e-10


def test_shrinking_probe(XY):
    X, Y = XY
    paths = [SampledPath.from_function(K, (lambda t, k=k: X.scale(t / k).exp() @ Y.scale(t * t / k).exp()), 50) for k in (1, 10, 100, 10**4, 10**7)]
    vals = shrinking_probe(paths)
    assert all(y < x for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 1e-6


# ---------------------------------------------------------------- antidevelopment


def test_antidevelop_klein_is_left_translation(XY, rng):
    X, _ = XY
    gm = develop(_exp_path(K, X, 200))
    start = random_algebra_element(CP, rng).exp()
    path = antidevelop(K, gm, start)
    assert all((p - start @ v).norm() <= 1e-10 for p, v in zip(path.values, gm.values))


def test_antidevelop_round_trip_perturbed(rng):
    G = GeometryHandle.perturbed(AFF, 0.5)
    X, Y = random_algebra_element(AFF, rng, scale=0.5), random_algebra_element(AFF, rng, scale=0.5)
    errs = []
    for n in (250, 500):
        gm = solution_path(AFF, lambda t: X + Y.scale(t), n)
        lifted = antidevelop(G, gm, _point([0.1, 0.2]))
        assert (develop_endpoint(lifted) - gm.end).norm() <= 1e-14
        # omega rebuilt from the lifted values converges at second order
        back = develop(SampledPath.from_values(G, lifted.values, lifted.t))
        errs.append(max((a - b).norm() for a, b in zip(back.values, gm.values)))
    assert errs[1] < 1e-5
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_slab_straight_paths():
    w = 1.0
    G = GeometryHandle.open_restriction(AFF, slab_domain(AFF, w))
    Kf = GeometryHandle.klein(AFF)
    start = _point([-0.4, 0.0])
    ok = develop(_exp_path(Kf, _transl([0.7, 0.3]), 100))
    antidevelop(G, ok, start)
    with pytest.raises(EscapeError) as exc:
        antidevelop(G, develop(_exp_path(Kf, _transl([1.8, 0.0]), 100)), start)
    assert exc.value.t_escape == pytest.approx(0.9 / 1.8, abs=1e-3)


def test_antidev_radius():
    assert antidev_radius(K, K.identity()) == np.inf
    radii = []
    for w in (2.0, 1.0, 0.5, 0.25):
        G = GeometryHandle.open_restriction(AFF, slab_domain(AFF, w))
        radii.append(antidev_radius(G, G.identity()))
    # nested slabs give nested radii
    assert all(b < a for a, b in zip(radii, radii[1:]))
    E = ModelSpec.euclid(2)
    Ge = GeometryHandle.open_restriction(E, slab_domain(E, 1.0))
    assert antidev_radius(Ge, Ge.identity()) == pytest.approx(0.5, rel=0.1)


def test_affine_radius_bound():
    G = GeometryHandle.open_restriction(AFF, slab_domain(AFF, 1.0))
    # |A0|_2 = 1 at the identity, boundary distance 1/2
    assert antidev_radius(G, G.identity()) == pytest.approx(np.log1p(0.5), rel=1e-6)


# ---------------------------------------------------------------- holonomy


def test_klein_loop_holonomy_trivial():
    t = np.linspace(0, 1, 101)
    loop = np.stack([0.3 * np.sin(2 * np.pi * t), 0.2 * np.sin(4 * np.pi * t), 0.1 * (1 - np.cos(2 * np.pi * t)), 0 * t], 1)
    assert (holonomy(K, loop) - K.identity()).norm() <= 1e-7


def test_torus_holonomy():
    T = GeometryHandle.quotient(AFF, 2)
    t = np.linspace(0, 1, 101)
    h1 = holonomy(T, np.outer(t, [1.0, 0.0]))
    assert (h1 - _point([1.0, 0.0])).norm() <= 1e-7
    h2 = holonomy(T, np.outer(t, [0.0, 1.0]))
    both = holonomy(T, np.vstack([np.outer(t, [1.0, 0.0]), [1.0, 0.0] + np.outer(t[1:], [0.0, 1.0])]))
    assert (both - _point([1.0, 1.0])).norm() <= 1e-7
    assert (both - h1 @ h2).norm() <= 1e-7
    contractible = np.stack([0.3 + 0.1 * np.cos(2 * np.pi * t), 0.5 + 0.1 * np.sin(2 * np.pi * t)], 1)
    assert (holonomy(T, contractible, start=_point(contractible[0])) - T.identity()).norm() <= 1e-7


def test_developing_map():
    p = random_algebra_element(CP, np.random.default_rng(3), scale=0.3).exp()
    assert proj_equiv(developing_map(K, p), p, CP.center_tag, tol=1e-8)
    G = GeometryHandle.open_restriction(AFF, slab_domain(AFF, 1.0))
    q = _point([0.2, 1.5])
    assert (developing_map(G, q) - q).norm() <= 1e-8
    with pytest.raises(PathDependenceError):
        developing_map(GeometryHandle.quotient(AFF, 2), _point([0.3, 0.2]))


# ---------------------------------------------------------------- CSV


def test_csv_roundtrip(tmp_path, XY):
    X, _ = XY
    p = _exp_path(K, X, 20)
    f = tmp_path / "p.csv"
    write_path_csv(p, f)
    q = read_path_csv(K, f)
    assert np.array_equal(q.t, p.t)
    assert max((a - b).norm() for a, b in zip(p.values, q.values)) == 0.0
    write_path_csv(q, tmp_path / "q.csv")
    assert f.read_bytes() == (tmp_path / "q.csv").read_bytes()
