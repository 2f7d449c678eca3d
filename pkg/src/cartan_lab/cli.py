"""``cartan-lab verify``: run verification suites and write JSON reports / CSV series."""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import ensnare as E
from .algebra import Mat, mat_log, proj_equiv
from .development import (
    PathDependenceError,
    SampledPath,
    develop_continuity_probe,
    develop_endpoint,
    developing_map,
    holonomy,
    shrinking_probe,
    solution_path,
)
from .geometry import GeometryHandle
from .models import (
    AlgebraElement,
    ModelSpec,
    adjoint,
    bracket,
    component_basis,
    from_chart,
    point_distance,
    random_algebra_element,
    random_point,
    reduce_center,
    to_chart,
)

SUITES = ("algebra", "models", "development", "holonomy", "ensnare-A", "ensnare-B", "ensnare-C")
ENSNARE_KIND = {"ensnare-A": "cproj", "ensnare-B": "quat", "ensnare-C": "cr"}


class ConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    """Run configuration; every field has a stable default."""

    suite: str = ""
    model: dict = field(default_factory=dict)  # m (cproj/quat) or p, q (cr)
    beta: list | None = None
    s: float = 0.0
    y: list | None = None
    N: int = 1000
    k_max: int = 1000
    tol: float = 1.0  # multiplier applied to every tolerance
    seed: int = 0
    samples: int = 20
    out: str | None = None
    series_dir: str | None = None
    timing: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        names = {f.name for f in fields(cls)}
        extra = set(d) - names
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.suite:
            raise ConfigError("no suite given")
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}")
        if not isinstance(self.model, dict):
            raise ConfigError("model must be an object")
        bad = set(self.model) - {"m", "p", "q"}
        if bad:
            raise ConfigError(f"unknown model fields: {sorted(bad)}")
        if self.N < 10 or self.k_max < 10 or self.samples < 1:
            raise ConfigError("N and k_max must be >= 10, samples >= 1")
        if not self.tol > 0:
            raise ConfigError("tol multiplier must be positive")

    def suites(self) -> list[str]:
        return list(SUITES) if self.suite == "all" else [self.suite]


# ---------------------------------------------------------------------------
# check records


@dataclass
class Check:
    name: str
    anchor: str
    measured: object
    bound: object
    kind: str = "le"  # le | ge | window | flag
    runtime_s: float = 0.0
    detail: dict = field(default_factory=dict)

    def status(self, scale: float) -> bool:
        m = self.measured
        if self.kind == "flag":
            return bool(m)
        if self.kind == "le":
            return bool(m <= self.bound * scale)
        if self.kind == "ge":
            return bool(m >= self.bound / scale)
        lo, hi = self.bound
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return bool(c - h * scale <= m <= c + h * scale)

    def tolerance(self, scale: float):
        if self.kind == "flag":
            return None
        if self.kind == "le":
            return self.bound * scale
        if self.kind == "ge":
            return self.bound / scale
        lo, hi = self.bound
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return [c - h * scale, c + h * scale]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if x is None or isinstance(x, str):
        return x
    return repr(x)


def _timed(fn: Callable[[], Check]) -> Check:
    t0 = time.perf_counter()
    c = fn()
    c.runtime_s = time.perf_counter() - t0
    return c


# ---------------------------------------------------------------------------
# suites


def _parabolic_models():
    return [ModelSpec.cproj(2), ModelSpec.quat(2), ModelSpec.cr(2, 1)]


def suite_algebra(cfg: SuiteConfig, rng) -> list[Check]:
    def closure():
        worst = 0.0
        for model in _parabolic_models():
            for i in model.grades():
                for j in model.grades():
                    if i + j not in model.grades() and i + j != 0:
                        target = None
                    else:
                        target = i + j
                    for X in component_basis(model, i):
                        for Y in component_basis(model, j):
                            Z = bracket(X, Y)
                            worst = max(worst, Z.norm() if target is None else Z.off_pattern(target))
        return Check("grading_closure", "brackets respect the grading", worst, 1e-12)

    def ad_g0():
        worst = 0.0
        for model in _parabolic_models():
            for _ in range(cfg.samples):
                g = random_algebra_element(model, rng, grade=0, scale=0.5).exp()
                i = int(rng.choice(model.grades()))
                X = random_algebra_element(model, rng, grade=i)
                worst = max(worst, adjoint(g, X).off_pattern(i) / max(1.0, X.norm()))
        return Check("ad_g0_preserves_grading", "G0 acts by graded automorphisms", worst, 1e-10)

    def exp_log():
        worst = 0.0
        for model in _parabolic_models():
            for _ in range(cfg.samples):
                X = random_algebra_element(model, rng, scale=0.3)
                L = reduce_center(model, mat_log(X.exp()))
                worst = max(worst, (L - X.reduced().matrix).norm())
        return Check("exp_log_roundtrip", "group exponential", worst, 1e-10)

    return [_timed(closure), _timed(ad_g0), _timed(exp_log)]


def suite_models(cfg: SuiteConfig, rng) -> list[Check]:
    cases = [
        E.make_case(ModelSpec.cproj(2), [1.0, 0.5]),
        E.make_case(ModelSpec.quat(2), [[1.0, 0.2, 0.0, 0.3], [0.0, 0.0, 1.0, 0.0]]),
        E.make_case(ModelSpec.cr(2, 1), [1.0, 0.3j, 0.2], s=0.7),
    ]

    def orbits():
        worst = 0.0
        for c in cases:
            for _ in range(cfg.samples):
                pt = random_point(c.model, rng)
                for k in (1, 7, 50):
                    worst = max(worst, point_distance(E.orbit(c, pt, k), E.orbit_oracle(c, pt, k)))
        return Check("orbit_formula", "closed-form orbits of a^k", worst, 1e-9)

    def null_cone():
        model = ModelSpec.cr(2, 1)
        worst = max(random_point(model, rng).null_residual() for _ in range(cfg.samples))
        return Check("null_cone_residual", "points on the h_pq null cone", worst, 1e-12)

    def chart():
        worst = 0.0
        for model in _parabolic_models():
            for _ in range(cfg.samples):
                y = rng.standard_normal(model.base_dim)
                worst = max(worst, float(np.max(np.abs(to_chart(from_chart(model, y)) - y))))
        return Check("chart_roundtrip", "standard chart r = 1", worst, 1e-12)

    def proj():
        model = ModelSpec.cproj(2)
        X = random_algebra_element(model, rng).exp()
        ok = proj_equiv(X, X.scale(2.0 - 1.5j), model.center_tag) and not proj_equiv(X, X @ X, model.center_tag)
        return Check("projective_equivalence", "quotient by the center", ok, None, "flag")

    return [_timed(orbits), _timed(null_cone), _timed(chart), _timed(proj)]


def suite_development(cfg: SuiteConfig, rng) -> list[Check]:
    model = ModelSpec.cproj(2)
    G = GeometryHandle.klein(model)
    X = random_algebra_element(model, rng, scale=0.5)
    Y = random_algebra_element(model, rng, scale=0.5)

    def reparam():
        fn = lambda t: X.scale(t).exp()  # noqa: E731
        p = SampledPath.from_function(G, fn, cfg.N, lambda t: fn(t) @ X.matrix)
        a = develop_endpoint(p)
        b = develop_endpoint(p.reparametrize(lambda t: t * t, lambda t: 2 * t))
        return Check("reparametrization_invariance", "endpoint does not depend on parametrization", (a - b).norm(), 1e-7)

    def halving():
        f = lambda t: X + Y.scale(t)  # noqa: E731
        ref = solution_path(model, f, 3200).end
        errs = [(solution_path(model, f, n).end - ref).norm() for n in (100, 200, 400)]
        ratio = errs[1] / errs[2]
        return Check("step_halving_ratio", "second-order development", ratio, (3.0, 5.0), "window", detail={"errors": errs})

    def continuity():
        fs = [(lambda t, k=k: X.scale(1 + 1 / k) + Y.scale(t / k)) for k in (2, 4, 8, 16)]
        rep = develop_continuity_probe(model, fs, lambda t: X, n=200)
        return Check("continuity_ratio", "continuous dependence of development", max(rep.ratios), 10.0, detail={"distances": rep.distances})

    def shrinking():
        paths = [SampledPath.from_function(G, (lambda t, k=k: X.scale(t / k).exp()), 50) for k in (1, 10, 100, 10**4, 10**7)]
        vals = shrinking_probe(paths)
        mono = all(b < a for a, b in zip(vals, vals[1:]))
        return Check("shrinking_development", "shrinking paths develop near e", vals[-1] if mono else float("inf"), 1e-6, detail={"values": vals})

    return [_timed(reparam), _timed(halving), _timed(continuity), _timed(shrinking)]


def suite_holonomy(cfg: SuiteConfig, rng) -> list[Check]:
    model = ModelSpec.affine(2)
    T = GeometryHandle.quotient(model, 2)
    t = np.linspace(0.0, 1.0, 101)

    def gen_table():
        table, worst = {}, 0.0
        for name, d in (("e1", [1.0, 0.0]), ("e2", [0.0, 1.0]), ("e1+e2", [1.0, 1.0])):
            loop = np.outer(t, d)
            h = holonomy(T, loop)
            expect = T.deck(np.array(d))
            table[name] = [float(v) for v in h.data[:-1, -1]]
            worst = max(worst, (h - expect).norm())
        return Check("torus_generators", "holonomy of the torus quotient", worst, 1e-7, detail={"translations": table})

    def law():
        a = holonomy(T, np.outer(t, [1.0, 0.0]))
        b = holonomy(T, np.outer(t, [0.0, 1.0]))
        both = holonomy(T, np.vstack([np.outer(t, [1.0, 0.0]), np.array([1.0, 0.0]) + np.outer(t[1:], [0.0, 1.0])]))
        return Check("holonomy_group_law", "holonomy of a concatenation", (both - a @ b).norm(), 1e-7)

    def klein_loop():
        K = GeometryHandle.klein(ModelSpec.cproj(2))
        loop = np.stack([0.3 * np.sin(2 * np.pi * t), 0.2 * np.sin(4 * np.pi * t), 0.1 * (1 - np.cos(2 * np.pi * t)), 0 * t], 1)
        e = K.identity()
        return Check("klein_loop_trivial", "trivial holonomy of the model", (holonomy(K, loop) - e).norm(), 1e-7)

    def path_dep():
        g = T.identity().data.copy()
        g[:-1, -1] = [0.3, 0.2]
        try:
            developing_map(T, Mat(g))
            found = False
        except PathDependenceError:
            found = True
        return Check("path_dependence_detected", "developing map needs trivial holonomy", found, None, "flag")

    return [_timed(gen_table), _timed(law), _timed(klein_loop), _timed(path_dep)]


DEFAULT_CASES = {
    "cproj": ({"m": 2}, [1.0, 0.0]),
    "quat": ({"m": 1}, [1.0]),
    "cr": ({"p": 1, "q": 0}, [1.0]),
}


def _ensnare_case(cfg: SuiteConfig, kind: str) -> E.EnsnareCase:
    mdef, bdef = DEFAULT_CASES[kind]
    mp = {**mdef, **cfg.model}
    if kind == "cr":
        model = ModelSpec.cr(int(mp.get("p", 1)), int(mp.get("q", 0)))
    else:
        model = ModelSpec.cproj(int(mp["m"])) if kind == "cproj" else ModelSpec.quat(int(mp["m"]))
    beta = cfg.beta if cfg.beta is not None else (bdef if model.n == len(bdef) else [1.0] + [0.0] * (model.n - 1))
    case_cfg = {"beta": beta, "s": cfg.s}
    if cfg.y is not None:
        case_cfg["y"] = cfg.y
    return E.case_from_config(model, case_cfg)


def expected_jacobian_exponent(case: E.EnsnareCase) -> float:
    """-2 when the chart map is a scalar Moebius map of the coordinates, else -1."""
    if case.model.kind == "cr":
        return -1.0 if case.a.beta_zero else -2.0
    return -2.0 if case.model.m == 1 else -1.0


def suite_ensnare(cfg: SuiteConfig, rng, name: str) -> tuple[list[Check], dict]:
    case = _ensnare_case(cfg, ENSNARE_KIND[name])
    series: dict = {}

    def verdict():
        rep = E.ensnare_verdict(
            case,
            {
                "k_max": cfg.k_max,
                "n_samples": cfg.samples,
                "exponent_window": (-1.0 - 0.2 * cfg.tol, -1.0 + 0.2 * cfg.tol),
                "jacobian_window": (-2.0 - 0.2 * cfg.tol, -1.0 + 0.2 * cfg.tol),
                "fixed": 1e-10 * cfg.tol,
                "move": 1e-6 / cfg.tol,
            },
            seed=int(rng.integers(2**31)),
        )
        series.update(rep.get("series", {}))
        detail = {"codimension": rep["codimension"], "descriptor": rep["descriptor"], **rep.get("evidence", {})}
        if "reason" in rep:
            detail["reason"] = rep["reason"]
        return Check(f"{name}_verdict", "ensnaring of U = complement of Fix(a)", rep["status"] == "PASS", None, "flag", detail=detail)

    checks = [_timed(verdict)]
    if series:
        expect = expected_jacobian_exponent(case)
        sh, jac, orb = series["shrink"], series["jacobian"], series["orbit"]
        checks += [
            Check(f"{name}_shrink_exponent", "first-order shrink of zeta_U", sh.exponent, (-1.2, -0.8), "window"),
            Check(f"{name}_jacobian_exponent", "locally uniform decay of a^k_*", jac.exponent, (expect - 0.2, expect + 0.2), "window"),
            Check(f"{name}_orbit_exponent", "orbits converge to q(e)", orb.exponent, (-1.2, -0.8), "window"),
        ]
    return checks, series


def run_suite(cfg: SuiteConfig) -> tuple[dict, dict]:
    """Run the configured suite(s); returns (report, series by name)."""
    cfg.validate()
    records, all_series = [], {}
    for name in cfg.suites():
        rng = np.random.default_rng(cfg.seed)
        if name.startswith("ensnare"):
            checks, series = suite_ensnare(cfg, rng, name)
            all_series.update({f"{name}_{k}": v for k, v in series.items()})
        else:
            checks = {"algebra": suite_algebra, "models": suite_models, "development": suite_development, "holonomy": suite_holonomy}[name](cfg, rng)
        for c in checks:
            ok = c.status(cfg.tol)
            records.append(
                {
                    "suite": name,
                    "name": c.name,
                    "anchor": c.anchor,
                    "status": "PASS" if ok else "FAIL",
                    "measured": _jsonable(c.measured),
                    "tolerance": _jsonable(c.tolerance(cfg.tol)),
                    "runtime_s": round(c.runtime_s, 6) if cfg.timing else 0.0,
                    "detail": _jsonable(c.detail),
                }
            )
    names = [(r["suite"], r["name"]) for r in records]
    assert len(names) == len(set(names)), "duplicate check names"
    report = {
        "suite": cfg.suite,
        "seed": cfg.seed,
        "config": _jsonable({k: v for k, v in cfg.__dict__.items() if k not in ("out", "series_dir", "timing")}),
        "checks": records,
        "status": "PASS" if all(r["status"] == "PASS" for r in records) else "FAIL",
    }
    return report, all_series


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def export_series(series: E.DecaySeries, path) -> None:
    """CSV with header ``k,value``; floats in shortest round-trip form."""
    lines = ["k,value"] + [f"{int(k)},{float(v)!r}" for k, v in zip(series.k, series.values)]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cartan-lab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", help="|".join(SUITES + ("all",)))
    v.add_argument("--config", help="JSON config file")
    v.add_argument("--kmax", type=int, dest="k_max")
    v.add_argument("--tol", type=float, help="tolerance multiplier (>1 loosens)")
    v.add_argument("--seed", type=int)
    v.add_argument("--N", type=int, dest="N")
    v.add_argument("--out", help="report path (default: stdout)")
    v.add_argument("--series-dir", help="directory for decay-series CSV files")
    v.add_argument("--no-timing", action="store_true", help="write runtime_s = 0 for byte-stable reports")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        d = {}
        if args.config:
            d = json.loads(Path(args.config).read_text())
            if not isinstance(d, dict):
                raise ConfigError("config must be a JSON object")
        for key in ("suite", "k_max", "tol", "seed", "N", "out", "series_dir"):
            val = getattr(args, key)
            if val is not None:
                d[key] = val
        if args.no_timing:
            d["timing"] = False
        cfg = SuiteConfig.from_dict(d)
    except (ConfigError, TypeError, json.JSONDecodeError, OSError) as exc:
        parser.error(str(exc))  # exits with status 2
    report, series = run_suite(cfg)
    text = dumps_report(report)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.series_dir:
        d = Path(cfg.series_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, s in sorted(series.items()):
            export_series(s, d / f"{name}.csv")
    for r in report["checks"]:
        print(f"{r['status']}  {r['suite']}/{r['name']}", file=sys.stderr)
    return 0 if report["status"] == "PASS" else 1


if __name__ == "__main__":
    sys.exit(main())
