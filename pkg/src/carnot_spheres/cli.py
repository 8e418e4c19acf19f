"""Command-line front end: ``carnot <area> <action> [options]``.

Reports go to stdout as JSON.  Exit status 0 means every check passed,
1 that a verification failed (the report carries the witness) and 2 a
usage or configuration error.  ``--preset NAME`` loads a stored
configuration from ``$CARNOT_PRESET_DIR`` or the bundled presets.
"""
from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import algebra as alg
from . import control as ctl
from . import experiments
from . import heisenberg as heis
from . import jsonio
from . import norms
from . import plane
from . import spheres


class ConfigError(ValueError):
    """Bad command line, preset or input file (exit status 2)."""


CONFIG_FIELDS = {"command", "group", "params", "seed", "workers", "samples", "tol", "out", "description"}

# commands that draw random samples and therefore need a seed
SAMPLING = {
    ("norm", "axioms"), ("norm", "equiv"), ("norm", "holder"),
    ("ball", "verify"), ("ball", "euclid"), ("heis", "star"),
    ("plane", "yregion"), ("plane", "remark"),
    ("control", "tau"), ("control", "geodesic"), ("control", "d0sq"),
    ("sphere", "sample"), ("sphere", "dim"), ("sphere", "regularity"), ("sphere", "cone"),
    ("experiment",),
}


# ---------------------------------------------------------------------------
# input helpers


def load_group(ref) -> alg.GradedAlgebra:
    if ref is None:
        raise ConfigError("a group is required (--group NAME or FILE)")
    if isinstance(ref, dict):
        return alg.GradedAlgebra.from_dict(ref)
    if ref in alg.BUILTINS:
        return alg.builtin(ref)
    path = Path(ref)
    if not path.exists():
        raise ConfigError(f"unknown group {ref!r}: not a built-in name or a file")
    return alg.GradedAlgebra.from_dict(jsonio.load(path))


def parse_vector(text) -> np.ndarray:
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    try:
        return np.array([float(x) for x in str(text).replace(" ", "").split(",") if x], dtype=float)
    except ValueError:
        raise ConfigError(f"cannot parse vector {text!r}") from None


def parse_points(args, dim: int) -> np.ndarray:
    if getattr(args, "points", None):
        _, pts = jsonio.read_csv(args.points)
    elif getattr(args, "point", None):
        pts = np.array([parse_vector(p) for p in args.point])
    else:
        raise ConfigError("give --point x,y,... (repeatable) or --points FILE.csv")
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dim:
        raise ConfigError(f"points have {pts.shape[1]} coordinates, group has dimension {dim}")
    return pts


def parse_control(args, spec) -> ctl.ControlSignal:
    norm = ctl.V1Norm.parse(_norm_arg(args.norm))
    if args.control_file:
        c = ctl.ControlSignal.from_dict(jsonio.load(args.control_file))
        return ctl.ControlSignal(c.values, norm if args.norm else c.norm)
    if args.u is None:
        raise ConfigError("give --u 'a,b;c,d' (one segment per ';') or --control-file")
    rows = [parse_vector(s) for s in str(args.u).split(";") if s.strip()]
    vals = np.array(rows)
    if args.m and len(rows) == 1:
        vals = np.tile(vals, (args.m, 1))
    if vals.shape[1] != len(spec.first_layer):
        raise ConfigError(f"controls need {len(spec.first_layer)} components")
    return ctl.ControlSignal(vals, norm)


def _norm_arg(text):
    if text is None:
        return "euclidean"
    if str(text).endswith(".json"):
        return jsonio.load(text)
    return text


def ball_from_description(data: dict):
    """``(group, ball)`` from a JSON ball description (see the README for the kinds)."""
    kind = data.get("kind")
    if kind == "heisenberg-profile":
        return alg.heisenberg(), heis.ball_from_dict(data)
    if kind == "euclidean":
        spec = load_group(data.get("group", "heisenberg"))
        return spec, norms.euclidean_ball_candidate(spec, float(data["radius"]))
    if kind == "yregion":
        region = plane.YRegion(float(data.get("eps", 1.0)), float(data.get("beta", 1.0)),
                               float(data["C"]), float(data.get("alpha", 1.0)))
        return alg.builtin("plane22"), region.ball()
    if kind == "fractal":
        params = (plane.FractalBallParams.from_dict(data["params"]) if "params" in data
                  else plane.FractalBallParams.default())
        return alg.builtin("plane22"), plane.build_fractal_ball(params)
    if kind == "remark":
        return alg.builtin("plane22"), plane.remark_ball()
    if kind == "gauge":
        spec = load_group(data["group"])
        g = named_gauge(data["gauge"], spec)
        return spec, norms.gauge_ball(spec, g, float(data["bounding_radius"]), float(data["interior_radius"]))
    raise ConfigError(f"unknown ball kind {kind!r}")


def load_ball(ref):
    if ref is None:
        raise ConfigError("a ball description file is required")
    if isinstance(ref, dict):
        return ball_from_description(ref)
    try:
        data = jsonio.load(ref)
    except FileNotFoundError:
        raise ConfigError(f"no such ball file: {ref}") from None
    return ball_from_description(data)


def named_gauge(name: str, spec):
    """Gauge by name: box, euclidean, koranyi, cc, cc-product, engel-ball, or a ball file."""
    if name == "box":
        return norms.box_quasi_norm_gauge(spec)
    if name == "euclidean":
        return norms.euclidean_gauge()
    if name == "koranyi":
        return norms.koranyi_gauge()
    if name == "cc":
        return norms.heisenberg_cc_gauge()
    if name == "cc-product":
        return norms.product_gauge(norms.heisenberg_cc_gauge(), 3)
    if name == "engel-ball":
        return experiments.engel_gauge()
    if name and Path(name).exists():
        bspec, ball = load_ball(name)
        return norms.ball_gauge(bspec, ball)
    raise ConfigError(f"unknown gauge {name!r}")


def _profile(args, domain):
    name = args.g
    if name in heis.NAMED_PROFILES:
        if name == "random":
            return heis.random_lipschitz_profile(domain, args.lipschitz, seed=args.seed or 0)
        return heis.NAMED_PROFILES[name](domain)
    if name and Path(name).exists():
        return heis.profile_from_dict(jsonio.load(name), domain)
    raise ConfigError(f"unknown profile {name!r}; choose from {sorted(heis.NAMED_PROFILES)} or a JSON file")


def _domain(args):
    if args.domain in (None, "disc"):
        return heis.ConvexDomain.disc()
    if Path(args.domain).exists():
        return heis.ConvexDomain.from_dict(jsonio.load(args.domain))
    raise ConfigError(f"unknown domain {args.domain!r}")


# ---------------------------------------------------------------------------
# command implementations; each returns a report dict


def cmd_group_validate(a):
    spec = load_group(a.target or a.group)
    bad = alg.validate_algebra(spec)
    return {"group": spec.to_dict(), "violations": bad, "witness": bad[0] if bad else None,
            "passed": not bad}


def cmd_group_info(a):
    spec = load_group(a.target or a.group)
    layers = {str(w): [spec.names[i] for i in idx] for w, idx in spec.layers.items()}
    return {"group": spec.to_dict(), "dim": spec.dim, "layers": layers, "step": str(spec.step),
            "homogeneous_dimension": str(sum(spec.weights)), "bch_order": spec.bch_order,
            "abelian": spec.is_abelian, "first_layer": [int(i) for i in spec.first_layer],
            "stratified_weights": all(w.denominator == 1 for w in spec.weights),
            "valid": not alg.validate_algebra(spec), "passed": True}


def cmd_norm_eval(a):
    spec = load_group(a.group)
    g = named_gauge(a.gauge, spec)
    pts = parse_points(a, spec.dim)
    return {"gauge": g.name, "points": pts, "values": np.atleast_1d(g(pts)), "passed": True}


def cmd_norm_axioms(a):
    spec = load_group(a.group)
    g = named_gauge(a.gauge, spec)
    return norms.verify_norm_axioms(spec, g, a.samples or 10_000, a.seed, workers=a.workers,
                                    tol=a.tol or 1e-9)


def cmd_norm_equiv(a):
    spec = load_group(a.group)
    rep = norms.equivalence_constants(spec, named_gauge(a.gauge, spec), named_gauge(a.against, spec),
                                      a.samples or 10_000, a.seed)
    rep["passed"] = bool(np.isfinite(rep["C"]))
    return rep


def cmd_norm_holder(a):
    spec = load_group(a.group)
    rep = norms.holder_bound_check(spec, named_gauge(a.gauge, spec), a.k1, a.k2,
                                   a.samples or 10_000, a.eps, a.seed)
    rep.setdefault("passed", bool(rep.get("finite", True)))
    return rep


def cmd_ball_verify(a):
    spec, ball = load_ball(a.ball)
    which = tuple(a.checks.split(",")) if a.checks else norms.ALL_CHECKS
    return norms.verify_ball_conditions(spec, ball, a.samples or 10_000, a.seed, which=which,
                                        workers=a.workers, slack=a.tol or 1e-9)


def cmd_ball_gauge(a):
    spec, ball = load_ball(a.ball)
    pts = parse_points(a, spec.dim)
    vals = np.atleast_1d(norms.gauge_from_ball(spec, ball, pts))
    return {"ball": ball.name, "points": pts, "values": vals, "passed": True}


def cmd_ball_euclid(a):
    spec = load_group(a.group)
    radii = parse_vector(a.radii)
    rep = norms.euclidean_radius_threshold(spec, radii, a.samples or 5000, a.seed, workers=a.workers)
    rep["passed"] = True
    return rep


def cmd_heis_build(a):
    domain = _domain(a)
    g = _profile(a, domain)
    ball = heis.build_ball(g, domain, b=a.b)
    desc = heis.ball_to_dict(ball)
    if a.out:
        jsonio.dump(desc, a.out)
    return {"A": heis.compute_A(g, domain), "b": desc["b"], "lipschitz": g.lipschitz, "sup_abs": g.sup_abs,
            "domain": desc["domain"], "profile": desc["profile"], "out": a.out, "passed": True}


def cmd_heis_check62(a):
    domain = _domain(a)
    g = _profile(a, domain)
    b = heis.compute_offset(g, domain) if a.b is None else a.b
    rep = heis.verify_condition_62(g.shifted(b), domain, a.n_points, a.n_t, workers=a.workers,
                                   tol=a.tol or 1e-9)
    rep["b"] = b
    return rep


def cmd_heis_profile(a):
    _, ball = load_ball(a.ball)
    meta = ball.meta
    domain = heis.ConvexDomain.from_dict(meta["domain"])
    g = heis.profile_from_dict(meta["profile"], domain)
    pts = domain.grid(a.grid, a.scale)
    z = heis.extract_profile(ball, pts)["z"]
    err = float(np.max(np.abs(z - (g(pts) + meta["b"]))))
    lip = heis.profile_lipschitz_quotients(ball, domain, a.scale)
    return {"points": len(pts), "sup_error": err, "tolerance": a.tol or 1e-6, "b": meta["b"],
            "lipschitz": lip, "passed": err <= (a.tol or 1e-6)}


def cmd_heis_star(a):
    spec, ball = load_ball(a.ball)
    n = a.samples or 10_000
    star = heis.star_shape_check(ball, n, a.seed, workers=a.workers, spec=spec)
    vert = heis.vertical_segment_check(ball, n, a.seed, workers=a.workers, spec=spec)
    return {"star": star, "vertical": vert, "passed": bool(star["passed"] and vert["passed"])}


def cmd_plane_yregion(a):
    spec = alg.builtin("plane22")
    region = plane.YRegion(a.eps, a.beta, a.C, a.alpha)
    rep = norms.verify_ball_conditions(spec, region.ball(), a.samples or 100_000, a.seed,
                                       which=("combination",), workers=a.workers, slack=a.tol or 1e-9)
    out = {"C": a.C, "in_window": region.in_window, "combination": rep["checks"][0], "passed": rep["passed"]}
    if not rep["passed"] and a.eps == 1 and a.beta == 1 and a.alpha == 1:
        out["explicit_witness"] = plane.y_region_witness(a.C)
    return out


def cmd_plane_fractal(a):
    params = plane.FractalBallParams.default(a.m_min, a.m_max, a.terms, a.s_count)
    bad = params.violations()
    out = {"params": params.to_dict(), "violations": bad, "eps": params.eps}
    ok = not bad
    if a.dim:
        ts = plane.arc_samples(params, a.n_points)
        dim = spheres.box_counting_dimension(graph=(ts, params.f(np.pi / 2 + ts)), scales=(a.scale_min, a.scale_max))
        out["dimension"] = dim
        out["window_check"] = spheres.dimension_bounds_check(dim["dimension"], 2, 2, dim["ci"])
        if a.out:
            pts = plane.arc_point(params.f, ts)
            jsonio.write_csv(a.out, ["t", "x", "y"], np.column_stack([ts, pts]))
    if a.verify:
        ball = plane.build_fractal_ball(params)
        if a.seed is None:
            raise ConfigError("--verify samples the ball and needs --seed")
        rep = norms.verify_ball_conditions(alg.builtin("plane22"), ball, a.samples or 10_000, a.seed,
                                           workers=a.workers)
        out["verification"] = rep
        ok &= rep["passed"]
    out["passed"] = bool(ok)
    return out


def cmd_plane_remark(a):
    spec = alg.builtin("plane22")
    ball = plane.remark_ball()
    rep = norms.verify_ball_conditions(spec, ball, a.samples or 10_000, a.seed, workers=a.workers)
    gauge = norms.ball_gauge(spec, ball)
    reg = spheres.graph_regularity_estimate(gauge, {"kind": "line", "base": [0, 1], "direction": [1, 0]})
    return {"verification": rep, "holder_near_top": reg["holder_exponent"],
            "tilted_graph_lipschitz": plane.tilted_graph_lipschitz(), "passed": rep["passed"]}


def cmd_control_endpoint(a):
    spec = load_group(a.group)
    u = parse_control(a, spec)
    o = parse_vector(a.origin) if a.origin else None
    out = {"m": u.m, "endpoint": ctl.endpoint(spec, u.values, o), "energy": u.energy}
    if a.ode:
        ode = ctl.endpoint_ode(spec, u.values, o, steps=a.steps)
        out["ode_endpoint"] = ode
        out["ode_difference"] = float(np.max(np.abs(ode - out["endpoint"])))
    out["passed"] = True
    return out


def cmd_control_jacobian(a):
    spec = load_group(a.group)
    u = parse_control(a, spec)
    jac = ctl.endpoint_jacobian(spec, u.values, method=a.method)
    out = {"method": a.method, "matrix": jac.matrix, "rank": jac.rank, "full_rank": jac.rank == spec.dim}
    if a.fd:
        fd = ctl.fd_jacobian(spec, u.values)
        out["fd_relative_error"] = float(np.max(np.abs(jac.blocks - fd.blocks)) / np.max(np.abs(fd.blocks)))
    out["passed"] = True
    return out


def cmd_control_tau(a):
    spec = load_group(a.group)
    u = parse_control(a, spec)
    t = ctl.tau(spec, u, seed=a.seed)
    tol = a.tol or 1e-8
    return {"tau": t, "singular": t <= tol, "tol": tol, "m": u.m, "norm": u.norm.to_dict(), "passed": True}


def cmd_control_scan(a):
    spec = load_group(a.group)
    rep = ctl.singular_scan(spec, m=a.m or 16, tol=a.tol or 1e-8, norm=_norm_arg(a.norm),
                            count=a.count, workers=a.workers)
    rep["passed"] = True
    return rep


def cmd_control_geodesic(a):
    spec = load_group(a.group)
    target = parse_vector(a.target)
    sol = ctl.geodesic_solve(spec, _norm_arg(a.norm), target, m=a.m or 32, restarts=a.restarts,
                             seed=a.seed, workers=a.workers)
    out = sol.to_dict()
    out["target"] = target
    if a.expect is not None:
        out["expected"] = a.expect
        out["error"] = abs(sol.value - a.expect)
        out["passed"] = bool(sol.converged and out["error"] <= (a.tol or 1e-6))
    else:
        out["passed"] = bool(sol.converged)
    return out


def cmd_control_d0sq(a):
    spec = load_group(a.group)
    rep = ctl.d0_squared_lipschitz_probe(spec, named_gauge(a.gauge, spec), parse_vector(a.radii),
                                         a.samples or 2000, a.seed)
    rep["passed"] = rep["bounded"]
    return rep


def cmd_sphere_sample(a):
    spec = load_group(a.group)
    g = named_gauge(a.gauge, spec)
    s = spheres.sample_sphere(spec, g, a.samples or 1000, a.seed)
    if a.out:
        s.to_csv(a.out)
    err = spheres.radial_consistency(s, g)
    return {"points": len(s.directions), "radial_error": err, "out": a.out, "passed": err <= (a.tol or 1e-6)}


def cmd_sphere_dim(a):
    spec = load_group(a.group)
    g = named_gauge(a.gauge, spec)
    s = spheres.sample_sphere(spec, g, a.samples or 200_000, a.seed)
    dim = spheres.box_counting_dimension(s.sphere_points, scales=(a.scale_min, a.scale_max))
    out = {"dimension": dim}
    if a.s is not None:
        out["window_check"] = spheres.dimension_bounds_check(dim["dimension"], spec.dim, a.s, dim["ci"], a.tol or 0.0)
        out["passed"] = out["window_check"]["passed"]
    else:
        out["passed"] = True
    return out


def cmd_sphere_regularity(a):
    spec = load_group(a.group)
    g = named_gauge(a.gauge, spec)
    if a.line_base is not None:
        region = {"kind": "line", "base": parse_vector(a.line_base), "direction": parse_vector(a.direction)}
    else:
        region = {"kind": "patch", "center": parse_vector(a.center), "radius": a.radius}
    rep = spheres.graph_regularity_estimate(g, region, (a.scale_min, a.scale_max), seed=a.seed)
    if a.expect is not None:
        rep["expected"] = a.expect
        rep["passed"] = abs(rep["holder_exponent"] - a.expect) <= (a.tol or 0.05)
    else:
        rep["passed"] = True
    return rep


def cmd_sphere_cusp(a):
    spec = load_group(a.group)
    rep = spheres.product_cusp_exponent(named_gauge(a.gauge, spec), parse_vector(a.z_vector))
    if a.expect is not None:
        rep["expected"] = a.expect
        rep["passed"] = abs(rep["estimate"] - a.expect) <= (a.tol or 0.05)
    else:
        rep["passed"] = True
    return rep


def cmd_sphere_cone(a):
    spec, ball = load_ball(a.ball)
    rep = spheres.tent_cone_probe(spec, ball, parse_vector(a.at), parse_vector(a.apertures),
                                  parse_vector(a.heights), seed=a.seed)
    rep["passed"] = rep["max_aperture"] is not None
    return rep


def cmd_experiment(a):
    if a.name == "list":
        return {"experiments": {k: (f.__doc__ or "").strip().splitlines()[0] for k, f in experiments.EXPERIMENTS.items()},
                "passed": True}
    if a.name not in experiments.EXPERIMENTS:
        raise ConfigError(f"unknown experiment {a.name!r}")
    fn = experiments.EXPERIMENTS[a.name]
    accepted = inspect.signature(fn).parameters
    kw = dict(a.options or {})
    if "seed" in accepted:
        kw.setdefault("seed", a.seed)
    if "workers" in accepted:
        kw.setdefault("workers", a.workers)
    try:
        rep = fn(**kw)
    except TypeError as e:
        raise ConfigError(f"bad options for {a.name}: {e}") from None
    if not a.timing:
        rep = _strip_timing(rep)
    return rep


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if not k.endswith("runtime_s")}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# parser


def _common(p, seed=True):
    p.add_argument("--seed", type=int, default=None, help="random seed (u64)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--preset", default=None)
    p.add_argument("--config", default=None, help="JSON experiment configuration")
    p.add_argument("--group", default=None, help="built-in group name or JSON file")


def _control_args(p):
    p.add_argument("--u", default=None, help="segments 'a,b;c,d'")
    p.add_argument("--control-file", default=None)
    p.add_argument("--m", type=int, default=None, help="repeat a single segment m times")
    p.add_argument("--norm", default=None, help="euclidean, l1, linf or polygon JSON file")


def _heis_args(p):
    p.add_argument("--g", default="abs-x", help="zero, abs-x, random or a profile JSON file")
    p.add_argument("--lipschitz", type=float, default=0.3)
    p.add_argument("--domain", default="disc")
    p.add_argument("--b", type=float, default=None)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="carnot", description="Unit spheres of homogeneous distances on graded groups.")
    parser.add_argument("--version", action="version", version=f"carnot-spheres {__version__}")
    parser.add_argument("--preset", default=None, help="run a stored configuration")
    parser.add_argument("--config", default=None)
    areas = parser.add_subparsers(dest="area")
    leaves: dict = {}

    def leaf(area_parser, path, name, func, help_=None):
        p = area_parser.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(func=func, path=path)
        leaves[path] = p
        return p

    g = areas.add_parser("group", help="validate and describe graded algebras").add_subparsers(dest="action")
    for nm, fn in (("validate", cmd_group_validate), ("info", cmd_group_info)):
        leaf(g, ("group", nm), nm, fn).add_argument("target", nargs="?")

    n = areas.add_parser("norm", help="homogeneous gauges").add_subparsers(dest="action")
    p = leaf(n, ("norm", "eval"), "eval", cmd_norm_eval)
    p.add_argument("--gauge", default="box")
    p.add_argument("--point", action="append")
    p.add_argument("--points")
    leaf(n, ("norm", "axioms"), "axioms", cmd_norm_axioms).add_argument("--gauge", default="box")
    p = leaf(n, ("norm", "equiv"), "equiv", cmd_norm_equiv)
    p.add_argument("--gauge", default="box")
    p.add_argument("--against", default="euclidean")
    p = leaf(n, ("norm", "holder"), "holder", cmd_norm_holder)
    p.add_argument("--gauge", default="box")
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--k2", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.1)

    b = areas.add_parser("ball", help="unit-ball candidates").add_subparsers(dest="action")
    p = leaf(b, ("ball", "verify"), "verify", cmd_ball_verify)
    p.add_argument("ball", nargs="?")
    p.add_argument("--checks", default=None, help="comma list of " + ",".join(norms.ALL_CHECKS))
    p = leaf(b, ("ball", "gauge"), "gauge", cmd_ball_gauge)
    p.add_argument("ball", nargs="?")
    p.add_argument("--point", action="append")
    p.add_argument("--points")
    leaf(b, ("ball", "euclid"), "euclid", cmd_ball_euclid).add_argument("--radii", default="0.25,0.5,1,2,4,8")

    h = areas.add_parser("heis", help="Heisenberg ball builder").add_subparsers(dest="action")
    _heis_args(leaf(h, ("heis", "build"), "build", cmd_heis_build))
    p = leaf(h, ("heis", "check62"), "check62", cmd_heis_check62)
    _heis_args(p)
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--n-t", type=int, default=21)
    p = leaf(h, ("heis", "profile"), "profile", cmd_heis_profile)
    p.add_argument("ball", nargs="?")
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--scale", type=float, default=0.9)
    leaf(h, ("heis", "star"), "star", cmd_heis_star).add_argument("ball", nargs="?")

    pl = areas.add_parser("plane", help="planar constructions").add_subparsers(dest="action")
    p = leaf(pl, ("plane", "yregion"), "yregion", cmd_plane_yregion)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p = leaf(pl, ("plane", "fractal"), "fractal", cmd_plane_fractal)
    p.add_argument("--dim", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--m-min", type=float, default=1.0)
    p.add_argument("--m-max", type=float, default=1.2)
    p.add_argument("--terms", type=int, default=24)
    p.add_argument("--s-count", type=int, default=41)
    p.add_argument("--n-points", type=int, default=100_000)
    p.add_argument("--scale-min", type=int, default=4)
    p.add_argument("--scale-max", type=int, default=11)
    leaf(pl, ("plane", "remark"), "remark", cmd_plane_remark)

    c = areas.add_parser("control", help="end-point map and geodesics").add_subparsers(dest="action")
    p = leaf(c, ("control", "endpoint"), "endpoint", cmd_control_endpoint)
    _control_args(p)
    p.add_argument("--origin", default=None)
    p.add_argument("--ode", action="store_true")
    p.add_argument("--steps", type=int, default=1000)
    p = leaf(c, ("control", "jacobian"), "jacobian", cmd_control_jacobian)
    _control_args(p)
    p.add_argument("--method", choices=["augmented", "closed"], default="augmented")
    p.add_argument("--fd", action="store_true")
    _control_args(leaf(c, ("control", "tau"), "tau", cmd_control_tau))
    p = leaf(c, ("control", "scan"), "scan", cmd_control_scan)
    p.add_argument("--m", type=int, default=16)
    p.add_argument("--norm", default=None)
    p.add_argument("--count", type=int, default=100)
    p = leaf(c, ("control", "geodesic"), "geodesic", cmd_control_geodesic)
    p.add_argument("--target", required=False, default=None)
    p.add_argument("--norm", default=None)
    p.add_argument("--m", type=int, default=32)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--expect", type=float, default=None)
    p = leaf(c, ("control", "d0sq"), "d0sq", cmd_control_d0sq)
    p.add_argument("--gauge", default="cc")
    p.add_argument("--radii", default="0.5,0.25,0.125")

    s = areas.add_parser("sphere", help="sphere regularity").add_subparsers(dest="action")
    leaf(s, ("sphere", "sample"), "sample", cmd_sphere_sample).add_argument("--gauge", default="box")
    p = leaf(s, ("sphere", "dim"), "dim", cmd_sphere_dim)
    p.add_argument("--gauge", default="box")
    p.add_argument("--s", type=float, default=None, help="step, for the [n-1, n-1/s] window")
    p.add_argument("--scale-min", type=int, default=3)
    p.add_argument("--scale-max", type=int, default=7)
    p = leaf(s, ("sphere", "regularity"), "regularity", cmd_sphere_regularity)
    p.add_argument("--gauge", default="box")
    p.add_argument("--line-base", default=None)
    p.add_argument("--direction", default=None)
    p.add_argument("--center", default=None)
    p.add_argument("--radius", type=float, default=0.2)
    p.add_argument("--scale-min", type=int, default=4)
    p.add_argument("--scale-max", type=int, default=20)
    p.add_argument("--expect", type=float, default=None)
    p = leaf(s, ("sphere", "cusp"), "cusp", cmd_sphere_cusp)
    p.add_argument("--gauge", default="cc")
    p.add_argument("--z-vector", default="0,0,1")
    p.add_argument("--expect", type=float, default=None)
    p = leaf(s, ("sphere", "cone"), "cone", cmd_sphere_cone)
    p.add_argument("ball", nargs="?")
    p.add_argument("--at", default=None, help="point near which boundary points are probed")
    p.add_argument("--apertures", default="0.1,0.3,0.5,0.8,1.0,1.2,1.5")
    p.add_argument("--heights", default="0.05,0.01,0.001")

    p = areas.add_parser("experiment", help="named experiments (one per acceptance item)")
    _common(p)
    p.add_argument("name", nargs="?", default="list")
    p.add_argument("--timing", action="store_true", help="keep wall-clock fields in the report")
    p.set_defaults(func=cmd_experiment, path=("experiment",), options=None)
    leaves[("experiment",)] = p
    return parser, leaves


# ---------------------------------------------------------------------------
# configuration


def preset_dirs() -> list:
    dirs = []
    env = os.environ.get("CARNOT_PRESET_DIR")
    if env:
        dirs.append(Path(env))
    dirs.append(resources.files("carnot_spheres") / "presets")
    return dirs


def find_preset(name: str) -> dict:
    for d in preset_dirs():
        f = d / f"{name}.json"
        if f.is_file():
            return json.loads(f.read_text())
    raise ConfigError(f"preset {name!r} not found in {[str(d) for d in preset_dirs()]}")


def list_presets() -> list[str]:
    names = set()
    for d in preset_dirs():
        if d.is_dir():
            names.update(f.name[:-5] for f in d.iterdir() if f.name.endswith(".json"))
    return sorted(names)


def _command_tokens(cfg) -> list[str]:
    cmd = cfg.get("command", [])
    return cmd.split() if isinstance(cmd, str) else list(cmd)


def check_config(cfg: dict) -> dict:
    unknown = set(cfg) - CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown configuration fields {sorted(unknown)}")
    return cfg


def _apply_config(leaf_parser, cfg: dict, argv_has_positional: bool) -> None:
    dests = {a.dest for a in leaf_parser._actions}
    defaults = {}
    for key in ("group", "seed", "workers", "samples", "tol", "out"):
        if key in cfg:
            defaults[key] = cfg[key]
    for key, val in (cfg.get("params") or {}).items():
        dest = key.replace("-", "_")
        if dest not in dests and dest != "options":
            raise ConfigError(f"unknown parameter {key!r} for this command")
        defaults[dest] = val
    leaf_parser.set_defaults(**defaults)


def resolve(argv: list[str]):
    """Parse ``argv`` with any preset or config file applied as defaults."""
    parser, leaves = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--preset")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    cfg = {}
    if known.preset:
        cfg = check_config(find_preset(known.preset))
    if known.config:
        try:
            cfg = {**cfg, **check_config(jsonio.load(known.config))}
        except FileNotFoundError:
            raise ConfigError(f"no such config file: {known.config}") from None
    tokens = [t for t in argv if not t.startswith("-")]
    if cfg:
        ctokens = _command_tokens(cfg)
        if not ctokens:
            raise ConfigError("configuration lacks a command")
        if not tokens or tokens[0] not in {"group", "norm", "ball", "heis", "plane", "control", "sphere", "experiment"}:
            argv = ctokens + argv
            tokens = ctokens + tokens
        elif tokens[: len(ctokens)] != ctokens[: len(tokens[: len(ctokens)])]:
            raise ConfigError(f"preset is for '{' '.join(ctokens)}', not '{' '.join(tokens[:2])}'")
        path = tuple(ctokens[:1]) if ctokens[0] == "experiment" else tuple(ctokens[:2])
        if path not in leaves:
            raise ConfigError(f"unknown command {' '.join(ctokens)!r} in configuration")
        _apply_config(leaves[path], cfg, len(tokens) > len(path))
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        raise ConfigError("no command given")
    return args


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = resolve(argv)
        listing = args.path == ("experiment",) and args.name == "list"
        if args.path in SAMPLING and args.seed is None and not listing:
            raise ConfigError(f"'{' '.join(args.path)}' samples at random: --seed is required")
        if args.workers < 1:
            raise ConfigError("--workers must be positive")
        report = args.func(args)
    except SystemExit as e:  # argparse usage errors
        return 2 if e.code not in (0, None) else 0
    except (ConfigError, alg.AlgebraError, heis.BuildError, plane.ParameterError,
            ctl.UnsupportedDimension, FileNotFoundError, json.JSONDecodeError) as e:
        print(jsonio.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 2
    text = jsonio.dumps(report)
    print(text)
    keep = args.path in {("heis", "build"), ("sphere", "sample")} or (args.path == ("plane", "fractal") and args.dim)
    if args.out and not keep:
        Path(args.out).write_text(text + "\n")
    return 0 if report.get("passed", True) else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
