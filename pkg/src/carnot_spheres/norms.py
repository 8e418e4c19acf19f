"""Candidate unit balls, homogeneous gauges, and sampled certification.

A :class:`BallSpec` is described by a signed *margin* function that is
nonnegative exactly on the set; violations are counted when the margin drops
below ``-slack``.  A :class:`HomogeneousGauge` is any one-homogeneous function
on the group.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import algebra as alg
from .algebra import GradedAlgebra
from .sampling import chunk_rng, map_chunks, unit_vectors

BISECT_TOL = 1e-10
BISECT_MAXITER = 200
T_GRID = np.linspace(0.0, 1.0, 21)
ALL_CHECKS = ("compact", "interior", "symmetric", "combination")


class InvalidBallError(ValueError):
    """A dilation ray never enters or never leaves the candidate set."""


class SamplingError(RuntimeError):
    """Rejection sampling could not find points in the candidate set."""


@dataclass
class BallSpec:
    """Candidate unit ball given by a margin function (``>= 0`` inside).

    ``box`` holds the half-widths of the rejection box, ``interior_radius``
    the half-width of a coordinate box around 0 contained in the set and
    ``bounding_radius`` a Euclidean radius containing it.  Unbounded sets
    (the planar ``Y`` regions) set ``bounded=False``.
    """

    dim: int
    margin: Callable[[np.ndarray], np.ndarray]
    bounding_radius: float
    box: np.ndarray
    interior_radius: float
    name: str = "ball"
    bounded: bool = True
    boundary_sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.box = np.broadcast_to(np.asarray(self.box, dtype=float), (self.dim,)).copy()

    def contains(self, points, slack: float = 0.0) -> np.ndarray:
        return self.margin(np.asarray(points, dtype=float)) >= -slack

    @classmethod
    def from_membership(cls, dim, membership, bounding_radius, box, interior_radius, **kw):
        """Wrap a plain predicate; its margin is 0 inside and -1 outside."""
        def margin(points):
            return np.where(membership(points), 0.0, -1.0)
        return cls(dim, margin, bounding_radius, box, interior_radius, **kw)


class HomogeneousGauge:
    """A one-homogeneous function ``N`` with ``N(p) = 0`` only at ``p = 0``."""

    def __init__(self, evaluate: Callable[[np.ndarray], np.ndarray], name: str,
                 provenance: str = "closed-form"):
        self._evaluate = evaluate
        self.name = name
        self.provenance = provenance

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        out = np.asarray(self._evaluate(p.reshape(-1, p.shape[-1])), dtype=float)
        if p.ndim == 1:
            return float(out[0])
        return out.reshape(p.shape[:-1])

    def scaled(self, c: float) -> "HomogeneousGauge":
        return HomogeneousGauge(lambda p: c * self._evaluate(p), f"{c:g}*{self.name}", self.provenance)

    def __repr__(self):
        return f"HomogeneousGauge({self.name!r}, {self.provenance})"


# ---------------------------------------------------------------------------
# gauges


def box_quasi_norm(spec: GradedAlgebra, p) -> np.ndarray:
    """``max_i |p_i|^(1/i)`` over the layers (Euclidean norm inside a layer)."""
    return alg.box_quasi_norm_raw(spec, p)


def box_quasi_norm_gauge(spec: GradedAlgebra) -> HomogeneousGauge:
    return HomogeneousGauge(lambda p: box_quasi_norm(spec, p), "box-quasi-norm")


def euclidean_gauge() -> HomogeneousGauge:
    """Euclidean norm; homogeneous only for gradings with all weights 1."""
    return HomogeneousGauge(lambda p: np.linalg.norm(p, axis=-1), "euclidean")


def koranyi_gauge() -> HomogeneousGauge:
    """``((x^2 + y^2)^2 + 16 z^2)^(1/4)`` on the Heisenberg group."""
    def ev(p):
        r2 = p[..., 0] ** 2 + p[..., 1] ** 2
        return (r2 * r2 + 16.0 * p[..., 2] ** 2) ** 0.25
    return HomogeneousGauge(ev, "koranyi")


def _arc_ratio(phi):
    # z / r^2 along the circular-arc geodesic with turning angle phi
    return (phi - np.sin(phi)) / (8.0 * np.sin(phi / 2) ** 2)


def heisenberg_cc_norm(p) -> np.ndarray:
    """Sub-Riemannian distance from 0 on the Heisenberg group (Euclidean V_1 norm).

    Horizontal projections of geodesics are circular arcs; for a target with
    planar radius ``r`` and height ``z`` the turning angle ``phi`` solves
    ``(phi - sin phi) / (8 sin^2(phi/2)) = |z| / r^2`` and the length is
    ``r (phi/2) / sin(phi/2)``.  On the center axis the length is ``sqrt(4 pi |z|)``.
    The angle is found by vectorized bisection (the ratio is increasing).
    """
    p = np.asarray(p, dtype=float)
    shape = p.shape[:-1]
    p = p.reshape(-1, 3)
    r = np.hypot(p[:, 0], p[:, 1])
    z = np.abs(p[:, 2])
    out = r.copy()
    axis = (r == 0) & (z > 0)
    out[axis] = np.sqrt(4 * np.pi * z[axis])
    gen = (r > 0) & (z > 0)
    if np.any(gen):
        target = z[gen] / r[gen] ** 2
        lo = np.zeros_like(target)
        hi = np.full_like(target, 2 * np.pi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            above = _arc_ratio(mid) > target
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        phi = 0.5 * (lo + hi)
        half = np.sin(phi / 2)
        vals = r[gen] * (phi / 2) / half
        vals = np.where(half > 0, vals, np.sqrt(4 * np.pi * z[gen]))
        out[gen] = vals
    return out.reshape(shape)


def heisenberg_cc_gauge() -> HomogeneousGauge:
    return HomogeneousGauge(heisenberg_cc_norm, "heisenberg-subriemannian")


def product_gauge(base: HomogeneousGauge, n_base: int) -> HomogeneousGauge:
    """``sqrt(N(p)^2 + t^2)`` on ``G x R`` where ``t`` is the last coordinate."""
    def ev(p):
        return np.hypot(base(p[..., :n_base]), p[..., n_base])
    return HomogeneousGauge(ev, f"product({base.name})", base.provenance)


def ball_gauge(spec: GradedAlgebra, ball: BallSpec, tol: float = BISECT_TOL) -> HomogeneousGauge:
    return HomogeneousGauge(lambda p: gauge_from_ball(spec, ball, p, tol), f"gauge({ball.name})", "from-ball")


def gauge_from_ball(spec: GradedAlgebra, ball: BallSpec, p, tol: float = BISECT_TOL,
                    max_iter: int = BISECT_MAXITER) -> np.ndarray:
    """``N(p) = inf{t > 0 : delta_{1/t} p in ball}`` by bisection along the dilation ray.

    The returned value is the upper end of the final bracket, so
    ``delta_{1/N(p)} p`` lies in the ball.
    """
    p = np.asarray(p, dtype=float)
    shape = p.shape[:-1]
    p = p.reshape(-1, spec.dim)
    w = spec.weight_array
    out = np.zeros(len(p))
    nz = np.any(p != 0, axis=1)
    if not np.any(nz):
        return out.reshape(shape)
    q = p[nz]

    def inside(t):
        return ball.contains(q / t[:, None] ** w)

    hi = np.max((np.abs(q) / ball.interior_radius) ** (1.0 / w), axis=1)
    hi = np.maximum(hi, 1e-300)
    ok = inside(hi)
    for _ in range(max_iter):
        if ok.all():
            break
        hi = np.where(ok, hi, hi * 2.0)
        ok = inside(hi)
    if not ok.all():
        raise InvalidBallError("dilation ray never enters the candidate ball")
    lo = hi.copy()
    out_ = ~inside(lo)
    for _ in range(max_iter):
        if out_.all():
            break
        lo = np.where(out_, lo, lo * 0.5)
        out_ = ~inside(lo)
    if not out_.all():
        raise InvalidBallError("dilation ray never leaves the candidate ball")
    hi = lo * 2.0  # last inside value on the halving path
    for _ in range(max_iter):
        if np.all(hi / lo - 1.0 <= tol):
            break
        mid = np.sqrt(lo * hi)
        m_in = inside(mid)
        hi = np.where(m_in, mid, hi)
        lo = np.where(m_in, lo, mid)
    out[nz] = hi
    return out.reshape(shape)


def project_to_boundary(spec: GradedAlgebra, ball: BallSpec, p) -> np.ndarray:
    """Radial projection ``delta_{1/N(p)} p`` onto the boundary (nonzero ``p``)."""
    p = np.asarray(p, dtype=float)
    n = gauge_from_ball(spec, ball, p)
    return alg.dilate(spec, 1.0 / n, p)


def distance(spec: GradedAlgebra, gauge: HomogeneousGauge, p, q) -> np.ndarray:
    """Left-invariant distance ``N(p^{-1} q)``."""
    return gauge(alg.bch_product(spec, alg.inverse(spec, p), q))


# ---------------------------------------------------------------------------
# ball candidates


def euclidean_ball_candidate(spec: GradedAlgebra, r: float) -> BallSpec:
    """Coordinate Euclidean ball of radius ``r``."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return BallSpec(
        spec.dim,
        lambda p: r - np.linalg.norm(p, axis=-1),
        bounding_radius=r,
        box=r,
        interior_radius=r / np.sqrt(spec.dim),
        name=f"euclidean(r={r:g})",
        meta={"kind": "euclidean", "radius": r},
    )


def gauge_ball(spec: GradedAlgebra, gauge: HomogeneousGauge, bounding_radius: float,
               interior_radius: float, name: str | None = None) -> BallSpec:
    """``{N <= 1}`` for a closed-form gauge, margin ``1 - N``."""
    return BallSpec(spec.dim, lambda p: 1.0 - gauge(p), bounding_radius, bounding_radius,
                    interior_radius, name=name or f"ball({gauge.name})")


# ---------------------------------------------------------------------------
# sampling in sets


def sample_in_ball(ball: BallSpec, rng: np.random.Generator, size: int,
                   max_rounds: int = 10_000) -> np.ndarray:
    """Uniform rejection sampling from the hint box."""
    got: list[np.ndarray] = []
    count = 0
    batch = max(64, size)
    for _ in range(max_rounds):
        cand = rng.uniform(-1.0, 1.0, size=(batch, ball.dim)) * ball.box
        keep = cand[ball.contains(cand)]
        got.append(keep)
        count += len(keep)
        if count >= size:
            return np.concatenate(got)[:size]
    raise SamplingError(f"rejection sampling found {count} of {size} points in {ball.name}")


def _sample_mixed(spec, ball, rng, size, boundary_fraction):
    pts = sample_in_ball(ball, rng, size)
    k = int(round(boundary_fraction * size))
    if k == 0:
        return pts
    if ball.boundary_sampler is not None:
        pts[:k] = ball.boundary_sampler(rng, k)
    elif ball.bounded:
        base = pts[:k]
        nz = np.any(base != 0, axis=1)
        base[nz] = project_to_boundary(spec, ball, base[nz])
        pts[:k] = base
    return pts


def _report(check, samples, violations, worst, witness=None, **extra):
    rep = {"check": check, "samples": int(samples), "violations": int(violations),
           "worst_slack": float(worst), "passed": violations == 0}
    if witness is not None:
        rep["witness"] = witness
    rep.update(extra)
    return rep


def combination_points(spec: GradedAlgebra, p, q, t) -> np.ndarray:
    """``delta_t(p) . delta_{1-t}(q)``, ``t`` broadcast against the batch of pairs."""
    t = np.asarray(t, dtype=float)
    w = spec.weight_array
    dp = p * t[..., None] ** w
    dq = q * (1.0 - t[..., None]) ** w
    return alg.bch_product(spec, dp, dq)


def verify_ball_conditions(spec: GradedAlgebra, ball: BallSpec, n_samples: int = 10_000,
                           seed: int = 0, which: Sequence[str] = ALL_CHECKS, workers: int = 1,
                           slack: float = 1e-9, boundary_fraction: float = 0.5,
                           t_grid: np.ndarray = T_GRID) -> dict:
    """Sampled certification of the unit-ball characterization.

    ``combination`` draws ``n_samples`` pairs ``p, q`` in the ball (a fraction
    pushed onto the boundary) and tests ``delta_t(p) delta_{1-t}(q)`` at every
    ``t`` of the grid.  Each check reports its first witness in sample order.
    Compactness is certified only as "samples stay inside the bounding
    radius and points beyond it are rejected".
    """
    unknown = set(which) - set(ALL_CHECKS)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}")
    reports = []
    for stream, check in enumerate(ALL_CHECKS):
        if check not in which:
            continue
        fn = _CHECKS[check]
        try:
            reports.append(fn(spec, ball, n_samples, seed, stream, workers, slack,
                              boundary_fraction, np.asarray(t_grid, dtype=float)))
        except SamplingError as exc:
            reports.append(_report(check, 0, 1, -np.inf, error=str(exc)))
    return {"ball": ball.name, "seed": int(seed), "passed": all(r["passed"] for r in reports),
            "checks": reports}


def _merge(results, check, **extra):
    samples = sum(r[0] for r in results)
    violations = sum(r[1] for r in results)
    worst = min((r[2] for r in results), default=np.inf)
    witness = next((r[3] for r in results if r[3] is not None), None)
    return _report(check, samples, violations, worst, witness, **extra)


def _check_combination(spec, ball, n, seed, stream, workers, slack, bfrac, t_grid):
    def work(chunk, size):
        rng = chunk_rng(seed, chunk, stream)
        p = _sample_mixed(spec, ball, rng, size, bfrac)
        q = _sample_mixed(spec, ball, rng, size, bfrac)
        q = q[rng.permutation(size)]
        pts = combination_points(spec, p[None], q[None], t_grid[:, None])  # (T, size, n)
        m = ball.margin(pts.reshape(-1, spec.dim)).reshape(len(t_grid), size)
        bad = m < -slack
        witness = None
        if bad.any():
            ti, si = np.argwhere(bad.T)[0][::-1]
            witness = {"p": p[si].tolist(), "q": q[si].tolist(), "t": float(t_grid[ti]),
                       "point": pts[ti, si].tolist(), "margin": float(m[ti, si])}
        return size, int(bad.sum()), float(m.min()), witness
    results = map_chunks(work, n, workers)
    rep = _merge(results, "combination", t_values=len(t_grid))
    rep["triples"] = rep["samples"] * len(t_grid)
    return rep


def _check_symmetric(spec, ball, n, seed, stream, workers, slack, bfrac, t_grid):
    def work(chunk, size):
        rng = chunk_rng(seed, chunk, stream)
        p = _sample_mixed(spec, ball, rng, size, bfrac)
        m = ball.margin(-p)
        bad = m < -slack
        witness = {"p": p[np.argmax(bad)].tolist()} if bad.any() else None
        return size, int(bad.sum()), float(m.min()), witness
    return _merge(map_chunks(work, n, workers), "symmetric")


def _check_interior(spec, ball, n, seed, stream, workers, slack, bfrac, t_grid):
    r = ball.interior_radius
    corners = np.array(np.meshgrid(*[[-r, r]] * spec.dim)).reshape(spec.dim, -1).T

    def work(chunk, size):
        rng = chunk_rng(seed, chunk, stream)
        p = rng.uniform(-r, r, size=(size, spec.dim))
        if chunk == 0:
            p = np.concatenate([corners, np.zeros((1, spec.dim)), p])
        m = ball.margin(p)
        bad = m < -slack
        witness = {"p": p[np.argmax(bad)].tolist()} if bad.any() else None
        return len(p), int(bad.sum()), float(m.min()), witness
    return _merge(map_chunks(work, n, workers), "interior", interior_radius=r)


def _check_compact(spec, ball, n, seed, stream, workers, slack, bfrac, t_grid):
    if not ball.bounded:
        return _report("compact", 0, 1, -np.inf, detail="set is declared unbounded")
    big = ball.bounding_radius

    def work(chunk, size):
        rng = chunk_rng(seed, chunk, stream)
        p = _sample_mixed(spec, ball, rng, size, bfrac)
        radii = np.linalg.norm(p, axis=1)
        slack_in = big * (1 + 1e-12) - radii
        far = unit_vectors(rng, size, spec.dim) * big * rng.uniform(1.001, 4.0, size=(size, 1))
        bad_far = ball.contains(far)
        bad = (slack_in < 0) | bad_far
        witness = None
        if bad.any():
            i = int(np.argmax(bad))
            witness = {"p": (p[i] if slack_in[i] < 0 else far[i]).tolist()}
        return size, int(bad.sum()), float(slack_in.min()), witness
    return _merge(map_chunks(work, n, workers), "compact", bounding_radius=big)


_CHECKS = {
    "compact": _check_compact,
    "interior": _check_interior,
    "symmetric": _check_symmetric,
    "combination": _check_combination,
}


# ---------------------------------------------------------------------------
# gauge certification


def _scaled_samples(spec, rng, size):
    u = rng.normal(size=(size, spec.dim))
    lam = np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=size))
    return alg.dilate(spec, lam, u)


def verify_norm_axioms(spec: GradedAlgebra, gauge: HomogeneousGauge, n_samples: int = 10_000,
                       seed: int = 0, workers: int = 1, tol: float = 1e-9) -> dict:
    """Sampled triangle inequality, symmetry, homogeneity and positivity.

    Slacks are relative: the triangle slack is ``(N(p)+N(q)-N(pq)) / (N(p)+N(q))``.
    """
    lams = 2.0 ** np.arange(-10, 11)

    def work(chunk, size):
        rng = chunk_rng(seed, chunk, 0)
        p = _scaled_samples(spec, rng, size)
        q = _scaled_samples(spec, rng, size)
        np_, nq = gauge(p), gauge(q)
        tri = (np_ + nq - gauge(alg.bch_product(spec, p, q))) / (np_ + nq)
        sym = -np.abs(gauge(-p) - np_) / np_
        lam = lams[rng.integers(0, len(lams), size=size)]
        hom = -np.abs(gauge(alg.dilate(spec, lam, p)) - lam * np_) / (lam * np_)
        pos = np.minimum(np_, nq)
        out = {}
        for name, s, bad in (("triangle", tri, tri < -tol), ("symmetric", sym, sym < -tol),
                             ("homogeneous", hom, hom < -tol), ("positive", pos, pos <= 0)):
            wit = None
            if bad.any():
                i = int(np.argmax(bad))
                wit = {"p": p[i].tolist(), "q": q[i].tolist()}
            out[name] = (size, int(bad.sum()), float(s.min()), wit)
        return out

    results = map_chunks(work, n_samples, workers)
    checks = [_merge([r[name] for r in results], name) for name in
              ("triangle", "symmetric", "homogeneous", "positive")]
    return {"gauge": gauge.name, "seed": int(seed), "passed": all(c["passed"] for c in checks),
            "checks": checks}


def equivalence_constants(spec: GradedAlgebra, gauge1: HomogeneousGauge, gauge2: HomogeneousGauge,
                          n_samples: int = 10_000, seed: int = 0) -> dict:
    """Smallest sampled ``C`` with ``gauge1 / C <= gauge2 <= C gauge1``.

    By homogeneity it suffices to sample the unit sphere of ``gauge1``.
    """
    rng = chunk_rng(seed, 0, 0)
    p = unit_vectors(rng, n_samples, spec.dim)
    n1 = gauge1(p)
    if np.any(n1 <= 0):
        raise ValueError(f"{gauge1.name} vanishes away from 0")
    u = alg.dilate(spec, 1.0 / n1, p)
    ratio = gauge2(u)
    if np.any(ratio <= 0):
        raise ValueError(f"{gauge2.name} vanishes away from 0")
    c = max(float(ratio.max()), float(1.0 / ratio.min()))
    return {"C": c, "max_ratio": float(ratio.max()), "min_ratio": float(ratio.min()),
            "samples": int(n_samples)}


def holder_bound_check(spec: GradedAlgebra, gauge: HomogeneousGauge, k1: float, k2: float,
                       n_samples: int = 10_000, eps: float = 0.1, seed: int = 0,
                       box: float = 1.0) -> dict:
    """Smallest sampled ``C`` with ``rho^(1/k1) / C <= d <= C rho^(1/k2)`` for ``rho < eps``.

    ``rho`` is the Euclidean distance in exponential coordinates.
    """
    w = spec.weight_array
    if np.any(w < k1) or np.any(w > k2):
        raise ValueError(f"weights {sorted(set(w))} are not within [{k1}, {k2}]")
    rng = chunk_rng(seed, 0, 0)
    p = rng.uniform(-box, box, size=(n_samples, spec.dim))
    rho = eps * 10.0 ** rng.uniform(-6.0, 0.0, size=n_samples)
    q = p + unit_vectors(rng, n_samples, spec.dim) * rho[:, None]
    d = distance(spec, gauge, p, q)
    lower = float(np.max(rho ** (1.0 / k1) / d))
    upper = float(np.max(d / rho ** (1.0 / k2)))
    c = max(lower, upper)
    return {"C": c, "C_lower": lower, "C_upper": upper, "finite": bool(np.isfinite(c)),
            "samples": int(n_samples), "eps": eps, "k1": k1, "k2": k2}


def euclidean_radius_threshold(spec: GradedAlgebra, radii: Sequence[float], n_samples: int = 5000,
                               seed: int = 0, workers: int = 1) -> dict:
    """Sweep Euclidean-ball radii upward; report the first radius whose ball fails."""
    sweep = []
    for r in radii:
        rep = verify_ball_conditions(spec, euclidean_ball_candidate(spec, r), n_samples, seed,
                                     which=("combination",), workers=workers)
        sweep.append({"radius": float(r), "passed": rep["passed"],
                      "worst_slack": rep["checks"][0]["worst_slack"]})
        if not rep["passed"]:
            return {"threshold": float(r), "sweep": sweep}
    return {"threshold": None, "sweep": sweep}
