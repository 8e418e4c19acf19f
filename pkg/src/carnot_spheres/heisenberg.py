"""Homogeneous balls on the Heisenberg group built from Lipschitz profiles.

A ball has the form ``B = {v + zZ : v in K, -f(-v) <= z <= f(v)}`` where
``K`` is a symmetric convex body in the horizontal plane.  Starting from a
Lipschitz ``g`` on ``K`` the builder picks the offset ``b`` so that
``f = g + b`` satisfies

    f(tv + (1-t)w) - t^2 f(v) - (1-t)^2 f(w) - t(1-t)/2 * omega(v, w) >= 0,

which is equivalent to ``B`` being the unit ball of a homogeneous norm.
Coordinates are ``(x, y, z)`` as in :func:`carnot_spheres.algebra.heisenberg`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import ConvexHull

from .norms import BallSpec
from .sampling import chunk_rng, map_chunks

OMEGA_GRID = 720


def omega(v, w) -> np.ndarray:
    """Area form ``v1 w2 - v2 w1`` (broadcasting)."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    return v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0]


# ---------------------------------------------------------------------------
# convex domains


@dataclass
class ConvexDomain:
    """A disc of given radius or a centrally symmetric convex polygon."""

    shape: str
    radius: float = 1.0
    vertices: np.ndarray | None = None

    def __post_init__(self):
        if self.shape == "disc":
            if self.radius <= 0:
                raise ValueError("disc radius must be positive")
        elif self.shape == "polygon":
            v = np.asarray(self.vertices, dtype=float)
            hull = ConvexHull(v)
            v = v[hull.vertices]
            if not np.allclose(np.sort(np.round(v, 12), axis=0), np.sort(np.round(-v, 12), axis=0)):
                raise ValueError("polygon must satisfy K = -K")
            self.vertices = v
            # facet normals a_k and offsets c_k with K = {a_k . x <= c_k}
            eq = hull.equations
            if np.any(eq[:, 2] >= 0):
                raise ValueError("0 must be interior to the polygon")
            self._normals = eq[:, :2] / -eq[:, 2:3]
        else:
            raise ValueError(f"unknown domain shape {self.shape!r}")

    @classmethod
    def disc(cls, radius: float = 1.0) -> "ConvexDomain":
        return cls("disc", radius=radius)

    @classmethod
    def polygon(cls, vertices) -> "ConvexDomain":
        return cls("polygon", vertices=np.asarray(vertices, dtype=float))

    def gauge(self, v) -> np.ndarray:
        """Minkowski functional of ``K``."""
        v = np.asarray(v, dtype=float)
        if self.shape == "disc":
            return np.hypot(v[..., 0], v[..., 1]) / self.radius
        return np.max(v @ self._normals.T, axis=-1)

    def contains(self, v, slack: float = 0.0) -> np.ndarray:
        return self.gauge(v) <= 1.0 + slack

    @property
    def diameter(self) -> float:
        if self.shape == "disc":
            return 2.0 * self.radius
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.max(np.linalg.norm(d, axis=-1)))

    @property
    def circumradius(self) -> float:
        if self.shape == "disc":
            return self.radius
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    @property
    def inradius(self) -> float:
        if self.shape == "disc":
            return self.radius
        return float(1.0 / np.max(np.linalg.norm(self._normals, axis=1)))

    def extreme_points(self, count: int = OMEGA_GRID) -> np.ndarray:
        """Boundary angle grid (disc) or the vertex list (polygon)."""
        if self.shape == "disc":
            a = 2 * np.pi * np.arange(count) / count
            return self.radius * np.column_stack([np.cos(a), np.sin(a)])
        return self.vertices.copy()

    def boundary_points(self, count: int) -> np.ndarray:
        a = 2 * np.pi * np.arange(count) / count
        d = np.column_stack([np.cos(a), np.sin(a)])
        return d / self.gauge(d)[:, None]

    def interior_points(self, count: int, scale: float = 1.0) -> np.ndarray:
        """Sunflower spiral pulled back into ``scale * K``."""
        i = np.arange(count) + 0.5
        rad = np.sqrt(i / count)
        a = np.pi * (3 - 5**0.5) * i
        d = np.column_stack([np.cos(a), np.sin(a)])
        return scale * rad[:, None] * d / self.gauge(d)[:, None]

    def grid(self, n: int = 81, scale: float = 1.0) -> np.ndarray:
        """Points of an ``n x n`` Cartesian grid lying in ``scale * K``."""
        r = self.circumradius * scale
        xs = np.linspace(-r, r, n)
        pts = np.array(np.meshgrid(xs, xs, indexing="ij")).reshape(2, -1).T
        return pts[self.gauge(pts) <= scale * (1 + 1e-12)]

    def to_dict(self) -> dict:
        if self.shape == "disc":
            return {"shape": "disc", "radius": self.radius}
        return {"shape": "polygon", "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ConvexDomain":
        shape = data.get("shape", "disc")
        if shape == "disc":
            return cls.disc(float(data.get("radius", 1.0)))
        return cls.polygon(data["vertices"])


# ---------------------------------------------------------------------------
# profiles


@dataclass
class Profile:
    """A real function on ``K`` with an upper bound on its Lipschitz constant."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    sup_abs: float
    spec: dict = field(default_factory=dict)

    def __call__(self, v) -> np.ndarray:
        return self.evaluate(np.asarray(v, dtype=float))

    def shifted(self, b: float) -> "Profile":
        return Profile(lambda v: self.evaluate(v) + b, self.lipschitz, self.sup_abs + abs(b),
                       {"shift_of": self.spec, "b": b})


def zero_profile() -> Profile:
    return Profile(lambda v: np.zeros(np.shape(v)[:-1]), 0.0, 0.0, {"values": "zero"})


def constant_profile(c: float) -> Profile:
    return Profile(lambda v: np.full(np.shape(v)[:-1], float(c)), 0.0, abs(c),
                   {"values": "constant", "c": c})


def abs_x_profile(domain: ConvexDomain | None = None) -> Profile:
    domain = domain or ConvexDomain.disc()
    return Profile(lambda v: np.abs(v[..., 0]), 1.0, domain.circumradius, {"values": "abs-x"})


def grid_profile(xs, ys, values, lipschitz: float | None = None) -> Profile:
    """Bilinear interpolation of grid values.

    Without an explicit constant, the Lipschitz bound is the norm of the
    largest adjacent slopes in each direction times 1.05.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    values = np.asarray(values, dtype=float)
    interp = RegularGridInterpolator((xs, ys), values, method="linear", bounds_error=False, fill_value=None)
    if lipschitz is None:
        sx = np.max(np.abs(np.diff(values, axis=0)) / np.diff(xs)[:, None]) if len(xs) > 1 else 0.0
        sy = np.max(np.abs(np.diff(values, axis=1)) / np.diff(ys)[None, :]) if len(ys) > 1 else 0.0
        lipschitz = 1.05 * float(np.hypot(sx, sy))

    def ev(v):
        v = np.asarray(v, dtype=float)
        return interp(v.reshape(-1, 2)).reshape(v.shape[:-1])

    return Profile(ev, float(lipschitz), float(np.max(np.abs(values))),
                   {"values": {"x": xs.tolist(), "y": ys.tolist(), "grid": values.tolist()},
                    "lipschitz": float(lipschitz)})


def random_lipschitz_profile(domain: ConvexDomain, lipschitz: float, seed: int = 0,
                             n: int = 33, modes: int = 6) -> Profile:
    """Random trigonometric field sampled on a grid, rescaled to the given bound."""
    rng = np.random.default_rng(seed)
    r = domain.circumradius
    xs = np.linspace(-r, r, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    k = rng.normal(scale=3.0, size=(modes, 2))
    phase = rng.uniform(0, 2 * np.pi, size=modes)
    amp = rng.normal(size=modes)
    vals = sum(a * np.sin(kx * X + ky * Y + ph) for a, (kx, ky), ph in zip(amp, k, phase))
    raw = grid_profile(xs, xs, vals)
    scale = lipschitz / raw.lipschitz
    return grid_profile(xs, xs, vals * scale)


def profile_from_dict(data: dict, domain: ConvexDomain) -> Profile:
    values = data["values"]
    if values == "zero":
        return zero_profile()
    if values == "constant":
        return constant_profile(float(data["c"]))
    if values == "abs-x":
        return abs_x_profile(domain)
    if isinstance(values, dict):
        return grid_profile(values["x"], values["y"], values["grid"], data.get("lipschitz"))
    raise ValueError(f"unknown profile values {values!r}")


NAMED_PROFILES = {
    "zero": lambda K: zero_profile(),
    "abs-x": abs_x_profile,
    "random": lambda K: random_lipschitz_profile(K, 0.3, seed=0),
}


# ---------------------------------------------------------------------------
# constants of the construction


def sup_omega(domain: ConvexDomain, count: int = OMEGA_GRID) -> float:
    """``sup omega(v, w)`` over ``K x K``; extreme points suffice by bilinearity."""
    e = domain.extreme_points(count)
    return float(np.max(omega(e[:, None, :], e[None, :, :])))


def compute_A(profile: Profile, domain: ConvexDomain) -> float:
    """``A = -2 L diam(K) - 4 sup|g|``."""
    return -2.0 * profile.lipschitz * domain.diameter - 4.0 * profile.sup_abs


def compute_offset(profile: Profile, domain: ConvexDomain, A: float | None = None) -> float:
    """``b = sup(omega) / 4 - A / 2``."""
    if A is None:
        A = compute_A(profile, domain)
    return 0.25 * sup_omega(domain) - 0.5 * A


class BuildError(ValueError):
    pass


def build_ball(profile: Profile, domain: ConvexDomain, b: float | None = None) -> BallSpec:
    """Ball ``{v + zZ : v in K, -f(-v) <= z <= f(v)}`` with ``f = g + b``."""
    if b is None:
        b = compute_offset(profile, domain)
    fmin = b - profile.sup_abs
    if fmin <= 0:
        raise BuildError(f"f = g + b is not positive on K (b - sup|g| = {fmin:g})")
    f = profile.shifted(b)
    return profile_ball(f, domain, lower_bound=fmin,
                        meta={"kind": "heisenberg-profile", "domain": domain.to_dict(),
                              "profile": profile.spec, "b": float(b)})


def profile_ball(f: Profile, domain: ConvexDomain, lower_bound: float | None = None,
                 meta: dict | None = None, name: str = "heisenberg-profile-ball") -> BallSpec:
    """Ball with upper profile ``f`` and lower profile ``-f(-v)``."""
    if lower_bound is None:
        lower_bound = float(np.min(f(domain.grid(41))))
    top = f.sup_abs

    def margin(p):
        v = p[..., :2]
        z = p[..., 2]
        return np.minimum(1.0 - domain.gauge(v), np.minimum(f(v) - z, z + f(-v)))

    rk = domain.circumradius
    interior = 0.99 * min(domain.inradius / np.sqrt(2.0), lower_bound)
    return BallSpec(3, margin, float(np.hypot(rk, top)), np.array([rk, rk, top]), interior,
                    name=name, meta=meta or {})


# ---------------------------------------------------------------------------
# verification


def condition_62_points(domain: ConvexDomain, count: int = 200) -> np.ndarray:
    """Half boundary points (angle 0 first), half interior sunflower points."""
    nb = count // 2
    return np.concatenate([domain.boundary_points(nb), domain.interior_points(count - nb)])


def verify_condition_62(f: Callable, domain: ConvexDomain, n_points: int = 200, n_t: int = 21,
                        workers: int = 1, tol: float = 1e-9) -> dict:
    """Minimum of the quadratic margin over a ``(v, w, t)`` grid.

    The report's witness is the first minimizer in ``(v, w, t)`` order.
    """
    pts = condition_62_points(domain, n_points)
    ts = np.linspace(0.0, 1.0, n_t)
    fp = f(pts)
    rows = np.array_split(np.arange(len(pts)), max(1, min(len(pts), 8)))

    def work(idx):
        v = pts[idx][:, None, None, :]
        w = pts[None, :, None, :]
        t = ts[None, None, :]
        mid = t[..., None] * v + (1 - t[..., None]) * w
        m = (f(mid) - t**2 * fp[idx][:, None, None] - (1 - t) ** 2 * fp[None, :, None]
             - 0.5 * t * (1 - t) * omega(v, w))
        low = float(m.min())
        # first near-minimizer, so ties from rounding resolve in grid order
        k = int(np.flatnonzero(m.reshape(-1) <= low + 1e-12 * max(1.0, abs(low)))[0])
        return low, (idx[0],) + np.unravel_index(k, m.shape)

    results = [work(idx) for idx in rows] if workers <= 1 else _threaded(work, rows, workers)
    low = min(r[0] for r in results)
    best = next(r for r in results if r[0] <= low + 1e-12 * max(1.0, abs(low)))
    margin, (start, i, j, ti) = best
    vi = start + i
    rep = {"check": "condition_62", "pairs": len(pts) ** 2, "t_values": n_t,
           "min_margin": margin, "passed": margin >= -tol}
    rep["witness"] = {"v": pts[vi].tolist(), "w": pts[j].tolist(), "t": float(ts[ti]), "margin": margin}
    return rep


def _threaded(func, items, workers):
    from .sampling import map_items
    return map_items(func, items, workers)


def extract_profile(ball: BallSpec, v, tol: float = 1e-12, max_iter: int = 200) -> dict:
    """``max{z : v + zZ in ball}`` by bisection for each ``v``.

    Raises ``ValueError`` when some ``v`` is outside the projection of the
    ball.  ``boundary`` flags points where the vertical segment degenerates.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    base = np.column_stack([v, np.zeros(len(v))])
    if not np.all(ball.contains(base)):
        raise ValueError("v outside the projection of the ball")
    lo = np.zeros(len(v))
    hi = np.full(len(v), float(ball.bounding_radius) * 1.01 + 1.0)

    def inside(z):
        return ball.contains(np.column_stack([v, z]))

    for _ in range(max_iter):
        if np.all(hi - lo <= tol * np.maximum(1.0, hi)):
            break
        mid = 0.5 * (lo + hi)
        m = inside(mid)
        lo = np.where(m, mid, lo)
        hi = np.where(m, hi, mid)
    return {"z": lo, "boundary": lo <= 10 * tol}


def _segment_check(name, ball, n_samples, seed, workers, transform, s_grid, spec=None):
    from .norms import _merge, _sample_mixed, sample_in_ball

    def work(chunk, size):
        rng = chunk_rng(seed, chunk, 11)
        if spec is not None:
            p = _sample_mixed(spec, ball, rng, size, 0.5)
        else:
            p = sample_in_ball(ball, rng, size)
        pts = transform(p[None], s_grid[:, None, None])
        m = ball.margin(pts.reshape(-1, ball.dim)).reshape(len(s_grid), size)
        bad = m < -1e-9
        wit = None
        if bad.any():
            pi = int(np.flatnonzero(bad.any(axis=0))[0])
            si = int(np.flatnonzero(bad[:, pi])[0])
            wit = {"p": p[pi].tolist(), "s": float(s_grid[si]), "point": pts[si, pi].tolist()}
        return size, int(bad.sum()), float(m.min()), wit

    return _merge(map_chunks(work, n_samples, workers), name)


def star_shape_check(ball: BallSpec, n_samples: int = 10_000, seed: int = 0, workers: int = 1,
                     spec=None, n_s: int = 21) -> dict:
    """``p in B`` implies ``s p in B`` for ``s`` on a grid of ``[0, 1]``."""
    s = np.linspace(0.0, 1.0, n_s)
    return _segment_check("star_shape", ball, n_samples, seed, workers, lambda p, t: t * p, s, spec)


def vertical_segment_check(ball: BallSpec, n_samples: int = 10_000, seed: int = 0, workers: int = 1,
                           spec=None, n_s: int = 21) -> dict:
    """``v + zZ in B`` implies ``v + s z Z in B`` for ``s`` on a grid of ``[0, 1]``."""
    s = np.linspace(0.0, 1.0, n_s)

    def shrink(p, t):
        scale = np.concatenate([np.ones_like(t), np.ones_like(t), t], axis=-1)
        return p * scale

    return _segment_check("vertical_segment", ball, n_samples, seed, workers, shrink, s, spec)


def profile_lipschitz_quotients(ball: BallSpec, domain: ConvexDomain, scale: float = 0.9,
                                n: int = 41) -> float:
    """Largest finite-difference quotient of the extracted profile on ``scale * K``."""
    pts = domain.grid(n, scale)
    z = extract_profile(ball, pts)["z"]
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    close = (d > 0) & (d < 2.5 * (2 * domain.circumradius * scale / (n - 1)))
    q = np.abs(z[:, None] - z[None]) / np.where(close, d, np.inf)
    return float(np.max(q))


# ---------------------------------------------------------------------------
# export


def ball_to_dict(ball: BallSpec, grid_n: int = 41) -> dict:
    meta = dict(ball.meta)
    if meta.get("kind") != "heisenberg-profile":
        raise ValueError("only built Heisenberg balls carry a profile description")
    domain = ConvexDomain.from_dict(meta["domain"])
    r = domain.circumradius
    xs = np.linspace(-r, r, grid_n)
    pts = np.array(np.meshgrid(xs, xs, indexing="ij")).reshape(2, -1).T
    g = profile_from_dict(meta["profile"], domain)
    fvals = (g(pts) + meta["b"]).reshape(grid_n, grid_n)
    meta["f_grid"] = {"x": xs.tolist(), "y": xs.tolist(), "values": fvals.tolist()}
    return meta


def ball_from_dict(data: dict) -> BallSpec:
    domain = ConvexDomain.from_dict(data["domain"])
    g = profile_from_dict(data["profile"], domain)
    return build_ball(g, domain, b=float(data["b"]))
