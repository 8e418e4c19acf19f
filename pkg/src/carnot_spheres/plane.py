"""Planar constructions for the grading with both coordinates of weight 2.

With weights (2, 2) the group is abelian and ``delta_t(p) delta_{1-t}(q)``
is the parabola point ``t^2 p + (1-t)^2 q``.  This module builds the
square-root regions ``Y(eps, beta, C)``, the fractal ball whose boundary
contains a Weierstrass-type polar graph, and a Lipschitz ball whose gauge
is only 1/2-Hölder at one point.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .norms import BallSpec

SMALL_ANGLE_BOUND = 1.8954942670339809  # largest theta with sin(theta) >= theta / 2


def combination_curve(p, q, t) -> np.ndarray:
    """``t^2 p + (1-t)^2 q`` (broadcasting over ``t``)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)[..., None]
    return t**2 * p + (1 - t) ** 2 * q


def in_triangle(point, a, b, c, tol: float = 1e-12) -> np.ndarray:
    """Barycentric containment test for the triangle ``abc`` (degenerate triangles allowed)."""
    point, a, b, c = (np.asarray(x, dtype=float) for x in (point, a, b, c))
    v0, v1, v2 = c - a, b - a, point - a
    d00 = np.sum(v0 * v0, -1)
    d01 = np.sum(v0 * v1, -1)
    d11 = np.sum(v1 * v1, -1)
    d20 = np.sum(v2 * v0, -1)
    d21 = np.sum(v2 * v1, -1)
    den = d00 * d11 - d01 * d01
    scale = np.maximum(d00 * d11, 1e-300)
    ok = np.abs(den) > 1e-14 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(ok, (d11 * d20 - d01 * d21) / np.where(ok, den, 1), 0)
        v = np.where(ok, (d00 * d21 - d01 * d20) / np.where(ok, den, 1), 0)
    inside = (u >= -tol) & (v >= -tol) & (u + v <= 1 + tol)
    if np.all(ok):
        return inside
    # collinear vertices: the hull is the longest of the three segments
    segs = [(a, b), (b, c), (a, c)]
    best = None
    for s0, s1 in segs:
        d = s1 - s0
        l2 = np.sum(d * d, -1)
        lam = np.clip(np.sum((point - s0) * d, -1) / np.maximum(l2, 1e-300), 0, 1)
        dist = np.linalg.norm(point - s0 - lam[..., None] * d, axis=-1)
        hit = dist <= tol * (1 + np.sqrt(l2))
        best = hit if best is None else best | hit
    return np.where(ok, inside, best)


# ---------------------------------------------------------------------------
# square-root regions


@dataclass(frozen=True)
class YRegion:
    """``Y(eps, beta, C) = {|x| <= eps, y <= beta + C sqrt|x|}``."""

    eps: float = 1.0
    beta: float = 1.0
    C: float = 1.0
    alpha: float = 1.0

    @property
    def in_window(self) -> bool:
        """Parameters for which the combination condition is guaranteed."""
        return 0 < self.eps <= self.alpha and 0 < self.C <= self.beta / np.sqrt(self.alpha)

    def margin(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        ax = np.abs(p[..., 0])
        return np.minimum(self.eps - ax, self.beta + self.C * np.sqrt(ax) - p[..., 1])

    def contains(self, p, slack: float = 0.0) -> np.ndarray:
        return self.margin(p) >= -slack

    def ball(self, depth: float = 3.0) -> BallSpec:
        """Membership oracle for the (unbounded) region, for combination checks only.

        Rejection draws from ``[-eps, eps] x [-depth, top]``; half of the
        samples sit on the upper boundary curve.
        """
        top = self.beta + self.C * np.sqrt(self.eps)
        lo = -depth

        def sampler(rng, k):
            x = rng.uniform(-self.eps, self.eps, k)
            return np.column_stack([x, self.beta + self.C * np.sqrt(np.abs(x))])

        half = 0.5 * (top - lo)
        mid = 0.5 * (top + lo)

        def margin(p):
            return self.margin(p)

        spec = BallSpec(2, margin, float(np.hypot(self.eps, max(abs(top), abs(lo)))),
                        np.array([self.eps, max(abs(top), abs(lo))]), 0.0,
                        name=f"Y({self.eps:g},{self.beta:g},{self.C:g})", bounded=False,
                        boundary_sampler=sampler,
                        meta={"kind": "y-region", "eps": self.eps, "beta": self.beta, "C": self.C,
                              "alpha": self.alpha, "y_range": [lo, top], "center": mid, "half": half})
        return spec


def y_region_contains(eps, beta, C, alpha, point) -> tuple[np.ndarray, bool]:
    """Membership bits and whether the parameters lie in the guaranteed window."""
    region = YRegion(eps, beta, C, alpha)
    return region.contains(point), region.in_window


def y_c(C: float) -> YRegion:
    return YRegion(1.0, 1.0, C, 1.0)


def worst_combination_height(C: float, px: float, qx: float) -> float:
    """Lowest height of the parabola arc between ``(-px, 1+C sqrt px)`` and ``(qx, 1+C sqrt qx)``
    where it crosses the axis ``x = 0``."""
    sp, sq = np.sqrt(px), np.sqrt(qx)
    return float(1 + sp * sq * (-2 + C * (sq + sp)) / (sq + sp) ** 2)


def y_region_witness(C: float, px: float = 1.0, qx: float = 1.0) -> dict:
    """Explicit triple whose combination point leaves ``Y_C`` when ``C > 1``."""
    p = np.array([-px, 1 + C * np.sqrt(px)])
    q = np.array([qx, 1 + C * np.sqrt(qx)])
    t0 = np.sqrt(qx) / (np.sqrt(px) + np.sqrt(qx))
    point = combination_curve(p, q, t0)
    region = y_c(C)
    return {"p": p.tolist(), "q": q.tolist(), "t": float(t0), "point": point.tolist(),
            "inside": bool(region.contains(point)), "margin": float(region.margin(point)),
            "predicted_height": worst_combination_height(C, px, qx)}


def linear_image_ball(region_ball: BallSpec, A) -> BallSpec:
    """``A(B)`` as a membership oracle."""
    A = np.asarray(A, dtype=float)
    Ainv = np.linalg.inv(A)
    corners = np.array(np.meshgrid(*[[-1, 1]] * 2)).reshape(2, -1).T * region_ball.box
    box = np.max(np.abs(corners @ A.T), axis=0)

    def margin(p):
        return region_ball.margin(np.asarray(p) @ Ainv.T)

    sampler = None
    if region_ball.boundary_sampler is not None:
        inner = region_ball.boundary_sampler

        def sampler(rng, k):
            return inner(rng, k) @ A.T

    return BallSpec(2, margin, float(np.linalg.norm(box)), box, 0.0, name=f"A({region_ball.name})",
                    bounded=region_ball.bounded, boundary_sampler=sampler, meta={"kind": "linear-image"})


# ---------------------------------------------------------------------------
# Weierstrass-type profile


def weierstrass_half_holder(t, K_terms: int = 24) -> np.ndarray:
    """``sum_{k=0}^{K} 2^{-k/2} cos(2^k t)``."""
    if K_terms < 1:
        raise ValueError("K_terms must be >= 1")
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for k in range(K_terms + 1):
        out += 2.0 ** (-k / 2) * np.cos(2.0**k * t)
    return out


def weierstrass_sup(K_terms: int) -> float:
    return float(sum(2.0 ** (-k / 2) for k in range(K_terms + 1)))


def holder_half_certificate(func, n_log2: int = 16, period: float = 2 * np.pi,
                            dense_gaps: int = 64, coarse_log2: int = 12) -> float:
    """Largest ``|f(t) - f(s)| / sqrt|t - s|`` seen on periodic grids.

    The fine ``2^n`` grid is scanned at dyadic gaps and at every gap up to
    ``dense_gaps``; a coarser grid is scanned at every gap up to half the
    period.  Dyadic gaps alone miss the worst ratio by more than 25%.
    """
    def scan(n, gaps):
        h = period / n
        vals = func(h * np.arange(n))
        return max(float(np.abs(np.roll(vals, -g) - vals).max()) / np.sqrt(g * h) for g in gaps)

    n = 2**n_log2
    fine = sorted({2**j for j in range(n_log2)} | set(range(1, dense_gaps + 1)))
    nc = 2**coarse_log2
    return max(scan(n, fine), scan(nc, range(1, nc // 2 + 1)))


def holder_half_bound(K_terms: int) -> float:
    """Analytic bound using ``|cos a - cos b| <= min(2, |a - b|)`` termwise."""
    d = np.logspace(-12, np.log10(2 * np.pi), 4000)
    k = np.arange(K_terms + 1)[:, None]
    s = np.sum(2.0 ** (-k / 2) * np.minimum(2.0, 2.0**k * d), axis=0) / np.sqrt(d)
    return float(s.max())


@dataclass
class NormalizedProfile:
    """``f = m + (M - m) (W + S) / (2S)`` so that ``m <= f <= M``."""

    m: float = 1.0
    M: float = 1.2
    K_terms: int = 24
    constant: bool = False

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.constant:
            return np.full_like(t, self.m)
        S = weierstrass_sup(self.K_terms)
        return self.m + (self.M - self.m) * (weierstrass_half_holder(t, self.K_terms) + S) / (2 * S)

    def certified_L(self, n_log2: int = 16, safety: float = 1.05) -> float:
        if self.constant:
            return 0.0
        return safety * holder_half_certificate(self, n_log2)


def normalize_to(values, m: float, M: float, K_terms: int) -> np.ndarray:
    S = weierstrass_sup(K_terms)
    return m + (M - m) * (np.asarray(values) + S) / (2 * S)


# ---------------------------------------------------------------------------
# fractal ball


class ParameterError(ValueError):
    pass


@dataclass
class FractalBallParams:
    m: float
    M: float
    L: float
    C: float
    theta0: float
    s_count: int
    f: NormalizedProfile = field(repr=False)

    @classmethod
    def default(cls, m: float = 1.0, M: float = 1.2, K_terms: int = 24, s_count: int = 41,
                constant: bool = False) -> "FractalBallParams":
        """Window midpoint for ``C`` after halving the largest admissible ``theta0``."""
        f = NormalizedProfile(m, M, K_terms, constant)
        L = f.certified_L()
        if L == 0:
            theta0 = SMALL_ANGLE_BOUND / 2
            C = m / np.sqrt(2 * M * theta0) / 2
        else:
            theta0 = min(SMALL_ANGLE_BOUND, 0.5 * m**3 / (4 * M * L**2))
            lo, hi = L * np.sqrt(2) / np.sqrt(m), m / np.sqrt(2 * M * theta0)
            C = 0.5 * (lo + hi)
        return cls(m, M, L, float(C), float(theta0), s_count, f)

    @property
    def eps(self) -> float:
        return 2 * self.M * self.theta0

    @property
    def s_grid(self) -> np.ndarray:
        return np.linspace(-self.theta0 / 2, self.theta0 / 2, self.s_count)

    def violations(self, n_check: int = 4096) -> list[str]:
        out = []
        if not self.m <= self.M:
            out.append("m > M")
        if self.s_count % 2 == 0 or self.s_count < 3:
            out.append("s_count must be odd and >= 3")
        lo, hi = self.L * np.sqrt(2) / np.sqrt(self.m), self.m / np.sqrt(2 * self.M * self.theta0)
        if not lo - 1e-12 <= self.C <= hi + 1e-12:
            out.append(f"C={self.C:g} outside window [{lo:g}, {hi:g}]")
        if not 0 < self.theta0 <= SMALL_ANGLE_BOUND:
            out.append("theta0 outside the small-angle range")
        t = np.linspace(0, 2 * np.pi, n_check)
        ft = self.f(t)
        if ft.min() < self.m - 1e-12 or ft.max() > self.M + 1e-12:
            out.append("f leaves [m, M]")
        rng = np.random.default_rng(0)
        a, b = rng.uniform(0, 2 * np.pi, (2, n_check))
        if np.any(np.abs(self.f(a) - self.f(b)) > self.L * np.sqrt(np.abs(a - b)) + 1e-12):
            out.append("f breaks the 1/2-Hölder bound")
        return out

    def to_dict(self) -> dict:
        return {"m": float(self.m), "M": float(self.M), "L": float(self.L), "C": float(self.C),
                "theta0": float(self.theta0),
                "s_count": self.s_count, "K_terms": self.f.K_terms, "constant": self.f.constant}

    @classmethod
    def from_dict(cls, data: dict) -> "FractalBallParams":
        f = NormalizedProfile(data["m"], data["M"], int(data.get("K_terms", 24)), bool(data.get("constant", False)))
        return cls(float(data["m"]), float(data["M"]), float(data["L"]), float(data["C"]),
                   float(data["theta0"]), int(data["s_count"]), f)


def arc_point(f, t) -> np.ndarray:
    """``phi(pi/2 + t) = f(pi/2 + t) (cos, sin)(pi/2 + t)``."""
    a = np.pi / 2 + np.asarray(t, dtype=float)
    r = f(a)
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)


def build_fractal_ball(params: FractalBallParams, check: bool = True) -> BallSpec:
    """Intersection over the s-grid of ``A_s Y(2M theta0, f(pi/2+s), C)`` and its negation."""
    if check:
        bad = params.violations()
        if bad:
            raise ParameterError("; ".join(bad))
    s = params.s_grid
    beta = params.f(np.pi / 2 + s)
    cs, sn = np.cos(s), np.sin(s)
    eps, C = params.eps, params.C

    def margin(p):
        p = np.asarray(p, dtype=float)
        x = p[..., 0:1]
        y = p[..., 1:2]
        # rotate by -s
        qx = cs * x + sn * y
        qy = -sn * x + cs * y
        ax = np.abs(qx)
        top = beta + C * np.sqrt(ax)
        m = np.minimum(eps - ax, np.minimum(top - qy, top + qy))
        return m.min(axis=-1)

    ymax = params.M + C * np.sqrt(eps)
    box = np.array([eps, ymax])
    interior = 0.99 * min(eps, params.m) / np.sqrt(2.0)
    return BallSpec(2, margin, float(np.hypot(eps, ymax)), box, interior, name="fractal-ball",
                    meta={"kind": "fractal-ball", "params": params.to_dict()})


def arc_samples(params: FractalBallParams, count: int = 100_000) -> np.ndarray:
    """Parameters ``t`` on the open interval ``|t| < theta0/2``."""
    h = params.theta0 / 2
    return np.linspace(-h, h, count + 2)[1:-1]


# ---------------------------------------------------------------------------
# remark ball


def remark_profile(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 1.0 + np.sqrt(np.clip(x, 0, None))


def remark_margin(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    return np.minimum(1 - np.abs(x), np.minimum(remark_profile(x) - y, y + remark_profile(-x)))


def remark_ball_contains(point, slack: float = 0.0) -> np.ndarray:
    return remark_margin(point) >= -slack


def remark_ball() -> BallSpec:
    """``{|x| <= 1, -f(-x) <= y <= f(x)}`` with ``f = 1`` for ``x <= 0`` and ``1 + sqrt x`` after."""
    def sampler(rng, k):
        x = rng.uniform(-1, 1, k)
        side = rng.integers(0, 2, k)
        y = np.where(side == 0, remark_profile(x), -remark_profile(-x))
        return np.column_stack([x, y])

    return BallSpec(2, remark_margin, float(np.hypot(1, 2)), np.array([1.0, 2.0]), 0.99 / np.sqrt(2),
                    name="remark-ball", boundary_sampler=sampler, meta={"kind": "remark-ball"})


def remark_gauge_near_top(x) -> np.ndarray:
    """Closed form of the gauge at ``(x, 1)``: ``1`` for ``x <= 0``, root of ``s = 1 + sqrt(s x)`` after.

    Gauge ``N = 1/sqrt(s)`` because dilations scale both coordinates by ``lambda^2``.
    """
    x = np.asarray(x, dtype=float)
    xp = np.clip(x, 0, None)
    r = (np.sqrt(xp) + np.sqrt(xp + 4)) / 2  # sqrt(s)
    s = r * r
    return np.where(x <= 0, 1.0, 1 / np.sqrt(s))


def tilted_graph_lipschitz(n: int = 2001, width: float = 0.2) -> float:
    """Lipschitz constant of the boundary near ``(0, 1)`` written as a graph over the
    direction ``(1, 1)/sqrt 2``.

    Points ``(x, f(x))`` are rotated by -45 degrees; monotone abscissae and
    bounded difference quotients certify a Lipschitz graph there.
    """
    x = np.linspace(-width, width, n)
    y = remark_profile(x)
    u = (x + y) / np.sqrt(2)
    v = (y - x) / np.sqrt(2)
    du = np.diff(u)
    if np.any(du <= 0):
        return float("inf")
    return float(np.max(np.abs(np.diff(v) / du)))
