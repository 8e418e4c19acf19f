"""Unit spheres as radial graphs, and their regularity.

Every nonzero point is ``delta_t(p)`` for one point ``p`` of the Euclidean
unit sphere ``S`` and one ``t > 0``, so the metric sphere is the image of
``p -> delta_{1/N(p)} p``.  Estimators here measure how rough that graph
is: Hölder exponents from dyadic oscillations, box-counting dimensions,
cusp exponents of sphere profiles, and cone containment.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import GradedAlgebra, delta_bar, dilate
from .jsonio import write_csv
from .sampling import sphere_directions, unit_vectors


@dataclass
class SphereSample:
    directions: np.ndarray
    gauge_values: np.ndarray
    sphere_points: np.ndarray

    def rows(self) -> np.ndarray:
        return np.column_stack([self.directions, self.gauge_values, self.sphere_points])

    def to_csv(self, path) -> None:
        n = self.directions.shape[1]
        header = [f"d{i}" for i in range(n)] + ["gauge"] + [f"p{i}" for i in range(n)]
        write_csv(path, header, self.rows())


def sample_sphere(spec: GradedAlgebra, gauge, n_directions: int = 1000, seed: int = 0,
                  directions=None) -> SphereSample:
    """``delta_{1/N(p)} p`` for reference directions ``p``."""
    d = sphere_directions(spec.dim, n_directions, seed) if directions is None else np.asarray(directions, float)
    g = np.asarray(gauge(d), dtype=float)
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("gauge must be positive and finite on the reference sphere")
    pts = dilate(spec, 1.0 / g, d)
    return SphereSample(d, g, pts)


def radial_consistency(sample: SphereSample, gauge) -> float:
    """Largest ``|N(point) - 1|`` over the sampled sphere points."""
    return float(np.max(np.abs(np.asarray(gauge(sample.sphere_points)) - 1.0)))


# ---------------------------------------------------------------------------
# Hölder exponents


def _fit(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss if ss > 0 else 1.0
    dof = max(len(x) - 2, 1)
    sigma2 = float(np.sum((y - pred) ** 2)) / dof
    sxx = float(np.sum((x - x.mean()) ** 2))
    se = np.sqrt(sigma2 / sxx) if sxx > 0 else np.inf
    return float(coef[0]), float(coef[1]), r2, float(se)


def region_pairs(region: dict, scales: np.ndarray, seed: int = 0):
    """Base points and partners at each separation.

    ``{"kind": "line", "base": b, "direction": v}`` pairs ``b`` with ``b +- delta v``.
    ``{"kind": "patch", "center": c, "radius": r, "points": k}`` pairs
    points of the reference sphere within angle ``r`` of ``c`` with partners
    at distance ``delta`` along random tangent directions.
    """
    kind = region.get("kind", "patch")
    rng = np.random.default_rng(seed)
    out = []
    if kind == "line":
        b = np.asarray(region["base"], dtype=float)
        v = np.asarray(region["direction"], dtype=float)
        v = v / np.linalg.norm(v)
        sides = region.get("sides", (1.0, -1.0))
        for d in scales:
            base = np.repeat(b[None], len(sides), 0)
            other = b[None] + d * np.asarray(sides)[:, None] * v
            out.append((d, base, other))
        return out
    if kind != "patch":
        raise ValueError(f"unknown region kind {kind!r}")
    c = np.asarray(region["center"], dtype=float)
    c = c / np.linalg.norm(c)
    k = int(region.get("points", 256))
    rad = float(region.get("radius", 0.2))
    dim = len(c)
    t = unit_vectors(rng, k, dim)
    t = t - (t @ c)[:, None] * c
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    ang = rad * rng.uniform(0, 1, k) ** (1 / max(dim - 1, 1))
    base = np.cos(ang)[:, None] * c + np.sin(ang)[:, None] * t
    for d in scales:
        w = unit_vectors(rng, k, dim)
        w = w - (w * base).sum(1, keepdims=True) * base
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        # geodesic step of chord length d on the unit sphere
        a = 2 * np.arcsin(min(d / 2, 1.0))
        other = np.cos(a) * base + np.sin(a) * w
        out.append((d, base, other))
    return out


def graph_regularity_estimate(gauge, region: dict, scale_range=(4, 20), seed: int = 0,
                              trim: float = 0.05) -> dict:
    """Exponent of ``max |N(p) - N(q)|`` against ``|p - q|`` over dyadic separations.

    Pairs at the largest and smallest ``trim`` fraction of separations are
    discarded before the per-scale maxima are regressed on a log-log scale.
    The reported exponent is clipped to ``(0, 1]``; the raw slope is kept.
    """
    a, b = scale_range
    scales = 2.0 ** -np.arange(a, b + 1, dtype=float)
    pairs = region_pairs(region, scales, seed)
    seps, osc = [], []
    for d, base, other in pairs:
        diff = np.abs(np.asarray(gauge(other), float) - np.asarray(gauge(base), float))
        seps.append(np.linalg.norm(other - base, axis=1))
        osc.append(diff)
    sep = np.concatenate(seps)
    val = np.concatenate(osc)
    lo, hi = np.quantile(sep, [trim, 1 - trim])
    keep = (sep >= lo) & (sep <= hi)
    if keep.sum() < 3:
        raise ValueError("insufficient pairs for a regularity estimate")
    levels = np.unique(np.round(np.log2(sep[keep]), 6))
    xs, ys = [], []
    for lv in levels:
        sel = keep & (np.abs(np.log2(sep) - lv) < 1e-5)
        m = float(val[sel].max())
        if m > 0:
            xs.append(lv * np.log(2))
            ys.append(np.log(m))
    if len(xs) < 3:
        raise ValueError("oscillation vanishes at too many scales")
    slope, _, r2, se = _fit(np.array(xs), np.array(ys))
    lip = float(np.max(val[keep] / sep[keep]))
    return {"holder_exponent": float(min(max(slope, 1e-12), 1.0)), "raw_slope": slope,
            "lipschitz_constant": lip, "r2": r2, "stderr": se, "scales": [float(np.exp(x)) for x in xs],
            "trimmed_fraction": trim}


# ---------------------------------------------------------------------------
# box counting


def box_counts(points, scales_log2, normalize: str = "isotropic") -> np.ndarray:
    """Occupied boxes of side ``2^-k`` after mapping the cloud into the unit cube."""
    p = np.asarray(points, dtype=float)
    p = p - p.min(0)
    ext = p.max(0)
    if normalize == "isotropic":
        p = p / max(float(ext.max()), 1e-300)
    else:
        p = p / np.where(ext > 0, ext, 1.0)
    out = []
    for k in scales_log2:
        idx = np.minimum(np.floor(p * 2.0**k).astype(np.int64), 2**k - 1)
        out.append(len(np.unique(idx, axis=0)))
    return np.array(out)


def graph_box_counts(t, y, scales_log2) -> np.ndarray:
    """Boxes meeting the piecewise-linear graph of ``y(t)`` after normalizing both axes."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(t)
    t, y = t[order], y[order]
    t = (t - t[0]) / (t[-1] - t[0])
    span = y.max() - y.min()
    y = (y - y.min()) / (span if span > 0 else 1.0)
    ylo = np.minimum(y[:-1], y[1:])
    yhi = np.maximum(y[:-1], y[1:])
    out = []
    for k in scales_log2:
        n = 2**k
        # a segment may straddle columns; charge it to both end columns
        c0 = np.minimum((t[:-1] * n).astype(np.int64), n - 1)
        c1 = np.minimum((t[1:] * n).astype(np.int64), n - 1)
        lo = np.full(n, np.inf)
        hi = np.full(n, -np.inf)
        for c in (c0, c1):
            np.minimum.at(lo, c, ylo)
            np.maximum.at(hi, c, yhi)
        ok = np.isfinite(lo)
        top = np.minimum(np.floor(hi[ok] * n), n - 1)
        bot = np.minimum(np.floor(lo[ok] * n), n - 1)
        out.append(int(np.sum(top - bot + 1)))
    return np.array(out)


def box_counting_dimension(points=None, scales=(4, 11), graph=None, normalize: str = "isotropic") -> dict:
    """Least-squares slope of ``log N(eps)`` against ``log(1/eps)``; ``ci`` is twice the standard error.

    Pass ``graph=(t, y)`` for function graphs (column ranges of the
    interpolated graph); otherwise ``points`` are counted by occupancy.
    """
    a, b = scales
    if b - a < 2:
        raise ValueError("need at least three scales")
    ks = np.arange(a, b + 1)
    if graph is not None:
        counts = graph_box_counts(graph[0], graph[1], ks)
    else:
        counts = box_counts(points, ks, normalize)
    slope, _, r2, se = _fit(ks * np.log(2), np.log(counts))
    return {"dimension": slope, "ci": 2 * se, "scales": [float(2.0**-k) for k in ks],
            "counts": counts.tolist(), "r2": r2}


def dimension_bounds_check(estimate: float, n: int, s, ci: float = 0.0, tol: float = 0.0) -> dict:
    """Is the estimate inside ``[n - 1, n - 1/s]`` up to ``max(ci, tol)``?"""
    lo, hi = n - 1.0, n - 1.0 / float(s)
    slack = max(ci, tol)
    ok = lo - slack <= estimate <= hi + slack
    return {"estimate": float(estimate), "window": [lo, hi], "slack": slack, "passed": bool(ok),
            "margin": float(min(estimate - lo, hi - estimate))}


# ---------------------------------------------------------------------------
# cusp exponents


def cusp_profile(gauge_G, z_vector, ts, z_max: float = 1e3, iters: int = 200) -> np.ndarray:
    """``|z|`` with ``N_G(z Z)^2 + t^2 = 1`` for each ``t``, by bisection on ``z``."""
    ts = np.asarray(ts, dtype=float)
    Z = np.asarray(z_vector, dtype=float)
    target = np.sqrt(np.clip(1 - ts**2, 0, None))
    lo = np.zeros_like(ts)
    hi = np.full_like(ts, z_max)
    if np.any(gauge_G(hi[:, None] * Z) < target):
        raise ValueError("z_max too small to bracket the sphere")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = np.asarray(gauge_G(mid[:, None] * Z)) <= target
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


def classify_exponent(e: float, tol: float = 0.05) -> str:
    if e < 1 - tol:
        return "smooth cap"
    if e <= 1 + tol:
        return "Lipschitz corner"
    return "cusp"


def cusp_exponent_fit(t, z, window=(1e-4, 1e-1), tol: float = 0.05) -> dict:
    """Slope of ``log|z|`` against ``log(1 - t)`` for ``1 - t`` inside ``window``."""
    t = np.asarray(t, dtype=float)
    z = np.abs(np.asarray(z, dtype=float))
    gap = 1 - t
    sel = (gap >= window[0]) & (gap <= window[1]) & (z > 0)
    if sel.sum() < 5:
        raise ValueError("too few samples near t = 1")
    slope, _, r2, se = _fit(np.log(gap[sel]), np.log(z[sel]))
    return {"estimate": slope, "ci": 2 * se, "r2": r2, "samples": int(sel.sum()),
            "classification": classify_exponent(slope, tol)}


def product_cusp_exponent(gauge_G, z_vector, n: int = 60, window=(1e-4, 1e-1)) -> dict:
    ts = 1 - np.logspace(np.log10(window[0]), np.log10(window[1]), n)
    z = cusp_profile(gauge_G, z_vector, ts)
    out = cusp_exponent_fit(ts, z, window)
    out["t"] = ts.tolist()
    out["z"] = z.tolist()
    return out


# ---------------------------------------------------------------------------
# tent cones


@dataclass(frozen=True)
class ConeSpec:
    axis: tuple
    aperture: float
    height: float

    def __post_init__(self):
        if not 0 <= self.aperture <= np.pi:
            raise ValueError("aperture must lie in [0, pi]")
        if self.height <= 0:
            raise ValueError("height must be positive")

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(self.axis, dtype=float)
        v = v / np.linalg.norm(v)
        r = np.linalg.norm(x, axis=-1)
        cos = np.where(r > 0, (x @ v) / np.where(r > 0, r, 1), 1.0)
        return (r <= self.height) & (np.arccos(np.clip(cos, -1, 1)) <= self.aperture + 1e-15)


def cone_points(axis, aperture: float, height: float, n_dirs: int = 64, n_radii: int = 40,
                min_ratio: float = 1e-9) -> np.ndarray:
    """Points on the lateral surface and axis of the cone, radii log-spaced down to ``min_ratio * height``."""
    v = np.asarray(axis, dtype=float)
    v = v / np.linalg.norm(v)
    n = len(v)
    basis = np.linalg.svd(v[None])[2][1:]  # orthonormal complement
    if n == 2:
        w = np.array([basis[0], -basis[0]])
    else:
        w = sphere_directions(n - 1, n_dirs) @ basis
    radii = height * np.logspace(np.log10(min_ratio), 0, n_radii)
    pts = []
    for beta in (0.0, 0.5 * aperture, aperture):
        dirs = np.cos(beta) * v + np.sin(beta) * w
        pts.append((radii[:, None, None] * dirs[None]).reshape(-1, n))
    return np.concatenate(pts)


def tent_cone_probe(spec: GradedAlgebra, ball, point, apertures, heights, n_near: int = 16,
                    spread: float = 1e-3, seed: int = 0, slack: float = 1e-9, gauge=None) -> dict:
    """Largest aperture whose cone with axis ``-delta_bar(q)`` fits inside the ball at sampled boundary points ``q`` near ``point``."""
    from .norms import ball_gauge

    gauge = gauge or ball_gauge(spec, ball)
    rng = np.random.default_rng(seed)
    point = np.asarray(point, dtype=float)
    near = point[None] + spread * rng.normal(size=(n_near, spec.dim))
    near = np.concatenate([point[None], near])
    g = np.asarray(gauge(near), float)
    qs = dilate(spec, 1.0 / g, near)
    results = []
    best = None
    for a in sorted(apertures):
        for h in sorted(heights, reverse=True):
            ok = True
            for q in qs:
                axis = -delta_bar(spec, q)
                pts = q[None] + cone_points(axis, a, h)
                if np.any(ball.margin(pts) < -slack):
                    ok = False
                    break
            results.append({"aperture": float(a), "height": float(h), "passed": ok})
            if ok:
                best = (float(a), float(h))
                break
    return {"max_aperture": None if best is None else best[0],
            "height": None if best is None else best[1],
            "tried": results, "points": len(qs)}
