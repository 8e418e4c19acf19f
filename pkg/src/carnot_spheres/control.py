"""Piecewise-constant controls, end-point maps and L-infinity geodesics.

A control is ``m`` first-layer vectors on the uniform partition of
``[0, 1]``.  Because every left-invariant flow of a constant control is a
one-parameter subgroup, the end-point map is the product
``o exp(h u_1) ... exp(h u_m)`` with ``h = 1/m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np
from scipy.optimize import minimize

from .algebra import (GradedAlgebra, ad_matrix, adjoint_exp, bch_product, box_quasi_norm_raw, bracket,
                      left_jacobian_inverse, translation_jacobians)
from .sampling import fibonacci_sphere, map_items, unit_vectors

# ---------------------------------------------------------------------------
# norms on the first layer


@dataclass(frozen=True)
class V1Norm:
    """Norm on the first layer: ``euclidean``, ``l1``, ``linf`` or ``polygon`` (planar)."""

    kind: str = "euclidean"
    vertices: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "l1", "linf", "polygon"):
            raise ValueError(f"unknown norm {self.kind!r}")
        if self.kind == "polygon" and self.vertices is None:
            raise ValueError("polygon norm needs vertices")

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "euclidean":
            return np.linalg.norm(u, axis=-1)
        if self.kind == "l1":
            return np.abs(u).sum(-1)
        if self.kind == "linf":
            return np.abs(u).max(-1)
        return np.max(u @ self.facets(u.shape[-1]).T, axis=-1)

    def dual(self, d) -> np.ndarray:
        """Dual norm, i.e. the support function of the unit ball."""
        d = np.asarray(d, dtype=float)
        if self.kind == "euclidean":
            return np.linalg.norm(d, axis=-1)
        if self.kind == "l1":
            return np.abs(d).max(-1)
        if self.kind == "linf":
            return np.abs(d).sum(-1)
        return np.max(d @ np.asarray(self.vertices, dtype=float).T, axis=-1)

    @property
    def polyhedral(self) -> bool:
        return self.kind != "euclidean"

    def facets(self, r: int) -> np.ndarray:
        """Rows ``a_k`` with ``||u|| = max_k a_k . u`` (polyhedral norms only)."""
        if self.kind == "l1":
            return np.array(list(iproduct([-1.0, 1.0], repeat=r)))
        if self.kind == "linf":
            return np.concatenate([np.eye(r), -np.eye(r)])
        if self.kind == "polygon":
            from scipy.spatial import ConvexHull
            v = np.asarray(self.vertices, dtype=float)
            eq = ConvexHull(v).equations
            return eq[:, :-1] / -eq[:, -1:]
        raise ValueError("euclidean norm has no facets")

    def to_dict(self):
        if self.kind == "polygon":
            return {"kind": "polygon", "vertices": [list(v) for v in self.vertices]}
        return self.kind

    @classmethod
    def parse(cls, data) -> "V1Norm":
        if isinstance(data, V1Norm):
            return data
        if isinstance(data, str):
            return cls(data)
        return cls("polygon", tuple(tuple(v) for v in data["vertices"]))


@dataclass
class ControlSignal:
    values: np.ndarray
    norm: V1Norm = field(default_factory=V1Norm)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("control values must be finite")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def energy(self) -> float:
        """``||u||_{L^inf}``: the largest segment norm."""
        return float(np.max(self.norm(self.values)))

    def to_dict(self) -> dict:
        return {"m": self.m, "values": self.values.tolist(), "norm": self.norm.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "ControlSignal":
        values = np.asarray(data["values"], dtype=float)
        if "m" in data and int(data["m"]) != len(values):
            raise ValueError("m does not match the number of values")
        return cls(values, V1Norm.parse(data.get("norm", "euclidean")))

    @classmethod
    def constant(cls, u, m: int, norm: V1Norm | None = None) -> "ControlSignal":
        return cls(np.tile(np.asarray(u, dtype=float), (m, 1)), norm or V1Norm())


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, ControlSignal) else np.asarray(u, dtype=float)


def _segments(spec: GradedAlgebra, values: np.ndarray) -> np.ndarray:
    """``h u_j`` embedded in the algebra, shape ``(..., m, n)``."""
    r = len(spec.first_layer)
    if values.shape[-1] != r:
        raise ValueError(f"controls have {values.shape[-1]} components, first layer has {r}")
    m = values.shape[-2]
    return spec.embed_first_layer(values) / m


# ---------------------------------------------------------------------------
# end-point map


def endpoint(spec: GradedAlgebra, u, o=None) -> np.ndarray:
    """``o exp(h u_1) ... exp(h u_m)``; ``u`` may carry leading batch axes."""
    seg = _segments(spec, _values(u))
    p = np.zeros(seg.shape[:-2] + (spec.dim,)) if o is None else np.broadcast_to(np.asarray(o, float), seg.shape[:-2] + (spec.dim,)).copy()
    if o is not None and np.shape(o)[-1] != spec.dim:
        raise ValueError("base point has the wrong dimension")
    for j in range(seg.shape[-2]):
        p = bch_product(spec, p, seg[..., j, :])
    return p


def _field(spec, p, e):
    """Left-invariant field ``dL_p e``."""
    pe = bracket(spec, p, e)
    return e + 0.5 * pe + bracket(spec, p, pe) / 12.0


def endpoint_ode(spec: GradedAlgebra, u, o=None, steps: int = 1000) -> np.ndarray:
    """Classical RK4 for ``gamma' = dL_gamma u(t)`` with steps split evenly over segments."""
    vals = _values(u)
    m = vals.shape[-2]
    e = spec.embed_first_layer(vals)
    per = max(1, int(np.ceil(steps / m)))
    dt = 1.0 / (m * per)
    p = np.zeros(e.shape[:-2] + (spec.dim,)) if o is None else np.broadcast_to(np.asarray(o, float), e.shape[:-2] + (spec.dim,)).copy()
    for j in range(m):
        ej = e[..., j, :]
        for _ in range(per):
            k1 = _field(spec, p, ej)
            k2 = _field(spec, p + 0.5 * dt * k1, ej)
            k3 = _field(spec, p + 0.5 * dt * k2, ej)
            k4 = _field(spec, p + dt * k3, ej)
            p = p + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


@dataclass
class EndpointJacobian:
    blocks: np.ndarray  # (m, n, r)

    @property
    def matrix(self) -> np.ndarray:
        m, n, r = self.blocks.shape
        return np.transpose(self.blocks, (1, 0, 2)).reshape(n, m * r)

    @property
    def rank(self) -> int:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(s > 1e-10 * max(1.0, s[0] if len(s) else 0.0)))


def _suffix_products(spec, seg):
    """``b_j = exp(h u_{j+1}) ... exp(h u_m)`` for every ``j``."""
    m = seg.shape[0]
    out = np.zeros((m, spec.dim))
    acc = np.zeros(spec.dim)
    for j in range(m - 1, -1, -1):
        out[j] = acc
        acc = bch_product(spec, seg[j], acc)
    return out, acc


def _closed_jacobian(spec, vals, o=None):
    """``M_j = h dL_End Ad_{b_j^{-1}} dL_{h u_j}^{-1} E`` (first-order perturbation of one factor)."""
    seg = _segments(spec, vals)
    m = seg.shape[0]
    b, tail = _suffix_products(spec, seg)
    end = tail if o is None else bch_product(spec, np.asarray(o, float), tail)
    dl_end = translation_jacobians(spec, end)[0]
    ad_inv = adjoint_exp(spec, -b)
    jinv = left_jacobian_inverse(spec, seg)
    E = np.eye(spec.dim)[:, spec.first_layer]
    blocks = dl_end[None] @ ad_inv @ jinv @ E[None] / m
    return end, blocks


def endpoint_jacobian(spec: GradedAlgebra, u, o=None, method: str = "augmented",
                      steps_per_segment: int = 40) -> EndpointJacobian:
    """Blocks ``M_j = d End / d u_j``.

    ``augmented`` integrates ``(p, Q)`` under the doubled fields
    ``Y_i = (X_i, dX_i[q])`` and ``Z_i = (0, X_i)``, one column of ``Q``
    per (segment, component) variation; ``closed`` uses the product formula.
    """
    vals = _values(u)
    if method == "closed":
        return EndpointJacobian(_closed_jacobian(spec, vals, o)[1])
    if method != "augmented":
        raise ValueError(f"unknown method {method!r}")
    m, r = vals.shape
    n = spec.dim
    e = spec.embed_first_layer(vals)
    E = np.eye(n)[:, spec.first_layer]
    p = np.zeros(n) if o is None else np.asarray(o, dtype=float).copy()
    Q = np.zeros((n, m * r))
    dt = 1.0 / (m * steps_per_segment)

    def rhs(p, Q, ej, j):
        ad_p = ad_matrix(spec, p)
        ad_e = ad_matrix(spec, ej)
        ad_pe = ad_matrix(spec, bracket(spec, p, ej))
        dX = -0.5 * ad_e - ad_pe / 12.0 - ad_p @ ad_e / 12.0
        dQ = dX @ Q
        dl = np.eye(n) + 0.5 * ad_p + ad_p @ ad_p / 12.0
        dQ[:, j * r:(j + 1) * r] += dl @ E
        return _field(spec, p, ej), dQ

    for j in range(m):
        ej = e[j]
        for _ in range(steps_per_segment):
            k1 = rhs(p, Q, ej, j)
            k2 = rhs(p + 0.5 * dt * k1[0], Q + 0.5 * dt * k1[1], ej, j)
            k3 = rhs(p + 0.5 * dt * k2[0], Q + 0.5 * dt * k2[1], ej, j)
            k4 = rhs(p + dt * k3[0], Q + dt * k3[1], ej, j)
            p = p + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            Q = Q + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return EndpointJacobian(np.transpose(Q.reshape(n, m, r), (1, 0, 2)))


def fd_jacobian(spec: GradedAlgebra, u, o=None, step: float = 1e-5) -> EndpointJacobian:
    """Central finite differences of :func:`endpoint`."""
    vals = _values(u)
    m, r = vals.shape
    pert = np.zeros((m * r, 2, m, r))
    for k in range(m * r):
        j, i = divmod(k, r)
        pert[k, 0, j, i] = step
        pert[k, 1, j, i] = -step
    ends = endpoint(spec, vals[None, None] + pert, o)
    cols = (ends[:, 0] - ends[:, 1]) / (2 * step)
    return EndpointJacobian(cols.reshape(m, r, spec.dim).transpose(0, 2, 1))


def refine_control(u: ControlSignal) -> ControlSignal:
    """Split every segment in two; the end point is unchanged."""
    return ControlSignal(np.repeat(u.values, 2, axis=0), u.norm)


# ---------------------------------------------------------------------------
# minimal stretching


class UnsupportedDimension(ValueError):
    pass


def _direction_candidates(n: int, seed: int = 0) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        a = 2 * np.pi * np.arange(3600) / 3600
        return np.column_stack([np.cos(a), np.sin(a)])
    if n == 3:
        return fibonacci_sphere(20000)
    return np.concatenate([np.eye(n), -np.eye(n),
                           unit_vectors(np.random.default_rng(seed), 40000, n)])


def support_sum(blocks: np.ndarray, norm: V1Norm, d) -> np.ndarray:
    """``sum_j ||M_j^T d||_*``: support function of the Minkowski sum of the block images."""
    d = np.asarray(d, dtype=float)
    y = np.einsum("jnr,...n->...jr", blocks, d)
    return norm.dual(y).sum(-1)


def minimal_stretching(jac, control_norm: V1Norm | str = "euclidean", target=None,
                       seed: int = 0, refine: int = 3) -> float:
    """Inradius of the image of the control unit ball.

    ``target`` is an optional invertible matrix ``W`` with target norm
    ``|W y|``; a scalar ``c`` stands for ``c I``.
    """
    blocks = jac.blocks if isinstance(jac, EndpointJacobian) else np.asarray(jac, dtype=float)
    norm = V1Norm.parse(control_norm)
    n = blocks.shape[1]
    if n > 4:
        raise UnsupportedDimension(f"minimal stretching supports n <= 4, got {n}")
    if target is not None:
        W = np.asarray(target, dtype=float)
        W = W * np.eye(n) if W.ndim == 0 else W
        blocks = np.einsum("ab,jbr->jar", W, blocks)
    cand = _direction_candidates(n, seed)
    mat = np.transpose(blocks, (1, 0, 2)).reshape(n, -1)
    u_svd = np.linalg.svd(mat)[0]
    cand = np.concatenate([cand, u_svd[:, -1:].T, -u_svd[:, -1:].T])
    vals = support_sum(blocks, norm, cand)
    best = float(vals.min())
    if best <= 1e-14 * max(1.0, float(vals.max())):
        return max(best, 0.0)

    def obj(x):
        nx = np.linalg.norm(x)
        return float(support_sum(blocks, norm, x / nx)) if nx > 0 else np.inf

    def obj_grad(x):
        nx = np.linalg.norm(x)
        d = x / nx
        y = np.einsum("jnr,n->jr", blocks, d)
        ny = np.linalg.norm(y, axis=-1)
        g = np.einsum("jnr,jr->n", blocks, y / np.where(ny > 0, ny, 1.0)[:, None])
        return float(ny.sum()), (g - d * (g @ d)) / nx

    for k in np.argsort(vals)[:refine]:
        if norm.kind == "euclidean":
            res = minimize(obj_grad, cand[k], jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 200})
        else:
            res = minimize(obj, cand[k], method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        best = min(best, float(res.fun))
    return max(best, 0.0)


def tau(spec: GradedAlgebra, u, o=None, norm: V1Norm | str | None = None, **kw) -> float:
    if norm is None:
        norm = u.norm if isinstance(u, ControlSignal) else V1Norm()
    return minimal_stretching(endpoint_jacobian(spec, u, o, method="closed"), norm, **kw)


def is_singular(spec: GradedAlgebra, u, o=None, tol: float = 1e-8, norm=None) -> bool:
    """Singular in the discretized subspace: ``tau`` below ``tol``."""
    return tau(spec, u, o, norm) <= tol


def scan_directions(r: int, count: int = 100) -> np.ndarray:
    """Unit first-layer directions: an angle grid for r = 2, axes then a Fibonacci set for r = 3."""
    if r == 1:
        return np.array([[1.0], [-1.0]])
    if r == 2:
        a = 2 * np.pi * np.arange(count) / count
        d = np.column_stack([np.cos(a), np.sin(a)])
        d[np.abs(d) < 1e-15] = 0.0
        return d
    axes = np.concatenate([np.eye(r), -np.eye(r)])
    rest = fibonacci_sphere(count - len(axes)) if r == 3 else unit_vectors(np.random.default_rng(0), count - len(axes), r)
    return np.concatenate([axes, rest])


def direction_classes(dirs: np.ndarray, tol: float = 1e-9) -> list[list[int]]:
    """Group directions spanning the same line."""
    classes: list[list[int]] = []
    for i, d in enumerate(dirs):
        for c in classes:
            if abs(abs(float(dirs[c[0]] @ d)) - 1.0) <= tol:
                c.append(i)
                break
        else:
            classes.append([i])
    return classes


def singular_scan(spec: GradedAlgebra, directions=None, m: int = 16, tol: float = 1e-8,
                  norm: V1Norm | str = "euclidean", count: int = 100, workers: int = 1) -> dict:
    """Flag constant controls whose discretized ``tau`` is below ``tol``."""
    r = len(spec.first_layer)
    dirs = scan_directions(r, count) if directions is None else np.asarray(directions, dtype=float)
    norm = V1Norm.parse(norm)
    taus = map_items(lambda d: tau(spec, ControlSignal.constant(d, m, norm)), list(dirs), workers)
    taus = np.array(taus)
    flagged = np.flatnonzero(taus <= tol)
    classes = direction_classes(dirs[flagged]) if len(flagged) else []
    names = [spec.names[i] for i in spec.first_layer]
    return {
        "directions": len(dirs), "m": m, "tol": tol, "norm": norm.to_dict(),
        "flagged": [{"direction": dirs[k].tolist(), "tau": float(taus[k])} for k in flagged],
        "classes": [{"representative": dirs[flagged[c[0]]].tolist(), "members": len(c),
                     "label": _label(dirs[flagged[c[0]]], names)} for c in classes],
        "min_unflagged_tau": float(np.min(taus[taus > tol])) if np.any(taus > tol) else None,
        "note": "singular in the discretized control subspace",
    }


def _label(d, names):
    k = int(np.argmax(np.abs(d)))
    if np.sum(np.abs(d) > 1e-9) == 1:
        return names[k]
    return " + ".join(f"{c:.3g}*{nm}" for c, nm in zip(d, names) if abs(c) > 1e-9)


# ---------------------------------------------------------------------------
# geodesics


@dataclass
class GeodesicSolution:
    control: ControlSignal
    value: float
    endpoint_error: float
    converged: bool
    restart: int = 0
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"control": self.control.to_dict(), "value": self.value,
                "endpoint_error": self.endpoint_error, "converged": self.converged,
                "restart": self.restart}


def _smooth_norm_and_grad(norm: V1Norm, u: np.ndarray, eps: float = 1e-12):
    if norm.kind == "euclidean":
        v = np.sqrt(np.sum(u * u, -1) + eps)
        return v, u / v[:, None]
    A = norm.facets(u.shape[-1])
    z = u @ A.T
    # log-sum-exp smoothing of the max over facets
    k = 200.0
    zmax = z.max(-1, keepdims=True)
    w = np.exp(k * (z - zmax))
    s = w.sum(-1, keepdims=True)
    v = zmax[:, 0] + np.log(s[:, 0]) / k
    return v, (w / s) @ A


def _project(spec, vals, target, o, iters: int = 30, tol: float = 1e-13):
    """Gauss-Newton minimum-norm corrections onto ``End(u) = target``."""
    for _ in range(iters):
        end, blocks = _closed_jacobian(spec, vals, o)
        res = end - target
        if np.max(np.abs(res)) <= tol:
            break
        J = EndpointJacobian(blocks).matrix
        step = np.linalg.lstsq(J, res, rcond=None)[0]
        vals = vals - step.reshape(vals.shape)
    end = endpoint(spec, vals, o)
    return vals, float(np.max(np.abs(end - target)))


def _solve_one(spec, norm, target, m, o, x0, power, outer, tol, mu0=10.0):
    r = x0.shape[1]
    history = []
    x = x0.ravel().copy()
    mu = mu0

    def fun(x, mu):
        vals = x.reshape(m, r)
        nv, gn = _smooth_norm_and_grad(norm, vals)
        big = nv.max()
        ratio = nv / big
        pm = np.mean(ratio**power) ** (1 / power) * big
        gpm = (np.mean(ratio**power)) ** (1 / power - 1) * ratio ** (power - 1) / m
        g = gpm[:, None] * gn
        end, blocks = _closed_jacobian(spec, vals, o)
        res = end - target
        f = pm + mu * res @ res
        g = g + 2 * mu * np.einsum("n,jnr->jr", res, blocks)
        return f, g.ravel()

    for _ in range(outer):
        res = minimize(fun, x, args=(mu,), jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "gtol": 1e-10, "ftol": 1e-15})
        x = res.x
        history.append(float(res.fun))
        mu *= 10.0
    vals = _polish(spec, norm, target, m, o, x.reshape(m, r))
    vals, err = _project(spec, vals, target, o)
    value = float(np.max(norm(vals)))
    return GeodesicSolution(ControlSignal(vals, norm), value, err, err <= tol, history=history)


def _polish(spec, norm, target, m, o, vals):
    """SLSQP on the epigraph form ``min s`` with ``||u_j|| <= s`` and the end-point constraint."""
    r = vals.shape[1]
    s0 = float(np.max(norm(vals)))
    x0 = np.concatenate([vals.ravel(), [s0]])
    cons = [{"type": "eq",
             "fun": lambda x: endpoint(spec, x[:-1].reshape(m, r), o) - target,
             "jac": lambda x: np.concatenate([EndpointJacobian(_closed_jacobian(spec, x[:-1].reshape(m, r), o)[1]).matrix,
                                              np.zeros((spec.dim, 1))], axis=1)}]
    if norm.polyhedral:
        A = norm.facets(r)
        K = len(A)
        G = np.zeros((m * K, m * r + 1))
        for j in range(m):
            G[j * K:(j + 1) * K, j * r:(j + 1) * r] = -A
        G[:, -1] = 1.0
        cons.append({"type": "ineq", "fun": lambda x: G @ x, "jac": lambda x: G})
    else:
        def ineq(x):
            u = x[:-1].reshape(m, r)
            return x[-1] ** 2 - np.sum(u * u, -1)

        def ineq_jac(x):
            u = x[:-1].reshape(m, r)
            J = np.zeros((m, m * r + 1))
            for j in range(m):
                J[j, j * r:(j + 1) * r] = -2 * u[j]
            J[:, -1] = 2 * x[-1]
            return J

        cons.append({"type": "ineq", "fun": ineq, "jac": ineq_jac})
    c = np.zeros(m * r + 1)
    c[-1] = 1.0
    res = minimize(lambda x: x[-1], x0, jac=lambda x: c, constraints=cons, method="SLSQP",
                   options={"maxiter": 300, "ftol": 1e-14})
    if np.all(np.isfinite(res.x)):
        return res.x[:-1].reshape(m, r)
    return vals


def geodesic_solve(spec: GradedAlgebra, v1_norm="euclidean", target=None, m: int = 32,
                   restarts: int = 20, seed: int = 0, o=None, power: float = 8.0,
                   outer: int = 8, tol: float = 1e-9, workers: int = 1) -> GeodesicSolution:
    """Feasible control of small L-infinity energy reaching ``target``.

    Restart 0 starts from the constant control along the first-layer part
    of ``target``; others start from random controls.  The best converged
    solution by ``(value, restart)`` is returned, which is an upper bound
    for the distance.
    """
    norm = V1Norm.parse(v1_norm)
    target = np.asarray(target, dtype=float)
    r = len(spec.first_layer)
    base = np.zeros(spec.dim) if o is None else np.asarray(o, float)
    delta = target - base if spec.is_abelian else bch_product(spec, -base, target)
    straight = np.tile(delta[spec.first_layer], (m, 1))
    # homogeneous size of the target; sets the restart spread and the first
    # penalty weight so that collapsing to the zero control never pays off
    scale = max(float(box_quasi_norm_raw(spec, delta)), 1e-12)
    mu0 = 10.0 * scale / max(float(delta @ delta), 1e-24)

    def start(k):
        if k == 0:
            return straight + 1e-3 * np.random.default_rng([seed, 0]).normal(size=(m, r))
        rng = np.random.default_rng([seed, k])
        return straight + scale * rng.normal(size=(m, r))

    sols = map_items(lambda k: _solve_one(spec, norm, target, m, o, start(k), power, outer, tol, mu0),
                     list(range(max(1, restarts))), workers)
    for k, s in enumerate(sols):
        s.restart = k
    ok = [s for s in sols if s.converged]
    pool = ok if ok else sols
    key = (lambda s: (s.value, s.restart)) if ok else (lambda s: (s.endpoint_error, s.value, s.restart))
    return min(pool, key=key)


# ---------------------------------------------------------------------------
# Heisenberg geodesic family and d0^2 probe


def heisenberg_arc_endpoint(phi, theta=0.0) -> np.ndarray:
    """End point of the unit-length circular arc with turning angle ``phi`` from 0."""
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < 1e-8
    ph = np.where(small, 1.0, phi)
    chord = np.where(small, 1.0, 2 * np.sin(ph / 2) / ph)
    z = np.where(small, phi / 12.0, (ph - np.sin(ph)) / (2 * ph**2))
    a = theta + phi / 2
    return np.stack([chord * np.cos(a), chord * np.sin(a), z], axis=-1)


def heisenberg_circle_control(m: int, z_sign: float = 1.0) -> ControlSignal:
    """Polygonal approximation of the unit-length circle (encloses ``~1/(4 pi)``)."""
    t = (np.arange(m) + 0.5) / m
    a = 2 * np.pi * t * np.sign(z_sign)
    return ControlSignal(np.column_stack([np.cos(a), np.sin(a)]))


def d0_quotients(gauge, points_fn, radii, n_pairs: int = 2000, seed: int = 0, power: float = 2.0,
                 dim: int = 3) -> list[dict]:
    """Largest ``|N(x)^power - N(y)^power| / |x - y|`` for pairs in Euclidean balls of the given radii."""
    out = []
    for k, rad in enumerate(radii):
        rng = np.random.default_rng([seed, k])
        x = points_fn(rng, n_pairs, rad) if points_fn else _ball_points(rng, n_pairs, rad, dim)
        y = points_fn(rng, n_pairs, rad) if points_fn else _ball_points(rng, n_pairs, rad, dim)
        d = np.linalg.norm(x - y, axis=1)
        q = np.abs(gauge(x) ** power - gauge(y) ** power) / np.where(d > 0, d, np.inf)
        out.append({"radius": float(rad), "max_quotient": float(q.max())})
    return out


def _ball_points(rng, size, rad, dim):
    d = unit_vectors(rng, size, dim)
    return d * (rad * rng.uniform(0, 1, size) ** (1 / dim))[:, None]


def d0_squared_lipschitz_probe(spec: GradedAlgebra, gauge, radii=(0.5, 0.25, 0.125),
                               n_pairs: int = 2000, seed: int = 0, growth: float = 2.0) -> dict:
    """``d0^2`` difference quotients over shrinking balls, with ``d0`` along the center as contrast."""
    if spec.step > 2:
        raise ValueError("the probe applies to step-2 groups")
    rows = d0_quotients(gauge, None, radii, n_pairs, seed, 2.0, spec.dim)
    top = spec.top_layer
    contrast = []
    for rad in radii:
        z = np.zeros(spec.dim)
        z[top[0]] = rad
        contrast.append({"radius": float(rad), "quotient": float(gauge(z) / rad)})
    qs = [r["max_quotient"] for r in rows]
    bounded = all(q <= growth * qs[0] for q in qs)
    cq = [c["quotient"] for c in contrast]
    return {"d0_squared": rows, "bounded": bool(bounded), "d0_center": contrast,
            "d0_center_growing": bool(all(b > a for a, b in zip(cq, cq[1:])))}
