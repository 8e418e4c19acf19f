"""Graded nilpotent Lie algebras given by structure constants.

Points of the group are stored in exponential coordinates of the first kind,
so a group element *is* its algebra vector and the inverse is negation.  All
operations broadcast over leading axes: a batch of points has shape
``(..., n)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

JACOBI_TOL = 1e-12
RANK_TOL = 1e-8
# Products are exact when nested brackets of more than this many entries vanish.
MAX_BCH_ORDER = 4


class AlgebraError(ValueError):
    """Raised for malformed algebra definitions or incompatible inputs."""


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, str):
        return Fraction(w)
    if isinstance(w, (int, np.integer)):
        return Fraction(int(w))
    return Fraction(float(w)).limit_denominator(10**6)


@dataclass(frozen=True)
class GradedAlgebra:
    """A graded nilpotent Lie algebra ``[e_i, e_j] = sum_k c[i,j,k] e_k``.

    ``brackets`` lists only the entries with ``i < j``; the antisymmetric
    partner is filled in automatically.  ``names`` are cosmetic.
    """

    weights: tuple[Fraction, ...]
    brackets: tuple[tuple[int, int, int, float], ...] = ()
    names: tuple[str, ...] = ()
    structure: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        weights = tuple(_as_fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        n = len(weights)
        if n == 0:
            raise AlgebraError("algebra must have positive dimension")
        if any(w <= 0 for w in weights):
            raise AlgebraError("weights must be positive")
        c = np.zeros((n, n, n))
        for i, j, k, val in self.brackets:
            if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
                raise AlgebraError(f"bracket index out of range: {(i, j, k)}")
            if i == j:
                raise AlgebraError(f"[e_{i}, e_{i}] must vanish")
            c[i, j, k] += val
            c[j, i, k] -= val
        c.setflags(write=False)
        object.__setattr__(self, "structure", c)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"e{k}" for k in range(n)))
        elif len(self.names) != n:
            raise AlgebraError("names must match the dimension")

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    @property
    def step(self) -> Fraction:
        """Maximal degree of the grading."""
        return max(self.weights)

    @property
    def layers(self) -> dict[Fraction, np.ndarray]:
        out: dict[Fraction, list[int]] = {}
        for k, w in enumerate(self.weights):
            out.setdefault(w, []).append(k)
        return {w: np.array(idx) for w, idx in sorted(out.items())}

    def layer_indices(self, weight) -> np.ndarray:
        w = _as_fraction(weight)
        return np.array([k for k, wk in enumerate(self.weights) if wk == w], dtype=int)

    @property
    def first_layer(self) -> np.ndarray:
        return self.layer_indices(1)

    @property
    def top_layer(self) -> np.ndarray:
        return self.layer_indices(self.step)

    @property
    def bch_order(self) -> int:
        """Longest nested bracket that can be nonzero."""
        return int(self.step / min(self.weights))

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.structure)

    def embed_first_layer(self, v) -> np.ndarray:
        """Coordinates of the first-layer vector ``v`` (shape ``(..., r)``)."""
        v = np.asarray(v, dtype=float)
        idx = self.first_layer
        out = np.zeros(v.shape[:-1] + (self.dim,))
        out[..., idx] = v
        return out

    # serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        weights = [int(w) if w.denominator == 1 else str(w) for w in self.weights]
        return {
            "dim": self.dim,
            "weights": weights,
            "brackets": [[int(i), int(j), int(k), float(c)] for i, j, k, c in self.brackets],
            "names": list(self.names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GradedAlgebra":
        allowed = {"dim", "weights", "brackets", "names"}
        unknown = set(data) - allowed
        if unknown:
            raise AlgebraError(f"unknown fields in group definition: {sorted(unknown)}")
        weights = data["weights"]
        if "dim" in data and int(data["dim"]) != len(weights):
            raise AlgebraError("dim does not match the number of weights")
        brackets = []
        for entry in data.get("brackets", []):
            i, j, k, c = entry
            i, j, k = int(i), int(j), int(k)
            if i > j:
                i, j, c = j, i, -c
            brackets.append((i, j, k, float(c)))
        return cls(tuple(weights), tuple(brackets), tuple(data.get("names", ())))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GradedAlgebra":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# built-in algebras


def abelian_plane(w1=1, w2=1) -> GradedAlgebra:
    return GradedAlgebra((w1, w2), (), ("x", "y"))


def heisenberg() -> GradedAlgebra:
    return GradedAlgebra((1, 1, 2), ((0, 1, 2, 1.0),), ("X", "Y", "Z"))


def engel() -> GradedAlgebra:
    return GradedAlgebra(
        (1, 1, 2, 3), ((0, 1, 2, 1.0), (0, 2, 3, 1.0)), ("X1", "X2", "X3", "X4")
    )


def product_with_line(spec: GradedAlgebra, name: str = "S") -> GradedAlgebra:
    """Append a central weight-one generator."""
    return GradedAlgebra(spec.weights + (Fraction(1),), spec.brackets, spec.names + (name,))


def heisenberg_times_line() -> GradedAlgebra:
    """Heisenberg algebra with a central weight-one generator S (coords X, Y, Z, S)."""
    return product_with_line(heisenberg())


BUILTINS = {
    "abelian": lambda: abelian_plane(1, 1),
    "abelian11": lambda: abelian_plane(1, 1),
    "plane12": lambda: abelian_plane(1, 2),
    "plane22": lambda: abelian_plane(2, 2),
    "heisenberg": heisenberg,
    "heisenberg_times_line": heisenberg_times_line,
    "engel": engel,
    "engel_times_line": lambda: product_with_line(engel()),
}


def builtin(name: str) -> GradedAlgebra:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise AlgebraError(f"unknown built-in group {name!r}; choose from {sorted(BUILTINS)}") from None


# ---------------------------------------------------------------------------
# validation


def validate_algebra(spec: GradedAlgebra, tol: float = JACOBI_TOL) -> list[dict]:
    """Return the list of violated identities (empty when the algebra is valid)."""
    c = spec.structure
    w = spec.weights
    report: list[dict] = []

    asym = c + np.transpose(c, (1, 0, 2))
    for i, j, k in zip(*np.nonzero(np.abs(asym) > tol)):
        report.append({"identity": "antisymmetry", "indices": [int(i), int(j), int(k)],
                       "value": float(asym[i, j, k])})

    for i, j, k in zip(*np.nonzero(c)):
        if w[k] != w[i] + w[j] and i < j:
            report.append({
                "identity": "grading",
                "indices": [int(i), int(j), int(k)],
                "value": float(c[i, j, k]),
                "detail": f"w[{k}]={w[k]} != w[{i}]+w[{j}]={w[i] + w[j]}",
            })

    # [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]
    # [a,[b,x]]_m = sum_l c[b,x,l] c[a,l,m]
    nested = np.einsum("jkl,ilm->ijkm", c, c)
    jac = nested + np.transpose(nested, (1, 2, 0, 3)) + np.transpose(nested, (2, 0, 1, 3))
    for i, j, k in zip(*np.nonzero(np.max(np.abs(jac), axis=-1) > tol)):
        if i < j < k:
            report.append({"identity": "jacobi", "indices": [int(i), int(j), int(k)],
                           "value": float(np.max(np.abs(jac[i, j, k])))})
    return report


# ---------------------------------------------------------------------------
# group operations


def _check_dim(spec: GradedAlgebra, *arrays: np.ndarray) -> None:
    for a in arrays:
        if a.shape[-1] != spec.dim:
            raise AlgebraError(f"expected points of dimension {spec.dim}, got shape {a.shape}")


def bracket(spec: GradedAlgebra, p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_dim(spec, p, q)
    return np.einsum("...i,...j,ijk->...k", p, q, spec.structure)


def ad_matrix(spec: GradedAlgebra, p) -> np.ndarray:
    """Matrix of ``ad_p = [p, .]``; shape ``(..., n, n)`` acting on columns."""
    p = np.asarray(p, dtype=float)
    _check_dim(spec, p)
    # (ad_p)_{k j} = sum_i p_i c[i, j, k]
    return np.einsum("...i,ijk->...kj", p, spec.structure)


def _require_order(spec: GradedAlgebra) -> None:
    if spec.bch_order > MAX_BCH_ORDER:
        raise AlgebraError(
            f"nested brackets of length {spec.bch_order} may be nonzero; "
            f"products are implemented through order {MAX_BCH_ORDER}"
        )


def bch_product(spec: GradedAlgebra, p, q) -> np.ndarray:
    """Group product in exponential coordinates (truncated Dynkin series)."""
    _require_order(spec)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_dim(spec, p, q)
    if spec.is_abelian:
        return p + q
    order = spec.bch_order
    pq = bracket(spec, p, q)
    out = p + q + 0.5 * pq
    if order >= 3:
        p_pq = bracket(spec, p, pq)
        q_pq = bracket(spec, q, pq)
        out = out + (p_pq - q_pq) / 12.0
        if order >= 4:
            out = out - bracket(spec, q, p_pq) / 24.0
    return out


def product(spec: GradedAlgebra, *points) -> np.ndarray:
    """Left-to-right product of several points."""
    if not points:
        raise AlgebraError("product of no points")
    out = np.asarray(points[0], dtype=float)
    for p in points[1:]:
        out = bch_product(spec, out, p)
    return out


def inverse(spec: GradedAlgebra, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    _check_dim(spec, p)
    return -p


def dilate(spec: GradedAlgebra, lam, p) -> np.ndarray:
    """``delta_lam(p)``; ``lam`` may be an array broadcasting against ``p[..., 0]``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise AlgebraError("dilation factor must be positive")
    p = np.asarray(p, dtype=float)
    _check_dim(spec, p)
    return p * lam[..., None] ** spec.weight_array


def delta_bar(spec: GradedAlgebra, p) -> np.ndarray:
    """Generator of the dilations at ``p``: coordinate k times its weight."""
    p = np.asarray(p, dtype=float)
    _check_dim(spec, p)
    return p * spec.weight_array


def translation_jacobians(spec: GradedAlgebra, p) -> tuple[np.ndarray, np.ndarray]:
    """Differentials at the identity of ``q -> p q`` and ``q -> q p``.

    With ``A = ad_p`` these are ``I + A/2 + A^2/12`` and ``I - A/2 + A^2/12``;
    the next term of the series is a multiple of ``A^4``, which vanishes
    whenever the product itself is exact.
    """
    _require_order(spec)
    a = ad_matrix(spec, p)
    eye = np.broadcast_to(np.eye(spec.dim), a.shape)
    a2 = a @ a
    return eye + 0.5 * a + a2 / 12.0, eye - 0.5 * a + a2 / 12.0


def left_jacobian_inverse(spec: GradedAlgebra, p) -> np.ndarray:
    """Inverse of ``dL_p`` at the identity: ``(1 - exp(-A)) / A`` as a polynomial."""
    a = ad_matrix(spec, p)
    eye = np.broadcast_to(np.eye(spec.dim), a.shape)
    a2 = a @ a
    return eye - 0.5 * a + a2 / 6.0 - (a2 @ a) / 24.0


def adjoint_exp(spec: GradedAlgebra, p) -> np.ndarray:
    """``Ad_exp(p) = exp(ad_p)`` (finite sum, ad is nilpotent)."""
    a = ad_matrix(spec, p)
    out = np.broadcast_to(np.eye(spec.dim), a.shape).copy()
    term = out.copy()
    for k in range(1, spec.dim + 1):
        term = term @ a / k
        if not np.any(term):
            break
        out = out + term
    return out


# ---------------------------------------------------------------------------
# algebraic conditions


def condition_14_matrix(spec: GradedAlgebra, p) -> np.ndarray:
    """Columns ``dL_p(V_1)``, ``dR_p(V_1)`` and ``delta_bar(p)``."""
    p = np.asarray(p, dtype=float)
    dl, dr = translation_jacobians(spec, p)
    v1 = spec.first_layer
    return np.concatenate([dl[..., :, v1], dr[..., :, v1], delta_bar(spec, p)[..., :, None]], axis=-1)


def box_quasi_norm_raw(spec: GradedAlgebra, p) -> np.ndarray:
    # duplicated from norms to keep this module free of upward imports
    p = np.asarray(p, dtype=float)
    out = np.zeros(p.shape[:-1])
    for w, idx in spec.layers.items():
        out = np.maximum(out, np.linalg.norm(p[..., idx], axis=-1) ** (1.0 / float(w)))
    return out


def condition_14_check(spec: GradedAlgebra, p, tol: float = RANK_TOL, normalize: bool = False) -> dict:
    """Rank test of ``dL_p(V_1) + dR_p(V_1) + Span{delta_bar(p)} = T_pG``.

    ``smallest_singular_value`` is the n-th singular value divided by the
    largest one.  With ``normalize=True`` the point is first dilated onto the
    unit sphere of the box quasi-norm; the condition is dilation invariant,
    the conditioning number is not.
    """
    p = np.asarray(p, dtype=float)
    if normalize:
        eta = box_quasi_norm_raw(spec, p)
        safe = np.where(eta > 0, eta, 1.0)
        p = dilate(spec, 1.0 / safe, p)
    m = condition_14_matrix(spec, p)
    n = spec.dim
    s = np.linalg.svd(m, compute_uv=False)
    if s.shape[-1] < n:
        ratio = np.zeros(s.shape[:-1])
    else:
        ratio = s[..., n - 1] / np.where(s[..., 0] > 0, s[..., 0], 1.0)
    holds = ratio > tol
    if np.ndim(ratio) == 0:
        return {"holds": bool(holds), "smallest_singular_value": float(ratio)}
    return {"holds": holds, "smallest_singular_value": ratio}


def _rank(columns: np.ndarray, tol: float) -> int:
    if columns.size == 0:
        return 0
    s = np.linalg.svd(columns, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def first_layer_necessary_check(spec: GradedAlgebra, x, tol: float = RANK_TOL) -> bool:
    """Whether ``V_1 + [X, V_1]`` is the whole algebra, for ``X`` in ``V_1``.

    ``x`` holds first-layer coordinates (length ``dim V_1``).
    """
    x = spec.embed_first_layer(x)
    v1 = spec.first_layer
    eye = np.eye(spec.dim)
    ad = ad_matrix(spec, x)
    cols = np.concatenate([eye[:, v1], ad[:, v1]], axis=1)
    return _rank(cols, tol) == spec.dim


def top_layer_necessary_check(spec: GradedAlgebra, z, tol: float = RANK_TOL) -> bool:
    """Whether ``V_1 + Span{Z}`` is the whole algebra, ``z`` in top-layer coordinates."""
    z = np.asarray(z, dtype=float)
    top = spec.top_layer
    zvec = np.zeros(spec.dim)
    zvec[top] = z
    eye = np.eye(spec.dim)
    cols = np.concatenate([eye[:, spec.first_layer], zvec[:, None]], axis=1)
    return _rank(cols, tol) == spec.dim


def random_points(spec: GradedAlgebra, rng: np.random.Generator, size: int, scale: float = 1.0) -> np.ndarray:
    return rng.normal(scale=scale, size=(size, spec.dim))


def layer_norms(spec: GradedAlgebra, p) -> Iterable[tuple[Fraction, np.ndarray]]:
    p = np.asarray(p, dtype=float)
    for w, idx in spec.layers.items():
        yield w, np.linalg.norm(p[..., idx], axis=-1)


__all__ = [
    "AlgebraError", "GradedAlgebra", "abelian_plane", "heisenberg", "engel",
    "heisenberg_times_line", "product_with_line", "builtin", "BUILTINS",
    "validate_algebra", "bracket", "ad_matrix", "bch_product", "product", "inverse",
    "dilate", "delta_bar", "translation_jacobians", "left_jacobian_inverse", "adjoint_exp",
    "condition_14_matrix", "condition_14_check", "first_layer_necessary_check",
    "top_layer_necessary_check",
]
