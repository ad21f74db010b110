"""Code configurations and exact verification of the approximate-LDC property.

A code is a multiset of ``n`` points in R^d together with, for every
direction ``i``, a matching ``M_i`` of disjoint ``q``-tuples of point
indices.  All indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DegeneratePairError,
    DomainError,
    EmptyCodeError,
    InvalidCodeError,
    UnsupportedQueryCountError,
)

# relative threshold for the rank-revealing orthogonalization of a span
SPAN_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class DirectionMatching:
    direction: int
    tuples: tuple[tuple[int, ...], ...] = ()

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.tuples)


@dataclass(eq=False)
class CodeConfig:
    """Point multiset plus one (possibly empty) matching per direction.

    ``points`` has shape ``(n, d)``.  ``matchings[i]`` is the matching for
    direction ``i``; the sequence always has length ``d``.
    """

    d: int
    q: int
    points: np.ndarray
    matchings: tuple[DirectionMatching, ...] = field(default=())

    def __post_init__(self):
        if self.d < 1 or self.q < 1:
            raise InvalidCodeError(f"need d >= 1 and q >= 1, got d={self.d}, q={self.q}")
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != self.d:
            raise InvalidCodeError(
                f"points must have shape (n >= 1, {self.d}), got {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise InvalidCodeError("points contain NaN or infinite entries")
        pts.setflags(write=False)
        self.points = pts

        by_dir: dict[int, DirectionMatching] = {}
        for m in self.matchings:
            if not 0 <= m.direction < self.d:
                raise InvalidCodeError(f"matching direction {m.direction} outside [0, {self.d})")
            if m.direction in by_dir:
                raise InvalidCodeError(f"two matchings given for direction {m.direction}")
            by_dir[m.direction] = _checked_matching(m, self.q, self.n)
        self.matchings = tuple(
            by_dir.get(i, DirectionMatching(i)) for i in range(self.d)
        )

    @classmethod
    def build(cls, points, q: int, matchings: Mapping[int, Iterable[Sequence[int]]] | None = None):
        """Convenience constructor from a ``{direction: [tuple, ...]}`` mapping."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2:
            raise InvalidCodeError(f"points must be a 2-d array, got shape {pts.shape}")
        ms = [
            DirectionMatching(int(i), tuple(tuple(int(j) for j in t) for t in ts))
            for i, ts in (matchings or {}).items()
        ]
        return cls(pts.shape[1], q, pts, tuple(ms))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def total_matched(self) -> int:
        return sum(len(m) for m in self.matchings)

    def tuples(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        """Yield ``(direction, tuple)`` over every matched tuple, by direction."""
        for m in self.matchings:
            for t in m.tuples:
                yield m.direction, t

    def with_points(self, points) -> "CodeConfig":
        return CodeConfig(self.d, self.q, points, self.matchings)

    def with_matchings(self, matchings: Mapping[int, Iterable[Sequence[int]]]) -> "CodeConfig":
        return CodeConfig.build(self.points, self.q, matchings)

    def matching_dict(self) -> dict[int, list[tuple[int, ...]]]:
        return {m.direction: list(m.tuples) for m in self.matchings}

    def scaled(self, factor: float) -> "CodeConfig":
        return self.with_points(self.points * factor)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CodeConfig):
            return NotImplemented
        return (
            self.d == other.d
            and self.q == other.q
            and self.points.shape == other.points.shape
            and self.points.tobytes() == other.points.tobytes()
            and self.matchings == other.matchings
        )

    def __repr__(self) -> str:
        return f"CodeConfig(d={self.d}, q={self.q}, n={self.n}, matched={self.total_matched})"


def _checked_matching(m: DirectionMatching, q: int, n: int) -> DirectionMatching:
    seen: set[int] = set()
    out = []
    for t in m.tuples:
        t = tuple(sorted(int(j) for j in t))
        if len(t) != q or len(set(t)) != q:
            raise InvalidCodeError(
                f"direction {m.direction}: tuple {t} must hold {q} distinct indices"
            )
        if t[0] < 0 or t[-1] >= n:
            raise InvalidCodeError(f"direction {m.direction}: tuple {t} has index outside [0, {n})")
        if seen.intersection(t):
            raise InvalidCodeError(f"matching not disjoint in direction {m.direction}: tuple {t}")
        seen.update(t)
        out.append(t)
    return DirectionMatching(m.direction, tuple(out))


@dataclass
class VerificationReport:
    achieved_alpha: float
    density: float
    simple: bool
    length_min: float | None
    length_max: float | None
    per_tuple: list[tuple[int, tuple[int, ...], float]]
    below_claim: list[tuple[int, tuple[int, ...], float]]
    alpha_claim: float
    degenerate: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.achieved_alpha >= self.alpha_claim

    def to_dict(self) -> dict:
        return {
            "alpha_claim": self.alpha_claim,
            "achieved_alpha": self.achieved_alpha,
            "density": self.density,
            "simple": self.simple,
            "length_min": self.length_min,
            "length_max": self.length_max,
            "tuples_checked": len(self.per_tuple),
            "below_claim": [
                {"direction": i, "tuple": list(t), "span_weight": w} for i, t, w in self.below_claim
            ],
            "degenerate": [{"direction": i, "tuple": list(t)} for i, t in self.degenerate],
            "passed": self.passed,
        }


def weight(u, i: int) -> float:
    """|u_i| / ||u||_2."""
    u = np.asarray(u, dtype=np.float64)
    norm = np.linalg.norm(u)
    if norm == 0.0:
        raise DomainError("weight of the zero vector is undefined")
    return float(abs(u[i]) / norm)


def span_projector(columns: np.ndarray) -> np.ndarray:
    """Orthogonal projector ``(..., d, d)`` onto the span of the columns of ``(..., d, q)``."""
    a = np.asarray(columns, dtype=np.float64)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    col_norm = np.linalg.norm(a, axis=-2).max(axis=-1, keepdims=True)
    keep = (s > SPAN_RANK_RTOL * col_norm) & (col_norm > 0)
    u = u * keep[..., None, :]
    return u @ np.swapaxes(u, -1, -2)


def projection_norms(columns: np.ndarray) -> np.ndarray:
    """Norm of the projection of every basis vector onto a column span.

    ``columns`` has shape ``(..., d, q)``; the result has shape ``(..., d)``
    and entry ``i`` equals ``max_{u in span} weight_i(u)``.  Spans are
    orthonormalized by SVD, discarding singular values below
    ``SPAN_RANK_RTOL`` times the largest column norm.  An all-zero span
    yields a row of zeros.

    The value is evaluated as ``weight_i(P e_i) = |P_ii| / ||P e_i||``
    rather than ``sqrt(P_ii)``: the weight is stationary at its maximizer,
    so basis rounding errors only enter at second order.
    """
    proj = span_projector(columns)
    diag = np.abs(np.diagonal(proj, axis1=-2, axis2=-1))
    norms = np.linalg.norm(proj, axis=-2)
    out = np.zeros_like(diag)
    np.divide(diag, norms, out=out, where=norms > 0)
    return np.minimum(out, 1.0)


def _tuple_columns(code: CodeConfig, tuples: Sequence[Sequence[int]]) -> np.ndarray:
    idx = np.asarray(tuples, dtype=np.intp).reshape(len(tuples), code.q)
    return np.swapaxes(code.points[idx], -1, -2)


def span_weight(code: CodeConfig, t: Sequence[int], i: int, *, with_flag: bool = False):
    """Largest weight_i over nonzero vectors in the span of the tuple's points.

    Computed in closed form as ``||P e_i||`` where ``P`` projects onto the
    span.  A tuple of zero vectors has weight 0; pass ``with_flag=True`` to
    get ``(weight, degenerate)``.
    """
    cols = _tuple_columns(code, [t])[0]
    degenerate = not np.any(cols)
    w = float(projection_norms(cols)[i])
    return (w, degenerate) if with_flag else w


def tuple_span_weights(code: CodeConfig, tuples: Sequence[Sequence[int]]) -> np.ndarray:
    """Span weights of many tuples in every direction, shape ``(len(tuples), d)``."""
    if len(tuples) == 0:
        return np.zeros((0, code.d))
    return projection_norms(_tuple_columns(code, tuples))


def pair_differences(code: CodeConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Directions, index pairs ``(m, 2)`` and differences ``v_j2 - v_j1`` of all matched pairs."""
    if code.q != 2:
        raise UnsupportedQueryCountError(f"pair operations need q=2, got q={code.q}")
    dirs = np.array([i for i, _ in code.tuples()], dtype=np.intp)
    pairs = np.array([t for _, t in code.tuples()], dtype=np.intp).reshape(-1, 2)
    diffs = code.points[pairs[:, 1]] - code.points[pairs[:, 0]]
    return dirs, pairs, diffs


def simple_weights(code: CodeConfig) -> np.ndarray:
    """weight_dir(v_j2 - v_j1) for every matched pair; 0 for coincident endpoints."""
    dirs, _, diffs = pair_differences(code)
    norms = np.linalg.norm(diffs, axis=1)
    comp = np.abs(diffs[np.arange(len(dirs)), dirs])
    out = np.zeros(len(dirs))
    nz = norms > 0
    out[nz] = comp[nz] / norms[nz]
    return out


def simple_alpha(code: CodeConfig) -> float:
    """Largest alpha at which the code is simple (1.0 when there are no pairs)."""
    w = simple_weights(code)
    return float(w.min()) if len(w) else 1.0


def is_simple(code: CodeConfig, alpha: float) -> bool:
    if code.q != 2:
        raise UnsupportedQueryCountError(f"simplicity is defined for q=2 only, got q={code.q}")
    return bool(np.all(simple_weights(code) >= alpha))


def pair_lengths(code: CodeConfig) -> np.ndarray:
    _, _, diffs = pair_differences(code)
    return np.linalg.norm(diffs, axis=1)


def boundedness(code: CodeConfig) -> tuple[float, float]:
    """Shortest and longest matched-pair distance.

    The code is ``c``-bounded with ``c = max/min`` after scaling by ``1/min``.
    """
    lengths = pair_lengths(code)
    if len(lengths) == 0:
        raise EmptyCodeError("boundedness needs at least one matched pair")
    if np.any(lengths == 0.0):
        raise DegeneratePairError("a matched pair has coincident endpoints")
    return float(lengths.min()), float(lengths.max())


def density(code: CodeConfig) -> float:
    return code.total_matched / (code.d * code.n)


def verify(code: CodeConfig, alpha_claim: float) -> VerificationReport:
    per_tuple = []
    degenerate = []
    for m in code.matchings:
        if not len(m):
            continue
        w = tuple_span_weights(code, m.tuples)[:, m.direction]
        for t, wt in zip(m.tuples, w):
            per_tuple.append((m.direction, t, float(wt)))
            if not np.any(code.points[list(t)]):
                degenerate.append((m.direction, t))
    achieved = min((w for _, _, w in per_tuple), default=1.0)

    simple = False
    lo = hi = None
    if code.q == 2:
        simple = is_simple(code, alpha_claim)
        lengths = pair_lengths(code)
        if len(lengths):
            lo, hi = float(lengths.min()), float(lengths.max())

    return VerificationReport(
        achieved_alpha=float(achieved),
        density=density(code),
        simple=simple,
        length_min=lo,
        length_max=hi,
        per_tuple=per_tuple,
        below_claim=[r for r in per_tuple if r[2] < alpha_claim],
        alpha_claim=float(alpha_claim),
        degenerate=degenerate,
    )
