"""Reductions: general 2-query code -> simple code, c-bounded -> 2-bounded."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CodeConfig, boundedness, pair_lengths, simple_alpha, verify
from .errors import (
    EmptyCodeError,
    ParameterError,
    PreconditionError,
    UnsupportedQueryCountError,
)

log = logging.getLogger(__name__)


@dataclass
class ReductionTrace:
    k: int
    alpha_in: float
    delta_in: float
    n_in: int
    pairs_in: int
    pairs_removed_step1: int
    zero_points_discarded: int
    pairs_lost_to_zero_points: int
    sign_choices: list[int]
    alpha_guaranteed: float
    alpha_out: float
    delta_out: float
    n_out: int
    delta_lower_bound: float
    corollary_hypothesis_ok: bool
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["sign_choices"] = list(self.sign_choices)
        out["warnings"] = list(self.warnings)
        return out


def _require_pairs(code: CodeConfig):
    if code.q != 2:
        raise UnsupportedQueryCountError(f"reductions are defined for q=2 only, got q={code.q}")


def heavy_coordinates(points: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask ``(n, d)``: coordinate is among the point's k-1 largest magnitudes.

    Ranks by (|entry| descending, coordinate ascending), so exactly
    ``min(k-1, d)`` coordinates per point are heavy.
    """
    n, d = points.shape
    # stable sort on -|x| keeps ascending coordinate order among ties
    order = np.argsort(-np.abs(points), axis=1, kind="stable")
    mask = np.zeros((n, d), dtype=bool)
    top = order[:, : max(0, min(k - 1, d))]
    mask[np.arange(n)[:, None], top] = True
    return mask


def remove_heavy_pairs(code: CodeConfig, k: int) -> CodeConfig:
    """Drop each pair of M_i in which coordinate i is heavy for either endpoint."""
    _require_pairs(code)
    if k < 2:
        raise ParameterError(f"k must be at least 2, got {k}")
    heavy = heavy_coordinates(code.points, k)
    kept = {
        m.direction: [t for t in m.tuples if not (heavy[t[0], m.direction] or heavy[t[1], m.direction])]
        for m in code.matchings
    }
    return code.with_matchings(kept)


def default_k(alpha: float) -> int:
    """ceil(2 / alpha^2), the choice that yields alpha' >= alpha / sqrt(2)."""
    return math.ceil(2.0 / alpha**2)


def reduce_to_simple(code: CodeConfig, k: int | None = None, alpha: float | None = None):
    """Turn a 2-query code into a simple code with at most twice as many points.

    Steps: heavy-pair removal, normalization with zero-point discard,
    symmetrization ``V -> V u (-V)``, and per-pair sign orientation.  The
    output is simple at ``sqrt(alpha^2 - 1/k)`` with density at least
    ``delta - k/d``.  ``alpha`` defaults to the code's achieved alpha.

    Returns ``(simple_code, trace)``.
    """
    _require_pairs(code)
    report = verify(code, 0.0 if alpha is None else alpha)
    if alpha is None:
        alpha = report.achieved_alpha
    elif report.achieved_alpha < alpha:
        raise PreconditionError(
            f"code verifies only at alpha={report.achieved_alpha:.6g} < requested {alpha:.6g}"
        )
    if alpha <= 0:
        raise ParameterError("reduction needs alpha > 0")
    if k is None:
        k = default_k(alpha)
    if k * alpha**2 <= 1:
        raise ParameterError(f"need k > 1/alpha^2 = {1 / alpha**2:.6g}, got k={k}")

    delta = report.density
    warnings = []
    corollary_ok = delta > 0 and code.d >= 6.0 / (alpha**2 * delta)
    if not corollary_ok:
        msg = f"d={code.d} < 6/(alpha^2 delta); the alpha/sqrt(2), delta/2 guarantees may not apply"
        warnings.append(msg)
        log.warning(msg)

    # step 1
    light = remove_heavy_pairs(code, k)
    removed = code.total_matched - light.total_matched

    # step 2: normalize, discard zero points and reindex
    norms = np.linalg.norm(code.points, axis=1)
    alive = norms > 0
    new_index = np.cumsum(alive) - 1
    unit = code.points[alive] / norms[alive, None]
    n0 = unit.shape[0]
    lost_to_zero = 0
    survivors: list[tuple[int, int, int]] = []
    for i, t in light.tuples():
        if alive[t[0]] and alive[t[1]]:
            survivors.append((i, int(new_index[t[0]]), int(new_index[t[1]])))
        else:
            lost_to_zero += 1
    if n0 == 0:
        raise EmptyCodeError("every point is the zero vector")

    # step 3: symmetrize and orient signs; point a + n0 is -v_a
    points = np.vstack([unit, -unit])
    matchings: dict[int, list[tuple[int, int]]] = {i: [] for i in range(code.d)}
    signs = []
    for i, a, b in survivors:
        va, vb = unit[a], unit[b]
        minus, plus = va - vb, va + vb
        w_minus = abs(minus[i]) / np.linalg.norm(minus) if np.any(minus) else 0.0
        w_plus = abs(plus[i]) / np.linalg.norm(plus) if np.any(plus) else 0.0
        if w_minus >= w_plus:
            signs.append(1)
            matchings[i] += [(a, b), (a + n0, b + n0)]
        else:
            signs.append(-1)
            matchings[i] += [(a, b + n0), (a + n0, b)]

    out = CodeConfig.build(points, 2, matchings)
    trace = ReductionTrace(
        k=k,
        alpha_in=float(alpha),
        delta_in=delta,
        n_in=code.n,
        pairs_in=code.total_matched,
        pairs_removed_step1=removed,
        zero_points_discarded=int(code.n - n0),
        pairs_lost_to_zero_points=lost_to_zero,
        sign_choices=signs,
        alpha_guaranteed=math.sqrt(alpha**2 - 1.0 / k),
        alpha_out=simple_alpha(out),
        delta_out=out.total_matched / (out.d * out.n),
        n_out=out.n,
        delta_lower_bound=delta - k / code.d,
        corollary_hypothesis_ok=corollary_ok,
        warnings=warnings,
    )
    return out, trace


def dyadic_buckets(lengths: np.ndarray) -> tuple[np.ndarray, int]:
    """Bucket index of each (already >= 1) length in [2^j, 2^{j+1}), last bucket closed.

    Returns ``(bucket_of_each, number_of_buckets)`` with
    ``number_of_buckets = max(1, ceil(log2 c))``, ``c = max(lengths)``.
    """
    c = float(lengths.max())
    count = max(1, math.ceil(math.log2(c)))
    j = np.floor(np.log2(lengths)).astype(int)
    # exact powers of two are bucketed by the floor; fix log2 rounding at the edges
    j = np.where(2.0 ** (j + 1) <= lengths, j + 1, j)
    j = np.where(2.0**j > lengths, j - 1, j)
    return np.clip(j, 0, count - 1), count


def bucket_to_2bounded(code: CodeConfig) -> CodeConfig:
    """Keep the most populous dyadic length class and rescale it into [1, 2].

    Lengths are first divided by the shortest matched length, so the input
    is ``c``-bounded with ``c = max/min``.  Ties between classes go to the
    shorter class.  Density drops by at most ``ceil(log2 c)``.
    """
    _require_pairs(code)
    if code.total_matched == 0:
        raise EmptyCodeError("no matched pairs to bucket")
    lo, _ = boundedness(code)
    rel = pair_lengths(code) / lo
    bucket, count = dyadic_buckets(rel)
    best = int(np.argmax(np.bincount(bucket, minlength=count)))
    keep = iter(bucket == best)
    kept = {m.direction: [t for t in m.tuples if next(keep)] for m in code.matchings}
    scale = 1.0 / (lo * 2.0**best)
    return CodeConfig.build(code.points * scale, 2, kept)
