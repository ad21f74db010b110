"""Reference and randomized code generators."""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from ._rng import stream
from .core import CodeConfig, tuple_span_weights
from .errors import DomainError, ParameterError

MAX_HYPERCUBE_DIM = 24

# spawn-key tags, so streams of different generators never coincide
_POINTS = 0
_NOISE = 1

# candidate tuples whose span weights are computed in a single batch
_PRECOMPUTE_LIMIT = 250_000


def hypercube(d: int) -> CodeConfig:
    """{0,1}^d with M_i = all pairs differing exactly in coordinate i.

    Point ``j`` has coordinate ``i`` equal to bit ``i`` of ``j``.
    """
    if not 1 <= d <= MAX_HYPERCUBE_DIM:
        raise ParameterError(f"hypercube dimension must lie in [1, {MAX_HYPERCUBE_DIM}], got {d}")
    n = 1 << d
    idx = np.arange(n)
    points = ((idx[:, None] >> np.arange(d)[None, :]) & 1).astype(np.float64)
    matchings = {}
    for i in range(d):
        low = idx[(idx >> i) & 1 == 0]
        matchings[i] = [(int(j), int(j | (1 << i))) for j in low]
    return CodeConfig.build(points, 2, matchings)


def perturbed_hypercube(d: int, sigma: float, seed: int = 0) -> CodeConfig:
    if sigma < 0:
        raise DomainError(f"sigma must be nonnegative, got {sigma}")
    cube = hypercube(d)
    if sigma == 0:
        return cube
    rng = stream(seed, _NOISE)
    noise = rng.normal(0.0, sigma, size=cube.points.shape)
    return cube.with_points(cube.points + noise)


def basis_code(d: int) -> CodeConfig:
    """The 1-query code V = {e_1, ..., e_d}, M_i = {{i}}."""
    if d < 1:
        raise ParameterError(f"d must be positive, got {d}")
    return CodeConfig.build(np.eye(d), 1, {i: [(i,)] for i in range(d)})


def random_code(d: int, n: int, q: int, alpha_target: float, seed: int = 0) -> CodeConfig:
    """Uniform points on the unit sphere, greedily matched per direction.

    For each direction, candidate tuples are scanned in lexicographic order
    and kept when disjoint from the tuples already kept and their span
    weight reaches ``alpha_target``.
    """
    if not n >= q >= 1:
        raise ParameterError(f"need n >= q >= 1, got n={n}, q={q}")
    rng = stream(seed, _POINTS)
    pts = rng.standard_normal((n, d))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    code = CodeConfig.build(pts, q)
    if alpha_target > 1.0:
        return code

    cache: dict[tuple[int, ...], np.ndarray] = {}
    if comb(n, q) <= _PRECOMPUTE_LIMIT:
        candidates = list(combinations(range(n), q))
        cache.update(zip(candidates, tuple_span_weights(code, candidates)))

    def weights_of(t):
        if t not in cache:
            cache[t] = tuple_span_weights(code, [t])[0]
        return cache[t]

    return code.with_matchings(_greedy_matchings(n, q, d, weights_of, alpha_target))


def random_simple_code(d: int, n: int, alpha_target: float, seed: int = 0) -> CodeConfig:
    """Like :func:`random_code` with q=2, but pairs are scored by the weight of
    their difference vector, so the result is simple at ``alpha_target``."""
    if n < 2:
        raise ParameterError(f"need n >= 2, got n={n}")
    rng = stream(seed, _POINTS)
    pts = rng.standard_normal((n, d))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    diff = pts[None, :, :] - pts[:, None, :]
    norms = np.linalg.norm(diff, axis=2)
    w = np.divide(np.abs(diff), norms[..., None], out=np.zeros_like(diff), where=norms[..., None] > 0)
    matchings = _greedy_matchings(n, 2, d, lambda t: w[t[0], t[1]], alpha_target)
    return CodeConfig.build(pts, 2, matchings)


def _greedy_matchings(n, q, d, weights_of, alpha_target):
    matchings = {}
    if alpha_target > 1.0:
        return matchings
    for i in range(d):
        used: set[int] = set()
        chosen = []
        for t in combinations(range(n), q):
            if n - len(used) < q:
                break
            if used.intersection(t):
                continue
            if weights_of(t)[i] >= alpha_target:
                chosen.append(t)
                used.update(t)
        matchings[i] = chosen
    return matchings
