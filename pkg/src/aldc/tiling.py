"""Randomized grid tilings, edge levels, good edges and the tiled cut.

Edges are bucketed by length into classes ``[(1+eps)^(kt+j), (1+eps)^(kt+j+1))``
(``k`` the level, ``j`` the residue).  Each level ``k`` gets an independent
randomly shifted cube tiling of spacing ``g_k``.  An edge is *good* when
its endpoints land in axis-adjacent cells at its own level and in the same
cell at every higher level; any subset of good edges then admits a cut
that only severs edges of a single direction.

The cube tiling separates ``x`` and ``y`` with probability at most
``sum_i |x_i - y_i| / g <= sqrt(d) ||x - y|| / g``, so every probability
bound here takes the separation constant ``kappa`` as a parameter
(``2 pi`` for the sphere-like tilings of the literature, ``sqrt(d)`` for
cubes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import stream
from .core import CodeConfig, simple_alpha
from .errors import ConfigurationError, DomainError, EmptyCodeError, ParameterError, PreconditionError
from .partition import CodeGraph, Cut, CutCertificate, _recurse, _split


@dataclass(frozen=True)
class Tiling:
    """Cube tiling of spacing ``g`` shifted by ``shift`` in ``[0, g)^d``."""

    g: float
    shift: np.ndarray
    kind: str = "cube"

    def cell(self, x) -> np.ndarray:
        """Integer index of the cell containing each point (last axis = coordinates)."""
        x = np.asarray(x, dtype=np.float64)
        c = np.floor((x - self.shift) / self.g)
        # snap to the cell whose lower corner, as round() computes it, is <= x;
        # this makes round() idempotent despite rounding in the division
        c = np.where(self.g * c + self.shift > x, c - 1, c)
        c = np.where(self.g * (c + 1) + self.shift <= x, c + 1, c)
        return c.astype(np.int64)

    def round(self, x) -> np.ndarray:
        """The lattice point representing the cell that contains ``x``."""
        return self.g * self.cell(x) + self.shift


def cube_tiling(g: float, d: int, seed: int = 0, *, rng=None) -> Tiling:
    if g <= 0:
        raise DomainError(f"grid spacing must be positive, got {g}")
    rng = rng if rng is not None else stream(seed)
    return Tiling(float(g), rng.uniform(0.0, g, size=d))


def cube_kappa(d: int) -> float:
    return math.sqrt(d)


@dataclass
class LevelSchedule:
    eps: float
    t: int
    residue: int
    k_min: int
    k_max: int
    alpha: float
    kept_edges: int = 0
    input_edges: int = 0
    residue_counts: list[int] = field(default_factory=list)

    def grid(self, k: int) -> float:
        """g_k = (2 + eps)(1 + eps)^(kt + residue) / (2 alpha)."""
        return (2.0 + self.eps) * (1.0 + self.eps) ** (k * self.t + self.residue) / (2.0 * self.alpha)

    @property
    def levels(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["grids"] = {str(k): self.grid(k) for k in self.levels}
        return out


@dataclass(frozen=True)
class LeveledEdge:
    """Matched pair oriented so that ``v_head - v_tail`` is positive along ``direction``."""

    direction: int
    tail: int
    head: int
    level: int


def edge_level(length: float, eps: float, t: int) -> tuple[int, int]:
    """(residue j, level k) with length in [(1+eps)^(kt+j), (1+eps)^(kt+j+1))."""
    if not length > 0:
        raise DomainError(f"edge length must be positive, got {length}")
    base = 1.0 + eps
    e = math.floor(math.log(length) / math.log(base))
    # the logarithm may land one off near class boundaries
    while base ** (e + 1) <= length:
        e += 1
    while base**e > length:
        e -= 1
    k, j = divmod(e, t)
    return j, k


def _check_params(eps, t):
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if t < 1:
        raise ParameterError(f"t must be a positive integer, got {t}")


def _oriented_pairs(code: CodeConfig):
    out = []
    for i, (a, b) in code.tuples():
        delta = code.points[b, i] - code.points[a, i]
        if delta == 0:
            raise PreconditionError(f"pair {(a, b)} in direction {i} has no extent along e_{i}")
        out.append((i, a, b) if delta > 0 else (i, b, a))
    return out


def level_bucket(code: CodeConfig, eps: float, t: int, alpha: float | None = None):
    """Keep only edges of the most populated residue class.

    Ties go to the smallest residue.  Returns ``(code, schedule)``; at least
    a ``1/t`` fraction of the edges survives.
    """
    _check_params(eps, t)
    if code.q != 2:
        raise PreconditionError("level bucketing needs a 2-query code")
    if code.total_matched == 0:
        raise EmptyCodeError("no edges to bucket")
    if alpha is None:
        alpha = simple_alpha(code)
    if alpha <= 0:
        raise PreconditionError("code is not simple at any alpha > 0")
    tuples = list(code.tuples())
    lengths = [float(np.linalg.norm(code.points[b] - code.points[a])) for _, (a, b) in tuples]
    levels = [edge_level(x, eps, t) for x in lengths]
    counts = np.bincount([j for j, _ in levels], minlength=t)
    best = int(np.argmax(counts))
    kept: dict[int, list] = {}
    ks = []
    for (i, tup), (j, k) in zip(tuples, levels):
        if j == best:
            kept.setdefault(i, []).append(tup)
            ks.append(k)
    out = code.with_matchings(kept)
    schedule = LevelSchedule(eps, t, best, min(ks), max(ks), float(alpha),
                             kept_edges=len(ks), input_edges=len(tuples),
                             residue_counts=counts.tolist())
    return out, schedule


def leveled_edges(code: CodeConfig, schedule: LevelSchedule) -> list[LeveledEdge]:
    edges = []
    for i, a, b in _oriented_pairs(code):
        length = float(np.linalg.norm(code.points[b] - code.points[a]))
        j, k = edge_level(length, schedule.eps, schedule.t)
        if j != schedule.residue:
            raise PreconditionError(f"edge {(a, b)} has residue {j}, schedule keeps {schedule.residue}")
        edges.append(LeveledEdge(i, a, b, k))
    return edges


def sample_tilings(schedule: LevelSchedule, d: int, seed: int = 0, round_: int = 0) -> dict[int, Tiling]:
    """One independent cube tiling per level in ``[k_min, k_max]``."""
    return {
        k: cube_tiling(schedule.grid(k), d, rng=stream(seed, round_, k - schedule.k_min))
        for k in schedule.levels
    }


def _cells(code: CodeConfig, tilings: dict[int, Tiling], levels) -> dict[int, np.ndarray]:
    missing = [k for k in levels if k not in tilings]
    if missing:
        raise ConfigurationError(f"no tiling supplied for levels {missing}")
    return {k: tilings[k].cell(code.points) for k in levels}


def classify_good_edges(code: CodeConfig, schedule: LevelSchedule, tilings: dict[int, Tiling]) -> list[LeveledEdge]:
    """Edges whose endpoints are axis-adjacent at their level and co-celled above it."""
    edges = leveled_edges(code, schedule)
    cells = _cells(code, tilings, schedule.levels)
    good = []
    for e in edges:
        step = np.zeros(code.d, dtype=np.int64)
        step[e.direction] = 1
        ok = np.array_equal(cells[e.level][e.tail] + step, cells[e.level][e.head])
        for k in range(e.level + 1, schedule.k_max + 1):
            if not ok:
                break
            ok = np.array_equal(cells[k][e.tail], cells[k][e.head])
        if ok:
            good.append(e)
    return good


def good_edge_probability_bound(alpha: float, eps: float, t: int, kappa: float = 2 * math.pi) -> float:
    """Lower bound on the probability that a single edge is good.

    1 - kappa sqrt(1 - alpha^2 + (alpha eps/(2+eps))^2)
      - 2 kappa alpha (1+eps) / ((2+eps)((1+eps)^t - 1)).
    May be negative, in which case it says nothing.
    """
    adjacency = kappa * math.sqrt(1.0 - alpha**2 + (alpha * eps / (2.0 + eps)) ** 2)
    growth = t * math.log1p(eps)
    # (1+eps)^t - 1 overflows long after the term has become negligible
    higher = 2.0 * kappa * alpha * (1.0 + eps) / ((2.0 + eps) * math.expm1(growth)) if growth < 700 else 0.0
    return 1.0 - (adjacency + higher)


def alpha_threshold(kappa: float = 2 * math.pi) -> float:
    """Smallest alpha for which the bound can become positive: sqrt(1 - 1/kappa^2)."""
    return math.sqrt(max(0.0, 1.0 - 1.0 / kappa**2))


def edges_graph(n: int, edges: list[LeveledEdge]) -> CodeGraph:
    ends = np.array([(e.tail, e.head) for e in edges], dtype=np.intp).reshape(-1, 2)
    labels = np.array([e.direction for e in edges], dtype=np.intp)
    return CodeGraph(n, ends, labels)


def tiled_cut(code: CodeConfig, edges: list[LeveledEdge], schedule: LevelSchedule,
              tilings: dict[int, Tiling], subset=None, *, graph: CodeGraph | None = None,
              cells: dict[int, np.ndarray] | None = None) -> Cut:
    """Deterministic cut along the cell wall of a maximum-level edge.

    With ``e`` the first internal edge of maximal level ``k`` and direction
    ``i0``, points whose level-``k`` cell index along ``i0`` is at most the
    tail's go to ``S1``, the rest to ``S2``.  When every edge is good, only
    direction-``i0`` edges cross, so ``|edg(S1,S2)| <= min(|S1|, |S2|)``.
    ``Cut.cut_edges`` indexes into ``edges``.
    """
    subset = np.arange(code.n) if subset is None else np.asarray(sorted(set(int(j) for j in subset)), dtype=np.intp)
    if len(subset) < 2:
        raise ParameterError("a cut needs at least two points")
    graph = graph if graph is not None else edges_graph(code.n, edges)
    internal = graph.internal_edges(subset)
    if len(internal) == 0:
        left = np.arange(len(subset)) < len(subset) // 2
        return _split(graph, subset, left, internal)
    levels = np.array([edges[m].level for m in internal])
    top = edges[int(internal[int(np.argmax(levels))])]
    if cells is None:
        cells = _cells(code, tilings, [top.level])
    along = cells[top.level][:, top.direction]
    wall = along[top.tail]
    cut = _split(graph, subset, along[subset] <= wall, internal, top.direction)
    # the wall sits halfway between two adjacent lattice coordinates
    tiling = tilings[top.level]
    cut.threshold = float(tiling.g * (wall + 0.5) + tiling.shift[top.direction])
    return cut


@dataclass
class LargeAlphaResult:
    verified: bool
    alpha: float
    eps: float
    t: int
    kappa: float
    probability_bound: float
    rounds: int
    good_fraction: float
    best_fraction: float
    good_edges: int
    bucketed_edges: int
    input_edges: int
    n: int
    d: int
    density_in: float
    density_good: float
    log2_implied_bound: float
    schedule: LevelSchedule | None = None
    certificate: CutCertificate | None = None
    failure: str | None = None

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("schedule", "certificate")}
        out["implied_bound"] = 2.0**self.log2_implied_bound
        out["bound_chain"] = (
            "good edges <= (1/2) n log2 n  =>  n >= 2^(2 d delta_good), "
            "delta_good >= p * delta / t in expectation"
        )
        out["schedule"] = self.schedule.to_dict() if self.schedule else None
        out["certificate"] = self.certificate.to_dict() if self.certificate else None
        return out


def large_alpha_certificate(code: CodeConfig, eps: float, t: int, retries: int = 16, seed: int = 0,
                            kappa: float | None = None, alpha: float | None = None) -> LargeAlphaResult:
    """Tiling-based certificate for simple codes with alpha close to 1.

    Buckets edges by length, then resamples one tiling per level (up to
    ``retries`` rounds) until the fraction of good edges reaches the
    per-edge probability bound, and recursively cuts with
    :func:`tiled_cut` (node constant 1).  The implied bound is
    ``n >= 2^(2 d delta_good)`` where ``delta_good`` is the density of the
    good edges.
    """
    d, n = code.d, code.n
    kappa = cube_kappa(d) if kappa is None else kappa
    density_in = code.total_matched / (d * n)
    bucketed, schedule = level_bucket(code, eps, t, alpha)
    p = good_edge_probability_bound(schedule.alpha, eps, t, kappa)
    m = bucketed.total_matched

    best = (-1.0, None, None)
    rounds = 0
    for r in range(max(1, retries)):
        rounds = r + 1
        tilings = sample_tilings(schedule, d, seed, r)
        good = classify_good_edges(bucketed, schedule, tilings)
        frac = len(good) / m
        if frac > best[0]:
            best = (frac, tilings, good)
        if frac >= p:
            break
    frac, tilings, good = best
    result = LargeAlphaResult(
        verified=False, alpha=schedule.alpha, eps=eps, t=t, kappa=kappa, probability_bound=p,
        rounds=rounds, good_fraction=frac, best_fraction=frac, good_edges=len(good),
        bucketed_edges=m, input_edges=code.total_matched, n=n, d=d, density_in=density_in,
        density_good=len(good) / (d * n), log2_implied_bound=2.0 * d * len(good) / (d * n),
        schedule=schedule,
    )
    if frac < p:
        result.failure = f"good-edge fraction {frac:.6g} never reached the bound {p:.6g} in {rounds} rounds"
        return result

    graph = edges_graph(n, good)
    cells = _cells(bucketed, tilings, schedule.levels)

    def choose(subset):
        return tiled_cut(bucketed, good, schedule, tilings, subset, graph=graph, cells=cells)

    cert = _recurse(bucketed, graph, choose, 1.0)
    cert.extra["degenerate"] = len(good) == 0
    result.certificate = cert
    result.verified = cert.verified
    result.failure = cert.failure
    return result


def large_alpha_bound(alpha: float, delta: float, d: int, eps: float, t: int,
                      kappa: float = 2 * math.pi) -> float:
    """Explicit-constant bound for simple codes with large alpha.

    Returns ``2^(2 d delta p / t)`` with ``p`` the per-edge good probability;
    1.0 (vacuous) when ``p <= 0``.
    """
    p = good_edge_probability_bound(alpha, eps, t, kappa)
    if p <= 0:
        return 1.0
    return 2.0 ** (2.0 * d * delta * p / t)


def large_alpha_bound_chain(alpha: float, delta: float, d: int, eps: float, t: int,
                            kappa: float = 2 * math.pi) -> dict:
    return {
        "theorem": "large-alpha",
        "alpha": alpha, "delta": delta, "d": d, "eps": eps, "t": t, "kappa": kappa,
        "alpha_threshold": alpha_threshold(kappa),
        "probability_bound": good_edge_probability_bound(alpha, eps, t, kappa),
        "form": "n >= 2^(2 d delta p / t)",
        "bound": large_alpha_bound(alpha, delta, d, eps, t, kappa),
    }
