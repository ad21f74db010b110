"""Labeled code graph, random axis-aligned cuts and recursive cut certificates.

The certificate records, for every node of a recursive bisection of the
point set down to singletons, how many edges the chosen cut severs.  If
every node satisfies ``|edg(S1,S2)| <= c * min(|S1|, |S2|)`` then the whole
graph has at most ``(c/2) n log2 n`` edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import stream
from .core import CodeConfig, simple_alpha
from .errors import CertificateSearchFailure, ParameterError, UnsupportedQueryCountError


@dataclass(frozen=True)
class CodeGraph:
    """Multigraph on point indices; edge ``e`` joins ``ends[e]`` with label ``labels[e]``."""

    n: int
    ends: np.ndarray    # (m, 2) int
    labels: np.ndarray  # (m,) int

    @property
    def num_edges(self) -> int:
        return len(self.labels)

    def internal_edges(self, subset: np.ndarray) -> np.ndarray:
        inside = np.zeros(self.n, dtype=bool)
        inside[subset] = True
        return np.flatnonzero(inside[self.ends[:, 0]] & inside[self.ends[:, 1]])


@dataclass
class Cut:
    s1: np.ndarray
    s2: np.ndarray
    cut_edges: np.ndarray
    right_direction_count: int
    direction: int | None = None
    threshold: float | None = None

    @property
    def nontrivial(self) -> bool:
        return len(self.s1) > 0 and len(self.s2) > 0

    @property
    def min_side(self) -> int:
        return min(len(self.s1), len(self.s2))


@dataclass
class CertificateNode:
    parent: int
    size: int
    s1_size: int
    s2_size: int
    cut_edges: int
    right_direction_count: int
    direction: int | None
    ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CutCertificate:
    nodes: list[CertificateNode]
    total_edges: int
    graph_edges: int
    c_param: float
    n: int
    verified: bool
    failure: str | None = None
    failed_subset: list[int] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def edge_bound(self) -> float:
        """(c/2) n log2 n."""
        return 0.5 * self.c_param * self.n * math.log2(self.n) if self.n > 1 else 0.0

    def to_dict(self, include_nodes: bool = False) -> dict:
        out = {
            "n": self.n,
            "c_param": self.c_param,
            "total_edges": self.total_edges,
            "graph_edges": self.graph_edges,
            "edge_bound": self.edge_bound,
            "nodes": len(self.nodes),
            "verified": self.verified,
            "failure": self.failure,
            "failed_subset": self.failed_subset,
        }
        out.update(self.extra)
        if include_nodes:
            out["tree"] = [nd.to_dict() for nd in self.nodes]
        return out


def build_graph(code: CodeConfig) -> CodeGraph:
    if code.q != 2:
        raise UnsupportedQueryCountError(f"the code graph needs q=2, got q={code.q}")
    ends = np.array([t for _, t in code.tuples()], dtype=np.intp).reshape(-1, 2)
    labels = np.array([i for i, _ in code.tuples()], dtype=np.intp)
    return CodeGraph(code.n, ends, labels)


def _split(graph: CodeGraph, subset: np.ndarray, left_mask: np.ndarray, edges: np.ndarray, direction=None, threshold=None) -> Cut:
    side = np.zeros(graph.n, dtype=np.int8)
    side[subset[left_mask]] = 1
    side[subset[~left_mask]] = 2
    a = side[graph.ends[edges, 0]]
    b = side[graph.ends[edges, 1]]
    crossing = edges[a != b]
    right = int(np.count_nonzero(graph.labels[crossing] == direction)) if direction is not None else 0
    return Cut(subset[left_mask], subset[~left_mask], crossing, right, direction, threshold)


def _as_subset(code: CodeConfig, subset) -> np.ndarray:
    if subset is None:
        return np.arange(code.n)
    return np.asarray(sorted(set(int(j) for j in subset)), dtype=np.intp)


def sample_axis_cut(graph: CodeGraph, code: CodeConfig, subset=None, seed=0, *, direction: int | None = None, rng=None) -> Cut:
    """One random axis-aligned cut of ``subset``.

    A direction ``i`` is drawn uniformly (unless fixed by ``direction``) and
    a threshold uniformly inside the subset's bounding interval along
    ``i``.  Points at or below the threshold go to ``S1``.
    """
    subset = _as_subset(code, subset)
    if len(subset) < 2:
        raise ParameterError("a cut needs at least two points")
    rng = rng if rng is not None else stream(seed)
    edges = graph.internal_edges(subset)
    return _sample(graph, code, subset, edges, rng, direction)


def _sample(graph, code, subset, edges, rng, direction=None) -> Cut:
    i = int(rng.integers(code.d)) if direction is None else int(direction)
    coords = code.points[subset, i]
    lo, hi = coords.min(), coords.max()
    thr = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
    return _split(graph, subset, coords <= thr, edges, i, thr)


def default_budget(d: int, size: int) -> int:
    return int(math.ceil(64 * d * math.log2(size + 1)))


def cut_constant(alpha: float, d: int) -> float:
    """2 sqrt(d) / alpha."""
    return 2.0 * math.sqrt(d) / alpha


def find_good_cut(graph: CodeGraph, code: CodeConfig, subset=None, alpha: float | None = None,
                  budget: int | None = None, seed=0, *, rng=None) -> Cut:
    """Rejection-sample axis cuts until one satisfies the random-cut lemma.

    Accepts a nontrivial cut with at least one right-direction edge and
    ``|edg(S1,S2)| <= (2 sqrt(d)/alpha) min(|S1|,|S2|)``.  A subset with no
    internal edges gets a balanced split.  Raises
    :class:`CertificateSearchFailure` when the budget runs out.
    """
    subset = _as_subset(code, subset)
    if len(subset) < 2:
        raise ParameterError("a cut needs at least two points")
    if alpha is None:
        alpha = simple_alpha(code)
    if alpha <= 0:
        raise ParameterError("cut search needs alpha > 0")
    c = cut_constant(alpha, code.d)
    edges = graph.internal_edges(subset)
    if len(edges) == 0:
        left = np.arange(len(subset)) < len(subset) // 2
        return _split(graph, subset, left, edges)

    budget = default_budget(code.d, len(subset)) if budget is None else budget
    rng = rng if rng is not None else stream(seed)
    best_ratio = math.inf
    for _ in range(budget):
        cut = _sample(graph, code, subset, edges, rng)
        if not cut.nontrivial:
            continue
        ratio = len(cut.cut_edges) / cut.min_side
        best_ratio = min(best_ratio, ratio)
        if cut.right_direction_count >= 1 and len(cut.cut_edges) <= c * cut.min_side:
            return cut
    raise CertificateSearchFailure(
        f"no admissible cut in {budget} samples",
        {"subset_size": len(subset), "internal_edges": len(edges), "budget": budget,
         "c_param": c, "best_ratio": best_ratio},
    )


def _recurse(code: CodeConfig, graph: CodeGraph, choose, c: float) -> CutCertificate:
    """Bisect down to singletons with ``choose(subset, node_rng_key) -> Cut``."""
    nodes: list[CertificateNode] = []
    total = 0
    stack = [(np.arange(code.n), -1)]
    while stack:
        subset, parent = stack.pop()
        if len(subset) < 2:
            continue
        try:
            cut = choose(subset)
        except CertificateSearchFailure as exc:
            return CutCertificate(nodes, total, graph.num_edges, c, code.n, False,
                                  failure=f"{exc} {exc.diagnostics}", failed_subset=subset.tolist())
        k = len(cut.cut_edges)
        ok = cut.nontrivial and k <= c * cut.min_side
        nodes.append(CertificateNode(parent, len(subset), len(cut.s1), len(cut.s2), k,
                                     cut.right_direction_count, cut.direction, ok))
        total += k
        if not ok:
            return CutCertificate(nodes, total, graph.num_edges, c, code.n, False,
                                  failure="cut violates the node bound", failed_subset=subset.tolist())
        me = len(nodes) - 1
        stack.append((cut.s2, me))
        stack.append((cut.s1, me))

    cert = CutCertificate(nodes, total, graph.num_edges, c, code.n, True)
    cert.verified = total == graph.num_edges and total <= cert.edge_bound * (1 + 1e-12)
    if not cert.verified:
        cert.failure = "edge accounting does not close"
    return cert


def recursive_cut_certificate(code: CodeConfig, budget_per_node: int | None = None, seed: int = 0,
                              alpha: float | None = None) -> CutCertificate:
    """Certificate that the code graph has at most (c/2) n log2 n edges, c = 2 sqrt(d)/alpha.

    ``alpha`` defaults to the code's simplicity level.  Each node samples
    from its own stream keyed by (smallest index, size) of its subset.
    """
    graph = build_graph(code)
    if alpha is None:
        alpha = simple_alpha(code)
    if alpha <= 0:
        raise ParameterError("the code is not simple at any alpha > 0")
    c = cut_constant(alpha, code.d)

    def choose(subset):
        rng = stream(seed, int(subset[0]), len(subset))
        return find_good_cut(graph, code, subset, alpha, budget_per_node, rng=rng)

    cert = _recurse(code, graph, choose, c)
    cert.extra["alpha"] = alpha
    return cert


def general_bound(alpha: float, delta: float, d: int, simple: bool = True) -> float:
    """2^{alpha delta sqrt(d)}; for non-simple codes alpha and delta are first halved
    as alpha/sqrt(2), delta/2 by the reduction to simple codes."""
    if not simple:
        alpha, delta = alpha / math.sqrt(2.0), delta / 2.0
    return 2.0 ** (alpha * delta * math.sqrt(d))


def general_bound_chain(alpha: float, delta: float, d: int, simple: bool = True) -> dict:
    a, dl = (alpha, delta) if simple else (alpha / math.sqrt(2.0), delta / 2.0)
    return {
        "theorem": "general",
        "alpha": alpha, "delta": delta, "d": d, "simple": simple,
        "alpha_used": a, "delta_used": dl,
        "cut_constant": "c = 2 sqrt(d) / alpha",
        "edge_inequality": "delta d n <= (c/2) n log2 n",
        "log2_bound": a * dl * math.sqrt(d),
        "bound": general_bound(alpha, delta, d, simple),
    }
