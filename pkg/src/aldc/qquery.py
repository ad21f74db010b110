"""Rank lemma witnesses, direction coverage of random subsets and the q-query bound.

If a point subset ``S`` contains a full tuple from ``k`` distinct
matchings, each tuple's span holds a unit vector ``u`` whose own
coordinate is at least alpha.  Stacking them gives a ``k x k`` matrix
(restricted to the covered coordinates) with diagonal at least alpha, so

    (alpha k)^2 <= tr(U)^2 <= (sum sigma)^2 <= r ||U||_F^2 <= r k,

and the rank ``r``, hence ``|S|``, is at least ``alpha^2 k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import stream
from .core import CodeConfig, span_projector
from .errors import EmptyWitnessError, ParameterError, PreconditionError, UnsupportedQueryCountError
from .spectral import rank_tolerance, singular_values

_TOL = 1e-10


@dataclass(frozen=True)
class WitnessMatrix:
    directions: tuple[int, ...]
    tuples: tuple[tuple[int, ...], ...]
    full_rows: np.ndarray  # (k, d) unit vectors
    alpha: float

    @property
    def k(self) -> int:
        return len(self.directions)

    @property
    def matrix(self) -> np.ndarray:
        """Rows restricted to the covered coordinates, in direction order."""
        return self.full_rows[:, list(self.directions)]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.matrix)


def covered_tuples(code: CodeConfig, subset) -> dict[int, tuple[int, ...]]:
    """First tuple (in stored order) of each matching lying inside ``subset``."""
    inside = np.zeros(code.n, dtype=bool)
    inside[np.asarray(list(subset), dtype=np.intp)] = True
    out = {}
    for m in code.matchings:
        for t in m.tuples:
            if inside[list(t)].all():
                out[m.direction] = t
                break
    return out


def witness_matrix(code: CodeConfig, subset, alpha: float | None = None) -> WitnessMatrix:
    """One unit vector per covered direction: the normalized projection of e_i
    onto the tuple's span, signed so its own coordinate is positive.

    ``alpha`` defaults to the smallest diagonal entry; when given, every
    diagonal entry must reach it.
    """
    cov = covered_tuples(code, subset)
    if not cov:
        raise EmptyWitnessError("subset contains no full tuple of any matching")
    dirs = tuple(sorted(cov))
    tuples = tuple(cov[i] for i in dirs)
    cols = np.swapaxes(code.points[np.asarray(tuples, dtype=np.intp)], -1, -2)
    proj = span_projector(cols)                       # (k, d, d)
    rows = proj[np.arange(len(dirs)), :, list(dirs)]  # P e_i for each covered i
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0):
        bad = [dirs[j] for j in np.flatnonzero(norms == 0)]
        raise PreconditionError(f"tuple spans are orthogonal to e_i for directions {bad}")
    rows = rows / norms[:, None]
    own = rows[np.arange(len(dirs)), list(dirs)]
    rows = rows * np.where(own < 0, -1.0, 1.0)[:, None]
    diag = np.abs(own)
    if alpha is None:
        alpha = float(diag.min())
    elif np.any(diag < alpha - _TOL):
        raise PreconditionError(f"witness diagonal {diag.min():.6g} below alpha={alpha:.6g}")
    return WitnessMatrix(dirs, tuples, rows, float(alpha))


@dataclass
class RankCheck:
    rank: int
    holds: bool
    k: int
    alpha: float
    trace_sq: float
    nuclear_sq: float
    rank_frobenius: float
    rank_k: float
    chain_ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def rank_bound_check(u: WitnessMatrix, alpha: float | None = None, rtol: float = 1e-6) -> RankCheck:
    """Numerical rank of the witness and the inequality chain behind ``r >= alpha^2 k``."""
    alpha = u.alpha if alpha is None else alpha
    m = u.matrix
    s = singular_values(m)
    r = int(np.count_nonzero(s > rank_tolerance(m.shape, s[0]))) if s[0] > 0 else 0
    chain = [float(np.trace(m)) ** 2, float(s.sum()) ** 2, r * float((s**2).sum()), float(r * u.k)]
    ok = all(a <= b * (1 + rtol) + rtol for a, b in zip(chain, chain[1:]))
    return RankCheck(r, r >= alpha**2 * u.k - 1e-9, u.k, float(alpha), *chain, ok)


def covered_direction_count(code: CodeConfig, subset) -> int:
    return len(covered_tuples(code, subset))


def subset_direction_count(code: CodeConfig, m: int, seed: int = 0) -> int:
    """Directions with a full tuple inside a uniform random ``m``-subset."""
    if not 1 <= m <= code.n:
        raise ParameterError(f"sample size must lie in [1, {code.n}], got {m}")
    subset = stream(seed).choice(code.n, size=m, replace=False)
    return covered_direction_count(code, subset)


def default_sample_size(n: int, delta: float, q: int, const: float = 1.0) -> int:
    """ceil(const * delta^(-1/q) * n^((q-1)/q)), clipped to [1, n]."""
    if delta <= 0:
        return n
    m = math.ceil(const * delta ** (-1.0 / q) * n ** ((q - 1) / q))
    return max(1, min(n, m))


def qquery_bound(alpha: float, delta: float, d: int, q: int) -> float:
    """(alpha^2 delta^(1/q) d)^(q/(q-1)), constant 1."""
    if q == 1:
        raise UnsupportedQueryCountError("q=1 has its own bound: use spectral.one_query_bound_check")
    if q < 1:
        raise ParameterError(f"q must be positive, got {q}")
    return (alpha**2 * delta ** (1.0 / q) * d) ** (q / (q - 1))


def qquery_bound_chain(alpha: float, delta: float, d: int, q: int) -> dict:
    return {
        "theorem": "qquery",
        "alpha": alpha, "delta": delta, "d": d, "q": q,
        "sample_size_form": "m = delta^(-1/q) n^((q-1)/q) covers Omega(d) directions",
        "rank_lemma": "m >= alpha^2 k",
        "constant": 1.0,
        "bound": qquery_bound(alpha, delta, d, q),
    }
