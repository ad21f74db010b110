"""Fourier-Hermite matrices of a 2-query code and trace-norm certificates.

For a point set ``v_1..v_n`` let ``F(x) = f(x) f(x)^*`` with
``f(x)_s = exp(-i <x, v_s>)``.  Its first-level Fourier-Hermite coefficient
in direction ``i`` has the closed form

    F^(e_i)[s, t] = -i (v_s - v_t)_i exp(-||v_s - v_t||^2 / 2).

Logarithms in ``2 log(2 e n)`` are natural.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import stream
from .core import CodeConfig, boundedness, density, simple_alpha, verify
from .errors import NumericalError, PreconditionError, UnsupportedQueryCountError

# tolerance for the 2-bounded length window and the simple-alpha check
_TOL = 1e-9


def thread_count() -> int:
    """Worker count from ``ALDC_THREADS`` (0 or unset = one per CPU)."""
    raw = os.environ.get("ALDC_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _map(fn, items):
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def one_query_bound_check(code: CodeConfig, alpha: float | None = None) -> tuple[float, bool]:
    """(e / (alpha^2 delta), d <= that bound) for a 1-query code."""
    if code.q != 1:
        raise UnsupportedQueryCountError(f"one-query bound needs q=1, got q={code.q}")
    report = verify(code, 0.0 if alpha is None else alpha)
    if alpha is None:
        alpha = report.achieved_alpha
    elif report.achieved_alpha < alpha - _TOL:
        raise PreconditionError(f"code verifies only at alpha={report.achieved_alpha:.6g}")
    bound = one_query_bound(alpha, report.density)
    return bound, code.d <= bound


def one_query_bound(alpha: float, delta: float) -> float:
    """e / (alpha^2 delta); infinite when alpha or delta is zero."""
    return math.e / (alpha**2 * delta) if alpha > 0 and delta > 0 else math.inf


def one_query_bound_chain(alpha: float, delta: float, d: int) -> dict:
    bound = one_query_bound(alpha, delta)
    return {"theorem": "one-query", "alpha": alpha, "delta": delta, "d": d,
            "form": "d <= e / (alpha^2 delta)", "bound": bound, "holds": d <= bound}


def _differences(points: np.ndarray) -> np.ndarray:
    return points[:, None, :] - points[None, :, :]


def fourier_matrix(code: CodeConfig, i: int) -> np.ndarray:
    """Closed-form F^(e_i) as an ``(n, n)`` complex array."""
    if code.q != 2:
        raise UnsupportedQueryCountError(f"Fourier matrices need q=2, got q={code.q}")
    diff = _differences(code.points)
    damp = np.exp(-0.5 * np.einsum("stk,stk->st", diff, diff))
    return -1j * diff[:, :, i] * damp


def fourier_matrices(code: CodeConfig) -> np.ndarray:
    """All d coefficients, shape ``(d, n, n)``."""
    if code.q != 2:
        raise UnsupportedQueryCountError(f"Fourier matrices need q=2, got q={code.q}")
    diff = _differences(code.points)
    damp = np.exp(-0.5 * np.einsum("stk,stk->st", diff, diff))
    return -1j * np.moveaxis(diff, -1, 0) * damp


def gram_phase_matrix(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """F(x) = f f^*, f_s = exp(-i <x, v_s>)."""
    f = np.exp(-1j * (np.asarray(points, dtype=np.float64) @ np.asarray(x, dtype=np.float64)))
    return np.outer(f, f.conj())


def singular_values(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def trace_norm(a: np.ndarray) -> float:
    return float(singular_values(a).sum())


def spectral_norm(a: np.ndarray) -> float:
    s = singular_values(a)
    return float(s[0]) if s.size else 0.0


def rank_tolerance(shape: tuple[int, ...], s_max: float) -> float:
    """Singular values at or below this count as zero: max(shape) * eps * s_max."""
    return max(shape) * np.finfo(np.float64).eps * s_max


def numerical_rank(a: np.ndarray) -> int:
    s = singular_values(a)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rank_tolerance(np.shape(a), s[0])))


def trace_inner(a: np.ndarray, x: np.ndarray) -> complex:
    """<A, X> = tr(A^* X)."""
    return complex(np.vdot(a, x))


@dataclass
class WitnessBound:
    direction: int
    witness_value: float
    certified: bool
    trace_norm: float
    target: float
    witness_spectral_norm: float
    min_entry: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _check_two_bounded_simple(code: CodeConfig, alpha: float | None) -> float:
    if code.q != 2:
        raise UnsupportedQueryCountError(f"witness needs q=2, got q={code.q}")
    achieved = simple_alpha(code)
    if alpha is None:
        alpha = achieved
    if achieved < alpha - _TOL or alpha <= 0:
        raise PreconditionError(f"code is simple only at alpha={achieved:.6g}, requested {alpha:.6g}")
    if code.total_matched:
        lo, hi = boundedness(code)
        if lo < 1 - _TOL or hi > 2 + _TOL:
            raise PreconditionError(f"pair lengths span [{lo:.6g}, {hi:.6g}], not inside [1, 2]")
    return alpha


def matching_witness_bound(code: CodeConfig, i: int, alpha: float | None = None,
                           fhat: np.ndarray | None = None) -> WitnessBound:
    """Dual certificate that ||F^(e_i)||_S1 >= (alpha/e) |M_i|.

    ``X`` carries the unit phase of ``F^(e_i)`` at both ``(s, t)`` and
    ``(t, s)`` of every pair in ``M_i`` and zero elsewhere.  The pairs are
    disjoint, so ``X`` has at most one nonzero per row and column and
    ``||X||_Sinf <= 1``; then ``||F^||_S1 >= <F^, X> = sum |F^_st|`` over
    those positions.
    """
    alpha = _check_two_bounded_simple(code, alpha)
    a = fourier_matrix(code, i) if fhat is None else fhat
    pairs = code.matchings[i].tuples
    x = np.zeros_like(a)
    for s, t in pairs:
        for p, r in ((s, t), (t, s)):
            mag = abs(a[p, r])
            x[p, r] = a[p, r] / mag if mag > 0 else 1.0
    value = trace_inner(a, x).real
    s1 = trace_norm(a)
    xs = spectral_norm(x) if pairs else 0.0
    target = alpha / math.e * len(pairs)
    entries = [abs(a[s, t]) for s, t in pairs]
    certified = xs <= 1 + _TOL and s1 >= value - _TOL * max(1.0, s1) and value >= target - _TOL
    return WitnessBound(i, value, bool(certified), s1, target, xs, min(entries) if entries else math.inf)


@dataclass
class SpectralReport:
    n: int
    d: int
    trace_norms: list[float]
    witness_lower_bounds: list[float]
    lhs: float
    rhs: float
    holds: bool
    slack: float
    alpha: float
    delta: float
    implied_bound: float
    log_base: str = "natural"

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["bound_chain"] = (
            "alpha delta sqrt(d) n / e <= (sum_i ||F^(e_i)||_S1^2)^(1/2) <= sqrt(2 ln(2 e n)) n"
            "  =>  n >= exp(alpha^2 delta^2 d / (2 e^2)) / (2 e)"
        )
        return out


def two_bounded_bound(alpha: float, delta: float, d: int) -> float:
    """exp(alpha^2 delta^2 d / (2 e^2)) / (2 e), our explicit instantiation."""
    return math.exp(alpha**2 * delta**2 * d / (2 * math.e**2)) / (2 * math.e)


def trace_inequality_check(code: CodeConfig) -> SpectralReport:
    """lhs = sum_i ||F^(e_i)||_S1^2 against rhs = 2 ln(2 e n) n^2."""
    mats = fourier_matrices(code)
    norms = _map(trace_norm, mats)
    n, d = code.n, code.d
    lhs = float(sum(v * v for v in norms))
    rhs = 2.0 * math.log(2 * math.e * n) * n * n
    alpha = simple_alpha(code)
    delta = density(code)
    wit = [alpha / math.e * len(m) for m in code.matchings]
    return SpectralReport(n, d, [float(v) for v in norms], wit, lhs, rhs, lhs <= rhs,
                          rhs - lhs, alpha, delta, two_bounded_bound(alpha, delta, d))


def _check_hermitian(mats: np.ndarray):
    gap = np.abs(mats - np.conj(np.swapaxes(mats, -1, -2))).max() if mats.size else 0.0
    if gap > 1e-10:
        raise PreconditionError(f"matrices are not Hermitian (max |A - A^*| = {gap:.3g})")


def nck_montecarlo(mats, samples: int = 10_000, seed: int = 0, chunk: int = 512):
    """Monte Carlo estimate of E ||sum_i x_i A_i||_Sinf^2 against 2 ln(2 e n) ||sum A_i^2||_Sinf.

    Returns ``(estimate, bound, holds)`` where ``holds`` allows three
    standard errors of slack on the estimate.
    """
    a = np.asarray(mats)
    if a.ndim != 3 or a.shape[1] != a.shape[2] or a.shape[0] < 1:
        raise PreconditionError(f"expected a (d, n, n) stack, got shape {a.shape}")
    _check_hermitian(a)
    d, n, _ = a.shape
    bound = 2.0 * math.log(2 * math.e * n) * spectral_norm(np.einsum("kij,kjl->il", a, a))
    rng = stream(seed)
    vals = []
    for start in range(0, samples, chunk):
        x = rng.standard_normal((min(chunk, samples - start), d))
        s = np.einsum("mk,kij->mij", x, a)
        # sum of Hermitians is Hermitian: the spectral norm is the largest |eigenvalue|
        ev = np.linalg.eigvalsh(s)
        vals.append(np.abs(ev).max(axis=1) ** 2)
    v = np.concatenate(vals)
    est = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return est, bound, est <= bound + 3 * se


def parseval_first_level(v) -> float:
    """sum_i |f^(e_i)|^2 = sum_i v_i^2 exp(-||v||^2) for f(x) = exp(-i <v, x>); at most 1."""
    v = np.asarray(v, dtype=np.float64)
    sq = float(v @ v)
    return sq * math.exp(-sq)


def bounded_code_bound(alpha: float, delta: float, c: float, d: int) -> float:
    return bounded_code_bound_chain(alpha, delta, c, d)["bound"]


def bounded_code_bound_chain(alpha: float, delta: float, c: float, d: int) -> dict:
    """Bound for c-bounded simple codes via bucketing to 2-bounded."""
    if c < 1:
        raise PreconditionError(f"c must be at least 1, got {c}")
    buckets = max(1, math.ceil(math.log2(c))) if c > 1 else 1
    delta2 = delta / buckets
    exponent = alpha**2 * delta2**2 * d / (2 * math.e**2)
    return {
        "theorem": "bounded",
        "alpha": alpha, "delta": delta, "c": c, "d": d,
        "buckets": buckets,
        "delta_2bounded": delta2,
        "exponent": exponent,
        "two_bounded_form": "n >= exp(alpha^2 delta'^2 d / (2 e^2)) / (2 e)",
        "bound": math.exp(exponent) / (2 * math.e),
    }
