"""Diophantine approximation and discrepancy of Kronecker sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

DPS = 60
RATIONAL_TOL = 1e-15
_PART_BITS = 18
_PARTS = 6


class RationalAlpha(ValueError):
    pass


NAMED = {
    "sqrt2": lambda: mpmath.sqrt(2),
    "sqrt3": lambda: mpmath.sqrt(3),
    "sqrt5": lambda: mpmath.sqrt(5),
    "golden": lambda: (1 + mpmath.sqrt(5)) / 2,
    "e": lambda: mpmath.e,
    "pi": lambda: mpmath.pi,
}


def resolve_alpha(alpha) -> mpmath.mpf:
    """High-precision value of a named constant, a decimal string or a number.

    Names: sqrt2, sqrt3, sqrt5, golden, e, pi, and ``sqrt:<d>``.
    """
    with mpmath.workdps(DPS):
        if isinstance(alpha, str):
            key = alpha.strip().lower()
            if key in NAMED:
                return +NAMED[key]()
            if key.startswith("sqrt:"):
                return mpmath.sqrt(mpmath.mpf(key[5:]))
            return mpmath.mpf(key)
        return mpmath.mpf(alpha)


def _parts(alpha) -> np.ndarray:
    """Split frac(alpha) into float chunks with at most 18 significant bits each,
    so that k * chunk is exact for integers k < 2**35."""
    with mpmath.workdps(DPS):
        a = mpmath.frac(resolve_alpha(alpha))
        out = []
        scale = 1
        for _ in range(_PARTS):
            scale <<= _PART_BITS
            c = mpmath.floor(a * scale) / scale
            out.append(float(c))
            a -= c
    return np.array(out)


def frac_multiples(alpha, k) -> np.ndarray:
    """{k * alpha} for integer arrays k with |k| < 2**35, accurate to about 1e-16."""
    k = np.asarray(k, dtype=np.float64)
    if np.any(np.abs(k) >= 2.0**35):
        raise ValueError("multipliers must stay below 2**35")
    acc = np.zeros_like(k)
    for p in _parts(alpha):
        t = k * p
        acc += t - np.floor(t)
    return acc - np.floor(acc)


def dist_to_nearest_int(x):
    x = np.asarray(x, dtype=np.float64)
    d = np.abs(x - np.rint(x))
    return float(d) if d.ndim == 0 else d


def _hdist(alpha, m: int) -> tuple[np.ndarray, np.ndarray]:
    if m < 1:
        raise ValueError("m must be positive")
    h = np.arange(1, m + 1, dtype=np.float64)
    d = dist_to_nearest_int(frac_multiples(alpha, h))
    if d.min() <= RATIONAL_TOL:
        raise RationalAlpha(f"||h alpha|| vanishes numerically at h = {int(h[np.argmin(d)])}")
    return h, d


def sum_inv_dist(alpha, m: int) -> float:
    """sum_{h <= m} 1/||h alpha||."""
    _, d = _hdist(alpha, m)
    return math.fsum(1.0 / d)


def sum_inv_hdist(alpha, m: int) -> float:
    """sum_{h <= m} 1/(h ||h alpha||)."""
    h, d = _hdist(alpha, m)
    return math.fsum(1.0 / (h * d))


def fit_power(x, y) -> tuple[float, float]:
    """Least-squares (slope, intercept) of log y against log x."""
    slope, icept = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope), float(icept)


def kronecker_sequence(alpha, beta: float, N: int) -> np.ndarray:
    """{n alpha + beta} for n = 1..N."""
    if N < 1:
        raise ValueError("N must be positive")
    x = frac_multiples(alpha, np.arange(1, N + 1)) + (beta - math.floor(beta))
    return x - np.floor(x)


# ---------------------------------------------------------------- discrepancy


@dataclass(frozen=True)
class DiscrepancyReport:
    N: int
    discrepancy: float
    star: float


def _sorted_points(points) -> np.ndarray:
    x = np.sort(np.asarray(points, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("need at least one point")
    if x[0] < 0 or x[-1] >= 1:
        raise ValueError("points must lie in [0, 1)")
    return x


def star_discrepancy(points) -> float:
    """sup over [0, b) of |count/N - b|."""
    x = _sorted_points(points)
    N = len(x)
    i = np.arange(1, N + 1)
    return float(1.0 / (2 * N) + np.max(np.abs(x - (2 * i - 1) / (2 * N))))


def exact_discrepancy(points) -> DiscrepancyReport:
    """Extreme discrepancy over half-open intervals [a, b) in O(N log N)."""
    x = _sorted_points(points)
    N = len(x)
    g = np.arange(1, N + 1) / N - x
    D = 1.0 / N + (g.max() - g.min())
    return DiscrepancyReport(N, float(min(D, 1.0)), star_discrepancy(x))


def exact_discrepancy_quadratic(points) -> float:
    """Reference O(N^2) evaluation over all candidate endpoints.

    count/N - (b - a) is largest for a at a point and b just past a point;
    (b - a) - count/N is largest for a just past a point (or 0) and b at a
    point (or 1).
    """
    x = _sorted_points(points)
    N = len(x)
    # closed runs x_i .. x_j contain at least j - i + 1 points (ties included)
    lo_idx = np.searchsorted(x, x, side="left")
    hi_idx = np.searchsorted(x, x, side="right")
    over = (hi_idx[None, :] - lo_idx[:, None]) / N - (x[None, :] - x[:, None])
    over = np.where(x[None, :] >= x[:, None], over, -np.inf).max()
    starts = np.concatenate([[0.0], x])
    start_cnt = np.concatenate([[0], hi_idx])  # points strictly below an open start are excluded
    ends = np.concatenate([x, [1.0]])
    end_cnt = np.concatenate([lo_idx, [N]])
    inside = end_cnt[None, :] - start_cnt[:, None]
    under = (ends[None, :] - starts[:, None]) - inside / N
    under = np.where(ends[None, :] >= starts[:, None], under, -np.inf).max()
    return float(max(over, under, 0.0))


def erdos_turan_bound(points, m: int, C: float = 1.0) -> float:
    """C (1/m + sum_{h<=m} |mean exp(2 pi i h x)| / h), sums evaluated directly."""
    x = np.asarray(points, dtype=np.float64).ravel()
    if m < 1:
        raise ValueError("m must be positive")
    total = 0.0
    for s in range(1, m + 1, 256):
        h = np.arange(s, min(s + 256, m + 1), dtype=np.float64)
        ph = 2 * np.pi * np.outer(h, x)
        amp = np.abs(np.cos(ph).sum(axis=1) + 1j * np.sin(ph).sum(axis=1)) / len(x)
        total += float(np.sum(amp / h))
    return C * (1.0 / m + total)


def kronecker_erdos_turan_bound(alpha, N: int, m: int, C: float = 1.0) -> float:
    """Erdos-Turan bound for {n alpha + beta}, n <= N, using the geometric-sum
    closed form |sin(pi h N alpha) / (N sin(pi h alpha))| (independent of beta)."""
    h = np.arange(1, m + 1, dtype=np.float64)
    den = np.sin(np.pi * dist_to_nearest_int(frac_multiples(alpha, h)))
    if den.min() <= RATIONAL_TOL:
        raise RationalAlpha("h alpha is numerically an integer")
    num = np.abs(np.sin(np.pi * frac_multiples(alpha, h * N)))
    return C * (1.0 / m + float(np.sum(num / (N * den) / h)))


# ---------------------------------------------------------------- finite type


@dataclass(frozen=True)
class FiniteTypeEstimate:
    alpha: str
    Q: float
    tau_hat: float
    denominators: tuple[int, ...]
    exponents: tuple[float, ...]
    window_start: float


def convergent_denominators(alpha, Q: float) -> list[int]:
    with mpmath.workdps(DPS):
        a = resolve_alpha(alpha)
        x = a - mpmath.floor(a)
        q_prev, q = 0, 1
        out = []
        while True:
            if x == 0:
                raise RationalAlpha("continued fraction terminated: alpha is rational")
            x = 1 / x
            ai = int(mpmath.floor(x))
            x -= ai
            q_prev, q = q, ai * q + q_prev
            if q > Q:
                return out
            out.append(q)
            if len(out) > 400:
                raise ValueError("precision exhausted while expanding the continued fraction")


def finite_type_estimate(alpha, Q: float, window: float = 0.8) -> FiniteTypeEstimate:
    """Estimate the type of alpha from continued-fraction denominators.

    Each denominator q gives the local exponent log(1/||q alpha||)/log q.
    These carry an additive log(const)/log q bias, so the estimate is the
    maximum over denominators in [Q**window, Q] (or the last one if that
    range holds none).
    """
    if Q < 10:
        raise ValueError("Q must be at least 10")
    qs = [q for q in convergent_denominators(alpha, Q) if q >= 2]
    if not qs:
        raise ValueError("no convergent denominator in range")
    with mpmath.workdps(DPS):
        a = resolve_alpha(alpha)
        ex = []
        for q in qs:
            d = abs(q * a - mpmath.nint(q * a))
            if d < mpmath.mpf(10) ** (-DPS + 10):
                raise RationalAlpha("alpha is numerically rational")
            ex.append(float(mpmath.log(1 / d) / mpmath.log(q)))
    lo = Q**window
    tail = [e for q, e in zip(qs, ex) if q >= lo] or [ex[-1]]
    return FiniteTypeEstimate(str(alpha), float(Q), max(tail), tuple(qs), tuple(ex), lo)


# ---------------------------------------------------------------- decay checks


@dataclass(frozen=True)
class DecayCheck:
    alpha: str
    beta: float
    N: tuple[int, ...]
    discrepancies: tuple[float, ...]
    slope: float
    constant: float
    passed: bool


def discrepancy_decay_check(alpha, beta: float, N_list, max_slope: float = -0.85) -> DecayCheck:
    """Fit D_N ~ c N^slope along {n alpha + beta}."""
    Ns = tuple(int(n) for n in N_list)
    D = tuple(exact_discrepancy(kronecker_sequence(alpha, beta, n)).discrepancy for n in Ns)
    slope, icept = fit_power(Ns, D)
    return DecayCheck(str(alpha), beta, Ns, D, slope, math.exp(icept), slope <= max_slope)


def beta_independence(alpha, betas, N_list) -> tuple[float, float]:
    """Largest spread of fitted slopes and relative spread of fitted constants across offsets."""
    checks = [discrepancy_decay_check(alpha, b, N_list) for b in betas]
    s = [c.slope for c in checks]
    c = [c.constant for c in checks]
    return max(s) - min(s), (max(c) - min(c)) / min(c)
