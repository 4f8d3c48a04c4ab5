"""Integer arithmetic for sums of three squares and binary quadratic forms.

Scalar routines are exact (Python integers).  The ``*_table`` variants are
vectorised with numpy and are used where whole ranges are needed.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class EmptyNormSet(ValueError):
    pass


class NotRepresentable(ValueError):
    pass


@dataclass(frozen=True)
class ThreeSquares:
    n: int
    a: int  # exponent of 4
    n1: int  # n / 4**a
    representable: bool


@dataclass(frozen=True)
class CharacterSpec:
    """The quadratic character m -> (-4n / m)."""

    n: int

    @property
    def discriminant(self) -> int:
        return -4 * self.n

    @property
    def modulus(self) -> int:
        return 4 * self.n

    def __call__(self, m: int) -> int:
        return kronecker(self.discriminant, m)


@dataclass(frozen=True)
class GaussEstimate:
    n: int
    value: float
    error: float  # bound on |value - R3(n)|
    genus_factor: int
    terms: int
    applicable: bool


class FourPowerClass(str, Enum):
    N0 = "N0"
    N1 = "N1"


def _check_nonneg(n: int, name: str = "n") -> int:
    if isinstance(n, bool) or int(n) != n:
        raise TypeError(f"{name} must be an integer")
    n = int(n)
    if n < 0:
        raise ValueError(f"{name} must be non-negative, got {n}")
    return n


def four_adic(n: int) -> tuple[int, int]:
    """Return (a, n1) with n = 4**a * n1 and 4 not dividing n1 (n > 0)."""
    a = 0
    while n % 4 == 0:
        n //= 4
        a += 1
    return a, n


def classify_three_squares(n: int) -> ThreeSquares:
    n = _check_nonneg(n)
    if n == 0:
        return ThreeSquares(0, 0, 0, True)
    a, n1 = four_adic(n)
    return ThreeSquares(n, a, n1, n1 % 8 != 7)


def is_three_squares(n: int) -> bool:
    return classify_three_squares(n).representable


def _sphere_points(n: int):
    """Yield all (x, y, z) in Z^3 with x^2 + y^2 + z^2 = n."""
    r = math.isqrt(n)
    for x in range(-r, r + 1):
        m = n - x * x
        s = math.isqrt(m)
        for y in range(-s, s + 1):
            w = m - y * y
            z = math.isqrt(w)
            if z * z == w:
                yield (x, y, z)
                if z:
                    yield (x, y, -z)


def sphere_points(n: int) -> list[tuple[int, int, int]]:
    n = _check_nonneg(n)
    return sorted(_sphere_points(n))


def r3(n: int) -> int:
    """Number of ordered signed representations n = x^2 + y^2 + z^2."""
    n = _check_nonneg(n)
    if n == 0:
        return 1
    total = 0
    r = math.isqrt(n)
    for x in range(-r, r + 1):
        m = n - x * x
        s = math.isqrt(m)
        for y in range(-s, s + 1):
            w = m - y * y
            z = math.isqrt(w)
            if z * z == w:
                total += 2 if z else 1
    return total


def primitive_r3(n: int) -> int:
    """Representations with gcd(x, y, z) = 1.  R3(0) = 0 by convention."""
    n = _check_nonneg(n)
    if n == 0:
        return 0
    return sum(1 for p in _sphere_points(n) if math.gcd(math.gcd(p[0], p[1]), p[2]) == 1)


def _box_squares(nmax: int):
    r = math.isqrt(nmax)
    k = np.arange(-r, r + 1, dtype=np.int64)
    return k, k * k


def r3_table(nmax: int) -> np.ndarray:
    """r3(n) for 0 <= n <= nmax, built from r1 by shifted accumulation."""
    nmax = _check_nonneg(nmax, "nmax")
    r1 = np.zeros(nmax + 1, dtype=np.int64)
    k, sq = _box_squares(nmax)
    np.add.at(r1, sq, 1)
    r2 = np.zeros_like(r1)
    for s in sq:
        r2[s:] += r1[: nmax + 1 - s]
    out = np.zeros_like(r1)
    for s in sq:
        out[s:] += r2[: nmax + 1 - s]
    return out


def r3_table_bruteforce(nmax: int, primitive: bool = False) -> np.ndarray:
    """Direct box enumeration.  Used as an oracle, memory grows like nmax**1.5."""
    nmax = _check_nonneg(nmax, "nmax")
    k, sq = _box_squares(nmax)
    out = np.zeros(nmax + 1, dtype=np.int64)
    for i, x in enumerate(k):
        norms = sq[i] + sq[:, None] + sq[None, :]
        mask = norms <= nmax
        if primitive:
            g = np.gcd(np.gcd(abs(x), np.abs(k)[:, None]), np.abs(k)[None, :])
            mask &= g == 1
        out += np.bincount(norms[mask], minlength=nmax + 1)
    return out


def r3_from_primitive(n: int, primitive: Sequence[int]) -> int:
    """Sum of primitive[n // d^2] over d with d^2 | n."""
    if n == 0:
        return 1
    total = 0
    d = 1
    while d * d <= n:
        if n % (d * d) == 0:
            total += int(primitive[n // (d * d)])
        d += 1
    return total


def kronecker(a: int, m: int) -> int:
    """Kronecker symbol (a / m) for integer a and m >= 0."""
    a, m = int(a), int(m)
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and m % 2 == 0:
        return 0
    v = 0
    while m % 2 == 0:
        m //= 2
        v += 1
    k = 1
    if v % 2 and a % 8 in (3, 5):
        k = -k
    # m odd and positive: Jacobi symbol
    a %= m
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                k = -k
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            k = -k
        a %= m
    return k if m == 1 else 0


def genus_factor(n: int) -> int:
    r = n % 8
    if r in (0, 4, 7):
        return 0
    return 16 if r == 3 else 24


def gauss_R3(n: int, terms: int) -> GaussEstimate:
    """Estimate R3(n) from the class-number formula with a truncated L-series.

    The tail of sum chi(m)/m beyond ``terms`` is bounded by summation by
    parts: partial character sums are at most 2n in absolute value, so the
    tail is below 4n/terms.
    """
    n = _check_nonneg(n)
    if n == 0:
        raise ValueError("n must be positive")
    terms = int(terms)
    if terms < 4 * n:
        raise ValueError(f"terms must be at least 4n = {4 * n}")
    g = genus_factor(n)
    if g == 0:
        return GaussEstimate(n, 0.0, 0.0, 0, terms, n % 8 == 7)
    period = 4 * n
    chi = np.array([kronecker(-4 * n, m) for m in range(1, period + 1)], dtype=np.float64)
    reps = -(-terms // period)
    m = np.arange(1, reps * period + 1, dtype=np.float64)[:terms]
    vals = np.tile(chi, reps)[:terms]
    partial = math.fsum(vals / m)
    scale = g * math.sqrt(n) / math.pi
    return GaussEstimate(n, scale * partial, scale * 4 * n / terms, g, terms, True)


def divisor_count(k: int) -> int:
    k = _check_nonneg(k, "k")
    if k == 0:
        raise ValueError("divisor_count(0) is undefined")
    total = 1
    p = 2
    while p * p <= k:
        e = 0
        while k % p == 0:
            k //= p
            e += 1
        total *= e + 1
        p += 1 if p == 2 else 2
    if k > 1:
        total *= 2
    return total


def divisor_count_table(kmax: int) -> np.ndarray:
    """tau(k) for 0 <= k <= kmax (entry 0 is 0)."""
    kmax = _check_nonneg(kmax, "kmax")
    tau = np.zeros(kmax + 1, dtype=np.int64)
    d = 1
    while d * d <= kmax:
        tau[d * d :: d] += 2
        tau[d * d] -= 1
        d += 1
    return tau


def is_squarefree(d: int) -> bool:
    if d < 1:
        return False
    p = 2
    while p * p <= d:
        if d % (p * p) == 0:
            return False
        p += 1
    return True


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return (t, D) with n = t^2 * D and D squarefree (n > 0)."""
    if n < 1:
        raise ValueError("n must be positive")
    t = 1
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            t *= p
        p += 1
    return t, n


def rep_count_binary(k: int, D: int) -> int:
    """#{(x, y) in Z^2 : x^2 + D y^2 = k} for squarefree D >= 1."""
    k = _check_nonneg(k, "k")
    if not is_squarefree(int(D)):
        raise ValueError(f"D must be squarefree and positive, got {D}")
    total = 0
    y = 0
    while D * y * y <= k:
        w = k - D * y * y
        x = math.isqrt(w)
        if x * x == w:
            total += (2 if x else 1) * (2 if y else 1)
        y += 1
    return total


def rep_count_binary_table(D: int, kmax: int) -> np.ndarray:
    """rep_count_binary(k, D) for 0 <= k <= kmax."""
    if not is_squarefree(int(D)):
        raise ValueError(f"D must be squarefree and positive, got {D}")
    kmax = _check_nonneg(kmax, "kmax")
    out = np.zeros(kmax + 1, dtype=np.int64)
    x = np.arange(math.isqrt(kmax) + 1, dtype=np.int64)
    wx = np.where(x > 0, 2, 1)
    ymax = math.isqrt(kmax // D)
    # batch several y per bincount so each pass touches a few million pairs
    batch = max(1, 4_000_000 // len(x))
    for y0 in range(0, ymax + 1, batch):
        y = np.arange(y0, min(y0 + batch, ymax + 1), dtype=np.int64)
        v = (x[None, :] * x[None, :] + D * y[:, None] * y[:, None]).ravel()
        w = (wx[None, :] * np.where(y > 0, 2, 1)[:, None]).ravel()
        keep = v <= kmax
        out += np.bincount(v[keep], weights=w[keep], minlength=kmax + 1).astype(np.int64)
    return out


def four_power_class(n: int, zeta: Iterable[int]) -> FourPowerClass:
    """N0 if the 4-adic exponent of n exceeds that of |zeta|^2, else N1."""
    n = _check_nonneg(n)
    z = tuple(int(v) for v in zeta)
    zn = sum(v * v for v in z)
    if zn == 0:
        raise ValueError("zeta must be non-zero")
    if n == 0 or not is_three_squares(n):
        raise NotRepresentable(f"{n} is not a positive sum of three squares")
    return FourPowerClass.N0 if four_adic(n)[0] > four_adic(zn)[0] else FourPowerClass.N1


def nearest_norm(lam: float, norm_set: Sequence[float]) -> float:
    """Closest element of a sorted set; ties go to the smaller element."""
    if len(norm_set) == 0:
        raise EmptyNormSet("norm set is empty")
    i = bisect_left(norm_set, lam)
    if i == 0:
        return norm_set[0]
    if i == len(norm_set):
        return norm_set[-1]
    lo, hi = norm_set[i - 1], norm_set[i]
    return lo if lam - lo <= hi - lam else hi


def three_square_norms(nmax: int) -> list[int]:
    """Sorted non-negative integers up to nmax that are sums of three squares."""
    return [n for n in range(nmax + 1) if is_three_squares(n)]
