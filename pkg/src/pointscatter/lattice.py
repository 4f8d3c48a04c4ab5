"""Dual lattice of a rectangular 3-torus: norms, shells, Weyl counts, strips.

A torus is described by the three inverse squared side lengths; the squared
norm of the integer vector (x, y, z) is ``inv_a2*x^2 + inv_b2*y^2 + inv_c2*z^2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import arithmetic as ar

COLLISION_RTOL = 1e-12


class NormCollision(ValueError):
    pass


@dataclass(frozen=True)
class TorusSpec:
    inv_a2: float
    inv_b2: float
    inv_c2: float
    finite_type_hint: float | None = None
    label: str = ""
    source: tuple[str, str, str] | None = field(default=None, compare=False)

    def __post_init__(self):
        for v in self.coefficients:
            if not (v > 0 and math.isfinite(v)):
                raise ValueError("inverse squared sides must be positive and finite")

    @classmethod
    def parse(cls, values: Sequence, finite_type_hint=None, label: str = "") -> "TorusSpec":
        """Build from decimal strings, Decimals, Fractions or floats."""
        if len(values) != 3:
            raise ValueError("three coefficients are required")
        src = tuple(str(v).strip() for v in values)
        nums = []
        for v in values:
            if isinstance(v, str):
                v = Decimal(v.strip())
            nums.append(float(v) if not isinstance(v, Fraction) else v.numerator / v.denominator)
        return cls(*nums, finite_type_hint=finite_type_hint, label=label, source=src)

    @classmethod
    def standard(cls) -> "TorusSpec":
        return cls(1.0, 1.0, 1.0, label="standard")

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.inv_a2, self.inv_b2, self.inv_c2], dtype=np.float64)

    @property
    def kind(self) -> str:
        return "standard" if self.inv_a2 == self.inv_b2 == self.inv_c2 == 1.0 else "irrational"

    @property
    def is_standard(self) -> bool:
        return self.kind == "standard"

    @property
    def abc(self) -> float:
        """Product of the side lengths, i.e. the volume over (2 pi)^3 scale."""
        return (self.inv_a2 * self.inv_b2 * self.inv_c2) ** -0.5

    def weyl_main(self, x):
        x = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
        return 4.0 / 3.0 * math.pi * self.abc * x**1.5

    def norm(self, v: Iterable[int]) -> float:
        x, y, z = v
        return self.inv_a2 * x * x + self.inv_b2 * y * y + self.inv_c2 * z * z

    def dot(self, u: Iterable[int], v: Iterable[int]) -> float:
        (x1, y1, z1), (x2, y2, z2) = u, v
        return self.inv_a2 * x1 * x2 + self.inv_b2 * y1 * y2 + self.inv_c2 * z1 * z2


@dataclass(frozen=True, order=True)
class LatticeVector:
    ix: int
    iy: int
    iz: int
    norm: float = field(compare=False)

    @property
    def coords(self) -> tuple[int, int, int]:
        return (self.ix, self.iy, self.iz)


@dataclass(frozen=True)
class NormClass:
    key: tuple
    value: float
    multiplicity: int
    reps: tuple[LatticeVector, ...]


@dataclass(frozen=True)
class WeylCount:
    x: float
    count: int
    main: float
    remainder: float


# ---------------------------------------------------------------- enumeration


def _radius(coef: float, upper: float) -> int:
    return int(math.isqrt(int(max(upper, 0.0) / coef))) + 1


def iter_points(spec: TorusSpec, upper: float, lower: float = -1.0, chunk: int = 1,
                octant: bool = False) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (x, y, z, norm) arrays for lower < norm <= upper, one x-slab at a time."""
    ca, cb, cc = spec.coefficients
    ra, rb, rc = _radius(ca, upper), _radius(cb, upper), _radius(cc, upper)
    ys = np.arange(0 if octant else -rb, rb + 1, dtype=np.int64)
    zs = np.arange(0 if octant else -rc, rc + 1, dtype=np.int64)
    yz = cb * ys[:, None] ** 2 + cc * zs[None, :] ** 2
    Y, Z = np.broadcast_arrays(ys[:, None], zs[None, :])
    xs = range(0 if octant else -ra, ra + 1)
    for x in xs:
        nrm = ca * x * x + yz
        mask = (nrm <= upper) & (nrm > lower)
        if mask.any():
            yield (np.full(int(mask.sum()), x, dtype=np.int64), Y[mask], Z[mask], nrm[mask])


def lattice_points(spec: TorusSpec, upper: float, lower: float = -1.0, octant: bool = False):
    """All points with lower < norm <= upper, sorted by norm then lexicographically."""
    parts = list(iter_points(spec, upper, lower, octant=octant))
    if not parts:
        e = np.zeros(0, dtype=np.int64)
        return e, e, e, np.zeros(0)
    x, y, z, v = (np.concatenate(p) for p in zip(*parts))
    order = np.lexsort((z, y, x, v))
    return x[order], y[order], z[order], v[order]


def enumerate_shell(spec: TorusSpec, lam: float, width: float) -> list[LatticeVector]:
    """Vectors with lam - width < |xi|^2 < lam + width, in lexicographic order."""
    if width <= 0:
        raise ValueError("width must be positive")
    hi = lam + width
    x, y, z, v = lattice_points(spec, hi, lam - width)
    keep = v < hi
    x, y, z, v = x[keep], y[keep], z[keep], v[keep]
    order = np.lexsort((z, y, x))
    return [LatticeVector(int(x[i]), int(y[i]), int(z[i]), float(v[i])) for i in order]


# ---------------------------------------------------------------- norm tables


@dataclass
class NormTable:
    """Distinct norms up to ``ceiling`` with multiplicities and one representative."""

    spec: TorusSpec
    ceiling: float
    values: np.ndarray
    mult: np.ndarray
    reps: np.ndarray  # (k, 3) non-negative representatives
    keys: np.ndarray  # integer identity of each class

    def __len__(self):
        return len(self.values)

    def counting(self, x) -> np.ndarray:
        """N(x) = #{xi : |xi|^2 <= x} for x <= ceiling."""
        x = np.asarray(x, dtype=np.float64)
        if np.any(x > self.ceiling):
            raise ValueError("x beyond the table ceiling")
        cum = np.concatenate([[0], np.cumsum(self.mult)])
        return cum[np.searchsorted(self.values, x, side="right")]

    def window(self, lo: float, hi: float, strict: bool = True) -> slice:
        if strict:
            i = np.searchsorted(self.values, lo, side="right")
            j = np.searchsorted(self.values, hi, side="left")
        else:
            i = np.searchsorted(self.values, lo, side="left")
            j = np.searchsorted(self.values, hi, side="right")
        return slice(int(i), int(j))

    def class_index(self, x, y, z) -> np.ndarray:
        """Row index of the class containing each vector (all must be in the table)."""
        key = class_keys(self.spec, x, y, z)
        idx = np.searchsorted(self._sorted_keys, key)
        return self._key_order[idx]

    def __post_init__(self):
        self._key_order = np.argsort(self.keys, kind="stable")
        self._sorted_keys = self.keys[self._key_order]


def class_keys(spec: TorusSpec, x, y, z) -> np.ndarray:
    x, y, z = (np.abs(np.asarray(t, dtype=np.int64)) for t in (x, y, z))
    if spec.is_standard:
        return x * x + y * y + z * z
    base = np.int64(1 << 20)
    return (x * base + y) * base + z


def build_norm_table(spec: TorusSpec, ceiling: float, rtol: float = COLLISION_RTOL) -> NormTable:
    ceiling = float(ceiling)
    if spec.is_standard:
        nmax = int(math.floor(ceiling))
        r = ar.r3_table(nmax)
        vals = np.nonzero(r)[0]
        x, y, z, v = lattice_points(spec, nmax, octant=True)
        canon = (x >= y) & (y >= z)
        n = v[canon].astype(np.int64)
        first = np.unique(n, return_index=True)[1]
        reps = np.stack([x[canon][first], y[canon][first], z[canon][first]], axis=1)
        return NormTable(spec, ceiling, vals.astype(np.float64), r[vals], reps, vals.astype(np.int64))
    x, y, z, v = lattice_points(spec, ceiling, octant=True)
    mult = 2 ** ((x != 0).astype(np.int64) + (y != 0) + (z != 0))
    gaps = np.diff(v)
    bad = np.nonzero(gaps <= rtol * np.maximum(1.0, v[1:]))[0]
    if len(bad):
        i = int(bad[0])
        raise NormCollision(
            f"norms of ({x[i]},{y[i]},{z[i]}) and ({x[i+1]},{y[i+1]},{z[i+1]}) agree to "
            f"{gaps[i]:.3g}; the coefficients are not numerically independent")
    keys = class_keys(spec, x, y, z)
    return NormTable(spec, ceiling, v, mult, np.stack([x, y, z], axis=1), keys)


def norm_classes_up_to(spec: TorusSpec, X: float, rtol: float = COLLISION_RTOL) -> list[NormClass]:
    """Norm classes with value <= X, ascending.  Standard classes list every
    representative with x >= y >= z >= 0."""
    table = build_norm_table(spec, X, rtol)
    if spec.is_standard:
        x, y, z, v = lattice_points(spec, X, octant=True)
        canon = (x >= y) & (y >= z)
        groups: dict[int, list[LatticeVector]] = {}
        for a, b, c, n in zip(x[canon], y[canon], z[canon], v[canon]):
            groups.setdefault(int(n), []).append(LatticeVector(int(a), int(b), int(c), float(n)))
        return [NormClass((int(n),), float(n), int(m), tuple(sorted(groups[int(n)])))
                for n, m in zip(table.values, table.mult)]
    out = []
    for (a, b, c), val, m in zip(table.reps, table.values, table.mult):
        lv = LatticeVector(int(a), int(b), int(c), float(val))
        out.append(NormClass((int(a) ** 2, int(b) ** 2, int(c) ** 2), float(val), int(m), (lv,)))
    return out


def write_norm_table_csv(table: NormTable, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["norm", "multiplicity", "rep_x", "rep_y", "rep_z"])
    for v, m, (a, b, c) in zip(table.values, table.mult, table.reps):
        w.writerow([f"{v:.17g}", int(m), int(a), int(b), int(c)])


# ---------------------------------------------------------------- Weyl law


def weyl_count(spec: TorusSpec, x: float, table: NormTable | None = None) -> WeylCount:
    if x < 0:
        return WeylCount(x, 0, 0.0, 0.0)
    if table is None or table.ceiling < x:
        table = build_norm_table(spec, x)
    count = int(table.counting(x))
    main = float(spec.weyl_main(x))
    return WeylCount(x, count, main, count - main)


def weyl_remainder_profile(table: NormTable, xmin: float = 1.0, xmax: float | None = None):
    """Remainder N(x) - main(x) at both sides of each jump in [xmin, xmax].

    Between consecutive norms the remainder is monotone, so these values
    contain its extremes.  Returns (x, remainder_right, remainder_left).
    """
    xmax = table.ceiling if xmax is None else xmax
    sl = table.window(xmin, xmax, strict=False)
    cum = np.cumsum(table.mult)
    x = table.values[sl]
    right = cum[sl] - table.spec.weyl_main(x)
    left = right - table.mult[sl]
    return x, right, left


def weyl_remainder_constant(table: NormTable, theta: float = 0.75, xmin: float = 1.0,
                            xmax: float | None = None) -> float:
    """sup |N(x) - main(x)| / x^theta over the jump points in [xmin, xmax]."""
    x, right, left = weyl_remainder_profile(table, xmin, xmax)
    if x.size == 0:
        return 0.0
    return float(np.max(np.maximum(np.abs(right), np.abs(left)) / x**theta))


# ---------------------------------------------------------------- strips


def _zeta(zeta) -> tuple[int, int, int]:
    z = tuple(int(v) for v in zeta)
    if len(z) != 3:
        raise ValueError("zeta must have three integer coordinates")
    return z


def circle_count(n: int, zeta, m: int) -> int:
    """#{eta in Z^3 : |eta|^2 = n, <eta, zeta> = m} on the standard lattice."""
    z1, z2, z3 = _zeta(zeta)
    return sum(1 for p in ar.sphere_points(n) if p[0] * z1 + p[1] * z2 + p[2] * z3 == m)


def strip_count(n: int, zeta, bound: float) -> int:
    """#{eta : |eta|^2 = n, |<eta, zeta>| < bound} by direct enumeration."""
    z1, z2, z3 = _zeta(zeta)
    return sum(1 for p in ar.sphere_points(n) if abs(p[0] * z1 + p[1] * z2 + p[2] * z3) < bound)


@dataclass(frozen=True)
class StripReduction:
    a: int
    b: int
    c: int
    d: int
    e: int
    f: int
    D: int
    t: int
    k: int


def strip_reduction(zeta, n: int, m: int) -> StripReduction:
    """Coefficients of the plane section {|eta|^2 = n, <eta, zeta> = m}.

    Eliminating the third coordinate gives a x^2 + 2b xy + c y^2 + 2d x + 2e y + f = 0,
    and completing squares maps its integer points injectively into
    solutions of X^2 + D Y^2 = k with ac - b^2 = t^2 D.
    """
    z1, z2, z3 = _zeta(zeta)
    if z3 == 0:
        raise ValueError("third coordinate of zeta must be non-zero; permute coordinates first")
    a = z1 * z1 + z3 * z3
    b = z1 * z2
    c = z2 * z2 + z3 * z3
    d = -z1 * m
    e = -z2 * m
    f = -z3 * z3 * n + m * m
    disc = a * c - b * b
    t, D = ar.squarefree_decomposition(disc)
    k = disc * (-c * f + e * e) + (c * d - b * e) ** 2
    return StripReduction(a, b, c, d, e, f, D, t, k)


def _move_nonzero_last(zeta) -> tuple[int, int, int]:
    z = _zeta(zeta)
    if z[2]:
        return z
    if z[1]:
        return (z[0], z[2], z[1])
    if z[0]:
        return (z[2], z[1], z[0])
    raise ValueError("zeta must be non-zero")


def strip_count_bound(n: int, zeta, bound: float) -> int:
    """Upper bound for strip_count via the binary-form reduction."""
    z = _move_nonzero_last(zeta)
    total = 0
    mmax = math.ceil(bound) - 1
    for m in range(-mmax, mmax + 1):
        if abs(m) >= bound:
            continue
        red = strip_reduction(z, n, m)
        if red.k > 0:
            total += min(6 * ar.divisor_count(red.k), ar.rep_count_binary(red.k, red.D))
        elif red.k == 0:
            total += circle_count(n, z, m)
    return total


# ---------------------------------------------------------------- near-resonant sets


def s_zeta_width(spec: TorusSpec, zeta) -> float:
    """Half-width of the slab defining S_zeta, taken along the last non-zero axis."""
    z = _zeta(zeta)
    if z[2]:
        return spec.inv_c2 / 4.0
    if z[1]:
        return spec.inv_b2 / 4.0
    if z[0]:
        return spec.inv_a2 / 4.0
    raise ValueError("zeta must be non-zero")


def in_s_zeta(spec: TorusSpec, zeta, x, y, z) -> np.ndarray:
    """Vectorised membership test for S_zeta (norm >= 1 and slab condition)."""
    z1, z2, z3 = _zeta(zeta)
    ca, cb, cc = spec.coefficients
    x, y, z = (np.asarray(t, dtype=np.float64) for t in (x, y, z))
    nrm = ca * x * x + cb * y * y + cc * z * z
    u = ca * z1 * (2 * x - z1) + cb * z2 * (2 * y - z2) + cc * z3 * (2 * z - z3)
    return (nrm >= 1.0) & (np.abs(u) < s_zeta_width(spec, zeta))


def count_S_zeta(spec: TorusSpec, zeta, X: float) -> int:
    """#{xi in S_zeta : |xi|^2 <= X}.

    The slab condition pins the coordinate on the designated axis: for each
    choice of the other two coordinates at most one integer value remains.
    """
    z = _zeta(zeta)
    if z == (0, 0, 0):
        raise ValueError("zeta must be non-zero")
    axis = 2 if z[2] else (1 if z[1] else 0)
    coef = spec.coefficients
    others = [i for i in range(3) if i != axis]
    w = s_zeta_width(spec, z)
    za = z[axis]
    r0 = _radius(coef[others[0]], X)
    r1 = _radius(coef[others[1]], X)
    p = np.arange(-r0, r0 + 1, dtype=np.int64)[:, None]
    q = np.arange(-r1, r1 + 1, dtype=np.int64)[None, :]
    i0, i1 = others
    rest = coef[i0] * z[i0] * (2 * p - z[i0]) + coef[i1] * z[i1] * (2 * q - z[i1])
    # u = rest + coef[axis]*za*(2s - za); integer j = za*(2s - za) must sit within w/coef of -rest/coef
    target = -rest / coef[axis]
    j = np.rint(target)
    ok = np.abs(coef[axis] * j + rest) < w
    # s = (j/za + za)/2 must be an integer
    num = j.astype(np.int64) + za * za
    ok &= num % (2 * za) == 0
    s = num // (2 * za)
    nrm = coef[i0] * p * p + coef[i1] * q * q + coef[axis] * s * s
    ok &= (nrm >= 1.0) & (nrm <= X)
    return int(ok.sum())


def count_S_zeta_bruteforce(spec: TorusSpec, zeta, X: float) -> int:
    total = 0
    for x, y, z, v in iter_points(spec, X):
        total += int(in_s_zeta(spec, zeta, x, y, z).sum())
    return total


@dataclass(frozen=True)
class PairCount:
    X: float
    delta: float
    width: float
    total: int  # off-diagonal pairs
    by_zero_coords: dict  # number of j with xi_j^2 == eta_j^2 -> count
    diagonal: int = 0  # pairs xi = eta, all of which qualify

    @property
    def with_diagonal(self) -> int:
        return self.total + self.diagonal


def count_near_resonant_pairs(spec: TorusSpec, X: float, delta: float,
                              chunk: int = 4096) -> PairCount:
    """Ordered pairs xi != eta with |xi|^2, |eta|^2 <= 4X and
    | |xi|^2 - |eta|^2 | < 4 X^-delta, split by how many coordinates have
    xi_j^2 = eta_j^2."""
    width = 4.0 * X ** (-delta)
    x, y, z, v = lattice_points(spec, 4.0 * X)
    lo = np.searchsorted(v, v - width, side="right")
    hi = np.searchsorted(v, v + width, side="left")
    sq = np.stack([x * x, y * y, z * z], axis=1)
    hist = np.zeros(4, dtype=np.int64)
    for s in range(0, len(v), chunk):
        e = min(s + chunk, len(v))
        cnt = hi[s:e] - lo[s:e]
        src = np.repeat(np.arange(s, e), cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        dst = np.repeat(lo[s:e], cnt) + offs
        keep = src != dst
        src, dst = src[keep], dst[keep]
        zeros = (sq[src] == sq[dst]).sum(axis=1)
        hist += np.bincount(zeros, minlength=4)
    return PairCount(X, delta, width, int(hist.sum()), {i: int(hist[i]) for i in range(4)}, len(v))


def count_near_resonant_pairs_bruteforce(spec: TorusSpec, X: float, delta: float) -> PairCount:
    width = 4.0 * X ** (-delta)
    x, y, z, v = lattice_points(spec, 4.0 * X)
    sq = np.stack([x * x, y * y, z * z], axis=1)
    hist = np.zeros(4, dtype=np.int64)
    idx = np.arange(len(v))
    for i in range(len(v)):
        m = (np.abs(v - v[i]) < width) & (idx != i)
        zeros = (sq[m] == sq[i]).sum(axis=1)
        hist += np.bincount(zeros, minlength=4)
    return PairCount(X, delta, width, int(hist.sum()), {i: int(hist[i]) for i in range(4)}, len(v))
