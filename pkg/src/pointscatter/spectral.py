"""Perturbed eigenvalues, Green's function norms and matrix elements.

Lattice sums are split at a fixed cutoff T.  Terms with |xi|^2 <= T are
summed class by class; the rest is replaced by the Weyl density
2 pi abc t^(1/2) dt plus an exact boundary correction at T.  The remainder
is bounded by C_rem * int |f'(t)| t^theta dt with theta = 3/4 and C_rem
measured from the lattice counts below T.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .lattice import NormTable, TorusSpec, build_norm_table, iter_points, lattice_points, weyl_remainder_constant

THETA = 0.75
REMAINDER_SAFETY = 1.5
POLE_RTOL = 1e-12
RESIDUAL_TOL = 1e-8
PHASE_MARGIN = 1e-6


class PoleProximity(ValueError):
    pass


class BracketFailure(RuntimeError):
    pass


class DegenerateWindow(ValueError):
    pass


class ClusterWarning(UserWarning):
    pass


class InvalidPhase(ValueError):
    pass


@dataclass(frozen=True)
class TailEstimate:
    value: float
    error: float


@dataclass(frozen=True)
class RegularizationConstant:
    value: float
    partial: float
    tail: float
    error: float
    cutoff: float


@dataclass(frozen=True)
class SecularValue:
    lam: float
    value: float
    derivative: float
    tail_error: float


@dataclass(frozen=True)
class PerturbedEigenvalue:
    k: int
    lam: float
    bracket_lo: float
    bracket_hi: float
    residual: float
    cluster: bool = False


@dataclass(frozen=True)
class GreensNorm:
    lam: float
    value: float
    tail_error: float
    window: float | None
    degenerate: bool = False


@dataclass(frozen=True)
class TruncationGap:
    lam: float
    window: float
    gap: float
    gap_sq: float
    bound: float  # 2 ||G - G_L|| / ||G||


@dataclass(frozen=True)
class MatrixElement:
    lam: float
    zeta: tuple[int, int, int]
    mode: str
    window: float | None
    value: float
    tail_bound: float


# ---------------------------------------------------------------- tail integrals


def _atanh_ratio(lam: float, s: float) -> float:
    """atanh(sqrt(lam)/s)/sqrt(lam), continued to lam <= 0 as arctan."""
    x = lam / (s * s)
    if abs(x) < 1e-8:
        return (1.0 + x / 3.0) / s
    if lam > 0:
        r = math.sqrt(lam)
        return math.atanh(r / s) / r
    r = math.sqrt(-lam)
    return math.atan(r / s) / r


@lru_cache(maxsize=256)
def _quartic_tail(s: float) -> float:
    """int_s^inf 2/(u^4+1) du."""
    if s > 50:
        return 2.0 * (1 / (3 * s**3) - 1 / (7 * s**7) + 1 / (11 * s**11))
    return integrate.quad(lambda u: 2.0 / (u**4 + 1.0), s, np.inf, epsabs=1e-15, epsrel=1e-13)[0]


@lru_cache(maxsize=256)
def _quartic_plus_tail(t: float) -> float:
    """int_t^inf sqrt(x)/(x^2+1) dx."""
    s = math.sqrt(t)
    return 2.0 * integrate.quad(lambda u: u * u / (u**4 + 1.0), s, np.inf, epsabs=1e-15, epsrel=1e-13)[0]


def _fvalue(fkind: str, t: float, lam: float) -> float:
    if fkind == "inv_sq":
        return 1.0 / (t - lam) ** 2
    if fkind == "inv_quartic_plus":
        return 1.0 / (t * t + 1.0)
    if fkind == "secular":
        return 1.0 / (t - lam) - t / (t * t + 1.0)
    raise ValueError(f"unknown integrand {fkind!r}")


def _derivative_moment_bound(fkind: str, t: float, lam: float) -> float:
    """Upper bound for int_t^inf |f'(x)| x^theta dx."""
    th = THETA
    d = t - lam
    if fkind == "inv_sq":
        # |f'| = 2/(x-lam)^3 and x^theta <= lam^theta + (x-lam)^theta for lam >= 0
        head = lam**th / d**2 if lam > 0 else 0.0
        return head + 2.0 * d ** (th - 2) / (2 - th)
    if fkind == "inv_quartic_plus":
        return 2.0 * t ** (th - 2) / (2 - th)
    if fkind == "secular":
        head = lam**th / d if lam > 0 else 0.0
        return head + d ** (th - 1) / (1 - th) + t ** (th - 1) / (1 - th)
    raise ValueError(f"unknown integrand {fkind!r}")


def _main_integral(fkind: str, start: float, spec: TorusSpec, lam: float, quad: bool) -> float:
    scale = 2.0 * math.pi * spec.abc
    if quad:
        g = lambda t: _fvalue(fkind, t, lam) * math.sqrt(t)
        val = integrate.quad(g, start, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)[0]
        return scale * val
    s = math.sqrt(start)
    if fkind == "inv_sq":
        return scale * (s / (start - lam) + _atanh_ratio(lam, s))
    if fkind == "inv_quartic_plus":
        return scale * _quartic_plus_tail(start)
    if fkind == "secular":
        return scale * (2.0 * lam * _atanh_ratio(lam, s) + _quartic_tail(s))
    raise ValueError(f"unknown integrand {fkind!r}")


def tail_integral(fkind: str, start: float, spec: TorusSpec, lam: float = 0.0, *,
                  c_rem: float = 1.0, count_at_start: int | None = None,
                  quad: bool = False) -> TailEstimate:
    """Estimate sum over |xi|^2 > start of f(|xi|^2).

    ``fkind`` is one of ``inv_sq`` (1/(t-lam)^2), ``inv_quartic_plus``
    (1/(t^2+1)) or ``secular`` (1/(t-lam) - t/(t^2+1)).  When the exact
    count N(start) is supplied the boundary term (main(start) - N(start)) f(start)
    is added and the corresponding part of the error bound is dropped.
    """
    if fkind in ("inv_sq", "secular") and not start > lam + 1:
        raise ValueError("tail must start beyond lam + 1")
    if start <= 0:
        raise ValueError("start must be positive")
    value = _main_integral(fkind, start, spec, lam, quad)
    fT = _fvalue(fkind, start, lam)
    err = c_rem * _derivative_moment_bound(fkind, start, lam)
    if count_at_start is None:
        err += c_rem * start**THETA * abs(fT)
    else:
        value += (float(spec.weyl_main(start)) - count_at_start) * fT
    return TailEstimate(value, err)


# ---------------------------------------------------------------- context


def regularization_constant(spec: TorusSpec, cutoff: float, table: NormTable | None = None,
                            c_rem: float | None = None) -> RegularizationConstant:
    """Sum of 1/(|xi|^4 + 1) over the dual lattice."""
    if table is None or table.ceiling < cutoff:
        table = build_norm_table(spec, cutoff)
    sl = table.window(-1.0, cutoff, strict=False)
    v, m = table.values[sl], table.mult[sl]
    partial = math.fsum(m / (v * v + 1.0))
    if c_rem is None:
        c_rem = REMAINDER_SAFETY * weyl_remainder_constant(table, THETA, xmax=max(cutoff, 1.0))
    tail = tail_integral("inv_quartic_plus", cutoff, spec, c_rem=c_rem,
                         count_at_start=int(m.sum()))
    return RegularizationConstant(partial + tail.value, partial, tail.value, tail.error, cutoff)


@dataclass(frozen=True)
class SpectralContext:
    spec: TorusSpec
    phi: float
    c0: float
    table: NormTable
    c_rem: float
    lam_max: float
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def target(self) -> float:
        return self.c0 * math.tan(self.phi / 2.0)

    @property
    def cutoff(self) -> float:
        return self.table.ceiling

    @property
    def norm_table(self) -> NormTable:
        return self.table

    def _head(self):
        h = self._cache.get("head")
        if h is None:
            v = self.table.values
            r = self.table.mult.astype(np.float64)
            shift = math.fsum(r * v / (v * v + 1.0))
            h = (v, r, shift, int(self.table.mult.sum()))
            self._cache["head"] = h
        return h


def make_context(spec: TorusSpec, phi: float, lam_max: float, cutoff: float | None = None,
                 table: NormTable | None = None) -> SpectralContext:
    """Prepare everything needed for eigenvalues and Green's functions up to lam_max.

    The head/tail split sits at ``cutoff`` (default max(4 lam_max, 1000)).
    """
    if not math.isfinite(phi) or abs(phi) >= math.pi - PHASE_MARGIN:
        raise InvalidPhase(f"phase {phi} is outside (-pi, pi)")
    if cutoff is None:
        cutoff = max(4.0 * lam_max, 1000.0)
    if cutoff < 2.0 * lam_max + 2.0:
        raise ValueError("cutoff must be at least 2 lam_max + 2")
    if table is None or table.ceiling < cutoff or table.spec != spec:
        table = build_norm_table(spec, cutoff)
    elif table.ceiling > cutoff:
        sl = table.window(-1.0, cutoff, strict=False)
        table = NormTable(spec, cutoff, table.values[sl], table.mult[sl], table.reps[sl], table.keys[sl])
    c_rem = REMAINDER_SAFETY * weyl_remainder_constant(table, THETA)
    c0 = regularization_constant(spec, cutoff, table, c_rem).value
    if not c0 > 0:
        raise ValueError("regularisation constant must be positive")
    return SpectralContext(spec, float(phi), c0, table, c_rem, float(lam_max))


def _check_pole(ctx: SpectralContext, lam: float) -> None:
    v = ctx.table.values
    i = np.searchsorted(v, lam)
    for j in (i - 1, i):
        if 0 <= j < len(v) and abs(v[j] - lam) <= POLE_RTOL * max(1.0, v[j]):
            raise PoleProximity(f"lambda={lam!r} is within {POLE_RTOL:g} of the norm {v[j]!r}")
    if lam > ctx.cutoff - 1:
        raise ValueError(f"lambda={lam} too close to the cutoff {ctx.cutoff}")


# ---------------------------------------------------------------- secular equation


def _secular_tail(ctx: SpectralContext, lam: float) -> tuple[float, float]:
    T = ctx.cutoff
    s = math.sqrt(T)
    spec = ctx.spec
    scale = 2.0 * math.pi * spec.abc
    _, _, _, count = ctx._head()
    bnd = float(spec.weyl_main(T)) - count
    val = scale * (2.0 * lam * _atanh_ratio(lam, s) + _quartic_tail(s)) + bnd * _fvalue("secular", T, lam)
    der = scale * (s / (T - lam) + _atanh_ratio(lam, s)) + bnd / (T - lam) ** 2
    return val, der


def _secular(ctx: SpectralContext, lam: float) -> tuple[float, float]:
    v, r, shift, _ = ctx._head()
    inv = 1.0 / (v - lam)
    tv, td = _secular_tail(ctx, lam)
    return float(np.dot(r, inv)) - shift + tv, float(np.dot(r, inv * inv)) + td


def secular_F(ctx: SpectralContext, lam: float) -> SecularValue:
    _check_pole(ctx, lam)
    val, der = _secular(ctx, lam)
    err = ctx.c_rem * _derivative_moment_bound("secular", ctx.cutoff, lam)
    return SecularValue(lam, val, der, err)


def _root_in(ctx: SpectralContext, lo: float, hi: float, target: float) -> tuple[float, float]:
    """Root of F - target in the open pole interval (lo, hi)."""
    a, b = lo, hi
    x = 0.5 * (a + b)
    tol = 1e-13 * max(1.0, abs(x))
    for _ in range(400):
        g, dg = _secular(ctx, x)
        g -= target
        if g == 0.0:
            return x, 0.0
        if g < 0:
            a = x
        else:
            b = x
        step = g / dg
        xn = x - step
        if not (a < xn < b):
            xn = 0.5 * (a + b)
        if abs(xn - x) <= 1e-15 * max(1.0, abs(x)) or b - a <= tol:
            x = xn if a < xn < b else x
            break
        x = xn
    # polish
    for _ in range(3):
        g, dg = _secular(ctx, x)
        xn = x - (g - target) / dg
        if lo < xn < hi:
            x = xn
    g, _ = _secular(ctx, x)
    return x, abs(g - target)


def solve_eigenvalues(ctx: SpectralContext, X: float) -> list[PerturbedEigenvalue]:
    """One eigenvalue per pole interval: lambda_0 < 0 and lambda_k in (n_{k-1}, n_k)
    for every norm n_k <= X."""
    if X > ctx.cutoff / 2:
        raise ValueError("X exceeds half the context cutoff; build a larger context")
    v = ctx.table.values
    target = ctx.target
    out = []
    # lambda_0 on (-inf, 0)
    lo = None
    for j in range(61):
        a = -(2.0**j)
        if _secular(ctx, a)[0] - target < 0:
            lo = a
            break
    if lo is None:
        raise BracketFailure("no sign change found for the ground state")
    lam0, res0 = _root_in(ctx, lo, 0.0, target)
    out.append(PerturbedEigenvalue(0, lam0, lo, 0.0, res0))
    kmax = int(np.searchsorted(v, X, side="right"))
    for k in range(1, kmax):
        a, b = float(v[k - 1]), float(v[k])
        cluster = b - a <= 2 * POLE_RTOL * max(1.0, b)
        if cluster:
            warnings.warn(f"poles {a!r} and {b!r} are numerically coincident", ClusterWarning)
            lam, res = 0.5 * (a + b), float("nan")
        else:
            lam, res = _root_in(ctx, a, b, target)
            cluster = min(lam - a, b - lam) <= POLE_RTOL * max(1.0, b)
        if not (a < lam < b):
            raise BracketFailure(f"root escaped the interval ({a}, {b})")
        out.append(PerturbedEigenvalue(k, lam, a, b, res, cluster))
    return out


def eigenvalue_array(eigs: list[PerturbedEigenvalue]) -> np.ndarray:
    return np.array([e.lam for e in eigs])


# ---------------------------------------------------------------- Green's function


def greens_norm_sq(ctx: SpectralContext, lam: float, window: float | None = None) -> GreensNorm:
    """Sum over xi of 1/(|xi|^2 - lam)^2, optionally restricted to | |xi|^2 - lam | < window."""
    _check_pole(ctx, lam)
    v, r, _, count = ctx._head()
    if window is not None:
        sl = ctx.table.window(lam - window, lam + window)
        if lam + window > ctx.cutoff:
            raise ValueError("window extends beyond the cutoff")
        d = v[sl] - lam
        val = float(np.dot(r[sl], 1.0 / (d * d)))
        return GreensNorm(lam, val, 0.0, window, degenerate=(sl.stop == sl.start))
    d = v - lam
    head = float(np.dot(r, 1.0 / (d * d)))
    tail = tail_integral("inv_sq", ctx.cutoff, ctx.spec, lam, c_rem=ctx.c_rem, count_at_start=count)
    return GreensNorm(lam, head + tail.value, tail.error, None)


def truncation_gap(ctx: SpectralContext, lam: float, window: float) -> TruncationGap:
    """|| g - g_L || for the normalised Green's function and its windowed version."""
    full = greens_norm_sq(ctx, lam)
    inner = greens_norm_sq(ctx, lam, window)
    if inner.degenerate:
        raise DegenerateWindow(f"no norms within {window} of {lam}")
    outer = max(full.value - inner.value, 0.0)
    # recompute the complement directly to avoid cancellation
    v, r, _, _ = ctx._head()
    sl = ctx.table.window(lam - window, lam + window)
    d = v - lam
    w = r / (d * d)
    outer = float(w[: sl.start].sum() + w[sl.stop :].sum()) + (full.value - float(np.dot(r, 1.0 / (d * d))))
    t = min(max(outer / full.value, 0.0), 1.0)
    gap_sq = 2.0 * t / (1.0 + math.sqrt(1.0 - t))
    return TruncationGap(lam, window, math.sqrt(gap_sq), gap_sq, 2.0 * math.sqrt(t))


# ---------------------------------------------------------------- matrix elements

MOMENTS = 16
FAR_RATIO = 0.5


def _zeta_norm(spec: TorusSpec, zeta) -> float:
    return spec.norm(zeta)


def _near_limits(lam: float, zn: float) -> tuple[float, float]:
    """Classes with n_lo < n < n_hi are treated pointwise; outside them
    |u| <= FAR_RATIO |n - lam| for every vector of the class."""
    z = math.sqrt(zn)
    rho = FAR_RATIO
    s_hi = z / rho + math.sqrt(zn / rho**2 + lam + zn / rho)
    disc = zn / rho**2 - zn / rho + lam
    s_lo = -z / rho + math.sqrt(disc) if disc >= 0 else -1.0
    n_lo = s_lo * s_lo if s_lo > 0 else -1.0
    return n_lo, s_hi * s_hi


class _ZetaData:
    """Per-zeta moment sums over norm classes and sorted near-shell points."""

    def __init__(self, ctx: SpectralContext, zeta: tuple[int, int, int]):
        spec = ctx.spec
        self.zeta = zeta
        self.zn = _zeta_norm(spec, zeta)
        table = ctx.table
        coef = spec.coefficients
        zc = coef * np.array(zeta, dtype=np.float64)
        nclass = len(table)
        mom = np.zeros((MOMENTS, nclass))
        for x, y, z, _ in iter_points(spec, ctx.cutoff):
            idx = table.class_index(x, y, z)
            u = 2.0 * (zc[0] * x + zc[1] * y + zc[2] * z) - self.zn
            p = np.ones_like(u)
            for k in range(MOMENTS):
                mom[k] += np.bincount(idx, weights=p, minlength=nclass)
                p = p * u
        self.moments = mom
        self.ceiling = min(_near_limits(ctx.lam_max, self.zn)[1] + 1.0, ctx.cutoff)
        x, y, z, v = lattice_points(spec, self.ceiling)
        self.norms = v
        self.u = 2.0 * (zc[0] * x + zc[1] * y + zc[2] * z) - self.zn


def _zeta_data(ctx: SpectralContext, zeta) -> _ZetaData:
    key = ("zeta",) + tuple(zeta)
    d = ctx._cache.get(key)
    if d is None:
        d = _ZetaData(ctx, tuple(zeta))
        ctx._cache[key] = d
    return d


def _full_numerator(ctx: SpectralContext, data: _ZetaData, lam: float) -> tuple[float, float]:
    v, r, _, count = ctx._head()
    n_lo, n_hi = _near_limits(lam, data.zn)
    if n_hi > data.ceiling:
        raise ValueError("lambda beyond the range prepared for this context")
    # near: pointwise
    i = np.searchsorted(data.norms, n_lo, side="right")
    j = np.searchsorted(data.norms, n_hi, side="left")
    A = data.norms[i:j] - lam
    near = float(np.sum(1.0 / (A * (A - data.u[i:j]))))
    # far: moment expansion per class
    ci = np.searchsorted(v, n_lo, side="right")
    cj = np.searchsorted(v, n_hi, side="left")
    far_idx = np.r_[0:ci, cj : len(v)]
    zf = 1.0 / (v[far_idx] - lam)
    mom = data.moments[:, far_idx]
    acc = mom[MOMENTS - 1]
    for k in range(MOMENTS - 2, -1, -1):
        acc = mom[k] + acc * zf
    far = float(np.dot(acc, zf * zf))
    zabs = math.sqrt(data.zn)
    q = (2.0 * np.sqrt(v[far_idx]) * zabs + data.zn) * np.abs(zf)
    far_err = float(np.sum(r[far_idx] * q**MOMENTS / (1.0 - q) * zf * zf))
    # beyond the cutoff
    T = ctx.cutoff
    tail = tail_integral("inv_sq", T, ctx.spec, lam, c_rem=ctx.c_rem, count_at_start=count)
    qT = (2.0 * math.sqrt(T) * zabs + data.zn) / (T - lam)
    shape = (T / (T - lam)) ** 3
    corr = 2.0 * math.pi * ctx.spec.abc * (2.0 * zabs + data.zn) * shape / ((1.0 - qT) * T)
    return near + far + tail.value, far_err + tail.error + corr


def matrix_element(ctx: SpectralContext, lam: float, zeta, mode: str = "full",
                   window: float | None = None) -> MatrixElement:
    """<e_zeta g, g> for the normalised Green's function g at lam.

    ``full`` sums over the whole lattice; ``truncated`` restricts both xi and
    xi - zeta to the window | |.|^2 - lam | < window; ``single_window`` restricts
    only xi.
    """
    zeta = tuple(int(t) for t in zeta)
    _check_pole(ctx, lam)
    if zeta == (0, 0, 0):
        return MatrixElement(lam, zeta, mode, window, 1.0, 0.0)
    if mode == "full":
        data = _zeta_data(ctx, zeta)
        num, num_err = _full_numerator(ctx, data, lam)
        den = greens_norm_sq(ctx, lam)
        val = num / den.value
        err = (num_err + abs(val) * den.tail_error) / den.value
        return MatrixElement(lam, zeta, mode, None, val, err)
    if mode not in ("truncated", "single_window"):
        raise ValueError(f"unknown mode {mode!r}")
    if window is None or window <= 0:
        raise ValueError("windowed modes need a positive window")
    den = greens_norm_sq(ctx, lam, window)
    if den.degenerate:
        raise DegenerateWindow(f"no norms within {window} of {lam}")
    spec = ctx.spec
    x, y, z, v = lattice_points(spec, lam + window, lam - window)
    keep = v < lam + window
    x, y, z, v = x[keep], y[keep], z[keep], v[keep]
    zc = spec.coefficients * np.array(zeta, dtype=np.float64)
    A = v - lam
    B = A - (2.0 * (zc[0] * x + zc[1] * y + zc[2] * z) - spec.norm(zeta))
    if mode == "truncated":
        sel = np.abs(B) < window
        A, B = A[sel], B[sel]
    return MatrixElement(lam, zeta, mode, window, float(np.sum(1.0 / (A * B))) / den.value, 0.0)
