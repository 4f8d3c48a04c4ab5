"""Decay scans of matrix elements and density-one subsets of the spectrum."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import arithmetic as ar
from .lattice import TorusSpec, count_near_resonant_pairs, in_s_zeta, iter_points
from .spectral import (THETA, MatrixElement, SpectralContext, eigenvalue_array, matrix_element,
                       solve_eigenvalues)

DEFAULT_EPSILON = 0.05
DEFAULT_DELTA_STANDARD = 0.2
DEFAULT_DELTA_IRRATIONAL = 0.1
ZERO_CUTOFF = 1e-14


class SuccessorUnknown(LookupError):
    pass


class AdmissibilityViolation(UserWarning):
    pass


def default_delta(spec: TorusSpec) -> float:
    return DEFAULT_DELTA_STANDARD if spec.is_standard else DEFAULT_DELTA_IRRATIONAL


def admissible_delta(epsilon: float, tau: float = 1.0, theta: float = THETA) -> float:
    """Upper limit for the shell exponent on irrational tori."""
    return min((1 - theta) / 2 - epsilon, 1 / tau - epsilon)


# ---------------------------------------------------------------- spectrum


@dataclass
class Spectrum:
    """Eigenvalues of one context, complete on (-inf, complete_below)."""

    ctx: SpectralContext
    lams: np.ndarray
    complete_below: float
    _szeta: dict = field(default_factory=dict, repr=False)

    @classmethod
    def compute(cls, ctx: SpectralContext, X: float) -> "Spectrum":
        eigs = solve_eigenvalues(ctx, X)
        return cls(ctx, eigenvalue_array(eigs), eigs[-1].bracket_hi)

    def index(self, lam: float) -> int:
        i = int(np.searchsorted(self.lams, lam))
        if i >= len(self.lams) or self.lams[i] != lam:
            raise KeyError(f"{lam!r} is not an eigenvalue of this scan")
        return i

    def in_range(self, X: float) -> np.ndarray:
        return self.lams[(self.lams >= 0) & (self.lams <= X)]

    def _require(self, upto: float) -> None:
        if upto >= self.complete_below:
            raise SuccessorUnknown(f"eigenvalues beyond {self.complete_below} are not computed")

    def s_zeta_norms(self, zeta) -> np.ndarray:
        key = tuple(int(t) for t in zeta)
        out = self._szeta.get(key)
        if out is None:
            spec = self.ctx.spec
            vals = []
            for x, y, z, v in iter_points(spec, self.complete_below + 2.0):
                m = in_s_zeta(spec, key, x, y, z)
                vals.append(v[m])
            out = np.sort(np.concatenate(vals)) if vals else np.zeros(0)
            self._szeta[key] = out
        return out


def lambda1_membership(spectrum: Spectrum, lam: float, epsilon: float = DEFAULT_EPSILON) -> bool:
    """lam >= 1 and the next eigenvalue lies in (lam, lam + lam^(-1/2+eps))."""
    if lam < 1:
        return False
    i = spectrum.index(lam)
    if i + 1 >= len(spectrum.lams):
        raise SuccessorUnknown(f"no eigenvalue computed after {lam}")
    return bool(spectrum.lams[i + 1] - lam < lam ** (-0.5 + epsilon))


def _check_delta(spectrum: Spectrum, epsilon: float, delta: float) -> None:
    spec = spectrum.ctx.spec
    if spec.is_standard:
        return
    ceiling = admissible_delta(epsilon, spec.finite_type_hint or 1.0)
    if delta >= ceiling:
        warnings.warn(f"delta={delta} is not below the admissible ceiling {ceiling:.4g}",
                      AdmissibilityViolation)


def shell_count(spectrum: Spectrum, lam: float, width: float) -> int:
    """#(lam - width, lam + width) intersected with the spectrum."""
    spectrum._require(lam + width)
    v = spectrum.lams
    return int(np.searchsorted(v, lam + width, side="left") - np.searchsorted(v, lam - width, side="right"))


def lambda2_membership(spectrum: Spectrum, lam: float, epsilon: float = DEFAULT_EPSILON,
                       delta: float = DEFAULT_DELTA_IRRATIONAL) -> bool:
    """lam in Lambda_1 and #(lam - 3L, lam + 3L) <= L lam^(1/2+2 eps) with L = lam^-delta."""
    _check_delta(spectrum, epsilon, delta)
    if not lambda1_membership(spectrum, lam, epsilon):
        return False
    L = lam ** (-delta)
    return shell_count(spectrum, lam, 3 * L) <= L * lam ** (0.5 + 2 * epsilon)


def lambda_zeta_membership(spectrum: Spectrum, lam: float, zeta, delta: float = DEFAULT_DELTA_IRRATIONAL,
                           window: float | None = None) -> bool:
    """No lattice vector with lam - L < |xi|^2 < lam + L lies in S_zeta (L = lam^-delta)."""
    L = lam ** (-delta) if window is None else window
    norms = spectrum.s_zeta_norms(zeta)
    if lam + L > spectrum.complete_below + 2.0:
        raise SuccessorUnknown("shell lies beyond the enumerated range")
    i = np.searchsorted(norms, lam - L, side="right")
    j = np.searchsorted(norms, lam + L, side="left")
    return bool(j <= i)


def lambda_J_membership(spectrum: Spectrum, lam: float, J: float, delta: float = DEFAULT_DELTA_IRRATIONAL) -> bool:
    """Membership in the intersection of Lambda_zeta over all 0 < |zeta| <= J."""
    for zeta in frequencies_up_to(spectrum.ctx.spec, J):
        if not lambda_zeta_membership(spectrum, lam, zeta, delta):
            return False
    return True


def frequencies_up_to(spec: TorusSpec, J: float) -> list[tuple[int, int, int]]:
    out = []
    for x, y, z, v in iter_points(spec, J * J):
        for a, b, c, n in zip(x, y, z, v):
            if n > 0:
                out.append((int(a), int(b), int(c)))
    return sorted(out)


def smallest_frequency(spec: TorusSpec) -> tuple[int, int, int]:
    coef = spec.coefficients
    i = int(np.argmin(coef))
    z = [0, 0, 0]
    z[i] = 1
    return tuple(z)


# ---------------------------------------------------------------- density reports


@dataclass(frozen=True)
class DyadicBlock:
    lo: float
    hi: float
    members: int
    complement: int


@dataclass(frozen=True)
class DensityReport:
    set_name: str
    epsilon: float
    delta: float
    X: float
    member_count: int
    total_count: int
    fraction: float
    blocks: tuple[DyadicBlock, ...]
    empty_range: bool = False
    zeta: tuple[int, int, int] | None = None


SET_NAMES = ("Lambda1", "Lambda2", "LambdaZeta")


def membership_mask(spectrum: Spectrum, set_name: str, X: float, epsilon: float = DEFAULT_EPSILON,
                    delta: float | None = None, zeta=None) -> tuple[np.ndarray, np.ndarray]:
    """(eigenvalues in [0, X], boolean membership) for one of the nested sets."""
    if set_name not in SET_NAMES:
        raise ValueError(f"set_name must be one of {SET_NAMES}")
    delta = default_delta(spectrum.ctx.spec) if delta is None else delta
    lams = spectrum.in_range(X)
    if set_name == "Lambda1":
        mask = [lambda1_membership(spectrum, l, epsilon) for l in lams]
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AdmissibilityViolation)
            mask = [lambda2_membership(spectrum, l, epsilon, delta) for l in lams]
        if set_name == "LambdaZeta":
            mask = [m and lambda_zeta_membership(spectrum, l, zeta, delta) for m, l in zip(mask, lams)]
    return lams, np.array(mask, dtype=bool)


def density_report(spectrum: Spectrum, set_name: str, X: float, epsilon: float = DEFAULT_EPSILON,
                   delta: float | None = None, zeta=None) -> DensityReport:
    """Fraction of eigenvalues in [0, X] belonging to the set, with complement
    counts over the blocks X/2^(k+1) < lam <= X/2^k."""
    delta = default_delta(spectrum.ctx.spec) if delta is None else delta
    if set_name == "LambdaZeta" and zeta is None:
        zeta = smallest_frequency(spectrum.ctx.spec)
    if set_name != "Lambda1":
        _check_delta(spectrum, epsilon, delta)
    lams, mask = membership_mask(spectrum, set_name, X, epsilon, delta, zeta)
    total = len(lams)
    members = int(mask.sum())
    blocks = []
    hi = X
    while hi >= 1:
        lo = hi / 2
        sel = (lams > lo) & (lams <= hi)
        blocks.append(DyadicBlock(lo, hi, int(mask[sel].sum()), int((~mask[sel]).sum())))
        hi = lo
    sel = lams <= hi
    blocks.append(DyadicBlock(0.0, hi, int(mask[sel].sum()), int((~mask[sel]).sum())))
    zt = tuple(zeta) if zeta is not None else None
    if total == 0:
        return DensityReport(set_name, epsilon, delta, X, 0, 0, 1.0, tuple(blocks), True, zt)
    return DensityReport(set_name, epsilon, delta, X, members, total, members / total, tuple(blocks), False, zt)


# ---------------------------------------------------------------- decay scans


@dataclass(frozen=True)
class DecayScan:
    ctx: SpectralContext
    zeta: tuple[int, int, int]
    lambda_range: tuple[float, float]
    mode: str
    records: tuple[MatrixElement, ...]
    fitted_slope: float
    fitted_intercept: float

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def lams(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])


def fit_loglog(x, y) -> tuple[float, float]:
    """OLS of log|y| on log x, dropping |y| < 1e-14."""
    x = np.asarray(x, float)
    y = np.abs(np.asarray(y, float))
    keep = y >= ZERO_CUTOFF
    if keep.sum() < 2:
        return 0.0, 0.0
    slope, icept = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope), float(icept)


def decay_scan(ctx: SpectralContext, zeta, X_lo: float, X_hi: float, mode: str = "full",
               delta: float | None = None, spectrum: Spectrum | None = None) -> DecayScan:
    """Matrix elements <e_zeta g, g> at every eigenvalue in [X_lo, X_hi]."""
    zeta = tuple(int(t) for t in zeta)
    if spectrum is None:
        spectrum = Spectrum.compute(ctx, X_hi)
    lams = spectrum.lams[(spectrum.lams >= X_lo) & (spectrum.lams <= X_hi)]
    delta = default_delta(ctx.spec) if delta is None else delta
    recs = []
    for lam in lams:
        window = None if mode == "full" else lam**delta
        recs.append(matrix_element(ctx, float(lam), zeta, mode, window))
    if zeta == (0, 0, 0):
        slope, icept = 0.0, 0.0
    else:
        slope, icept = fit_loglog(lams, [r.value for r in recs])
    return DecayScan(ctx, zeta, (X_lo, X_hi), mode, tuple(recs), slope, icept)


def write_scan_jsonl(scan: DecayScan, fh) -> None:
    for r in scan.records:
        row = {"lambda": r.lam, "zeta": list(r.zeta), "mode": r.mode, "value": r.value,
               "tail_bound": r.tail_bound}
        fh.write(json.dumps(row, sort_keys=False) + "\n")


# ---------------------------------------------------------------- arithmetic checks


def siegel_check(X: int, exponent: float = 0.45) -> float:
    """min r3(n)/n^exponent over 1 <= n <= X with n not 0, 4, 7 mod 8."""
    X = int(X)
    r = ar.r3_table(X)
    n = np.arange(1, X + 1)
    keep = ~np.isin(n % 8, (0, 4, 7))
    return float(np.min(r[1:][keep] / n[keep] ** exponent))


def near_resonant_exponent(spec: TorusSpec, Xs, delta: float) -> tuple[float, list[int]]:
    """Fitted growth exponent of the near-resonant pair counts over X."""
    counts = [count_near_resonant_pairs(spec, X, delta).total for X in Xs]
    slope, _ = np.polyfit(np.log(Xs), np.log(counts), 1)
    return float(slope), counts
