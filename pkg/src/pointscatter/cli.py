"""Command-line front end.

Every command writes a header with the fully resolved configuration so a
file is reproducible from its own contents.  Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import io
import json
import os
import sys
import warnings

import numpy as np

from . import arithmetic as ar
from . import diophantine as dio
from . import equidistribution as eq
from . import lattice as lat
from . import spectral as sp
from .presets import PRESETS, get_preset

THREADS_ENV = "POINTSCATTER_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


# (section, key, type, default, help); flags use the key with '_' -> '-'
OPTIONS = {
    "torus": ("torus", "torus", str, "standard", f"preset name, one of {sorted(PRESETS)}"),
    "inv_squares": ("torus", "inv_squares", str, None, "three inverse squared sides 'x,y,z' (overrides torus)"),
    "phi": ("spectral", "phi", float, 0.0, "self-adjoint extension phase in (-pi, pi)"),
    "cutoff": ("spectral", "cutoff", float, None, "lattice-sum cutoff (default max(4 X, 1000))"),
    "X": ("scan", "X", float, 100.0, "upper end of the eigenvalue range"),
    "X_lo": ("scan", "X_lo", float, 100.0, "lower end of a decay scan"),
    "X_hi": ("scan", "X_hi", float, 1000.0, "upper end of a decay scan"),
    "zeta": ("scan", "zeta", str, "1,0,0", "integer frequency 'a,b,c'"),
    "mode": ("scan", "mode", str, "full", "matrix element mode: full, truncated or single_window"),
    "epsilon": ("params", "epsilon", float, eq.DEFAULT_EPSILON, "gap exponent slack"),
    "delta": ("params", "delta", float, None, "window exponent (default 0.2 standard, 0.1 otherwise)"),
    "set": ("params", "set", str, "Lambda1", f"density set, one of {eq.SET_NAMES}"),
    "n": ("arith", "n", int, 1, "integer argument of arith and strip"),
    "m": ("arith", "m", int, 0, "second integer (Kronecker modulus, strip offset)"),
    "terms": ("arith", "terms", int, None, "L-series terms for 'arith gauss' (default 4 n)"),
    "alpha": ("discrepancy", "alpha", str, "sqrt2", "slope: sqrt2, sqrt3, sqrt5, golden, e, pi, sqrt:<d> or decimal"),
    "beta": ("discrepancy", "beta", float, 0.0, "offset"),
    "N": ("discrepancy", "N", str, "1000", "sequence lengths, comma separated"),
    "et_m": ("discrepancy", "et_m", int, None, "Erdos-Turan frequency cutoff (default N)"),
    "et_C": ("discrepancy", "et_C", float, 1.0, "Erdos-Turan constant"),
    "format": ("output", "format", str, None, "csv or jsonl (command default otherwise)"),
    "path": ("output", "path", str, "-", "output file, '-' for stdout"),
    "seed": ("output", "seed", int, 0, "echoed only; every computation is deterministic"),
}

COMMAND_KEYS = {
    "eigenvalues": ("torus", "inv_squares", "phi", "cutoff", "X"),
    "decay-scan": ("torus", "inv_squares", "phi", "cutoff", "X_lo", "X_hi", "zeta", "mode", "delta"),
    "arith": ("n", "m", "terms", "zeta"),
    "strip": ("zeta", "n", "m"),
    "discrepancy": ("alpha", "beta", "N", "et_m", "et_C"),
    "density": ("torus", "inv_squares", "phi", "cutoff", "X", "epsilon", "delta", "set", "zeta"),
}
DEFAULT_FORMAT = {"decay-scan": "jsonl"}
ARITH_OPS = ("r3", "primitive", "classify", "kronecker", "divisors", "gauss", "four-class")


def _config_help() -> str:
    lines = ["config file keys (INI sections; flags override file values):"]
    for dest, (sec, key, _, default, text) in OPTIONS.items():
        suffix = "" if "(default" in text or default is None else f" (default {default})"
        lines.append(f"  [{sec}] {key} = ...   {text}{suffix}")
    return "\n".join(lines)


def _common(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--config", default=default, help="INI configuration file")
    p.add_argument("--timestamp", action="store_true", default=default or False,
                   help="add a creation-date header line")
    for dest in ("format", "path", "seed"):
        sec, key, typ, _, text = OPTIONS[dest]
        p.add_argument("--" + key.replace("_", "-"), dest=dest, type=typ, default=default, help=text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pointscatter", description="Point scatterer spectra on flat 3-tori.",
                                epilog=_config_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, None)
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for cmd, keys in COMMAND_KEYS.items():
        sp_ = sub.add_parser(cmd, epilog=_config_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
        # accepted after the command as well; SUPPRESS keeps a value given before it
        _common(sp_, argparse.SUPPRESS)
        if cmd == "arith":
            sp_.add_argument("op", choices=ARITH_OPS)
        for dest in keys:
            sec, key, typ, _, text = OPTIONS[dest]
            sp_.add_argument("--" + key.replace("_", "-"), dest=dest, type=typ, default=None, help=text)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Flags, then config file, then defaults."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if args.config:
        if not cp.read(args.config, encoding="utf-8"):
            raise ConfigError(f"cannot read config file {args.config}")
    keys = COMMAND_KEYS[args.command] + ("format", "path", "seed")
    out = {}
    for dest in keys:
        sec, key, typ, default, _ = OPTIONS[dest]
        val = getattr(args, dest, None)
        if val is None and cp.has_option(sec, key):
            try:
                val = typ(cp.get(sec, key))
            except ValueError as exc:
                raise ConfigError(f"[{sec}] {key}: {exc}") from None
        out[dest] = default if val is None else val
    if out["format"] is None:
        out["format"] = DEFAULT_FORMAT.get(args.command, "csv")
    if out["format"] not in ("csv", "jsonl"):
        raise ConfigError("format must be csv or jsonl")
    if args.command == "arith":
        out["op"] = args.op
    return out


def _parse_zeta(text: str) -> tuple[int, int, int]:
    try:
        z = tuple(int(t) for t in text.replace(" ", "").split(","))
    except ValueError:
        raise ConfigError(f"malformed zeta {text!r}") from None
    if len(z) != 3:
        raise ConfigError(f"zeta needs three integers, got {text!r}")
    return z


def _torus(cfg: dict) -> lat.TorusSpec:
    if cfg.get("inv_squares"):
        parts = cfg["inv_squares"].split(",")
        try:
            return lat.TorusSpec.parse(parts, label="custom")
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"bad inv_squares: {exc}") from None
    try:
        return get_preset(cfg["torus"])
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None


def _context(cfg: dict, lam_max: float) -> sp.SpectralContext:
    try:
        return sp.make_context(_torus(cfg), cfg["phi"], lam_max, cutoff=cfg["cutoff"])
    except sp.InvalidPhase as exc:
        raise ConfigError(f"excluded phase: {exc}") from None


# ---------------------------------------------------------------- output


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(t) for t in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


class Emitter:
    def __init__(self, cfg: dict, command: str, timestamp: bool):
        self.cfg = cfg
        self.command = command
        self.timestamp = timestamp
        self.buf = io.StringIO()

    def header(self, extra: dict | None = None):
        conf = {"command": self.command, **self.cfg, **(extra or {})}
        conf["threads"] = os.environ.get(THREADS_ENV, "1")
        if self.cfg["format"] == "jsonl":
            rec = {"config": {k: _jsonable(v) for k, v in sorted(conf.items())}}
            if self.timestamp:
                rec["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
            self.buf.write(json.dumps(rec) + "\n")
        else:
            if self.timestamp:
                self.buf.write(f"# created={_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
            for k, v in sorted(conf.items()):
                self.buf.write(f"# {k}={'' if v is None else _fmt(v)}\n")

    def table(self, columns: list[str], rows):
        if self.cfg["format"] == "jsonl":
            for r in rows:
                self.buf.write(json.dumps({c: _jsonable(v) for c, v in zip(columns, r)}) + "\n")
        else:
            w = csv.writer(self.buf, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(v) for v in r])

    def record(self, rec: dict):
        if self.cfg["format"] == "jsonl":
            self.buf.write(json.dumps({k: _jsonable(v) for k, v in rec.items()}) + "\n")
        else:
            for k, v in rec.items():
                self.buf.write(f"# {k}={_fmt(v)}\n")

    def flush(self):
        path = self.cfg["path"]
        if path in ("-", "", None):
            sys.stdout.write(self.buf.getvalue())
        else:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.buf.getvalue())


# ---------------------------------------------------------------- commands


def cmd_eigenvalues(cfg: dict, out: Emitter):
    ctx = _context(cfg, cfg["X"])
    eigs = sp.solve_eigenvalues(ctx, cfg["X"])
    out.header({"c0": ctx.c0, "resolved_cutoff": ctx.cutoff, "c_rem": ctx.c_rem})
    rows = [(e.k, e.lam, e.bracket_lo, e.bracket_hi, e.residual, e.bracket_lo < e.lam < e.bracket_hi, e.cluster)
            for e in eigs]
    out.table(["k", "lambda", "bracket_lo", "bracket_hi", "residual", "interlaced", "cluster"], rows)


def cmd_decay_scan(cfg: dict, out: Emitter):
    zeta = _parse_zeta(cfg["zeta"])
    if cfg["mode"] not in ("full", "truncated", "single_window"):
        raise ConfigError(f"unknown mode {cfg['mode']!r}")
    if not 0 <= cfg["X_lo"] < cfg["X_hi"]:
        raise ConfigError("need 0 <= X_lo < X_hi")
    ctx = _context(cfg, cfg["X_hi"])
    scan = eq.decay_scan(ctx, zeta, cfg["X_lo"], cfg["X_hi"], cfg["mode"], cfg["delta"])
    out.header({"resolved_cutoff": ctx.cutoff})
    out.table(["lambda", "zeta", "mode", "window", "value", "tail_bound"],
              [(r.lam, r.zeta, r.mode, r.window, r.value, r.tail_bound) for r in scan.records])
    out.record({"summary": True, "count": len(scan.records), "fitted_slope": scan.fitted_slope,
                "fitted_intercept": scan.fitted_intercept})


def cmd_arith(cfg: dict, out: Emitter):
    n, m, op = cfg["n"], cfg["m"], cfg["op"]
    if n < 0:
        raise ConfigError("n must be non-negative")
    out.header()
    if op == "r3":
        out.table(["n", "r3"], [(n, ar.r3(n))])
    elif op == "primitive":
        out.table(["n", "primitive_r3"], [(n, ar.primitive_r3(n))])
    elif op == "classify":
        c = ar.classify_three_squares(n)
        out.table(["n", "a", "n1", "is_sum_of_three_squares"], [(n, c.a, c.n1, c.representable)])
    elif op == "kronecker":
        out.table(["a", "m", "kronecker"], [(n, m, ar.kronecker(n, m))])
    elif op == "divisors":
        out.table(["n", "tau"], [(n, ar.divisor_count(n))])
    elif op == "gauss":
        g = ar.gauss_R3(n, cfg["terms"] or 4 * max(n, 1))
        out.table(["n", "value", "error", "genus_factor", "terms", "applicable"],
                  [(g.n, g.value, g.error, g.genus_factor, g.terms, g.applicable)])
    elif op == "four-class":
        z = _parse_zeta(cfg["zeta"])
        out.table(["n", "class"], [(n, ar.four_power_class(n, z).value)])


def cmd_strip(cfg: dict, out: Emitter):
    zeta = _parse_zeta(cfg["zeta"])
    n, m = cfg["n"], cfg["m"]
    if zeta == (0, 0, 0):
        raise ConfigError("zeta must be non-zero")
    z = lat._move_nonzero_last(zeta)
    red = lat.strip_reduction(z, n, m)
    rd = ar.rep_count_binary(red.k, red.D) if red.k >= 0 else 0
    out.header({"reduced_zeta": z})
    out.table(["n", "m", "circle_count", "D", "t", "k", "r_D_k", "six_tau_k"],
              [(n, m, lat.circle_count(n, z, m), red.D, red.t, red.k, rd,
                6 * ar.divisor_count(red.k) if red.k > 0 else 0)])


def cmd_discrepancy(cfg: dict, out: Emitter):
    try:
        Ns = [int(t) for t in cfg["N"].split(",")]
        dio.resolve_alpha(cfg["alpha"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    if min(Ns) < 1:
        raise ConfigError("N must be positive")
    out.header()
    rows = []
    for N in Ns:
        pts = dio.kronecker_sequence(cfg["alpha"], cfg["beta"], N)
        rep = dio.exact_discrepancy(pts)
        m = cfg["et_m"] or N
        et = dio.kronecker_erdos_turan_bound(cfg["alpha"], N, m, cfg["et_C"])
        rows.append((N, rep.discrepancy, rep.star, et, m))
    out.table(["N", "exact_D", "star_D", "et_bound", "et_m"], rows)


def cmd_density(cfg: dict, out: Emitter):
    if cfg["set"] not in eq.SET_NAMES:
        raise ConfigError(f"set must be one of {eq.SET_NAMES}")
    zeta = _parse_zeta(cfg["zeta"]) if cfg["set"] == "LambdaZeta" else None
    X = cfg["X"]
    delta = cfg["delta"]
    ctx = _context(cfg, X + 10)
    spectrum = eq.Spectrum.compute(ctx, X + 5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", eq.AdmissibilityViolation)
        rep = eq.density_report(spectrum, cfg["set"], X, cfg["epsilon"], delta, zeta)
    flagged = any(issubclass(w.category, eq.AdmissibilityViolation) for w in caught)
    out.header({"resolved_cutoff": ctx.cutoff, "resolved_delta": rep.delta})
    out.record({"set_name": rep.set_name, "member_count": rep.member_count, "total_count": rep.total_count,
                "fraction": rep.fraction, "empty_range": rep.empty_range, "admissibility_violation": flagged})
    out.table(["block_lo", "block_hi", "members", "complement"],
              [(b.lo, b.hi, b.members, b.complement) for b in rep.blocks])


COMMANDS = {
    "eigenvalues": cmd_eigenvalues,
    "decay-scan": cmd_decay_scan,
    "arith": cmd_arith,
    "strip": cmd_strip,
    "discrepancy": cmd_discrepancy,
    "density": cmd_density,
}

NUMERIC_ERRORS = (sp.BracketFailure, sp.PoleProximity, sp.DegenerateWindow, lat.NormCollision,
                  dio.RationalAlpha, FloatingPointError, ArithmeticError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        out = Emitter(cfg, args.command, args.timestamp)
        COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"pointscatter: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"pointscatter: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ar.NotRepresentable) as exc:
        print(f"pointscatter: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out.flush()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
