"""Command-line entry point: ``srfermion {exact,asympt,compare,fit,identities}``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .asymptotics import charged_moment_asymptotic
from .errors import AccuracyError, ComputationError, DomainError, SectorEmptyError, UsageError
from .harness import (
    SweepConfig,
    cached_spectrum,
    envelope_grid,
    envelope_period,
    fit_table,
    run_compare,
    run_identities,
    write_table,
)
from .lattice import charged_moment_exact, resolve_moments_exact, sr_entropies_exact, sr_vn_entropy_exact
from .model import ModelSpec, xx_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def parse_model(text: str) -> ModelSpec:
    """Inline JSON or a path to a JSON file."""
    if os.path.isfile(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return ModelSpec.from_dict(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse model spec: {exc}") from exc


def _add_sweep_args(p):
    p.add_argument("--config", help="JSON config with model, n, alpha, L, out, format")
    p.add_argument("--model", help="model spec as inline JSON or a file path (default: half-filled XX)")
    p.add_argument("-n", type=float, nargs="+", help="Renyi indices")
    p.add_argument("--alpha", type=float, nargs="+", help="flux values, |alpha| < pi")
    p.add_argument("--alpha-grid", type=int, metavar="K",
                   help="use K evenly spaced alphas in [-alpha_max, alpha_max]")
    p.add_argument("--alpha-max", type=float, default=0.9 * math.pi)
    p.add_argument("-L", type=int, nargs="+", help="block lengths, ascending")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srfermion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact lattice charged moments (or resolved entropies)")
    _add_sweep_args(p)
    p.add_argument("--resolved", action="store_true", help="print Z_n(q) and S_n(q) per sector")

    p = sub.add_parser("asympt", help="asymptotic prediction with first corrections")
    _add_sweep_args(p)

    p = sub.add_parser("compare", help="exact vs asymptotic table")
    _add_sweep_args(p)

    p = sub.add_parser("fit", help="fit deviation decay exponents against mu(n, alpha)")
    _add_sweep_args(p)
    p.add_argument("--improved", action="store_true", help="fit the deviation after subleading corrections")
    p.add_argument("--period", type=int, help="override the envelope window in L")

    sub.add_parser("identities", help="run the analytic identity suite")
    return parser


def config_from_args(args) -> SweepConfig:
    d = {}
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
    if args.model:
        d["model"] = parse_model(args.model)
    d.setdefault("model", xx_spec())
    if args.n:
        d["n"] = args.n
    if args.alpha_grid:
        d["alpha"] = list(np.linspace(-args.alpha_max, args.alpha_max, args.alpha_grid))
    elif args.alpha:
        d["alpha"] = args.alpha
    if args.L:
        d["L"] = args.L
    d.setdefault("n", [2.0])
    d.setdefault("alpha", [0.0])
    d.setdefault("L", [64, 128, 256, 512])
    if args.out:
        d["out"] = args.out
    if args.format:
        d["format"] = args.format
    d["workers"] = args.workers
    return SweepConfig.from_dict(d)


def _write_rows(cfg: SweepConfig, rows) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            write_table(rows, cfg.fmt, fh, cfg.model)
    else:
        write_table(rows, cfg.fmt, sys.stdout, cfg.model)


def cmd_exact(args) -> int:
    cfg = config_from_args(args)
    out = open(cfg.out, "w") if cfg.out else sys.stdout
    try:
        if args.resolved:
            out.write("n,L,q,q_delta,moment,entropy\n")
            for n in cfg.n_values:
                for L in cfg.Ls:
                    s = cached_spectrum(cfg.model, L)
                    res = resolve_moments_exact(s, n) if n == 1 else sr_entropies_exact(s, n)
                    for q in range(L + 1):
                        if n == 1:
                            try:
                                ent = sr_vn_entropy_exact(s, q)
                            except SectorEmptyError:
                                ent = float("nan")
                        else:
                            ent = res.entropies[q]
                        out.write(f"{n!r},{L},{q},{q - s.mean_charge!r},{float(res.moments[q])!r},{float(ent)!r}\n")
        else:
            out.write("n,alpha,L,re,im\n")
            for n in cfg.n_values:
                for a in cfg.alphas:
                    for L in cfg.Ls:
                        z = charged_moment_exact(cached_spectrum(cfg.model, L), n, a)
                        out.write(f"{n!r},{a!r},{L},{z.real!r},{z.imag!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_asympt(args) -> int:
    cfg = config_from_args(args)
    out = open(cfg.out, "w") if cfg.out else sys.stdout
    try:
        out.write("n,alpha,L,leading_re,leading_im,mu,cft_2mu,dn_re,dn_im,dtilde_re,dtilde_im\n")
        for n in cfg.n_values:
            for a in cfg.alphas:
                for L in cfg.Ls:
                    p = charged_moment_asymptotic(cfg.model, n, a, L)
                    out.write(f"{n!r},{a!r},{L}," + ",".join(repr(float(v)) for v in (
                        p.leading.real, p.leading.imag, p.mu, p.cft_exponent,
                        p.d_n.real, p.d_n.imag, p.d_tilde.real, p.d_tilde.imag)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = config_from_args(args)
    _write_rows(cfg, run_compare(cfg))
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = config_from_args(args)
    period = args.period or envelope_period(cfg.model)
    cfg.Ls = tuple(envelope_grid(cfg.Ls, period))
    rows = run_compare(cfg)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            write_table(rows, cfg.fmt, fh, cfg.model)
    reports = fit_table(rows, period, improved=args.improved)
    ok = True
    print("n,alpha,exponent,mu,cft_2mu,L_min,L_max,residual,verdict")
    for (n, a), rep in sorted(reports.items()):
        print(f"{n:g},{a:.6f},{rep.exponent:.4f},{rep.mu:.4f},{rep.cft_2mu:.4f},"
              f"{rep.window[0]},{rep.window[1]},{rep.residual:.3e},{rep.verdict}")
        ok &= rep.verdict == "meets-bound"
    return EXIT_OK if ok else EXIT_FAIL


def cmd_identities(args) -> int:
    rep = run_identities()
    names = sorted({c.name for c in rep.cases})
    for name in names:
        cs = [c for c in rep.cases if c.name == name]
        worst = max(c.residual for c in cs)
        status = "PASS" if all(c.passed for c in cs) else "FAIL"
        print(f"{status} {name}: {len(cs)} cases, worst residual {worst:.3e}")
    for c in rep.failures:
        print(f"  failed {c.name} [{c.case}]: {c.residual:.3e} >= {c.threshold:.1e}")
    return EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "exact": cmd_exact,
    "asympt": cmd_asympt,
    "compare": cmd_compare,
    "fit": cmd_fit,
    "identities": cmd_identities,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ComputationError, AccuracyError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
