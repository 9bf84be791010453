"""Command line interface.

Subcommands:
  run <config>       run one experiment config (profiles, diagnostics, CSV)
  accuracy <config>  mesh-refinement error/order table
  ap-sweep <config>  error vs epsilon against the drift-diffusion limit
  check              run the fast invariant suite

Common flags: --out DIR, --threads N, --seed N.  Exit code 0 on success;
failures print a single machine-readable ``error: ...`` line and exit 1.
"""
from __future__ import annotations

import argparse
import sys

from . import _kernels
from .harness import load_config, run_accuracy_study, run_ap_sweep, run_example


def _add_common(p):
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--threads", type=int, default=None, help="parallel cases")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized checks")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="apdg", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "accuracy", "ap-sweep"):
        p = sub.add_parser(name)
        p.add_argument("config")
        _add_common(p)
    p = sub.add_parser("check")
    _add_common(p)
    return ap


def _load(args):
    cfg = load_config(args.config)
    if args.threads is not None:
        cfg.threads = args.threads
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.out if args.out is not None else cfg.out_dir
    return cfg, out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            from .selfcheck import run_checks

            failed = 0
            for name, ok, detail in run_checks(seed=args.seed or 0):
                print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
                failed += 0 if ok else 1
            if failed:
                print(f"error: check: {failed} invariant(s) failed")
                return 1
            print(f"all invariants hold (backend: {_kernels.backend_name})")
            return 0

        cfg, out = _load(args)
        if args.command == "accuracy":
            table = run_accuracy_study(cfg, out)
            print(f"# accuracy study (mode={table['mode']}, eps={cfg.epsilon}, k={cfg.k})")
            print("nx     L2            order")
            for i, nx in enumerate(table["nx"]):
                order = table["l2_order"][i]
                print(f"{nx:<6d} {table['l2'][i]:.6e} {'' if order is None else f'{order:.3f}'}")
            print(f"wrote {table['csv']}")
        elif args.command == "ap-sweep":
            out_tbl = run_ap_sweep(cfg, out)
            print("# eps     L2 error vs drift-diffusion")
            for e, err in zip(out_tbl["eps"], out_tbl["errors"]):
                print(f"{e:.3e}  {err:.6e}")
            slope = out_tbl["slope"]
            print(f"slope = {'n/a' if slope is None else f'{slope:.4f}'}")
            print(f"wrote {out_tbl['csv']}")
        else:
            result = run_example(cfg, out)
            for key, path in result["paths"].items():
                print(f"wrote {key}: {path}")
        return 0
    except Exception as exc:  # single machine-readable failure line
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
