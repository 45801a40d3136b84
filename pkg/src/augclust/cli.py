"""Command-line entry points: ``gen-data``, ``run`` and ``verify``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .datagen import GenSpec, gen_clusters, write_dataset_csv
from .harness import load_config, run_experiment, write_results


def _gen_data(args) -> int:
    spec = GenSpec(n_per_cluster=args.n_per_cluster, spread=args.spread, seed=args.seed)
    path = write_dataset_csv(gen_clusters(spec), args.out)
    print(f"wrote {spec.n_per_cluster * len(spec.centroids)} points to {path}")
    return 0


def _run(args) -> int:
    cfg = load_config(args.config)
    if args.output_dir:
        cfg = replace(cfg, output_dir=args.output_dir)
    rows = run_experiment(cfg)
    manifest = write_results(rows, cfg.output_dir, cfg)
    for row in rows:
        if row.error:
            print(f"error in arm {row.arm} sweep={row.sweep} seed={row.seed}: {row.error}",
                  file=sys.stderr)
    print(f"{cfg.experiment}: {manifest['n_passed']}/{manifest['n_rows']} rows passed; "
          f"results in {cfg.output_dir}")
    return 0 if manifest["all_passed"] else 1


def _verify(args) -> int:
    from .acceptance import run_all

    results = run_all(only=args.only)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="augclust", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic four-cluster dataset as CSV")
    g.add_argument("--out", required=True, help="output CSV path")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-per-cluster", type=int, default=100)
    g.add_argument("--spread", type=float, default=1.0)
    g.set_defaults(func=_gen_data)

    r = sub.add_parser("run", help="run the experiment described by a TOML config")
    r.add_argument("--config", required=True)
    r.add_argument("--output-dir", help="overrides the config and $AUGCLUST_OUTPUT_DIR")
    r.set_defaults(func=_run)

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", nargs="*", help="criterion ids to run (default: all)")
    v.set_defaults(func=_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"augclust: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
