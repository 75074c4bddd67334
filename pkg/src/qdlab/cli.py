"""qdlab <experiment-id> [--grid N] [--samples K] [--budget L] [--tol T] [--seed S] [--out DIR] [--config path.json]"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import QDLabError
from .experiments import EXPERIMENTS, ExperimentConfig, run

EXIT_FAILED = 1
EXIT_ERROR = 2


def build_parser():
    p = argparse.ArgumentParser(prog="qdlab", description="Run a registered quadratic-differential experiment.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--grid", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--budget", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--config", help="JSON file; its keys override the flags")
    return p


def make_config(args):
    fields = {"grid": args.grid, "samples": args.samples, "budget": args.budget, "tol": args.tol,
              "seed": args.seed, "out": args.out}
    fields = {k: v for k, v in fields.items() if v is not None}
    fields.setdefault("out", os.path.join("out", args.experiment))
    options = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        for k, v in data.items():
            if k in ("grid", "samples", "budget", "tol", "seed", "out"):
                fields[k] = v
            elif k != "experiment":
                options[k] = v
    return ExperimentConfig(args.experiment, options=options, **fields)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    print(text)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as e:
        _emit({"status": "error", "experiment": args.experiment, "invariant": "valid-config", "message": str(e)})
        return EXIT_ERROR
    try:
        summary = run(cfg)
    except QDLabError as e:
        os.makedirs(cfg.out, exist_ok=True)
        _emit({"status": "error", "experiment": cfg.experiment, "invariant": type(e).__name__, "message": str(e)},
              os.path.join(cfg.out, "failure.json"))
        return EXIT_ERROR
    if summary["passed"]:
        print(json.dumps({"status": "passed", "experiment": cfg.experiment, "out": cfg.out}))
        return 0
    failed = [c for c in summary["checks"] if not c["passed"]]
    _emit({"status": "failed", "experiment": cfg.experiment,
           "violated": [c["name"] for c in failed], "checks": failed, "out": cfg.out},
          os.path.join(cfg.out, "failure.json"))
    return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
