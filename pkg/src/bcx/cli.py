"""Command-line interface.

Subcommands: explain (one observation), batch (a RunConfig file over the
test partition), ablate (a grid of config variants), serve (HTTP service).
Failures exit nonzero and print one JSON error object to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

from .batch import FIGURE_GRID, ablate, run_batch, write_report
from .config import RunConfig, load_grid, load_run_config, section_to_overrides
from .dataset import load_csv, load_schema, split
from .errors import BcxError, ConfigError
from .explain import explain_observation
from .models import BuiltinModelConfig, train_builtin, wrap_external


def _data_args(p):
    p.add_argument("--data", required=True, help="CSV file with header row")
    p.add_argument("--schema", required=True, help="schema sidecar file")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument(
        "--model",
        default="builtin:mlp_softmax",
        help="builtin:mlp_softmax | builtin:logistic_linear | external:<command line>",
    )
    p.add_argument("--classes", type=int, default=None,
                   help="class count for external models")
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--hidden-units", type=int, default=16)
    p.add_argument("--train-seed", type=int, default=0)


def _override_args(p):
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a run-config key (repeatable)")
    p.add_argument("--config", default=None, help="INI file with a [run] section")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bcx",
        description="boundary-counterfactual explanations with measured fidelity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="explain one test observation")
    _data_args(p)
    _override_args(p)
    p.add_argument("--obs", type=int, default=0, help="test-partition row index")
    p.add_argument("--target", type=int, default=None, help="target class index")
    p.add_argument("--seed", type=int, default=0, help="synthetic pool seed")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")

    p = sub.add_parser("batch", help="run a config over the test partition")
    _data_args(p)
    _override_args(p)
    p.add_argument("--out", required=True, help="report output path")
    p.add_argument("--format", choices=("json", "csv", "html"), default="json")
    p.add_argument("--no-explanations", action="store_true",
                   help="omit per-observation payloads from the JSON report")

    p = sub.add_parser("ablate", help="run a grid of config variants")
    _data_args(p)
    _override_args(p)
    p.add_argument("--grid", default=None,
                   help="INI file, one section per variant (default: built-in grid)")
    p.add_argument("--out", required=True, help="summary JSON output path")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    return parser


def _load_bundle(args):
    schema, label, classes = load_schema(args.schema)
    ds = load_csv(args.data, schema, label, class_names=classes)
    train, test = split(ds, args.test_fraction, args.split_seed)
    kind, _, rest = args.model.partition(":")
    if kind == "builtin":
        cfg = BuiltinModelConfig(
            family=rest or "mlp_softmax",
            hidden_units=args.hidden_units,
            epochs=args.epochs,
            learning_rate=args.learning_rate,
            seed=args.train_seed,
        )
        model = train_builtin(train, cfg)
    elif kind == "external":
        if not rest:
            raise ConfigError("external model needs a command, e.g. external:python serve.py")
        if args.classes is None:
            raise ConfigError("--classes is required for external models")
        model = wrap_external(train, args.classes, rest.split())
    else:
        raise ConfigError(f"unknown model spec {args.model!r}")
    return train, test, model


def _run_config(args):
    cfg = load_run_config(args.config) if args.config else RunConfig()
    overrides = {}
    for item in args.set:
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"--set needs KEY=VALUE, got {item!r}")
        overrides.update(section_to_overrides({key.strip(): value}))
    return cfg.with_overrides(**overrides) if overrides else cfg


def cmd_explain(args):
    train, test, model = _load_bundle(args)
    cfg = _run_config(args)
    if not 0 <= args.obs < len(test):
        raise ConfigError(f"--obs {args.obs} outside test partition (size {len(test)})")
    x = test.observation(args.obs)
    expls = explain_observation(
        train, model, x, cfg, seed=args.seed,
        observation_index=args.obs, target_class=args.target,
    )
    payload = json.dumps([e.to_dict() for e in expls], sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)


def cmd_batch(args):
    train, test, model = _load_bundle(args)
    cfg = _run_config(args)
    result = run_batch(cfg, train, test, model,
                       keep_explanations=not args.no_explanations)
    write_report(result, args.format, args.out,
                 include_explanations=not args.no_explanations)
    fid = "n/a" if result.fidelity_mean is None else f"{result.fidelity_mean:.3f}"
    print(f"% fidelity {fid} +/- {result.fidelity_stderr:.3f} -> {args.out}")


def cmd_ablate(args):
    train, test, model = _load_bundle(args)
    cfg = _run_config(args)
    grid = load_grid(args.grid) if args.grid else FIGURE_GRID
    results = ablate(cfg, grid, train, test, model)
    summary = {
        name: {
            "fidelity_mean": r.fidelity_mean,
            "fidelity_stderr": r.fidelity_stderr,
            "per_seed": [vars(s).copy() for s in r.per_seed],
            "n_failures": len(r.failures),
        }
        for name, r in results.items()
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    width = max(len(n) for n in summary)
    for name, row in summary.items():
        fid = "n/a" if row["fidelity_mean"] is None else f"{row['fidelity_mean']:.3f}"
        print(f"{name:<{width}}  {fid} +/- {row['fidelity_stderr']:.3f}")


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "explain": cmd_explain,
        "batch": cmd_batch,
        "ablate": cmd_ablate,
        "serve": cmd_serve,
    }
    try:
        handlers[args.command](args)
    except BcxError as exc:
        json.dump({"error_type": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    except OSError as exc:
        json.dump({"error_type": "OSError", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
