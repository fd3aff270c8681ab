"""Command-line entry points.

Every command is a pure function of its flags, input files, and seed. On
failure the process prints a single machine-parsable JSON line to stderr and
exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .cluvae import TrainConfig, VARIANTS, generate, make_condition, train
from .errors import LandgenError, ParameterError
from .evaluation import (
    evaluate,
    format_table,
    held_out_split,
    square_size_study,
    stability_study,
)
from .grid_data import LEVEL_COUNT, SynthesisParams, load_dataset, save_dataset, synthesize_city
from .rng import STREAM_EVAL, Rng


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        raise SystemExit(2)


def _fail(kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return 1


def _write_json(payload, out_path):
    text = json.dumps(payload, separators=(",", ":")) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch,
        lam=getattr(args, "lambda_"),
        latent=args.latent,
        hidden=args.hidden,
        vgae_latent=args.vgae_latent,
        vgae_hidden=args.vgae_hidden,
        vgae_epochs=args.vgae_epochs,
        vgae_learning_rate=args.vgae_lr,
    )


def _add_train_flags(parser):
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--lr", type=float, default=1e-4)
    parser.add_argument("--lambda", dest="lambda_", type=float, default=0.55)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--latent", type=int, default=32)
    parser.add_argument("--hidden", type=int, default=256)
    parser.add_argument("--vgae-latent", type=int, default=16)
    parser.add_argument("--vgae-hidden", type=int, default=32)
    parser.add_argument("--vgae-epochs", type=int, default=200)
    parser.add_argument("--vgae-lr", type=float, default=0.01)


def build_parser() -> _Parser:
    parser = _Parser(prog="landgen", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a city dataset")
    p.add_argument("--n", type=int, default=10, help="grid resolution")
    p.add_argument("--m", type=int, default=20, help="POI category count")
    p.add_argument("--z", type=int, default=6, help="functional zone classes")
    p.add_argument("--k", type=int, required=True, help="sample count")
    p.add_argument("--t", type=int, default=13, help="price history months")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a model and save a checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--history-out", help="optional per-epoch loss JSON")
    _add_train_flags(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint on its held-out split")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--gens", type=int, default=5)
    p.add_argument("--seed", type=int, help="evaluation stream seed (default: checkpoint seed)")
    p.add_argument("--dump", help="write raw per-level category totals here")
    p.add_argument("--out")

    p = sub.add_parser("generate", help="generate configurations for a condition")
    p.add_argument("--model", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--context-id", type=int)
    p.add_argument("--context-file")
    p.add_argument("--data", help="dataset for --context-id lookups")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--round", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("ablation", help="train and compare all model variants")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--seeds", type=int, default=1, help="seeds per variant")
    p.add_argument("--gens", type=int, default=5)
    p.add_argument("--out")
    _add_train_flags(p)

    p = sub.add_parser("study", help="stability and square-size studies")
    study_sub = p.add_subparsers(dest="study", required=True)

    s = study_sub.add_parser("stability")
    s.add_argument("--data", required=True)
    s.add_argument("--runs", type=int, default=6)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--gens", type=int, default=5)
    s.add_argument("--out")
    _add_train_flags(s)

    s = study_sub.add_parser("square-size")
    s.add_argument("--n-list", default="5,10,25,50,100")
    s.add_argument("--base-n", type=int, default=10)
    s.add_argument("--m", type=int, default=20)
    s.add_argument("--z", type=int, default=6)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--t", type=int, default=13)
    s.add_argument("--data-seed", type=int, default=42)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--seeds-per-n", type=int, default=1)
    s.add_argument("--gens", type=int, default=5)
    s.add_argument("--out")
    _add_train_flags(s)

    p = sub.add_parser("serve", help="serve the HTTP API and planner UI")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--metrics", help="metric report JSON to expose at /api/metrics")
    p.add_argument("--ui-dir", help="static UI assets to mount at /")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")

    return parser


def _cmd_synth(args) -> int:
    params = SynthesisParams(
        n=args.n, m=args.m, z_count=args.z, k_samples=args.k, t_months=args.t, seed=args.seed
    )
    save_dataset(synthesize_city(params), args.out)
    print(f"wrote {args.k} samples to {args.out}")
    return 0


def _cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    bundle, history = train(dataset, _train_config(args), seed=args.seed, variant=args.variant)
    save_checkpoint(bundle, args.out)
    if args.history_out:
        _write_json([h.as_dict() for h in history], args.history_out)
    print(
        f"trained {args.variant} for {args.epochs} epochs: "
        f"total {history[0].total:.4f} -> {history[-1].total:.4f}; wrote {args.out}"
    )
    return 0


def _cmd_eval(args) -> int:
    dataset = load_dataset(args.data)
    bundle = load_checkpoint(args.model)
    held_out = held_out_split(dataset, bundle.training["split_seed"])
    seed = args.seed if args.seed is not None else bundle.training["seed"]
    rng = Rng(seed, STREAM_EVAL)
    if args.dump:
        report, raw = evaluate(bundle, held_out, rng, gens_per_sample=args.gens, collect_raw=True)
        _write_json(raw, args.dump)
    else:
        report = evaluate(bundle, held_out, rng, gens_per_sample=args.gens)
    _write_json(report.as_dict(), args.out)
    if args.out:
        print(format_table(report))
    return 0


def _cmd_generate(args) -> int:
    if not 0 <= args.level < LEVEL_COUNT:
        raise ParameterError(f"--level must be in [0, {LEVEL_COUNT})")
    if args.count < 1:
        raise ParameterError("--count must be >= 1")
    bundle = load_checkpoint(args.model)
    if args.context_id is not None:
        if not args.data:
            raise ParameterError("--context-id requires --data")
        dataset = load_dataset(args.data)
        matches = [s for s in dataset if s.sample_id == args.context_id]
        if not matches:
            raise ParameterError(f"unknown sample id {args.context_id}")
        raw_features = matches[0].context.features
    elif args.context_file:
        with open(args.context_file, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        raw_features = np.asarray(doc["features"], dtype=np.float64)
    else:
        raise ParameterError("provide --context-id or --context-file")

    cond = make_condition(bundle.embed_features(raw_features), args.level, bundle.variant).c
    seed = args.seed if args.seed is not None else int.from_bytes(os.urandom(8), "big") >> 1
    configs = generate(bundle, cond, Rng(seed, 0), count=args.count)
    grids = []
    for cfg in configs:
        grid = np.maximum(np.rint(cfg.grid), 0.0) if args.round else cfg.grid
        grids.append(grid.tolist())
    payload = {
        "level": args.level,
        "seed": seed,
        "configurations": grids,
        "per_category_totals": [np.asarray(g).sum(axis=(0, 1)).tolist() for g in grids],
    }
    _write_json(payload, args.out)
    return 0


def _cmd_ablation(args) -> int:
    dataset = load_dataset(args.data)
    config = _train_config(args)
    table = {}
    for variant in VARIANTS:
        per_seed = []
        for s in range(args.seeds):
            seed = args.seed + 101 * s
            bundle, _ = train(dataset, config, seed=seed, variant=variant, split_seed=args.seed)
            held_out = held_out_split(dataset, bundle.training["split_seed"])
            report = evaluate(bundle, held_out, Rng(seed, STREAM_EVAL), gens_per_sample=args.gens)
            per_seed.append(report.averages())
        table[variant] = {
            name: float(np.mean([r[name] for r in per_seed])) for name in ("kl", "js", "hd", "cos")
        }
    payload = {"seeds": args.seeds, "variants": table}
    _write_json(payload, args.out)
    if args.out:
        width = max(len(v) for v in VARIANTS)
        print(f"{'variant':<{width}} {'kl':>10} {'js':>10} {'hd':>10} {'cos':>10}")
        for variant, row in table.items():
            print(
                f"{variant:<{width}} {row['kl']:>10.6f} {row['js']:>10.6f} "
                f"{row['hd']:>10.6f} {row['cos']:>10.6f}"
            )
    return 0


def _cmd_study(args) -> int:
    config = _train_config(args)
    if args.study == "stability":
        dataset = load_dataset(args.data)
        out = stability_study(
            dataset, config, master_seed=args.seed, runs=args.runs, gens_per_sample=args.gens
        )
        _write_json(out, args.out)
    else:
        n_values = tuple(int(v) for v in args.n_list.split(","))
        base = SynthesisParams(
            n=args.base_n, m=args.m, z_count=args.z, k_samples=args.k, t_months=args.t,
            seed=args.data_seed,
        )
        rows = square_size_study(
            base,
            config,
            n_values=n_values,
            master_seed=args.seed,
            seeds_per_n=args.seeds_per_n,
            gens_per_sample=args.gens,
        )
        _write_json(rows, args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_store, create_app

    store = build_store(args.model, args.data, args.metrics)
    app = create_app(store, ui_dir=args.ui_dir)
    port = int(os.environ.get("LANDGEN_PORT", args.port))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


_HANDLERS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "generate": _cmd_generate,
    "ablation": _cmd_ablation,
    "study": _cmd_study,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except LandgenError as exc:
        return _fail(type(exc).__name__, str(exc))
    except FileNotFoundError as exc:
        return _fail("missing_file", str(exc))
    except (ValueError, KeyError) as exc:
        return _fail("invalid_input", str(exc))


if __name__ == "__main__":
    sys.exit(main())
