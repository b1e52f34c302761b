"""Command-line entry points: `train` and `evaluate`."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .dataset import load_csid
from .models import GanConfig, GanConfigError
from .score import evaluate
from .train import load_checkpoint, save_checkpoint, train


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gan-detector")
    sub = p.add_subparsers(dest="command")

    t = sub.add_parser("train", help="train on a CSID dataset")
    t.add_argument("dataset", type=Path)
    t.add_argument("--out", type=Path, default=Path("gan_out"))
    t.add_argument("--epochs", type=int, default=20)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--batch-size", type=int, default=64)

    e = sub.add_parser("evaluate", help="evaluate a trained checkpoint")
    e.add_argument("dataset", type=Path)
    e.add_argument("--checkpoint", type=Path, default=Path("gan_out"))
    e.add_argument("--fpr", type=float, default=0.1)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", type=Path, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_evaluate(args)
    except (GanConfigError, ValueError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _cmd_train(args) -> int:
    ds = load_csid(args.dataset)
    cfg = GanConfig(n_ant=ds.n_ant, n_sub=ds.n_sub, n_pilot=ds.n_pilot,
                    epochs=args.epochs, seed=args.seed,
                    batch_size=args.batch_size)
    models = train(args.dataset, cfg)
    save_checkpoint(models, args.out)
    first, last = models.log.val_reconstruction[0], models.log.val_reconstruction[-1]
    print(f"validation reconstruction: {first:.5f} -> {last:.5f}")
    print(f"checkpoint written to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    models = load_checkpoint(args.checkpoint)
    ds = load_csid(args.dataset)
    report = evaluate(models.generator, ds, target_fpr=args.fpr,
                      seed=args.seed)
    report["seed"] = args.seed
    report["dataset_digest"] = hashlib.sha256(
        Path(args.dataset).read_bytes()
    ).hexdigest()
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
