"""Command-line interface: gen-data | train | eval | detect | gradcheck.

Exit codes: 0 success, 1 usage error, 2 IO/format error, 3 validation
failure (gradcheck over tolerance). Errors go to stderr; machine output goes
to files or stdout only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ModelFileError, PgmError, StreamError
from .persistence import load_model, save_model
from .pgm import read_corpus_dir, write_corpus_dir
from .pipeline import SamplerConfig, detect_stream, make_gallery, write_report
from .synth import KINDS, generate_corpus
from .training import (
    GRADCHECK_TOLERANCE,
    TrainConfig,
    build_pairs,
    evaluate,
    standard_gradcheck,
    train,
    write_history,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _roi(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected x,y,w,h, got {text!r}")
    try:
        return tuple(int(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"roi values must be integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="railtwin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("gen-data", formatter_class=fmt, help="generate a synthetic corpus")
    p.add_argument("--out", required=True, help="output directory for img_%%05d.pgm files")
    p.add_argument("--kind", required=True, choices=KINDS, help="scene kind")
    p.add_argument("--count", type=int, default=500, help="number of images")
    p.add_argument("--seed", type=int, default=0, help="base seed; image i uses seed+i")

    p = sub.add_parser("train", formatter_class=fmt, help="train a model on PGM corpora")
    p.add_argument("--pos", required=True, help="directory of positive (track) images")
    p.add_argument("--neg", required=True, help="directory of negative images")
    p.add_argument("--bench", required=True, help="directory of benchmark track images")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--epochs", type=int, default=100, help="max training epochs")
    p.add_argument("--lr", type=float, default=0.01, help="learning rate")
    p.add_argument("--momentum", type=float, default=0.9, help="SGD momentum")
    p.add_argument("--batch", type=int, default=16, help="minibatch size")
    p.add_argument("--seed", type=int, default=0, help="training seed")
    p.add_argument("--target-acc", type=float, default=0.95,
                   help="stop once held-out accuracy reaches this")
    p.add_argument("--warm-start", default=None, metavar="MODEL",
                   help="start from an existing model file instead of fresh weights")

    p = sub.add_parser("eval", formatter_class=fmt, help="evaluate a model on PGM corpora")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--pos", required=True, help="directory of positive images")
    p.add_argument("--neg", required=True, help="directory of negative images")
    p.add_argument("--bench", required=True, help="directory of benchmark images")

    p = sub.add_parser("detect", formatter_class=fmt, help="scan a frame stream for anomalies")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--bench", required=True, help="directory of benchmark images")
    p.add_argument("--frames", required=True, help="directory of frame_%%06d.pgm files")
    p.add_argument("--report", required=True, help="output JSONL report path")
    p.add_argument("--input-fps", type=float, default=30.0, help="capture frame rate")
    p.add_argument("--analyze-fps", type=float, default=10.0, help="analysis frame rate")
    p.add_argument("--threshold", type=float, default=0.5, help="anomaly score threshold")
    p.add_argument("--roi", type=_roi, default=None, metavar="x,y,w,h",
                   help="track region of interest (default: full frame)")

    p = sub.add_parser("gradcheck", formatter_class=fmt,
                       help="check analytic gradients against finite differences")
    p.add_argument("--seed", type=int, default=1, help="seed for model, pair, and sampling")
    p.add_argument("--samples", type=int, default=200, help="number of sampled weights")

    return parser


def _cmd_gen_data(args) -> int:
    images = generate_corpus(args.kind, args.count, args.seed)
    write_corpus_dir(images, args.out)
    print(f"wrote {len(images)} {args.kind} images to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_train(args) -> int:
    benchmarks = read_corpus_dir(args.bench)
    positives = read_corpus_dir(args.pos)
    negatives = read_corpus_dir(args.neg)
    pairs = build_pairs(benchmarks, positives, negatives)
    config = TrainConfig(
        learning_rate=args.lr,
        momentum=args.momentum,
        batch_size=args.batch,
        max_epochs=args.epochs,
        target_accuracy=args.target_acc,
        seed=args.seed,
        warm_start=args.warm_start,
    )

    def progress(stats):
        print(
            f"epoch {stats.epoch}: mean_loss={stats.mean_loss:.6f} "
            f"val_accuracy={stats.val_accuracy:.4f}",
            file=sys.stderr,
        )

    model, history = train(config, pairs, on_epoch=progress)
    save_model(model, args.out)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    write_history(history, os.path.join(out_dir, "history.csv"))
    if history:
        final = history[-1].val_accuracy
        if final < config.target_accuracy:
            print(
                f"warning: target accuracy {config.target_accuracy} not reached "
                f"within {config.max_epochs} epochs",
                file=sys.stderr,
            )
        print(f"{final:.6f}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    pairs = build_pairs(
        read_corpus_dir(args.bench), read_corpus_dir(args.pos), read_corpus_dir(args.neg)
    )
    report = evaluate(model, pairs)
    tp, tn, fp, fn = report.confusion
    print(json.dumps({
        "accuracy": report.accuracy,
        "mean_distance_similar": report.mean_distance_similar,
        "mean_distance_dissimilar": report.mean_distance_dissimilar,
        "confusion": {"tp": tp, "tn": tn, "fp": fp, "fn": fn},
    }))
    return EXIT_OK


def _cmd_detect(args) -> int:
    model = load_model(args.model)
    gallery = make_gallery(model, read_corpus_dir(args.bench))
    cfg = SamplerConfig(input_fps=args.input_fps, analyze_fps=args.analyze_fps)
    records, events = detect_stream(
        model, gallery, args.frames, cfg, roi=args.roi, threshold=args.threshold
    )
    write_report(records, events, args.report)
    flagged = sum(r.anomalous for r in records)
    print(
        f"scored {len(records)} frames: {flagged} anomalous, {len(events)} event(s); "
        f"report at {args.report}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    worst = standard_gradcheck(args.seed, args.samples)
    print(f"{worst:.6e}")
    if worst > GRADCHECK_TOLERANCE:
        print(
            f"gradient check FAILED: {worst:.6e} > {GRADCHECK_TOLERANCE:.0e}",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    return EXIT_OK


_HANDLERS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "detect": _cmd_detect,
    "gradcheck": _cmd_gradcheck,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (PgmError, ModelFileError, StreamError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
