"""Command-line driver: ``gwt {gen,train,eval,plot,bench}``.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import classifiers as clf
from . import dataset as dsmod
from . import evaluation as ev
from . import plotting
from .errors import DomainError, FormatError, NumericalError
from .features import FEATURE_KINDS, FeaturePipeline
from .waveforms import CLASS_NAMES, TimeGrid, TransientClass

log = logging.getLogger("gwtransient")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_model_flags(p):
    p.add_argument("--epochs", type=int, help="training epochs (default: 50, or 100 for mlp and sae)")
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--lr", type=float, help="ADAM learning rate (default 1e-5, or 1e-3 with --fast)")
    p.add_argument("--decay", type=float, default=1e-5)
    p.add_argument("--fast", action="store_true", help="desk-scale learning rate 1e-3")
    p.add_argument("--features", choices=FEATURE_KINDS, default="none")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--hidden", type=int, default=8000, help="ELM hidden neurons")
    p.add_argument("--svm-c", type=float, default=1.0)


def build_parser():
    parser = _Parser(prog="gwt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    g = sub.add_parser("gen", help="generate a labeled dataset")
    g.add_argument("--per-class", type=int, default=800)
    g.add_argument("--snr-min", type=float, default=5.0)
    g.add_argument("--snr-max", type=float, default=25.0)
    g.add_argument("--samples", type=int, default=1024)
    g.add_argument("--rate", type=float, default=4096.0)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", required=True)
    g.add_argument("--sn-catalog", help="plain-text supernova catalog (default: analytic surrogates)")
    g.add_argument("--csv", nargs="?", const=True, default=None, metavar="PATH",
                   help="also export CSV (default path: OUT with .csv suffix)")

    t = sub.add_parser("train", help="train one model on a dataset file")
    t.add_argument("--model", required=True, metavar="{" + "|".join(clf.MODEL_NAMES) + "}")
    t.add_argument("--data", required=True)
    t.add_argument("--split", type=float, default=0.8)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--report", help="report JSON path (default: OUT.report.json)")
    _add_model_flags(t)

    e = sub.add_parser("eval", help="evaluate a trained model")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--report", required=True)
    e.add_argument("--confusion", required=True)
    e.add_argument("--split", type=float, help="evaluate only the held-out part of this split")
    e.add_argument("--seed", type=int, help="split seed (default: the one stored in the model)")

    p = sub.add_parser("plot", help="render a signal or a confusion matrix as SVG")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data")
    src.add_argument("--confusion")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="train and score all nine models (accuracy and timing tables)")
    b.add_argument("--per-class", type=int, default=800)
    b.add_argument("--data", help="use an existing dataset file instead of generating one")
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--split", type=float, default=0.8)
    b.add_argument("--models", default=",".join(clf.MODEL_NAMES))
    b.add_argument("--out-dir", default="bench_out")
    _add_model_flags(b)
    return parser


def _spec_from_args(kind, args, seed):
    if kind not in clf.MODEL_NAMES:
        raise UsageError(f"unknown model {kind!r}; valid names: {', '.join(clf.MODEL_NAMES)}")
    try:
        return clf.default_spec(
            kind,
            fast=args.fast,
            epochs=args.epochs,
            batch_size=args.batch,
            lr=args.lr,
            decay=args.decay,
            seed=seed,
            trees=args.trees,
            max_depth=args.depth,
            hidden=args.hidden,
            c=args.svm_c,
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def cmd_generate(args):
    if args.per_class < 1:
        raise UsageError("--per-class must be >= 1")
    if not 0 < args.snr_min <= args.snr_max:
        raise UsageError("need 0 < --snr-min <= --snr-max")
    try:
        grid = TimeGrid(args.samples, args.rate)
        config = dsmod.DatasetConfig(
            per_class=args.per_class, snr_min=args.snr_min, snr_max=args.snr_max,
            grid=grid, master_seed=args.seed, supernova_catalog=args.sn_catalog,
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    ds = dsmod.build_dataset(config)
    dsmod.write_dataset(ds, args.out)
    log.info("wrote %d examples to %s", len(ds), args.out)
    if args.csv is not None:
        csv_path = Path(args.out).with_suffix(".csv") if args.csv is True else Path(args.csv)
        dsmod.export_csv(ds, csv_path)
        log.info("wrote CSV export to %s", csv_path)
    return EXIT_OK


def _split(ds, fraction, seed):
    try:
        return dsmod.holdout_split(ds, fraction, seed)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args):
    spec = _spec_from_args(args.model, args, args.seed)
    if not 0 < args.split < 1:
        raise UsageError("--split must lie in (0, 1)")
    ds = dsmod.read_dataset(args.data)
    train, test = _split(ds, args.split, args.seed)
    model, report = clf.train(spec, train, features=FeaturePipeline(args.features), log=log.debug)
    cm = ev.confusion_matrix(test.labels, model.predict(test.x))
    report.accuracy = ev.accuracy(cm)
    model.meta = {"split": args.split, "split_seed": args.seed, "train_seconds": report.wall_time,
                  "data": str(args.data)}
    clf.save_model(model, args.out)
    report_path = args.report or f"{args.out}.report.json"
    ev.write_report_json([report], report_path)
    print(f"{report.model}: test accuracy {report.accuracy:.3f}% "
          f"(train {report.train_accuracy:.3f}%), {report.wall_time:.2f} s")
    return EXIT_OK


def cmd_eval(args):
    model = clf.load_model(args.model)
    ds = dsmod.read_dataset(args.data)
    if ds.grid.n_samples != model.n_features:
        raise DomainError(
            f"feature-width mismatch: model expects {model.n_features} samples per example, "
            f"dataset has {ds.grid.n_samples}"
        )
    if args.split is not None:
        seed = args.seed if args.seed is not None else model.meta.get("split_seed", 0)
        _, ds = _split(ds, args.split, seed)
    cm = ev.confusion_matrix(ds.labels, model.predict(ds.x))
    report = clf.TrainReport(
        model.spec.display_name, float(model.meta.get("train_seconds", 0.0)), model.spec.epochs,
        accuracy=ev.accuracy(cm),
    )
    ev.write_report_json([report], args.report)
    ev.write_confusion_csv(cm, args.confusion)
    print(f"{report.model}: accuracy {report.accuracy:.3f}% on {cm.total} examples")
    return EXIT_OK


def cmd_plot(args):
    if args.data:
        ds = dsmod.read_dataset(args.data)
        if not 0 <= args.index < len(ds):
            raise UsageError(f"--index {args.index} out of range for {len(ds)} examples")
        label = TransientClass(int(ds.labels[args.index]))
        title = f"{CLASS_NAMES[label]} (SNR {ds.snr[args.index]:.1f})"
        svg = plotting.signal_svg(ds.x[args.index], ds.grid.sample_rate, title)
    else:
        cm, names = ev.read_confusion_csv(args.confusion)
        svg = plotting.confusion_svg(cm.counts, names)
    Path(args.out).write_text(svg)
    return EXIT_OK


def cmd_bench(args):
    start = time.perf_counter()
    kinds = [k.strip() for k in args.models.split(",") if k.strip()]
    specs = [_spec_from_args(k, args, args.seed) for k in kinds]
    if not specs:
        raise UsageError("--models is empty")
    if args.data:
        ds = dsmod.read_dataset(args.data)
    else:
        if args.per_class < 1:
            raise UsageError("--per-class must be >= 1")
        ds = dsmod.build_dataset(dsmod.DatasetConfig(per_class=args.per_class, master_seed=args.seed))
    train, test = _split(ds, args.split, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    reports, confusions, table = ev.benchmark_training(
        specs, train, test, features=lambda: FeaturePipeline(args.features), log=log.info
    )
    ev.write_report_json(reports, out / "report.json")
    for kind, cm in confusions.items():
        ev.write_confusion_csv(cm, out / f"confusion_{kind}.csv")
        (out / f"confusion_{kind}.svg").write_text(
            plotting.confusion_svg(cm.counts, [CLASS_NAMES[TransientClass(i)] for i in range(len(cm.counts))],
                                   title=clf.DISPLAY_NAMES[kind])
        )
    table += f"\n\nTotal bench time: {time.perf_counter() - start:.1f} s"
    (out / "table.txt").write_text(table + "\n")
    print(table)
    return EXIT_OK if all(r.error is None for r in reports) else EXIT_NUMERICAL


COMMANDS = {"gen": cmd_generate, "train": cmd_train, "eval": cmd_eval, "plot": cmd_plot, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage problems and --help this way
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gwt {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, DomainError, OSError) as exc:
        print(f"gwt {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"gwt {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
