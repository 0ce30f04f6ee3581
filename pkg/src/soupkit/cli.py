"""Command-line surface: pool -> soup -> eval -> analyze workflows.

One binary with subcommands. Exit codes: 0 success, 2 bad input or bad
usage, 1 internal failure. Every output is a deterministic function of
the inputs and flags, so repeated runs produce byte-identical files.

A snapshot manifest is a JSON list of
{"epoch": int, "path": str, "loss": float, "accuracy": float, "f1": float}
(plus "source_tag" once a pool step has run). Relative checkpoint paths
resolve against the manifest file's directory; manifests written here use
paths relative to their own location, keeping fixture trees relocatable.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import _kernels
from .datasets import (
    load_dataset_csv,
    load_predictions_csv,
    save_dataset_csv,
    save_predictions_csv,
)
from .diversity import (
    diagnostics_dict,
    diversity_report,
    soft_vote,
    write_distance_csv,
    write_embedding_csv,
)
from .errors import (
    EmptyPoolError,
    MalformedFileError,
    SoupkitError,
    TooFewModelsError,
)
from .metrics import accuracy, format_delta, macro_metrics, select_best_checkpoint
from .mlp import MlpEvaluator, MlpSpec, forward
from .soup import (
    CandidatePool,
    Snapshot,
    build_candidate_pool,
    greedy_soup,
    soup_report,
    uniform_soup,
)
from .synth import synth_run
from .tensor_store import Checkpoint, load_checkpoint, save_checkpoint

FORMAT_VERSION = 1


class UsageError(Exception):
    """Bad flag combination; rendered with the subcommand's usage line."""

    def __init__(self, parser: argparse.ArgumentParser, message: str):
        super().__init__(message)
        self.parser = parser


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: not valid JSON ({exc})") from exc


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_manifest(path: str | Path) -> list[dict]:
    """Validated manifest entries; 'resolved' holds the absolute ckpt path."""
    doc = _read_json(path)
    if not isinstance(doc, list):
        raise MalformedFileError(f"{path}: manifest must be a JSON list")
    if not doc:
        raise EmptyPoolError("empty snapshot list")
    base = Path(path).resolve().parent
    entries = []
    for i, raw in enumerate(doc):
        if not isinstance(raw, dict):
            raise MalformedFileError(f"{path}: entry {i} is not an object")
        try:
            entry = {
                "epoch": int(raw["epoch"]),
                "path": str(raw["path"]),
                "loss": float(raw["loss"]),
                "accuracy": float(raw["accuracy"]),
                "f1": float(raw["f1"]),
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedFileError(f"{path}: entry {i}: {exc}") from exc
        if isinstance(raw.get("epoch"), bool) or not isinstance(raw["epoch"], int):
            raise MalformedFileError(f"{path}: entry {i}: epoch must be an integer")
        tag = raw.get("source_tag", "")
        if not isinstance(tag, str):
            raise MalformedFileError(f"{path}: entry {i}: source_tag must be a string")
        entry["source_tag"] = tag
        p = Path(entry["path"])
        entry["resolved"] = str(p if p.is_absolute() else base / p)
        entries.append(entry)
    return entries


def _load_pool(entries: list[dict]) -> CandidatePool:
    return CandidatePool(
        checkpoints=[load_checkpoint(e["resolved"]) for e in entries],
        epoch_ids=[e["epoch"] for e in entries],
        source_tags=[e["source_tag"] for e in entries],
    )


def _spec_and_val(args) -> tuple[MlpSpec, "object"]:
    spec = MlpSpec.from_file(args.spec)
    val = load_dataset_csv(args.val, num_classes=spec.num_classes)
    return spec, val


def cmd_pool(args) -> int:
    entries = _load_manifest(args.manifest)
    snapshots = [
        Snapshot(
            epoch=e["epoch"],
            checkpoint=load_checkpoint(e["resolved"]),
            loss=e["loss"],
            accuracy=e["accuracy"],
            f1=e["f1"],
        )
        for e in entries
    ]
    pool = build_candidate_pool(snapshots, args.k)
    out = _out_dir(args)
    by_epoch = {e["epoch"]: e for e in entries}
    filtered = []
    for epoch, tag in zip(pool.epoch_ids, pool.source_tags):
        src = by_epoch[epoch]
        filtered.append(
            {
                "epoch": epoch,
                "path": os.path.relpath(src["resolved"], out),
                "loss": src["loss"],
                "accuracy": src["accuracy"],
                "f1": src["f1"],
                "source_tag": tag,
            }
        )
    _write_json(out / "pool_manifest.json", filtered)
    _write_json(
        out / "pool_summary.json",
        {
            "format_version": FORMAT_VERSION,
            "k": args.k,
            "snapshot_count": len(entries),
            "pool_size": pool.size,
            "max_pool_size": 3 * args.k,
            "members": [
                {"epoch": e, "source_tag": t}
                for e, t in zip(pool.epoch_ids, pool.source_tags)
            ],
        },
    )
    print(f"pool: kept {pool.size} of {len(entries)} snapshots (k={args.k})")
    return 0


def cmd_soup(args) -> int:
    entries = _load_manifest(args.manifest)
    pool = _load_pool(entries)
    out = _out_dir(args)
    if args.mode == "uniform":
        soup = uniform_soup(pool)
        report = {
            "format_version": FORMAT_VERSION,
            "mode": args.mode,
            "pool_size": pool.size,
            "selected": list(range(pool.size)),
            "final_size": pool.size,
            "candidates": [
                {
                    "index": i,
                    "epoch": pool.epoch_ids[i],
                    "source_tag": pool.source_tags[i],
                    "accuracy": None,
                    "accepted": True,
                }
                for i in range(pool.size)
            ],
        }
        selected = list(range(pool.size))
    else:
        if args.val is None or args.spec is None:
            raise UsageError(
                args.subparser, f"--mode {args.mode} requires --val and --spec"
            )
        spec, val = _spec_and_val(args)
        order = "sorted" if args.mode == "greedy-sorted" else "index"
        sel, soup = greedy_soup(pool, MlpEvaluator(spec), val, order=order)
        report = soup_report(sel, pool)
        report["mode"] = args.mode
        selected = sel.selected
    soup.meta["soup_mode"] = args.mode
    soup.meta["ingredient_epochs"] = ",".join(
        str(pool.epoch_ids[i]) for i in selected
    )
    save_checkpoint(soup, out / "soup.json")
    _write_json(out / "soup_report.json", report)
    print(f"soup: {args.mode}, {len(selected)} of {pool.size} candidates")
    return 0


def cmd_eval(args) -> int:
    spec = MlpSpec.from_file(args.spec)
    test = load_dataset_csv(args.test, num_classes=spec.num_classes)
    reports = []
    for path in args.checkpoints:
        cp = load_checkpoint(path)
        report = macro_metrics(forward(cp, spec, test), test.labels)
        doc = report.to_dict()
        reports.append((Path(path).name, report, doc))
    winner = select_best_checkpoint([r for _, r, _ in reports])
    out_doc = {
        "format_version": FORMAT_VERSION,
        "reports": [
            {"checkpoint": name, **doc} for name, _, doc in reports
        ],
        "winner": winner,
    }
    if args.baseline is not None:
        base_doc = _read_json(args.baseline)
        if isinstance(base_doc, dict) and "reports" in base_doc:
            base = base_doc["reports"][int(base_doc.get("winner", 0))]
        else:
            base = base_doc
        if not isinstance(base, dict):
            raise MalformedFileError(f"{args.baseline}: not a metrics report")
        current = reports[winner][2]
        out_doc["baseline_delta"] = {
            key: format_delta(float(base[key]), float(current[key]))
            for key in ("accuracy", "macro_precision", "macro_recall", "macro_f1")
        }
    out = _out_dir(args)
    _write_json(out / "eval.json", out_doc)
    name, rep, _ = reports[winner]
    line = f"eval: best {name} accuracy {rep.accuracy:.4f} macro_f1 {rep.macro_f1:.4f}"
    if "baseline_delta" in out_doc:
        line += f" delta {out_doc['baseline_delta']['accuracy']}"
    print(line)
    return 0


def _analyze_inputs(args) -> tuple[list, list[str], list]:
    spec = MlpSpec.from_file(args.spec) if args.spec else None
    val = None
    if args.val is not None:
        val = load_dataset_csv(
            args.val, num_classes=spec.num_classes if spec else None
        )
    preds = []
    names = []
    accuracies: list[float | None] = []
    for raw in args.inputs:
        path = Path(raw)
        if path.suffix == ".json":
            if spec is None or val is None:
                raise UsageError(
                    args.subparser,
                    "checkpoint inputs require --spec and --val",
                )
            pm = forward(load_checkpoint(path), spec, val)
        else:
            pm = load_predictions_csv(path)
        preds.append(pm)
        names.append(path.stem)
        accuracies.append(accuracy(pm, val.labels) if val is not None else None)
    if args.names is not None:
        names = [n.strip() for n in args.names.split(",")]
        if len(names) != len(preds):
            raise UsageError(
                args.subparser,
                f"--names lists {len(names)} names for {len(preds)} inputs",
            )
    if len(set(names)) != len(names):
        raise UsageError(
            args.subparser, "duplicate model names; disambiguate with --names"
        )
    return preds, names, accuracies


def cmd_analyze(args) -> int:
    if len(args.inputs) < 2:
        raise TooFewModelsError(f"need >= 2 models, got {len(args.inputs)}")
    preds, names, accuracies = _analyze_inputs(args)
    # MDS needs n >= dim + 1, so a two-model run gets a 1-D layout
    bundle = diversity_report(preds, names, accuracies, dim=min(2, len(preds) - 1))
    out = _out_dir(args)
    write_distance_csv(bundle.distances, out / "distances.csv")
    write_embedding_csv(bundle.embedding, bundle.accuracies, out / "embedding.csv")
    _write_json(out / "diagnostics.json", diagnostics_dict(bundle))
    print(f"analyze: {len(names)} models, stress {bundle.stress:.6f}")
    return 0


def cmd_softvote(args) -> int:
    preds = [load_predictions_csv(p) for p in args.inputs]
    vote = soft_vote(preds)
    out = _out_dir(args)
    save_predictions_csv(vote, out / "softvote.csv")
    if args.val is not None:
        val = load_dataset_csv(args.val, num_classes=vote.num_classes)
        report = macro_metrics(vote, val.labels)
        _write_json(
            out / "softvote_metrics.json",
            {"format_version": FORMAT_VERSION, "members": len(preds), **report.to_dict()},
        )
    print(f"softvote: averaged {len(preds)} prediction files")
    return 0


def cmd_gen_data(args) -> int:
    hidden = tuple(int(h) for h in args.hidden.split(",") if h.strip() != "")
    run = synth_run(
        seed=args.seed,
        num_features=args.features,
        num_classes=args.classes,
        hidden=hidden,
        snapshots=args.snapshots,
        n_val=args.n_val,
        n_test=args.n_test,
    )
    out = _out_dir(args)
    run.spec.save(out / "spec.json")
    save_dataset_csv(run.val, out / "val.csv")
    save_dataset_csv(run.test, out / "test.csv")
    manifest = []
    for snap in run.snapshots:
        name = f"ckpt_{snap.epoch:03d}.json"
        save_checkpoint(snap.checkpoint, out / name)
        manifest.append(
            {
                "epoch": snap.epoch,
                "path": name,
                "loss": snap.loss,
                "accuracy": snap.accuracy,
                "f1": snap.f1,
            }
        )
    _write_json(out / "manifest.json", manifest)
    print(f"gen-data: {len(manifest)} snapshots in {out} (seed {args.seed})")
    return 0


def cmd_backend(args) -> int:
    print(_kernels.BACKEND)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soupkit",
        description="Checkpoint soups: pool, average, evaluate, and analyze.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("pool", help="filter a snapshot manifest to the candidate pool")
    p.add_argument("--manifest", required=True, help="snapshot manifest JSON")
    p.add_argument("--k", type=int, default=8, help="snapshots kept per metric (default 8)")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("soup", help="average pool candidates into one checkpoint")
    p.add_argument("--manifest", required=True, help="pool or snapshot manifest JSON")
    p.add_argument(
        "--mode",
        choices=("uniform", "greedy", "greedy-sorted"),
        default="uniform",
        help="averaging strategy (default uniform)",
    )
    p.add_argument("--val", help="validation dataset CSV (greedy modes)")
    p.add_argument("--spec", help="model spec JSON (greedy modes)")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_soup)

    p = sub.add_parser("eval", help="score checkpoints on a test dataset")
    p.add_argument("checkpoints", nargs="+", metavar="checkpoint", help="checkpoint JSON files")
    p.add_argument("--spec", required=True, help="model spec JSON")
    p.add_argument("--test", required=True, help="test dataset CSV")
    p.add_argument("--baseline", help="earlier eval JSON to report deltas against")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="pairwise distances, MDS layout, stress")
    p.add_argument(
        "inputs",
        nargs="+",
        metavar="input",
        help="prediction CSVs and/or checkpoint JSONs",
    )
    p.add_argument("--spec", help="model spec JSON (needed for checkpoint inputs)")
    p.add_argument("--val", help="dataset CSV for predictions and accuracy labels")
    p.add_argument("--names", help="comma-separated model names (default: file stems)")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("softvote", help="average prediction files")
    p.add_argument("inputs", nargs="+", metavar="predictions", help="prediction CSVs")
    p.add_argument("--val", help="dataset CSV to score the vote against")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_softvote)

    p = sub.add_parser("gen-data", help="write a deterministic synthetic fixture")
    p.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    p.add_argument("--snapshots", type=int, default=8, help="snapshot count (default 8)")
    p.add_argument("--features", type=int, default=4, help="feature count (default 4)")
    p.add_argument("--classes", type=int, default=3, help="class count (default 3)")
    p.add_argument(
        "--hidden",
        default="6",
        help="comma-separated hidden widths, empty for none (default 6)",
    )
    p.add_argument("--n-val", type=int, default=60, help="validation rows (default 60)")
    p.add_argument("--n-test", type=int, default=60, help="test rows (default 60)")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("backend", help="print the active kernel backend")
    p.set_defaults(func=cmd_backend)

    for name, sp in sub.choices.items():
        sp.set_defaults(subparser=sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(exc.parser.format_usage(), end="", file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SoupkitError, OSError, ValueError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
