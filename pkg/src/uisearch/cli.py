"""Command-line entry points for the full pipeline.

Exit codes are a stable contract: 0 success, 1 usage error, 2 data error
(bad files, empty corpora, diverged training), 3 internal error.

Serve flags all have environment-variable overrides with a 1:1 mapping
(flag wins over env, env wins over the built-in default):

    --host UISEARCH_HOST          --port UISEARCH_PORT
    --weights UISEARCH_WEIGHTS    --index UISEARCH_INDEX
    --data UISEARCH_DATA          --default-k UISEARCH_DEFAULT_K
    --max-k UISEARCH_MAX_K        --cors UISEARCH_CORS
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import UISearchError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _env(name: str, default):
    return os.environ.get(f"UISEARCH_{name}", default)


def build_parser() -> _Parser:
    parser = _Parser(prog="uisearch", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate a synthetic labeled corpus")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--per-category", type=int, default=10)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train both networks on a corpus directory")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="weights file to write")
    p.add_argument("--log", help="training log JSON path (default: <out>.log.json)")
    p.add_argument("--resolution", type=int, default=256, help="square canvas size")
    p.add_argument("--m", type=int, default=4, choices=range(5))
    p.add_argument("--lr", type=float, default=0.00005)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dtype", default="float64", choices=("float64", "float32"))

    p = sub.add_parser("index", help="embed a corpus into a frozen index file")
    p.add_argument("--data", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("query", help="rank index entries against a query layout")
    p.add_argument("--index", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--layout", required=True, help="query layout, .xml (VOC) or .json (detections)")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--exclude", help="id to omit from results")
    p.add_argument("--json", action="store_true", dest="as_json")

    p = sub.add_parser("eval-retrieval", help="precision@K table over a labeled corpus")
    p.add_argument("--index", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--categories", help="categories.csv (default: <data>/categories.csv)")
    p.add_argument("--csv-out", help="write the table as CSV here")

    p = sub.add_parser("eval-detection", help="AP/mAP/AUC of detections against ground truth")
    p.add_argument("--gt", required=True, help="directory of ground-truth VOC XML")
    p.add_argument("--pred", required=True, help="JSON array of detection documents")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--confidence-threshold", type=float, default=0.0)
    p.add_argument("--csv-out")

    p = sub.add_parser("gradcheck", help="finite-difference check of every backward pass")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("serve", help="run the read-only HTTP query service")
    p.add_argument("--weights", default=_env("WEIGHTS", None))
    p.add_argument("--index", default=_env("INDEX", None))
    p.add_argument("--data", default=_env("DATA", None))
    p.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(_env("PORT", 8000)))
    p.add_argument("--default-k", type=int, default=int(_env("DEFAULT_K", 10)))
    p.add_argument("--max-k", type=int, default=int(_env("MAX_K", 50)))
    p.add_argument("--cors", default=_env("CORS", "*"), help="comma-separated allowed origins")
    return parser


def _cmd_gen_corpus(args) -> int:
    from .synth import GeneratorConfig, export_corpus, generate

    corpus = generate(GeneratorConfig(seed=args.seed, per_category=args.per_category))
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise UISearchError(f"{out} exists and is not a directory")
    export_corpus(corpus, out)
    print(f"wrote {len(corpus)} layouts to {out}")
    return EXIT_OK


def _load_corpus_checked(data_dir: str):
    from .voc import load_corpus

    corpus = load_corpus(data_dir)
    for name, message in corpus.failures:
        print(f"warning: {name}: {message}", file=sys.stderr)
    return corpus


def _cmd_train(args) -> int:
    from .net import AutoencoderConfig
    from .train import train
    from .voc import split_corpus
    from .weights import save_weights

    corpus = _load_corpus_checked(args.data)
    config = AutoencoderConfig(
        height=args.resolution,
        width=args.resolution,
        m=args.m,
        seed=args.seed,
        learning_rate=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        patience=args.patience,
        dtype=args.dtype,
    )
    split = split_corpus(corpus, args.seed)
    weights, log = train(corpus, split, config)
    save_weights(weights, args.out)
    log_path = args.log or f"{args.out}.log.json"
    Path(log_path).write_text(log.to_json(), encoding="utf-8")
    final = log.epochs[-1] if log.epochs else None
    if final is not None:
        print(
            f"trained {len(log.epochs)} epochs"
            f" (train ae {final.train_ae:.5f}, label {final.train_label:.5f}),"
            f" weights -> {args.out}"
        )
    else:
        print(f"wrote initialized weights -> {args.out}")
    return EXIT_OK


def _cmd_index(args) -> int:
    from .index import build_index, save_index
    from .weights import load_weights

    corpus = _load_corpus_checked(args.data)
    model, labelnet = load_weights(args.weights).build_models()
    index = build_index(corpus, model, labelnet)
    save_index(index, args.out)
    print(f"indexed {len(index)} layouts (dim {index.dim}) -> {args.out}")
    return EXIT_OK


def _load_query_layout(path: str):
    from .voc import parse_detections, parse_voc

    raw = Path(path).read_bytes()
    if path.endswith(".json"):
        return parse_detections(raw)
    return parse_voc(raw)


def _cmd_query(args) -> int:
    from .index import load_index, query
    from .net import embed
    from .weights import load_weights

    model, labelnet = load_weights(args.weights).build_models()
    index = load_index(args.index)
    layout = _load_query_layout(args.layout)
    z = embed(model, labelnet, layout)
    result = query(index, z, args.k, exclude=args.exclude, query_id=layout.id)
    if args.as_json:
        doc = {"query_id": layout.id,
               "results": [{"id": i, "distance": d} for i, d in result.entries]}
        print(json.dumps(doc, indent=2))
    else:
        for lid, dist in result.entries:
            print(f"{lid}\t{dist:.6f}")
    return EXIT_OK


def _cmd_eval_retrieval(args) -> int:
    from .metrics import eval_retrieval
    from .index import load_index
    from .voc import read_categories
    from .weights import load_weights

    corpus = _load_corpus_checked(args.data)
    categories_path = args.categories or str(Path(args.data) / "categories.csv")
    categories = read_categories(categories_path)
    if not categories:
        raise UISearchError(f"no categories found at {categories_path}")
    for layout in corpus.layouts:
        layout.category = categories.get(layout.id, layout.category)
    labeled = [l for l in corpus.layouts if l.category]
    if not labeled:
        raise UISearchError("no corpus layout carries a category label")
    model, labelnet = load_weights(args.weights).build_models()
    index = load_index(args.index)
    report = eval_retrieval(index, model, labelnet, labeled)
    print(report.to_text(), end="")
    if report.excluded_categories:
        print(f"(excluded small categories: {', '.join(report.excluded_categories)})")
    if args.csv_out:
        Path(args.csv_out).write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK


def _cmd_eval_detection(args) -> int:
    from .metrics import eval_detections
    from .voc import layout_from_detections_dict

    corpus = _load_corpus_checked(args.gt)
    if not corpus.layouts:
        raise UISearchError(f"no ground-truth layouts in {args.gt}")
    try:
        docs = json.loads(Path(args.pred).read_text(encoding="utf-8"))
    except ValueError as e:
        raise UISearchError(f"{args.pred}: invalid JSON: {e}") from e
    if not isinstance(docs, list):
        raise UISearchError(f"{args.pred}: expected a JSON array of detection documents")
    preds = [layout_from_detections_dict(d, args.confidence_threshold) for d in docs]
    report = eval_detections(corpus.layouts, preds, args.iou)
    print(report.to_text(), end="")
    if args.csv_out:
        Path(args.csv_out).write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    from .nn.gradcheck import run_full_suite

    reports = run_full_suite(seed=args.seed, tolerance=args.tolerance, corrupt=args.corrupt)
    worst = max(reports, key=lambda r: r.max_rel_error)
    for r in reports:
        status = "ok" if r.passed else "FAIL"
        print(f"{status:4} {r.name:40} max_rel_error={r.max_rel_error:.3e}")
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports)} checks, worst {worst.name} at {worst.max_rel_error:.3e}")
    return EXIT_OK if not failed else EXIT_DATA


def _cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    for flag in ("weights", "index", "data"):
        if getattr(args, flag) is None:
            raise _UsageError(f"--{flag} is required (or set UISEARCH_{flag.upper()})")
    config = ServiceConfig(
        weights_path=args.weights,
        index_path=args.index,
        data_dir=args.data,
        host=args.host,
        port=args.port,
        default_k=args.default_k,
        max_k=args.max_k,
        cors_origins=tuple(o.strip() for o in args.cors.split(",") if o.strip()),
    )
    serve(config)
    return EXIT_OK


_COMMANDS = {
    "gen-corpus": _cmd_gen_corpus,
    "train": _cmd_train,
    "index": _cmd_index,
    "query": _cmd_query,
    "eval-retrieval": _cmd_eval_retrieval,
    "eval-detection": _cmd_eval_detection,
    "gradcheck": _cmd_gradcheck,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UISearchError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as e:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
