"""Command line entry points: run sessions, serve the API, inspect results."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .data import TRAIN, TEST, load_ucr_files, z_normalize
from .nn.classifier import build_cnn
from .nn.training import TrainConfig, train_arrays
from .session import SessionStore, read_json, run_automatic_phase, run_counterfactual


def _default_store() -> str:
    return os.environ.get("TSXPLAIN_STORE", "./tsxplain-sessions")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsxplain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="create a session and run its automatic phase")
    p.add_argument("--config", required=True, help="path to a session config JSON")
    p.add_argument("--store", default=None, help="session store directory")

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--port", type=int, default=None,
                   help="port (default: APP_PORT env or 8000)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--store", default=None)
    p.add_argument("--static", default=None, help="directory of UI files to serve at /")

    p = sub.add_parser("rank", help="print a finished session's ranking table")
    p.add_argument("--session", required=True)
    p.add_argument("--store", default=None)

    p = sub.add_parser("train", help="train a convolutional classifier on a file pair")
    p.add_argument("--train-file", required=True)
    p.add_argument("--test-file", required=True)
    p.add_argument("--out", required=True, help="where to write the model manifest")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--filters", default="3,6,9",
                   help="comma-separated conv filter counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--znormalize", action="store_true")

    p = sub.add_parser("cf", help="counterfactual for one working-set sample")
    p.add_argument("--session", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--method", choices=("native", "wachter"), default="native")
    p.add_argument("--store", default=None)

    return parser


def _cmd_run(args) -> int:
    store = SessionStore(args.store or _default_store())
    session = store.create(read_json(args.config))
    print(f"session {session.id}: running")
    run_automatic_phase(session)
    status = session.status()
    if status["state"] == "done":
        print(f"session {session.id}: done")
        return 0
    print(f"session {session.id}: failed at {status['stage']}: {status['reason']}")
    return 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("APP_PORT", "8000"))
    app = create_app(args.store or _default_store(), static_dir=args.static)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def _cmd_rank(args) -> int:
    store = SessionStore(args.store or _default_store())
    session = store.load(args.session)
    table = session.artifact("ranking")["table"]
    columns = table["columns"]
    name_w = max(len("method"), *(len(m) for m in table["methods"]))
    col_w = [max(len(c), 8) for c in columns]
    header = "method".ljust(name_w) + "  " + "  ".join(
        c.rjust(w) for c, w in zip(columns, col_w)
    ) + "  mean_drop  beats_random"
    print(header)
    for m in table["methods"]:
        row = m.ljust(name_w)
        for c, w in zip(columns, col_w):
            row += "  " + f"{table['cells'][m][c]:.4f}".rjust(w)
        row += f"  {table['mean_drop'][m]:9.4f}"
        row += f"  {str(table['beats_random'][m]).lower():>12}"
        print(row)
    return 0


def _cmd_train(args) -> int:
    dataset = load_ucr_files(args.train_file, args.test_file)
    samples = dataset.samples
    if args.znormalize:
        samples = np.vstack([z_normalize(r) for r in samples])
    filters = tuple(int(f) for f in args.filters.split(","))
    model = build_cnn(
        dataset.length, dataset.class_count, filters=filters, seed=args.seed
    )
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )
    train_idx = dataset.indices(TRAIN)
    history = train_arrays(
        model, samples[train_idx], dataset.labels[train_idx], config
    )
    model.save(args.out)
    test_idx = dataset.indices(TEST)
    test_acc = float(
        np.mean(
            model.predict(samples[test_idx].astype(np.float64))
            == dataset.labels[test_idx]
        )
    )
    print(
        f"trained {args.epochs} epochs: "
        f"train_acc={history.accuracy[-1]:.4f} test_acc={test_acc:.4f}"
    )
    print(f"model written to {args.out}")
    return 0


def _cmd_cf(args) -> int:
    store = SessionStore(args.store or _default_store())
    session = store.load(args.session)
    result = run_counterfactual(session, args.index, args.method)
    print(json.dumps(result["counterfactual"], indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "serve": _cmd_serve,
        "rank": _cmd_rank,
        "train": _cmd_train,
        "cf": _cmd_cf,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
