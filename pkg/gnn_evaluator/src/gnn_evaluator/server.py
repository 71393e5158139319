"""Line-protocol service: architecture strings in, fitness out.

Reads newline-delimited JSON requests on stdin and answers on stdout,
one request at a time. The handshake is an init message carrying the
space description, answered with ready; evaluate messages are answered
with result (fitness = validation accuracy) or error; shutdown ends the
process. Stdout carries protocol messages only, all logging goes to
stderr. A malformed request that has no recoverable id is answered with
id -1.
"""

import argparse
import json
import sys

from .datasets import DEFAULT_DATA_DIR, load_dataset
from .model import parse_architecture
from .train import GnnHyperparams, evaluate_architecture, report


class SpaceDescription:
    """Component domains from an init message; validates architectures."""

    def __init__(self, layers: int, components):
        if layers <= 0:
            raise ValueError("layers must be positive")
        if len(components) != 5 * layers:
            raise ValueError(
                f"expected {5 * layers} components, got {len(components)}"
            )
        self.layers = layers
        self.domains = [tuple(str(v) for v in c["values"]) for c in components]
        self.names = [c["name"] for c in components]

    def check(self, text: str) -> None:
        chunks = text.strip().split(";")
        if len(chunks) != self.layers:
            raise ValueError(f"expected {self.layers} layers, got {len(chunks)}")
        for i, chunk in enumerate(chunks):
            fields = chunk.split(",")
            if len(fields) != 5:
                raise ValueError(f"layer {i} has {len(fields)} fields (expected 5)")
            for j, label in enumerate(fields):
                pos = 5 * i + j
                if label not in self.domains[pos]:
                    raise ValueError(
                        f"unknown value {label!r} for component {self.names[pos]!r}"
                    )


def serve(in_stream, out_stream, data, hyper, seed=0, log=sys.stderr):
    """Run the request loop until shutdown or end of input."""

    def reply(obj):
        out_stream.write(json.dumps(obj) + "\n")
        out_stream.flush()

    space = None
    for line in in_stream:
        if not line.strip():
            continue
        try:
            msg = json.loads(line)
            kind = msg["type"]
        except (ValueError, TypeError, KeyError):
            reply({"type": "error", "id": -1, "message": "unparseable request"})
            continue
        rid = msg.get("id", -1)
        if not isinstance(rid, int):
            rid = -1

        if kind == "init":
            try:
                space = SpaceDescription(msg["layers"], msg["components"])
            except (ValueError, TypeError, KeyError) as exc:
                reply({"type": "error", "id": rid, "message": f"bad init: {exc}"})
                continue
            reply({"type": "ready"})
        elif kind == "evaluate":
            if space is None:
                reply({"type": "error", "id": rid, "message": "init not received"})
                continue
            text = msg.get("architecture")
            if not isinstance(text, str):
                reply({"type": "error", "id": rid, "message": "missing architecture"})
                continue
            try:
                space.check(text)
                result = evaluate_architecture(
                    text, data, hyper, seed=seed, layers=space.layers
                )
            except ValueError as exc:
                reply({"type": "error", "id": rid, "message": str(exc)})
                continue
            if result.diverged:
                print(f"request {rid}: {result.note}, scoring 0", file=log)
            reply({"type": "result", "id": rid, "fitness": result.val_accuracy})
        elif kind == "shutdown":
            break
        else:
            reply({"type": "error", "id": rid, "message": f"unknown type {kind!r}"})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gnn-evaluator",
        description="fitness service for message-passing architectures",
    )
    parser.add_argument("--dataset", default="cora",
                        help="cora, citeseer, pubmed, or synthetic")
    parser.add_argument("--data-dir", default=DEFAULT_DATA_DIR,
                        help="directory holding the benchmark pickle files")
    parser.add_argument("--epochs", type=int, default=300)
    parser.add_argument("--dropout", type=float, default=0.6)
    parser.add_argument("--lr", type=float, default=0.005)
    parser.add_argument("--weight-decay", type=float, default=0.0005)
    parser.add_argument("--seed", type=int, default=0,
                        help="training seed used for every request")
    parser.add_argument("--report", metavar="ARCH",
                        help="skip the protocol; train ARCH repeatedly and print "
                             "mean and deviation of test accuracy")
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args(argv)

    try:
        hyper = GnnHyperparams(
            epochs=args.epochs, learning_rate=args.lr,
            weight_decay=args.weight_decay, dropout=args.dropout,
        )
        data = load_dataset(args.dataset, args.data_dir, seed=args.seed)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.report:
        try:
            parse_architecture(args.report)
            mean, std, results = report(args.report, data, hyper, repeats=args.repeats)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for i, r in enumerate(results):
            note = f"  ({r.note})" if r.note else ""
            print(f"seed {i}: val {r.val_accuracy:.4f} test {r.test_accuracy:.4f}{note}",
                  file=sys.stderr)
        print(f"test accuracy: {mean:.4f} +/- {std:.4f} (n={args.repeats})")
        return 0

    serve(sys.stdin, sys.stdout, data, hyper, seed=args.seed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
