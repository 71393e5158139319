"""Drive the service as a real subprocess over pipes."""

import json
import subprocess
import sys

import pytest

from gnn_evaluator.datasets import synthetic_citation
from gnn_evaluator.train import GnnHyperparams, evaluate_architecture

SERVER = [sys.executable, "-m", "gnn_evaluator",
          "--dataset", "synthetic", "--epochs", "3"]

INIT_1LAYER = {
    "type": "init",
    "layers": 1,
    "components": [
        {"name": "att1", "values": ["gat", "gcn", "cos", "const",
                                    "sym-gat", "linear", "gene-linear"]},
        {"name": "agg1", "values": ["mean", "max", "sum"]},
        {"name": "act1", "values": ["tanh", "sigmoid", "relu", "linear",
                                    "softplus", "leaky_relu", "relu6", "elu"]},
        {"name": "head1", "values": ["1", "2", "4", "6", "8"]},
        {"name": "dim1", "values": ["8", "16", "32", "64", "128", "256", "512"]},
    ],
}


class ServerSession:
    def __init__(self, command=SERVER):
        self.proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1,
        )

    def send(self, obj):
        self.proc.stdin.write(json.dumps(obj) + "\n")
        self.proc.stdin.flush()

    def send_raw(self, text):
        self.proc.stdin.write(text + "\n")
        self.proc.stdin.flush()

    def recv(self, timeout=120.0):
        line = self.proc.stdout.readline()
        if not line:
            raise AssertionError("server closed its output")
        return json.loads(line)

    def close(self):
        try:
            self.send({"type": "shutdown"})
            return self.proc.wait(timeout=30)
        except Exception:
            self.proc.kill()
            self.proc.wait()
            return None


@pytest.fixture
def session():
    s = ServerSession()
    yield s
    s.close()


def test_handshake(session):
    session.send(INIT_1LAYER)
    assert session.recv() == {"type": "ready"}


def test_evaluate_returns_validation_accuracy(session):
    session.send(INIT_1LAYER)
    session.recv()
    session.send({"type": "evaluate", "id": 0, "architecture": "gat,sum,elu,2,16"})
    msg = session.recv()
    assert msg["type"] == "result"
    assert msg["id"] == 0
    assert 0.0 <= msg["fitness"] <= 1.0

    # fitness must equal a direct run with the same seed and settings
    data = synthetic_citation(seed=0)
    direct = evaluate_architecture(
        "gat,sum,elu,2,16", data, GnnHyperparams(epochs=3), seed=0, layers=1
    )
    assert msg["fitness"] == pytest.approx(direct.val_accuracy, abs=1e-9)


def test_in_flight_requests_matched_by_id(session):
    session.send(INIT_1LAYER)
    session.recv()
    session.send({"type": "evaluate", "id": 7, "architecture": "const,mean,relu,1,8"})
    session.send({"type": "evaluate", "id": 8, "architecture": "gcn,sum,tanh,1,8"})
    first, second = session.recv(), session.recv()
    assert {first["id"], second["id"]} == {7, 8}
    assert first["type"] == second["type"] == "result"


def test_unknown_label_is_error_and_process_survives(session):
    session.send(INIT_1LAYER)
    session.recv()
    session.send({"type": "evaluate", "id": 1, "architecture": "bogus,sum,elu,2,16"})
    msg = session.recv()
    assert msg["type"] == "error"
    assert msg["id"] == 1
    assert "bogus" in msg["message"]
    # still alive and serving
    session.send({"type": "evaluate", "id": 2, "architecture": "gcn,mean,relu,1,8"})
    assert session.recv()["type"] == "result"


def test_evaluate_before_init(session):
    session.send({"type": "evaluate", "id": 4, "architecture": "gat,sum,elu,2,16"})
    msg = session.recv()
    assert msg == {"type": "error", "id": 4, "message": "init not received"}


def test_unparseable_line_gets_id_minus_one(session):
    session.send_raw("this is not json")
    msg = session.recv()
    assert msg["type"] == "error"
    assert msg["id"] == -1


def test_unknown_type(session):
    session.send({"type": "train", "id": 9})
    msg = session.recv()
    assert msg["type"] == "error"
    assert msg["id"] == 9


def test_clean_shutdown():
    s = ServerSession()
    s.send(INIT_1LAYER)
    s.recv()
    assert s.close() == 0


def test_report_mode_prints_mean_and_deviation():
    out = subprocess.run(
        [sys.executable, "-m", "gnn_evaluator", "--dataset", "synthetic",
         "--epochs", "3", "--report", "gat,sum,elu,2,16", "--repeats", "3"],
        capture_output=True, text=True, timeout=300,
    )
    assert out.returncode == 0
    assert "test accuracy:" in out.stdout
    assert "+/-" in out.stdout
    assert "(n=3)" in out.stdout


def test_report_mode_rejects_bad_architecture():
    out = subprocess.run(
        [sys.executable, "-m", "gnn_evaluator", "--dataset", "synthetic",
         "--report", "nope,sum,elu,2,16"],
        capture_output=True, text=True, timeout=60,
    )
    assert out.returncode == 2
    assert "error:" in out.stderr


def test_unknown_dataset_exits_with_error():
    out = subprocess.run(
        [sys.executable, "-m", "gnn_evaluator", "--dataset", "webkb"],
        capture_output=True, text=True, timeout=60,
    )
    assert out.returncode == 2
    assert "unknown dataset" in out.stderr
