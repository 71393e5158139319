"""Drive an out-of-process evaluator over the line protocol.

A throwaway worker is written to a temp file and launched as a subprocess.
It speaks newline-delimited JSON on stdin/stdout: an init message describing
the space, then evaluate requests answered by result lines, then shutdown.
Anything that trains a real model can sit behind the same five message
types.
"""

import sys
import tempfile

from parnas import (
    EvaluationResult,
    ExternalEvaluatorClient,
    FitnessCache,
    default_space,
    encode_arch,
    evaluate_batch,
    sample_uniform,
)
from parnas.rng import SplitMix64

WORKER = r'''
import hashlib, json, sys

for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "init":
        print(json.dumps({"type": "ready"}), flush=True)
    elif msg["type"] == "evaluate":
        text = msg["architecture"]
        score = int(hashlib.md5(text.encode()).hexdigest()[:8], 16) / 16**8
        print(json.dumps({"type": "result", "id": msg["id"], "fitness": score}),
              flush=True)
    elif msg["type"] == "shutdown":
        break
'''

space = default_space(1)
rng = SplitMix64(2024)
archs = [sample_uniform(space, rng) for _ in range(6)]

with tempfile.NamedTemporaryFile("w", suffix=".py", delete=False) as f:
    f.write(WORKER)
    worker_path = f.name

client = ExternalEvaluatorClient(space, [sys.executable, worker_path], timeout=10.0)
try:
    results = evaluate_batch(archs, client, FitnessCache())
finally:
    client.close()

for arch, res in zip(archs, results):
    key = encode_arch(space, arch)
    if isinstance(res, EvaluationResult):
        print(f"{key:<40} {res.fitness:.6f}")
    else:
        print(f"{key:<40} FAILED: {res.message}")

print()
print("protocol errors:", client.protocol_errors or "none")
