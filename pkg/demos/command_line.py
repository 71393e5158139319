"""The same workflows through the command line interface.

Runs each subcommand in a temp directory and shows what lands on disk.
Equivalent shell usage:

    parnas search --config config.json --out run/
    parnas compare --config config.json --budget 200 --seeds 0,1,2 --out cmp/
    parnas enumerate --layers 1 --evaluator-seed 7 --out table.csv
    parnas random --budget 100 --seed 5 --out rnd/
"""

import json
import os
import tempfile

from parnas.cli import main

root = tempfile.mkdtemp(prefix="demo_cli_")
config_path = os.path.join(root, "config.json")
with open(config_path, "w") as f:
    json.dump({
        "seed": 1,
        "workers": 2,
        "layers": 1,
        "init_per_worker": 10,
        "sharing_top_n": 8,
        "parents_k": 8,
        "mutations_per_worker": [1, 2],
        "epochs": 4,
    }, f)

for argv in (
    ["search", "--config", config_path, "--out", os.path.join(root, "run")],
    ["compare", "--config", config_path, "--budget", "200",
     "--seeds", "0,1,2", "--out", os.path.join(root, "cmp")],
    ["enumerate", "--layers", "1", "--evaluator-seed", "7",
     "--out", os.path.join(root, "table.csv")],
    ["random", "--budget", "100", "--seed", "5", "--layers", "1",
     "--out", os.path.join(root, "rnd")],
):
    print("$ parnas " + " ".join(argv))
    code = main(argv)
    print(f"  (exit {code})")
    print()

print("artifacts under", root)
for dirpath, _dirnames, filenames in sorted(os.walk(root)):
    for name in sorted(filenames):
        path = os.path.join(dirpath, name)
        rel = os.path.relpath(path, root)
        print(f"  {rel:<28} {os.path.getsize(path):>9} bytes")
