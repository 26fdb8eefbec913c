"""Run a small benchmark end to end through the command line.

Writes a synthetic reference cube and a JSON config into a scratch
directory, then calls ``hydenoise benchmark`` exactly as a user would.

    python demos/benchmark_run.py [scratch_dir]
"""

import json
import sys
import tempfile
from pathlib import Path

from hydenoise.cli import main as cli


def main(workdir):
    work = Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    cli(["synth", "--rows", "64", "--cols", "64", "--bands", "31", "--rank", "6", "--seed", "3",
         "--output", str(work / "reference.hyde")])
    config = {
        "reference": "reference.hyde",
        "methods": ["hyres", "forpdn", {"name": "wsrrr", "params": {"max_iters": 10}}, "otvca"],
        "snr_levels_db": [20, 30, 40],
        "runs": 5,
        "seed": 0,
        "output": "results.jsonl",
    }
    (work / "bench.json").write_text(json.dumps(config, indent=2))
    code = cli(["benchmark", "--config", str(work / "bench.json")])
    print(f"\nper-run records: {work / 'results.jsonl'}")
    return code


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="hydenoise-")))
