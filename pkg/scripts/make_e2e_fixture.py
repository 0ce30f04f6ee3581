#!/usr/bin/env python3
"""Regenerate the end-to-end CLI fixture tree under tests/fixtures/e2e/.

Inputs come from `soupkit gen-data --seed 32` plus prediction CSVs for
three of the checkpoints; goldens are the pipeline outputs over those
inputs. Seed 32 was picked because its greedy pass both accepts and
rejects candidates and the soup beats the best single checkpoint, so
every report row type shows up. Run this only when the on-disk formats
intentionally change, then review the diff: the acceptance suite
compares against these files byte for byte and never regenerates them.
"""

import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from e2e_pipeline import run_pipeline  # noqa: E402

from soupkit.cli import main  # noqa: E402
from soupkit.datasets import load_dataset_csv, save_predictions_csv  # noqa: E402
from soupkit.mlp import MlpSpec, forward  # noqa: E402
from soupkit.tensor_store import load_checkpoint  # noqa: E402

BASE = ROOT / "tests" / "fixtures" / "e2e"
PRED_EPOCHS = (0, 3, 5)


def build_inputs(inputs: Path) -> None:
    code = main(["gen-data", "--seed", "32", "--snapshots", "8",
                 "--out-dir", str(inputs)])
    if code != 0:
        raise RuntimeError(f"gen-data exited {code}")
    spec = MlpSpec.from_file(inputs / "spec.json")
    val = load_dataset_csv(inputs / "val.csv", num_classes=spec.num_classes)
    for epoch in PRED_EPOCHS:
        cp = load_checkpoint(inputs / f"ckpt_{epoch:03d}.json")
        save_predictions_csv(forward(cp, spec, val), inputs / f"preds_m{epoch}.csv")


def main_script() -> int:
    if BASE.exists():
        shutil.rmtree(BASE)
    build_inputs(BASE / "inputs")
    run_pipeline(BASE / "inputs", BASE / "golden")
    files = sorted(p.relative_to(BASE) for p in BASE.rglob("*") if p.is_file())
    print(f"wrote {len(files)} files under {BASE}")
    for f in files:
        print(f"  {f}")
    return 0


if __name__ == "__main__":
    sys.exit(main_script())
