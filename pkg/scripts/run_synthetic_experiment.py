"""Generate the oriented-grating dataset and compare LBP against QUEST on it.

    python scripts/run_synthetic_experiment.py --out runs/synthetic
"""

import argparse
import time
from pathlib import Path

from quest.cli import main as quest_main
from quest.synthetic import write_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/synthetic")
    ap.add_argument("--classes", type=int, default=6)
    ap.add_argument("--per-class", type=int, default=60)
    ap.add_argument("--subjects", type=int, default=10)
    ap.add_argument("--noise", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--protocol", default="subject-kfold", choices=["subject-kfold", "random-holdout"])
    args = ap.parse_args()

    out = Path(args.out)
    start = time.perf_counter()
    manifest = write_dataset(out / "data", n_classes=args.classes, per_class=args.per_class,
                             n_subjects=args.subjects, noise=args.noise, seed=args.seed)
    print(f"dataset: {manifest} ({time.perf_counter() - start:.1f}s)")
    code = quest_main(["compare", str(manifest), "-o", str(out / "compare"),
                       "--seed", str(args.seed), "--protocol", args.protocol])
    print(f"done in {time.perf_counter() - start:.1f}s; reports under {out / 'compare'}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
