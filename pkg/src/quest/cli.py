"""Command-line entry point: ``quest encode|extract|cv|compare``.

Exit codes: 0 success, 2 I/O, 3 image size, 4 schema, 5 configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import ClassifierConfig, model_to_dict, run_cross_validation, train_ovo, write_report
from .dataset import make_random_holdouts, make_subject_folds, read_manifest
from .descriptor import QuestConfig, encode_map
from .errors import ConfigError, ImageIOError, QuestError
from .features import FeatureTable, RegionGrid, extract_feature_vector, read_feature_csv, write_feature_csv
from .imageio import normalize, read_image, write_pgm

EXIT_OK, EXIT_IO, EXIT_SIZE, EXIT_SCHEMA, EXIT_CONFIG = 0, 2, 3, 4, 5


@dataclass(frozen=True)
class RunConfig:
    descriptor: str = "quest"
    quad_assignment: str = "v3"
    size: int = 128
    grid: int = 8
    protocol: str = "subject-kfold"
    folds: int = 5
    repeats: int = 5
    seed: int = 42
    classifier: str = "svm"
    c: float = 1.0
    epochs: int = 50
    threads: int = 0  # 0 means all cores

    def __post_init__(self):
        if self.descriptor not in ("quest", "lbp"):
            raise ConfigError(f"unknown descriptor {self.descriptor!r}")
        if self.protocol not in ("subject-kfold", "random-holdout"):
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.classifier not in ("svm", "knn"):
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.quad_assignment not in ("v3", "v4", "alt"):
            raise ConfigError(f"unknown quad assignment {self.quad_assignment!r}")
        for name in ("size", "grid", "folds", "repeats", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"--{name} must be >= 1")
        if self.c <= 0:
            raise ConfigError("--c must be positive")
        if self.threads < 0:
            raise ConfigError("--threads must be >= 0")

    @property
    def workers(self) -> int:
        return self.threads or os.cpu_count() or 1

    def provenance(self) -> dict:
        """Config embedded in artifacts. Thread count is left out: it never changes results."""
        d = asdict(self)
        del d["threads"]
        d["version"] = __version__
        return d

    def quest_config(self) -> QuestConfig:
        return QuestConfig(self.quad_assignment)

    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(self.classifier, self.c, self.epochs, self.seed)


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def cmd_encode(input_path, cfg: RunConfig, output, visualize: bool = False) -> int:
    img = read_image(input_path)
    cmap = encode_map(img, cfg.descriptor, cfg.quest_config())
    output = Path(output)
    write_pgm(output, cmap.to_pgm_pixels(visualize))
    _dump(output.with_name(output.name + ".json"), {
        "source": str(input_path),
        "descriptor": cmap.descriptor_id,
        "width": cmap.width,
        "height": cmap.height,
        "code_range": cmap.code_range,
        "pgm_mode": "visual-x4" if visualize and cmap.descriptor_id == "QUEST" else "raw",
        "border": "1-pixel border skipped",
        "neighbor_order": "I0 east, counter-clockwise",
        "run_config": cfg.provenance(),
    })
    return EXIT_OK


def extract_features(records, base_dir, cfg: RunConfig) -> FeatureTable:
    """decode -> crop(bbox) -> resize -> encode -> region histograms, in manifest order."""
    base_dir = Path(base_dir)
    grid = RegionGrid(cfg.grid, cfg.grid)
    qcfg = cfg.quest_config()

    def one(item):
        lineno, rec = item
        path = Path(rec.path)
        if not path.is_absolute():
            path = base_dir / path
        try:
            img = read_image(path)
        except (OSError, ImageIOError) as exc:
            raise ImageIOError(f"record {lineno} ({rec.path}): {exc}") from exc
        try:
            img = normalize(img, cfg.size, rec.bbox)
        except QuestError as exc:
            exc.args = (f"record {lineno} ({rec.path}): {exc}",)
            raise
        return extract_feature_vector(encode_map(img, cfg.descriptor, qcfg), grid).values

    items = list(enumerate(records, start=1))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(item) for item in items]
    return FeatureTable([r.label for r in records], [r.subject for r in records], np.stack(rows))


def cmd_extract(manifest, cfg: RunConfig, output) -> int:
    records = read_manifest(manifest)
    table = extract_features(records, Path(manifest).parent, cfg)
    output = Path(output)
    write_feature_csv(output, table)
    _dump(output.with_name(output.name + ".json"), {
        "manifest": str(manifest),
        "n_samples": len(table),
        "dim": table.dim,
        "grid": [cfg.grid, cfg.grid],
        "run_config": cfg.provenance(),
    })
    return EXIT_OK


def make_plan(subjects, cfg: RunConfig):
    if cfg.protocol == "subject-kfold":
        return make_subject_folds(subjects, cfg.folds, cfg.seed)
    return make_random_holdouts(len(subjects), cfg.repeats, cfg.seed)


def run_cv(table: FeatureTable, cfg: RunConfig, report_dir, plan=None, method=None,
           features_provenance=None) -> float:
    if len(set(table.labels)) < 2:
        raise ConfigError("feature table contains a single class")
    plan = plan or make_plan(table.subjects, cfg)
    report = run_cross_validation(plan, table, cfg.classifier_config(), threads=cfg.workers)
    report_dir = Path(report_dir)
    provenance = cfg.provenance()
    if features_provenance is not None:
        provenance["features"] = features_provenance
    write_report(report, report_dir, provenance, method or cfg.descriptor.upper())
    plan.write(report_dir / "plan.json")
    if cfg.classifier == "svm":
        model = train_ovo(table.X, table.labels, c=cfg.c, epochs=cfg.epochs, seed=cfg.seed)
        _dump(report_dir / "model.json", {**model_to_dict(model), "run_config": provenance})
    return report.mean_accuracy


def _read_sidecar(csv_path):
    sidecar = Path(str(csv_path) + ".json")
    if not sidecar.exists():
        return None
    try:
        return json.loads(sidecar.read_text(encoding="utf-8"))["run_config"]
    except (KeyError, ValueError, TypeError):
        return None


def cmd_cv(features_csv, cfg: RunConfig, report_dir, descriptor_given: bool = True) -> int:
    """Cross-validate a feature CSV. Without ``--descriptor`` the CSV sidecar names it."""
    table = read_feature_csv(features_csv)
    feat = _read_sidecar(features_csv)
    if not descriptor_given and feat and feat.get("descriptor") in ("quest", "lbp"):
        cfg = RunConfig(**{**asdict(cfg), "descriptor": feat["descriptor"]})
    mean = run_cv(table, cfg, report_dir, features_provenance=feat)
    print(f"{mean:.2f}")
    return EXIT_OK


def cmd_compare(manifest, cfg: RunConfig, report_dir) -> int:
    records = read_manifest(manifest)
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    if len({r.label for r in records}) < 2:
        raise ConfigError("manifest contains a single class")
    plan = make_plan([r.subject for r in records], cfg)
    rows = []
    for desc in ("lbp", "quest"):
        sub = RunConfig(**{**asdict(cfg), "descriptor": desc})
        table = extract_features(records, Path(manifest).parent, sub)
        write_feature_csv(report_dir / f"features_{desc}.csv", table)
        rows.append((desc.upper(), run_cv(table, sub, report_dir / desc, plan=plan)))
    lines = ["Methods\tAccuracy"] + [f"{name}\t{acc:.2f}" for name, acc in rows]
    table_text = "\n".join(lines) + "\n"
    (report_dir / "comparison.txt").write_text(table_text, encoding="utf-8")
    _dump(report_dir / "comparison.json", {
        "protocol": plan.protocol,
        "seed": plan.seed,
        "results": [{"method": n, "mean_accuracy": round(a, 2)} for n, a in rows],
        "run_config": {k: v for k, v in cfg.provenance().items() if k != "descriptor"},
    })
    sys.stdout.write(table_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--descriptor", choices=["quest", "lbp"], default=None)
    common.add_argument("--quad-assignment", choices=["v3", "v4", "alt"], default="v3",
                        help="bit-to-quadrilateral rule: v3=floor(v/3), v4=floor(v/4), alt=v mod 2")
    common.add_argument("--size", type=int, default=128, help="normalized image side in pixels")
    common.add_argument("--grid", type=int, default=8, help="regions per side")
    common.add_argument("--protocol", choices=["subject-kfold", "random-holdout"], default="subject-kfold")
    common.add_argument("--folds", type=int, default=5)
    common.add_argument("--repeats", type=int, default=5)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--classifier", choices=["svm", "knn"], default="svm")
    common.add_argument("--c", type=float, default=1.0, help="SVM regularization")
    common.add_argument("--epochs", type=int, default=50, help="SVM coordinate-descent epochs")
    common.add_argument("--threads", type=int, default=0, help="worker count, 0 = all cores")
    common.add_argument("--output", "-o", required=True)

    parser = argparse.ArgumentParser(prog="quest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("encode", parents=[common], help="write the code map of one image as PGM")
    p.add_argument("input")
    p.add_argument("--visualize", action="store_true", help="scale QUEST codes by 4 for display")
    p = sub.add_parser("extract", parents=[common], help="feature CSV from a JSON-Lines manifest")
    p.add_argument("manifest")
    p = sub.add_parser("cv", parents=[common], help="cross-validate a feature CSV")
    p.add_argument("features")
    p = sub.add_parser("compare", parents=[common], help="LBP vs QUEST on a shared fold plan")
    p.add_argument("manifest")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            descriptor=args.descriptor or "quest",
            quad_assignment=args.quad_assignment,
            size=args.size, grid=args.grid, protocol=args.protocol,
            folds=args.folds, repeats=args.repeats, seed=args.seed,
            classifier=args.classifier, c=args.c, epochs=args.epochs, threads=args.threads,
        )
        if args.command == "encode":
            return cmd_encode(args.input, cfg, args.output, args.visualize)
        if args.command == "extract":
            return cmd_extract(args.manifest, cfg, args.output)
        if args.command == "cv":
            return cmd_cv(args.features, cfg, args.output, descriptor_given=args.descriptor is not None)
        return cmd_compare(args.manifest, cfg, args.output)
    except QuestError as exc:
        print(f"quest {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"quest {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
