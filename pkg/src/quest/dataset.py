"""Sample manifests and seeded evaluation splits.

Every shuffle uses SplitMix64 feeding a descending Fisher-Yates pass, with
the swap index drawn as ``(next_u64() * (i + 1)) >> 64``. The sequence is
fully determined by the 64-bit seed, so plans reproduce on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, EmptyInputError, SchemaError
from .imageio import BoundingBox

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: list) -> list:
        items = list(items)
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n: int) -> list[int]:
        return self.shuffle(range(n))


@dataclass(frozen=True)
class SampleRecord:
    path: str
    subject: str
    label: str
    bbox: BoundingBox | None = None


def _parse_record(obj, lineno: int) -> SampleRecord:
    if not isinstance(obj, dict):
        raise SchemaError("expected a JSON object", line=lineno)
    for key in ("path", "subject", "label"):
        if key not in obj:
            raise SchemaError(f"missing required key {key!r}", line=lineno)
        if not isinstance(obj[key], str) or not obj[key]:
            raise SchemaError(f"{key!r} must be a non-empty string", line=lineno)
    bbox = obj.get("bbox")
    if bbox is not None:
        if (not isinstance(bbox, list) or len(bbox) != 4
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in bbox)):
            raise SchemaError("bbox must be a list of four integers [x, y, w, h]", line=lineno)
        try:
            bbox = BoundingBox(*bbox)
        except ValueError as exc:
            raise SchemaError(str(exc), line=lineno) from None
    return SampleRecord(obj["path"], obj["subject"], obj["label"], bbox)


def load_manifest(stream) -> list[SampleRecord]:
    """Parse JSON-Lines text (a string or an iterable of lines). Blank lines are skipped."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc.msg}", line=lineno) from None
        records.append(_parse_record(obj, lineno))
    if not records:
        raise EmptyInputError("manifest contains no records")
    return records


def read_manifest(path) -> list[SampleRecord]:
    with open(path, encoding="utf-8") as fh:
        return load_manifest(fh)


@dataclass(frozen=True)
class FoldPlan:
    protocol: str
    seed: int
    folds: tuple  # ((train indices, test indices), ...)

    def __len__(self):
        return len(self.folds)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "folds": [{"train": list(tr), "test": list(te)} for tr, te in self.folds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def make_subject_folds(subjects, k: int = 5, seed: int = 42) -> FoldPlan:
    """Person-independent k-fold plan over per-record subject ids.

    ``subjects`` may also be a list of SampleRecord.
    """
    subjects = [s.subject if isinstance(s, SampleRecord) else s for s in subjects]
    if k < 2:
        raise ConfigError(f"need at least 2 folds, got {k}")
    distinct = sorted(set(subjects))
    if len(distinct) < k:
        raise ConfigError(f"{len(distinct)} subjects cannot fill {k} folds")
    order = SplitMix64(seed).shuffle(distinct)
    group = {s: i % k for i, s in enumerate(order)}
    folds = []
    for f in range(k):
        test = tuple(i for i, s in enumerate(subjects) if group[s] == f)
        train = tuple(i for i, s in enumerate(subjects) if group[s] != f)
        folds.append((train, test))
    return FoldPlan("subject-kfold", seed, tuple(folds))


def make_random_holdouts(n_records, repeats: int = 5, seed: int = 42) -> FoldPlan:
    """Record-level 80/20 splits, one seeded shuffle per repeat.

    ``n_records`` may be a count or the record list itself.
    """
    n = n_records if isinstance(n_records, int) else len(n_records)
    if repeats < 1:
        raise ConfigError(f"need at least 1 repeat, got {repeats}")
    if n < 5:
        raise ConfigError(f"random holdout needs at least 5 records, got {n}")
    rng = SplitMix64(seed)
    n_train = -(-4 * n // 5)  # ceil(0.8 n) without float rounding
    folds = []
    for _ in range(repeats):
        perm = rng.permutation(n)
        folds.append((tuple(sorted(perm[:n_train])), tuple(sorted(perm[n_train:]))))
    return FoldPlan("random-holdout", seed, tuple(folds))
