"""Benchmark layout from paired day/night composites.

Each source PNG holds a day and a night image side by side. ``prepare``
splits every composite, synthesizes the low-resolution night input with
the bilinear kernel, assigns a seeded train/val/test split and writes::

    out_dir/{split}/{night_lr,night_hr_gt,day_hr_gt}/{id}.png
    out_dir/manifest.jsonl

The manifest is JSON Lines, one entry per sample in sorted-id order, with
paths relative to the manifest's directory.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from srx.errors import BadPairDimensions, EmptySource, ManifestParseError, ValidationError
from srx.imaging import load_image, resize_bilinear, save_image, split_pair

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")
IMAGE_ROLES = ("night_lr", "night_hr_gt", "day_hr_gt")
MANIFEST_NAME = "manifest.jsonl"


@dataclass(frozen=True)
class DatasetConfig:
    zoom: int = 4
    lr_size: int = 64
    hr_size: int = 256
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    day_side: str = "left"

    def __post_init__(self):
        if self.zoom < 1 or self.lr_size < 1:
            raise ValidationError("zoom and lr_size must be positive")
        if self.hr_size != self.lr_size * self.zoom:
            raise ValidationError(f"hr_size {self.hr_size} != lr_size {self.lr_size} x zoom {self.zoom}")
        if len(self.split_fractions) != 3 or min(self.split_fractions) < 0:
            raise ValidationError("split_fractions must be three non-negative numbers")
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ValidationError(f"split fractions sum to {sum(self.split_fractions)}, not 1")
        if self.day_side not in ("left", "right"):
            raise ValidationError(f"day_side must be 'left' or 'right', got {self.day_side!r}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")


@dataclass
class ManifestEntry:
    id: str
    split: str
    night_lr: str
    night_hr_gt: str
    day_hr_gt: str
    # filled in by a pipeline run
    intermediate: str | None = None
    output: str | None = None
    topology: str | None = None

    def to_json(self) -> str:
        record = {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}
        return json.dumps(record, ensure_ascii=False)


_REQUIRED = ("id", "split", *IMAGE_ROLES)
_KNOWN = {f.name for f in fields(ManifestEntry)}


@dataclass
class Manifest:
    """Entries plus the directory their relative paths resolve against."""

    root: Path
    entries: list[ManifestEntry] = field(default_factory=list)

    def path(self, entry: ManifestEntry, role: str) -> Path:
        rel = getattr(entry, role)
        if rel is None:
            raise ValidationError(f"entry {entry.id} has no {role} path")
        return self.root / rel

    def select(self, split: str | None) -> "Manifest":
        if split is None:
            return self
        return Manifest(self.root, [e for e in self.entries if e.split == split])


def split_sizes(total: int, fractions=(0.8, 0.1, 0.1)) -> tuple[int, int, int]:
    """Floor-based val/test sizes; the remainder goes to train."""
    _, f_val, f_test = fractions
    n_val = math.floor(f_val * total + 1e-9)
    n_test = math.floor(f_test * total + 1e-9)
    return total - n_val - n_test, n_val, n_test


def assign_splits(ids: list[str], cfg: DatasetConfig) -> dict[str, str]:
    """Seeded shuffle of the sorted ids, cut into train, val, test in that order."""
    ordered = sorted(ids)
    n_train, n_val, _ = split_sizes(len(ordered), cfg.split_fractions)
    perm = np.random.default_rng(cfg.seed).permutation(len(ordered))
    out = {}
    for rank, idx in enumerate(perm):
        if rank < n_train:
            out[ordered[idx]] = "train"
        elif rank < n_train + n_val:
            out[ordered[idx]] = "val"
        else:
            out[ordered[idx]] = "test"
    return out


def write_manifest(manifest: Manifest | list[ManifestEntry], path: str | os.PathLike) -> None:
    entries = manifest.entries if isinstance(manifest, Manifest) else manifest
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for entry in sorted(entries, key=lambda e: e.id):
            fh.write(entry.to_json() + "\n")


def read_manifest(path: str | os.PathLike) -> Manifest:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestParseError(f"{path}:{lineno}: {exc}") from exc
            if not isinstance(record, dict):
                raise ManifestParseError(f"{path}:{lineno}: expected a JSON object")
            missing = [k for k in _REQUIRED if k not in record]
            unknown = sorted(set(record) - _KNOWN)
            if missing or unknown:
                raise ManifestParseError(f"{path}:{lineno}: missing fields {missing}, unknown fields {unknown}")
            if not all(isinstance(v, str) for v in record.values()):
                raise ManifestParseError(f"{path}:{lineno}: all fields must be strings")
            entries.append(ManifestEntry(**record))
    return Manifest(path.parent, entries)


def _prepare_one(src: Path, out_dir: Path, split: str, cfg: DatasetConfig) -> ManifestEntry:
    pair = load_image(src)
    hr = cfg.hr_size
    if pair.shape[:2] != (hr, 2 * hr):
        raise BadPairDimensions(f"{src}: expected {hr}x{2 * hr} composite, got {pair.shape[0]}x{pair.shape[1]}")
    left, right = split_pair(pair)
    day, night = (left, right) if cfg.day_side == "left" else (right, left)
    night_lr = resize_bilinear(night, cfg.lr_size, cfg.lr_size)
    name = f"{src.stem}.png"
    rel = {role: Path(split, role, name).as_posix() for role in IMAGE_ROLES}
    save_image(night_lr, out_dir / rel["night_lr"])
    save_image(night, out_dir / rel["night_hr_gt"])
    save_image(day, out_dir / rel["day_hr_gt"])
    return ManifestEntry(id=src.stem, split=split, **rel)


def prepare(src_dir: str | os.PathLike, out_dir: str | os.PathLike, cfg: DatasetConfig = DatasetConfig(),
            jobs: int = 1) -> Manifest:
    """Build the split dataset and its manifest from a directory of composites.

    Raises:
        EmptySource: if ``src_dir`` holds no PNG files.
        BadPairDimensions: if a composite is not ``hr_size x 2*hr_size``.
    """
    src_dir = Path(src_dir)
    out_dir = Path(out_dir)
    sources = sorted(src_dir.glob("*.png"))
    if not sources:
        raise EmptySource(f"no PNG composites found in {src_dir}")
    splits = assign_splits([s.stem for s in sources], cfg)
    for split in SPLITS:
        for role in IMAGE_ROLES:
            (out_dir / split / role).mkdir(parents=True, exist_ok=True)
    log.info("preparing %d pairs into %s", len(sources), out_dir)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(lambda s: _prepare_one(s, out_dir, splits[s.stem], cfg), sources))
    else:
        entries = [_prepare_one(s, out_dir, splits[s.stem], cfg) for s in sources]
    manifest = Manifest(out_dir, sorted(entries, key=lambda e: e.id))
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


@dataclass(frozen=True)
class Violation:
    kind: str
    entry_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} [{self.entry_id}]: {self.message}"


def image_size(path: Path) -> tuple[int, int]:
    with PILImage.open(path) as pil:
        width, height = pil.size
    return height, width


def validate_manifest(path: str | os.PathLike, zoom: int = 4) -> list[Violation]:
    """Check every manifest invariant; an empty list means the manifest is valid.

    Violation kinds: ``DuplicateId``, ``BadSplit``, ``MissingFile``,
    ``UnreadableImage`` and ``DimensionMismatch``.
    """
    return validate_entries(read_manifest(path), zoom)


def validate_entries(manifest: Manifest, zoom: int = 4) -> list[Violation]:
    violations = []
    seen = set()
    for entry in manifest.entries:
        if entry.id in seen:
            violations.append(Violation("DuplicateId", entry.id, "id appears more than once"))
        seen.add(entry.id)
        if entry.split not in SPLITS:
            violations.append(Violation("BadSplit", entry.id, f"unknown split {entry.split!r}"))
        sizes = {}
        for role in (*IMAGE_ROLES, "intermediate", "output"):
            if getattr(entry, role) is None:
                continue
            file = manifest.path(entry, role)
            if not file.is_file():
                violations.append(Violation("MissingFile", entry.id, f"{role}: {file} does not exist"))
                continue
            try:
                sizes[role] = image_size(file)
            except OSError as exc:
                violations.append(Violation("UnreadableImage", entry.id, f"{role}: {exc}"))
        if "night_lr" in sizes and "night_hr_gt" in sizes:
            lr_h, lr_w = sizes["night_lr"]
            if (lr_h * zoom, lr_w * zoom) != sizes["night_hr_gt"]:
                violations.append(Violation(
                    "DimensionMismatch", entry.id,
                    f"night_lr {lr_h}x{lr_w} x zoom {zoom} != night_hr_gt {sizes['night_hr_gt'][0]}x{sizes['night_hr_gt'][1]}",
                ))
        if "day_hr_gt" in sizes:
            for role in ("night_hr_gt", "output"):
                if role in sizes and sizes[role] != sizes["day_hr_gt"]:
                    violations.append(Violation(
                        "DimensionMismatch", entry.id, f"{role} {sizes[role]} != day_hr_gt {sizes['day_hr_gt']}"
                    ))
    return violations
