"""Two-stage topologies over external model stages.

Stage protocol: a stage is invoked as ``<command> --input DIR --output DIR``
with ``SRX_SCALE=<output_scale>`` in its environment. It must exit 0 and
write one PNG per input PNG, with the same filename and dimensions equal to
the input's times ``output_scale``.

``M1`` runs super-resolution then translation; ``M2`` runs translation then
super-resolution. Both write ``work_dir/{input,intermediate,output}`` and an
augmented ``work_dir/manifest.jsonl`` with ``intermediate`` and ``output``
paths per entry.
"""

from __future__ import annotations

import logging
import os
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

import numpy as np

from srx.dataset import MANIFEST_NAME, Manifest, ManifestEntry, image_size, validate_entries, write_manifest
from srx.errors import (
    ManifestInvalid,
    MissingOutput,
    PhaseUnavailable,
    StageCrashed,
    ValidationError,
    WrongOutputScale,
)
from srx.imaging import load_image, resize_nearest

log = logging.getLogger(__name__)


class StageKind(str, Enum):
    SUPER_RESOLUTION = "super_resolution"
    TRANSLATION = "translation"


@dataclass(frozen=True)
class StageSpec:
    name: str
    command: tuple[str, ...]
    kind: StageKind
    output_scale: int

    def __post_init__(self):
        if not self.command:
            raise ValidationError(f"stage {self.name!r} has an empty command")
        if self.output_scale < 1:
            raise ValidationError(f"stage {self.name!r} has output_scale {self.output_scale} < 1")
        object.__setattr__(self, "command", tuple(self.command))
        object.__setattr__(self, "kind", StageKind(self.kind))


def null_sr_stage(scale: int = 4) -> StageSpec:
    """Builtin SR stand-in: nearest-neighbour upsampling by ``scale``."""
    return StageSpec("null-sr", (sys.executable, "-m", "srx.stages", "null-sr"),
                     StageKind.SUPER_RESOLUTION, scale)


def null_translation_stage() -> StageSpec:
    """Builtin translation stand-in: byte-identical copy."""
    return StageSpec("null-translate", (sys.executable, "-m", "srx.stages", "null-translate"),
                     StageKind.TRANSLATION, 1)


def stage_from_command(command: str, kind: StageKind | str, scale: int = 4) -> StageSpec:
    """Build a stage from a shell-style command line; ``"null"`` picks the builtin."""
    kind = StageKind(kind)
    if command.strip() == "null":
        return null_sr_stage(scale) if kind is StageKind.SUPER_RESOLUTION else null_translation_stage()
    argv = shlex.split(command)
    if not argv:
        raise ValidationError(f"empty {kind.value} command")
    out_scale = scale if kind is StageKind.SUPER_RESOLUTION else 1
    return StageSpec(Path(argv[0]).name, tuple(argv), kind, out_scale)


@dataclass(frozen=True)
class Topology:
    id: str
    stage_order: tuple[StageKind, StageKind]


TOPOLOGIES = {
    "M1": Topology("M1", (StageKind.SUPER_RESOLUTION, StageKind.TRANSLATION)),
    "M2": Topology("M2", (StageKind.TRANSLATION, StageKind.SUPER_RESOLUTION)),
}


def get_topology(name: str) -> Topology:
    try:
        return TOPOLOGIES[name.upper()]
    except KeyError:
        raise ValidationError(f"unknown topology {name!r}; expected M1 or M2") from None


@dataclass(frozen=True)
class PhaseSpec:
    id: str
    candidate_role: str
    upsample_rule: str = "none"
    reference_role: str = "day_hr_gt"


PHASE_IDS = ("Pre", "Intermediate", "Post")


def normalize_phase(name: str) -> str:
    for phase in PHASE_IDS:
        if name.lower() == phase.lower():
            return phase
    raise ValidationError(f"unknown phase {name!r}; expected one of {', '.join(PHASE_IDS)}")


def phase_spec(topology: str, phase: str, enable_m2_intermediate: bool = False) -> PhaseSpec:
    """Which image a phase compares against the day ground truth.

    Raises:
        PhaseUnavailable: for ``M2`` Intermediate unless explicitly enabled.
    """
    topo = get_topology(topology)
    phase = normalize_phase(phase)
    if phase == "Pre":
        return PhaseSpec("Pre", "night_lr", "nearest-to-reference")
    if phase == "Post":
        return PhaseSpec("Post", "output")
    if topo.id == "M2":
        if not enable_m2_intermediate:
            raise PhaseUnavailable("M2 Intermediate phase is disabled; pass --enable-m2-intermediate to evaluate it")
        return PhaseSpec("Intermediate", "intermediate", "nearest-to-reference")
    return PhaseSpec("Intermediate", "intermediate")


def available_phases(topology: str, enable_m2_intermediate: bool = False) -> list[str]:
    if get_topology(topology).id == "M2" and not enable_m2_intermediate:
        return ["Pre", "Post"]
    return list(PHASE_IDS)


def run_stage(stage: StageSpec, in_dir: str | os.PathLike, out_dir: str | os.PathLike) -> None:
    """Run one stage over ``in_dir`` and check its outputs against the protocol.

    Raises:
        StageCrashed: if the command cannot start or exits non-zero.
        MissingOutput: if an input has no same-named output PNG.
        WrongOutputScale: if an output's dimensions are not input x scale.
    """
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    argv = [*stage.command, "--input", str(in_dir), "--output", str(out_dir)]
    env = {**os.environ, "SRX_SCALE": str(stage.output_scale)}
    log.info("stage %s: %s", stage.name, shlex.join(argv))
    try:
        proc = subprocess.run(argv, env=env, capture_output=True, text=True)
    except OSError as exc:
        raise StageCrashed(f"stage {stage.name!r} could not start: {exc}") from exc
    if proc.returncode != 0:
        tail = proc.stderr.strip().splitlines()[-5:]
        raise StageCrashed(f"stage {stage.name!r} exited with status {proc.returncode}: " + " | ".join(tail))
    for src in sorted(in_dir.glob("*.png")):
        dst = out_dir / src.name
        if not dst.is_file():
            raise MissingOutput(f"stage {stage.name!r} produced no output for {src.name}")
        h, w = image_size(src)
        expected = (h * stage.output_scale, w * stage.output_scale)
        got = image_size(dst)
        if got != expected:
            raise WrongOutputScale(
                f"stage {stage.name!r}: {src.name} is {h}x{w}, expected {expected[0]}x{expected[1]} "
                f"output, got {got[0]}x{got[1]}"
            )


def _pick_stages(topology: Topology, stages) -> list[StageSpec]:
    by_kind = {}
    for stage in (stages.values() if isinstance(stages, dict) else stages):
        by_kind[stage.kind] = stage
    missing = [k.value for k in topology.stage_order if k not in by_kind]
    if missing:
        raise ValidationError(f"topology {topology.id} needs stages of kind: {', '.join(missing)}")
    return [by_kind[k] for k in topology.stage_order]


def run_topology(topology: Topology | str, manifest: Manifest, stages, work_dir: str | os.PathLike) -> Manifest:
    """Run both stages of ``topology`` over every manifest entry.

    ``stages`` is an iterable (or dict) of :class:`StageSpec`, one per kind.
    Any previous run in ``work_dir`` is removed first. Returns the
    augmented manifest, also written to ``work_dir/manifest.jsonl``.

    Raises:
        ManifestInvalid: if the manifest is empty or violates an invariant.
    """
    if isinstance(topology, str):
        topology = get_topology(topology)
    first, second = _pick_stages(topology, stages)
    sr_scale = next(s.output_scale for s in (first, second) if s.kind is StageKind.SUPER_RESOLUTION)
    if not manifest.entries:
        raise ManifestInvalid("manifest has no entries to run")
    violations = validate_entries(manifest, zoom=sr_scale)
    if violations:
        raise ManifestInvalid(f"{len(violations)} manifest violation(s), first: {violations[0]}")

    work_dir = Path(work_dir).resolve()
    dirs = {name: work_dir / name for name in ("input", "intermediate", "output")}
    for path in dirs.values():
        if path.exists():
            shutil.rmtree(path)
        path.mkdir(parents=True)
    for entry in manifest.entries:
        shutil.copyfile(manifest.path(entry, "night_lr"), dirs["input"] / f"{entry.id}.png")

    run_stage(first, dirs["input"], dirs["intermediate"])
    run_stage(second, dirs["intermediate"], dirs["output"])

    def rebase(entry: ManifestEntry, role: str) -> str:
        return Path(os.path.relpath(manifest.path(entry, role).resolve(), work_dir)).as_posix()

    augmented = []
    for entry in manifest.entries:
        out = ManifestEntry(
            id=entry.id,
            split=entry.split,
            night_lr=rebase(entry, "night_lr"),
            night_hr_gt=rebase(entry, "night_hr_gt"),
            day_hr_gt=rebase(entry, "day_hr_gt"),
            intermediate=f"intermediate/{entry.id}.png",
            output=f"output/{entry.id}.png",
            topology=topology.id,
        )
        if image_size(dirs["output"] / f"{entry.id}.png") != image_size(manifest.path(entry, "day_hr_gt")):
            raise WrongOutputScale(f"{topology.id} output for {entry.id} does not match day_hr_gt dimensions")
        augmented.append(out)
    result = Manifest(work_dir, sorted(augmented, key=lambda e: e.id))
    write_manifest(result, work_dir / MANIFEST_NAME)
    return result


def phase_pairs(phase: PhaseSpec, manifest: Manifest) -> Iterator[tuple[str, np.ndarray, np.ndarray]]:
    """Yield ``(id, candidate, reference)`` for every entry, in manifest order."""
    for entry in manifest.entries:
        yield (entry.id, *load_phase_pair(phase, manifest, entry))


def load_phase_pair(phase: PhaseSpec, manifest: Manifest, entry: ManifestEntry) -> tuple[np.ndarray, np.ndarray]:
    if getattr(entry, phase.candidate_role) is None:
        raise ValidationError(f"entry {entry.id} has no {phase.candidate_role} image; run a topology first")
    reference = load_image(manifest.path(entry, phase.reference_role))
    candidate = load_image(manifest.path(entry, phase.candidate_role))
    if phase.upsample_rule == "nearest-to-reference":
        candidate = resize_nearest(candidate, *reference.shape[:2])
    return candidate, reference
