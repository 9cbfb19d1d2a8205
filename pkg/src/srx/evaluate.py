"""Scoring of evaluation phases: per-sample metrics plus a phase-level FID.

FID features come either from :func:`srx.fid.builtin_features` or from
pre-extracted feature files in a directory. In the latter case candidate
features are looked up as ``<model>_<phase>`` then ``<phase>``, and
reference (day ground truth) features as ``reference``, each with a
``.srxf`` or ``.csv`` extension and lower-case names, e.g.
``m1_post.srxf``, ``pre.csv``, ``reference.srxf``.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from srx.dataset import Manifest
from srx.errors import DegenerateInput, ManifestInvalid, ValidationError
from srx.fid import FeatureSet, builtin_features, fid_from_features, read_features
from srx.metrics import METRIC_NAMES, METRICS
from srx.pipeline import get_topology, load_phase_pair, phase_spec
from srx.report import MetricSeries

log = logging.getLogger(__name__)

FEATURE_EXTENSIONS = (".srxf", ".csv")


@dataclass(frozen=True)
class FeatureSource:
    kind: str
    directory: Path | None = None

    @classmethod
    def parse(cls, spec: str) -> "FeatureSource":
        """``"builtin"`` or ``"files:<dir>"``."""
        if spec == "builtin":
            return cls("builtin")
        if spec.startswith("files:") and len(spec) > len("files:"):
            return cls("files", Path(spec[len("files:"):]))
        raise ValidationError(f"bad feature source {spec!r}; expected 'builtin' or 'files:<dir>'")

    def __str__(self) -> str:
        return "builtin" if self.kind == "builtin" else f"files:{self.directory}"

    def _find(self, stems: list[str]) -> Path:
        for stem in stems:
            for ext in FEATURE_EXTENSIONS:
                path = self.directory / f"{stem}{ext}"
                if path.is_file():
                    return path
        raise FileNotFoundError(f"no feature file for {' or '.join(stems)} in {self.directory}")

    def load(self, model: str, phase: str) -> tuple[FeatureSet, FeatureSet]:
        cand = self._find([f"{model.lower()}_{phase.lower()}", phase.lower()])
        ref = self._find(["reference"])
        return read_features(cand), read_features(ref)


@dataclass
class PhaseResult:
    model: str
    phase: str
    ids: list[str]
    series: dict[str, MetricSeries]
    fid: float
    features: str

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "phase": self.phase,
            "ids": self.ids,
            "features": self.features,
            "fid": self.fid,
            "metrics": {
                name: {"values": s.values, "skipped": s.skipped}
                for name, s in self.series.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseResult":
        series = {
            name: MetricSeries(name, d["phase"], d["model"], m["values"], int(m["skipped"]))
            for name, m in d["metrics"].items()
        }
        return cls(d["model"], d["phase"], list(d["ids"]), series, float(d["fid"]), d["features"])


def _score_pair(candidate: np.ndarray, reference: np.ndarray) -> dict[str, float | None]:
    scores = {}
    for name in METRIC_NAMES:
        try:
            scores[name] = METRICS[name](candidate, reference).value
        except DegenerateInput:
            scores[name] = None
    return scores


def evaluate_phase(manifest: Manifest, topology: str, phase: str, features: FeatureSource | str = "builtin",
                   jobs: int = 1, enable_m2_intermediate: bool = False) -> PhaseResult:
    """Score every manifest entry for one phase.

    Samples are processed on up to ``jobs`` threads; results are reduced in
    manifest order whatever the thread count. Samples with a degenerate
    input for a metric are left out of that metric's series and counted in
    its ``skipped`` field.
    """
    model = get_topology(topology).id
    spec = phase_spec(model, phase, enable_m2_intermediate)
    if isinstance(features, str):
        features = FeatureSource.parse(features)
    if not manifest.entries:
        raise ManifestInvalid("manifest has no entries to evaluate")
    for entry in manifest.entries:
        if entry.topology is not None and entry.topology != model:
            raise ManifestInvalid(f"entry {entry.id} was produced by {entry.topology}, not {model}")
    builtin = features.kind == "builtin"

    def work(entry):
        candidate, reference = load_phase_pair(spec, manifest, entry)
        scores = _score_pair(candidate, reference)
        feats = (builtin_features(candidate), builtin_features(reference)) if builtin else None
        return scores, feats

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, manifest.entries))
    else:
        results = [work(e) for e in manifest.entries]

    ids = [e.id for e in manifest.entries]
    series = {}
    for name in METRIC_NAMES:
        values = [r[0][name] for r in results if r[0][name] is not None]
        s = MetricSeries(name, spec.id, model, values, skipped=len(results) - len(values))
        if s.skipped:
            log.warning("%s-%s: %d sample(s) skipped for %s", model, spec.id, s.skipped, name)
        series[name] = s

    if builtin:
        cand = FeatureSet(np.stack([r[1][0] for r in results]))
        ref = FeatureSet(np.stack([r[1][1] for r in results]))
    else:
        cand, ref = features.load(model, spec.id)
    fid = fid_from_features(cand, ref)
    return PhaseResult(model, spec.id, ids, series, fid, str(features))


def write_eval(results: list[PhaseResult], path: str | os.PathLike) -> None:
    payload = {"phases": [r.to_dict() for r in results]}
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def read_eval(path: str | os.PathLike) -> list[PhaseResult]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return [PhaseResult.from_dict(d) for d in data["phases"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed evaluation file: {exc}") from exc
