"""Aggregation of per-sample metric series into tables and histograms.

An output bundle holds ``report.json`` (full precision), ``report.md`` (two
decimals, ``mean ± std`` cells, direction arrows) and one
``hist_<model>_<phase>_<metric>.csv`` per metric with rows
``bin_left,bin_right,count``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from srx.errors import EmptySeries, MissingReport, ValidationError
from srx.metrics import DIRECTIONS, METRIC_NAMES, Direction

DEFAULT_BINS = 50

# natural value range of each metric, used as histogram support
METRIC_RANGES = {"RMSE": (0.0, 1.0), "MAE": (0.0, 1.0), "SSIM": (-1.0, 1.0), "NCC": (-1.0, 1.0)}


@dataclass
class MetricSeries:
    """Per-sample values of one metric over one phase, in manifest order."""

    metric: str
    phase: str
    model: str
    values: list[float] = field(default_factory=list)
    skipped: int = 0

    def __post_init__(self):
        if self.metric not in DIRECTIONS:
            raise ValidationError(f"unknown metric {self.metric!r}")
        self.values = [float(v) for v in self.values]
        if not all(math.isfinite(v) for v in self.values):
            raise ValidationError(f"{self.metric} series contains non-finite values")

    @property
    def direction(self) -> Direction:
        return DIRECTIONS[self.metric]

    @property
    def attempted(self) -> int:
        return len(self.values) + self.skipped


def summarize(series: MetricSeries) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation.

    Sums are exactly rounded, so the result does not depend on value order.
    """
    values = series.values
    if not values:
        raise EmptySeries(f"{series.metric} series for {series.model}-{series.phase} is empty")
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def format_number(x: float) -> str:
    text = f"{x:.2f}"
    return "0.00" if text == "-0.00" else text


def format_cell(mean: float, std: float | None = None) -> str:
    if std is None:
        return format_number(mean)
    return f"{format_number(mean)} ± {format_number(std)}"


def histogram_edges(lo: float, hi: float, bins: int) -> np.ndarray:
    return lo + (hi - lo) * np.arange(bins + 1) / bins


def histogram(series: MetricSeries, bins: int = DEFAULT_BINS,
              value_range: tuple[float, float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Uniform bins over the metric's natural range.

    Bins are right-open except the last, which is closed. Values outside
    the range are counted in the nearest end bin so counts always sum to
    the number of values.
    """
    if bins < 1:
        raise ValidationError(f"bins must be >= 1, got {bins}")
    if not series.values:
        raise EmptySeries(f"{series.metric} series for {series.model}-{series.phase} is empty")
    lo, hi = value_range or METRIC_RANGES[series.metric]
    edges = histogram_edges(lo, hi, bins)
    idx = np.searchsorted(edges, np.asarray(series.values), side="right") - 1
    counts = np.bincount(np.clip(idx, 0, bins - 1), minlength=bins)
    return edges, counts


@dataclass
class MetricSummary:
    direction: Direction
    mean: float
    std: float
    skipped: int = 0
    edges: list[float] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "mean": self.mean,
            "std": self.std,
            "skipped": self.skipped,
            "histogram": {"edges": list(self.edges), "counts": list(self.counts)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSummary":
        hist = d.get("histogram", {})
        return cls(Direction(d["direction"]), float(d["mean"]), float(d["std"]), int(d.get("skipped", 0)),
                   [float(e) for e in hist.get("edges", [])], [int(c) for c in hist.get("counts", [])])


@dataclass
class PhaseReport:
    model: str
    phase: str
    sample_count: int
    metrics: dict[str, MetricSummary]
    fid: float | None = None

    @property
    def label(self) -> str:
        return f"{self.model}-{self.phase}"

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "phase": self.phase,
            "sample_count": self.sample_count,
            "fid": self.fid,
            "metrics": {name: m.to_dict() for name, m in self.metrics.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseReport":
        metrics = {name: MetricSummary.from_dict(m) for name, m in d["metrics"].items()}
        fid = d.get("fid")
        return cls(d["model"], d["phase"], int(d["sample_count"]), metrics, None if fid is None else float(fid))

    def payload_json(self) -> str:
        """Canonical JSON of the statistics alone, without model/phase labels."""
        body = self.to_dict()
        del body["model"], body["phase"]
        return json.dumps(body, sort_keys=True, ensure_ascii=False)


def build_phase_report(model: str, phase: str, series: dict[str, MetricSeries], fid: float | None,
                       bins: int = DEFAULT_BINS) -> PhaseReport:
    metrics = {}
    counts = set()
    for name in METRIC_NAMES:
        if name not in series:
            continue
        s = series[name]
        mean, std = summarize(s)
        edges, hist = histogram(s, bins)
        metrics[name] = MetricSummary(s.direction, mean, std, s.skipped, edges.tolist(), hist.tolist())
        counts.add(s.attempted)
    if len(counts) > 1:
        raise ValidationError(f"{model}-{phase}: metric series cover different sample counts {sorted(counts)}")
    return PhaseReport(model, phase, counts.pop() if counts else 0, metrics, fid)


def _heading(name: str) -> str:
    return f"{name} ({DIRECTIONS[name].arrow})"


def render_table(reports: list[PhaseReport]) -> str:
    """Markdown table with one column per phase report and one row per metric."""
    names = [n for n in METRIC_NAMES if any(n in r.metrics for r in reports)]
    lines = [
        "| Measure | " + " | ".join(r.label for r in reports) + " |",
        "|:--" + "|:-:" * len(reports) + "|",
    ]
    for name in names:
        cells = []
        for r in reports:
            m = r.metrics.get(name)
            cells.append(format_cell(m.mean, m.std) if m else "n/a")
        lines.append(f"| {_heading(name)} | " + " | ".join(cells) + " |")
    if any(r.fid is not None for r in reports):
        cells = [format_cell(r.fid) if r.fid is not None else "n/a" for r in reports]
        lines.append(f"| {_heading('FID')} | " + " | ".join(cells) + " |")
    notes = [
        f"- {r.label}: {m.skipped} sample(s) skipped for {name} (degenerate input)"
        for r in reports for name, m in r.metrics.items() if m.skipped
    ]
    return "\n".join(lines + ([""] + notes if notes else [])) + "\n"


def _fmt_edge(x: float) -> str:
    return repr(float(x))


def write_report(reports: list[PhaseReport], out_dir: str | os.PathLike) -> list[Path]:
    """Write the report bundle; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    path = out_dir / "report.json"
    path.write_text(json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8")
    written.append(path)
    path = out_dir / "report.md"
    path.write_text(render_table(reports), encoding="utf-8")
    written.append(path)
    for r in reports:
        for name, m in r.metrics.items():
            path = out_dir / f"hist_{r.model}_{r.phase}_{name}.csv"
            rows = ["bin_left,bin_right,count"]
            rows += [f"{_fmt_edge(m.edges[i])},{_fmt_edge(m.edges[i + 1])},{c}" for i, c in enumerate(m.counts)]
            path.write_text("\n".join(rows) + "\n", encoding="utf-8")
            written.append(path)
    return written


def read_report(path: str | os.PathLike) -> list[PhaseReport]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return [PhaseReport.from_dict(d) for d in data["reports"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed report: {exc}") from exc


@dataclass
class ComparisonRow:
    metric: str
    direction: Direction
    cells: dict[str, tuple[float, float | None]]
    winner: str


@dataclass
class Comparison:
    models: tuple[str, ...]
    phase: str
    rows: list[ComparisonRow]

    def to_dict(self) -> dict:
        return {
            "models": list(self.models),
            "phase": self.phase,
            "rows": [
                {
                    "metric": row.metric,
                    "direction": row.direction.value,
                    "values": {m: {"mean": v[0], "std": v[1]} for m, v in row.cells.items()},
                    "winner": row.winner,
                }
                for row in self.rows
            ],
        }

    def winners(self) -> dict[str, str]:
        return {row.metric: row.winner for row in self.rows}


def _winner(direction: Direction, a: tuple[str, float], b: tuple[str, float]) -> str:
    # a tie is anything indistinguishable at the rendered precision
    if format_number(a[1]) == format_number(b[1]):
        return "tie"
    if direction is Direction.LOWER:
        return a[0] if a[1] < b[1] else b[0]
    return a[0] if a[1] > b[1] else b[0]


def compare(reports: dict[tuple[str, str], PhaseReport], models: tuple[str, str] = ("M1", "M2"),
            phase: str = "Post") -> Comparison:
    """Side-by-side comparison of two models' reports for one phase.

    Raises:
        MissingReport: if either model's report for ``phase`` is absent.
    """
    missing = [m for m in models if (m, phase) not in reports]
    if missing:
        raise MissingReport(f"no {phase} report for {', '.join(missing)}")
    first, second = (reports[(m, phase)] for m in models)
    rows = []
    for name in METRIC_NAMES:
        if name in first.metrics and name in second.metrics:
            a, b = first.metrics[name], second.metrics[name]
            cells = {models[0]: (a.mean, a.std), models[1]: (b.mean, b.std)}
            winner = _winner(DIRECTIONS[name], (models[0], a.mean), (models[1], b.mean))
            rows.append(ComparisonRow(name, DIRECTIONS[name], cells, winner))
    if first.fid is not None and second.fid is not None:
        cells = {models[0]: (first.fid, None), models[1]: (second.fid, None)}
        winner = _winner(Direction.LOWER, (models[0], first.fid), (models[1], second.fid))
        rows.append(ComparisonRow("FID", Direction.LOWER, cells, winner))
    return Comparison(tuple(models), phase, rows)


def render_comparison(comp: Comparison, column_order: tuple[str, ...] | None = None) -> str:
    order = column_order or comp.models
    lines = [
        "| Measure | " + " | ".join(order) + " | Better |",
        "|:--" + "|:-:" * len(order) + "|:-:|",
    ]
    for row in comp.rows:
        cells = [format_cell(*row.cells[m]) for m in order]
        lines.append(f"| {_heading(row.metric)} | " + " | ".join(cells) + f" | {row.winner} |")
    return "\n".join(lines) + "\n"


def reports_by_key(reports: list[PhaseReport]) -> dict[tuple[str, str], PhaseReport]:
    return {(r.model, r.phase): r for r in reports}
