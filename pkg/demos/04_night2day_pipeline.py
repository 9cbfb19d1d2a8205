"""
End-to-end run with null stages
===============================

Build a small synthetic night2day dataset, run both topologies with the
builtin stand-in stages, and compare the Post phase. With null stages
every output is a nearest upsample of the night input, so M1 and M2 tie.

Replace ``null_sr_stage()`` and ``null_translation_stage()`` with
``stage_from_command("...", kind)`` to benchmark real models.
"""

import tempfile
from pathlib import Path

from srx.dataset import DatasetConfig, prepare
from srx.evaluate import evaluate_phase
from srx.pipeline import null_sr_stage, null_translation_stage, run_topology
from srx.report import build_phase_report, compare, render_comparison, render_table, reports_by_key
from srx.synthetic import write_synthetic_pairs

root = Path(tempfile.mkdtemp(prefix="srx-demo-"))
write_synthetic_pairs(root / "pairs", 12, hr_size=64)
dataset = prepare(root / "pairs", root / "dataset", DatasetConfig(lr_size=16, hr_size=64))

stages = [null_sr_stage(4), null_translation_stage()]
reports = []
for topology in ("M1", "M2"):
    run = run_topology(topology, dataset, stages, root / topology)
    for phase in ("Pre", "Post"):
        r = evaluate_phase(run, topology, phase)
        reports.append(build_phase_report(r.model, r.phase, r.series, r.fid, bins=10))

print(render_table(reports))
print(render_comparison(compare(reports_by_key(reports))))
print(f"workspace: {root}")
