"""Command-line entry point: ``srx <command> [flags]``.

Exit codes: 0 on success, 1 on validation errors (bad flags, bad inputs,
unavailable phases, missing reports), 2 on external stage failures.

Any subcommand accepts ``--config FILE``, a TOML file whose top-level
keys and ``[<command>]`` table supply flag values (dashes or underscores
in key names). Explicit flags override the file. ``SRX_LOG`` sets the log
level (``DEBUG``, ``INFO``, ``WARNING``; default ``WARNING``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

from srx.dataset import SPLITS, DatasetConfig, prepare, read_manifest, validate_manifest
from srx.errors import SrxError, StageError, ValidationError
from srx.evaluate import FeatureSource, evaluate_phase, read_eval, write_eval
from srx.pipeline import (
    StageKind,
    available_phases,
    normalize_phase,
    null_sr_stage,
    null_translation_stage,
    phase_spec,
    run_topology,
    stage_from_command,
)
from srx.report import (
    DEFAULT_BINS,
    build_phase_report,
    compare,
    read_report,
    render_comparison,
    render_table,
    reports_by_key,
    write_report,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("srx")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_STAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML file supplying flag values")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srx", description="Multi-modality super-resolution benchmark harness.",
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("prepare", help="split composites, synthesize LR inputs, write the manifest")
    _add_common(p)
    p.add_argument("--src", type=Path, required=True, help="directory of day|night composite PNGs")
    p.add_argument("--out", type=Path, required=True, help="dataset output directory")
    p.add_argument("--seed", type=int, default=0, help="split shuffle seed (default 0)")
    p.add_argument("--zoom", type=_positive_int, default=4, help="zoom factor (default 4)")
    p.add_argument("--lr-size", type=_positive_int, default=64, help="LR side length (default 64)")
    p.add_argument("--day-side", choices=["left", "right"], default="left",
                   help="which half of each composite is the day image (default left)")
    p.add_argument("--split-fractions", default="0.8,0.1,0.1", help="train,val,test fractions")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")

    p = sub.add_parser("run", help="run a topology's two stages over a manifest")
    _add_common(p)
    p.add_argument("--manifest", type=Path, required=True, help="dataset manifest.jsonl")
    p.add_argument("--topology", type=str.upper, choices=["M1", "M2"], required=True)
    p.add_argument("--sr-cmd", help="super-resolution stage command, or 'null' for the builtin")
    p.add_argument("--translate-cmd", help="translation stage command, or 'null' for the builtin")
    p.add_argument("--out", type=Path, required=True, help="work directory for stage outputs")
    p.add_argument("--split", choices=[*SPLITS, "all"], default="test", help="entries to run (default test)")
    p.add_argument("--zoom", type=_positive_int, default=4, help="SR stage output scale (default 4)")

    p = sub.add_parser("eval", help="score evaluation phases with RMSE, MAE, SSIM, NCC and FID")
    _add_common(p)
    p.add_argument("--manifest", type=Path, required=True, help="augmented manifest from 'run' (Pre also accepts a dataset manifest)")
    p.add_argument("--topology", type=str.upper, choices=["M1", "M2"], required=True)
    p.add_argument("--phase", default="all", help="comma-separated phases: pre,intermediate,post or all")
    p.add_argument("--features", default="builtin", help="FID features: builtin or files:<dir>")
    p.add_argument("--split", choices=[*SPLITS, "all"], default="all", help="entries to score (default all)")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")
    p.add_argument("--enable-m2-intermediate", action="store_true", default=False,
                   help="allow the M2 Intermediate phase (off by default)")
    p.add_argument("--out", type=Path, required=True, help="output directory for eval.json")

    p = sub.add_parser("report", help="tables and histograms from eval results")
    _add_common(p)
    p.add_argument("--eval", type=Path, nargs="+", required=True, help="one or more eval.json files")
    p.add_argument("--out", type=Path, required=True, help="report output directory")
    p.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS, help=f"histogram bins (default {DEFAULT_BINS})")

    p = sub.add_parser("compare", help="M1 versus M2 on the Post phase")
    _add_common(p)
    p.add_argument("--report", type=Path, nargs="+", required=True, help="report.json files")
    p.add_argument("--phase", default="post", help="phase to compare (default post)")
    p.add_argument("--out", type=Path, help="directory for comparison.md")

    p = sub.add_parser("selftest", help="null-stage end-to-end check that Pre and Post reports coincide")
    _add_common(p)
    p.add_argument("--pairs", type=_positive_int, default=10, help="synthetic composites (default 10)")
    p.add_argument("--hr-size", type=_positive_int, default=256, help="HR side length (default 256)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)
    p.add_argument("--out", type=Path, help="keep the workspace here instead of a temp directory")

    lines = ["flags by command:"]
    for name, sp in sub.choices.items():
        flags = [a.option_strings[-1] for a in sp._actions if a.option_strings and a.dest != "help"]
        lines.append(f"  {name}: " + " ".join(flags))
    lines.append("\nexit codes: 0 success, 1 validation error, 2 stage failure; SRX_LOG sets verbosity")
    parser.epilog = "\n".join(lines)
    return parser


def _load_config(argv: list[str]) -> dict | None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return None
    try:
        with open(known.config, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{known.config}: {exc}") from exc


def _apply_config(parser: argparse.ArgumentParser, command: str, config: dict) -> None:
    """Install config values as defaults of ``command``'s subparser."""
    subparsers = parser._subparsers._group_actions[0].choices
    actions = {a.dest: a for a in subparsers[command]._actions}
    all_dests = {a.dest for sp in subparsers.values() for a in sp._actions}
    section = config.get(command, {})
    if not isinstance(section, dict):
        raise ValidationError(f"config [{command}] must be a table")
    values = {}
    for key, value in config.items():
        if isinstance(value, dict):
            continue
        key = key.replace("-", "_")
        if key not in all_dests:
            raise ValidationError(f"config key {key!r} is not a flag of any command")
        if key in actions:
            values[key] = value
    for key, value in section.items():
        key = key.replace("-", "_")
        if key not in actions:
            raise ValidationError(f"config key {key!r} is not a flag of '{command}'")
        values[key] = value
    values.pop("config", None)
    for dest, value in values.items():
        action = actions[dest]
        action.required = False
        if action.nargs == "+":
            value = [action.type(v) if action.type else v for v in (value if isinstance(value, list) else [value])]
        elif isinstance(value, str) and action.type is not None:
            value = action.type(value)
        values[dest] = value
    subparsers[command].set_defaults(**values)


def _select(manifest, split: str):
    return manifest.select(None if split == "all" else split)


def cmd_prepare(args) -> int:
    try:
        fractions = tuple(float(x) for x in args.split_fractions.split(","))
    except ValueError:
        raise ValidationError(f"bad --split-fractions {args.split_fractions!r}") from None
    cfg = DatasetConfig(zoom=args.zoom, lr_size=args.lr_size, hr_size=args.lr_size * args.zoom,
                        split_fractions=fractions, seed=args.seed, day_side=args.day_side)
    manifest = prepare(args.src, args.out, cfg, jobs=args.jobs)
    counts = {s: sum(e.split == s for e in manifest.entries) for s in SPLITS}
    print(f"prepared {len(manifest.entries)} pairs: " + ", ".join(f"{s}={n}" for s, n in counts.items()))
    violations = validate_manifest(args.out / "manifest.jsonl", zoom=args.zoom)
    for v in violations:
        print(v, file=sys.stderr)
    return EXIT_VALIDATION if violations else EXIT_OK


def cmd_run(args) -> int:
    missing = [flag for flag, value in (("--sr-cmd", args.sr_cmd), ("--translate-cmd", args.translate_cmd))
               if not value]
    if missing:
        raise ValidationError(f"topology {args.topology} needs {' and '.join(missing)}")
    stages = [
        stage_from_command(args.sr_cmd, StageKind.SUPER_RESOLUTION, args.zoom),
        stage_from_command(args.translate_cmd, StageKind.TRANSLATION),
    ]
    manifest = _select(read_manifest(args.manifest), args.split)
    result = run_topology(args.topology, manifest, stages, args.out)
    print(f"{args.topology}: ran {len(result.entries)} entries; manifest at {result.root / 'manifest.jsonl'}")
    return EXIT_OK


def _phases(text: str, topology: str, enable_m2_intermediate: bool) -> list[str]:
    if text.strip().lower() == "all":
        return available_phases(topology, enable_m2_intermediate)
    phases = [normalize_phase(p.strip()) for p in text.split(",") if p.strip()]
    for phase in phases:
        phase_spec(topology, phase, enable_m2_intermediate)
    return phases


def cmd_eval(args) -> int:
    phases = _phases(args.phase, args.topology, args.enable_m2_intermediate)
    features = FeatureSource.parse(args.features)
    manifest = _select(read_manifest(args.manifest), args.split)
    results = [
        evaluate_phase(manifest, args.topology, phase, features, args.jobs, args.enable_m2_intermediate)
        for phase in phases
    ]
    args.out.mkdir(parents=True, exist_ok=True)
    write_eval(results, args.out / "eval.json")
    for r in results:
        print(f"{r.model}-{r.phase}: {len(r.ids)} samples, FID {r.fid:.2f}")
    return EXIT_OK


def cmd_report(args) -> int:
    results = [r for path in args.eval for r in read_eval(path)]
    reports = [build_phase_report(r.model, r.phase, r.series, r.fid, args.bins) for r in results]
    write_report(reports, args.out)
    print(render_table(reports), end="")
    return EXIT_OK


def cmd_compare(args) -> int:
    phase = normalize_phase(args.phase)
    reports = {}
    for path in args.report:
        reports.update(reports_by_key(read_report(path)))
    comp = compare(reports, ("M1", "M2"), phase)
    text = render_comparison(comp)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "comparison.md").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def selftest(pairs: int = 10, workspace: str | os.PathLike | None = None, hr_size: int = 256, seed: int = 0,
             jobs: int = 1, bins: int = DEFAULT_BINS, out=None) -> bool:
    """Run both topologies with null stages; Pre and Post reports must coincide."""
    from srx.synthetic import write_synthetic_pairs

    out = out or sys.stdout
    if hr_size % 4:
        raise ValidationError(f"selftest hr_size must be a multiple of 4, got {hr_size}")
    with tempfile.TemporaryDirectory(prefix="srx-selftest-") as tmp:
        root = Path(workspace) if workspace else Path(tmp)
        write_synthetic_pairs(root / "pairs", pairs, hr_size=hr_size, seed=seed)
        cfg = DatasetConfig(lr_size=hr_size // 4, hr_size=hr_size, seed=seed)
        manifest = prepare(root / "pairs", root / "dataset", cfg, jobs=jobs)
        stages = [null_sr_stage(cfg.zoom), null_translation_stage()]
        ok = True
        for topo in ("M1", "M2"):
            augmented = run_topology(topo, manifest, stages, root / f"run_{topo.lower()}")
            reports = []
            for phase in ("Pre", "Post"):
                r = evaluate_phase(augmented, topo, phase, "builtin", jobs)
                reports.append(build_phase_report(r.model, r.phase, r.series, r.fid, bins))
            write_report(reports, root / f"report_{topo.lower()}")
            pre, post = reports
            if pre.payload_json() == post.payload_json():
                print(f"{topo}: Pre == Post ({pre.sample_count} samples, reports byte-identical)", file=out)
            else:
                ok = False
                print(f"{topo}: Pre != Post", file=out)
                print(render_table(reports), file=out)
    return ok


def cmd_selftest(args) -> int:
    ok = selftest(args.pairs, args.out, args.hr_size, args.seed, args.jobs, args.bins)
    print("selftest passed" if ok else "selftest FAILED")
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {
    "prepare": cmd_prepare,
    "run": cmd_run,
    "eval": cmd_eval,
    "report": cmd_report,
    "compare": cmd_compare,
    "selftest": cmd_selftest,
}


def _configure_logging() -> None:
    level = getattr(logging, os.environ.get("SRX_LOG", "WARNING").upper(), logging.WARNING)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_logging()
    parser = build_parser()
    try:
        config = _load_config(argv)
        if config:
            command = next((a for a in argv if a in COMMANDS), None)
            if command:
                _apply_config(parser, command, config)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    except StageError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (SrxError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
