"""Builtin null stages conforming to the stage protocol.

Run as ``python -m srx.stages {null-sr,null-translate} --input DIR --output DIR``.
``null-sr`` nearest-upsamples every PNG by ``SRX_SCALE`` (default 4);
``null-translate`` copies every PNG byte for byte.
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
from pathlib import Path

from srx.imaging import load_image, resize_nearest, save_image


def null_sr(in_dir: Path, out_dir: Path, scale: int) -> None:
    for src in sorted(in_dir.glob("*.png")):
        img = load_image(src)
        h, w = img.shape[:2]
        save_image(resize_nearest(img, h * scale, w * scale), out_dir / src.name)


def null_translate(in_dir: Path, out_dir: Path) -> None:
    for src in sorted(in_dir.glob("*.png")):
        shutil.copyfile(src, out_dir / src.name)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m srx.stages")
    parser.add_argument("stage", choices=["null-sr", "null-translate"])
    parser.add_argument("--input", required=True, type=Path)
    parser.add_argument("--output", required=True, type=Path)
    args = parser.parse_args(argv)
    args.output.mkdir(parents=True, exist_ok=True)
    if args.stage == "null-sr":
        null_sr(args.input, args.output, int(os.environ.get("SRX_SCALE", "4")))
    else:
        null_translate(args.input, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
