"""Simulate one session per layout and render every output next to each other.

Writes, per layout: track CSV, map JSON, time-coded and label-coded diagrams
(SVG and PNG), the density heatmap PNG and the metrics report.
"""
import argparse
import sys
from pathlib import Path

from dandelion.cli import run


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("demo"), help="output directory")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--width", type=int, default=1200)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    for kind in ("lecture", "teamwork"):
        base = args.out / kind
        track, room = f"{base}.csv", f"{base}_map.json"
        common = ["--in", track, "--map", room]
        steps = [
            ["simulate", "--layout", kind, "--seed", str(args.seed), "--out", track, "--map-out", room],
            ["render", *common, "--out", f"{base}_time.svg"],
            ["render", *common, "--out", f"{base}_time.png", "--width", str(args.width)],
            ["render", *common, "--out", f"{base}_label.png", "--width", str(args.width), "--coding", "label"],
            ["heatmap", *common, "--out", f"{base}_heatmap.png", "--width", str(args.width)],
            ["metrics", *common, "--out", f"{base}_metrics.json"],
        ]
        for step in steps:
            code = run(step)
            if code:
                return code
        print(f"{kind}: wrote {base}_*")
    return 0


if __name__ == "__main__":
    sys.exit(main())
