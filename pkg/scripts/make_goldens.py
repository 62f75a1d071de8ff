"""Regenerate the pinned golden files in tests/golden/.

Each layout gets a seed-42 session (track CSV, map JSON), its SVG diagram
and its metrics report, all produced through the command-line entry point.
Only rerun this after an intentional output change, and review the diff.
"""
import argparse
import sys
from pathlib import Path

from dandelion.cli import run

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "tests" / "golden"
SEED = 42


def golden_commands(kind: str, out: Path) -> list[list[str]]:
    track, room = out / f"{kind}_seed{SEED}.csv", out / f"{kind}_seed{SEED}_map.json"
    common = ["--in", str(track), "--map", str(room)]
    return [
        ["simulate", "--layout", kind, "--seed", str(SEED), "--out", str(track), "--map-out", str(room)],
        ["render", *common, "--out", str(out / f"{kind}_seed{SEED}.svg")],
        ["metrics", *common, "--out", str(out / f"{kind}_seed{SEED}_metrics.json")],
    ]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=GOLDEN_DIR, help="target directory")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for kind in ("lecture", "teamwork"):
        for cmd in golden_commands(kind, args.out):
            code = run(cmd)
            if code:
                print(f"failed ({code}): {' '.join(cmd)}", file=sys.stderr)
                return code
    for p in sorted(args.out.iterdir()):
        print(f"{p.stat().st_size:>9}  {p.name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
