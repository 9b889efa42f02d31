"""Run every JSON config under configs/ through the CLI, one output directory per config."""
import argparse
import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=str(ROOT / "configs"))
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--only", nargs="*", help="config stems to run (default: all)")
    args = ap.parse_args(argv)
    out = pathlib.Path(args.out)
    failed = []
    for cfg in sorted(pathlib.Path(args.configs).glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        cmd = [sys.executable, "-m", "pucci_asym", "run", "--config", str(cfg), "--out", str(out / cfg.stem)]
        code = subprocess.call(cmd)
        print(f"{cfg.stem}: exit {code}")
        if code:
            failed.append(cfg.stem)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
