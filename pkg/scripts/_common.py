"""Shared helpers for the experiment scripts: run CLI scans into an output directory."""
import argparse
import pathlib
import sys
import time

from deltashell.cli import main


def out_dir(description: str) -> pathlib.Path:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", default="results", help="directory for the CSV datasets")
    d = pathlib.Path(p.parse_args().out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def run(argv: list[str], path: pathlib.Path):
    start = time.perf_counter()
    code = main(argv + ["--out", str(path)])
    print(f"{path}  ({time.perf_counter() - start:.1f} s, exit {code})")
    if code != 0:
        sys.exit(code)
