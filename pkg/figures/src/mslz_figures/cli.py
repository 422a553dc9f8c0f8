"""Entry point: ``figures --job <spec file>`` renders one figure per job file.

The job file is TOML (or JSON with ``.json`` suffix):

    kind = "heatmap"          # heatmap | traces | lzcurve | fockscan
    input = "results/sweep.csv"
    output = "figs/sweep_map.png"

    [options]
    title = "population map"
    cmap = "viridis"
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .csvio import FigureError
from .render import FigureJob, render


def load_job(path: str) -> FigureJob:
    p = Path(path)
    if not p.exists():
        raise FigureError(f"job file not found: {path}")
    if p.suffix == ".json":
        data = json.loads(p.read_text())
    else:
        try:
            with open(p, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise FigureError(f"{path} is not valid TOML: {exc}") from exc
    if not isinstance(data, dict):
        raise FigureError(f"{path} must hold a single job table")
    return FigureJob.from_dict(data)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figures", description=__doc__.splitlines()[0])
    parser.add_argument("--job", required=True, action="append",
                        help="job spec file (repeatable)")
    args = parser.parse_args(argv)
    try:
        for job_path in args.job:
            out = render(load_job(job_path))
            print(f"wrote {out}")
    except FigureError as exc:
        print(f"figures: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
