"""CSV tables and JSON run manifests."""

import csv
import json
import math
import os
import platform
import time
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


class NonFiniteOutput(ValueError):
    pass


def resolve_out_dir(flag=None, configured=None):
    """``--out-dir`` first, then ``ROTOWAVE_OUT``, then the configured directory."""
    chosen = flag or os.environ.get("ROTOWAVE_OUT") or configured or "rotowave_out"
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise NonFiniteOutput(f"non-finite value {value}")
        return repr(value)
    return str(value)


def write_csv(path, name, header, rows):
    """Write a table with a ``# schema=`` comment line; non-finite numbers are refused."""
    path = Path(path)
    cells = []
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
        try:
            cells.append([_cell(v) for v in row])
        except NonFiniteOutput as exc:
            raise NonFiniteOutput(f"{path.name}: {exc} in row {row}") from None
    with path.open("w", newline="") as fh:
        fh.write(f"# schema=rotowave.{name}.v{SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(cells)
    return path


def read_csv(path):
    """Header and rows (as strings) of a file written by :func:`write_csv`."""
    with Path(path).open(newline="") as fh:
        schema = fh.readline().strip()
        reader = csv.reader(fh)
        header = next(reader)
        return schema, header, list(reader)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


class RunManifest:
    """Collects outputs of one experiment and writes ``<name>.manifest.json``."""

    def __init__(self, out_dir, experiment, config, seed=None):
        from . import __version__

        self.out_dir = Path(out_dir)
        self.experiment = experiment
        self.config = config
        self.seed = seed
        self.version = __version__
        self.outputs = []
        self.results = {}
        self.start = time.time()
        self.complete = False

    def table(self, name, header, rows):
        path = write_csv(self.out_dir / f"{self.experiment}.{name}.csv", name, header, rows)
        self.outputs.append(path.name)
        return path

    def write(self):
        doc = {
            "experiment": self.experiment,
            "version": self.version,
            "config": self.config,
            "seed": self.seed,
            "outputs": self.outputs,
            "results": self.results,
            "complete": self.complete,
            "wall_clock_s": round(time.time() - self.start, 3),
            "python": platform.python_version(),
            "numpy": np.__version__,
        }
        path = self.out_dir / f"{self.experiment}.manifest.json"
        path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        return path
