"""JSON/CSV output helpers and the run manifest written by every command."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__


def to_jsonable(obj):
    """Convert numpy scalars/arrays, dataclasses, tuples and non-finite floats."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj):
    """JSON text; floats use the shortest representation that round-trips."""
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj) + "\n")


def format_number(v, precision=17):
    return format(float(v), f".{precision}g")


def write_csv(path_or_file, header, rows, precision=17):
    """Write rows of numbers (strings pass through) with ``precision`` significant digits."""
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else format_number(v, precision) for v in row])
    finally:
        if own:
            fh.close()


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, rows


@dataclass
class RunManifest:
    """Parameters and provenance of one command invocation."""

    subcommand: str
    parameters: dict
    seeds: list = field(default_factory=list)
    version: str = __version__
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    started: float = field(default_factory=time.time)
    elapsed: float | None = None
    status: str = "running"
    host: dict = field(default_factory=lambda: {"python": platform.python_version(),
                                                "numpy": np.__version__})

    def write(self, path):
        write_json(path, self)

    def finish(self, path, status="ok"):
        self.elapsed = time.time() - self.started
        self.status = status
        self.write(path)

    @classmethod
    def read(cls, path):
        with open(path) as fh:
            d = json.load(fh)
        return cls(**d)
