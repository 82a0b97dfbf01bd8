"""CSV/JSON artifact formats.

All files are deterministic: floats use shortest round-trip repr, JSON is
canonical (sorted keys, fixed separators), and no timestamps appear in any
artifact.  Metadata rides on '#'-prefixed comment lines so the CSVs are
self-describing.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .evolve import TimeGrid, TimeSeries

__all__ = [
    "canonical_json",
    "write_json",
    "write_timeseries_csv",
    "read_timeseries_csv",
    "write_spectrum_csv",
    "write_collapse_csv",
    "write_profile_csv",
    "file_sha256",
    "write_manifest",
]


def _fmt(x) -> str:
    return repr(float(x))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False))
        fh.write("\n")


def write_timeseries_csv(path, series: TimeSeries) -> None:
    with open(path, "w") as fh:
        fh.write(f"# meta {canonical_json(_jsonable(series.meta))}\n")
        fh.write(f"# grid {canonical_json(series.grid.to_dict())}\n")
        fh.write("t,m_x\n")
        for t, m in zip(series.grid.times, series.values):
            fh.write(f"{_fmt(t)},{_fmt(m)}\n")


def read_timeseries_csv(path) -> TimeSeries:
    meta, grid = {}, None
    ts, ms = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# meta "):
                meta = json.loads(line[len("# meta "):])
            elif line.startswith("# grid "):
                grid = json.loads(line[len("# grid "):])
            elif line.startswith("#") or line.startswith("t,"):
                continue
            else:
                a, b = line.split(",")
                ts.append(float(a))
                ms.append(float(b))
    if grid is None:
        if len(ts) < 2:
            raise ValueError(f"{path}: no grid metadata and too few samples")
        grid = {"t_max": ts[-1], "dt": ts[1] - ts[0]}
    return TimeSeries(TimeGrid(**grid), np.array(ms), meta)


def write_spectrum_csv(path, report) -> None:
    with open(path, "w") as fh:
        fh.write(f"# window {canonical_json(report.window.to_dict())}\n")
        fh.write(f"# resolution {_fmt(report.resolution)}\n")
        fh.write("E,amplitude\n")
        for e, a in zip(report.energies, report.amplitude):
            fh.write(f"{_fmt(e)},{_fmt(a)}\n")


def write_collapse_csv(path, members) -> None:
    """Long-format collapse data: one row per (member, sample)."""
    with open(path, "w") as fh:
        fh.write("x,m,N,control\n")
        for m in members:
            x = m.series.grid.times / m.n_sites
            for xi, mi in zip(x, m.series.values):
                fh.write(f"{_fmt(xi)},{_fmt(mi)},{m.n_sites},{_fmt(m.control)}\n")


def write_profile_csv(path, profile) -> None:
    with open(path, "w") as fh:
        fh.write("j,dm,J_prime,N\n")
        for j, dm in zip(profile.j_values, profile.dm):
            fh.write(f"{int(j)},{_fmt(dm)},{_fmt(profile.j_prime)},{profile.n_sites}\n")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, config, artifact_paths, timings, version) -> str:
    """Run manifest with config hash and per-artifact checksums; written
    atomically (tmp file + rename)."""
    manifest = {
        "config_sha256": hashlib.sha256(canonical_json(_jsonable(config)).encode()).hexdigest(),
        "version": version,
        "artifacts": [
            {"path": os.path.basename(p), "sha256": file_sha256(p),
             "bytes": os.path.getsize(p)}
            for p in sorted(artifact_paths)
        ],
        "timings_s": {k: round(v, 3) for k, v in timings.items()},
    }
    path = os.path.join(out_dir, "manifest.json")
    tmp = path + ".tmp"
    write_json(tmp, manifest)
    os.replace(tmp, path)
    return path
