"""Run-directory output: tables as CSV or JSON, plus config and summary.

Layout per run: ``config.json``, ``pulses.csv`` (or ``.json``),
``field_traces.csv`` (when traces were recorded) and ``summary.json``.
CSV uses RFC-4180 quoting, '.' decimals and a fixed column order; the
JSON table variant carries the identical numbers as {"columns", "rows"}.
Nothing time- or host-dependent is written, so reruns with the same seed
are byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, config_fingerprint, config_to_dict
from .meas import TrajectoryRecord

SCHEMA_VERSION = 1

PULSE_COLUMNS = [
    "scan",
    "trajectory",
    "pulse_index",
    "n1",
    "n2",
    "p1_first",
    "mean_photon",
    "amp_abs",
    "amp_arg",
    "phi",
    "cep_fidelity",
    "truncated",
]

TRACE_COLUMNS = ["scan", "trajectory", "pulse_index", "t", "field"]


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def write_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow(row)

    def write_json(self, path: Path) -> None:
        payload = {"columns": self.columns, "rows": self.rows}
        path.write_text(json.dumps(payload, sort_keys=True) + "\n")

    def write(self, path_stem: Path, fmt: str) -> Path:
        path = path_stem.with_suffix(".csv" if fmt == "csv" else ".json")
        if fmt == "csv":
            self.write_csv(path)
        else:
            self.write_json(path)
        return path


def read_table(path: Path) -> Table:
    """Read either table format back, coercing numeric-looking cells."""
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        return Table(columns=payload["columns"], rows=payload["rows"])
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[_coerce(cell) for cell in row] for row in reader]
    return Table(columns=columns, rows=rows)


def _coerce(cell: str):
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def pulses_table(record_sets: list[tuple[int, list[TrajectoryRecord]]]) -> Table:
    """Flatten trajectory records into the pulses table.

    ``record_sets`` pairs a scan label with its records (calibration runs
    have two scans; everything else uses scan 0).
    """
    table = Table(columns=list(PULSE_COLUMNS))
    for scan, records in record_sets:
        for traj, rec in enumerate(records):
            fids = rec.cep_fidelities
            for i, p in enumerate(rec.pulses):
                fid = fids[i] if i < len(fids) else float("nan")
                table.rows.append(
                    [
                        scan,
                        traj,
                        p.pulse_index,
                        p.n1,
                        p.n2,
                        float(p.p1_first),
                        float(p.mean_photon),
                        float(p.amp_abs),
                        float(p.amp_arg),
                        float(p.phi),
                        float(fid),
                        int(p.truncated),
                    ]
                )
    return table


def traces_table(record_sets: list[tuple[int, list[TrajectoryRecord]]]) -> Table:
    table = Table(columns=list(TRACE_COLUMNS))
    for scan, records in record_sets:
        for traj, rec in enumerate(records):
            for trace in rec.traces:
                for t, value in zip(trace.times, trace.values):
                    table.rows.append([scan, traj, trace.pulse_index, float(t), float(value)])
    return table


def run_metadata(cfg: ExperimentConfig, kind: str) -> dict:
    return {
        "kind": kind,
        "artifact_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "rng": "pcg64",
        "seed": cfg.seed,
        "config_sha256": config_fingerprint(cfg),
    }


def write_run_dir(
    outdir: Path,
    cfg: ExperimentConfig,
    summary: dict,
    pulses: Table | None = None,
    traces: Table | None = None,
) -> list[Path]:
    """Write the standard run layout; returns the created file paths."""
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    config_path = outdir / "config.json"
    config_path.write_text(
        json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"
    )
    written.append(config_path)

    fmt = cfg.output.format
    if pulses is not None:
        written.append(pulses.write(outdir / "pulses", fmt))
    if traces is not None:
        written.append(traces.write(outdir / "field_traces", fmt))

    summary_path = outdir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(summary_path)
    return written
