"""On-disk formats: dataset CSV, scenario JSON, calibration report JSON.

Floats are written with shortest round-trip formatting (repr), so a
write/read cycle reproduces every value bit-exactly and identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import warnings

import numpy as np

from .linalg import pack_upper, unpack_upper
from .types import CalibrationParams, ErrorMetrics, MLSolveReport, SolveReport

FORMAT_VERSION = 1
TOOL_VERSION = "0.1.0"

SAMPLE_COLUMNS = ("yx", "yy", "yz")


def write_samples_csv(path, samples) -> None:
    samples = np.asarray(samples, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SAMPLE_COLUMNS)
        for row in samples:
            writer.writerow([repr(float(v)) for v in row])


def read_samples_csv(path) -> np.ndarray:
    """Read a dataset CSV; extra columns are ignored with a warning."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty dataset file")
        header = [h.strip() for h in header]
        try:
            indices = [header.index(c) for c in SAMPLE_COLUMNS]
        except ValueError:
            raise ValueError(
                f"{path}: header must contain columns {SAMPLE_COLUMNS}, got {header}"
            ) from None
        extras = [h for h in header if h not in SAMPLE_COLUMNS]
        if extras:
            warnings.warn(f"{path}: ignoring extra columns {extras}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(row[i]) for i in indices])
            except (ValueError, IndexError):
                raise ValueError(f"{path}: bad row at line {line_no}: {row}") from None
    if not rows:
        raise ValueError(f"{path}: no samples")
    return np.asarray(rows)


def write_calibrated_csv(path, calibrated) -> None:
    """Calibrated samples plus a magnitude column."""
    calibrated = np.asarray(calibrated, dtype=float)
    magnitudes = np.linalg.norm(calibrated, axis=1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("mx", "my", "mz", "magnitude"))
        for row, mag in zip(calibrated, magnitudes):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(mag))])


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _base_report(method, params: CalibrationParams, min_eigenvalue, input_digest) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "tool_version": TOOL_VERSION,
        "method": method,
        "shape_upper": [float(v) for v in pack_upper(params.shape)],
        "offset": [float(v) for v in params.offset],
        "min_eigenvalue": None if min_eigenvalue is None else float(min_eigenvalue),
        "input_digest": input_digest,
    }


def nm_report_dict(
    report: SolveReport, min_eigenvalue=None, input_digest=None
) -> dict:
    out = _base_report("nm", report.final_params, min_eigenvalue, input_digest)
    out["objective_history"] = list(report.objective_history)
    out["iterations"] = report.iterations
    out["converged"] = report.converged
    return out


def ml_report_dict(
    report: MLSolveReport, min_eigenvalue=None, input_digest=None
) -> dict:
    from .metrics import params_from_ml

    out = _base_report(
        "ml", params_from_ml(report.final_state), min_eigenvalue, input_digest
    )
    out["t_upper"] = [float(v) for v in pack_upper(report.final_state.t_matrix)]
    out["objective_history"] = list(report.objective_history)
    out["constraint_violation_history"] = list(report.constraint_violation_history)
    out["iterations"] = report.iterations
    out["converged"] = report.converged
    out["warnings"] = list(report.warnings)
    return out


def truth_report_dict(params: CalibrationParams, input_digest=None) -> dict:
    out = _base_report("truth", params, None, input_digest)
    out["objective_history"] = []
    out["iterations"] = 0
    out["converged"] = True
    return out


def params_from_report(report: dict) -> CalibrationParams:
    return CalibrationParams(
        shape=unpack_upper(report["shape_upper"]),
        offset=np.asarray(report["offset"], dtype=float),
    )


def select_report(document: dict, method: str | None = None) -> dict:
    """Pick a single-method report out of a flat or combined document."""
    if "shape_upper" in document:
        if method is not None and document.get("method") != method:
            raise ValueError(
                f"report holds method {document.get('method')!r}, not {method!r}"
            )
        return document
    available = [m for m in ("nm", "ml") if m in document]
    if not available:
        raise ValueError("document contains no calibration report")
    if method is None:
        if len(available) > 1:
            raise ValueError(
                f"document holds methods {available}; pass a method to choose"
            )
        method = available[0]
    if method not in document:
        raise ValueError(f"document has no {method!r} report")
    return document[method]


def metrics_dict(metrics: ErrorMetrics) -> dict:
    return {
        "scale_pct": metrics.scale_pct,
        "ortho_deg": metrics.ortho_deg,
        "hard_iron_gauss": metrics.hard_iron_gauss,
    }


def write_monte_carlo_csv(path, result) -> None:
    """One row per run per method."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            (
                "run",
                "method",
                "failed",
                "converged",
                "iterations",
                "final_objective",
                "scale_pct",
                "ortho_deg",
                "hard_iron_gauss",
            )
        )
        for run in result.runs:
            for method in ("nm", "ml"):
                o = getattr(run, method)
                m = o.metrics.as_tuple() if o.metrics is not None else ("", "", "")
                writer.writerow(
                    [
                        run.index,
                        method,
                        int(o.failed),
                        int(o.converged),
                        o.iterations,
                        repr(float(o.final_objective)),
                    ]
                    + [repr(float(v)) if v != "" else "" for v in m]
                )


def monte_carlo_summary(result) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "tool_version": TOOL_VERSION,
        "seed": result.seed,
        "runs": len(result.runs),
        "config": result.config.to_dict(),
        "aggregates": {m: result.aggregate(m) for m in ("nm", "ml")},
        "failures": {m: result.failure_count(m) for m in ("nm", "ml")},
    }


def write_sensitivity_csv(path, result) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("alpha", "method", "divergences", "runs"))
        for alpha, nm_c, ml_c in zip(
            result.alphas, result.nm_divergences, result.ml_divergences
        ):
            writer.writerow([repr(float(alpha)), "nm", nm_c, result.runs])
            writer.writerow([repr(float(alpha)), "ml", ml_c, result.runs])


def sensitivity_summary(result) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "tool_version": TOOL_VERSION,
        "seed": result.seed,
        "runs": result.runs,
        "alphas": list(result.alphas),
        "nm_divergences": list(result.nm_divergences),
        "ml_divergences": list(result.ml_divergences),
        "nm_threshold": result.nm_threshold,
        "ml_threshold": result.ml_threshold,
    }


def write_timing_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ("n", "method", "median_seconds", "iterations", "seconds_per_iteration")
        )
        for row in rows:
            writer.writerow(
                [
                    row.n,
                    row.method,
                    repr(float(row.median_seconds)),
                    row.iterations,
                    repr(float(row.seconds_per_iteration)),
                ]
            )


def timing_summary(rows) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "tool_version": TOOL_VERSION,
        "rows": [
            {
                "n": row.n,
                "method": row.method,
                "median_seconds": row.median_seconds,
                "iterations": row.iterations,
                "seconds_per_iteration": row.seconds_per_iteration,
            }
            for row in rows
        ],
    }
