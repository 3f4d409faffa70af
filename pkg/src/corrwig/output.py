"""Atomic, byte-deterministic file emission (CSV and JSON)."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_csv(path, header, rows) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    atomic_write_text(path, buffer.getvalue())


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def spectrum_rows(spectrum):
    return [(i + 1, float(lam)) for i, lam in enumerate(spectrum.eigenvalues)]


def histogram_rows(dist):
    edges = dist.bin_edges
    return [
        (float(edges[i]), float(edges[i + 1]), int(dist.counts[i]), float(dist.densities[i]))
        for i in range(len(dist.densities))
    ]


def moment_rows(report):
    return [(k, emp, lim, err) for k, emp, lim, err in report.rows()]


def write_spectrum_csv(path, spectrum) -> None:
    write_csv(path, ("index", "eigenvalue"), spectrum_rows(spectrum))


def write_histogram_csv(path, dist) -> None:
    write_csv(path, ("bin_left", "bin_right", "count", "density"), histogram_rows(dist))


def write_moments_csv(path, report) -> None:
    write_csv(path, ("k", "empirical", "limit", "abs_error"), moment_rows(report))


def write_counts_csv(path, rows) -> None:
    """Rows of (k, n, partition string, matching count, reflected count,
    reflected count / n^(k/2+1))."""
    write_csv(
        path,
        ("k", "n", "partition_canonical_string", "s_n", "s_n_star", "ratio_star"),
        rows,
    )
