"""Two-panel figures from streaming-benchmark trace CSVs.

The input format is the harness trace schema: an optional ``#`` metadata
line (``# algorithm=<name> k=<int> params=<json>``), then a CSV header that
must include ``t``, ``value``, and ``cumulative_additions``, then one row
per stream position.  Rendering is a pure function of the CSV contents and
the :class:`PlotSpec`; nothing is recomputed, aggregated, or smoothed.  The
top panel plots the objective value against stream position, the bottom one
the cumulative number of added elements, one line per input trace.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["PlotSpec", "TraceData", "read_trace", "build_figure", "render"]

REQUIRED_COLUMNS = ("t", "value", "cumulative_additions")

_META = re.compile(r"^#\s*algorithm=(?P<algorithm>\S+)\s+k=(?P<k>\d+)")


@dataclass(frozen=True)
class TraceData:
    """One parsed trace: where it came from, who produced it, the curves."""

    path: Path
    algorithm: str | None
    t: tuple[int, ...]
    value: tuple[float, ...]
    cumulative_additions: tuple[int, ...]


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: input traces, optional labels, output path, axis scale.

    ``labels`` defaults to each trace's algorithm name (file stem when the
    metadata line is absent); explicit labels must be unique and match the
    number of inputs.  ``logy`` switches the cumulative-additions axis to a
    log scale.
    """

    inputs: tuple[Path, ...]
    labels: tuple[str, ...] | None = None
    out: Path = field(default=Path("figure.png"))
    logy: bool = False

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("at least one input trace is required")
        if self.labels is not None:
            if len(self.labels) != len(self.inputs):
                raise ValueError(
                    f"got {len(self.labels)} labels for "
                    f"{len(self.inputs)} input traces")
            seen: set[str] = set()
            for label in self.labels:
                if label in seen:
                    raise ValueError(f"duplicate label {label!r}")
                seen.add(label)


def read_trace(path: Path | str) -> TraceData:
    """Parse one harness trace CSV into plottable columns.

    Raises ValueError naming the offending file for a missing required
    column or a trace with no data rows.
    """
    path = Path(path)
    algorithm: str | None = None
    header: list[str] | None = None
    t: list[int] = []
    value: list[float] = []
    cumulative: list[int] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0].lstrip().startswith("#"):
                match = _META.match(",".join(row))
                if match:
                    algorithm = match.group("algorithm")
                continue
            if header is None:
                header = [name.strip() for name in row]
                for name in REQUIRED_COLUMNS:
                    if name not in header:
                        raise ValueError(
                            f"{path}: missing column {name!r} "
                            f"(found {header})")
                continue
            record = dict(zip(header, row))
            t.append(int(record["t"]))
            value.append(float(record["value"]))
            cumulative.append(int(record["cumulative_additions"]))
    if header is None:
        raise ValueError(f"{path}: no header row")
    if not t:
        raise ValueError(f"{path}: no data rows")
    return TraceData(path=path, algorithm=algorithm, t=tuple(t),
                     value=tuple(value),
                     cumulative_additions=tuple(cumulative))


def _default_labels(traces: list[TraceData]) -> list[str]:
    names = [tr.algorithm or tr.path.stem for tr in traces]
    labels = []
    for i, name in enumerate(names):
        if names.count(name) > 1:
            labels.append(f"{name} ({traces[i].path.stem})")
        else:
            labels.append(name)
    return labels


def build_figure(spec: PlotSpec):
    """(figure, labels) for the spec; the caller owns closing the figure."""
    traces = [read_trace(p) for p in spec.inputs]
    labels = list(spec.labels) if spec.labels is not None \
        else _default_labels(traces)

    fig, (ax_value, ax_adds) = plt.subplots(
        2, 1, sharex=True, figsize=(7.0, 6.0))
    for trace, label in zip(traces, labels):
        ax_value.plot(trace.t, trace.value, label=label, linewidth=1.6)
        ax_adds.plot(trace.t, trace.cumulative_additions, label=label,
                     linewidth=1.6)
    ax_value.set_ylabel("objective value")
    ax_adds.set_ylabel("cumulative additions")
    ax_adds.set_xlabel("stream position")
    if spec.logy:
        ax_adds.set_yscale("log")
    for ax in (ax_value, ax_adds):
        ax.grid(alpha=0.3)
    ax_value.legend(frameon=False)
    fig.tight_layout()
    return fig, labels


def render(spec: PlotSpec) -> Path:
    """Draw the two-panel figure and write it to ``spec.out``."""
    fig, _ = build_figure(spec)
    try:
        spec.out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.out, dpi=150)
    finally:
        plt.close(fig)
    return spec.out
