"""Loaders that turn external dataset files into streams and oracle inputs.

All loaders are pure functions of the file bytes: re-loading a file yields an
identical structure, and stream order is always file order.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass


@dataclass(frozen=True)
class EdgeListGraph:
    """Undirected graph with dense vertex ids and duplicates merged."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class GeoPointSet:
    """(latitude, longitude) pairs in degrees, kept in file order."""

    points: tuple[tuple[float, float], ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-row real feature vectors of uniform dimension."""

    rows: tuple[tuple[float, ...], ...]
    dimension: int
    clamped_entries: int = 0

    def __len__(self) -> int:
        return len(self.rows)


def load_edge_list(path) -> EdgeListGraph:
    """Parse whitespace-separated "u v" pairs; '#' lines are comments.

    Duplicate edges (in either orientation) merge; vertex_count is one past
    the largest id seen. Malformed lines raise ValueError with their line
    number.
    """
    seen: set[tuple[int, int]] = set()
    max_id = -1
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', "
                                 f"got {text!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer vertex id "
                                 f"in {text!r}") from None
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{lineno}: negative vertex id "
                                 f"in {text!r}")
            max_id = max(max_id, u, v)
            if u != v:
                seen.add((min(u, v), max(u, v)))
            else:
                seen.add((u, u))
    if max_id < 0:
        raise ValueError(f"{path}: no edges found")
    return EdgeListGraph(vertex_count=max_id + 1,
                         edges=tuple(sorted(seen)))


def load_points_csv(path, lat_col: str = "lat", lon_col: str = "lon",
                    limit: int | None = None) -> GeoPointSet:
    """Read decimal-degree coordinates from a headered CSV, in file order.

    Stops after `limit` points when given. Non-numeric or out-of-range
    coordinates raise ValueError with the data row number.
    """
    points: list[tuple[float, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file, expected a header row")
        for col in (lat_col, lon_col):
            if col not in reader.fieldnames:
                raise ValueError(f"{path}: no column {col!r}; "
                                 f"columns: {reader.fieldnames}")
        for rowno, row in enumerate(reader, start=1):
            try:
                lat = float(row[lat_col])
                lon = float(row[lon_col])
            except (TypeError, ValueError):
                raise ValueError(
                    f"{path}: row {rowno}: non-numeric coordinate "
                    f"({row[lat_col]!r}, {row[lon_col]!r})") from None
            if not -90.0 <= lat <= 90.0:
                raise ValueError(f"{path}: row {rowno}: latitude {lat} "
                                 f"outside [-90, 90]")
            if not -180.0 <= lon <= 180.0:
                raise ValueError(f"{path}: row {rowno}: longitude {lon} "
                                 f"outside [-180, 180]")
            points.append((lat, lon))
            if limit is not None and len(points) >= limit:
                break
    return GeoPointSet(points=tuple(points))


def load_feature_matrix(path) -> FeatureMatrix:
    """Read one real vector per CSV row; dimension comes from the first row.

    Negative entries load as 0.0 and are tallied in clamped_entries. Ragged
    rows and empty files raise ValueError.
    """
    rows: list[tuple[float, ...]] = []
    dimension: int | None = None
    clamped = 0
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        for rowno, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise ValueError(f"{path}: row {rowno}: non-numeric "
                                 f"entry") from None
            if dimension is None:
                dimension = len(values)
            elif len(values) != dimension:
                raise ValueError(f"{path}: row {rowno}: {len(values)} "
                                 f"entries, expected {dimension}")
            cleaned = []
            for value in values:
                if value < 0.0:
                    clamped += 1
                    cleaned.append(0.0)
                else:
                    cleaned.append(value)
            rows.append(tuple(cleaned))
    if dimension is None:
        raise ValueError(f"{path}: empty file, no dimension to infer")
    return FeatureMatrix(rows=tuple(rows), dimension=dimension,
                         clamped_entries=clamped)


def subsample(points: GeoPointSet, n: int, seed: int) -> GeoPointSet:
    """Uniform sample without replacement, preserving relative file order."""
    if n > len(points):
        raise ValueError(f"cannot sample {n} of {len(points)} points")
    picked = random.Random(seed).sample(range(len(points)), n)
    return GeoPointSet(points=tuple(points.points[i] for i in sorted(picked)))
