"""Dataset container, CSV ingestion, and synthetic lattice generation.

File formats (CSV, UTF-8, header mandatory):

* features:   ``unit_id,<name1>,...,<nameD>`` — one row per unit.
* adjacency:  ``src,dst`` — one undirected edge per row, by unit id.
* labels:     ``unit_id,region`` — integer region per unit.
* coordinates (synthetic datasets): ``unit_id,x,y``.

Synthetic datasets are rows x cols 4-neighbor lattices with planted
rectangular region blocks. Region j's mean feature vector sits at
``2 * j`` along the first feature axis (zero elsewhere), so the planted
separation between neighboring region means is 2.0; Gaussian noise with
standard deviation ``noise_sigma`` is added per unit and feature. All
randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), with
the noise drawn as one ``standard_normal((n, d))`` block, so outputs are
reproducible byte for byte for a fixed seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .graph import ConstraintGraph

STAGE_RAW = "raw"
STAGE_STANDARDIZED = "standardized"
STAGE_REDUCED = "reduced"

_REGION_MEAN_SPACING = 2.0


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-unit feature values plus the preprocessing stage they are in."""

    values: np.ndarray
    stage: str = STAGE_RAW
    names: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("feature values must be a 2-D array")
        object.__setattr__(self, "values", values)
        if self.stage not in (STAGE_RAW, STAGE_STANDARDIZED, STAGE_REDUCED):
            raise ValueError(f"unknown stage {self.stage!r}")
        if not self.names:
            object.__setattr__(
                self, "names", tuple(f"f{i + 1}" for i in range(values.shape[1]))
            )
        elif len(self.names) != values.shape[1]:
            raise ValueError("feature names do not match column count")

    @property
    def n_units(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Dataset:
    """Units, their features, and the must-link constraint graph.

    Row order of ``features``, vertex order of ``graph``, and ``unit_ids``
    all agree. Instances are treated as immutable once built.
    """

    unit_ids: tuple[str, ...]
    features: FeatureMatrix
    graph: ConstraintGraph
    coordinates: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "unit_ids", tuple(str(u) for u in self.unit_ids))
        n = len(self.unit_ids)
        if n < 2:
            raise ValueError(f"a dataset needs at least 2 units, got {n}")
        if len(set(self.unit_ids)) != n:
            raise ValueError("unit ids must be unique")
        if self.features.n_units != n:
            raise ValueError("feature rows do not match unit count")
        if self.graph.n != n:
            raise ValueError("graph vertex count does not match unit count")
        if self.coordinates is not None:
            coords = np.asarray(self.coordinates, dtype=float)
            if coords.shape != (n, 2):
                raise ValueError("coordinates must have shape (n, 2)")
            object.__setattr__(self, "coordinates", coords)

    @property
    def n_units(self) -> int:
        return len(self.unit_ids)

    def with_features(self, features: FeatureMatrix) -> "Dataset":
        return replace(self, features=features)


def load_dataset(features_path, adjacency_path) -> Dataset:
    """Read a features CSV and an adjacency CSV into a Dataset.

    Rejects duplicate unit ids, non-numeric feature cells, self-loop
    edges, and edges naming unknown units; reversed duplicate edges
    collapse to one undirected edge.
    """
    unit_ids, values, names = _read_features(features_path)
    index = {u: i for i, u in enumerate(unit_ids)}
    edges = _read_adjacency(adjacency_path, index)
    graph = ConstraintGraph(len(unit_ids), edges)
    features = FeatureMatrix(values, stage=STAGE_RAW, names=names)
    return Dataset(tuple(unit_ids), features, graph)


def _read_features(path):
    rows = _read_csv(path)
    if not rows:
        raise DataFormatError(f"{path}: empty features file")
    header = rows[0]
    if len(header) < 2 or header[0] != "unit_id":
        raise DataFormatError(
            f"{path}: features header must be 'unit_id,<name1>,...', got {header!r}"
        )
    names = tuple(header[1:])
    unit_ids: list[str] = []
    seen = set()
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(f"{path}:{lineno}: expected {len(header)} fields")
        uid = row[0]
        if uid in seen:
            raise DataFormatError(f"{path}:{lineno}: duplicate unit_id {uid!r}")
        seen.add(uid)
        try:
            values.append([float(cell) for cell in row[1:]])
        except ValueError:
            raise DataFormatError(
                f"{path}:{lineno}: non-numeric feature value in row for {uid!r}"
            ) from None
        unit_ids.append(uid)
    return unit_ids, np.array(values, dtype=float), names


def _read_adjacency(path, index):
    rows = _read_csv(path)
    if not rows or rows[0] != ["src", "dst"]:
        raise DataFormatError(f"{path}: adjacency header must be 'src,dst'")
    edges = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 2 fields")
        src, dst = row
        for uid in (src, dst):
            if uid not in index:
                raise DataFormatError(
                    f"{path}:{lineno}: unknown unit_id {uid!r} in edge ({src},{dst})"
                )
        if src == dst:
            raise DataFormatError(f"{path}:{lineno}: self-loop edge on {src!r}")
        edges.append((index[src], index[dst]))
    return edges


def _read_csv(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc


def save_dataset(dataset: Dataset, out_dir) -> dict[str, Path]:
    """Write features.csv / adjacency.csv (and coordinates.csv when
    present) into ``out_dir``; returns the paths written.

    Floats are written with ``repr`` so a reload reproduces them exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    features_path = out / "features.csv"
    with open(features_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit_id", *dataset.features.names])
        for uid, row in zip(dataset.unit_ids, dataset.features.values):
            writer.writerow([uid, *[repr(float(x)) for x in row]])
    paths["features"] = features_path

    adjacency_path = out / "adjacency.csv"
    with open(adjacency_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst"])
        for u, v in dataset.graph.edges:
            writer.writerow([dataset.unit_ids[u], dataset.unit_ids[v]])
    paths["adjacency"] = adjacency_path

    if dataset.coordinates is not None:
        coords_path = out / "coordinates.csv"
        with open(coords_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["unit_id", "x", "y"])
            for uid, (x, y) in zip(dataset.unit_ids, dataset.coordinates):
                writer.writerow([uid, repr(float(x)), repr(float(y))])
        paths["coordinates"] = coords_path
    return paths


def write_labels(path, unit_ids, labels) -> None:
    """Write a ``unit_id,region`` CSV."""
    labels = np.asarray(labels)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit_id", "region"])
        for uid, lab in zip(unit_ids, labels):
            writer.writerow([uid, int(lab)])


def read_labels(path, unit_ids) -> np.ndarray:
    """Read a ``unit_id,region`` CSV aligned to ``unit_ids`` order."""
    rows = _read_csv(path)
    if not rows or rows[0] != ["unit_id", "region"]:
        raise DataFormatError(f"{path}: labels header must be 'unit_id,region'")
    index = {u: i for i, u in enumerate(unit_ids)}
    labels = np.full(len(unit_ids), -1, dtype=int)
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 2 fields")
        uid, lab = row
        if uid not in index:
            raise DataFormatError(f"{path}:{lineno}: unknown unit_id {uid!r}")
        try:
            labels[index[uid]] = int(lab)
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: non-integer region {lab!r}") from None
    missing = [u for u, i in index.items() if labels[i] < 0]
    if missing:
        raise DataFormatError(f"{path}: no region for unit(s) {missing[:5]}")
    return labels


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a planted lattice dataset.

    ``planted_regions`` is either a block-grid string ``"RxC"`` (the
    lattice is cut into R row bands times C column bands, as equal as
    possible) or an explicit ``rows*cols`` label array whose label sets
    must each induce a connected lattice subgraph.
    """

    rows: int
    cols: int
    planted_regions: object = "1x1"
    feature_dim: int = 2
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("lattice dimensions must be positive")
        if self.rows * self.cols < 2:
            raise ValueError("lattice must contain at least 2 units")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def lattice_graph(rows: int, cols: int) -> ConstraintGraph:
    """4-neighbor lattice; vertex r*cols + c sits at row r, column c."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return ConstraintGraph(rows * cols, edges)


def _block_labels(rows: int, cols: int, spec: str) -> np.ndarray:
    try:
        br_s, bc_s = str(spec).lower().split("x")
        br, bc = int(br_s), int(bc_s)
    except ValueError:
        raise ValueError(
            f"planted_regions must look like '2x2', got {spec!r}"
        ) from None
    if br < 1 or bc < 1 or br > rows or bc > cols:
        raise ValueError(f"block grid {spec!r} does not fit a {rows}x{cols} lattice")
    row_band = np.minimum(np.arange(rows) * br // rows, br - 1)
    col_band = np.minimum(np.arange(cols) * bc // cols, bc - 1)
    labels = row_band[:, None] * bc + col_band[None, :]
    return labels.reshape(-1)


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, np.ndarray]:
    """Build the planted lattice dataset; returns it with the ground-truth
    labels (region ids 0..k-1)."""
    n = spec.rows * spec.cols
    if isinstance(spec.planted_regions, str):
        truth = _block_labels(spec.rows, spec.cols, spec.planted_regions)
    else:
        truth = np.asarray(spec.planted_regions, dtype=int).reshape(-1)
        if truth.shape != (n,):
            raise ValueError(f"label array must have {n} entries")
        uniq = np.unique(truth)
        if not np.array_equal(uniq, np.arange(len(uniq))):
            raise ValueError("planted labels must be 0..k-1")

    graph = lattice_graph(spec.rows, spec.cols)
    for region in np.unique(truth):
        members = np.flatnonzero(truth == region)
        if len(graph.components(members)) != 1:
            raise ValueError(f"planted region {region} is not connected")

    k = int(truth.max()) + 1
    means = np.zeros((k, spec.feature_dim))
    means[:, 0] = _REGION_MEAN_SPACING * np.arange(k)
    rng = np.random.default_rng(spec.seed)
    values = means[truth] + spec.noise_sigma * rng.standard_normal((n, spec.feature_dim))

    coords = np.stack(
        [np.tile(np.arange(spec.cols), spec.rows),
         np.repeat(np.arange(spec.rows), spec.cols)],
        axis=1,
    ).astype(float)
    unit_ids = tuple(f"u{r}_{c}" for r in range(spec.rows) for c in range(spec.cols))
    features = FeatureMatrix(values, stage=STAGE_RAW)
    return Dataset(unit_ids, features, graph, coordinates=coords), truth
