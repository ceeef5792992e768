"""Dataset ingestion.

Selig-style ``.dat`` airfoil contours, Gmsh ASCII v2 ``$Nodes`` blocks,
chord normalisation, deterministic up/down-sampling of target clouds to a
fixed count, and assembly of (loop, target) training pairs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDataError,
    EmptyDatasetError,
    InvalidGeometryError,
    InvalidInputError,
    ParseError,
)
from .geometry import AirfoilLoop, PointSet, points_in_polygon, resample_loop

log = logging.getLogger(__name__)


def _coordinate_pair(tokens: list[str]) -> tuple[float, float] | None:
    if len(tokens) != 2:
        return None
    try:
        return float(tokens[0]), float(tokens[1])
    except ValueError:
        return None


def parse_airfoil_dat(text: str | bytes) -> PointSet:
    """Parse a Selig-style airfoil contour.

    Grammar: an optional non-numeric name line, then one ``x y`` pair per
    line; blank lines are ignored anywhere. Any other content line is a
    parse error naming the 1-based line number.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    pts: list[tuple[float, float]] = []
    saw_content = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        pair = _coordinate_pair(tokens)
        if pair is None:
            if not saw_content:
                saw_content = True  # name line
                continue
            raise ParseError(f"line {lineno}: expected two numeric coordinates, got {line.strip()!r}")
        if not (math.isfinite(pair[0]) and math.isfinite(pair[1])):
            raise ParseError(f"line {lineno}: non-finite coordinate {line.strip()!r}")
        saw_content = True
        pts.append(pair)
    if not pts:
        raise ParseError("no coordinate data found")
    if len(pts) < 3:
        raise InvalidGeometryError(f"airfoil contour needs at least 3 points, got {len(pts)}")
    return PointSet(np.asarray(pts, dtype=np.float64))


@dataclass(frozen=True)
class ChordTransform:
    """Shift min-x to 0 and scale both axes uniformly so the chord is 1."""

    x_min: float
    chord: float

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.chord)):
            raise InvalidInputError("chord transform parameters must be finite")
        if self.chord <= 0.0:
            raise DegenerateDataError("zero chord length; cannot normalise")

    def apply(self, ps: PointSet) -> PointSet:
        xy = ps.xy.copy()
        xy[:, 0] -= self.x_min
        xy /= self.chord
        return PointSet(xy, ps.frame)


def fit_chord(ps: PointSet) -> ChordTransform:
    x = ps.xy[:, 0]
    return ChordTransform(float(x.min()), float(x.max() - x.min()))


def normalise_chord(ps: PointSet) -> PointSet:
    """Chord-normalise a contour: min-x point to x=0, chord scaled to 1.

    Both axes share the uniform 1/chord scale, so the aspect ratio is
    preserved; already-normalised input passes through unchanged.
    """
    return fit_chord(ps).apply(ps)


def parse_msh_nodes(text: str | bytes) -> PointSet:
    """Extract node coordinates from a Gmsh ASCII v2 mesh.

    Reads the ``$Nodes`` block (``id x y z`` per line, z discarded) and
    returns the nodes sorted by id. The declared node count must match the
    number of node lines.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    start = None
    for i, line in enumerate(lines):
        if line.strip() == "$Nodes":
            start = i
            break
    if start is None:
        raise ParseError("missing $Nodes block")
    if start + 1 >= len(lines):
        raise ParseError("truncated $Nodes block: node count line missing")
    count_line = lines[start + 1].strip()
    try:
        declared = int(count_line)
    except ValueError:
        raise ParseError(f"line {start + 2}: invalid node count {count_line!r}") from None

    ids: list[int] = []
    coords: list[tuple[float, float]] = []
    terminated = False
    for offset, line in enumerate(lines[start + 2:], start=start + 3):
        stripped = line.strip()
        if stripped == "$EndNodes":
            terminated = True
            break
        if not stripped:
            continue
        tokens = stripped.split()
        if len(tokens) != 4:
            raise ParseError(f"line {offset}: expected 'id x y z', got {stripped!r}")
        try:
            node_id = int(tokens[0])
            x, y = float(tokens[1]), float(tokens[2])
            float(tokens[3])  # z parsed for validity, then discarded
        except ValueError:
            raise ParseError(f"line {offset}: malformed node line {stripped!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(f"line {offset}: non-finite coordinate {stripped!r}")
        ids.append(node_id)
        coords.append((x, y))
    if not terminated:
        raise ParseError("unterminated $Nodes block: $EndNodes missing")
    if len(coords) != declared:
        raise ParseError(f"node count mismatch: header declares {declared}, found {len(coords)}")
    if not coords:
        raise ParseError("mesh contains no nodes")
    order = np.argsort(np.asarray(ids), kind="stable")
    return PointSet(np.asarray(coords, dtype=np.float64)[order])


def upsample_target(ps: PointSet, m: int, seed: int) -> PointSet:
    """Deterministically resize a point cloud to exactly ``m`` points.

    n >= m: uniform subsample without replacement, original order kept.
    n <  m: all originals, followed by a uniform with-replacement draw of
    the deficit. Duplicates at identical coordinates are acceptable.
    """
    if m < 1:
        raise InvalidInputError(f"target count must be positive, got {m}")
    n = len(ps)
    rng = np.random.default_rng(seed)
    if n >= m:
        idx = np.sort(rng.choice(n, size=m, replace=False))
    else:
        idx = np.concatenate([np.arange(n), rng.choice(n, size=m - n, replace=True)])
    return PointSet(ps.xy[idx], ps.frame)


@dataclass(frozen=True)
class MeshSample:
    """One training pair: a boundary loop and its target mesh cloud."""

    name: str
    loop: AirfoilLoop
    target: PointSet

    def __post_init__(self):
        if self.loop.frame is not self.target.frame:
            raise InvalidInputError("loop and target must share a frame")
        if bool(points_in_polygon(self.target.xy, self.loop).any()):
            raise InvalidGeometryError(f"{self.name}: target nodes intrude into the loop interior")


@dataclass(frozen=True)
class Dataset:
    samples: tuple[MeshSample, ...]
    loop_size: int
    target_count: int

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise EmptyDatasetError("dataset has no samples")
        for s in self.samples:
            if len(s.loop) != self.loop_size:
                raise InvalidInputError(f"{s.name}: loop has {len(s.loop)} vertices, expected {self.loop_size}")
            if len(s.target) != self.target_count:
                raise InvalidInputError(f"{s.name}: target has {len(s.target)} nodes, expected {self.target_count}")


def assemble_sample(name: str, contour: PointSet, mesh_nodes: PointSet, *,
                    loop_size: int = 35, target_count: int = 1500, seed: int = 0) -> MeshSample:
    """Build one training pair from parsed raw inputs.

    Both clouds are chord-normalised by the transform fitted on the contour,
    the contour is resampled to ``loop_size`` arc-length-uniform vertices, and
    the mesh is up/down-sampled to ``target_count``. Mesh nodes strictly
    inside the loop are dropped with a warning before sampling, so they can
    never enter the target cloud.
    """
    ct = fit_chord(contour)
    loop = resample_loop(ct.apply(contour), loop_size)
    mesh = ct.apply(mesh_nodes)
    inside = points_in_polygon(mesh.xy, loop)
    if inside.any():
        log.warning("%s: dropping %d mesh nodes inside the boundary loop", name, int(inside.sum()))
        survivors = mesh.xy[~inside]
        if survivors.shape[0] == 0:
            raise DegenerateDataError(f"{name}: every mesh node lies inside the loop")
        mesh = PointSet(survivors, mesh.frame)
    target = upsample_target(mesh, target_count, seed)
    return MeshSample(name, loop, target)


def _read_parsed(path: Path, parser):
    try:
        return parser(path.read_text())
    except (ParseError, InvalidGeometryError, DegenerateDataError, InvalidInputError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def build_dataset(entries, *, loop_size: int = 35, target_count: int = 1500, seed: int = 0) -> Dataset:
    """Assemble a Dataset from ``(name, dat_path, msh_path)`` entries.

    Sample ``i`` uses upsampling seed ``seed + i``. Parse failures are
    re-raised with the offending file path prepended.
    """
    entries = list(entries)
    if not entries:
        raise EmptyDatasetError("no (dat, msh) pairs supplied")
    samples = []
    for i, (name, dat_path, msh_path) in enumerate(entries):
        contour = _read_parsed(Path(dat_path), parse_airfoil_dat)
        nodes = _read_parsed(Path(msh_path), parse_msh_nodes)
        samples.append(assemble_sample(name, contour, nodes, loop_size=loop_size,
                                       target_count=target_count, seed=seed + i))
    return Dataset(tuple(samples), loop_size, target_count)


def load_manifest(path) -> list[tuple[str, Path, Path]]:
    """Read a dataset manifest: a JSON list of {name, dat, msh} records.

    File paths are resolved relative to the manifest's directory.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError(f"{path}: manifest must be a JSON list of {{name, dat, msh}} records")
    entries = []
    base = path.parent
    for i, rec in enumerate(data):
        if not isinstance(rec, dict) or not {"name", "dat", "msh"} <= rec.keys():
            raise ParseError(f"{path}: record {i} must be an object with name/dat/msh keys")
        entries.append((str(rec["name"]), base / str(rec["dat"]), base / str(rec["msh"])))
    return entries
