"""Finite atomic measures with compact support.

A measure is a finite list of weighted atoms in R^delta.  Everything the
package computes (filtered norms, partition functions, dimension estimates)
is an exact finite sum or a quadrature over these atoms, so generators for
the standard test measures live here as well: point masses, a Cantor-type
iterated-function-system measure, and uniform grids.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

# Hard cap on atom counts so that O(atoms^2) correlation sums stay at desk
# scale.  Exceeding it is an error, never a silent truncation.
ATOM_CAP = 1 << 22


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite atomic Borel measure: atoms ``points[i]`` with mass ``weights[i]``.

    Immutable after construction; all operations on it are pure functions.
    """

    dim: int
    points: np.ndarray   # shape (n, dim), float64
    weights: np.ndarray  # shape (n,), float64, all > 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, self.dim)
        points = np.ascontiguousarray(points)
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=float).ravel())
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ValueError(f"points must have shape (n, {self.dim}), got {points.shape}")
        if points.shape[0] == 0:
            raise ValueError("a measure needs at least one atom")
        if points.shape[0] != weights.shape[0]:
            raise ValueError("points and weights have different lengths")
        if points.shape[0] > ATOM_CAP:
            raise ValueError(f"atom count {points.shape[0]} exceeds cap {ATOM_CAP}")
        if not np.all(np.isfinite(points)):
            raise ValueError("atom coordinates must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise ValueError("weights must be finite and > 0")
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class BoxCounts:
    """Masses of a measure on the half-open grid cells ``eps*k + eps*[0,1)^dim``.

    ``cells`` maps the integer cell index tuple k to the cell mass; cells of
    zero mass are absent.
    """

    eps: float
    cells: dict

    def masses(self) -> np.ndarray:
        return np.fromiter(self.cells.values(), dtype=float, count=len(self.cells))


def make_point_masses(points, weights) -> DiscreteMeasure:
    """Measure with exactly the given atoms, unnormalized.

    A flat list of scalars is read as a list of 1-d points; multi-d points
    must be given as coordinate tuples.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    w = np.asarray(weights, dtype=float).ravel()
    return DiscreteMeasure(dim=pts.shape[1], points=pts, weights=w)


def point_mass(dim: int = 1, weight: float = 1.0) -> DiscreteMeasure:
    """Single atom at the origin."""
    return DiscreteMeasure(dim=dim, points=np.zeros((1, dim)), weights=np.array([weight]))


def two_point(sep: float = 1.0, dim: int = 1) -> DiscreteMeasure:
    """Two atoms of mass 1/2 at the origin and at distance ``sep`` along axis 0."""
    pts = np.zeros((2, dim))
    pts[1, 0] = sep
    return DiscreteMeasure(dim=dim, points=pts, weights=np.array([0.5, 0.5]))


def make_cantor(depth: int, ratio: float = 1.0 / 3.0, p: float = 0.5) -> DiscreteMeasure:
    """Self-similar two-branch measure on [0, 1] sampled at IFS left endpoints.

    The two maps are x -> ratio*x and x -> (1-ratio) + ratio*x; after
    ``depth`` iterations there are 2**depth atoms, one per depth-level
    interval, each carrying the product of its branch probabilities
    (p for the left branch, 1-p for the right).
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if not (0.0 < ratio <= 0.5):
        raise ValueError("ratio must lie in (0, 1/2]")
    if not (0.0 < p < 1.0):
        raise ValueError("p must lie in (0, 1)")
    if 2 ** depth > ATOM_CAP:
        raise ValueError(f"2**{depth} atoms exceeds cap {ATOM_CAP}")
    pts = np.array([0.0])
    w = np.array([1.0])
    for _ in range(depth):
        pts = np.concatenate([ratio * pts, (1.0 - ratio) + ratio * pts])
        w = np.concatenate([p * w, (1.0 - p) * w])
    return DiscreteMeasure(dim=1, points=pts.reshape(-1, 1), weights=w)


def make_uniform_grid(dim: int, per_axis: int) -> DiscreteMeasure:
    """per_axis**dim atoms at cell centers of [0,1]^dim, total mass 1."""
    if per_axis < 1:
        raise ValueError("per_axis must be >= 1")
    n = per_axis ** dim
    if n > ATOM_CAP:
        raise ValueError(f"{n} atoms exceeds cap {ATOM_CAP}")
    axis = (np.arange(per_axis) + 0.5) / per_axis
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return DiscreteMeasure(dim=dim, points=pts, weights=np.full(n, 1.0 / n))


def make_random(dim: int, n_atoms: int, seed: int) -> DiscreteMeasure:
    """Seeded random measure: atoms uniform in [0,1]^dim, weights in [0.2, 1]."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(n_atoms, dim))
    w = rng.uniform(0.2, 1.0, size=n_atoms)
    return DiscreteMeasure(dim=dim, points=pts, weights=w)


def normalized(mu: DiscreteMeasure) -> DiscreteMeasure:
    """The same atoms rescaled to total mass 1."""
    return DiscreteMeasure(dim=mu.dim, points=mu.points, weights=mu.weights / total_mass(mu))


def total_mass(mu: DiscreteMeasure) -> float:
    return float(np.sum(mu.weights))


def support_radius(mu: DiscreteMeasure) -> float:
    """Smallest R with every atom inside the closed ball of radius R at the origin."""
    return float(np.max(np.sqrt(np.sum(mu.points ** 2, axis=1))))


def nearest_neighbor_distance(mu: DiscreteMeasure) -> float:
    """Minimum pairwise atom distance (0.0 for a single atom)."""
    if mu.n_atoms < 2:
        return 0.0
    if mu.dim == 1:
        x = np.sort(mu.points[:, 0])
        return float(np.min(np.diff(x)))
    best = np.inf
    pts = mu.points
    chunk = max(1, int(2e6) // mu.n_atoms)
    for i0 in range(0, mu.n_atoms, chunk):
        block = pts[i0:i0 + chunk]
        d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        ii = np.arange(i0, i0 + block.shape[0])
        d2[np.arange(block.shape[0]), ii] = np.inf
        best = min(best, float(np.sqrt(d2.min())))
    return best


def _cell_indices(points: np.ndarray, eps: float) -> np.ndarray:
    # floor(x/eps) with a one-sided snap: a ratio within ~1e-12 relative below
    # an integer counts as the integer.  Real-arithmetic cell boundaries
    # (e.g. Cantor endpoints at ternary scales) then classify stably, and an
    # atom exactly on a boundary still lands in the higher-index cell.
    r = points / eps
    return np.floor(r + 1e-9 + 1e-12 * np.abs(r)).astype(np.int64)


def box_counts(mu: DiscreteMeasure, eps: float) -> BoxCounts:
    """Cell masses of ``mu`` on the grid of half-open cells of side ``eps``."""
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    idx = _cell_indices(mu.points, eps)
    uniq, inverse = np.unique(idx, axis=0, return_inverse=True)
    masses = np.bincount(inverse.ravel(), weights=mu.weights, minlength=uniq.shape[0])
    cells = {tuple(int(c) for c in uniq[i]): float(masses[i]) for i in range(uniq.shape[0])}
    return BoxCounts(eps=float(eps), cells=cells)


def save_json(mu: DiscreteMeasure, path) -> None:
    """Write the measure as ``{"dim": d, "atoms": [{"x": [...], "w": w}, ...]}``."""
    doc = {
        "dim": mu.dim,
        "atoms": [
            {"x": [float(c) for c in mu.points[i]], "w": float(mu.weights[i])}
            for i in range(mu.n_atoms)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_json(path) -> DiscreteMeasure:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "dim" not in doc or "atoms" not in doc:
        raise ValueError(f"{path}: not a measure file (need 'dim' and 'atoms')")
    atoms = doc["atoms"]
    if not isinstance(atoms, list) or len(atoms) == 0:
        raise ValueError(f"{path}: measure has no atoms")
    pts = np.array([a["x"] for a in atoms], dtype=float)
    w = np.array([a["w"] for a in atoms], dtype=float)
    return DiscreteMeasure(dim=int(doc["dim"]), points=pts, weights=w)


def _read_pgm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """First ``count`` whitespace/comment-separated integer tokens of a PGM header."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise ValueError("truncated PGM header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        else:
            m = re.match(rb"[0-9]+", data[pos:])
            if not m:
                raise ValueError(f"malformed PGM header near byte {pos}")
            tokens.append(int(m.group(0)))
            pos += m.end()
    return tokens, pos


def from_pgm_image(path) -> DiscreteMeasure:
    """One atom per nonzero pixel, at pixel centers rescaled by max(width, height).

    Supports ASCII ``P2`` and binary ``P5`` with maxval up to 65535.  Weights
    are intensities normalized to total mass 1.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
    (width, height, maxval), pos = _read_pgm_tokens(data[2:], 3)
    pos += 2
    if width < 1 or height < 1:
        raise ValueError(f"{path}: bad dimensions {width}x{height}")
    if not (0 < maxval <= 65535):
        raise ValueError(f"{path}: bad maxval {maxval}")
    n = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos:pos + n * dtype.itemsize]
        if len(raw) < n * dtype.itemsize:
            raise ValueError(f"{path}: truncated pixel data")
        img = np.frombuffer(raw, dtype=dtype).astype(float)
    else:
        vals = data[pos:].split()
        if len(vals) < n:
            raise ValueError(f"{path}: truncated pixel data")
        img = np.array([int(v) for v in vals[:n]], dtype=float)
    if np.any(img > maxval):
        raise ValueError(f"{path}: pixel value exceeds maxval")
    img = img.reshape(height, width)
    rows, cols = np.nonzero(img)
    if rows.size == 0:
        raise ValueError(f"{path}: image is identically zero")
    scale = float(max(width, height))
    pts = np.stack([(cols + 0.5) / scale, (rows + 0.5) / scale], axis=1)
    w = img[rows, cols]
    return DiscreteMeasure(dim=2, points=pts, weights=w / np.sum(w))
