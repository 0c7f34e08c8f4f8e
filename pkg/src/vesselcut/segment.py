"""End-to-end pipeline: image + vessel mask -> phase labels -> boundary curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .cutcost import CostParams, build_graph, effective_params, to_grayscale
from .errors import DimensionMismatch, NoBoundary
from .flownet import solve
from .vessel import VesselMask, distance_field, seed_bands

MATERIAL = "material"
AIR = "air"


@dataclass
class PhaseLabeling:
    material: np.ndarray  # bool (height, width); False outside the vessel
    inside: np.ndarray  # bool (height, width)
    cut_value: float
    params: CostParams | None = None

    @property
    def air(self) -> np.ndarray:
        return self.inside & ~self.material

    def phase(self, row: int, col: int):
        if not self.inside[row, col]:
            return None
        return MATERIAL if self.material[row, col] else AIR

    def components(self) -> int:
        """Number of 4-connected material regions."""
        _, count = ndimage.label(self.material)
        return int(count)


@dataclass
class BoundaryCurve:
    rows: list  # per column: topmost material row, or None (EMPTY)

    def __len__(self):
        return len(self.rows)

    def defined(self) -> np.ndarray:
        return np.array([r is not None for r in self.rows], dtype=bool)

    def as_array(self) -> np.ndarray:
        """Rows as float, NaN for EMPTY columns."""
        return np.array([np.nan if r is None else r for r in self.rows], dtype=np.float64)


def segment(img, mask: VesselMask, params: CostParams | None = None) -> PhaseLabeling:
    """Label every vessel pixel MATERIAL (source side) or AIR (sink side)."""
    params = params or CostParams()
    gray = to_grayscale(img)
    if gray.shape != mask.shape:
        raise DimensionMismatch(f"image shape {gray.shape} != mask shape {mask.shape}")
    params = effective_params(params, gray, mask)
    seeds = seed_bands(mask, params.seed_fraction)
    graph = build_graph(gray, mask, distance_field(mask), seeds, params)
    cut = solve(graph.network)
    material = np.zeros(mask.shape, dtype=bool)
    rows, cols = graph.pixel_of.T
    material[rows, cols] = cut.source_side
    return PhaseLabeling(material, mask.inside.copy(), cut.flow_value, params)


def extract_boundary(labeling: PhaseLabeling, mask: VesselMask | None = None) -> BoundaryCurve:
    """Topmost material pixel per column; EMPTY unless both phases occur there."""
    inside = labeling.inside if mask is None else mask.inside
    material = labeling.material & inside
    air = inside & ~material
    has_both = material.any(axis=0) & air.any(axis=0)
    top = np.argmax(material, axis=0)
    return BoundaryCurve([int(t) if ok else None for t, ok in zip(top, has_both)])


def fill_level(labeling: PhaseLabeling, curve: BoundaryCurve | None = None) -> float:
    """Share of vessel pixels labelled MATERIAL.

    A labeling that mixes both phases but yields no defined boundary column
    (only vertical cuts) has no meaningful level and raises NoBoundary.
    """
    inside = labeling.inside
    material = labeling.material & inside
    n_material = int(material.sum())
    n_inside = int(inside.sum())
    if curve is None:
        curve = extract_boundary(labeling)
    mixed = 0 < n_material < n_inside
    if mixed and not curve.defined().any():
        raise NoBoundary("no column contains both phases")
    return n_material / n_inside
