"""Vessel geometry: interior mask, row widths, wall distance, seed bands."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import BandsOverlap, EmptyMask, OpenContour

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass
class VesselMask:
    inside: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        self.inside = np.asarray(self.inside, dtype=bool)
        if self.inside.ndim != 2:
            raise ValueError("mask must be 2-D")

    @property
    def height(self) -> int:
        return self.inside.shape[0]

    @property
    def width(self) -> int:
        return self.inside.shape[1]

    @property
    def shape(self):
        return self.inside.shape

    @property
    def row_span(self):
        """Per row: ``(leftmost, rightmost, count)`` or ``None`` for empty rows."""
        spans = []
        for row in self.inside:
            cols = np.flatnonzero(row)
            spans.append((int(cols[0]), int(cols[-1]), len(cols)) if len(cols) else None)
        return spans

    def rows(self):
        """First and last nonempty row."""
        nz = np.flatnonzero(self.inside.any(axis=1))
        if not len(nz):
            raise EmptyMask("vessel mask has no inside pixels")
        return int(nz[0]), int(nz[-1])

    @property
    def vessel_height(self) -> int:
        top, bottom = self.rows()
        return bottom - top + 1


@dataclass
class SeedBands:
    source: np.ndarray  # bool mask, material seed (bottom)
    sink: np.ndarray  # bool mask, air seed (top)

    @property
    def source_pixels(self):
        return set(zip(*map(lambda a: a.tolist(), np.nonzero(self.source))))

    @property
    def sink_pixels(self):
        return set(zip(*map(lambda a: a.tolist(), np.nonzero(self.sink))))


def mask_from_contour(contour_image) -> VesselMask:
    """Fill the interior of a closed vessel contour.

    Nonzero pixels are contour. Gaps of a pixel or two are bridged by dilating
    the contour once before filling; the filled region is eroded back and the
    contour pixels themselves, bridged gaps included, are excluded from the
    interior.
    """
    contour = np.asarray(contour_image) != 0
    if contour.ndim != 2:
        raise ValueError("contour image must be single-channel")
    if not contour.any():
        raise EmptyMask("contour image has no contour pixels")
    thick = ndimage.binary_dilation(contour, structure=_EIGHT)
    filled = ndimage.binary_fill_holes(thick)
    if not (filled & ~thick).any():
        raise OpenContour("contour is not closed: flood fill from the border reaches every pixel")
    filled = ndimage.binary_erosion(filled, structure=_EIGHT, border_value=0)
    wall = ndimage.binary_erosion(thick, structure=_EIGHT, border_value=0) | contour
    inside = filled & ~wall
    if not inside.any():
        raise EmptyMask("contour encloses no interior pixels")
    return VesselMask(inside)


def row_widths(mask: VesselMask) -> np.ndarray:
    return mask.inside.sum(axis=1).astype(np.int64)


def distance_field(mask: VesselMask) -> np.ndarray:
    """City-block distance from each inside pixel to the nearest outside pixel.

    Pixels 4-adjacent to the contour get 1; outside pixels are 0. The image
    border counts as outside.
    """
    padded = np.pad(mask.inside, 1, constant_values=False)
    dist = ndimage.distance_transform_cdt(padded, metric="taxicab")
    return dist[1:-1, 1:-1].astype(np.float64)


def seed_bands(mask: VesselMask, fraction: float = 0.10) -> SeedBands:
    """Top and bottom slabs of the vessel, ``fraction`` of its row extent each."""
    if not 0.0 < fraction < 0.5:
        raise ValueError(f"seed fraction must lie in (0, 0.5), got {fraction}")
    top, bottom = mask.rows()
    height = bottom - top + 1
    # the epsilon keeps e.g. 0.1 * 30 from rounding up to 4
    k = max(1, math.ceil(fraction * height - 1e-9))
    if height + 1 <= 2 * k:
        raise BandsOverlap(
            f"seed bands of {k} rows overlap in a vessel {height} rows tall"
        )
    rows = np.arange(mask.height)[:, None]
    sink = mask.inside & (rows < top + k)
    source = mask.inside & (rows > bottom - k)
    return SeedBands(source=source, sink=sink)
