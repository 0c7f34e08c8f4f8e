"""Edge costs and construction of the pixel flow network."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionMismatch, UnsupportedFormat
from .flownet import INF, FlowNetwork
from .vessel import SeedBands, VesselMask, row_widths

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class CostMode(str, enum.Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exp"


@dataclass(frozen=True)
class CostParams:
    """Every tunable of the cut.

    ``penalty_distance=None`` means "derive from the vessel": the larger of
    3 px and 2% of the widest row. ``auto_sigma`` replaces ``sigma`` with the
    intensity standard deviation inside the vessel.
    """

    mode: CostMode = CostMode.EXPONENTIAL
    sigma: float = 20.0
    horizontal_factor: float = 1.3
    penalty_factor: float = 3.0
    penalty_distance: float | None = None
    seed_fraction: float = 0.10
    normalize_width: bool = True
    auto_sigma: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", CostMode(self.mode))
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.horizontal_factor < 1:
            raise ValueError("horizontal_factor must be >= 1")
        if self.penalty_factor < 1:
            raise ValueError("penalty_factor must be >= 1")
        if self.penalty_distance is not None and self.penalty_distance < 0:
            raise ValueError("penalty_distance must be >= 0")
        if not 0 < self.seed_fraction < 0.5:
            raise ValueError("seed_fraction must lie in (0, 0.5)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        return d


def to_grayscale(image) -> np.ndarray:
    """Luma of an RGB(A) image as float64; gray input is passed through."""
    arr = np.asarray(image)
    if arr.dtype == bool or not np.issubdtype(arr.dtype, np.number):
        raise UnsupportedFormat(f"unsupported pixel type {arr.dtype}")
    if arr.ndim == 2:
        return arr.astype(np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        return arr[..., 0].astype(np.float64)
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        rgb = arr[..., :3].astype(np.float64)
        r, g, b = LUMA_WEIGHTS
        return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]
    raise UnsupportedFormat(f"unsupported image shape {arr.shape}")


def pair_cost(ia, ib, params: CostParams):
    """Similarity cost of an edge between intensities ``ia`` and ``ib``.

    Both modes lie in [0, 1] and fall monotonically with the intensity gap.
    Works elementwise on arrays.
    """
    diff = np.abs(np.asarray(ia, dtype=np.float64) - np.asarray(ib, dtype=np.float64))
    if params.mode is CostMode.EXPONENTIAL:
        return np.exp(-((diff / (2.0 * params.sigma)) ** 2))
    return 1.0 - diff / 255.0


def default_penalty_distance(mask: VesselMask) -> float:
    return max(3.0, 0.02 * float(row_widths(mask).max()))


def effective_params(params: CostParams, img, mask: VesselMask) -> CostParams:
    """Resolve the data-dependent defaults (penalty zone, auto sigma)."""
    changes = {}
    if params.penalty_distance is None:
        changes["penalty_distance"] = default_penalty_distance(mask)
    if params.auto_sigma:
        std = float(np.std(np.asarray(img)[mask.inside]))
        changes["sigma"] = std if std > 0 else params.sigma
        changes["auto_sigma"] = False
    if not changes:
        return params
    return CostParams(**{**asdict(params), **changes})


@dataclass
class PixelGraph:
    network: FlowNetwork
    node_of: np.ndarray  # int64 (height, width), -1 outside the vessel
    pixel_of: np.ndarray  # int64 (n, 2) of (row, col)
    params: CostParams


def _edge_pairs(inside):
    """Node-index pairs for horizontal and vertical 4-neighbours."""
    h_ok = inside[:, :-1] & inside[:, 1:]
    v_ok = inside[:-1, :] & inside[1:, :]
    hr, hc = np.nonzero(h_ok)
    vr, vc = np.nonzero(v_ok)
    return (hr, hc, hr, hc + 1), (vr, vc, vr + 1, vc)


def build_graph(img, mask: VesselMask, dist, seeds: SeedBands, params: CostParams) -> PixelGraph:
    """Turn the vessel region of ``img`` into a seeded flow network.

    One node per inside pixel, in raster order. Each 4-adjacent pair gets a
    symmetric arc whose capacity is the pair cost divided by the vessel width
    (mean of the two rows for vertical edges), times ``horizontal_factor`` for
    edges within a row and ``penalty_factor`` when either end is within
    ``penalty_distance`` of the wall. Source seeds are pinned to the source and
    sink seeds to the sink with infinite terminal arcs.
    """
    img = np.asarray(img, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    for name, arr in (("image", img), ("distance field", dist),
                      ("source seeds", seeds.source), ("sink seeds", seeds.sink)):
        if arr.shape != mask.shape:
            raise DimensionMismatch(f"{name} shape {arr.shape} != mask shape {mask.shape}")
    params = effective_params(params, img, mask)

    inside = mask.inside
    node_of = np.full(inside.shape, -1, dtype=np.int64)
    rows, cols = np.nonzero(inside)
    node_of[rows, cols] = np.arange(len(rows))
    net = FlowNetwork(len(rows))

    widths = row_widths(mask).astype(np.float64)
    penalized = inside & (dist <= params.penalty_distance)
    horizontal, vertical = _edge_pairs(inside)
    for (r0, c0, r1, c1), is_horizontal in ((horizontal, True), (vertical, False)):
        w = pair_cost(img[r0, c0], img[r1, c1], params)
        if params.normalize_width:
            w = w / (0.5 * (widths[r0] + widths[r1]))
        if is_horizontal:
            w = w * params.horizontal_factor
        w = np.where(penalized[r0, c0] | penalized[r1, c1], w * params.penalty_factor, w)
        net.add_edges(node_of[r0, c0], node_of[r1, c1], w, w)

    net.set_terminals(node_of[seeds.source], INF, 0.0)
    net.set_terminals(node_of[seeds.sink], 0.0, INF)
    return PixelGraph(net, node_of, np.column_stack([rows, cols]), params)
