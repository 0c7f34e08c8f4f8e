"""Synthetic vessels, detection scoring and sigma sweeps.

A detection counts when the mean absolute per-column row error between the
predicted and true boundary is at most ``tol_fraction`` of the vessel height.
The raw error is always kept so other thresholds can be applied afterwards.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import files
from .cutcost import CostMode, CostParams
from .errors import InvalidProfile, ManifestError, NoOverlap, VesselCutError
from .segment import BoundaryCurve, extract_boundary, segment
from .vessel import VesselMask, mask_from_contour

log = logging.getLogger(__name__)

DEFAULT_SIGMAS = tuple(range(10, 101, 10))
DEFAULT_TOLERANCE = 0.05
CLASSES = ("LIQUID", "SOLID")
MANIFEST_HEADER = ["image", "contour", "groundtruth", "class"]

BACKGROUND = 235
WALL = 110

_EIGHT = np.ones((3, 3), dtype=bool)


# ---------------------------------------------------------------------------
# synthetic vessels


def vessel_shape(width, height, shape="rect", margin=4):
    """Interior mask for a synthetic vessel.

    ``flask`` narrows the top 30% of the body into a neck 40% as wide.
    """
    inside = np.zeros((height, width), dtype=bool)
    top, bottom = margin + 1, height - margin - 2
    left, right = margin + 1, width - margin - 2
    if bottom - top < 4 or right - left < 2:
        raise InvalidProfile(f"{width}x{height} is too small for a vessel with margin {margin}")
    inside[top:bottom + 1, left:right + 1] = True
    if shape == "flask":
        neck_rows = int(0.3 * (bottom - top + 1))
        body = right - left + 1
        neck = max(1, int(round(0.4 * body)))
        nl = left + (body - neck) // 2
        inside[top:top + neck_rows, :nl] = False
        inside[top:top + neck_rows, nl + neck:] = False
    elif shape != "rect":
        raise InvalidProfile(f"unknown vessel shape {shape!r}")
    return inside


def contour_of(inside):
    """One-pixel 8-connected ring just outside ``inside``."""
    return ndimage.binary_dilation(inside, structure=_EIGHT) & ~inside


def flat_profile(inside, level):
    """Boundary at ``level`` (0 = top, 1 = bottom) of the vessel's row extent."""
    rows = np.flatnonzero(inside.any(axis=1))
    top, height = rows[0], rows[-1] - rows[0] + 1
    row = top + int(round(level * height))
    return [row if inside[:, c].any() else None for c in range(inside.shape[1])]


def parabolic_profile(inside, level, depth):
    """Meniscus: ``depth`` rows of sag between the centre and the walls.

    The centre sits at ``level``; positive depth lifts the walls above it
    (a concave meniscus).
    """
    cols = np.flatnonzero(inside.any(axis=0))
    centre = 0.5 * (cols[0] + cols[-1])
    half = max(0.5 * (cols[-1] - cols[0]), 1.0)
    base = flat_profile(inside, level)
    out = []
    for c, row in enumerate(base):
        if row is None:
            out.append(None)
            continue
        x = (c - centre) / half
        out.append(int(round(row - depth * x * x)))
    return out


def _check_profile(inside, profile):
    if len(profile) != inside.shape[1]:
        raise InvalidProfile(f"profile has {len(profile)} columns, image has {inside.shape[1]}")
    for c, row in enumerate(profile):
        col = np.flatnonzero(inside[:, c])
        if row is None:
            if len(col):
                raise InvalidProfile(f"column {c} is inside the vessel but has no boundary row")
            continue
        if not len(col) or not col[0] <= row <= col[-1]:
            raise InvalidProfile(f"profile row {row} at column {c} lies outside the vessel")


@dataclass
class SynthVessel:
    image: np.ndarray  # uint8 (height, width)
    contour: np.ndarray  # bool
    ground_truth: list  # per column row or None
    inside: np.ndarray  # bool, the interior the contour encloses


def synth_vessel(width, height, boundary_profile, intensities=(60, 190), noise_sigma=0.0,
                 seed=0, shape="rect", texture_amplitude=0.0, texture_density=0.3,
                 margin=4) -> SynthVessel:
    """Render a vessel with material below ``boundary_profile`` and air above.

    ``noise_sigma`` adds Gaussian noise everywhere. Texture is grain noise inside
    the material only: a ``texture_density`` share of material pixels become
    grains offset by ``texture_amplitude`` towards the far end of the
    intensity range. The result is rounded to uint8, so the ground truth is
    exactly the supplied profile.
    """
    inside = vessel_shape(width, height, shape, margin)
    profile = list(boundary_profile)
    _check_profile(inside, profile)
    material_level, air_level = intensities
    rows = np.arange(height)[:, None]
    top = np.array([height if r is None else r for r in profile])[None, :]
    material = inside & (rows >= top)
    contour = contour_of(inside)

    rng = np.random.default_rng(seed)
    img = np.full((height, width), float(BACKGROUND))
    img[contour] = WALL
    img[inside] = air_level
    img[material] = material_level
    if texture_amplitude > 0:
        grains = material & (rng.random(img.shape) < texture_density)
        img[grains] += texture_amplitude if material_level < 128 else -texture_amplitude
    if noise_sigma > 0:
        img += rng.normal(0.0, noise_sigma, size=img.shape)
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return SynthVessel(img, contour, profile, inside)


@dataclass
class SynthCase:
    name: str
    cls: str
    vessel: SynthVessel


def synth_suite(count, noise_sigma=0.0, seed=0, profile="mixed", level=None,
                width=96, height=96, texture_amplitude=0.0, texture_density=0.3,
                solid_share=0.0, shape="rect"):
    """A reproducible batch of synthetic vessels.

    Each case draws its geometry from its own generator seeded with
    ``(seed, index)``. ``level`` fixes the boundary height; otherwise it is
    drawn from [0.3, 0.7]. A ``solid_share`` fraction of the cases is labelled
    SOLID and gets material grains (see :func:`synth_vessel`).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if profile not in ("flat", "parabolic", "mixed"):
        raise ValueError(f"unknown profile kind {profile!r}")
    cases = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        cls = "SOLID" if rng.random() < solid_share else "LIQUID"
        kind = profile if profile != "mixed" else ("flat", "parabolic")[i % 2]
        inside = vessel_shape(width, height, shape)
        lvl = level if level is not None else float(rng.uniform(0.3, 0.7))
        if kind == "flat":
            prof = flat_profile(inside, lvl)
        else:
            depth = float(rng.uniform(2.0, 0.08 * height))
            prof = parabolic_profile(inside, lvl, depth)
        material = int(rng.integers(30, 90))
        air = int(rng.integers(material + 90, min(material + 170, 250)))
        if rng.random() < 0.5:
            material, air = 255 - material, 255 - air
        tex = texture_amplitude if cls == "SOLID" else 0.0
        vessel = synth_vessel(width, height, prof, (material, air), noise_sigma,
                              seed=int(rng.integers(2**31)), shape=shape,
                              texture_amplitude=tex, texture_density=texture_density)
        cases.append(SynthCase(f"synth_{i:04d}", cls, vessel))
    return cases


def write_dataset(out_dir, cases) -> Path:
    """Write PNG images, contours and JSON ground truth plus manifest.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [MANIFEST_HEADER]
    for case in cases:
        image = f"{case.name}.png"
        contour = f"{case.name}_contour.png"
        gt = f"{case.name}_gt.json"
        files.write_png(out / image, case.vessel.image)
        files.write_mask(out / contour, case.vessel.contour)
        files.write_ground_truth(out / gt, case.vessel.ground_truth)
        lines.append([image, contour, gt, case.cls])
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(lines)
    manifest = out / "manifest.csv"
    manifest.write_text(buf.getvalue())
    return manifest


# ---------------------------------------------------------------------------
# scoring


def _rows(curve):
    rows = curve.rows if isinstance(curve, BoundaryCurve) else curve
    return np.array([np.nan if r is None else r for r in rows], dtype=np.float64)


def detection_score(pred, gt, mask: VesselMask, tol_fraction=DEFAULT_TOLERANCE):
    """Return ``(detected, mean_abs_row_error)`` over columns where both exist."""
    p, g = _rows(pred), _rows(gt)
    if p.shape != g.shape:
        raise NoOverlap(f"prediction has {len(p)} columns, ground truth {len(g)}")
    both = ~np.isnan(p) & ~np.isnan(g)
    if not both.any():
        raise NoOverlap("no column has both a predicted and a true boundary")
    error = float(np.mean(np.abs(p[both] - g[both])))
    return error <= tol_fraction * mask.vessel_height, error


def seed_assumption_violated(gt, mask: VesselMask, seed_fraction=0.10) -> bool:
    """True when the true boundary reaches into the bottom seed band.

    Such images break the premise that the bottom slab is all material; the
    cut cannot follow them and a miss is expected.
    """
    top, bottom = mask.rows()
    k = max(1, math.ceil(seed_fraction * (bottom - top + 1) - 1e-9))
    g = _rows(gt)
    return bool(np.nanmax(g) > bottom - k + 1) if not np.isnan(g).all() else False


@dataclass
class Evaluation:
    detected: bool
    error: float
    assumption_violated: bool
    curve: BoundaryCurve

    @property
    def flagged(self) -> bool:
        """A miss that the seed-band premise explains."""
        return self.assumption_violated and not self.detected


def evaluate(image, mask: VesselMask, gt, params: CostParams | None = None,
             tol_fraction=DEFAULT_TOLERANCE) -> Evaluation:
    params = params or CostParams()
    curve = extract_boundary(segment(image, mask, params), mask)
    try:
        detected, error = detection_score(curve, gt, mask, tol_fraction)
    except NoOverlap:
        detected, error = False, float("inf")
    return Evaluation(detected, error, seed_assumption_violated(gt, mask, params.seed_fraction), curve)


# ---------------------------------------------------------------------------
# manifests and sweeps


@dataclass
class ManifestEntry:
    image: Path
    contour: Path
    groundtruth: Path | None
    cls: str
    line: int


def read_manifest(path, require_groundtruth=True):
    """Parse ``image,contour,groundtruth,class`` lines; header row optional.

    Relative paths resolve against the manifest's directory. Blank lines and
    ``#`` comments are skipped.
    """
    path = Path(path)
    base = path.parent
    entries = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            row = [x.strip() for x in row]
            if [x.lower() for x in row] == MANIFEST_HEADER:
                continue
            if len(row) != 4:
                raise ManifestError(f"expected 4 fields, got {len(row)}", lineno)
            image, contour, gt, cls = row
            cls = cls.upper()
            if cls not in CLASSES:
                raise ManifestError(f"class must be LIQUID or SOLID, got {row[3]!r}", lineno)
            if not image or not contour:
                raise ManifestError("image and contour paths are required", lineno)
            if require_groundtruth and not gt:
                raise ManifestError("ground-truth path is required", lineno)
            entries.append(ManifestEntry(base / image, base / contour,
                                         base / gt if gt else None, cls, lineno))
    if not entries:
        raise ManifestError(f"manifest {path} lists no images")
    return entries


def sweep_settings(base: CostParams, sigmas, include_linear):
    settings = [(str(s).rstrip("0").rstrip(".") if isinstance(s, float) else str(s),
                 replace(base, mode=CostMode.EXPONENTIAL, sigma=float(s), auto_sigma=False))
                for s in sigmas]
    if include_linear:
        settings.append(("LINEAR", replace(base, mode=CostMode.LINEAR)))
    return settings


def _run_entry(entry: ManifestEntry, settings, tol_fraction):
    """Evaluate one manifest entry under every setting (worker function)."""
    try:
        image = files.read_image(entry.image)
        mask = mask_from_contour(files.read_contour(entry.contour))
        gt = files.read_ground_truth(entry.groundtruth)
    except (OSError, ValueError, KeyError, VesselCutError) as exc:
        return {"skipped": f"{type(exc).__name__}: {exc}"}
    out = {}
    for label, params in settings:
        try:
            ev = evaluate(image, mask, gt, params, tol_fraction)
            out[label] = (ev.detected, ev.error, ev.assumption_violated)
        except VesselCutError as exc:
            out[label] = (False, float("inf"), False)
            log.warning("%s [%s]: %s", entry.image, label, exc)
    return {"results": out}


@dataclass
class SweepRow:
    setting: str
    liquids: float | None
    solids: float | None
    n_images: int


@dataclass
class SweepReport:
    rows: list
    n_liquids: int
    n_solids: int
    skipped: list = field(default_factory=list)
    details: list = field(default_factory=list)

    def to_text(self) -> str:
        def pct(x):
            return "-" if x is None else f"{100 * x:.0f}%"

        head = ("sigma", "liquids", "solids", "n")
        body = [(r.setting, pct(r.liquids), pct(r.solids), str(r.n_images)) for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        lines = ["  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in [head, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        if self.skipped:
            lines.append(f"skipped {len(self.skipped)} manifest entries")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setting", "detection_rate_liquids", "detection_rate_solids", "n_images"])
        for r in self.rows:
            w.writerow([r.setting,
                        "" if r.liquids is None else repr(r.liquids),
                        "" if r.solids is None else repr(r.solids),
                        r.n_images])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema": files.RESULT_SCHEMA,
            "rows": [vars(r) for r in self.rows],
            "n_liquids": self.n_liquids,
            "n_solids": self.n_solids,
            "skipped": self.skipped,
            "details": self.details,
        }


def sigma_sweep(manifest, sigmas=DEFAULT_SIGMAS, include_linear=True, base=None,
                tol_fraction=DEFAULT_TOLERANCE, workers=1) -> SweepReport:
    """Detection rate per cost setting and material class.

    ``manifest`` is a path or a list of :class:`ManifestEntry`. Entries whose
    files cannot be read are skipped and listed in ``report.skipped``.
    """
    entries = read_manifest(manifest) if isinstance(manifest, (str, Path)) else list(manifest)
    if not entries:
        raise ManifestError("manifest lists no images")
    settings = sweep_settings(base or CostParams(), sigmas, include_linear)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_entry, entries, [settings] * len(entries),
                                     [tol_fraction] * len(entries)))
    else:
        outcomes = [_run_entry(e, settings, tol_fraction) for e in entries]

    skipped, details = [], []
    hits = {label: {c: 0 for c in CLASSES} for label, _ in settings}
    counts = {c: 0 for c in CLASSES}
    for entry, outcome in zip(entries, outcomes):
        if "skipped" in outcome:
            skipped.append({"line": entry.line, "image": str(entry.image), "reason": outcome["skipped"]})
            continue
        counts[entry.cls] += 1
        for label, (detected, error, violated) in outcome["results"].items():
            hits[label][entry.cls] += int(detected)
            details.append({"image": str(entry.image), "class": entry.cls, "setting": label,
                            "detected": detected, "error": error, "assumption_violated": violated})

    def rate(label, cls):
        return hits[label][cls] / counts[cls] if counts[cls] else None

    rows = [SweepRow(label, rate(label, "LIQUID"), rate(label, "SOLID"), sum(counts.values()))
            for label, _ in settings]
    return SweepReport(rows, counts["LIQUID"], counts["SOLID"], skipped, details)
