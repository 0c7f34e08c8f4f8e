"""PNG/JSON reading and writing, result documents and overlays."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import UnsupportedFormat

RESULT_SCHEMA = 1
OVERLAY_COLOR = (255, 0, 0)


def read_image(path) -> np.ndarray:
    """Load an image as uint8, (H, W) for gray or (H, W, 3) for colour."""
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "1", "P", "I", "I;16", "F"):
                im = im.convert("L")
            elif im.mode not in ("RGB",):
                im = im.convert("RGB")
            return np.asarray(im).copy()
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"cannot decode image {path}") from exc


def read_contour(path) -> np.ndarray:
    """Contour file: single channel, nonzero = contour pixel."""
    arr = read_image(path)
    if arr.ndim == 3:
        arr = arr.max(axis=2)
    return arr != 0


def write_png(path, array) -> None:
    arr = np.asarray(array)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8)).save(path, format="PNG")


def write_mask(path, mask) -> None:
    write_png(path, np.asarray(mask, dtype=bool))


def overlay(image, curve) -> np.ndarray:
    """RGB copy of ``image`` with the boundary pixels painted red."""
    arr = np.asarray(image)
    if arr.ndim == 2:
        rgb = np.repeat(np.clip(arr, 0, 255).astype(np.uint8)[..., None], 3, axis=2)
    else:
        rgb = np.clip(arr[..., :3], 0, 255).astype(np.uint8).copy()
    for col, row in enumerate(curve.rows):
        if row is not None:
            rgb[row, col] = OVERLAY_COLOR
    return rgb


def read_ground_truth(path) -> list:
    with open(path) as fh:
        doc = json.load(fh)
    rows = doc["boundary"] if isinstance(doc, dict) else doc
    return [None if r is None else int(r) for r in rows]


def write_ground_truth(path, rows) -> None:
    doc = {"schema": RESULT_SCHEMA, "boundary": [None if r is None else int(r) for r in rows]}
    Path(path).write_text(json.dumps(doc) + "\n")


def result_document(image_name, params, labeling, curve, fill_fraction, strict=False) -> dict:
    doc = {
        "schema": RESULT_SCHEMA,
        "image": str(image_name),
        "params": params.to_dict(),
        "fill_fraction": fill_fraction,
        "cut_value": labeling.cut_value,
        "boundary": list(curve.rows),
    }
    if strict:
        doc["material_components"] = labeling.components()
    return doc


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
