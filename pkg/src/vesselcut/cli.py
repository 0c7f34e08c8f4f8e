"""Command-line entry point.

    vesselcut segment IMAGE CONTOUR [--overlay] [--figure] [cost flags]
    vesselcut batch MANIFEST [--workers N] [cost flags]
    vesselcut sweep MANIFEST [--sigmas 10,20,...] [--no-linear]
    vesselcut synth --out DIR --count N [--noise S] [--seed K]

Exit codes: 0 success, 2 bad input (missing/undecodable files, bad flags,
malformed manifest), 3 segmentation failure (open contour, empty mask,
overlapping seed bands, no boundary).
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, files
from .cutcost import CostMode, CostParams
from .errors import (
    DimensionMismatch,
    InvalidProfile,
    ManifestError,
    SegmentationError,
    UnsupportedFormat,
    VesselCutError,
)
from .evalbench import (
    DEFAULT_SIGMAS,
    DEFAULT_TOLERANCE,
    detection_score,
    read_manifest,
    seed_assumption_violated,
    sigma_sweep,
    synth_suite,
    write_dataset,
)
from .segment import extract_boundary, fill_level, segment
from .vessel import mask_from_contour

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SEGMENTATION = 3

log = logging.getLogger("vesselcut")


class InputError(Exception):
    pass


def _add_cost_flags(p):
    d = CostParams()
    g = p.add_argument_group("cost parameters")
    g.add_argument("--cost", choices=[m.value for m in CostMode], default=d.mode.value,
                   help="edge cost function")
    g.add_argument("--sigma", type=float, default=d.sigma,
                   help="sigma of the exponential cost, in intensity units")
    g.add_argument("--auto-sigma", action="store_true",
                   help="use the intensity standard deviation inside the vessel as sigma")
    g.add_argument("--hfactor", type=float, default=d.horizontal_factor,
                   help="multiplier on horizontal edges (discourages steep cuts)")
    g.add_argument("--penalty-factor", type=float, default=d.penalty_factor,
                   help="multiplier on edges near the vessel wall")
    g.add_argument("--penalty-distance", type=float, default=None,
                   help="width of the wall penalty zone in px (default: max(3, 2%% of widest row))")
    g.add_argument("--seed-fraction", type=float, default=d.seed_fraction,
                   help="share of the vessel height seeded at the top (air) and bottom (material)")
    g.add_argument("--no-width-norm", action="store_true",
                   help="do not divide edge costs by the vessel row width")


def _params(args) -> CostParams:
    try:
        return CostParams(
            mode=CostMode(args.cost),
            sigma=args.sigma,
            horizontal_factor=args.hfactor,
            penalty_factor=args.penalty_factor,
            penalty_distance=args.penalty_distance,
            seed_fraction=args.seed_fraction,
            normalize_width=not args.no_width_norm,
            auto_sigma=args.auto_sigma,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _load(path, reader):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    try:
        return reader(path)
    except (OSError, UnsupportedFormat) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _segment_one(image_path, contour_path, params, out_dir, overlay=False, figure=False,
                 strict=False, gt_path=None, mask_debug=False, tol=DEFAULT_TOLERANCE):
    """Run the pipeline on one pair and write its outputs; returns the JSON document."""
    image = _load(image_path, files.read_image)
    contour = _load(contour_path, files.read_contour)
    if image.shape[:2] != contour.shape:
        raise InputError(f"image {image.shape[:2]} and contour {contour.shape} sizes differ")
    mask = mask_from_contour(contour)
    labeling = segment(image, mask, params)
    curve = extract_boundary(labeling, mask)
    doc = files.result_document(Path(image_path).name, labeling.params, labeling, curve,
                                fill_level(labeling, curve), strict=strict)
    gt = None
    if gt_path:
        gt = _load(gt_path, files.read_ground_truth)
        detected, error = detection_score(curve, gt, mask, tol)
        doc["evaluation"] = {
            "detected": detected,
            "mean_abs_row_error": error,
            "tolerance_rows": tol * mask.vessel_height,
            "seed_assumption_violated": seed_assumption_violated(gt, mask, params.seed_fraction),
        }

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(image_path).stem
    (out_dir / f"{stem}.json").write_text(files.dump_json(doc))
    if overlay:
        files.write_png(out_dir / f"{stem}_overlay.png", files.overlay(image, curve))
    if mask_debug:
        files.write_mask(out_dir / f"{stem}_mask.png", mask.inside)
    if figure:
        from .plotting import plot_segmentation

        plot_segmentation(out_dir / f"{stem}_figure.png", image, labeling, curve, gt, title=stem)
    return doc


def cmd_segment(args) -> int:
    params = _params(args)
    doc = _segment_one(args.image, args.contour, params, args.out_dir, args.overlay,
                       args.figure, args.strict, args.groundtruth, args.mask_debug, args.tol)
    print(f"{doc['image']}: fill {doc['fill_fraction']:.3f}, cut {doc['cut_value']:.6g}")
    return EXIT_OK


def _batch_worker(job):
    entry, params, out_dir, overlay, strict, tol = job
    try:
        doc = _segment_one(entry.image, entry.contour, params, out_dir, overlay=overlay,
                           strict=strict, gt_path=entry.groundtruth, tol=tol)
        return {"image": entry.image.name, "status": "ok", "fill_fraction": doc["fill_fraction"],
                "detected": doc.get("evaluation", {}).get("detected")}
    except (InputError, SegmentationError, ValueError) as exc:
        return {"image": entry.image.name, "status": "error",
                "error": f"{type(exc).__name__}: {exc}"}


def cmd_batch(args) -> int:
    params = _params(args)
    entries = read_manifest(args.manifest, require_groundtruth=False)
    jobs = [(e, params, args.out_dir, args.overlay, args.strict, args.tol) for e in entries]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_batch_worker, jobs))
    else:
        results = [_batch_worker(j) for j in jobs]
    failed = 0
    for r in results:
        if r["status"] == "ok":
            extra = "" if r["detected"] is None else ("  detected" if r["detected"] else "  MISSED")
            print(f"{r['image']}: fill {r['fill_fraction']:.3f}{extra}")
        else:
            failed += 1
            print(f"{r['image']}: {r['error']}", file=sys.stderr)
    print(f"{len(results) - failed} segmented, {failed} failed")
    return EXIT_OK if not failed else EXIT_SEGMENTATION


def _parse_sigmas(text):
    try:
        sigmas = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad --sigmas value {text!r}") from exc
    if not sigmas or any(s <= 0 for s in sigmas):
        raise InputError("--sigmas needs positive values")
    return [int(s) if s.is_integer() else s for s in sigmas]


def cmd_sweep(args) -> int:
    sigmas = _parse_sigmas(args.sigmas)
    report = sigma_sweep(args.manifest, sigmas, include_linear=not args.no_linear,
                         base=_params(args), tol_fraction=args.tol, workers=args.workers)
    sys.stdout.write(report.to_text())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "sweep.csv").write_text(report.to_csv())
    if args.details:
        import json

        (out_dir / "sweep.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    if not args.no_figure:
        from .plotting import plot_sweep

        plot_sweep(out_dir / "sweep.png", report)
    for s in report.skipped:
        print(f"skipped line {s['line']}: {s['reason']}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.count < 1:
        raise InputError("--count must be at least 1")
    if args.row is not None and not 0.0 < args.row < 1.0:
        raise InputError("--row must lie in (0, 1)")
    try:
        cases = synth_suite(args.count, args.noise, args.seed, profile=args.profile,
                            level=args.row, width=args.width, height=args.height,
                            texture_amplitude=args.texture, texture_density=args.texture_density,
                            solid_share=args.solid_share, shape=args.shape)
    except (InvalidProfile, ValueError) as exc:
        raise InputError(str(exc)) from exc
    manifest = write_dataset(args.out, cases)
    print(f"wrote {len(cases)} vessels and {manifest}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="vesselcut", formatter_class=fmt,
                                     description="Trace material boundaries in transparent vessels with a seeded min-cut.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", formatter_class=fmt, help="segment one image")
    p.add_argument("image", help="vessel image (PNG, gray or RGB)")
    p.add_argument("contour", help="vessel contour (PNG, nonzero = contour)")
    p.add_argument("-o", "--out-dir", default=".", help="directory for result files")
    p.add_argument("--overlay", action="store_true", help="write <stem>_overlay.png with the boundary in red")
    p.add_argument("--figure", action="store_true", help="write a matplotlib summary figure")
    p.add_argument("--mask-debug", action="store_true", help="write <stem>_mask.png (255 = inside)")
    p.add_argument("--strict", action="store_true", help="also report the number of material components")
    p.add_argument("--groundtruth", default=None, help="ground-truth JSON to score against")
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                   help="detection tolerance as a fraction of vessel height")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("batch", formatter_class=fmt, help="segment every image in a manifest")
    p.add_argument("manifest", help="CSV: image,contour,groundtruth,class (groundtruth may be empty)")
    p.add_argument("-o", "--out-dir", default="results", help="directory for result files")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--overlay", action="store_true", help="write overlay PNGs")
    p.add_argument("--strict", action="store_true", help="also report the number of material components")
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                   help="detection tolerance as a fraction of vessel height")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("sweep", formatter_class=fmt, help="detection rate per sigma (and linear cost)")
    p.add_argument("manifest", help="CSV: image,contour,groundtruth,class")
    p.add_argument("--sigmas", default=",".join(str(s) for s in DEFAULT_SIGMAS),
                   help="comma-separated sigma values")
    p.add_argument("--no-linear", action="store_true", help="leave out the linear-cost row")
    p.add_argument("-o", "--out-dir", default="sweep", help="directory for sweep.csv and sweep.png")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                   help="detection tolerance as a fraction of vessel height")
    p.add_argument("--details", action="store_true", help="also write per-image results to sweep.json")
    p.add_argument("--no-figure", action="store_true", help="skip the sweep.png figure")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", formatter_class=fmt, help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=20, help="number of vessels")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian intensity noise sigma")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--profile", choices=["flat", "parabolic", "mixed"], default="mixed",
                   help="boundary shape")
    p.add_argument("--row", type=float, default=None,
                   help="boundary height as a fraction of vessel height from the top (default: random 0.3-0.7)")
    p.add_argument("--width", type=int, default=96, help="image width")
    p.add_argument("--height", type=int, default=96, help="image height")
    p.add_argument("--shape", choices=["rect", "flask"], default="rect", help="vessel outline")
    p.add_argument("--solid-share", type=float, default=0.0, help="share of SOLID (textured) vessels")
    p.add_argument("--texture", type=float, default=150.0, help="grain amplitude for SOLID vessels")
    p.add_argument("--texture-density", type=float, default=0.3, help="share of material pixels that are grains")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ManifestError, DimensionMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SegmentationError, VesselCutError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SEGMENTATION


if __name__ == "__main__":
    sys.exit(main())
