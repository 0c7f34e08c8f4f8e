import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tie_instance
from vesselcut.cutcost import CostParams, build_graph
from vesselcut.errors import BandsOverlap, DimensionMismatch, NoBoundary
from vesselcut.evalbench import evaluate, flat_profile, parabolic_profile, synth_vessel, vessel_shape
from vesselcut.segment import (
    AIR,
    MATERIAL,
    BoundaryCurve,
    PhaseLabeling,
    extract_boundary,
    fill_level,
    segment,
)
from vesselcut.vessel import VesselMask, distance_field, mask_from_contour, seed_bands


def flat_cut_costs(img, mask, params):
    """Cost of every horizontal cut 'material = rows >= r', by direct summation."""
    params = CostParams(**{**params.__dict__})
    seeds = seed_bands(mask, params.seed_fraction)
    graph = build_graph(img, mask, distance_field(mask), seeds, params)
    rows = np.arange(mask.height)[:, None]
    out = {}
    top, bottom = mask.rows()
    for r in range(top + 1, bottom + 1):
        material = mask.inside & (rows >= r)
        if (material & seeds.sink).any() or (seeds.source & ~material).any():
            continue
        side = material[graph.pixel_of[:, 0], graph.pixel_of[:, 1]]
        out[r] = graph.network.cut_capacity(side)
    return out


def test_step_image_oracle(step_vessel):
    img, mask = step_vessel
    params = CostParams()
    costs = flat_cut_costs(img, mask, params)
    best = min(costs, key=costs.get)
    assert best == 61  # interior row 60
    assert all(v > costs[61] * 1000 for r, v in costs.items() if r != 61)
    lab = segment(img, mask, params)
    assert lab.cut_value == pytest.approx(costs[61], rel=1e-9)
    rows = np.arange(mask.height)[:, None]
    assert np.array_equal(lab.material, mask.inside & (rows >= 61))
    assert np.array_equal(lab.air, mask.inside & (rows < 61))


def test_step_image_boundary_and_fill(step_vessel):
    img, mask = step_vessel
    lab = segment(img, mask)
    curve = extract_boundary(lab, mask)
    assert curve.rows[0] is None and curve.rows[-1] is None
    assert set(curve.rows[1:-1]) == {61}
    assert fill_level(lab, curve) == pytest.approx(0.40)


def test_uniform_image_respects_seeds():
    inside = vessel_shape(30, 40)
    mask = VesselMask(inside)
    lab = segment(np.full(inside.shape, 128.0), mask)
    seeds = seed_bands(mask)
    assert lab.material[seeds.source].all()
    assert not lab.material[seeds.sink].any()
    assert not lab.material[~inside].any()


def test_phase_lookup(step_vessel):
    img, mask = step_vessel
    lab = segment(img, mask)
    assert lab.phase(100, 50) == MATERIAL
    assert lab.phase(1, 50) == AIR
    assert lab.phase(0, 0) is None


def test_shallow_fill_is_flagged():
    inside = vessel_shape(96, 96)
    v = synth_vessel(96, 96, flat_profile(inside, 0.95), (60, 190))
    ev = evaluate(v.image, mask_from_contour(v.contour), v.ground_truth)
    assert not ev.detected
    assert ev.assumption_violated and ev.flagged


def test_all_material_column_is_empty():
    inside = np.ones((10, 3), bool)
    material = np.zeros_like(inside)
    material[:, 0] = True
    material[6:, 1:] = True
    curve = extract_boundary(PhaseLabeling(material, inside, 0.0))
    assert curve.rows == [None, 6, 6]


def test_single_column_vessel():
    inside = np.zeros((12, 3), bool)
    inside[:, 1] = True
    material = np.zeros_like(inside)
    material[7:10, 1] = True
    curve = extract_boundary(PhaseLabeling(material, inside, 0.0))
    assert curve.rows == [None, 7, None]


def test_fill_all_material():
    inside = np.ones((5, 5), bool)
    assert fill_level(PhaseLabeling(inside.copy(), inside, 0.0)) == 1.0


def test_fill_source_band_only():
    inside = vessel_shape(20, 50)
    mask = VesselMask(inside)
    seeds = seed_bands(mask)
    lab = PhaseLabeling(seeds.source.copy(), inside, 0.0)
    assert fill_level(lab) == seeds.source.sum() / inside.sum()


def test_fill_vertical_split_has_no_boundary():
    inside = np.ones((6, 4), bool)
    material = np.zeros_like(inside)
    material[:, :2] = True
    with pytest.raises(NoBoundary):
        fill_level(PhaseLabeling(material, inside, 0.0))


def test_segment_errors():
    mask = VesselMask(np.ones((3, 3), bool))
    with pytest.raises(BandsOverlap):
        segment(np.zeros((3, 3)), mask, CostParams(seed_fraction=0.45))
    with pytest.raises(DimensionMismatch):
        segment(np.zeros((4, 3)), mask)


def test_strict_component_count():
    inside = np.ones((10, 10), bool)
    material = np.zeros_like(inside)
    material[8:, :] = True
    material[2:4, 2:4] = True
    assert PhaseLabeling(material, inside, 0.0).components() == 2


def test_rgb_input_matches_gray(step_vessel):
    img, mask = step_vessel
    rgb = np.repeat(img[..., None], 3, axis=2).astype(np.uint8)
    assert np.array_equal(segment(rgb, mask).material, segment(img, mask).material)


@st.composite
def synthetic(draw):
    noise = draw(st.sampled_from([0.0, 10.0, 25.0]))
    level = draw(st.floats(0.3, 0.7))
    depth = draw(st.floats(-6, 6))
    inside = vessel_shape(40, 48)
    prof = parabolic_profile(inside, level, depth)
    seed = draw(st.integers(0, 2**16))
    return synth_vessel(40, 48, prof, (60, 180), noise, seed=seed)


@settings(max_examples=15, deadline=None)
@given(synthetic())
def test_intensity_inversion_symmetry(v):
    mask = VesselMask(v.inside)
    a = segment(v.image.astype(float), mask)
    b = segment(255.0 - v.image, mask)
    assert np.array_equal(a.material, b.material)


@settings(max_examples=10, deadline=None)
@given(synthetic(), st.integers(0, 7), st.integers(0, 7))
def test_translation_equivariance(v, dy, dx):
    mask = VesselMask(v.inside)
    curve = extract_boundary(segment(v.image, mask), mask)
    img2 = np.pad(v.image, ((dy, 0), (dx, 0)), constant_values=235)
    mask2 = VesselMask(np.pad(v.inside, ((dy, 0), (dx, 0))))
    curve2 = extract_boundary(segment(img2, mask2), mask2)
    shifted = [None] * dx + [None if r is None else r + dy for r in curve.rows]
    assert curve2.rows == shifted


def test_horizontal_factor_prefers_flat_cut():
    img, mask, steep, flats = tie_instance()
    base = CostParams(penalty_distance=0)
    free = segment(img, mask, CostParams(**{**base.__dict__, "horizontal_factor": 1.0}))
    damped = segment(img, mask, base)
    assert np.array_equal(free.material, steep)
    rows = {r for r in extract_boundary(damped, mask).rows if r is not None}
    assert len(rows) == 1 and rows <= set(flats)


def test_boundary_curve_helpers():
    curve = BoundaryCurve([None, 3, 4])
    assert curve.defined().tolist() == [False, True, True]
    assert np.isnan(curve.as_array()[0])
    assert len(curve) == 3
