import math

import numpy as np
import pytest

from vesselcut.cutcost import CostMode, CostParams, build_graph, default_penalty_distance, pair_cost, to_grayscale
from vesselcut.errors import DimensionMismatch, UnsupportedFormat
from vesselcut.evalbench import vessel_shape
from vesselcut.vessel import VesselMask, distance_field, seed_bands

EXP = CostParams()
LIN = CostParams(mode=CostMode.LINEAR)


def test_gray_pixel_passes_through_luma():
    assert to_grayscale(np.full((1, 1, 3), 77, np.uint8))[0, 0] == pytest.approx(77)


def test_red_luma():
    assert to_grayscale(np.array([[[255, 0, 0]]], np.uint8))[0, 0] == pytest.approx(0.299 * 255)
    assert 0.299 * 255 == pytest.approx(76.245)


def test_single_channel_identity():
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    assert np.array_equal(to_grayscale(img), img.astype(float))


def test_rgba_drops_alpha():
    img = np.zeros((2, 2, 4), np.uint8)
    img[..., 1] = 100
    img[..., 3] = 255
    assert to_grayscale(img)[0, 0] == pytest.approx(58.7)


@pytest.mark.parametrize("shape", [(2, 2, 2), (2,), (2, 2, 5)])
def test_unsupported_shape(shape):
    with pytest.raises(UnsupportedFormat):
        to_grayscale(np.zeros(shape))


def test_exp_cost_values():
    assert pair_cost(100, 100, EXP) == 1.0
    assert pair_cost(0, 40, EXP) == pytest.approx(math.exp(-1), rel=1e-12)
    assert pair_cost(0, 40, EXP) == pytest.approx(0.367879, abs=1e-6)
    assert pair_cost(0, 255, EXP) == pytest.approx(math.exp(-((255 / 40) ** 2)), rel=1e-12)
    assert pair_cost(0, 255, EXP) == pytest.approx(4.5e-18, rel=0.05)


def test_linear_cost_endpoints():
    assert pair_cost(0, 255, LIN) == 0.0
    assert pair_cost(9, 9, LIN) == 1.0


@pytest.mark.parametrize("params", [EXP, LIN, CostParams(sigma=5), CostParams(sigma=100)])
def test_cost_monotone_over_all_gaps(params):
    costs = pair_cost(np.zeros(256), np.arange(256), params)
    assert (np.diff(costs) <= 0).all()
    assert ((costs >= 0) & (costs <= 1)).all()


def test_cost_symmetric_in_arguments():
    a, b = np.arange(0, 256, 5), np.arange(255, -1, -5)
    assert np.array_equal(pair_cost(a, b, EXP), pair_cost(b, a, EXP))


@pytest.mark.parametrize("kwargs", [dict(sigma=0), dict(horizontal_factor=0.5),
                                    dict(penalty_factor=0.9), dict(penalty_distance=-1),
                                    dict(seed_fraction=0.5)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        CostParams(**kwargs)


def test_defaults():
    p = CostParams()
    assert (p.mode, p.sigma, p.horizontal_factor, p.penalty_factor, p.seed_fraction) == (
        CostMode.EXPONENTIAL, 20.0, 1.3, 3.0, 0.10)


def _graph(inside, img, params):
    mask = VesselMask(inside)
    return build_graph(img, mask, distance_field(mask), seed_bands(mask, params.seed_fraction), params)


def _arc_table(graph):
    tails, heads, cuv, cvu = graph.network.arcs()
    p0, p1 = graph.pixel_of[tails], graph.pixel_of[heads]
    horizontal = p0[:, 0] == p1[:, 0]
    return horizontal, cuv, cvu


def test_three_by_three_uniform():
    inside = np.ones((3, 3), bool)
    graph = _graph(inside, np.full((3, 3), 50.0), CostParams(penalty_distance=0))
    horizontal, cuv, cvu = _arc_table(graph)
    assert graph.network.arc_count == 12
    assert horizontal.sum() == 6
    assert np.allclose(cuv[horizontal], 1.3 / 3)
    assert np.allclose(cuv[~horizontal], 1 / 3)
    assert np.array_equal(cuv, cvu)


def test_three_by_three_penalty_everywhere():
    inside = np.ones((3, 3), bool)
    img = np.full((3, 3), 50.0)
    plain = _arc_table(_graph(inside, img, CostParams(penalty_distance=0)))[1]
    tripled = _arc_table(_graph(inside, img, CostParams(penalty_distance=1)))[1]
    assert np.allclose(tripled, 3 * plain)


def test_vertical_edge_uses_mean_width():
    inside = np.zeros((2, 4), bool)
    inside[0, 1:3] = True
    inside[1, :] = True
    graph = _graph(inside, np.zeros((2, 4)), CostParams(penalty_distance=0, seed_fraction=0.4))
    horizontal, cuv, _ = _arc_table(graph)
    assert np.allclose(cuv[~horizontal], 1 / 3)
    h_rows = graph.pixel_of[graph.network.arcs()[0][horizontal], 0]
    assert np.allclose(cuv[horizontal][h_rows == 0], 1.3 / 2)
    assert np.allclose(cuv[horizontal][h_rows == 1], 1.3 / 4)


def test_graph_size_and_seeds():
    inside = vessel_shape(30, 40, "flask")
    rng = np.random.default_rng(0)
    img = rng.uniform(0, 255, inside.shape)
    mask = VesselMask(inside)
    seeds = seed_bands(mask)
    graph = build_graph(img, mask, distance_field(mask), seeds, EXP)
    net = graph.network
    pairs = (inside[:, 1:] & inside[:, :-1]).sum() + (inside[1:] & inside[:-1]).sum()
    assert net.node_count == inside.sum()
    assert net.arc_count == pairs
    tails, heads, cuv, cvu = net.arcs()
    assert np.array_equal(cuv, cvu)
    # 4-adjacency only
    d = np.abs(graph.pixel_of[tails] - graph.pixel_of[heads]).sum(axis=1)
    assert (d == 1).all()
    src_nodes = graph.node_of[seeds.source]
    snk_nodes = graph.node_of[seeds.sink]
    assert np.isinf(net.to_source[src_nodes]).all() and (net.to_sink[src_nodes] == 0).all()
    assert np.isinf(net.to_sink[snk_nodes]).all() and (net.to_source[snk_nodes] == 0).all()
    others = np.ones(net.node_count, bool)
    others[src_nodes] = others[snk_nodes] = False
    assert (net.to_source[others] == 0).all() and (net.to_sink[others] == 0).all()


def test_penalty_zone_hand_check():
    inside = np.zeros((12, 12), bool)
    inside[1:11, 1:11] = True
    img = np.full(inside.shape, 80.0)
    graph = _graph(inside, img, CostParams(penalty_distance=2))
    tails, heads, cuv, _ = graph.network.arcs()
    p0, p1 = graph.pixel_of[tails], graph.pixel_of[heads]
    horizontal = p0[:, 0] == p1[:, 0]
    d = distance_field(VesselMask(inside))
    near = (d[p0[:, 0], p0[:, 1]] <= 2) | (d[p1[:, 0], p1[:, 1]] <= 2)
    base = np.where(horizontal, 1.3, 1.0) / 10
    assert np.allclose(cuv, np.where(near, 3 * base, base))


def test_default_penalty_distance():
    assert default_penalty_distance(VesselMask(np.ones((5, 100), bool))) == 3.0
    assert default_penalty_distance(VesselMask(np.ones((5, 400), bool))) == 8.0


def test_width_normalization_off():
    inside = np.ones((4, 5), bool)
    graph = _graph(inside, np.zeros((4, 5)), CostParams(penalty_distance=0, normalize_width=False,
                                                         seed_fraction=0.25))
    horizontal, cuv, _ = _arc_table(graph)
    assert np.allclose(cuv[horizontal], 1.3)
    assert np.allclose(cuv[~horizontal], 1.0)


def test_dimension_mismatch():
    inside = np.ones((4, 4), bool)
    mask = VesselMask(inside)
    with pytest.raises(DimensionMismatch):
        build_graph(np.zeros((4, 5)), mask, distance_field(mask), seed_bands(mask, 0.25), EXP)


def test_auto_sigma_uses_vessel_std():
    from vesselcut.cutcost import effective_params

    inside = np.zeros((6, 6), bool)
    inside[1:5, 1:5] = True
    img = np.zeros((6, 6))
    img[1:3, 1:5] = 100
    p = effective_params(CostParams(auto_sigma=True), img, VesselMask(inside))
    assert p.sigma == pytest.approx(50.0)
