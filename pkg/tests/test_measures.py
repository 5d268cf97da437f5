import numpy as np
import pytest

from emrg.errors import ShapeMismatch, Underflow, UnknownEdge
from emrg.graphs import (
    ActivationProfile,
    Edge,
    LayeredShape,
    Quiver,
    QuiverRep,
    build_layered_quiver,
)
from emrg.measures import (
    choose_pivot,
    derived_functor_dim,
    emergence_conv,
    emergence_layered,
    emergence_network,
    exact_delta,
    observation_rep,
    pivot_delta,
)
from emrg.verify import active_vertex_set, random_profile, random_shape


def test_network_all_active_is_zero():
    shape = LayeredShape([2, 3, 2])
    q = build_layered_quiver(shape)
    assert emergence_network(q, q.vertices) == 0


def test_network_one_inactive_node():
    shape = LayeredShape([2, 2])
    q = build_layered_quiver(shape)
    active = active_vertex_set(shape, ActivationProfile([1, 2]))
    assert emergence_network(q, active) == 2


def test_network_matches_layered_232():
    shape = LayeredShape([2, 3, 2])
    q = build_layered_quiver(shape)
    profile = ActivationProfile([1, 2, 2])
    assert emergence_network(q, active_vertex_set(shape, profile)) == 8
    assert emergence_layered(shape, profile) == 8


def test_layered_hand_values():
    assert emergence_layered([2, 2], [2, 2]) == 0
    assert emergence_layered([2, 2], [1, 2]) == 2
    assert emergence_layered([2, 3, 2], [1, 2, 2]) == 8
    assert emergence_layered([5, 7, 3, 9], [0, 0, 0, 0]) == 0


def test_layered_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        emergence_layered([2, 2], [1, 2, 2])
    with pytest.raises(ShapeMismatch):
        emergence_layered([2, 2], [3, 2])


def test_conv_reduces_to_layered():
    rng = np.random.default_rng(11)
    for _ in range(50):
        shape = random_shape(rng, 5, 6)
        profile = random_profile(rng, shape)
        assert emergence_conv(shape, profile, list(profile)) == emergence_layered(
            shape, profile
        )


def test_conv_hand_value():
    # terms: 2*3 + 2*3*5 + 1*3
    assert emergence_conv([4, 4, 4], [2, 3, 3], [4, 5, 4]) == 39


def test_conv_all_active_is_zero():
    assert emergence_conv([4, 4, 4], [4, 4, 4], [4, 5, 4]) == 0


def test_derived_functor_empty_deleted():
    shape = LayeredShape([2, 3, 2])
    rep, _ = observation_rep(shape, ActivationProfile([2, 3, 2]))
    assert derived_functor_dim(rep, []) == 0


def test_derived_functor_sink_head():
    q = Quiver(vertices=frozenset({"u", "v"}), edges=[Edge("e0", "u", "v")])
    rep = QuiverRep(quiver=q, vertex_dim={"u": 3, "v": 1})
    assert derived_functor_dim(rep, ["e0"]) == 3


def test_derived_functor_unknown_edge():
    q = Quiver(vertices=frozenset({"u", "v"}), edges=[Edge("e0", "u", "v")])
    rep = QuiverRep(quiver=q, vertex_dim={"u": 1, "v": 1})
    with pytest.raises(UnknownEdge):
        derived_functor_dim(rep, ["nope"])


def test_derived_functor_matches_network_randomized():
    rng = np.random.default_rng(12)
    for _ in range(100):
        shape = random_shape(rng, 5, 6)
        profile = random_profile(rng, shape)
        rep, deleted = observation_rep(shape, profile)
        q = build_layered_quiver(shape)
        assert derived_functor_dim(rep, deleted) == emergence_network(
            q, active_vertex_set(shape, profile)
        )


def test_pivot_delta_hand_values():
    shape = LayeredShape([4, 4, 4, 4])
    assert pivot_delta(shape, 2) == 16
    assert pivot_delta(shape, 3) == 0
    assert pivot_delta(LayeredShape([8, 2, 2, 8]), 3) == 6


def test_pivot_delta_boundaries():
    shape = LayeredShape([4, 4, 4, 4])
    # i=1 uses n_0 = 0; i=N has an empty trailing sum
    assert pivot_delta(shape, 1) == 4 + 16 + 64
    assert pivot_delta(shape, 4) == -4
    with pytest.raises(IndexError):
        pivot_delta(shape, 0)
    with pytest.raises(IndexError):
        pivot_delta(shape, 5)


def test_choose_pivot():
    assert choose_pivot(LayeredShape([4, 4, 4, 4])).pivot == 2
    assert choose_pivot(LayeredShape([8, 2, 2, 8])).pivot == 3


def test_choose_pivot_width_one_chain():
    # degenerate chain: delta(1) = n_2 = 1 qualifies, nothing later does
    report = choose_pivot(LayeredShape([1, 1, 1]))
    assert report.deltas == [1 + 1, 0, -1]
    assert report.pivot == 1


def test_choose_pivot_strict_inequality():
    # delta(3) == 0 on (4,4,4,4) must not qualify
    report = choose_pivot(LayeredShape([4, 4, 4, 4]))
    assert report.deltas[2] == 0
    assert report.pivot == 2


def test_exact_delta_double_evaluation():
    shape = LayeredShape([4, 4, 4, 4])
    profile = ActivationProfile([0, 4, 4, 4])
    dec = ActivationProfile([0, 3, 4, 4])
    expected = emergence_layered(shape, dec) - emergence_layered(shape, profile)
    assert exact_delta(shape, profile, 2) == expected


def test_exact_delta_small_cases():
    assert exact_delta([2, 2], [2, 2], 1) == 2  # E goes 0 -> 2
    with pytest.raises(Underflow):
        exact_delta([2, 2], [0, 2], 1)
    with pytest.raises(IndexError):
        exact_delta([2, 2], [2, 2], 3)


def test_layered_matches_network_randomized():
    rng = np.random.default_rng(13)
    for _ in range(100):
        shape = random_shape(rng, 5, 6)
        profile = random_profile(rng, shape)
        q = build_layered_quiver(shape)
        assert emergence_layered(shape, profile) == emergence_network(
            q, active_vertex_set(shape, profile)
        )


def test_trivial_zero_profiles_randomized():
    rng = np.random.default_rng(14)
    for _ in range(50):
        shape = random_shape(rng, 6, 8)
        assert emergence_layered(shape, ActivationProfile(list(shape))) == 0
        assert emergence_layered(shape, ActivationProfile([0] * len(shape))) == 0
