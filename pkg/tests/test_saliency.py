"""Saliency assembly over the backward pass."""

import numpy as np
import pytest

from mazelens import maze
from mazelens.analysis import DEFAULT_ACTION_TABLE, parse_target, saliency_for
from mazelens.errors import ParameterError, TargetRangeError
from mazelens.nn import WeightStore, forward_with_capture, init_random_weights

from gradcheck import collect_fd_checks, max_rel_error


@pytest.fixture(scope="module")
def noise_input():
    return np.random.default_rng(5).uniform(0, 1, (3, 64, 64)).astype(np.float32)


@pytest.fixture(scope="module")
def trace(spec, weights, noise_input):
    return forward_with_capture(spec, weights, noise_input)


def test_zero_head_gives_zero_map(spec, noise_input):
    tensors = init_random_weights(spec, 1).tensors
    tensors["head.policy.kernel"] = np.zeros_like(tensors["head.policy.kernel"])
    tensors["head.policy.bias"] = np.zeros_like(tensors["head.policy.bias"])
    trace = forward_with_capture(spec, WeightStore(tensors), noise_input)
    sal = saliency_for(trace, ("group", "UP"))
    assert sal.values.shape == (64, 64)
    assert (sal.values == 0).all()


def test_map_shape_is_64x64(trace):
    for target in (("logit", 3), ("group", "RIGHT")):
        sal = saliency_for(trace, target)
        assert sal.values.shape == (64, 64)
        assert sal.values.dtype == np.float32


def test_l2_reduction_is_nonnegative(trace):
    sal = saliency_for(trace, ("group", "LEFT"))
    assert (sal.values >= 0).all()


def test_sum_reduction_matches_channel_sum(trace):
    from mazelens.nn import backward_to_input

    idx = DEFAULT_ACTION_TABLE.indices_for("DOWN")
    grad = backward_to_input(trace, ("prob_group", idx))
    sal = saliency_for(trace, ("group", "DOWN"), reduction="sum")
    np.testing.assert_allclose(sal.values, grad.sum(axis=0), atol=1e-6)


def test_group_map_gradient_matches_finite_differences(spec, noise_input):
    weights = init_random_weights(spec, 6)
    idx = tuple(DEFAULT_ACTION_TABLE.indices_for("UP"))
    checks = collect_fd_checks(
        spec, weights, noise_input, [("prob_group", idx)], n_coords=10
    )
    assert max_rel_error(checks) < 1e-2


def test_maze_observation_map_is_finite(spec, weights):
    obs = maze.render_observation(maze.remove_cheese(maze.generate_kruskal(3, 15)))
    trace = forward_with_capture(spec, weights, obs)
    sal = saliency_for(trace, ("group", "UP"))
    assert np.isfinite(sal.values).all()
    assert sal.target == "group:UP"


def test_invalid_targets_rejected(trace):
    with pytest.raises(TargetRangeError):
        saliency_for(trace, ("logit", 22))
    with pytest.raises(TargetRangeError):
        saliency_for(trace, ("group", "SIDEWAYS"))
    with pytest.raises(ParameterError):
        saliency_for(trace, ("logit", 1), reduction="max")


def test_parse_target():
    assert parse_target("logit:3") == ("logit", 3)
    assert parse_target("group:up") == ("group", "UP")
    with pytest.raises(TargetRangeError):
        parse_target("feature:9")
    with pytest.raises(TargetRangeError):
        parse_target("logit:abc")
