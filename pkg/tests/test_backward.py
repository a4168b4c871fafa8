"""Analytic input gradients against the finite-difference oracle."""

import numpy as np
import pytest

from mazelens import maze
from mazelens.errors import TargetRangeError
from mazelens.nn import (
    NetworkSpec,
    WeightStore,
    backward_to_input,
    forward_with_capture,
    init_random_weights,
)

from gradcheck import collect_fd_checks, max_rel_error

TARGETS = [("logit", 3), ("prob", 5), ("prob_group", (0, 1, 2))]


@pytest.fixture(scope="module")
def observation():
    # generic noise input: rendered mazes are piecewise constant, which
    # ties pool windows and makes FD a subgradient average at the tie
    return np.random.default_rng(77).uniform(0, 1, (3, 64, 64)).astype(np.float32)


def test_zero_policy_head_gives_zero_gradient(spec, observation):
    store = init_random_weights(spec, 2).tensors
    store["head.policy.kernel"] = np.zeros_like(store["head.policy.kernel"])
    store["head.policy.bias"] = np.zeros_like(store["head.policy.bias"])
    weights = WeightStore(store)
    trace = forward_with_capture(spec, weights, observation)
    for target in TARGETS:
        grad = backward_to_input(trace, target)
        assert grad.shape == (3, 64, 64)
        assert (grad == 0).all()


def test_gradient_matches_finite_differences(spec, observation):
    weights = init_random_weights(spec, 3)
    checks = collect_fd_checks(spec, weights, observation, TARGETS, n_coords=10)
    assert max_rel_error(checks) < 1e-2


def test_group_gradient_is_sum_of_prob_gradients(spec, weights, observation):
    trace = forward_with_capture(spec, weights, observation)
    ga = backward_to_input(trace, ("prob", 4))
    gb = backward_to_input(trace, ("prob", 9))
    gsum = backward_to_input(trace, ("prob_group", (4, 9)))
    np.testing.assert_allclose(ga + gb, gsum, atol=1e-6)


def test_prob_target_equals_singleton_group(spec, weights, observation):
    trace = forward_with_capture(spec, weights, observation)
    np.testing.assert_array_equal(
        backward_to_input(trace, ("prob", 6)),
        backward_to_input(trace, ("prob_group", (6,))),
    )


def test_target_index_out_of_range(spec, weights, observation):
    trace = forward_with_capture(spec, weights, observation)
    for target in (("logit", 15), ("logit", -1), ("prob", 99), ("prob_group", (3, 15))):
        with pytest.raises(TargetRangeError):
            backward_to_input(trace, target)


def test_gradient_on_tiny_network_all_coords(tiny_spec, tiny_weights):
    # exhaustive FD over every input coordinate of the small variant
    rng = np.random.default_rng(9)
    x = rng.uniform(0, 1, tiny_spec.input_shape).astype(np.float32)
    trace = forward_with_capture(tiny_spec, tiny_weights, x)
    grad = backward_to_input(trace, ("logit", 0))

    from mazelens.nn import evaluate_logits

    x64 = x.astype(np.float64)
    eps = 1e-5  # far below this net's kink spacing
    bad = 0
    for idx in np.ndindex(x.shape):
        xp, xm = x64.copy(), x64.copy()
        xp[idx] += eps
        xm[idx] -= eps
        fd = (
            evaluate_logits(tiny_spec, tiny_weights, xp)[0]
            - evaluate_logits(tiny_spec, tiny_weights, xm)[0]
        ) / (2 * eps)
        if abs(fd - grad[idx]) > 1e-4 * max(1.0, abs(fd)):
            bad += 1
    assert bad == 0
