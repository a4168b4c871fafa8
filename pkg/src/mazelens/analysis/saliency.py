"""Saliency maps: input-gradient magnitude for a policy target.

A target is either one raw output's logit or the combined softmax
probability of one effective action group; the gradient comes from the
network's analytic backward pass and is reduced across the three input
channels to a 64x64 field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, TargetRangeError
from ..nn.network import ActivationTrace, backward_to_input
from .actions import ACTIONS, DEFAULT_ACTION_TABLE, ActionTable

REDUCTIONS = ("l2", "sum")


@dataclass(frozen=True)
class SaliencyMap:
    values: np.ndarray  # (64, 64) float32
    target: str  # "logit:3" or "group:UP"
    reduction: str


def parse_target(text: str):
    """Parse a CLI-style target descriptor: 'logit:K' or 'group:NAME'."""
    kind, _, arg = text.partition(":")
    if kind == "logit":
        try:
            return ("logit", int(arg))
        except ValueError as exc:
            raise TargetRangeError(f"bad logit index {arg!r}") from exc
    if kind == "group":
        name = arg.upper()
        if name not in ACTIONS:
            raise TargetRangeError(f"unknown action group {arg!r}; one of {ACTIONS}")
        return ("group", name)
    raise TargetRangeError(f"bad target {text!r}; use 'logit:K' or 'group:NAME'")


def saliency_for(
    trace: ActivationTrace,
    target,
    reduction: str = "l2",
    table: ActionTable = DEFAULT_ACTION_TABLE,
) -> SaliencyMap:
    """Gradient heatmap over the input for ("logit", k) or ("group", name).

    Group targets differentiate the summed softmax probability of the
    group's raw outputs. Channel reduction is L2 norm by default, or the
    signed channel sum.
    """
    if reduction not in REDUCTIONS:
        raise ParameterError(f"reduction must be one of {REDUCTIONS}, got {reduction!r}")
    kind, payload = target
    if kind == "logit":
        grad = backward_to_input(trace, ("logit", int(payload)))
        label = f"logit:{int(payload)}"
    elif kind == "group":
        indices = table.indices_for(str(payload))
        grad = backward_to_input(trace, ("prob_group", indices))
        label = f"group:{payload}"
    else:
        raise TargetRangeError(f"unknown saliency target kind {kind!r}")
    if reduction == "l2":
        field = np.sqrt((grad.astype(np.float64) ** 2).sum(axis=0))
    else:
        field = grad.astype(np.float64).sum(axis=0)
    return SaliencyMap(
        values=field.astype(np.float32), target=label, reduction=reduction
    )
