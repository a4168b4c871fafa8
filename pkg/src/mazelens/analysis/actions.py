"""Effective-action aggregation.

The policy head emits 15 raw outputs, but the agent only has 5 effective
actions: the four non-diagonal moves and a do-nothing. The default table
maps raw index 1/3/5/7 to LEFT/DOWN/UP/RIGHT, resolves the diagonal
combinations 0/2/6/8 to their horizontal component, and leaves the
remaining 7 indices as NOOP. The mapping is configurable; only the
5/15/7 arithmetic is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, TargetRangeError
from ..nn.ops import softmax

ACTIONS = ("UP", "DOWN", "LEFT", "RIGHT", "NOOP")
NUM_OUTPUTS = 15


@dataclass(frozen=True)
class ActionTable:
    """Maps each of the 15 raw output indices to an effective action."""

    mapping: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.mapping) != NUM_OUTPUTS:
            raise ParameterError(
                f"action table must map all {NUM_OUTPUTS} outputs, got {len(self.mapping)}"
            )
        bad = [a for a in self.mapping if a not in ACTIONS]
        if bad:
            raise ParameterError(f"unknown effective action(s) {sorted(set(bad))}")

    def indices_for(self, action: str) -> list[int]:
        if action not in ACTIONS:
            raise TargetRangeError(
                f"unknown effective action {action!r}; one of {ACTIONS}"
            )
        return [i for i, a in enumerate(self.mapping) if a == action]

    def noop_count(self) -> int:
        return len(self.indices_for("NOOP"))


DEFAULT_ACTION_TABLE = ActionTable(
    mapping=(
        "LEFT",   # 0: left+down combo -> horizontal component
        "LEFT",   # 1
        "LEFT",   # 2: left+up combo
        "DOWN",   # 3
        "NOOP",   # 4
        "UP",     # 5
        "RIGHT",  # 6: right+down combo
        "RIGHT",  # 7
        "RIGHT",  # 8: right+up combo
        "NOOP",   # 9
        "NOOP",   # 10
        "NOOP",   # 11
        "NOOP",   # 12
        "NOOP",   # 13
        "NOOP",   # 14
    )
)
assert DEFAULT_ACTION_TABLE.noop_count() == 7


def action_distribution(
    logits: np.ndarray, table: ActionTable = DEFAULT_ACTION_TABLE
) -> np.ndarray:
    """Softmax over the raw outputs, summed per effective action.
    Returns 5 probabilities in ACTIONS order; sums to 1 within 1e-6."""
    logits = np.asarray(logits)
    if logits.shape != (NUM_OUTPUTS,):
        raise ParameterError(f"expected {NUM_OUTPUTS} logits, got shape {logits.shape}")
    p = softmax(logits.astype(np.float64))
    out = np.zeros(len(ACTIONS), dtype=np.float64)
    for i, action in enumerate(table.mapping):
        out[ACTIONS.index(action)] += p[i]
    return out.astype(np.float32)


def action_distribution_map(
    logits: np.ndarray, table: ActionTable = DEFAULT_ACTION_TABLE
) -> dict[str, float]:
    dist = action_distribution(logits, table)
    return {name: float(v) for name, v in zip(ACTIONS, dist)}
