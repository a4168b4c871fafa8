"""Behavioral probe for trained weights: no-cheese navigation bias.

Random weights tell you nothing here; this harness exists for
user-supplied trained policies. It drives a greedy rollout (argmax of
the 5-way effective-action distribution; blocked moves and NOOP hold
position) over cheese-free mazes and reports where the agent ends up
and how much probability mass it puts on UP/RIGHT along the way.
Report-only: there is no pass threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import maze as maze_mod
from .analysis import DEFAULT_ACTION_TABLE, ActionTable, action_distribution
from .analysis.actions import ACTIONS
from .nn import NetworkSpec, evaluate_logits

_MOVES = {"UP": (-1, 0), "DOWN": (1, 0), "LEFT": (0, -1), "RIGHT": (0, 1)}


@dataclass(frozen=True)
class ProbeReport:
    runs: int
    world_size: int
    steps_per_run: int
    top_right_cell_rate: float  # terminal cell is exactly the top-right room
    top_right_quadrant_rate: float  # terminal cell in the top-right quadrant
    mean_up_right_mass: float  # average UP+RIGHT probability per step

    def lines(self) -> list[str]:
        return [
            f"no-cheese probe over {self.runs} mazes (size {self.world_size}, "
            f"{self.steps_per_run} steps each)",
            f"  terminal cell == top-right room: {self.top_right_cell_rate:.1%}",
            f"  terminal cell in top-right quadrant: {self.top_right_quadrant_rate:.1%}",
            f"  mean per-step UP+RIGHT probability mass: {self.mean_up_right_mass:.3f}",
        ]


def rollout(spec, weights, grid, steps, table: ActionTable):
    """Greedy walk; returns (terminal cell, per-step UP+RIGHT mass)."""
    pos = grid.mouse
    masses = []
    up, right = ACTIONS.index("UP"), ACTIONS.index("RIGHT")
    for _ in range(steps):
        current = maze_mod.place_mouse(grid, *pos) if pos != grid.mouse else grid
        obs = maze_mod.render_observation(current)
        logits = evaluate_logits(spec, weights, obs)
        dist = action_distribution(logits, table)
        masses.append(float(dist[up] + dist[right]))
        action = ACTIONS[int(np.argmax(dist))]
        nxt = pos
        if action != "NOOP":
            dr, dc = _MOVES[action]
            cand = (pos[0] + dr, pos[1] + dc)
            if (
                0 <= cand[0] < grid.size
                and 0 <= cand[1] < grid.size
                and grid.is_free(*cand)
            ):
                nxt = cand
        if nxt == pos:
            break  # greedy stepping is Markov in position: stuck is final
        pos = nxt
    return pos, masses


def run_no_cheese_probe(
    weights,
    spec: NetworkSpec | None = None,
    runs: int = 100,
    world_size: int = 15,
    base_seed: int = 0,
    steps: int | None = None,
    table: ActionTable = DEFAULT_ACTION_TABLE,
) -> ProbeReport:
    spec = spec or NetworkSpec()
    steps = steps or world_size * world_size
    top_right = (1, world_size - 2)
    hits = quadrant = 0
    masses: list[float] = []
    half = world_size // 2
    for i in range(runs):
        grid = maze_mod.remove_cheese(maze_mod.generate_kruskal(base_seed + i, world_size))
        terminal, step_masses = rollout(spec, weights, grid, steps, table)
        masses.extend(step_masses)
        if terminal == top_right:
            hits += 1
        if terminal[0] <= half and terminal[1] >= half:
            quadrant += 1
    return ProbeReport(
        runs=runs,
        world_size=world_size,
        steps_per_run=steps,
        top_right_cell_rate=hits / runs,
        top_right_quadrant_rate=quadrant / runs,
        mean_up_right_mass=float(np.mean(masses)) if masses else 0.0,
    )
