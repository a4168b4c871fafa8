"""Procedural maze model.

World grids are odd-sized squares. Rooms live at odd-odd coordinates,
walls fill the border and the even-even lattice points, and generation
carves corridors between adjacent rooms until the rooms form a spanning
tree, which guarantees exactly one simple path between any two free
cells. Grids are values: every edit returns a new grid.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
import random

import numpy as np

from .errors import FormatError, ParameterError, PlacementError

BLOCKED = 0
FREE = 1

MIN_SIZE = 3
MAX_SIZE = 63
OBS_SIZE = 64


@dataclass(frozen=True)
class RenderPalette:
    """RGB triplets for the four pixel roles. Values are placeholders
    for whatever a trained model actually saw; always configurable."""

    block: tuple[int, int, int] = (0x3C, 0x2A, 0x14)
    floor: tuple[int, int, int] = (0xBF, 0xA6, 0x6A)
    cheese: tuple[int, int, int] = (0xFF, 0xE9, 0x3E)
    mouse: tuple[int, int, int] = (0x80, 0x80, 0x80)

    def __post_init__(self) -> None:
        colors = {self.block, self.floor, self.cheese, self.mouse}
        if len(colors) != 4:
            raise ParameterError("palette colors must be four distinct RGB triplets")


DEFAULT_PALETTE = RenderPalette()


@dataclass(frozen=True)
class MazeGrid:
    """Odd-sized world of BLOCKED/FREE cells plus mouse and optional cheese."""

    size: int
    cells: np.ndarray  # (size, size) uint8, write-protected
    mouse: tuple[int, int]
    cheese: tuple[int, int] | None

    def __post_init__(self) -> None:
        self.cells.setflags(write=False)

    def is_free(self, row: int, col: int) -> bool:
        return bool(self.cells[row, col] == FREE)

    def content_key(self) -> str:
        """Stable identity of the full grid state (cache key component)."""
        return to_text(self)


def _check_size(world_size: int) -> None:
    if world_size % 2 == 0 or not MIN_SIZE <= world_size <= MAX_SIZE:
        raise ParameterError(
            f"world size must be odd and in [{MIN_SIZE}, {MAX_SIZE}], got {world_size}"
        )


def room_positions(world_size: int) -> list[tuple[int, int]]:
    n = (world_size - 1) // 2
    return [(2 * i + 1, 2 * j + 1) for i in range(n) for j in range(n)]


def generate_kruskal(
    seed: int,
    world_size: int,
    mouse: tuple[int, int] | None = None,
    cheese: tuple[int, int] | None = None,
) -> MazeGrid:
    """Randomized-Kruskal maze: shuffle the room-adjacency edges, then
    union-find carve until the rooms span. Deterministic per (seed, size).

    Defaults put the mouse in the bottom-left room and the cheese in the
    top-right room; a size-3 world has a single room, so the cheese is
    omitted there.
    """
    _check_size(world_size)
    n = (world_size - 1) // 2
    cells = np.zeros((world_size, world_size), dtype=np.uint8)
    for r, c in room_positions(world_size):
        cells[r, c] = FREE

    edges = []
    for i in range(n):
        for j in range(n):
            if i + 1 < n:
                edges.append(((i, j), (i + 1, j)))
            if j + 1 < n:
                edges.append(((i, j), (i, j + 1)))
    rng = random.Random(seed)
    rng.shuffle(edges)

    parent = {room: room for i in range(n) for room in [(i, j) for j in range(n)]}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            wall_r = (2 * a[0] + 1 + 2 * b[0] + 1) // 2
            wall_c = (2 * a[1] + 1 + 2 * b[1] + 1) // 2
            cells[wall_r, wall_c] = FREE

    if mouse is None:
        mouse = (world_size - 2, 1)  # bottom-left room
    if cheese is None and n > 1:
        cheese = (1, world_size - 2)  # top-right room
    grid = MazeGrid(size=world_size, cells=cells, mouse=mouse, cheese=cheese)
    if not grid.is_free(*mouse):
        raise PlacementError(f"mouse position {mouse} is not a FREE cell")
    if cheese is not None:
        if not grid.is_free(*cheese):
            raise PlacementError(f"cheese position {cheese} is not a FREE cell")
        if cheese == mouse:
            raise PlacementError("mouse and cheese must occupy distinct cells")
    return grid


def set_cell(grid: MazeGrid, row: int, col: int, kind: int) -> MazeGrid:
    """Toggle a cell. Refuses to BLOCK a cell holding an entity; move the
    entity first. Editing may break the spanning-tree property, which is
    reported by validate_grid, never enforced here."""
    if not (0 <= row < grid.size and 0 <= col < grid.size):
        raise ParameterError(f"cell ({row}, {col}) outside world of size {grid.size}")
    if kind not in (BLOCKED, FREE):
        raise ParameterError(f"cell kind must be BLOCKED or FREE, got {kind!r}")
    if kind == BLOCKED:
        if (row, col) == grid.mouse:
            raise PlacementError("cannot block the mouse's cell")
        if grid.cheese is not None and (row, col) == grid.cheese:
            raise PlacementError("cannot block the cheese's cell")
    cells = grid.cells.copy()
    cells[row, col] = kind
    return replace(grid, cells=cells)


def place_mouse(grid: MazeGrid, row: int, col: int) -> MazeGrid:
    _check_entity_target(grid, row, col, "mouse")
    return replace(grid, mouse=(row, col))


def place_cheese(grid: MazeGrid, row: int, col: int) -> MazeGrid:
    _check_entity_target(grid, row, col, "cheese")
    return replace(grid, cheese=(row, col))


def remove_cheese(grid: MazeGrid) -> MazeGrid:
    return replace(grid, cheese=None)


def _check_entity_target(grid: MazeGrid, row: int, col: int, entity: str) -> None:
    if not (0 <= row < grid.size and 0 <= col < grid.size):
        raise ParameterError(f"cell ({row}, {col}) outside world of size {grid.size}")
    if not grid.is_free(row, col):
        raise PlacementError(f"cannot place {entity} on a BLOCKED cell ({row}, {col})")
    other = grid.cheese if entity == "mouse" else grid.mouse
    if other is not None and (row, col) == other:
        raise PlacementError("mouse and cheese must occupy distinct cells")


@dataclass(frozen=True)
class ValidityReport:
    room_count: int
    corridor_count: int
    connected: bool
    is_spanning_tree: bool
    problems: tuple[str, ...]


def validate_grid(grid: MazeGrid) -> ValidityReport:
    """Report (not enforce) whether the grid still looks like a
    generated maze: all rooms FREE and forming a spanning tree."""
    problems: list[str] = []
    rooms = room_positions(grid.size)
    free_rooms = [rc for rc in rooms if grid.is_free(*rc)]
    if len(free_rooms) != len(rooms):
        problems.append("some lattice rooms are blocked")
    free_cells = int(grid.cells.sum())
    corridor_count = free_cells - len(free_rooms)

    reached = 0
    if free_rooms:
        seen = {free_rooms[0]}
        queue = deque([free_rooms[0]])
        while queue:
            r, c = queue.popleft()
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                nr, nc = r + dr, c + dc
                if 0 <= nr < grid.size and 0 <= nc < grid.size:
                    if grid.is_free(nr, nc) and (nr, nc) not in seen:
                        seen.add((nr, nc))
                        queue.append((nr, nc))
        reached = sum(1 for rc in free_rooms if rc in seen)
    connected = reached == len(free_rooms) and bool(free_rooms)
    if not connected:
        problems.append("free rooms are not all connected")
    is_tree = connected and corridor_count == len(free_rooms) - 1
    if connected and not is_tree:
        problems.append("free cells contain a cycle or stray corridor")
    return ValidityReport(
        room_count=len(free_rooms),
        corridor_count=corridor_count,
        connected=connected,
        is_spanning_tree=is_tree,
        problems=tuple(problems),
    )


def solve_bfs(
    grid: MazeGrid, start: tuple[int, int], goal: tuple[int, int]
) -> list[tuple[int, int]] | None:
    """Shortest path by BFS, expansion order up/down/left/right.
    Returns the inclusive cell list, or None when unreachable."""
    for name, (r, c) in (("start", start), ("goal", goal)):
        if not grid.is_free(r, c):
            raise ParameterError(f"{name} cell ({r}, {c}) is not FREE")
    start, goal = tuple(start), tuple(goal)
    if start == goal:
        return [start]
    parents: dict[tuple[int, int], tuple[int, int]] = {start: start}
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if not (0 <= nr < grid.size and 0 <= nc < grid.size):
                continue
            if not grid.is_free(nr, nc) or (nr, nc) in parents:
                continue
            parents[(nr, nc)] = (r, c)
            if (nr, nc) == goal:
                path = [goal]
                while path[-1] != start:
                    path.append(parents[path[-1]])
                path.reverse()
                return path
            queue.append((nr, nc))
    return None


def _pixel_bounds(world_size: int) -> list[int]:
    # round-half-up; exact ties cannot occur for odd world sizes
    return [int(np.floor(i * OBS_SIZE / world_size + 0.5)) for i in range(world_size + 1)]


def render_observation(
    grid: MazeGrid, palette: RenderPalette = DEFAULT_PALETTE
) -> np.ndarray:
    """Nearest-neighbor render to the (3, 64, 64) float32 observation,
    values in [0, 1]. Entities paint their full cell footprint."""
    img = render_rgb(grid, palette)
    return np.ascontiguousarray(img.transpose(2, 0, 1)).astype(np.float32) / 255.0


def render_rgb(grid: MazeGrid, palette: RenderPalette = DEFAULT_PALETTE) -> np.ndarray:
    """(64, 64, 3) uint8 image; building block for render_observation
    and for display-scale upscaling."""
    bounds = _pixel_bounds(grid.size)
    img = np.empty((OBS_SIZE, OBS_SIZE, 3), dtype=np.uint8)

    def paint(row: int, col: int, color: tuple[int, int, int]) -> None:
        img[bounds[row] : bounds[row + 1], bounds[col] : bounds[col + 1]] = color

    for r in range(grid.size):
        for c in range(grid.size):
            paint(r, c, palette.floor if grid.cells[r, c] == FREE else palette.block)
    if grid.cheese is not None:
        paint(*grid.cheese, palette.cheese)
    paint(*grid.mouse, palette.mouse)
    return img


def upscale_display(rgb: np.ndarray, scale: int = 8) -> np.ndarray:
    """Nearest-neighbor upscale for display only (e.g. 64 -> 512)."""
    if scale < 1:
        raise ParameterError(f"scale must be >= 1, got {scale}")
    return np.repeat(np.repeat(rgb, scale, axis=0), scale, axis=1)


def to_text(grid: MazeGrid) -> str:
    """Maze text format: 'W=<n>' then W rows of {#, ., M, C}."""
    lines = [f"W={grid.size}"]
    for r in range(grid.size):
        row_chars = []
        for c in range(grid.size):
            if (r, c) == grid.mouse:
                row_chars.append("M")
            elif grid.cheese is not None and (r, c) == grid.cheese:
                row_chars.append("C")
            else:
                row_chars.append("." if grid.cells[r, c] == FREE else "#")
        lines.append("".join(row_chars))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> MazeGrid:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("W="):
        raise FormatError("maze text must start with a 'W=<n>' line")
    try:
        size = int(lines[0][2:])
    except ValueError as exc:
        raise FormatError(f"bad size line {lines[0]!r}") from exc
    _check_size(size)
    if len(lines) < size + 1:
        raise FormatError(f"expected {size} rows, found {len(lines) - 1}")
    cells = np.zeros((size, size), dtype=np.uint8)
    mouse = None
    cheese = None
    for r in range(size):
        row = lines[r + 1]
        if len(row) != size:
            raise FormatError(f"row {r} has length {len(row)}, expected {size}")
        for c, ch in enumerate(row):
            if ch == "#":
                continue
            if ch == ".":
                cells[r, c] = FREE
            elif ch == "M":
                if mouse is not None:
                    raise FormatError("more than one mouse in maze text")
                mouse = (r, c)
                cells[r, c] = FREE
            elif ch == "C":
                if cheese is not None:
                    raise FormatError("more than one cheese in maze text")
                cheese = (r, c)
                cells[r, c] = FREE
            else:
                raise FormatError(f"illegal character {ch!r} at row {r} col {c}")
    if mouse is None:
        raise FormatError("maze text has no mouse")
    return MazeGrid(size=size, cells=cells, mouse=mouse, cheese=cheese)
