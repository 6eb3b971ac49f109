"""Checkerboard grid on the work surface.

Cell (i, j) means row i, column j of the displayed board; the corner
lattice point (i, j) sits at (s*i, s*j, 0) in the workspace frame, where s
is the metric square size. A board with ``rows`` x ``cols`` squares has
(rows+1) x (cols+1) lattice corners. Target squares are numbered cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownTargetError


@dataclass(frozen=True)
class GridConfig:
    """Board geometry plus the numbered-target layout.

    ``target_map`` maps target id -> (i, j) cell. The corner file origin
    convention: (i, j) = (row, column) of the top-left corner as listed in
    the corner file, row index i along +X, column index j along +Y.
    """

    square_size: float
    rows: int
    cols: int
    target_map: dict[int, tuple[int, int]] = field(default_factory=dict)
    origin_note: str = "corner (0,0) is the top-left lattice corner; i = row along +X, j = column along +Y"

    def __post_init__(self):
        if self.square_size <= 0:
            raise ValueError(f"square_size must be positive, got {self.square_size}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid needs at least one row and one column of squares")
        seen_cells = set()
        for tid, (i, j) in self.target_map.items():
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise ValueError(f"target {tid} cell ({i}, {j}) outside {self.rows}x{self.cols} grid")
            if (i, j) in seen_cells:
                raise ValueError(f"target cell ({i}, {j}) assigned to more than one id")
            seen_cells.add((i, j))
        object.__setattr__(
            self, "target_map", {int(k): (int(v[0]), int(v[1])) for k, v in self.target_map.items()}
        )

    def corner_indices(self) -> list[tuple[int, int]]:
        """All lattice corner indices, row-major."""
        return [(i, j) for i in range(self.rows + 1) for j in range(self.cols + 1)]

    def in_bounds(self, i: int, j: int) -> bool:
        return 0 <= i <= self.rows and 0 <= j <= self.cols


def grid_points(config: GridConfig) -> dict[tuple[int, int], np.ndarray]:
    """Workspace-frame position of every lattice corner: (i,j) -> (s*i, s*j, 0)."""
    s = config.square_size
    return {
        (i, j): np.array([s * i, s * j, 0.0])
        for i, j in config.corner_indices()
    }


def corner_position(config: GridConfig, i: int, j: int) -> np.ndarray:
    return np.array([config.square_size * i, config.square_size * j, 0.0])


def target_center(config: GridConfig, target_id: int) -> np.ndarray:
    """Workspace-frame center of the numbered target square."""
    try:
        i, j = config.target_map[int(target_id)]
    except (KeyError, ValueError) as exc:
        raise UnknownTargetError(f"target id {target_id!r} not in grid config") from exc
    s = config.square_size
    return np.array([s * (i + 0.5), s * (j + 0.5), 0.0])


def default_target_map(rows: int, cols: int, count: int = 20) -> dict[int, tuple[int, int]]:
    """Number the light squares of a checkerboard 1..count in row-major order.

    Light squares are the cells with even i+j, matching a board whose
    top-left square is light.
    """
    mapping: dict[int, tuple[int, int]] = {}
    tid = 1
    for i in range(rows):
        for j in range(cols):
            if (i + j) % 2 == 0:
                mapping[tid] = (i, j)
                tid += 1
                if tid > count:
                    return mapping
    if tid <= count:
        raise ValueError(f"grid {rows}x{cols} has fewer than {count} light squares")
    return mapping
