"""Hexagonal eNodeB layouts, uniform UE drops and the cell adjacency graph."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SQRT3 = math.sqrt(3.0)

# Axial direction vectors walked around a ring, starting east.
_AXIAL_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


@dataclass
class CellSite:
    id: int
    position: tuple
    antenna_height_m: float = 30.0
    prach_index: int | None = None
    row: int = 0
    col: int = 0


@dataclass(frozen=True)
class UeNode:
    id: int
    position: tuple
    height_m: float = 1.0


@dataclass(frozen=True)
class NeighborGraph:
    vertices: tuple
    adjacency: frozenset = field(default_factory=frozenset)

    def neighbors(self, v):
        return sorted(b if a == v else a for a, b in self.adjacency if v in (a, b))

    def degree(self, v) -> int:
        return sum(1 for e in self.adjacency if v in e)

    @property
    def max_degree(self) -> int:
        return max((self.degree(v) for v in self.vertices), default=0)


def hex_ring_axial(n_cells: int):
    """Axial (q, r) coordinates of the first ``n_cells`` cells, center then rings."""
    coords = [(0, 0)]
    ring = 1
    while len(coords) < n_cells:
        # start at the east corner of the ring, then walk the six sides
        q, r = ring, 0
        for dq, dr in _AXIAL_DIRS[2:] + _AXIAL_DIRS[:2]:
            for _ in range(ring):
                coords.append((q, r))
                q, r = q + dq, r + dr
        ring += 1
    return coords[:n_cells]


def hex_grid(n_cells: int, isd_m: float = 200.0, antenna_height_m: float = 30.0):
    """Sites on a hexagonal lattice: center cell at the origin, then complete rings.

    Rows are horizontal lines of cells (bottom row = 0) and columns run
    left-to-right within a row; the alternating-rows assignment relies on them.
    """
    if n_cells < 1:
        raise ValueError(f"n_cells must be >= 1, got {n_cells}")
    if isd_m <= 0:
        raise ValueError(f"isd_m must be positive, got {isd_m}")
    axial = hex_ring_axial(n_cells)
    sites = []
    for i, (q, r) in enumerate(axial):
        x = isd_m * (q + r / 2.0)
        y = isd_m * SQRT3 / 2.0 * r
        sites.append(CellSite(i, (x, y), antenna_height_m))
    r_min = min(r for _, r in axial)
    for row in grid_rows_from_axial(axial):
        for col, sid in enumerate(row):
            sites[sid].row = axial[sid][1] - r_min
            sites[sid].col = col
    return sites


def grid_rows_from_axial(axial):
    by_row = {}
    for sid, (q, r) in enumerate(axial):
        by_row.setdefault(r, []).append((q, sid))
    return [[sid for _, sid in sorted(by_row[r])] for r in sorted(by_row)]


def grid_rows(sites):
    """Site ids grouped into rows, bottom-to-top, each row left-to-right."""
    by_row = {}
    for s in sites:
        by_row.setdefault(s.row, []).append(s)
    return [[s.id for s in sorted(by_row[r], key=lambda s: s.col)] for r in sorted(by_row)]


def simulation_region(sites, isd_m: float):
    """Bounding box of the sites expanded by isd/2: (xmin, ymin, xmax, ymax)."""
    xy = np.array([s.position for s in sites], dtype=float)
    pad = isd_m / 2.0
    return (xy[:, 0].min() - pad, xy[:, 1].min() - pad,
            xy[:, 0].max() + pad, xy[:, 1].max() + pad)


def place_ues_uniform(n_ues: int, region, rng: np.random.Generator, height_m: float = 1.0):
    """Drop ``n_ues`` UEs i.i.d. uniformly over an axis-aligned box.

    Points are drawn row-major, so UE ``i`` always gets the same position for
    a given generator state regardless of ``n_ues``.
    """
    xmin, ymin, xmax, ymax = region
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate region: {region}")
    if n_ues == 0:
        return []
    u = rng.random((n_ues, 2))
    xs = xmin + u[:, 0] * (xmax - xmin)
    ys = ymin + u[:, 1] * (ymax - ymin)
    return [UeNode(i, (float(x), float(y)), height_m) for i, (x, y) in enumerate(zip(xs, ys))]


def neighbor_graph(sites, isd_m: float, rel_tol: float = 1e-6) -> NeighborGraph:
    edges = set()
    for i, a in enumerate(sites):
        for b in sites[i + 1:]:
            d = math.dist(a.position, b.position)
            if isd_m * (1 - rel_tol) <= d <= isd_m * (1 + rel_tol):
                edges.add((min(a.id, b.id), max(a.id, b.id)))
    return NeighborGraph(tuple(s.id for s in sites), frozenset(edges))


def link_distance_m(ue: UeNode, site: CellSite) -> float:
    """3-D UE-to-antenna distance."""
    dx = ue.position[0] - site.position[0]
    dy = ue.position[1] - site.position[1]
    dz = site.antenna_height_m - ue.height_m
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def serving_cell(ue: UeNode, sites, pl) -> int:
    """Id of the site with the lowest path loss; ties go to the lowest id.

    ``pl`` maps a distance in meters to a loss in dB.
    """
    best_id, best_loss = None, math.inf
    for s in sorted(sites, key=lambda s: s.id):
        loss = pl(link_distance_m(ue, s))
        if loss < best_loss:
            best_id, best_loss = s.id, loss
    return best_id
