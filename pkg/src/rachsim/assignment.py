"""Per-cell PRACH-ConfigIndex assignment schemes."""
from __future__ import annotations

from pathlib import Path

from .prach import USABLE_INDICES, check_index


class AssignmentInfeasible(RuntimeError):
    def __init__(self, vertex):
        super().__init__(f"no feasible PRACH-ConfigIndex for cell {vertex}")
        self.vertex = vertex


def assign_same(sites, index=1) -> dict:
    index = check_index(index)
    return {s.id: index for s in sites}


def assign_alternating_rows(rows, palette=USABLE_INDICES) -> dict:
    """Two values alternate along each row; even and odd rows use different pairs.

    With palette (a, b, c, d) rows cycle through (a, b), (c, d), (b, a), (d, c):
    every reuse of a pair flips its order.
    """
    palette = tuple(check_index(p) for p in palette)
    if len(palette) != 4 or len(set(palette)) != 4:
        raise ValueError(f"alternating rows needs 4 distinct indices, got {palette}")
    a, b, c, d = palette
    pairs = ((a, b), (c, d), (b, a), (d, c))
    out = {}
    for r, row in enumerate(rows):
        pair = pairs[r % 4]
        for j, sid in enumerate(row):
            out[sid] = pair[j % 2]
    return out


def assign_greedy_coloring(graph, palette=USABLE_INDICES, rng=None) -> dict:
    """Greedy neighbor-distinct coloring.

    Vertices are visited by descending degree, then id; each takes the first
    palette entry not used by an already colored neighbor. ``rng`` is accepted
    for API symmetry and not consumed.
    """
    palette = [check_index(p) for p in palette]
    order = sorted(graph.vertices, key=lambda v: (-graph.degree(v), v))
    out = {}
    for v in order:
        taken = {out[u] for u in graph.neighbors(v) if u in out}
        choice = next((p for p in palette if p not in taken), None)
        if choice is None:
            raise AssignmentInfeasible(v)
        out[v] = choice
    return out


def verify_neighbor_distinct(graph, assignment) -> bool:
    missing = [v for v in graph.vertices if v not in assignment]
    if missing:
        raise ValueError(f"assignment missing cells: {missing}")
    return all(assignment[a] != assignment[b] for a, b in graph.adjacency)


def load_assignment(path, site_ids, palette=USABLE_INDICES) -> dict:
    """Read ``site_id,prach_index`` lines; blank lines and ``#`` comments are skipped."""
    allowed = {check_index(p) for p in palette}
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            sid_text, idx_text = (t.strip() for t in line.split(","))
            sid, idx = int(sid_text), int(idx_text)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected 'site_id,prach_index', got {raw!r}") from None
        if idx not in allowed:
            raise ValueError(f"{path}:{lineno}: index {idx} not in palette {sorted(allowed)}")
        if sid in out:
            raise ValueError(f"{path}:{lineno}: duplicate site {sid}")
        out[sid] = idx
    missing = sorted(set(site_ids) - set(out))
    if missing:
        raise ValueError(f"{path}: no index for sites {missing}")
    extra = sorted(set(out) - set(site_ids))
    if extra:
        raise ValueError(f"{path}: unknown sites {extra}")
    return out
