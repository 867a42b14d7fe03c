"""Exhaustive enumerators feeding the verification suites.

All generators stream lazily in a deterministic order and enforce their
budget before expanding, so tests can consume a prefix and stop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import BudgetExceeded
from .grid import DualCycle, GridDual
from .walks import DirectedPath, Walk


@dataclass(frozen=True)
class EnumBudget:
    max_walk_len: int = 10
    max_cycle_len: int = 64
    max_vertices: int = 36
    wall_clock_cap: Optional[float] = None  # seconds

    def __post_init__(self):
        if self.max_walk_len < 1 or self.max_cycle_len < 1 or self.max_vertices < 1:
            raise ValueError("budget fields must be positive")

    def deadline(self) -> Optional[float]:
        return None if self.wall_clock_cap is None else time.monotonic() + self.wall_clock_cap


def _check_deadline(deadline: Optional[float]):
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetExceeded("wall clock cap exceeded")


def enumerate_walks(g: GridDual, frm, to, budget: EnumBudget) -> Iterator[Walk]:
    """Every walk frm -> to with at most max_walk_len edges, once each.

    DFS in lexicographic edge order over the dual adjacency (which includes
    parallel edges as distinct steps).
    """
    if g.m * g.n > budget.max_vertices:
        raise BudgetExceeded("grid exceeds budget.max_vertices")
    deadline = budget.deadline()
    start = g.dv_id[frm]
    goal = g.dv_id[to]
    adj = g.dual_adj

    verts = [start]
    edges: list[int] = []

    def rec() -> Iterator[Walk]:
        _check_deadline(deadline)
        if verts[-1] == goal:
            yield Walk(
                tuple(g.dual_vertices[v] for v in verts),
                tuple(g.primal_edges[e] for e in edges),
            )
        if len(edges) == budget.max_walk_len:
            return
        for (nbr, eid) in adj[verts[-1]]:
            verts.append(nbr)
            edges.append(eid)
            yield from rec()
            verts.pop()
            edges.pop()

    yield from rec()


def enumerate_closed_walks(g: GridDual, at, max_len: int,
                           forbidden_verts=()) -> Iterator[Walk]:
    """Closed walks at a vertex with 2..max_len edges avoiding given vertices.

    Used to build all walks with a fixed loop-erasure: an excursion inserted
    at erasure position i must avoid every earlier erasure vertex.
    """
    start = g.dv_id[at]
    banned = {g.dv_id[v] for v in forbidden_verts}
    adj = g.dual_adj
    verts = [start]
    edges: list[int] = []

    def rec() -> Iterator[Walk]:
        if edges and verts[-1] == start:
            yield Walk(
                tuple(g.dual_vertices[v] for v in verts),
                tuple(g.primal_edges[e] for e in edges),
            )
        if len(edges) == max_len:
            return
        for (nbr, eid) in adj[verts[-1]]:
            if nbr in banned:
                continue
            verts.append(nbr)
            edges.append(eid)
            yield from rec()
            verts.pop()
            edges.pop()

    yield from rec()


def enumerate_walks_with_erasure(g: GridDual, d: DirectedPath,
                                 max_total_len: int) -> Iterator[Walk]:
    """All walks whose loop-erasure is exactly d, up to max_total_len edges.

    A walk with erasure d is d with an optional closed excursion bundle at
    each path position; the bundle at position i may not touch positions
    < i. Bundles are themselves walks, so enumerating bundles per position
    and splicing yields each walk exactly once.
    """
    budget = max_total_len - len(d)
    if budget < 0:
        return
    positions = len(d.verts)

    def rec(pos: int, remaining: int, verts: tuple, edges: tuple) -> Iterator[Walk]:
        if pos == positions:
            yield Walk(verts, edges)
            return
        v = d.verts[pos]
        tail_v = d.verts[pos + 1:]
        tail_e = d.edges[pos:]

        def advance(nverts, nedges) -> Iterator[Walk]:
            if pos + 1 == positions:
                yield Walk(nverts, nedges)
            else:
                yield from rec(pos + 1, remaining - (len(nedges) - len(edges)),
                               nverts, nedges)

        # No excursion here.
        if pos + 1 < positions:
            yield from rec(pos + 1, remaining, verts + (tail_v[0],), edges + (tail_e[0],))
        else:
            yield Walk(verts, edges)
        # Each possible excursion bundle (a closed walk avoiding earlier
        # erasure vertices), then continue.
        if remaining >= 2:
            for bundle in enumerate_closed_walks(g, v, remaining, d.verts[:pos]):
                nverts = verts + bundle.verts[1:]
                nedges = edges + bundle.edges
                if pos + 1 < positions:
                    yield from rec(pos + 1, remaining - len(bundle.edges),
                                   nverts + (tail_v[0],), nedges + (tail_e[0],))
                else:
                    yield Walk(nverts, nedges)

    yield from rec(0, budget, (d.verts[0],), ())


def enumerate_cycles(g: GridDual, budget: EnumBudget) -> Iterator[DualCycle]:
    """Each simple dual cycle once, as its sorted crossing set.

    Anchors every cycle at its smallest incident dual vertex id; paths only
    visit larger ids, and orientation plus parallel-edge ties are broken
    canonically so nothing is emitted twice.
    """
    if g.m * g.n > budget.max_vertices:
        raise BudgetExceeded("grid exceeds budget.max_vertices")
    deadline = budget.deadline()
    adj = g.dual_adj
    n = len(g.dual_vertices)
    max_len = budget.max_cycle_len

    for s in range(n):
        # Path state: s -> ... -> current, intermediate vertices all > s.
        path_edges: list[int] = []
        on_path = [False] * n
        on_path[s] = True

        def rec(cur: int, first_eid: int) -> Iterator[DualCycle]:
            _check_deadline(deadline)
            for (nbr, eid) in adj[cur]:
                if nbr == s:
                    if len(path_edges) >= 1 and eid != first_eid:
                        # Canonical orientation: compare second vertex of the
                        # traversal against the last; for 2-cycles compare
                        # edge ids instead.
                        second = g.dual_endpoints[first_eid]
                        second_v = second[0] if second[1] == s else second[1]
                        if second_v == cur:
                            if first_eid < eid:
                                yield DualCycle(frozenset(
                                    g.primal_edges[e] for e in path_edges + [eid]))
                        elif second_v < cur:
                            yield DualCycle(frozenset(
                                g.primal_edges[e] for e in path_edges + [eid]))
                    continue
                if nbr < s or on_path[nbr]:
                    continue
                if len(path_edges) + 2 > max_len:
                    continue
                on_path[nbr] = True
                path_edges.append(eid)
                yield from rec(nbr, first_eid)
                path_edges.pop()
                on_path[nbr] = False

        for (nbr, eid) in adj[s]:
            if nbr < s:
                continue
            if nbr == s:
                continue
            if 2 > max_len:
                break
            on_path[nbr] = True
            path_edges.append(eid)
            yield from rec(nbr, eid)
            path_edges.pop()
            on_path[nbr] = False


def enumerate_simple_paths(g: GridDual, frm, to, max_len: int,
                           forbidden_edge=None) -> Iterator[DirectedPath]:
    """Simple dual paths frm -> to, optionally avoiding one crossing."""
    start = g.dv_id[frm]
    goal = g.dv_id[to]
    banned_eid = None if forbidden_edge is None else g.pe_id[forbidden_edge]
    adj = g.dual_adj
    verts = [start]
    edges: list[int] = []
    visited = [False] * len(g.dual_vertices)
    visited[start] = True

    def rec() -> Iterator[DirectedPath]:
        if verts[-1] == goal:
            yield DirectedPath(
                tuple(g.dual_vertices[v] for v in verts),
                tuple(g.primal_edges[e] for e in edges),
            )
            return
        if len(edges) == max_len:
            return
        for (nbr, eid) in adj[verts[-1]]:
            if visited[nbr] or eid == banned_eid:
                continue
            visited[nbr] = True
            verts.append(nbr)
            edges.append(eid)
            yield from rec()
            verts.pop()
            edges.pop()
            visited[nbr] = False

    yield from rec()
