"""Primal m x n grid, its planar dual, and cycle/partition geometry.

Primal vertices are 1-based (row, col) tuples. Faces of the planar embedding
are indexed by their top-left primal vertex, so Face(i, j) exists for
i in 1..m-1, j in 1..n-1. The single outer-face vertex is the reserved
coordinate OUTER = (0, 0), which can never collide with a face.

Dual edges are identified by the primal edge they cross. This resolves the
parallel edges between a corner face and the outer vertex without any
multigraph bookkeeping: two dual edges are equal iff their crossings are.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import DimensionTooSmall, InfeasiblePartition, NotACycle

OUTER = (0, 0)

PrimalVertex = tuple[int, int]
PrimalEdge = tuple[PrimalVertex, PrimalVertex]
DualVertex = tuple[int, int]


def primal_edge(a: PrimalVertex, b: PrimalVertex) -> PrimalEdge:
    """Canonical (sorted-endpoint) form of the primal edge {a, b}."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class GridDims:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise DimensionTooSmall(f"grid must be at least 2x2, got {self.rows}x{self.cols}")

    @property
    def mn_even(self) -> bool:
        return (self.rows * self.cols) % 2 == 0


@dataclass(frozen=True)
class DualEdge:
    """A dual edge: unordered endpoint pair plus the primal edge it crosses."""

    endpoints: tuple[DualVertex, DualVertex]
    crossing: PrimalEdge


@dataclass(frozen=True)
class DualCycle:
    """A simple cycle of dual edges, stored as the set of crossing primal edges."""

    crossings: frozenset[PrimalEdge]

    def __len__(self):
        return len(self.crossings)

    def sorted_crossings(self) -> list[PrimalEdge]:
        return sorted(self.crossings)


@dataclass(frozen=True)
class Partition2:
    """A 2-partition of the primal vertices into connected interior/exterior."""

    interior: frozenset[PrimalVertex]
    exterior: frozenset[PrimalVertex]

    def side_of(self, v: PrimalVertex) -> int:
        return 0 if v in self.interior else 1

    def separates(self, u: PrimalVertex, v: PrimalVertex) -> bool:
        return (u in self.interior) != (v in self.interior)

    @property
    def imbalance2(self) -> int:
        """Twice the imbalance: | |X| - |Y| |."""
        return abs(len(self.interior) - len(self.exterior))

    @property
    def imbalance(self) -> float:
        return self.imbalance2 / 2.0


@dataclass(frozen=True)
class SubgridWindow:
    """A rectangle of dual face coordinates; never contains OUTER."""

    row_lo: int
    row_hi: int
    col_lo: int
    col_hi: int

    def __post_init__(self):
        if self.row_lo > self.row_hi or self.col_lo > self.col_hi:
            raise ValueError("empty window rectangle")
        if self.row_lo < 1 or self.col_lo < 1:
            raise ValueError("window must lie in face coordinates (>= 1)")

    def contains(self, dv: DualVertex) -> bool:
        if dv == OUTER:
            return False
        return self.row_lo <= dv[0] <= self.row_hi and self.col_lo <= dv[1] <= self.col_hi

    def covers(self, other: "SubgridWindow") -> bool:
        return (self.row_lo <= other.row_lo and other.row_hi <= self.row_hi
                and self.col_lo <= other.col_lo and other.col_hi <= self.col_hi)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.row_hi - self.row_lo + 1, self.col_hi - self.col_lo + 1)

    def edge_count(self) -> int:
        a, b = self.shape
        return a * (b - 1) + b * (a - 1)

    def vertices(self) -> list[DualVertex]:
        return [(i, j) for i in range(self.row_lo, self.row_hi + 1)
                for j in range(self.col_lo, self.col_hi + 1)]


class GridDual:
    """The m x n grid together with its dual and the edge bijection.

    Immutable after construction. Exposes both coordinate-level views
    (primal_vertices, dual_edge, ...) and integer-id adjacency tables used
    by the samplers and enumerators.
    """

    def __init__(self, dims: GridDims):
        self.dims = dims
        m, n = dims.rows, dims.cols
        self.m, self.n = m, n

        self.primal_vertices: list[PrimalVertex] = [
            (i, j) for i in range(1, m + 1) for j in range(1, n + 1)
        ]
        self.pv_id = {v: k for k, v in enumerate(self.primal_vertices)}

        edges = []
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                if j < n:
                    edges.append(primal_edge((i, j), (i, j + 1)))
                if i < m:
                    edges.append(primal_edge((i, j), (i + 1, j)))
        edges.sort()
        self.primal_edges: list[PrimalEdge] = edges
        self.pe_id = {e: k for k, e in enumerate(edges)}

        self.primal_adj: list[list[int]] = [[] for _ in self.primal_vertices]
        for (a, b) in edges:
            self.primal_adj[self.pv_id[a]].append(self.pv_id[b])
            self.primal_adj[self.pv_id[b]].append(self.pv_id[a])
        for lst in self.primal_adj:
            lst.sort()

        # Dual vertices: OUTER first (id 0), then faces row-major.
        self.dual_vertices: list[DualVertex] = [OUTER] + [
            (i, j) for i in range(1, m) for j in range(1, n)
        ]
        self.dv_id = {v: k for k, v in enumerate(self.dual_vertices)}
        self.outer_id = 0

        # crossing primal edge (by id) -> (dual endpoint id, dual endpoint id)
        self.dual_endpoints: list[tuple[int, int]] = [None] * len(edges)  # type: ignore
        for eid, (a, b) in enumerate(edges):
            (i, j), (i2, j2) = a, b
            if i == i2:  # horizontal edge in row i between cols j, j+1
                above = (i - 1, j) if i > 1 else OUTER
                below = (i, j) if i < m else OUTER
                pair = (above, below)
            else:  # vertical edge in col j between rows i, i+1
                left = (i, j - 1) if j > 1 else OUTER
                right = (i, j) if j < n else OUTER
                pair = (left, right)
            u, v = sorted(self.dv_id[p] for p in pair)
            self.dual_endpoints[eid] = (u, v)

        self.dual_adj: list[list[tuple[int, int]]] = [[] for _ in self.dual_vertices]
        for eid, (u, v) in enumerate(self.dual_endpoints):
            self.dual_adj[u].append((v, eid))
            self.dual_adj[v].append((u, eid))
        for lst in self.dual_adj:
            lst.sort()

        # Bitmask tables for fast connectivity on primal vertices. Vertex
        # (i, j) owns bit (i-1)*n + (j-1); east/west are +-1 shifts and
        # south/north are +-n shifts, masked against row wraparound.
        self._nbr_mask = [0] * len(self.primal_vertices)
        for vid, nbrs in enumerate(self.primal_adj):
            mask = 0
            for w in nbrs:
                mask |= 1 << w
            self._nbr_mask[vid] = mask
        self.full_mask = (1 << len(self.primal_vertices)) - 1
        col_first = 0
        col_last = 0
        for i in range(m):
            col_first |= 1 << (i * n)
            col_last |= 1 << (i * n + n - 1)
        self._not_col_first = self.full_mask & ~col_first
        self._not_col_last = self.full_mask & ~col_last
        self.border_mask = 0
        for v, vid in self.pv_id.items():
            if v[0] in (1, m) or v[1] in (1, n):
                self.border_mask |= 1 << vid
        # Border-edge difference masks for O(1) outer-face cut degrees.
        row_top_bits = (1 << (n - 1)) - 1  # (1,1)..(1,n-1)
        row_bot_bits = row_top_bits << ((m - 1) * n)
        self._h_border_probe = row_top_bits | row_bot_bits
        col_probe = 0
        for i in range(m - 1):
            col_probe |= 1 << (i * n)
            col_probe |= 1 << (i * n + n - 1)
        self._v_border_probe = col_probe
        self._boundary_pe_ids = frozenset(
            eid for eid, (u, v) in enumerate(self.dual_endpoints) if u == self.outer_id
        )

    # -- coordinate-level views ------------------------------------------

    def dual_edge(self, e: PrimalEdge) -> DualEdge:
        u, v = self.dual_endpoints[self.pe_id[e]]
        return DualEdge((self.dual_vertices[u], self.dual_vertices[v]), e)

    def dual_endpoints_of(self, e: PrimalEdge) -> tuple[DualVertex, DualVertex]:
        u, v = self.dual_endpoints[self.pe_id[e]]
        return (self.dual_vertices[u], self.dual_vertices[v])

    def dual_degree(self, dv: DualVertex) -> int:
        return len(self.dual_adj[self.dv_id[dv]])

    def outer_degree_of_cut(self, crossings: Iterable[PrimalEdge]) -> int:
        """Number of cut edges whose dual is incident on OUTER."""
        return sum(1 for e in crossings if self.pe_id[e] in self._boundary_pe_ids)

    # -- bitmask helpers --------------------------------------------------

    def mask_of(self, verts: Iterable[PrimalVertex]) -> int:
        mask = 0
        for v in verts:
            mask |= 1 << self.pv_id[v]
        return mask

    def verts_of(self, mask: int) -> frozenset[PrimalVertex]:
        return frozenset(
            self.primal_vertices[k] for k in range(len(self.primal_vertices)) if mask >> k & 1
        )

    def dilate(self, mask: int) -> int:
        """mask plus its 4-neighborhood."""
        n = self.n
        return (mask
                | ((mask << 1) & self._not_col_first)
                | ((mask >> 1) & self._not_col_last)
                | ((mask << n) & self.full_mask)
                | (mask >> n))

    def connected_mask(self, mask: int) -> bool:
        """True iff the induced primal subgraph on `mask` is connected (or empty)."""
        if mask == 0:
            return True
        reach = mask & -mask
        while True:
            grow = self.dilate(reach) & mask
            if grow == reach:
                return reach == mask
            reach = grow

    def flood_mask(self, seed_mask: int, region_mask: int) -> int:
        """Connected component of region_mask containing seed_mask's bits."""
        reach = seed_mask & region_mask
        if reach == 0:
            return 0
        while True:
            grow = self.dilate(reach) & region_mask
            if grow == reach:
                return reach
            reach = grow

    def outer_degree_mask(self, interior_mask: int) -> int:
        """Outer-face dual degree of the cut: bichromatic border edges."""
        h = (interior_mask ^ (interior_mask >> 1)) & self._h_border_probe
        v = (interior_mask ^ (interior_mask >> self.n)) & self._v_border_probe
        return bin(h).count("1") + bin(v).count("1")

    def cut_edge_ids(self, interior_mask: int) -> list[int]:
        out = []
        for eid, (a, b) in enumerate(self.primal_edges):
            if (interior_mask >> self.pv_id[a] & 1) != (interior_mask >> self.pv_id[b] & 1):
                out.append(eid)
        return out


def build(dims: GridDims) -> GridDual:
    """Construct the grid, its dual, and the primal<->dual edge bijection."""
    return GridDual(dims)


def _validate_cycle(g: GridDual, c: DualCycle) -> None:
    if not c.crossings:
        raise NotACycle("empty edge set")
    degree: dict[int, int] = {}
    for e in c.crossings:
        if e not in g.pe_id:
            raise NotACycle(f"unknown primal edge {e}")
        u, v = g.dual_endpoints[g.pe_id[e]]
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    bad = [d for d in degree.values() if d != 2]
    if bad:
        raise NotACycle("a dual vertex has degree != 2 in the edge set")
    # Connectivity over incident dual vertices via the cycle's own edges.
    verts = list(degree)
    incident: dict[int, list[int]] = {u: [] for u in verts}
    for e in c.crossings:
        u, v = g.dual_endpoints[g.pe_id[e]]
        incident[u].append(v)
        incident[v].append(u)
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        u = stack.pop()
        for w in incident[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(verts):
        raise NotACycle("edge set is not connected")
    if len(c.crossings) == 2:
        (e1, e2) = sorted(c.crossings)
        if g.dual_endpoints[g.pe_id[e1]] != g.dual_endpoints[g.pe_id[e2]]:
            raise NotACycle("2-edge set is only a cycle for parallel dual edges")


def cycle_to_partition(g: GridDual, c: DualCycle) -> Partition2:
    """Interior/exterior primal split induced by a dual cycle.

    Flood fill treats the cycle's crossings as walls. The side not touching
    the grid border is the interior; when the cycle passes through OUTER both
    sides touch the border, and the smaller side is the interior (ties break
    toward the side holding the lexicographically smallest vertex).
    """
    _validate_cycle(g, c)
    walls = {g.pe_id[e] for e in c.crossings}
    blocked: list[int] = [0] * len(g.primal_vertices)
    for eid in walls:
        a, b = g.primal_edges[eid]
        ia, ib = g.pv_id[a], g.pv_id[b]
        blocked[ia] |= 1 << ib
        blocked[ib] |= 1 << ia

    sides = []
    remaining = g.full_mask
    while remaining:
        seed = remaining & -remaining
        reach = seed
        while True:
            frontier = reach
            grow = reach
            k = 0
            while frontier:
                if frontier & 1:
                    grow |= g._nbr_mask[k] & ~blocked[k]
                frontier >>= 1
                k += 1
            grow &= remaining
            if grow == reach:
                break
            reach = grow
        sides.append(reach)
        remaining &= ~reach
    if len(sides) != 2:
        raise NotACycle(f"cut induces {len(sides)} primal components, expected 2")

    uses_outer = any(g.pe_id[e] in g._boundary_pe_ids for e in c.crossings)
    s0, s1 = sides
    if not uses_outer:
        interior = s0 if (s0 & g.border_mask) == 0 else s1
    else:
        c0, c1 = bin(s0).count("1"), bin(s1).count("1")
        if c0 != c1:
            interior = s0 if c0 < c1 else s1
        else:
            interior = s0 if (s0 & 1) else s1  # bit 0 is vertex (1,1)
    exterior = s0 if interior is s1 else s1
    return Partition2(g.verts_of(interior), g.verts_of(exterior))


def partition_to_cycle(g: GridDual, p: Partition2) -> DualCycle:
    """The dual cycle whose crossings are exactly the partition's cut edges."""
    if not p.interior or not p.exterior:
        raise InfeasiblePartition("a side is empty")
    if p.interior | p.exterior != frozenset(g.primal_vertices) or (p.interior & p.exterior):
        raise InfeasiblePartition("sides do not partition the vertex set")
    imask = g.mask_of(p.interior)
    if not g.connected_mask(imask) or not g.connected_mask(g.full_mask & ~imask):
        raise InfeasiblePartition("a side is disconnected")
    cut = frozenset(g.primal_edges[eid] for eid in g.cut_edge_ids(imask))
    cyc = DualCycle(cut)
    _validate_cycle(g, cyc)
    return cyc


def is_feasible_mask(g: GridDual, interior_mask: int) -> bool:
    """Fast feasibility test: both sides nonempty and connected."""
    comp = g.full_mask & ~interior_mask
    if interior_mask == 0 or comp == 0:
        return False
    return g.connected_mask(interior_mask) and g.connected_mask(comp)


def enclosed_primal_count(g: GridDual, c: DualCycle) -> int:
    """Number of primal vertices enclosed by the cycle."""
    return len(cycle_to_partition(g, c).interior)


def locally_different(a: Iterable[PrimalEdge], b: Iterable[PrimalEdge],
                      g: GridDual) -> Optional[SubgridWindow]:
    """Smallest face-coordinate window containing the symmetric difference.

    Edges are compared by crossing. Difference edges incident on OUTER
    contribute only their face endpoint. Returns None when the sets agree
    (the empty marker); a finite window always exists otherwise.
    """
    sa, sb = set(a), set(b)
    diff = sa ^ sb
    if not diff:
        return None
    rows, cols = [], []
    for e in diff:
        u, v = g.dual_endpoints_of(e)
        for dv in (u, v):
            if dv != OUTER:
                rows.append(dv[0])
                cols.append(dv[1])
    if not rows:
        raise NotACycle("difference contains an edge with two OUTER endpoints")
    return SubgridWindow(min(rows), max(rows), min(cols), max(cols))


def serialize_cut(cut: Iterable[PrimalEdge]) -> list[list[list[int]]]:
    """Canonical JSON form: sorted list of [[i,j],[i',j']] edges."""
    return [[list(e[0]), list(e[1])] for e in sorted(cut)]
