"""Local structure detectors on red/blue grid colorings.

A coloring is any total red/blue assignment, feasible or not. The
detectors here (regions, islands, disposable vertices, diagonal 2x2
blocks, island walks, thin bridges, elbow corners) are the move
generators and sanity checks used by the reconnection search, and are
verified extensionally against exhaustive small-grid sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import CrossStructurePresent, NotAnIsland, PatternMismatch
from .grid import GridDims, GridDual, Partition2, PrimalVertex

RED = "r"
BLUE = "b"


@dataclass(frozen=True)
class Coloring:
    """Row-major total coloring of an m x n grid."""

    rows: int
    cols: int
    colors: tuple[str, ...]

    def __post_init__(self):
        if len(self.colors) != self.rows * self.cols:
            raise ValueError("color vector length mismatch")
        if any(c not in (RED, BLUE) for c in self.colors):
            raise ValueError("colors must be 'r' or 'b'")

    @classmethod
    def from_string(cls, rows: int, cols: int, s: str) -> "Coloring":
        compact = "".join(s.split())
        return cls(rows, cols, tuple(compact))

    @classmethod
    def from_partition(cls, g: GridDual, p: Partition2,
                       interior_color: str = RED) -> "Coloring":
        other = BLUE if interior_color == RED else RED
        colors = tuple(
            interior_color if v in p.interior else other for v in g.primal_vertices
        )
        return cls(g.m, g.n, colors)

    def color(self, v: PrimalVertex) -> str:
        i, j = v
        return self.colors[(i - 1) * self.cols + (j - 1)]

    def in_grid(self, v: PrimalVertex) -> bool:
        return 1 <= v[0] <= self.rows and 1 <= v[1] <= self.cols

    def neighbors(self, v: PrimalVertex) -> list[PrimalVertex]:
        i, j = v
        out = []
        for w in ((i - 1, j), (i, j - 1), (i, j + 1), (i + 1, j)):
            if self.in_grid(w):
                out.append(w)
        return out

    def vertices(self) -> list[PrimalVertex]:
        return [(i, j) for i in range(1, self.rows + 1) for j in range(1, self.cols + 1)]

    def flip(self, verts: Iterable[PrimalVertex]) -> "Coloring":
        colors = list(self.colors)
        for (i, j) in verts:
            k = (i - 1) * self.cols + (j - 1)
            colors[k] = RED if colors[k] == BLUE else BLUE
        return Coloring(self.rows, self.cols, tuple(colors))

    def to_string(self) -> str:
        return "".join(self.colors)


@dataclass(frozen=True)
class Region:
    color: str
    verts: frozenset[PrimalVertex]
    is_island: bool


def find_regions(c: Coloring) -> list[Region]:
    """Maximal monochromatic components; islands touch no grid border."""
    seen: set[PrimalVertex] = set()
    regions = []
    for v in c.vertices():
        if v in seen:
            continue
        color = c.color(v)
        comp = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for w in c.neighbors(u):
                if w not in comp and c.color(w) == color:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        island = all(1 < i < c.rows and 1 < j < c.cols for (i, j) in comp)
        regions.append(Region(color, frozenset(comp), island))
    return regions


def region_of(c: Coloring, v: PrimalVertex) -> frozenset[PrimalVertex]:
    color = c.color(v)
    comp = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in c.neighbors(u):
            if w not in comp and c.color(w) == color:
                comp.add(w)
                stack.append(w)
    return frozenset(comp)


def is_feasible(c: Coloring) -> bool:
    regions = find_regions(c)
    return len(regions) == 2


def is_disposable(c: Coloring, v: PrimalVertex) -> bool:
    """True iff removing v keeps its region connected (empty remainder ok)."""
    region = region_of(c, v)
    rest = region - {v}
    if not rest:
        return True
    start = next(iter(rest))
    comp = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in c.neighbors(u):
            if w in rest and w not in comp:
                comp.add(w)
                stack.append(w)
    return len(comp) == len(rest)


def detect_cross_structures(c: Coloring) -> list[tuple[PrimalVertex, PrimalVertex]]:
    """Top-left corners of diagonally two-colored 2x2 blocks, as (corner, corner)."""
    out = []
    for i in range(1, c.rows):
        for j in range(1, c.cols):
            a, b = c.color((i, j)), c.color((i, j + 1))
            d, e = c.color((i + 1, j)), c.color((i + 1, j + 1))
            if a == e and b == d and a != b:
                out.append(((i, j), (i + 1, j + 1)))
    return out


@dataclass(frozen=True)
class IslandWalk:
    """Closed directed walk on the surrounding color, covering every spoke."""

    arcs: tuple[tuple[PrimalVertex, PrimalVertex], ...]
    spokes: tuple[tuple[PrimalVertex, PrimalVertex], ...]  # (island vertex, outside vertex)

    def vertices(self) -> list[PrimalVertex]:
        if not self.arcs:
            return []
        return [self.arcs[0][0]] + [b for (_a, b) in self.arcs]


def _outline_spokes(c: Coloring, island: frozenset[PrimalVertex]
                    ) -> list[tuple[PrimalVertex, PrimalVertex]]:
    """Spokes (island vertex, neighbor) in clockwise outline order.

    Treats each vertex as a unit cell and follows the polyomino boundary
    with the island kept to the right of travel (rows grow downward).
    """
    # Directed boundary half-edges on cell corners. Corner (i, j) is the
    # top-left corner of cell (i, j). Moving direction d with the island on
    # the right; start on the topmost-leftmost cell's top edge heading east.
    cells = island
    start_cell = min(cells)
    # Half-edge representation: (corner, direction); direction in E,S,W,N.
    E, S, W, N = (0, 1), (1, 0), (0, -1), (-1, 0)

    def cell_right_of(corner, d):
        # Cell lying to the right of the directed boundary segment.
        (ci, cj) = corner
        if d == E:
            return (ci, cj)
        if d == S:
            return (ci, cj - 1)
        if d == W:
            return (ci - 1, cj - 1)
        return (ci - 1, cj)

    def spoke_for(corner, d):
        cell = cell_right_of(corner, d)
        if d == E:
            out = (cell[0] - 1, cell[1])
        elif d == S:
            out = (cell[0], cell[1] + 1)
        elif d == W:
            out = (cell[0] + 1, cell[1])
        else:
            out = (cell[0], cell[1] - 1)
        return (cell, out)

    pos = start_cell
    d = E
    start = (pos, d)
    segments = []
    corner, dd = start
    while True:
        segments.append((corner, dd))
        nxt = (corner[0] + dd[0], corner[1] + dd[1])
        # Turn selection: prefer right turn, then straight, then left, so the
        # island stays on the right side.
        if dd == E:
            options = [S, E, N]
        elif dd == S:
            options = [W, S, E]
        elif dd == W:
            options = [N, W, S]
        else:
            options = [E, N, W]
        for cand in options:
            if cell_right_of(nxt, cand) in cells and cell_right_of(
                    nxt, (-cand[0], -cand[1])) not in cells:
                corner, dd = nxt, cand
                break
        else:  # pragma: no cover - outline tracing is total on valid islands
            raise NotAnIsland("outline tracing failed")
        if (corner, dd) == start:
            break
    return [spoke_for(cr, dd) for (cr, dd) in segments]


def island_walk(c: Coloring, island_region: Region) -> IslandWalk:
    """Constructive closed walk around an island covering each spoke once."""
    if not island_region.is_island:
        raise NotAnIsland("region touches the grid border")
    if detect_cross_structures(c):
        raise CrossStructurePresent("island walks require a cross-free coloring")
    spokes = _outline_spokes(c, island_region.verts)
    walk_verts: list[PrimalVertex] = []
    for k, (_r, b) in enumerate(spokes):
        (_r2, b2) = spokes[(k + 1) % len(spokes)]
        if not walk_verts:
            walk_verts.append(b)
        if b2 == b:
            continue
        di, dj = b2[0] - b[0], b2[1] - b[1]
        if abs(di) + abs(dj) == 1:
            walk_verts.append(b2)
        else:
            # Diagonal step around a convex island corner; the in-between
            # vertex is outside the island (else a cross-structure).
            r = spokes[k][0] if spokes[k][0] == spokes[(k + 1) % len(spokes)][0] else None
            mid_candidates = [(b[0], b2[1]), (b2[0], b[1])]
            mid = next(m for m in mid_candidates if m not in island_region.verts)
            walk_verts.append(mid)
            walk_verts.append(b2)
    if walk_verts and walk_verts[0] != walk_verts[-1]:
        walk_verts.append(walk_verts[0])
    arcs = tuple((walk_verts[k], walk_verts[k + 1]) for k in range(len(walk_verts) - 1))
    return IslandWalk(arcs, tuple(spokes))


def check_island_walk(c: Coloring, island_region: Region, walk: IslandWalk) -> list[str]:
    """Violations of the three walk properties; empty means all hold."""
    problems = []
    opposite = BLUE if island_region.color == RED else RED
    verts = walk.vertices()
    if any(c.color(v) != opposite for v in verts):
        problems.append("walk leaves the surrounding color")
    if verts:
        reg = region_of(c, verts[0])
        if any(v not in reg for v in verts):
            problems.append("walk spans more than one surrounding region")
    for (a, b) in walk.arcs:
        d = (b[0] - a[0], b[1] - a[1])
        right = (d[1], -d[0])
        ra = (a[0] + right[0], a[1] + right[1])
        rb = (b[0] + right[0], b[1] + right[1])
        if ra not in island_region.verts and rb not in island_region.verts:
            problems.append(f"arc {a}->{b} has no island vertex to its right")
    walk_set = set(verts)
    for v in island_region.verts:
        for w in c.neighbors(v):
            if c.color(w) == opposite and w not in walk_set:
                problems.append(f"boundary neighbor {w} missed by the walk")
    seen = set()
    for s in walk.spokes:
        if s in seen:
            problems.append(f"spoke {s} covered twice")
        seen.add(s)
    return problems


@dataclass(frozen=True)
class ThinSite:
    kind: str  # "1-thin" | "2-thin"
    verts: tuple[PrimalVertex, ...]  # the bridge vertices to flip
    flanks: tuple[PrimalVertex, PrimalVertex]


def find_thin_structures(c: Coloring) -> list[ThinSite]:
    """Width-1/width-2 bridges whose flanks lie in distinct regions, one an island.

    Resolving a site (flipping its verts) merges the two flanking regions;
    the distinct-region/island filter excludes sites inside feasible
    colorings where nothing needs repair.
    """
    regions = find_regions(c)
    region_ix: dict[PrimalVertex, int] = {}
    for k, r in enumerate(regions):
        for v in r.verts:
            region_ix[v] = k
    sites = []

    def flank_ok(a: PrimalVertex, b: PrimalVertex) -> bool:
        if region_ix[a] == region_ix[b]:
            return False
        return regions[region_ix[a]].is_island or regions[region_ix[b]].is_island

    for v in c.vertices():
        i, j = v
        for (da, db) in (((0, -1), (0, 1)), ((-1, 0), (1, 0))):
            a = (i + da[0], j + da[1])
            b = (i + db[0], j + db[1])
            if not (c.in_grid(a) and c.in_grid(b)):
                continue
            cv = c.color(v)
            if c.color(a) != c.color(b) or c.color(a) == cv:
                continue
            if flank_ok(a, b):
                sites.append(ThinSite("1-thin", (v,), (a, b)))
        for (da, db) in (((0, -1), (0, 2)), ((-1, 0), (2, 0))):
            u2 = (i + db[0] // 2, j + db[1] // 2)
            a = (i + da[0], j + da[1])
            b = (i + db[0], j + db[1])
            if not (c.in_grid(a) and c.in_grid(b)):
                continue
            cv = c.color(v)
            if c.color(u2) != cv:
                continue
            if c.color(a) != c.color(b) or c.color(a) == cv:
                continue
            if flank_ok(a, b):
                sites.append(ThinSite("2-thin", (v, u2), (a, b)))
    return sites


def resolve_thin(c: Coloring, site: ThinSite) -> Coloring:
    return c.flip(site.verts)


def elbow_sites(c: Coloring, v: PrimalVertex) -> list[tuple[PrimalVertex, PrimalVertex]]:
    """Perpendicular opposite-color neighbor pairs forming an elbow at v."""
    i, j = v
    cv = c.color(v)
    out = []
    for (d1, d2) in (((-1, 0), (0, 1)), ((0, 1), (1, 0)), ((1, 0), (0, -1)),
                     ((0, -1), (-1, 0))):
        a = (i + d1[0], j + d1[1])
        b = (i + d2[0], j + d2[1])
        if c.in_grid(a) and c.in_grid(b) and c.color(a) != cv and c.color(b) != cv:
            out.append((a, b))
    return out


def elbow_classify(c: Coloring, v: PrimalVertex) -> str:
    """'disposable' or 'forced_neighborhood' for a vertex in elbow position.

    A non-disposable elbow vertex cannot be border-adjacent and must keep
    both remaining orthogonal neighbors in its own color; those necessary
    conditions are asserted, the final arbiter is the disposability check.
    """
    if not elbow_sites(c, v):
        raise PatternMismatch(f"{v} has no opposite-color corner pair")
    if is_disposable(c, v):
        return "disposable"
    i, j = v
    if i in (1, c.rows) or j in (1, c.cols):
        raise PatternMismatch("non-disposable elbow vertex cannot touch the border")
    cv = c.color(v)
    same = [w for w in c.neighbors(v) if c.color(w) == cv]
    if len(same) < 2:
        raise PatternMismatch("degree<=1 vertex should have been disposable")
    return "forced_neighborhood"


def outer_cut_degree(c: Coloring) -> int:
    """Number of bichromatic edges on the grid border (outer-face dual degree)."""
    count = 0
    for i in (1, c.rows):
        for j in range(1, c.cols):
            if c.color((i, j)) != c.color((i, j + 1)):
                count += 1
    for j in (1, c.cols):
        for i in range(1, c.rows):
            if c.color((i, j)) != c.color((i + 1, j)):
                count += 1
    return count


def flip_region_effect(c: Coloring, u: PrimalVertex) -> tuple[int, int]:
    """(regions of u's old color, islands among them) after flipping u."""
    flipped = c.flip([u])
    old = c.color(u)
    regs = [r for r in find_regions(flipped) if r.color == old]
    return len(regs), sum(1 for r in regs if r.is_island)


def dims_of(c: Coloring) -> GridDims:
    return GridDims(c.rows, c.cols)
