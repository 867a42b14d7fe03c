"""Walks, loop-erasure, loop decomposition, splicing, and breakdowns.

Everything here is pure sequence manipulation: a walk is an alternating
vertex/edge sequence with opaque hashable labels, so the same code serves
grid duals, primal grids, and the synthetic graphs used as negative
controls. Loops are stored as index ranges into their parent walk and
materialized on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

from .errors import VertexNotOnLoop

Vertex = Hashable
Edge = Hashable


@dataclass(frozen=True)
class Walk:
    """Alternating sequence v0 e0 v1 e1 ... v_k; len(verts) == len(edges)+1."""

    verts: tuple
    edges: tuple

    def __post_init__(self):
        if len(self.verts) != len(self.edges) + 1 or not self.verts:
            raise ValueError("walk must alternate vertices and edges")

    def __len__(self):
        return len(self.edges)

    @property
    def start(self):
        return self.verts[0]

    @property
    def end(self):
        return self.verts[-1]

    def slice(self, i: int, j: int) -> "Walk":
        """Sub-walk from vertex position i to vertex position j (0-based)."""
        return Walk(self.verts[i:j + 1], self.edges[i:j])

    def concat(self, other: "Walk") -> "Walk":
        if self.end != other.start:
            raise ValueError("walks do not chain")
        return Walk(self.verts + other.verts[1:], self.edges + other.edges)

    def directed_edges(self) -> list[tuple]:
        return [(self.verts[i], self.verts[i + 1], self.edges[i]) for i in range(len(self.edges))]


@dataclass(frozen=True)
class DirectedPath:
    """A simple directed path, same storage as Walk but no repeated vertex."""

    verts: tuple
    edges: tuple

    def __post_init__(self):
        if len(self.verts) != len(self.edges) + 1 or not self.verts:
            raise ValueError("path must alternate vertices and edges")
        if len(set(self.verts)) != len(self.verts):
            raise ValueError("path is not simple")

    def __len__(self):
        return len(self.edges)

    @property
    def start(self):
        return self.verts[0]

    @property
    def end(self):
        return self.verts[-1]

    def as_walk(self) -> Walk:
        return Walk(self.verts, self.edges)

    def directed_edges(self) -> list[tuple]:
        return [(self.verts[i], self.verts[i + 1], self.edges[i]) for i in range(len(self.edges))]

    def first_index(self) -> dict:
        """Vertex -> position; the first-appearance order underlying the path."""
        return {v: i for i, v in enumerate(self.verts)}


@dataclass(frozen=True)
class Loop:
    """A sub-walk W[start:stop] beginning and ending at the same vertex."""

    start: int
    stop: int

    def materialize(self, w: Walk) -> Walk:
        return w.slice(self.start, self.stop)


@dataclass
class LoopDecomposition:
    erasure: DirectedPath
    loops_at: dict[int, list[Loop]]  # erasure vertex position -> maximal loops
    events: list[tuple[int, int]] = field(default_factory=list)  # every removal event

    def reconstruct(self, w: Walk) -> Walk:
        """Re-insert the maximal loops into the erasure; must reproduce w."""
        verts = [self.erasure.verts[0]]
        edges = []
        for pos in range(len(self.erasure.verts)):
            for loop in self.loops_at.get(pos, ()):
                seg = loop.materialize(w)
                verts.extend(seg.verts[1:])
                edges.extend(seg.edges)
            if pos < len(self.erasure.edges):
                verts.append(self.erasure.verts[pos + 1])
                edges.append(self.erasure.edges[pos])
        return Walk(tuple(verts), tuple(edges))


def loop_erase(w: Walk) -> LoopDecomposition:
    """Sequential cycle removal with full loop bookkeeping.

    The stack holds the current erased path as (vertex, arrival position,
    collected maximal loops). Stepping onto a vertex already on the path
    closes a loop that swallows everything collected past its departure
    point; stepping onto a fresh vertex extends the path.
    """
    verts = w.verts
    stack: list[list] = [[verts[0], 0, []]]
    on_path = {verts[0]: 0}  # vertex -> stack index
    events: list[tuple[int, int]] = []

    for p in range(1, len(verts)):
        v = verts[p]
        t = on_path.get(v)
        if t is None:
            on_path[v] = len(stack)
            stack.append([v, p, []])
        else:
            # Loop starts where v's surviving departure edge was taken:
            # one vertex position before the arrival of the next stack entry.
            start = stack[t + 1][1] - 1 if t + 1 < len(stack) else p - 1
            for entry in stack[t + 1:]:
                del on_path[entry[0]]
            del stack[t + 1:]
            stack[t][2].append(Loop(start, p))
            events.append((start, p))

    everts = tuple(entry[0] for entry in stack)
    eedges = tuple(w.edges[stack[i + 1][1] - 1] for i in range(len(stack) - 1))
    loops_at = {i: entry[2] for i, entry in enumerate(stack) if entry[2]}
    return LoopDecomposition(DirectedPath(everts, eedges), loops_at, events)


def loop_chain_at(w: Walk, pos: int) -> list[Loop]:
    """The maximal run of recorded loops starting at walk position pos.

    Successive loops chain end-to-start: W[pos:a], W[a:b], ... Each removal
    event starts at a distinct position, so the chain is unique.
    """
    starts = {s: e for s, e in loop_erase(w).events}
    chain = []
    cur = pos
    while cur in starts:
        chain.append(Loop(cur, starts[cur]))
        cur = starts[cur]
    return chain


def splice(w: Walk, loop: Walk, pos: int) -> Walk:
    """Insert a closed walk at vertex position pos of w.

    The closed walk is cyclically permuted to begin at the first appearance
    of w's pos-vertex, then sandwiched between w[:pos] and w[pos:].
    """
    if loop.start != loop.end:
        raise ValueError("spliced walk must be closed")
    anchor = w.verts[pos]
    rotated = rotate_closed(loop, anchor, last=False)
    return Walk(
        w.verts[:pos + 1] + rotated.verts[1:] + w.verts[pos + 1:],
        w.edges[:pos] + rotated.edges + w.edges[pos:],
    )


def rotate_closed(loop: Walk, anchor, last: bool = False) -> Walk:
    """Cyclic permutation of a closed walk starting at an appearance of anchor.

    `last=False` rotates to the first appearance scanning positions
    0..len-1; `last=True` rotates to the last appearance scanning positions
    1..len, where position len is the closing endpoint and maps to the
    identity rotation. The two conventions are mutual inverses for the
    splice/unsplice pair.
    """
    if loop.start != loop.end:
        raise ValueError("not a closed walk")
    if last:
        hits = [i for i in range(1, len(loop.verts)) if loop.verts[i] == anchor]
        if not hits:
            raise VertexNotOnLoop(f"{anchor!r} does not appear on the loop")
        t = hits[-1] % len(loop.edges)
    else:
        hits = [i for i, v in enumerate(loop.verts[:-1]) if v == anchor]
        if not hits:
            raise VertexNotOnLoop(f"{anchor!r} does not appear on the loop")
        t = hits[0]
    if t == 0:
        return loop
    verts = loop.verts[t:-1] + loop.verts[:t + 1]
    edges = loop.edges[t:] + loop.edges[:t]
    return Walk(verts, edges)


PHI = None  # sentinel for "loop touches no reference vertex"; sorts after all


def loop_sequence(loops: Sequence[Walk], order: dict) -> list:
    """Per-loop earliest reference vertex under the given first-index order."""
    seq = []
    for lp in loops:
        best = None
        best_rank = None
        for v in lp.verts:
            r = order.get(v)
            if r is not None and (best_rank is None or r < best_rank):
                best, best_rank = v, r
        seq.append(best if best is not None else PHI)
    return seq


def breakdown(seq: Sequence, order: dict) -> list[int]:
    """Indices (1-based) of the unique maximal breakdown of a loop-sequence.

    An index qualifies iff its value is non-PHI and strictly order-smaller
    than every non-PHI value to its right; the in-between condition then
    holds automatically.
    """
    ranks = [order.get(v) if v is not PHI else None for v in seq]
    out = []
    suffix_min: Optional[int] = None
    for i in range(len(seq) - 1, -1, -1):
        r = ranks[i]
        if r is None:
            continue
        if suffix_min is None or r < suffix_min:
            out.append(i + 1)
            suffix_min = r
    out.reverse()
    return out


def format_trace(w: Walk) -> str:
    """Debug trace: one line per step, then the maximal-loop section."""
    lines = []
    for i in range(len(w.edges)):
        lines.append(f"{w.verts[i]} --{w.edges[i]}--> {w.verts[i + 1]}")
    dec = loop_erase(w)
    lines.append("loops:")
    for pos in sorted(dec.loops_at):
        for lp in dec.loops_at[pos]:
            lines.append(f"  at erasure position {pos}: W[{lp.start}:{lp.stop}]")
    return "\n".join(lines)
