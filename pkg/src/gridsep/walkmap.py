"""Constructive bijection between walk families with prescribed erasures.

Given two simple dual paths D, D' sharing endpoints and differing only
inside a small window, every walk whose loop-erasure is D maps to a walk
whose loop-erasure is D', injectively, adding few edges and never gaining
outer-vertex visits. The construction re-homes each maximal loop of the
input onto a deterministic base walk and re-splices; the inverse recovers
the loop assignment from loop-sequence breakdowns.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import ErasureMismatch, NotInImage, WindowViolation
from .grid import OUTER, GridDual, SubgridWindow, locally_different, primal_edge
from .walks import (DirectedPath, Walk, breakdown, loop_chain_at, loop_erase,
                    loop_sequence, rotate_closed)


@dataclass(frozen=True)
class NoFlipVerdict:
    reversed_pairs: tuple
    holds: bool


def check_no_flip(d: DirectedPath, dprime: DirectedPath,
                  window: SubgridWindow) -> NoFlipVerdict:
    """Find directed edges of d traversed in reverse by dprime.

    The verdict holds iff every such reversal has both endpoints inside the
    window. Works on any vertex labels, so synthetic counterexamples can be
    fed in as negative controls.
    """
    reverse_set = {(b, a, c) for (a, b, c) in dprime.directed_edges()}
    found = []
    for (p, q, c) in d.directed_edges():
        if (p, q, c) in reverse_set:
            found.append((p, q, c))
    holds = all(window.contains(p) and window.contains(q) for (p, q, _) in found)
    return NoFlipVerdict(tuple(found), holds)


@dataclass
class MapContext:
    """Fixed data for one mapping instance: paths, window, and size bound."""

    g: GridDual
    d: DirectedPath
    dprime: DirectedPath
    window: SubgridWindow
    beta: int
    _base: Optional[Walk] = field(default=None, repr=False, compare=False)

    def base(self) -> Walk:
        if self._base is None:
            self._base = base_walk(self)
        return self._base


def make_context(g: GridDual, d: DirectedPath, dprime: DirectedPath,
                 window: SubgridWindow, beta: Optional[int] = None) -> MapContext:
    if d.start != dprime.start or d.end != dprime.end:
        raise WindowViolation("paths must share both endpoints")
    for endpoint in (d.start, d.end):
        if window.contains(endpoint):
            raise WindowViolation("path endpoints must lie outside the window")
    minimal = locally_different(d.edges, dprime.edges, g)
    if minimal is not None:
        ok = window.covers(minimal)
        if not ok:
            raise WindowViolation("paths differ outside the declared window")
        for e in set(d.edges) ^ set(dprime.edges):
            u, v = g.dual_endpoints_of(e)
            if OUTER in (u, v):
                face = v if u == OUTER else u
                if not window.contains(face):
                    raise WindowViolation("outer difference edge has face outside window")
    b = window.edge_count() if beta is None else beta
    if window.edge_count() > b:
        raise WindowViolation("window larger than beta edges")
    return MapContext(g, d, dprime, window, b)


def _face_crossing(a, b) -> tuple:
    """Primal edge crossed by the dual edge between two adjacent faces."""
    (i, j), (i2, j2) = a, b
    if i == i2 and abs(j - j2) == 1:
        jj = max(j, j2)
        return primal_edge((i, jj), (i + 1, jj))
    if j == j2 and abs(i - i2) == 1:
        ii = max(i, i2)
        return primal_edge((ii, j), (ii, j + 1))
    raise ValueError(f"faces {a} and {b} are not adjacent")


def _window_ring(window: SubgridWindow) -> list:
    """Rim faces of the window in clockwise order (a path for thin windows)."""
    r1, r2, c1, c2 = window.row_lo, window.row_hi, window.col_lo, window.col_hi
    if r1 == r2:
        return [(r1, c) for c in range(c1, c2 + 1)]
    if c1 == c2:
        return [(r, c1) for r in range(r1, r2 + 1)]
    ring = [(r1, c) for c in range(c1, c2 + 1)]
    ring += [(r, c2) for r in range(r1 + 1, r2 + 1)]
    ring += [(r2, c) for c in range(c2 - 1, c1 - 1, -1)]
    ring += [(r, c1) for r in range(r2 - 1, r1, -1)]
    return ring


def _ring_bridge(window: SubgridWindow, a, b) -> tuple[tuple, tuple]:
    """Walk tokens (verts incl. both ends, edges) from rim face a to rim face b."""
    ring = _window_ring(window)
    if a == b:
        return ((a,), ())
    ia, ib = ring.index(a), ring.index(b)
    thin = window.row_lo == window.row_hi or window.col_lo == window.col_hi
    if thin:
        step = 1 if ib > ia else -1
        seq = [ring[k] for k in range(ia, ib + step, step)]
    else:
        n = len(ring)
        fwd = [(k % n) for k in range(ia, ia + (ib - ia) % n + 1)]
        back = [(k % n) for k in range(ia, ia - (ia - ib) % n - 1, -1)]
        seq_idx = fwd if len(fwd) <= len(back) else back
        seq = [ring[k] for k in seq_idx]
    edges = tuple(_face_crossing(seq[k], seq[k + 1]) for k in range(len(seq) - 1))
    return (tuple(seq), edges)


def base_walk(ctx: MapContext) -> Walk:
    """Deterministic walk with erasure D' that also visits every vertex of D.

    Follows the target path to its first window vertex, tours the source
    path's in-window segments (bridging gap stretches along the window rim,
    or through the outer vertex when the source alone visits it), backtracks,
    then continues along the target path. The tour is a closed excursion at
    a path vertex whose other vertices stay off the already-erased prefix,
    so it erases completely.
    """
    d, dp, window = ctx.d, ctx.dprime, ctx.window
    if d.verts == dp.verts and d.edges == dp.edges:
        return d.as_walk()

    d_in = [window.contains(v) for v in d.verts]
    dp_in = [window.contains(v) for v in dp.verts]
    if not any(d_in) or not any(dp_in):
        raise WindowViolation("differing paths must both enter the window")
    r0_pos = dp_in.index(True)
    r0 = dp.verts[r0_pos]

    # In-window runs of D: [start, stop] vertex index pairs.
    runs = []
    k = 0
    nverts = len(d.verts)
    while k < nverts:
        if d_in[k]:
            s = k
            while k + 1 < nverts and d_in[k + 1]:
                k += 1
            runs.append((s, k))
        k += 1

    dp_vertset = set(dp.verts)

    def tour_tokens(use_detour: bool) -> tuple[list, list]:
        verts = [r0]
        edges = []

        def extend(vs, es):
            assert vs[0] == verts[-1]
            verts.extend(vs[1:])
            edges.extend(es)

        extend(*_ring_bridge(window, r0, d.verts[runs[0][0]]))
        for idx, (s, e) in enumerate(runs):
            seg = d.as_walk().slice(s, e)
            extend(seg.verts, seg.edges)
            if idx + 1 < len(runs):
                nxt_s = runs[idx + 1][0]
                gap_is_outer_detour = (
                    nxt_s == e + 2 and d.verts[e + 1] == OUTER and OUTER not in dp_vertset
                )
                if use_detour and gap_is_outer_detour:
                    extend((d.verts[e], OUTER, d.verts[nxt_s]),
                           (d.edges[e], d.edges[nxt_s - 1]))
                else:
                    extend(*_ring_bridge(window, d.verts[e], d.verts[nxt_s]))
        return verts, edges

    fwd_v, fwd_e = tour_tokens(use_detour=True)
    plain_v, plain_e = tour_tokens(use_detour=False)
    m_verts = fwd_v + plain_v[-2::-1]
    m_edges = fwd_e + plain_e[::-1]

    prefix = dp.as_walk().slice(0, r0_pos)
    rest = dp.as_walk().slice(r0_pos, len(dp.verts) - 1)
    verts = prefix.verts + tuple(m_verts[1:]) + rest.verts[1:]
    edges = prefix.edges + tuple(m_edges) + rest.edges
    return Walk(verts, edges)


class _TaggedWalk:
    """Mutable walk with spliced-token provenance flags."""

    def __init__(self, w: Walk):
        self.verts = list(w.verts)
        self.edges = list(w.edges)
        self.spliced = [False] * len(w.verts)

    def first_untagged(self, v) -> int:
        for k, (vert, tag) in enumerate(zip(self.verts, self.spliced)):
            if vert == v and not tag:
                return k
        raise NotInImage(f"vertex {v!r} has no unspliced appearance")

    def insert_closed(self, pos: int, closed: Walk):
        self.verts[pos + 1:pos + 1] = list(closed.verts[1:])
        self.spliced[pos + 1:pos + 1] = [True] * (len(closed.verts) - 1)
        self.edges[pos:pos] = list(closed.edges)

    def to_walk(self) -> Walk:
        return Walk(tuple(self.verts), tuple(self.edges))


def _first_index_map(verts) -> dict:
    out = {}
    for k, v in enumerate(verts):
        if v not in out:
            out[v] = k
    return out


def map_walk(ctx: MapContext, w: Walk) -> Walk:
    """Rebuild w's loops onto the base walk, yielding a walk with erasure D'."""
    dec = loop_erase(w)
    if dec.erasure.verts != ctx.d.verts or dec.erasure.edges != ctx.d.edges:
        raise ErasureMismatch("input walk's erasure is not the context's source path")
    base = ctx.base()
    order_wp = _first_index_map(base.verts)
    wp_vertset = set(base.verts)

    assignments: dict = {}
    for pos in sorted(dec.loops_at):
        v_ell = dec.erasure.verts[pos]
        loops = [lp.materialize(w) for lp in dec.loops_at[pos]]
        loop_vert_sets = [set(lp.verts) for lp in loops]
        candidates = sorted(
            {u for vs in loop_vert_sets for u in vs if u in wp_vertset},
            key=lambda u: order_wp[u],
        )
        j_max = len(loops)
        for u in candidates:
            if j_max == 0:
                break
            j = None
            for jj in range(j_max):
                if u in loop_vert_sets[jj]:
                    j = jj
                    break
            if j is None:
                continue
            bundle = loops[j]
            for extra in loops[j + 1:j_max]:
                bundle = bundle.concat(extra)
            assignments.setdefault(u, []).insert(0, (bundle, v_ell))
            j_max = j

    tagged = _TaggedWalk(base)
    for u in sorted(assignments, key=lambda u: order_wp[u]):
        for (bundle, _v) in assignments[u]:
            pos = tagged.first_untagged(u)
            tagged.insert_closed(pos, rotate_closed(bundle, u, last=False))
    return tagged.to_walk()


def invert_map(ctx: MapContext, w_hat: Walk, verify: bool = True) -> Walk:
    """Recover the unique preimage of map_walk; NotInImage if none exists."""
    base = ctx.base()
    order_wp = _first_index_map(base.verts)
    order_d = ctx.d.first_index()
    base_chain_len = {
        u: len(loop_chain_at(base, pos)) for u, pos in order_wp.items()
    }

    current = w_hat
    recovered: dict = {}
    try:
        for u in sorted(order_wp, key=lambda u: order_wp[u]):
            idx = _first_index_map(current.verts).get(u)
            if idx is None:
                raise NotInImage(f"vertex {u!r} missing from candidate walk")
            chain = loop_chain_at(current, idx)
            extra = len(chain) - base_chain_len[u]
            if extra < 0:
                raise NotInImage("fewer loops than the base walk carries")
            if extra == 0:
                continue
            loops = [lp.materialize(current) for lp in chain[:extra]]
            seq = loop_sequence(loops, order_d)
            marks = breakdown(seq, order_d)
            if not marks or marks[-1] != len(loops):
                raise NotInImage("loop-sequence breakdown does not tile the splices")
            entries = []
            prev = 0
            for mark in marks:
                bundle = loops[prev]
                for lp in loops[prev + 1:mark]:
                    bundle = bundle.concat(lp)
                v = seq[mark - 1]
                entries.append((rotate_closed(bundle, v, last=True), v))
                prev = mark
            recovered[u] = list(reversed(entries))
            stop = chain[extra - 1].stop
            current = Walk(current.verts[:idx + 1] + current.verts[stop + 1:],
                           current.edges[:idx] + current.edges[stop:])

        per_vertex: dict = {}
        for u, entries in recovered.items():
            for (bundle, v) in entries:
                per_vertex.setdefault(v, []).append((bundle, u))

        tagged = _TaggedWalk(ctx.d.as_walk())
        for v in ctx.d.verts:
            if v not in per_vertex:
                continue
            parts = sorted(per_vertex[v], key=lambda t: -order_wp[t[1]])
            bundle = parts[0][0]
            for (extra_bundle, _u) in parts[1:]:
                bundle = bundle.concat(extra_bundle)
            pos = tagged.first_untagged(v)
            tagged.insert_closed(pos, bundle)
        result = tagged.to_walk()
    except (ValueError, KeyError) as exc:
        raise NotInImage(str(exc)) from exc

    dec = loop_erase(result)
    if dec.erasure.verts != ctx.d.verts or dec.erasure.edges != ctx.d.edges:
        raise NotInImage("reconstructed walk has the wrong erasure")
    if verify and map_walk(ctx, result) != w_hat:
        raise NotInImage("candidate walk is not in the mapping's image")
    return result


def directed_edge_multiset_diff(a: Walk, b: Walk) -> int:
    """Size of the multiset difference of directed (tail, head, crossing) edges."""
    ca = Counter(a.directed_edges())
    cb = Counter(b.directed_edges())
    keys = set(ca) | set(cb)
    return sum(abs(ca.get(k, 0) - cb.get(k, 0)) for k in keys)


def outer_edge_count(w: Walk) -> int:
    return sum(1 for k in range(len(w.edges))
               if w.verts[k] == OUTER or w.verts[k + 1] == OUTER)


def paths_from_cycle_pair(g: GridDual, cut_a, cut_b, conditioned) -> tuple[DirectedPath, DirectedPath]:
    """Orient two cycles sharing a conditioned edge into paths x* -> y*."""
    x, y = g.dual_endpoints_of(conditioned)
    return (_path_along_cycle(g, cut_a, conditioned, x, y),
            _path_along_cycle(g, cut_b, conditioned, x, y))


def _path_along_cycle(g: GridDual, crossings, conditioned, x, y) -> DirectedPath:
    incident: dict = {}
    for e in crossings:
        if e == conditioned:
            continue
        u, v = g.dual_endpoints_of(e)
        incident.setdefault(u, []).append((v, e))
        incident.setdefault(v, []).append((u, e))
    verts = [x]
    edges = []
    prev_edge = None
    cur = x
    while cur != y:
        options = [t for t in incident[cur] if t[1] != prev_edge]
        if len(options) != 1:
            raise ValueError("edge set minus the conditioned edge is not an x-y path")
        nxt, e = options[0]
        verts.append(nxt)
        edges.append(e)
        prev_edge = e
        cur = nxt
    if len(edges) != sum(len(v) for v in incident.values()) // 2:
        raise ValueError("cycle has edges unreachable from the conditioned edge")
    return DirectedPath(tuple(verts), tuple(edges))
