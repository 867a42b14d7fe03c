"""Exact ground truth on small grids.

Spanning-tree counts use a fraction-free integer determinant of a Laplacian
minor, so every downstream weight is exact. Partition enumeration walks the
lattice of connected vertex sets (with connected complement) rather than
filtering all 2^(mn) colorings.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, getcontext
from fractions import Fraction
from typing import Union

from .errors import TooLarge
from .grid import GridDual, Partition2, PrimalEdge, PrimalVertex

DEFAULT_VERTEX_CAP = 20

# Exponential reweighting is accumulated at 40 significant digits; the
# documented relative tolerance on probabilities is 1e-12.
getcontext().prec = 40

Weight = Union[Fraction, Decimal]


def _bareiss_det(mat: list[list[int]]) -> int:
    """Exact determinant of an integer matrix via fraction-free elimination."""
    n = len(mat)
    if n == 0:
        return 1
    a = [row[:] for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            row_i = a[i]
            row_k = a[k]
            aik = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (pivot * row_i[j] - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def count_spanning_trees(vertices: list, edges: list[tuple]) -> int:
    """Kirchhoff count of spanning trees; 0 for disconnected input.

    `edges` are unordered pairs over `vertices`. Exact for any size the
    determinant can chew through.
    """
    n = len(vertices)
    if n == 0:
        return 0
    if n == 1:
        return 1
    idx = {v: k for k, v in enumerate(vertices)}
    lap = [[0] * n for _ in range(n)]
    for (a, b) in edges:
        ia, ib = idx[a], idx[b]
        lap[ia][ia] += 1
        lap[ib][ib] += 1
        lap[ia][ib] -= 1
        lap[ib][ia] -= 1
    minor = [row[1:] for row in lap[1:]]
    return _bareiss_det(minor)


class _SpCache:
    """Spanning-tree counts of induced primal subgraphs, keyed by bitmask."""

    def __init__(self, g: GridDual):
        self.g = g
        self._cache: dict[int, int] = {}

    def count(self, mask: int) -> int:
        hit = self._cache.get(mask)
        if hit is not None:
            return hit
        g = self.g
        vids = [k for k in range(len(g.primal_vertices)) if mask >> k & 1]
        pos = {v: i for i, v in enumerate(vids)}
        edges = []
        for v in vids:
            for w in g.primal_adj[v]:
                if w > v and (mask >> w & 1):
                    edges.append((pos[v], pos[w]))
        val = count_spanning_trees(list(range(len(vids))), edges)
        self._cache[mask] = val
        return val


def _connected_sets_with_min_zero(g: GridDual):
    """All connected vertex sets (as bitmasks) containing vertex id 0.

    Classic binary branching on the frontier: each set is emitted exactly
    once. Vertex id 0 is (1,1), so each unordered 2-partition appears once
    as (side containing (1,1), complement).
    """
    nbr = g._nbr_mask
    n = len(g.primal_vertices)
    full = g.full_mask

    def rec(current: int, candidates: int, forbidden: int):
        yield current
        cand = candidates
        while cand:
            bit = cand & -cand
            cand &= cand - 1
            k = bit.bit_length() - 1
            new_forbidden = forbidden | (candidates & (bit - 1))
            grown = current | bit
            new_cands = (cand | (nbr[k] & ~grown & ~new_forbidden & full)) & ~new_forbidden
            yield from rec(grown, new_cands, new_forbidden)

    yield from rec(1, nbr[0] & ~1, 0)


def enumerate_partitions(g: GridDual, cap: int = DEFAULT_VERTEX_CAP) -> list[Partition2]:
    """All feasible 2-partitions, canonically ordered, each exactly once."""
    n = g.m * g.n
    if n > cap:
        raise TooLarge(f"{g.m}x{g.n} grid exceeds the {cap}-vertex enumeration cap")
    out = []
    full = g.full_mask
    for mask in _connected_sets_with_min_zero(g):
        comp = full & ~mask
        if comp and g.connected_mask(comp):
            out.append((mask, comp))
    out.sort()
    parts = []
    for mask, comp in out:
        parts.append(Partition2(g.verts_of(mask), g.verts_of(comp)))
    return parts


@dataclass
class ExactDistribution:
    """Exact partition weights; Fractions when lambda == 0, Decimals otherwise."""

    entries: list[tuple[Partition2, Weight]]
    total: Weight
    lam: float

    def probability(self, p: Partition2) -> float:
        for q, w in self.entries:
            if q.interior == p.interior or q.interior == p.exterior:
                return float(w / self.total)
        return 0.0

    def as_probability_dict(self) -> dict[frozenset, float]:
        """Keyed by the side containing (1,1)."""
        out = {}
        for p, w in self.entries:
            key = p.interior if (1, 1) in p.interior else p.exterior
            out[key] = float(w / self.total)
        return out


def _weight(sp_product: int, imbalance2: int, lam: float) -> Weight:
    if lam == 0:
        return Fraction(sp_product)
    return Decimal(sp_product) * (Decimal(repr(-lam)) * Decimal(imbalance2) / 2).exp()


def exact_distribution(g: GridDual, lam: float = 0.0,
                       cap: int = DEFAULT_VERTEX_CAP) -> ExactDistribution:
    """Partition weights sp(X)*sp(Y)*exp(-lam*imbalance), exactly normalized."""
    parts = enumerate_partitions(g, cap)
    sp = _SpCache(g)
    entries = []
    total: Weight = Fraction(0) if lam == 0 else Decimal(0)
    for p in parts:
        imask = g.mask_of(p.interior)
        w = _weight(sp.count(imask) * sp.count(g.full_mask & ~imask), p.imbalance2, lam)
        entries.append((p, w))
        total += w
    return ExactDistribution(entries, total, lam)


def exact_separation_probability(g: GridDual, lam: float, e: PrimalEdge,
                                 cap: int = DEFAULT_VERTEX_CAP) -> Weight:
    """Exact probability that edge e is cut under the lambda-smooth law."""
    dist = exact_distribution(g, lam, cap)
    u, v = e
    sep: Weight = Fraction(0) if lam == 0 else Decimal(0)
    for p, w in dist.entries:
        if p.separates(u, v):
            sep += w
    return sep / dist.total


def spanning_pair_sums(g: GridDual, cap: int = DEFAULT_VERTEX_CAP
                       ) -> tuple[int, dict[PrimalEdge, int]]:
    """(sum over partitions of sp(X)sp(Y), same sum restricted per separated edge).

    These are the two normalizing constants the modified-walk sampler's
    acceptance step needs on oracle-sized grids.
    """
    parts = enumerate_partitions(g, cap)
    sp = _SpCache(g)
    total = 0
    per_edge = {e: 0 for e in g.primal_edges}
    for p in parts:
        imask = g.mask_of(p.interior)
        w = sp.count(imask) * sp.count(g.full_mask & ~imask)
        total += w
        for eid in g.cut_edge_ids(imask):
            per_edge[g.primal_edges[eid]] += w
    return total, per_edge


def separated_vertex_count_ok(p: Partition2, mn: int) -> bool:
    """Sanity link: side sizes add up to the full grid."""
    return len(p.interior) + len(p.exterior) == mn
