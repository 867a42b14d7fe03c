"""Randomized partition samplers.

Two routes to the same target law: a loop-erased random walk on the dual
that closes a conditioned edge into a cycle, and a uniform-spanning-tree
edge split with 1/|cut| rejection. Both get an optional exponential
balance reweighting on top.

All randomness flows through one counter-based stream per sampler
instance, so seeded runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded
from .grid import DualCycle, DualEdge, GridDual, Partition2
from .oracle import DEFAULT_VERTEX_CAP, spanning_pair_sums


class RandomStream:
    """Buffered uniforms over a Philox (counter-based) generator.

    Worker streams derive from (seed, stream) without overlapping.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed
        self.stream = stream
        key = ((seed & 0xFFFFFFFFFFFFFFFF) << 64) | (stream & 0xFFFFFFFFFFFFFFFF)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        self._buf: list[float] = []
        self._i = 0

    def random(self) -> float:
        if self._i == len(self._buf):
            self._buf = self._gen.random(4096).tolist()
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return v

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        v = int(self.random() * n)
        return n - 1 if v == n else v


@dataclass(frozen=True)
class SamplerConfig:
    lam: float = 0.0
    seed: int = 0
    max_restarts: int = 50_000_000
    mode: str = "alg2"  # alg2 | ust_split
    restart_full: bool = False  # walk restart redraws the conditioned edge too
    oracle_cap: int = DEFAULT_VERTEX_CAP
    # First acceptance stage beyond the oracle cap: "resistance" keeps the
    # sampler exact via Pr[edge in UST]; "none" drops the ratio entirely
    # (kept for bias measurement, see tests).
    normalizer: str = "auto"  # auto | oracle | resistance | none

    def __post_init__(self):
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be >= 1")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.mode not in ("alg2", "ust_split"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.normalizer not in ("auto", "oracle", "resistance", "none"):
            raise ValueError(f"unknown normalizer {self.normalizer!r}")


@dataclass(frozen=True)
class SampleOutcome:
    partition: Partition2
    cycle: DualCycle
    start_dual_edge: DualEdge
    restarts: int
    walk_steps: int

    @property
    def imbalance(self) -> float:
        return self.partition.imbalance


def smooth_accept(p: Partition2, lam: float, rng: RandomStream) -> bool:
    """Bernoulli(exp(-lam * imbalance))."""
    if lam == 0 or p.imbalance2 == 0:
        return True
    return rng.random() < math.exp(-lam * p.imbalance2 / 2.0)


def wilson_ust(adj: list[list[int]], root: int, rng: RandomStream,
               step_budget: Optional[int] = None) -> list[int]:
    """Uniform spanning tree via loop-erased random walks.

    Returns a parent array rooted at `root` (parent[root] == -1). The walk
    uses next-pointer cycle popping; `step_budget` guards against hangs on
    adversarial inputs.
    """
    n = len(adj)
    parent = [-1] * n
    in_tree = [False] * n
    in_tree[root] = True
    steps = 0
    for v0 in range(n):
        if in_tree[v0]:
            continue
        u = v0
        while not in_tree[u]:
            nbrs = adj[u]
            parent[u] = nbrs[rng.randint(len(nbrs))]
            u = parent[u]
            steps += 1
            if step_budget is not None and steps > step_budget:
                raise BudgetExceeded("random walk step budget exhausted")
        u = v0
        while not in_tree[u]:
            in_tree[u] = True
            u = parent[u]
    return parent


def tree_edges_from_parents(parent: list[int]) -> list[tuple[int, int]]:
    return [(v, p) for v, p in enumerate(parent) if p >= 0]


class Alg2Sampler:
    """Conditioned-edge loop-erased-walk sampler on the dual.

    Draws a uniform dual edge, walks from one endpoint until hitting the
    other, restarts while the erasure is just the conditioned edge, closes
    the cycle, then applies the two acceptance stages. The first stage's
    per-edge ratio comes from the exact oracle sums within the cap and from
    Pr[edge in UST] (effective resistance, an equally valid normalizer)
    beyond it; both keep the output law exact.
    """

    def __init__(self, g: GridDual, cfg: SamplerConfig, rng: Optional[RandomStream] = None):
        self.g = g
        self.cfg = cfg
        self.rng = rng if rng is not None else RandomStream(cfg.seed)
        self.step_budget = 64 * (g.m * g.n) ** 2
        self._exp_table = _imb_accept_table(g.m * g.n, cfg.lam)
        self._norm_ratio: Optional[list[float]] = None
        which = cfg.normalizer
        if which == "auto":
            which = "oracle" if g.m * g.n <= cfg.oracle_cap else "resistance"
        if which == "oracle":
            total, per_edge = spanning_pair_sums(g, max(cfg.oracle_cap, g.m * g.n))
            self._norm_ratio = [per_edge[e] / total for e in g.primal_edges]
        elif which == "resistance":
            self._norm_ratio = _ust_edge_probabilities(g)

    def sample(self) -> SampleOutcome:
        g = self.g
        rng = self.rng
        n_edges = len(g.primal_edges)
        restarts = 0
        total_steps = 0
        while True:
            cond_eid = rng.randint(n_edges)
            x, y = g.dual_endpoints[cond_eid]
            while True:
                erasure, steps = self._walk_erasure(x, y)
                total_steps += steps
                if len(erasure) == 1 and erasure[0][1] == cond_eid:
                    restarts += 1
                    self._check_restarts(restarts)
                    if self.cfg.restart_full:
                        break
                    continue
                cut_eids = [eid for _, eid in erasure] + [cond_eid]
                outcome = self._accept(cut_eids, cond_eid, restarts, total_steps)
                if outcome is not None:
                    return outcome
                restarts += 1
                self._check_restarts(restarts)
                break

    def samples(self, n: int):
        return [self.sample() for _ in range(n)]

    def _check_restarts(self, restarts: int):
        if restarts >= self.cfg.max_restarts:
            raise BudgetExceeded(f"exceeded {self.cfg.max_restarts} restarts")

    def _walk_erasure(self, x: int, y: int) -> tuple[list[tuple[int, int]], int]:
        """Loop-erased walk x -> y, maintained online.

        Returns ([(vertex, entry edge id), ...] excluding x itself, steps).
        """
        adj = self.g.dual_adj
        rng = self.rng
        budget = self.step_budget
        path: list[tuple[int, int]] = []
        pos = {x: -1}
        cur = x
        steps = 0
        while cur != y:
            nbrs = adj[cur]
            nxt, eid = nbrs[rng.randint(len(nbrs))]
            steps += 1
            if steps > budget:
                raise BudgetExceeded("dual walk exceeded its step budget")
            t = pos.get(nxt)
            if t is None:
                pos[nxt] = len(path)
                path.append((nxt, eid))
            else:
                for entry in path[t + 1:]:
                    del pos[entry[0]]
                del path[t + 1:]
            cur = path[-1][0] if path else x
        return path, steps

    def _accept(self, cut_eids: list[int], cond_eid: int,
                restarts: int, total_steps: int) -> Optional[SampleOutcome]:
        g = self.g
        rng = self.rng
        cut_len = len(cut_eids)
        p_stage1 = 1.0 / cut_len
        if self._norm_ratio is not None:
            p_stage1 *= self._norm_ratio[cond_eid]
        if rng.random() >= p_stage1:
            return None
        interior_mask, exterior_mask = _split_masks(g, cut_eids)
        imb2 = abs(bin(interior_mask).count("1") - bin(exterior_mask).count("1"))
        if rng.random() >= self._exp_table[imb2]:
            return None
        partition = Partition2(g.verts_of(interior_mask), g.verts_of(exterior_mask))
        cycle = DualCycle(frozenset(g.primal_edges[e] for e in cut_eids))
        return SampleOutcome(partition, cycle, g.dual_edge(g.primal_edges[cond_eid]),
                             restarts, total_steps)


class UstSplitSampler:
    """Uniform-spanning-tree edge split with 1/|cut| and balance rejection.

    The literal pipeline (`marginalize=False`) draws one uniform tree edge
    and accepts with exp(-lam*imb)/|cut|. The default marginalizes the edge
    draw: a tree is accepted with sum_e w_e / C and the edge then drawn
    proportional to w_e, which is the identical joint law whenever C is a
    valid upper bound on sum_e w_e. Disjointness of equal-size subtrees
    yields a far tighter C than the trivial (#tree edges), and a cheap
    subtree-size pre-stage defers the cut-size tables to surviving trees.
    """

    def __init__(self, g: GridDual, cfg: SamplerConfig, rng: Optional[RandomStream] = None,
                 marginalize: bool = True):
        self.g = g
        self.cfg = cfg
        self.rng = rng if rng is not None else RandomStream(cfg.seed)
        self.marginalize = marginalize
        self._exp_table = _imb_accept_table(g.m * g.n, cfg.lam)
        self._grid_edge_ids = [(g.pv_id[a], g.pv_id[b]) for a, b in g.primal_edges]
        self._bound = _tree_weight_bound(g.m * g.n, cfg.lam)

    def sample(self) -> SampleOutcome:
        g = self.g
        rng = self.rng
        n = g.m * g.n
        restarts = 0
        steps = 0
        while True:
            parent = wilson_ust(g.primal_adj, 0, rng, step_budget=64 * n * n)
            steps += 1
            choice = self._choose_edge(parent)
            if choice is not None:
                child, order = choice
                interior_mask = _subtree_mask(parent, order, child)
                exterior_mask = g.full_mask & ~interior_mask
                partition = Partition2(g.verts_of(interior_mask), g.verts_of(exterior_mask))
                cut = frozenset(g.primal_edges[eid] for eid in g.cut_edge_ids(interior_mask))
                cycle = DualCycle(cut)
                removed = (g.primal_vertices[child], g.primal_vertices[parent[child]])
                start = g.dual_edge(
                    removed if removed[0] <= removed[1] else (removed[1], removed[0]))
                return SampleOutcome(partition, cycle, start, restarts, steps)
            restarts += 1
            if restarts >= self.cfg.max_restarts:
                raise BudgetExceeded(f"exceeded {self.cfg.max_restarts} restarts")

    def samples(self, n: int):
        return [self.sample() for _ in range(n)]

    def _subtree_sizes(self, parent, depth, order):
        n = len(parent)
        sub_size = [1] * n
        for v in reversed(order):
            p = parent[v]
            if p >= 0:
                sub_size[p] += sub_size[v]
        return sub_size

    def _cut_sizes(self, parent, depth):
        """Cut size of every tree-edge split, keyed by the child vertex.

        Each grid edge (a, b) crosses exactly the tree edges on the tree
        path from a to b.
        """
        cut_size = [0] * len(parent)
        for a, b in self._grid_edge_ids:
            while a != b:
                if depth[a] < depth[b]:
                    a, b = b, a
                cut_size[a] += 1
                a = parent[a]
        return cut_size

    def _choose_edge(self, parent) -> Optional[tuple[int, list[int]]]:
        """One accept/reject round; returns (child vertex, order) or None."""
        g = self.g
        rng = self.rng
        n = g.m * g.n
        exp_t = self._exp_table
        depth, order = _depths(parent)
        sub_size = self._subtree_sizes(parent, depth, order)
        if not self.marginalize:
            cut_size = self._cut_sizes(parent, depth)
            children = [v for v in range(n) if cut_size[v] > 0]
            child = children[rng.randint(len(children))]
            w = (1.0 / cut_size[child]) * exp_t[abs(n - 2 * sub_size[child])]
            return (child, order) if rng.random() < w else None
        # Stage A: bound w_e <= exp_e / 2 needs subtree sizes only.
        half_exp_sum = sum(exp_t[abs(n - 2 * sub_size[v])] for v in range(1, n)) / 2.0
        if rng.random() >= half_exp_sum / self._bound:
            return None
        cut_size = self._cut_sizes(parent, depth)
        weights = []
        children = []
        total = 0.0
        for v in range(n):
            if cut_size[v] == 0:
                continue
            w = (1.0 / cut_size[v]) * exp_t[abs(n - 2 * sub_size[v])]
            children.append(v)
            weights.append(w)
            total += w
        # Stage B: true weights against the stage-A bound.
        if rng.random() >= total / half_exp_sum:
            return None
        r = rng.random() * total
        acc = 0.0
        for v, w in zip(children, weights):
            acc += w
            if r < acc:
                return (v, order)
        return (children[-1], order)


def make_sampler(g: GridDual, cfg: SamplerConfig, rng: Optional[RandomStream] = None):
    if cfg.mode == "alg2":
        return Alg2Sampler(g, cfg, rng)
    return UstSplitSampler(g, cfg, rng)


def sample_alg2(g: GridDual, cfg: SamplerConfig,
                rng: Optional[RandomStream] = None) -> SampleOutcome:
    return Alg2Sampler(g, cfg, rng).sample()


def sample_ust_split(g: GridDual, cfg: SamplerConfig,
                     rng: Optional[RandomStream] = None) -> SampleOutcome:
    return UstSplitSampler(g, cfg, rng).sample()


def _imb_accept_table(n: int, lam: float) -> list[float]:
    """exp(-lam * k / 2) for k = |X|-|Y| in 0..n."""
    return [math.exp(-lam * k / 2.0) for k in range(n + 1)]


def _tree_weight_bound(n: int, lam: float) -> float:
    """Valid upper bound on sum over tree edges of exp(-lam*imb)/2.

    Equal-size lower subtrees of distinct tree edges are disjoint, so at
    most n//s edges split off exactly s vertices; every split weight is at
    most exp(-lam*imb(s))/2 because grid cuts have >= 2 edges.
    """
    total = 0.0
    for s in range(1, n):
        total += (n // s) * math.exp(-lam * abs(n - 2 * s) / 2.0)
    return min(total / 2.0, (n - 1) / 2.0)


def _ust_edge_probabilities(g: GridDual) -> list[float]:
    """Pr[edge in uniform spanning tree] per primal edge (exact ratio
    sp(G contracted at e) / sp(G), evaluated as effective resistance)."""
    n = len(g.primal_vertices)
    lap = np.zeros((n, n))
    for (a, b) in g.primal_edges:
        ia, ib = g.pv_id[a], g.pv_id[b]
        lap[ia, ia] += 1
        lap[ib, ib] += 1
        lap[ia, ib] -= 1
        lap[ib, ia] -= 1
    pinv = np.linalg.pinv(lap)
    out = []
    for (a, b) in g.primal_edges:
        ia, ib = g.pv_id[a], g.pv_id[b]
        out.append(float(pinv[ia, ia] + pinv[ib, ib] - 2 * pinv[ia, ib]))
    return out


def _split_masks(g: GridDual, cut_eids: list[int]) -> tuple[int, int]:
    """Primal side masks for a cut known to be a simple dual cycle."""
    blocked: dict[int, int] = {}
    for eid in cut_eids:
        a, b = g.primal_edges[eid]
        ia, ib = g.pv_id[a], g.pv_id[b]
        blocked[ia] = blocked.get(ia, 0) | (1 << ib)
        blocked[ib] = blocked.get(ib, 0) | (1 << ia)
    nbr = g._nbr_mask
    seed = 1
    reach = seed
    while True:
        frontier = reach
        grow = reach
        k = 0
        while frontier:
            if frontier & 1:
                grow |= nbr[k] & ~blocked.get(k, 0)
            frontier >>= 1
            k += 1
        grow &= g.full_mask
        if grow == reach:
            break
        reach = grow
    side0 = reach
    side1 = g.full_mask & ~side0
    uses_outer = any(g.dual_endpoints[eid][0] == g.outer_id for eid in cut_eids)
    c0, c1 = bin(side0).count("1"), bin(side1).count("1")
    if not uses_outer:
        interior = side0 if (side0 & g.border_mask) == 0 else side1
    elif c0 != c1:
        interior = side0 if c0 < c1 else side1
    else:
        interior = side0 if (side0 & 1) else side1
    return (interior, side0 if interior is side1 else side1)


def _depths(parent: list[int]) -> tuple[list[int], list[int]]:
    """Depths plus a parent-before-child order for a parent array."""
    n = len(parent)
    depth = [-1] * n
    for v in range(n):
        if depth[v] >= 0:
            continue
        chain = []
        u = v
        while depth[u] < 0 and parent[u] >= 0:
            chain.append(u)
            u = parent[u]
        if parent[u] < 0 and depth[u] < 0:
            depth[u] = 0
        for w in reversed(chain):
            depth[w] = depth[parent[w]] + 1
    # Parents precede children when sorted by depth.
    order = sorted(range(n), key=lambda v: depth[v])
    return depth, order


def _subtree_mask(parent: list[int], order: list[int], child: int) -> int:
    n = len(parent)
    inside = [False] * n
    inside[child] = True
    mask = 1 << child
    for v in order:
        p = parent[v]
        if p >= 0 and inside[p] and not inside[v]:
            inside[v] = True
            mask |= 1 << v
    return mask
