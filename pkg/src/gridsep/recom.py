"""Merge-and-resplit Markov chain for k districts on weighted graphs.

Each step merges a random adjacent district pair, draws a uniform spanning
tree of the merged region, and cuts a uniformly chosen tree edge among
those meeting the balance tolerance. Graphs come from a small JSON schema;
`export_grid_json` writes unit-weight grids in the same format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import DisconnectedGraph, GraphParseError, StepFailed
from .sampler import RandomStream, wilson_ust
from .sampler import _depths as _tree_depths

RETRY_BUDGET = 100


@dataclass
class WeightedGraph:
    node_ids: list
    weights: list[float]
    adj: list[list[int]]  # by node index
    edges: list[tuple[int, int]]
    index: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.node_ids)

    def total_weight(self) -> float:
        return sum(self.weights)


def load_graph(path: str) -> WeightedGraph:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise GraphParseError(f"cannot parse graph file: {exc}") from exc
    return graph_from_dict(raw)


def graph_from_dict(raw: dict) -> WeightedGraph:
    try:
        nodes = raw["nodes"]
        edges = raw["edges"]
        node_ids = [n["id"] for n in nodes]
        weights = [float(n.get("weight", 1)) for n in nodes]
    except (KeyError, TypeError) as exc:
        raise GraphParseError(f"graph schema violation: {exc}") from exc
    if len(set(map(str, node_ids))) != len(node_ids):
        raise GraphParseError("duplicate node ids")
    if any(w < 0 for w in weights):
        raise GraphParseError("negative node weight")
    index = {nid: k for k, nid in enumerate(node_ids)}
    adj: list[list[int]] = [[] for _ in node_ids]
    edge_list = []
    seen = set()
    for e in edges:
        try:
            a, b = index[e[0]], index[e[1]]
        except (KeyError, IndexError, TypeError) as exc:
            raise GraphParseError(f"bad edge {e!r}") from exc
        if a == b or (min(a, b), max(a, b)) in seen:
            raise GraphParseError(f"self-loop or duplicate edge {e!r}")
        seen.add((min(a, b), max(a, b)))
        adj[a].append(b)
        adj[b].append(a)
        edge_list.append((min(a, b), max(a, b)))
    for lst in adj:
        lst.sort()
    g = WeightedGraph(node_ids, weights, adj, sorted(edge_list), index)
    if not _connected(g):
        raise DisconnectedGraph("graph is not connected")
    return g


def _connected(g: WeightedGraph) -> bool:
    if g.n == 0:
        return False
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in g.adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


def export_grid_json(rows: int, cols: int) -> dict:
    nodes = [{"id": f"{i},{j}", "weight": 1} for i in range(1, rows + 1)
             for j in range(1, cols + 1)]
    edges = []
    for i in range(1, rows + 1):
        for j in range(1, cols + 1):
            if j < cols:
                edges.append([f"{i},{j}", f"{i},{j + 1}"])
            if i < rows:
                edges.append([f"{i},{j}", f"{i + 1},{j}"])
    return {"nodes": nodes, "edges": edges}


@dataclass
class KPartition:
    assignment: list[int]  # node index -> district in 0..k-1
    k: int
    eps: float

    def districts(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for node, d in enumerate(self.assignment):
            out[d].append(node)
        return out

    def copy(self) -> "KPartition":
        return KPartition(self.assignment[:], self.k, self.eps)


def check_kpartition(g: WeightedGraph, p: KPartition) -> list[str]:
    problems = []
    target = g.total_weight() / p.k
    lo, hi = (1 - p.eps) * target, (1 + p.eps) * target
    for d, nodes in enumerate(p.districts()):
        if not nodes:
            problems.append(f"district {d} empty")
            continue
        w = sum(g.weights[v] for v in nodes)
        if not (lo - 1e-9 <= w <= hi + 1e-9):
            problems.append(f"district {d} weight {w} outside [{lo}, {hi}]")
        node_set = set(nodes)
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            u = stack.pop()
            for x in g.adj[u]:
                if x in node_set and x not in seen:
                    seen.add(x)
                    stack.append(x)
        if len(seen) != len(nodes):
            problems.append(f"district {d} disconnected")
    return problems


def _adjacent_district_pairs(g: WeightedGraph, p: KPartition) -> list[tuple[int, int]]:
    pairs = set()
    for (a, b) in g.edges:
        da, db = p.assignment[a], p.assignment[b]
        if da != db:
            pairs.add((min(da, db), max(da, db)))
    return sorted(pairs)


def _balanced_tree_children(g: WeightedGraph, nodes: list[int], parent: list[int],
                            win_a: tuple[float, float],
                            win_b: tuple[float, float]) -> list[int]:
    """Local-index children whose subtree/remainder weights land in the windows."""
    n = len(nodes)
    _depth, order = _tree_depths(parent)
    sub_w = [g.weights[nodes[v]] for v in range(n)]
    for v in reversed(order):
        if parent[v] >= 0:
            sub_w[parent[v]] += sub_w[v]
    total = sum(g.weights[nodes[v]] for v in range(n))
    good = []
    for v in range(n):
        if parent[v] < 0:
            continue
        w = sub_w[v]
        fits = (win_a[0] - 1e-9 <= w <= win_a[1] + 1e-9
                and win_b[0] - 1e-9 <= total - w <= win_b[1] + 1e-9)
        fits_swapped = (win_b[0] - 1e-9 <= w <= win_b[1] + 1e-9
                        and win_a[0] - 1e-9 <= total - w <= win_a[1] + 1e-9)
        if fits or fits_swapped:
            good.append(v)
    return good


def _split_merged(g: WeightedGraph, nodes: list[int],
                  win_a: tuple[float, float], win_b: tuple[float, float],
                  rng: RandomStream, retries: int = RETRY_BUDGET
                  ) -> tuple[set[int], set[int]]:
    """Split a connected node set by a balanced uniform-spanning-tree cut."""
    local = {node: k for k, node in enumerate(nodes)}
    adj = [[local[w] for w in g.adj[node] if w in local] for node in nodes]
    for _ in range(retries):
        parent = wilson_ust(adj, 0, rng, step_budget=64 * len(nodes) ** 2)
        good = _balanced_tree_children(g, nodes, parent, win_a, win_b)
        if not good:
            continue
        child = good[rng.randint(len(good))]
        side = set()
        stack = [child]
        kids: dict[int, list[int]] = {}
        for v, pv in enumerate(parent):
            if pv >= 0:
                kids.setdefault(pv, []).append(v)
        while stack:
            x = stack.pop()
            side.add(x)
            stack.extend(kids.get(x, ()))
        part_a = {nodes[x] for x in side}
        part_b = {nodes[x] for x in range(len(nodes)) if x not in side}
        return part_a, part_b
    raise StepFailed(f"no balanced split within {retries} trees")


def recom_step(g: WeightedGraph, p: KPartition, rng: RandomStream) -> KPartition:
    """One merge-and-resplit move; only the merged pair's districts change."""
    pairs = _adjacent_district_pairs(g, p)
    da, db = pairs[rng.randint(len(pairs))]
    nodes = sorted(v for v in range(g.n) if p.assignment[v] in (da, db))
    target = g.total_weight() / p.k
    win = ((1 - p.eps) * target, (1 + p.eps) * target)
    part_a, _part_b = _split_merged(g, nodes, win, win, rng)
    new = p.copy()
    for v in nodes:
        new.assignment[v] = da if v in part_a else db
    return new


def initial_partition(g: WeightedGraph, k: int, eps: float,
                      rng: RandomStream, attempts: int = 20) -> KPartition:
    """Recursive balanced bisection into k parts via spanning-tree cuts.

    Intermediate groups get half the final tolerance so the leaves still
    land inside it; the result is validated and the whole construction
    retried on the rare miss.
    """
    total = g.total_weight()
    target = total / k

    def window(parts: int) -> tuple[float, float]:
        slack = eps * target * (1.0 if parts == 1 else 0.5) * parts
        return (parts * target - slack, parts * target + slack)

    def split(nodes: list[int], parts: int) -> list[set[int]]:
        if parts == 1:
            return [set(nodes)]
        ka = parts // 2
        kb = parts - ka
        part_a, part_b = _split_merged(g, nodes, window(ka), window(kb), rng,
                                       retries=RETRY_BUDGET * 5)
        wa = sum(g.weights[v] for v in part_a)
        if abs(wa - ka * target) > abs(wa - kb * target):
            ka, kb = kb, ka
        return split(sorted(part_a), ka) + split(sorted(part_b), kb)

    last_problems: list[str] = []
    for _ in range(attempts):
        groups = split(sorted(range(g.n)), k)
        assignment = [0] * g.n
        for d, group in enumerate(groups):
            for v in group:
                assignment[v] = d
        cand = KPartition(assignment, k, eps)
        last_problems = check_kpartition(g, cand)
        if not last_problems:
            return cand
    raise StepFailed(f"initial partition failed: {last_problems}")


def run_chain(g: WeightedGraph, init: KPartition, steps: int, thin: int,
              rng: RandomStream) -> Iterator[KPartition]:
    """Yield the initial state and every thin-th state after it."""
    state = init
    yield state
    for t in range(1, steps + 1):
        state = recom_step(g, state, rng)
        if thin > 0 and t % thin == 0:
            yield state
