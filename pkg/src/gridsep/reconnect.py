"""Local repair of partitions that separate a marked adjacent pair.

`unseparate` searches deterministically over small flip sets near the pair
for a feasible partition keeping the pair together, changing side sizes by
at most 3, and never raising the outer-face cut degree. The search order
(fewest flips, then smallest size change, then lexicographic) makes results
canonical, which keeps preimage counts small when the map is applied to
every separating cycle of a grid in `verify_unseparating_map`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import InfeasiblePartition, NoCandidateFound
from .grid import (DualCycle, GridDual, Partition2, PrimalVertex, SubgridWindow,
                   locally_different)
from .oracle import enumerate_partitions

DEFAULT_GAMMA = 10
DEFAULT_N0 = 6
DEFAULT_MAX_FLIPS = 6


@dataclass(frozen=True)
class ReconnectResult:
    partition: Partition2
    flipped: frozenset[PrimalVertex]
    delta_size: int
    outer_degree_before: int
    outer_degree_after: int
    regime_ok: bool  # sides and grid at least n0; informational only


@dataclass
class UnsepReport:
    grid: tuple[int, int]
    edge: tuple[PrimalVertex, PrimalVertex]
    min_len: int
    gamma: int
    instances: int = 0
    beta_observed: int = 0
    delta_observed: float = 0.0
    max_preimage: int = 0
    window_shapes: list[tuple[int, int]] = field(default_factory=list)
    deltas_gt2: int = 0
    failures: list[str] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)

    @property
    def passes(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "edge": [list(self.edge[0]), list(self.edge[1])],
            "min_len": self.min_len,
            "gamma": self.gamma,
            "instances": self.instances,
            "beta_observed": self.beta_observed,
            "delta_observed": self.delta_observed,
            "max_preimage": self.max_preimage,
            "deltas_gt2": self.deltas_gt2,
            "passes": self.passes,
            "failures": self.failures,
        }


def _ball_ids(g: GridDual, u: PrimalVertex, v: PrimalVertex, gamma: int) -> list[int]:
    out = []
    for w in g.primal_vertices:
        du = abs(w[0] - u[0]) + abs(w[1] - u[1])
        dv = abs(w[0] - v[0]) + abs(w[1] - v[1])
        if min(du, dv) <= gamma:
            out.append(g.pv_id[w])
    return out


def unseparate(g: GridDual, p: Partition2, u: PrimalVertex, v: PrimalVertex,
               gamma: int = DEFAULT_GAMMA, n0: int = DEFAULT_N0,
               max_flips: int = DEFAULT_MAX_FLIPS) -> ReconnectResult:
    """Rejoin u and v by flipping few vertices near them.

    Accepts the first candidate, in canonical search order, that is
    feasible, keeps u,v together, moves at most 3 vertices of balance, and
    does not increase the number of border cut edges. `n0` marks the size
    regime the guarantees are stated for; instances below it are still
    attempted and simply flagged on the result.
    """
    if abs(u[0] - v[0]) + abs(u[1] - v[1]) != 1:
        raise ValueError("u and v must be adjacent")
    if not p.separates(u, v):
        raise ValueError("u and v are not separated by the partition")
    imask = g.mask_of(p.interior)
    if not g.connected_mask(imask) or not g.connected_mask(g.full_mask & ~imask):
        raise InfeasiblePartition("input partition is infeasible")

    uid, vid = g.pv_id[u], g.pv_id[v]
    outer_before = g.outer_degree_mask(imask)
    base_pop = bin(imask).count("1")
    regime_ok = (min(g.m, g.n) >= n0
                 and min(base_pop, g.m * g.n - base_pop) >= n0)

    ball = [w for w in _ball_ids(g, u, v, gamma) if w not in (uid, vid)]
    ball.sort(key=lambda w: g.primal_vertices[w])
    full = g.full_mask

    for k in range(1, max_flips + 1):
        candidates = []
        for anchor in (uid, vid):
            anchor_coord = g.primal_vertices[anchor]
            for rest in itertools.combinations(ball, k - 1):
                flip_mask = (1 << anchor) | sum(1 << w for w in rest)
                new_mask = imask ^ flip_mask
                delta = bin(new_mask).count("1") - base_pop
                if abs(delta) > 3:
                    continue
                coords = tuple(sorted([anchor_coord] +
                                      [g.primal_vertices[w] for w in rest]))
                candidates.append((abs(delta), coords, flip_mask, new_mask, delta))
        candidates.sort(key=lambda t: (t[0], t[1]))
        for (_ad, coords, flip_mask, new_mask, delta) in candidates:
            if ((new_mask >> uid) & 1) != ((new_mask >> vid) & 1):
                continue
            comp = full & ~new_mask
            if new_mask == 0 or comp == 0:
                continue
            if g.outer_degree_mask(new_mask) > outer_before:
                continue
            if not g.connected_mask(new_mask) or not g.connected_mask(comp):
                continue
            return ReconnectResult(
                partition=Partition2(g.verts_of(new_mask), g.verts_of(comp)),
                flipped=frozenset(coords),
                delta_size=delta,
                outer_degree_before=outer_before,
                outer_degree_after=g.outer_degree_mask(new_mask),
                regime_ok=regime_ok,
            )
    raise NoCandidateFound(
        f"no repair within {max_flips} flips of gamma={gamma} ball for "
        f"u={u} v={v} interior={sorted(p.interior)}")


def sweep_all_pairs(g: GridDual, gamma: int = DEFAULT_GAMMA,
                    max_flips: int = DEFAULT_MAX_FLIPS,
                    partitions: Optional[list[Partition2]] = None,
                    cap: int = 32) -> dict:
    """Exhaustive reconnection over every (partition, separated pair).

    Returns counters plus the first failure detail, if any; used by the
    acceptance gate where any failure is build-blocking.
    """
    if partitions is None:
        partitions = enumerate_partitions(g, cap=cap)
    stats = {"instances": 0, "max_flips_used": 0, "failures": []}
    for p in partitions:
        imask = g.mask_of(p.interior)
        for eid in g.cut_edge_ids(imask):
            u, v = g.primal_edges[eid]
            stats["instances"] += 1
            try:
                res = unseparate(g, p, u, v, gamma=gamma, max_flips=max_flips)
            except NoCandidateFound as exc:
                stats["failures"].append(str(exc))
                continue
            stats["max_flips_used"] = max(stats["max_flips_used"], len(res.flipped))
    return stats


def verify_unseparating_map(g: GridDual, u: PrimalVertex, v: PrimalVertex,
                            min_len: int = 0, gamma: int = DEFAULT_GAMMA,
                            max_flips: int = DEFAULT_MAX_FLIPS,
                            partitions: Optional[list[Partition2]] = None,
                            cap: int = 32) -> UnsepReport:
    """Build the cycle map over every separating cycle and audit it.

    Properties audited: the pair of cycles differs inside a bounded window
    (its edge count is reported as beta_observed); border cut degree never
    increases; imbalance moves by at most 3 (values above 2 are counted,
    not failed); and no target cycle is hit by more than max_preimage
    sources, including itself when it lies in the domain.
    """
    if partitions is None:
        partitions = enumerate_partitions(g, cap=cap)
    report = UnsepReport((g.m, g.n), (u, v), min_len, gamma)
    preimages: dict[frozenset, int] = {}
    in_domain_targets: set[frozenset] = set()

    for p in partitions:
        imask = g.mask_of(p.interior)
        cut = frozenset(g.primal_edges[e] for e in g.cut_edge_ids(imask))
        if len(cut) >= min_len and not p.separates(u, v):
            # Identity images inside the domain count toward preimage sizes.
            in_domain_targets.add(cut)
    for p in partitions:
        imask = g.mask_of(p.interior)
        cut_ids = g.cut_edge_ids(imask)
        if len(cut_ids) < min_len or not p.separates(u, v):
            continue
        report.instances += 1
        cut = frozenset(g.primal_edges[e] for e in cut_ids)
        try:
            res = unseparate(g, p, u, v, gamma=gamma, max_flips=max_flips)
        except NoCandidateFound as exc:
            report.failures.append(str(exc))
            continue
        new_cut = frozenset(
            g.primal_edges[e]
            for e in g.cut_edge_ids(g.mask_of(res.partition.interior)))
        window = locally_different(cut, new_cut, g)
        if window is None:
            report.failures.append(f"map fixed a separating cycle at {sorted(cut)}")
            continue
        report.beta_observed = max(report.beta_observed, window.edge_count())
        report.window_shapes.append(window.shape)
        outer_before = g.outer_degree_of_cut(cut)
        outer_after = g.outer_degree_of_cut(new_cut)
        if outer_after > outer_before:
            report.failures.append(f"outer degree grew at {sorted(cut)}")
        d_imb = abs(p.imbalance - res.partition.imbalance)
        report.delta_observed = max(report.delta_observed, d_imb)
        if d_imb > 2:
            report.deltas_gt2 += 1
        if d_imb > 3:
            report.failures.append(f"imbalance moved by {d_imb} at {sorted(cut)}")
        preimages[new_cut] = preimages.get(new_cut, 0) + 1
        report.records.append({
            "cut_len": len(cut),
            "new_cut_len": len(new_cut),
            "flips": len(res.flipped),
            "window_edges": window.edge_count(),
            "imb_delta": d_imb,
        })
    for tgt, count in preimages.items():
        total = count + (1 if tgt in in_domain_targets else 0)
        report.max_preimage = max(report.max_preimage, total)
    return report
