"""Candidate costs and the exact per-part selection solve.

Every part must end up with exactly one candidate (Eq 1). A candidate may
require specific parent candidates (Eq 2, chi_c * chi_p - chi_c >= 0) and
no two chosen candidates may order their parts into a cycle (Eq 3,
chi_a * chi_b = 0 on conflicting pairs). The solver is a depth-first
branch and bound over per-part domains with constraint propagation; it is
exact, with an optional wall-clock limit that falls back to the best
incumbent found so far.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from . import geom
from .model_io import EngineConfig

if TYPE_CHECKING:
    from .candidates import Candidate

EPS = 1e-9

# Construction recipes and how many guide strokes each one costs to draw.
# The projective module must emit exactly these many lines per recipe;
# a test pins the two together.
GUIDE_COUNTS = {
    "Align": 1,
    "Half": 3,
    "Third": 6,
    "Quarter": 6,
    "ExtendHalf": 9,
    "ExtendOne": 7,
    "ExtendTwo": 11,
}

# feature catalog: position of the anchored coordinate on the parent axis,
# and which recipe draws it
FEATURE_RECIPE = {
    "LoEdge": "Align",
    "HiEdge": "Align",
    "Half": "Half",
    "HalfLine": "Half",
    "Third": "Third",
    "TwoThird": "Third",
    "Quarter": "Quarter",
    "ThreeQuarter": "Quarter",
    "ExtendHalfLo": "ExtendHalf",
    "ExtendHalfHi": "ExtendHalf",
    "ExtendOneLo": "ExtendOne",
    "ExtendOneHi": "ExtendOne",
    "ExtendTwoLo": "ExtendTwo",
    "ExtendTwoHi": "ExtendTwo",
}


def guide_count(feature: str) -> int:
    return GUIDE_COUNTS[FEATURE_RECIPE[feature]]


def cost_e_d(
    original: geom.Intervals,
    new: geom.Intervals,
    guided_axes: Sequence[bool],
    config: EngineConfig,
) -> float:
    """Geometric deviation cost.

    Guided axes pay relative length and midpoint drift; axes left without
    any guide pay the flat eyeballing penalty. Degenerate axes are free but
    must not move.
    """
    total = 0.0
    for ax in range(3):
        lo0, hi0 = original[ax]
        lo1, hi1 = new[ax]
        len0 = hi0 - lo0
        if len0 <= 0.0:
            if lo1 != lo0 or hi1 != hi0:
                raise ValueError(f"degenerate axis {ax} must not move")
            continue
        if guided_axes[ax]:
            d_len = abs((hi1 - lo1) - len0) / len0
            d_mid = abs(0.5 * (lo1 + hi1) - 0.5 * (lo0 + hi0)) / len0
            total += d_len + d_mid
        else:
            total += config.unguided_axis_penalty
    return total


def cost_e_e(
    entries: Iterable[tuple[str, float]],
    model_max_face_area: float,
    config: EngineConfig,
) -> float:
    """Construction effort cost.

    One entry per guided spec: (feature, host face area). Small host faces
    make guides fiddly to draw, hence the inverse area weight.
    """
    total = 0.0
    for feature, host_area in entries:
        if host_area <= 0.0:
            return math.inf
        total += guide_count(feature) * (model_max_face_area / host_area)
    return config.difficulty_weight * total


@dataclass
class SelectionResult:
    chosen: dict[int, int]            # part id -> candidate id
    objective: float
    optimal: bool
    method: str
    order: list[int]                  # part ids in drawing order
    order_edges: list[tuple[int, int]]
    nodes: int = 0

    def to_dict(self) -> dict:
        return {
            "chosen": {str(k): v for k, v in sorted(self.chosen.items())},
            "objective": self.objective,
            "optimal": self.optimal,
            "method": self.method,
            "order": self.order,
            "order_edges": [list(e) for e in self.order_edges],
        }


class SelectionProblem:
    """Per-part candidate domains plus dependency and ordering structure."""

    def __init__(self, candidates: Sequence["Candidate"]):
        self.by_id: dict[int, "Candidate"] = {}
        self.by_part: dict[int, list[int]] = {}
        for c in candidates:
            if c.id in self.by_id:
                raise ValueError(f"duplicate candidate id {c.id}")
            self.by_id[c.id] = c
            self.by_part.setdefault(c.part_id, []).append(c.id)
        for part, ids in self.by_part.items():
            ids.sort(key=lambda i: (self.by_id[i].cost, i))
        self.parts = sorted(self.by_part)

        self.children_index: dict[int, list[int]] = {i: [] for i in self.by_id}
        for c in candidates:
            for p in c.parent_candidates:
                if p not in self.by_id:
                    raise ValueError(f"candidate {c.id} requires unknown parent {p}")
                self.children_index[p].append(c.id)

        self._closure: dict[int, frozenset[tuple[int, int]]] = {}
        for cid in self.by_id:
            self._edge_closure(cid)

        self.originals: dict[int, int] = {}
        for part, ids in self.by_part.items():
            level0 = [i for i in ids if self.by_id[i].level == 0]
            if len(level0) != 1:
                raise ValueError(f"part {part} must have exactly one original candidate")
            self.originals[part] = level0[0]

    def _edge_closure(self, cid: int, _stack: tuple = ()) -> frozenset[tuple[int, int]]:
        cached = self._closure.get(cid)
        if cached is not None:
            return cached
        if cid in _stack:
            raise ValueError(f"candidate dependency cycle through {cid}")
        c = self.by_id[cid]
        edges: set[tuple[int, int]] = set()
        for p in c.parent_candidates:
            edges.add((self.by_id[p].part_id, c.part_id))
            edges.update(self._edge_closure(p, _stack + (cid,)))
        out = frozenset(edges)
        self._closure[cid] = out
        return out

    def closure(self, cid: int) -> frozenset[tuple[int, int]]:
        return self._closure[cid]

    def cost(self, cid: int) -> float:
        return self.by_id[cid].cost

    def conflict_pair(self, a: int, b: int) -> bool:
        """Would choosing both order their parts into a cycle?"""
        return has_cycle(self.closure(a) | self.closure(b))


def has_cycle(edges: Iterable[tuple[int, int]]) -> bool:
    adj: dict[int, list[int]] = {}
    indeg: dict[int, int] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        indeg[b] = indeg.get(b, 0) + 1
        indeg.setdefault(a, indeg.get(a, 0))
    ready = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for m in adj.get(n, ()):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return seen < len(indeg)


class _Expired(Exception):
    pass


class _Solver:
    def __init__(self, problem: SelectionProblem, time_limit: float | None):
        self.pb = problem
        self.deadline = None if time_limit is None else time.monotonic() + time_limit
        self.nodes = 0
        self.best_cost = math.inf
        self.best_vec: tuple[int, ...] | None = None
        self.best_assignment: dict[int, int] | None = None

    def _check_time(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Expired()

    def _chosen_vec(self, assigned: dict[int, int]) -> tuple[int, ...]:
        return tuple(assigned[p] for p in self.pb.parts)

    def _offer(self, assigned: dict[int, int]) -> None:
        cost = sum(self.pb.cost(c) for c in assigned.values())
        vec = self._chosen_vec(assigned)
        if cost < self.best_cost - EPS:
            self.best_cost, self.best_vec = cost, vec
            self.best_assignment = dict(assigned)
        elif abs(cost - self.best_cost) <= EPS and (
            self.best_vec is None or vec < self.best_vec
        ):
            self.best_cost = min(self.best_cost, cost)
            self.best_vec = vec
            self.best_assignment = dict(assigned)

    def _propagate(
        self, domains: dict[int, list[int]], assigned: dict[int, int],
    ) -> bool:
        """Shrink domains to a fixpoint; False when some part runs dry."""
        pb = self.pb
        changed = True
        while changed:
            changed = False
            union_edges: set[tuple[int, int]] = set()
            for c in assigned.values():
                union_edges |= pb.closure(c)
            if has_cycle(union_edges):
                return False
            # an assigned candidate pins its parent candidates outright
            for c in list(assigned.values()):
                for p in pb.by_id[c].parent_candidates:
                    ppart = pb.by_id[p].part_id
                    if ppart in assigned:
                        if assigned[ppart] != p:
                            return False
                    elif p not in domains.get(ppart, ()):
                        return False
                    elif len(domains[ppart]) > 1:
                        domains[ppart] = [p]
                        changed = True
            for part in list(domains):
                if part in assigned:
                    continue
                keep = []
                for cid in domains[part]:
                    ok = True
                    for p in pb.by_id[cid].parent_candidates:
                        ppart = pb.by_id[p].part_id
                        if ppart in assigned:
                            if assigned[ppart] != p:
                                ok = False
                                break
                        elif p not in domains.get(ppart, ()):
                            ok = False
                            break
                    if ok and has_cycle(union_edges | pb.closure(cid)):
                        ok = False
                    if ok:
                        keep.append(cid)
                if not keep:
                    return False
                if len(keep) != len(domains[part]):
                    domains[part] = keep
                    changed = True
                if len(keep) == 1:
                    assigned[part] = keep[0]
                    del domains[part]
                    changed = True
            # assignments added above alter union_edges, loop again
        return True

    def _bound(self, domains: dict[int, list[int]], assigned: dict[int, int]) -> float:
        b = sum(self.pb.cost(c) for c in assigned.values())
        for part, dom in domains.items():
            b += min(self.pb.cost(c) for c in dom)
        return b

    def _dfs(self, domains: dict[int, list[int]], assigned: dict[int, int]) -> None:
        self._check_time()
        self.nodes += 1
        if not self._propagate(domains, assigned):
            return
        if not domains:
            self._offer(assigned)
            return
        if self._bound(domains, assigned) > self.best_cost + EPS:
            return
        part = min(domains, key=lambda p: (len(domains[p]), p))
        values = list(domains[part])
        for cid in values:
            sub = {p: list(d) for p, d in domains.items()}
            del sub[part]
            sub_assigned = dict(assigned)
            sub_assigned[part] = cid
            self._dfs(sub, sub_assigned)

    def run(self) -> tuple[dict[int, int], bool]:
        # all-originals is always a valid assignment, seed the incumbent
        seed = dict(self.pb.originals)
        assert not has_cycle(
            e for c in seed.values() for e in self.pb.closure(c)
        ), "originals must be conflict free"
        self._offer(seed)
        domains = {p: list(ids) for p, ids in self.pb.by_part.items()}
        optimal = True
        try:
            self._dfs(domains, {})
        except _Expired:
            optimal = False
        assert self.best_assignment is not None
        return self.best_assignment, optimal


def solve(
    problem: SelectionProblem, time_limit: float | None = None,
) -> SelectionResult:
    solver = _Solver(problem, time_limit)
    chosen, optimal = solver.run()
    verify_solution(problem, chosen)
    order, edges = extract_order(problem, chosen)
    return SelectionResult(
        chosen=chosen,
        objective=sum(problem.cost(c) for c in chosen.values()),
        optimal=optimal,
        method="exact",
        order=order,
        order_edges=edges,
        nodes=solver.nodes,
    )


def greedy_select(problem: SelectionProblem) -> SelectionResult:
    """Biggest part first, cheapest feasible candidate each time."""
    pb = problem

    def original_volume(part: int) -> float:
        return geom.volume(pb.by_id[pb.originals[part]].geometry)

    order = sorted(pb.parts, key=lambda p: (-original_volume(p), p))
    picked: dict[int, int] = {}
    picked_edges: set[tuple[int, int]] = set()
    for idx, part in enumerate(order):
        remaining = order[idx + 1:]
        fallback_ids = {pb.originals[r] for r in remaining}
        choice = None
        for cid in pb.by_part[part]:
            cand = pb.by_id[cid]
            if any(p not in picked.values() for p in cand.parent_candidates):
                continue
            if has_cycle(picked_edges | pb.closure(cid)):
                continue
            # completability: every later part keeps at least one option
            trial = set(picked.values()) | {cid} | fallback_ids
            trial_edges = picked_edges | pb.closure(cid)
            viable = all(
                any(
                    set(pb.by_id[r_cid].parent_candidates) <= trial
                    and not has_cycle(trial_edges | pb.closure(r_cid))
                    for r_cid in pb.by_part[r]
                )
                for r in remaining
            )
            if not viable:
                continue
            choice = cid
            break
        if choice is None:
            choice = pb.originals[part]
        picked[part] = choice
        picked_edges |= pb.closure(choice)
    verify_solution(pb, picked)
    draw_order, edges = extract_order(pb, picked)
    return SelectionResult(
        chosen=picked,
        objective=sum(pb.cost(c) for c in picked.values()),
        optimal=False,
        method="greedy",
        order=draw_order,
        order_edges=edges,
    )


def verify_solution(problem: SelectionProblem, chosen: dict[int, int]) -> None:
    """Assert Eqs 1-3 in their quadratic forms plus global acyclicity."""
    chi = {cid: 0 for cid in problem.by_id}
    for part, cid in chosen.items():
        if problem.by_id[cid].part_id != part:
            raise AssertionError(f"candidate {cid} does not belong to part {part}")
        chi[cid] = 1
    # Eq 1: exactly one per part
    for part, ids in problem.by_part.items():
        if sum(chi[c] for c in ids) != 1:
            raise AssertionError(f"part {part} violates the exactly-one constraint")
    # Eq 2: chi_c * chi_p - chi_c >= 0 for every dependency
    for cid, cand in problem.by_id.items():
        for p in cand.parent_candidates:
            if chi[cid] * chi[p] - chi[cid] < 0:
                raise AssertionError(f"candidate {cid} chosen without parent {p}")
    # Eq 3: chi_a * chi_b = 0 on conflicting pairs (chosen pairs suffice,
    # any pair with an unchosen member is trivially zero)
    chosen_ids = sorted(chosen.values())
    for i, a in enumerate(chosen_ids):
        for b in chosen_ids[i + 1:]:
            if problem.conflict_pair(a, b) and chi[a] * chi[b] != 0:
                raise AssertionError(f"conflicting candidates {a} and {b} both chosen")
    edges = set()
    for cid in chosen.values():
        edges |= problem.closure(cid)
    if has_cycle(edges):
        raise AssertionError("chosen candidates order parts into a cycle")


def extract_order(
    problem: SelectionProblem, chosen: dict[int, int],
) -> tuple[list[int], list[tuple[int, int]]]:
    """Topological part order implied by the chosen candidates."""
    edges: set[tuple[int, int]] = set()
    for cid in chosen.values():
        for p in problem.by_id[cid].parent_candidates:
            edges.add((problem.by_id[p].part_id, problem.by_id[cid].part_id))
    indeg = {part: 0 for part in chosen}
    adj: dict[int, list[int]] = {part: [] for part in chosen}
    for a, b in edges:
        adj[a].append(b)
        indeg[b] += 1
    order: list[int] = []
    ready = sorted((p for p, d in indeg.items() if d == 0), reverse=True)
    while ready:
        n = ready.pop()
        order.append(n)
        for m in sorted(adj[n], reverse=True):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
        ready.sort(reverse=True)
    if len(order) != len(chosen):
        raise AssertionError("dependency edges contain a cycle")
    return order, sorted(edges)
