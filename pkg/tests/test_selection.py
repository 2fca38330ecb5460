"""Exact selection against exhaustive enumeration, plus the quадratic checks.

The enumeration oracle reimplements validity from the constraint statement:
exactly one candidate per part, parents of every chosen candidate chosen
too, and the implied part ordering free of cycles. Closure and the cycle
test are rewritten here (recursive DFS) so a bug in the engine's Kahn scan
cannot hide itself.
"""

import itertools
import math
import random

import pytest

from h2s.candidates import Candidate
from h2s.primitives import KIND_CUBOID
from h2s.selection import (
    EPS,
    GUIDE_COUNTS,
    SelectionProblem,
    greedy_select,
    has_cycle,
    solve,
    verify_solution,
)


def make_cand(cid, part, level=0, parents=(), e_d=0.0, e_e=0.0, size=1.0):
    geometry = tuple((float(part), float(part) + size) for _ in range(3))
    return Candidate(
        id=cid, part_id=part, kind=KIND_CUBOID, level=level,
        geometry=geometry, parent_candidates=tuple(parents),
        e_d=e_d, e_e=e_e)


# --- independent validity + search -----------------------------------------

def oracle_part_edges(by_id, cid):
    """Part-order edges implied by choosing cid, via recursive descent."""
    edges = set()

    def walk(c):
        for p in by_id[c].parent_candidates:
            edges.add((by_id[p].part_id, by_id[c].part_id))
            walk(p)

    walk(cid)
    return edges


def oracle_has_cycle(edges):
    """Colored DFS, deliberately not the engine's Kahn algorithm."""
    adj = {}
    nodes = set()
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        nodes.update((a, b))
    state = {n: 0 for n in nodes}

    def visit(n):
        if state[n] == 1:
            return True
        if state[n] == 2:
            return False
        state[n] = 1
        if any(visit(m) for m in adj.get(n, ())):
            return True
        state[n] = 2
        return False

    return any(visit(n) for n in nodes if state[n] == 0)


def brute_force(cands):
    by_id = {c.id: c for c in cands}
    by_part = {}
    for c in cands:
        by_part.setdefault(c.part_id, []).append(c.id)
    parts = sorted(by_part)
    best_cost = math.inf
    best_vecs = []
    for combo in itertools.product(*(by_part[p] for p in parts)):
        chosen = set(combo)
        if not all(set(by_id[c].parent_candidates) <= chosen for c in combo):
            continue
        edges = set()
        for c in combo:
            edges |= oracle_part_edges(by_id, c)
        if oracle_has_cycle(edges):
            continue
        cost = sum(by_id[c].e_d + by_id[c].e_e for c in combo)
        if cost < best_cost - 1e-12:
            best_cost = cost
            best_vecs = [combo]
        elif abs(cost - best_cost) <= 1e-12:
            best_vecs.append(combo)
    return best_cost, best_vecs, parts


def random_instance(rng):
    n_parts = rng.randint(3, 5)
    cands = [make_cand(p, p, level=0, e_d=6.0, size=1.0 + 0.1 * p)
             for p in range(n_parts)]
    total = rng.randint(n_parts + 1, 14)
    cid = n_parts
    while cid < total:
        part = rng.randrange(n_parts)
        others = [c.id for c in cands if c.part_id != part]
        k = rng.choice([0, 1, 1, 2])
        parents = tuple(sorted(rng.sample(others, min(k, len(others)))))
        cands.append(make_cand(
            cid, part, level=1, parents=parents,
            e_d=round(rng.uniform(0.0, 4.0), 3),
            e_e=round(rng.uniform(0.0, 4.0), 3)))
        cid += 1
    return cands


def test_solver_matches_enumeration_on_random_instances():
    rng = random.Random(4242)
    for trial in range(80):
        cands = random_instance(rng)
        pb = SelectionProblem(cands)
        want_cost, want_vecs, parts = brute_force(cands)
        res = solve(pb)
        assert res.optimal and res.method == "exact"
        assert res.objective == pytest.approx(want_cost, abs=1e-9), trial
        got_vec = tuple(res.chosen[p] for p in parts)
        assert got_vec in want_vecs, trial
        # equal-cost optima resolve to the lexicographically least vector
        assert got_vec == min(want_vecs), trial


def test_solver_forced_around_conflict():
    # cheap candidates of both parts depend on each other's part in
    # opposite directions; only one of them may be chosen
    cands = [
        make_cand(0, 0, level=0, e_d=6.0),
        make_cand(1, 1, level=0, e_d=6.0),
        make_cand(2, 0, level=1, parents=(1,), e_d=1.0),
        make_cand(3, 1, level=1, parents=(0,), e_d=1.0),
    ]
    pb = SelectionProblem(cands)
    assert pb.conflict_pair(2, 3)
    assert not pb.conflict_pair(2, 1)
    res = solve(pb)
    assert res.objective == pytest.approx(7.0)
    assert sorted(res.chosen.values()) in ([0, 3], [1, 2])
    # lexicographic tie-break: part 0 keeps the smaller candidate id
    assert res.chosen[0] == 0 and res.chosen[1] == 3


def test_solver_follows_dependency_chains():
    # the cheap level-2 candidate needs a specific non-original parent
    cands = [
        make_cand(0, 0, level=0, e_d=6.0),
        make_cand(1, 1, level=0, e_d=6.0),
        make_cand(2, 2, level=0, e_d=6.0),
        make_cand(3, 1, level=1, parents=(0,), e_d=5.0),
        make_cand(4, 2, level=1, parents=(3,), e_d=0.5),
    ]
    res = solve(SelectionProblem(cands))
    assert res.chosen == {0: 0, 1: 3, 2: 4}
    assert res.order == [0, 1, 2]
    assert res.order_edges == [(0, 1), (1, 2)]


def test_time_limit_returns_flagged_incumbent():
    rng = random.Random(7)
    cands = []
    for p in range(12):
        cands.append(make_cand(len(cands), p, level=0, e_d=6.0))
    for _ in range(60):
        p = rng.randrange(12)
        others = [c.id for c in cands if c.part_id != p]
        parents = tuple(sorted(rng.sample(others, 2)))
        cands.append(make_cand(len(cands), p, level=1, parents=parents,
                               e_d=rng.uniform(0, 4)))
    pb = SelectionProblem(cands)
    res = solve(pb, time_limit=1e-9)
    assert not res.optimal
    verify_solution(pb, res.chosen)      # incumbent is still valid
    full = solve(pb)
    assert full.optimal
    assert full.objective <= res.objective + EPS


def test_solve_never_beats_nothing_but_originals():
    rng = random.Random(97)
    for _ in range(30):
        cands = random_instance(rng)
        pb = SelectionProblem(cands)
        originals_cost = sum(
            pb.cost(pb.originals[p]) for p in pb.parts)
        res = solve(pb)
        assert res.objective <= originals_cost + EPS


# --- quadratic constraint checker, written from the equations ---------------

def quadratic_violations(pb, chosen):
    """Evaluate Eqs 1-3 literally over the full chi vector."""
    chi = {cid: 1 if chosen.get(pb.by_id[cid].part_id) == cid else 0
           for cid in pb.by_id}
    violations = []
    for part, ids in pb.by_part.items():
        if sum(chi[i] for i in ids) != 1:
            violations.append(("eq1", part))
    for cid, cand in pb.by_id.items():
        for p in cand.parent_candidates:
            if chi[cid] * chi[p] - chi[cid] < 0:
                violations.append(("eq2", cid, p))
    ids = sorted(pb.by_id)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if pb.conflict_pair(a, b) and chi[a] * chi[b] != 0:
                violations.append(("eq3", a, b))
    return violations


@pytest.mark.parametrize("name", ["two_cuboids", "chain4", "mixer", "hopper"])
def test_fixture_solutions_satisfy_quadratic_equations(name, plan_of):
    plan = plan_of(name)
    pb = SelectionProblem(plan.candidates)
    assert quadratic_violations(pb, plan.selection.chosen) == []
    greedy = greedy_select(pb)
    assert quadratic_violations(pb, greedy.chosen) == []


def test_quadratic_checker_catches_violations():
    cands = [
        make_cand(0, 0, level=0, e_d=6.0),
        make_cand(1, 1, level=0, e_d=6.0),
        make_cand(2, 0, level=1, parents=(1,), e_d=1.0),
        make_cand(3, 1, level=1, parents=(0,), e_d=1.0),
        make_cand(4, 1, level=1, e_d=2.0),
    ]
    pb = SelectionProblem(cands)
    assert quadratic_violations(pb, {0: 0, 1: 1}) == []
    assert quadratic_violations(pb, {0: 2, 1: 1}) == []
    # choosing 4 displaces the parent candidate 2 depends on
    assert ("eq2", 2, 1) in quadratic_violations(pb, {0: 2, 1: 4})
    assert ("eq3", 2, 3) in quadratic_violations(pb, {0: 2, 1: 3})
    assert ("eq1", 1) in quadratic_violations(pb, {0: 0})


def test_linearization_truth_tables():
    # Eq 2: chi_c * chi_p - chi_c >= 0  is exactly  chi_c <= chi_p
    for chi_c, chi_p in itertools.product((0, 1), repeat=2):
        assert (chi_c * chi_p - chi_c >= 0) == (chi_c <= chi_p)
    # Eq 3: chi_a * chi_b == 0  is exactly  chi_a + chi_b <= 1
    for chi_a, chi_b in itertools.product((0, 1), repeat=2):
        assert (chi_a * chi_b == 0) == (chi_a + chi_b <= 1)


# --- greedy -------------------------------------------------------------------

def test_greedy_is_valid_but_not_optimal_on_chain4(plan_of):
    plan = plan_of("chain4")
    pb = SelectionProblem(plan.candidates)
    greedy = greedy_select(pb)
    exact = plan.selection
    assert not greedy.optimal and greedy.method == "greedy"
    verify_solution(pb, greedy.chosen)
    # the chain fixture is built to punish biggest-part-first ordering
    assert greedy.objective > exact.objective + 1e-6
    assert exact.objective == pytest.approx(7.9537, abs=1e-3)
    assert greedy.objective == pytest.approx(8.6083, abs=1e-3)


def test_greedy_matches_exact_on_simple_fixtures(plan_of):
    for name, want in (("two_cuboids", 6.6500), ("table8", 15.2627)):
        plan = plan_of(name)
        pb = SelectionProblem(plan.candidates)
        greedy = greedy_select(pb)
        assert greedy.objective == pytest.approx(plan.selection.objective,
                                                 abs=1e-9)
        assert plan.selection.objective == pytest.approx(want, abs=1e-3)


def test_greedy_never_below_exact_on_random_instances():
    rng = random.Random(321)
    for _ in range(40):
        cands = random_instance(rng)
        pb = SelectionProblem(cands)
        greedy = greedy_select(pb)
        verify_solution(pb, greedy.chosen)
        assert greedy.objective >= solve(pb).objective - EPS


# --- problem construction and helpers ------------------------------------------

def test_problem_rejects_duplicate_ids():
    with pytest.raises(ValueError, match="duplicate"):
        SelectionProblem([make_cand(0, 0), make_cand(0, 1)])


def test_problem_rejects_unknown_parent():
    with pytest.raises(ValueError, match="unknown parent"):
        SelectionProblem([
            make_cand(0, 0),
            make_cand(1, 1, level=1, parents=(99,)),
        ])


def test_problem_requires_exactly_one_original():
    with pytest.raises(ValueError, match="exactly one original"):
        SelectionProblem([
            make_cand(0, 0), make_cand(1, 0),    # two level-0 for part 0
        ])
    with pytest.raises(ValueError, match="exactly one original"):
        SelectionProblem([
            make_cand(0, 0),
            make_cand(1, 1, level=1),            # part 1 has no original
        ])


def test_problem_rejects_candidate_dependency_cycle():
    with pytest.raises(ValueError, match="cycle"):
        SelectionProblem([
            make_cand(0, 0, level=0),
            make_cand(1, 1, level=0),
            make_cand(2, 0, level=1, parents=(3,)),
            make_cand(3, 1, level=1, parents=(2,)),
        ])


def test_domains_sorted_by_cost_then_id():
    cands = [
        make_cand(0, 0, level=0, e_d=6.0),
        make_cand(1, 0, level=1, e_d=2.0, e_e=0.0),
        make_cand(2, 0, level=1, e_d=0.5, e_e=1.5),   # same cost as id 1
        make_cand(3, 0, level=1, e_d=0.1),
        make_cand(4, 1, level=0, e_d=6.0),
    ]
    pb = SelectionProblem(cands)
    assert pb.by_part[0] == [3, 1, 2, 0]


def test_has_cycle_known_graphs():
    assert not has_cycle([])
    assert not has_cycle([(0, 1), (1, 2), (0, 2)])
    assert has_cycle([(0, 1), (1, 2), (2, 0)])
    assert has_cycle([(5, 5)])
    # disconnected components, one cyclic
    assert has_cycle([(0, 1), (7, 8), (8, 7)])


def test_verify_solution_raises_on_bad_inputs():
    cands = [
        make_cand(0, 0, level=0, e_d=6.0),
        make_cand(1, 1, level=0, e_d=6.0),
        make_cand(2, 1, level=1, parents=(0,), e_d=1.0),
    ]
    pb = SelectionProblem(cands)
    verify_solution(pb, {0: 0, 1: 2})
    with pytest.raises(AssertionError, match="does not belong"):
        verify_solution(pb, {0: 1, 1: 2})
    with pytest.raises(AssertionError, match="exactly-one"):
        verify_solution(pb, {0: 0})


def test_result_to_dict_shape():
    cands = [make_cand(0, 0, level=0, e_d=6.0),
             make_cand(1, 1, level=0, e_d=6.0)]
    res = solve(SelectionProblem(cands))
    d = res.to_dict()
    assert set(d) == {"chosen", "objective", "optimal", "method",
                      "order", "order_edges"}
    assert d["chosen"] == {"0": 0, "1": 1}
    assert "nodes" not in d


def test_guide_counts_table_pinned():
    assert GUIDE_COUNTS == {
        "Align": 1, "Half": 3, "Third": 6, "Quarter": 6,
        "ExtendHalf": 9, "ExtendOne": 7, "ExtendTwo": 11,
    }
