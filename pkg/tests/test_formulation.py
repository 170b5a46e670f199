import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cycleagg.formulation import (TAUTOLOGY, ChainKind, LinearInequality, SubdivisionMap, UnsupportedCaseError,
                                  classify_chain, clause_inequality, edge_inequalities, fold_chain, join_clauses,
                                  lift_inequality_by_subdivision, metric_form, mobius_chain,
                                  mobius_implied_inequality, mobius_sharper_inequality, nonconvex_objective,
                                  odd_cycle_inequality, projective_distance, round_to_hypercube)
from cycleagg.instances import Clause, Graph, Literal, ValidationError
from cycleagg.oracles import independent_sets


def L(k):
    return Literal.from_dimacs(k)


# --- independent set encoding ---

def test_single_edge_inequality():
    (ineq,) = edge_inequalities(Graph.from_edges(2, [(0, 1)]))
    assert ineq.coeffs == {0: 1.0, 1: 1.0} and ineq.rhs == 0 and ineq.sense == "<="


def test_edge_inequalities_counts(triangle):
    assert len(edge_inequalities(triangle)) == 3
    assert edge_inequalities(Graph(4, frozenset())) == []


def test_halved_edge_inequalities(triangle):
    assert all(set(i.coeffs.values()) == {0.5} for i in edge_inequalities(triangle, halved=True))


def test_odd_cycle_inequality():
    ineq = odd_cycle_inequality([0, 1, 2])
    assert ineq.coeffs == {0: 1, 1: 1, 2: 1} and ineq.rhs == -1
    assert len(odd_cycle_inequality(range(5), Graph.cycle(5)).coeffs) == 5


def test_even_cycle_rejected():
    with pytest.raises(ValidationError):
        odd_cycle_inequality([0, 1, 2, 3])


def test_non_cycle_rejected():
    with pytest.raises(ValidationError):
        odd_cycle_inequality([0, 2, 1, 3, 4], Graph.cycle(5))


def test_cycle_inequality_valid_on_independent_sets():
    g = Graph.cycle(7)
    ineq = odd_cycle_inequality(range(7), g)
    assert all(ineq.holds(w) for w in independent_sets(g))


def test_edge_sums_only_imply_zero(c5):
    # w = 0 satisfies every edge inequality yet violates the cycle inequality
    w = np.zeros(5)
    assert all(i.holds(w) for i in edge_inequalities(c5))
    assert not odd_cycle_inequality(range(5), c5).holds(w)
    total = sum(edge_inequalities(c5, halved=True)[1:], edge_inequalities(c5, halved=True)[0])
    assert total.coeffs == {v: 1.0 for v in range(5)} and total.rhs == 0


def test_inequality_json_round_trip():
    ineq = LinearInequality({0: 1.0, 3: -2.0}, 1.5, ">=")
    d = ineq.to_json()
    assert d["coeffs"] == {"1": 1.0, "4": -2.0}
    assert LinearInequality.from_json(d) == ineq


def test_empty_inequality_rejected():
    with pytest.raises(ValidationError):
        LinearInequality({0: 0.0}, 1.0)


# --- subdivision lifting ---

def test_triangle_lifts_to_c5(triangle):
    smap = SubdivisionMap.build(triangle, {(0, 1): 3})
    lifted = lift_inequality_by_subdivision(odd_cycle_inequality([0, 1, 2]), smap)
    g5 = smap.graph()
    assert g5.n == 5 and g5.m == 5
    assert lifted == odd_cycle_inequality([0, 3, 4, 1, 2], g5)


def test_identity_subdivision(triangle):
    ineq = odd_cycle_inequality([0, 1, 2])
    assert lift_inequality_by_subdivision(ineq, SubdivisionMap(triangle)) == ineq


def test_even_path_rejected(triangle):
    with pytest.raises(ValidationError):
        SubdivisionMap.build(triangle, {(0, 1): 2})


def test_non_unit_coefficients_unsupported(triangle):
    with pytest.raises(UnsupportedCaseError):
        lift_inequality_by_subdivision(LinearInequality({0: 2.0, 1: 1.0}, -1.0), SubdivisionMap(triangle))


BASES = {
    "triangle": (Graph.cycle(3), [0, 1, 2]),
    "c5": (Graph.cycle(5), [0, 1, 2, 3, 4]),
    "k4": (Graph.from_edges(4, itertools.combinations(range(4), 2)), [0, 1, 2]),
}


@pytest.mark.parametrize("name", sorted(BASES))
@pytest.mark.parametrize("seed", range(4))
def test_lifted_inequality_valid_exhaustively(name, seed):
    base, cyc = BASES[name]
    rng = np.random.default_rng(seed)
    budget = 12 - base.n
    lengths = {}
    for e in sorted(base.edges):
        extra = int(rng.choice([0, 2, 4]))
        if extra and extra <= budget:
            lengths[e] = extra + 1
            budget -= extra
    smap = SubdivisionMap.build(base, lengths)
    g = smap.graph()
    assert g.n <= 12
    lifted = lift_inequality_by_subdivision(odd_cycle_inequality(cyc, base), smap)
    assert all(lifted.holds(w) for w in independent_sets(g))


# --- objective and rounding ---

def test_nonconvex_objective():
    assert nonconvex_objective(np.zeros(4), 3.0) == 0
    w = np.array([1, -1, -1, 1, 1])
    assert nonconvex_objective(w, 0.7) == pytest.approx(w.sum() + 0.7 * 5)
    assert nonconvex_objective([0.2, -0.5], 0.0) == pytest.approx(-0.3)


def test_rounding():
    assert list(round_to_hypercube([0.3, -0.7])) == [1, -1]
    assert list(round_to_hypercube(np.zeros(3))) == [1, 1, 1]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-0.999, 0.999), min_size=1, max_size=8))
def test_rounding_within_unit_distance(w):
    w = np.array(w)
    gap = np.abs(w - round_to_hypercube(w))
    # ties round to +1, so a zero coordinate sits at distance exactly 1
    r = round_to_hypercube(w)
    assert np.all(r[w != 0] == np.sign(w[w != 0]))
    assert np.all(gap[np.abs(w) > 1e-12] < 1)
    assert np.all(gap[w == 0] == 1)


# --- clauses and chains ---

def test_clause_inequality():
    ineq = clause_inequality(Clause.of(1, 2, -3))
    assert ineq.coeffs == {0: 1, 1: 1, 2: -1} and ineq.rhs == -1 and ineq.sense == ">="
    assert clause_inequality(Clause.of(-1, -2, -3)).coeffs == {0: -1, 1: -1, 2: -1}


def test_clause_inequality_values_on_satisfying_assignments():
    c = Clause.of(1, -2, 3)
    ineq = clause_inequality(c)
    for x in itertools.product((1, -1), repeat=3):
        if c.satisfied_by(x):
            assert ineq.lhs(x) in (-1, 1, 3)
        else:
            assert ineq.lhs(x) == -3


def test_join_pair_of_clauses():
    # (a v b v ~c) join_c (c v d v e) = a v b v d v e
    out = join_clauses(Clause.of(1, 2, -3), Clause.of(3, 4, 5), 2)
    assert out == Clause.of(1, 2, 4, 5)


def test_join_errors():
    with pytest.raises(ValidationError):
        join_clauses(Clause.of(1, 2, 3), Clause.of(3, 4, 5), 2)
    with pytest.raises(ValidationError):
        join_clauses(Clause.of(1, 2, 3), Clause.of(4, 5, 6), 2)


def test_joined_inequality_is_sum_of_constituents():
    c1, c2 = Clause.of(1, 2, -3), Clause.of(3, 4, 5)
    joined = clause_inequality(join_clauses(c1, c2, 2))
    assert joined == clause_inequality(c1) + clause_inequality(c2)


def two_chain(l5):
    return [Clause((L(1), L(2), L(-3))), Clause((L(3), L(4), -l5))]


def test_classify_chains():
    assert classify_chain(two_chain(L(5))) is ChainKind.OPEN_PATH
    assert classify_chain(two_chain(L(1))) is ChainKind.ORDINARY_CYCLE
    assert classify_chain(two_chain(L(-1))) is ChainKind.MOBIUS_CYCLE
    assert classify_chain([Clause.of(1, 2, 3), Clause.of(4, 5, 6)]) is ChainKind.INVALID
    assert classify_chain([]) is ChainKind.INVALID


def test_ordinary_cycle_folds_to_tautology():
    assert fold_chain(two_chain(L(1))) is TAUTOLOGY


def test_mobius_cycle_merges_duplicate():
    assert fold_chain(two_chain(L(-1))) == Clause((L(1), L(2), L(4)))


def random_open_chain(k, rng):
    vs = rng.permutation(2 * k + 1)
    lits = [Literal(int(v), bool(rng.random() < 0.5)) for v in vs]
    return lits, [Clause((lits[2 * i], lits[2 * i + 1], -lits[2 * i + 2])) for i in range(k)]


@pytest.mark.parametrize("k", range(1, 7))
def test_open_chain_fold_and_sum(k):
    rng = np.random.default_rng(k)
    for _ in range(5):
        lits, chain = random_open_chain(k, rng)
        assert classify_chain(chain) is ChainKind.OPEN_PATH
        folded = fold_chain(chain)
        assert folded == Clause((lits[0], *lits[1:2 * k:2], -lits[2 * k]))
        total = clause_inequality(chain[0])
        for c in chain[1:]:
            total = total + clause_inequality(c)
        assert clause_inequality(folded) == total


def test_mobius_inequalities_k2():
    chain = two_chain(L(-1))
    assert mobius_sharper_inequality(chain) == LinearInequality({0: 1, 1: 1, 3: 1}, -1.0, ">=")
    assert mobius_implied_inequality(chain) == LinearInequality({0: 2, 1: 1, 3: 1}, -2.0, ">=")


def test_sharper_rejects_non_mobius():
    with pytest.raises(ValidationError):
        mobius_sharper_inequality(two_chain(L(5)))


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_mobius_sharper_valid_and_slack_gap(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(3):
        vs = rng.permutation(2 * k)
        lits = [Literal(int(v), bool(rng.random() < 0.5)) for v in vs]
        chain = mobius_chain(k, lits[0], lits[1:])
        assert classify_chain(chain) is ChainKind.MOBIUS_CYCLE
        sharp, implied = mobius_sharper_inequality(chain), mobius_implied_inequality(chain)
        for x in itertools.product((1, -1), repeat=2 * k):
            if all(c.satisfied_by(x) for c in chain):
                assert sharp.holds(x)
        x = rng.uniform(-1, 1, 2 * k)
        assert implied.slack(x) - sharp.slack(x) == pytest.approx(1 + lits[0].value(x))


# --- projective metric ---

def test_distance_zero_on_diagonal():
    x = np.array([0.2, 0.3, 0.5])
    assert projective_distance(x, x) == 0
    assert projective_distance(x, x, 4, "slack") == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.05, 5), min_size=2, max_size=6), st.integers(0, 1000), st.sampled_from([2, 4, 6]))
def test_distance_symmetric_and_scale_invariant(s, seed, p):
    s = np.array(s)
    t = np.random.default_rng(seed).uniform(0.05, 5, len(s))
    d = projective_distance(s, t, p, "slack")
    assert d == pytest.approx(projective_distance(t, s, p, "slack"), rel=1e-12)
    k = np.exp(1.7)
    assert d == pytest.approx(projective_distance(k * s, k * t, p, "slack"), rel=1e-10, abs=1e-12)


def test_distance_domain_errors():
    with pytest.raises(ValueError):
        projective_distance([0.5, 0.5], [1.0, 0.0])
    with pytest.raises(ValueError):
        projective_distance([0.5, 0.5], [0.5, 0.5], p=3)


def test_metric_form_examples():
    assert metric_form([0.5, 0.5], [0.0, 0.0]) == 0
    assert metric_form([0.5, 0.5], [0.5, -0.5]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        metric_form([0.0, 1.0], [1.0, 1.0])


@pytest.mark.parametrize("mode", ["simplex", "slack"])
def test_metric_is_second_order_coefficient(mode):
    x = np.array([0.2, 0.3, 0.5])
    dx = np.array([0.1, 0.05, -0.15])
    t = 1e-4
    d2 = lambda s: projective_distance(x, x + s * dx, 2, mode) ** 2  # noqa: E731
    coef = (d2(t) + d2(-t)) / (2 * t * t)
    assert coef == pytest.approx(metric_form(x, dx, 2), rel=1e-6)
