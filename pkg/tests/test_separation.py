import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from cgkit.determinism import DeterminationTable, determined_set
from cgkit.errors import GuardError, QueryError
from cgkit.graph import ChainGraph, VARIABLE, validate
from cgkit.models import random_cg
from cgkit.separation import (
    AMP,
    LWF,
    SeparationQuery,
    amp_separated,
    amp_separated_oracle,
    amp_witness,
    determined_query_nodes,
    effective_conditioning,
    lwf_route_oracle,
    lwf_separated,
    lwf_witness,
    separated,
)
from cgkit.transforms import to_eamp, to_selection_dag

from _corpus import canonical_triples, demo_graph


def q(x, y, z=(), semantics=AMP, table=None):
    return SeparationQuery(x, y, z, semantics, table or DeterminationTable())


# --- query validation ------------------------------------------------------


def test_query_sets_must_be_disjoint_and_nonempty():
    g = demo_graph()
    with pytest.raises(QueryError):
        amp_separated(g, q({"A"}, {"A"}))
    with pytest.raises(QueryError):
        amp_separated(g, q(set(), {"A"}))
    with pytest.raises(QueryError):
        amp_separated(g, q({"A"}, {"B"}, {"A"}))
    with pytest.raises(QueryError):
        amp_separated(g, q({"Q"}, {"B"}))


def test_semantics_validated():
    with pytest.raises(QueryError, match="unknown semantics"):
        SeparationQuery({"A"}, {"B"}, (), "magic", DeterminationTable())


# --- spec'd examples -------------------------------------------------------


def test_demo_amp_examples():
    g = demo_graph()
    assert amp_separated(g, q({"C"}, {"B"}, {"A"}))
    assert not amp_separated(g, q({"C"}, {"B"}))
    assert amp_separated_oracle(g, q({"C"}, {"B"}, {"A"}))
    assert not amp_separated_oracle(g, q({"C"}, {"B"}))


def test_disconnected_parts_always_separated():
    g = ChainGraph(["A", "B"], [], [])
    assert amp_separated(g, q({"A"}, {"B"}))
    assert lwf_separated(g, q({"A"}, {"B"}, (), LWF))


def test_demo_gprime_lwf_example():
    ep = to_eamp(demo_graph())
    assert lwf_separated(ep.graph, q({"C"}, {"B"}, {"A"}, LWF, ep.table))


def test_selection_collider_examples():
    ep = to_eamp(demo_graph())
    gpp, sel = to_selection_dag(ep)
    s = "sel(eps(C),eps(D))"
    assert s in sel
    assert lwf_separated(gpp, q({"eps(C)"}, {"eps(D)"}, (), LWF, ep.table))
    assert not lwf_separated(gpp, q({"eps(C)"}, {"eps(D)"}, {s}, LWF, ep.table))
    # same pattern on a graph small enough for the route oracle
    small = to_eamp(ChainGraph(["A", "B"], [], [("A", "B")]))
    sdag, ssel = to_selection_dag(small)
    (sn,) = ssel
    assert lwf_route_oracle(sdag, q({"eps(A)"}, {"eps(B)"}, (), LWF, small.table))
    assert not lwf_route_oracle(sdag, q({"eps(A)"}, {"eps(B)"}, {sn}, LWF, small.table))


def test_effective_conditioning_demo_gprime():
    ep = to_eamp(demo_graph())
    qq = q({"C"}, {"F"}, {"A", "B", "D"}, AMP, ep.table)
    assert effective_conditioning(qq) == {"A", "B", "D", "eps(A)", "eps(B)", "eps(D)"}
    # E is parentless, so {E} alone covers the rule for eps(E); C's rule needs A
    qq2 = q({"A"}, {"F"}, {"C", "E"}, AMP, ep.table)
    assert effective_conditioning(qq2) == {"C", "E", "eps(E)"}
    qq3 = q({"A"}, {"F"}, {"C"}, AMP, ep.table)
    assert effective_conditioning(qq3) == {"C"}


def test_determined_query_nodes_flagged_and_blocked():
    g = ChainGraph(["A", "B"], [], [("A", "B")])
    ep = to_eamp(g)
    qq = q({"eps(A)"}, {"eps(B)"}, {"A"}, AMP, ep.table)
    assert determined_query_nodes(qq) == {"eps(A)"}
    # a determined endpoint is swallowed by conditioning: all four agree
    assert amp_separated(ep.graph, qq)
    assert amp_separated_oracle(ep.graph, qq)
    lq = q({"eps(A)"}, {"eps(B)"}, {"A"}, LWF, ep.table)
    assert lwf_separated(ep.graph, lq)
    assert lwf_route_oracle(ep.graph, lq)


def test_dispatcher_uses_semantics():
    g = ChainGraph(["A", "B", "C"], [("A", "B")], [("B", "C")])  # flag at B
    table = DeterminationTable()
    assert separated(g, q({"A"}, {"C"}, {"B"}, AMP, table)) != separated(
        g, q({"A"}, {"C"}, {"B"}, LWF, table)
    )


# --- witnesses -------------------------------------------------------------


def test_amp_witness_route():
    g = demo_graph()
    route = amp_witness(g, q({"C"}, {"B"}))
    assert route[0][0] == "C" and route[-1] == ("B", None)
    assert route == [("C", "<-"), ("A", "->"), ("B", None)]
    assert amp_witness(g, q({"C"}, {"B"}, {"A"})) is None


def test_lwf_witness_path():
    ep = to_eamp(demo_graph())
    path = lwf_witness(ep.graph, q({"C"}, {"B"}, (), LWF, ep.table))
    assert path[0] == "C" and path[-1] == "B"
    assert lwf_witness(ep.graph, q({"C"}, {"B"}, {"A"}, LWF, ep.table)) is None


def test_witness_agrees_with_engine_on_demo():
    g = demo_graph()
    for x, y, z in canonical_triples(g.nodes):
        qq = q(x, y, z)
        assert (amp_witness(g, qq) is None) == amp_separated(g, qq)


# --- guards ----------------------------------------------------------------


def test_oracle_guards():
    big = random_cg(13, 0.3, 0)
    with pytest.raises(GuardError):
        amp_separated_oracle(big, q({"A"}, {"B"}))
    mid = random_cg(9, 0.3, 0)
    with pytest.raises(GuardError):
        lwf_route_oracle(mid, q({"A"}, {"B"}, (), LWF))


# --- property tests over random graphs and tables --------------------------


def _random_graph_and_table(n, seed, kinds=("variable",)):
    rnd = random.Random(seed)
    names = [chr(65 + i) for i in range(n)]
    pairs = list(itertools.combinations(names, 2))
    while True:
        directed, undirected = set(), set()
        for a, b in pairs:
            c = rnd.randrange(4)
            if c == 1:
                directed.add((a, b))
            elif c == 2:
                directed.add((b, a))
            elif c == 3:
                undirected.add((a, b))
        g = ChainGraph({v: VARIABLE for v in names}, directed, undirected)
        if not validate(g):
            break
    rules = set()
    for _ in range(rnd.randrange(4)):
        t = rnd.choice(names)
        dets = frozenset(v for v in names if v != t and rnd.random() < 0.4)
        if dets:
            rules.add((dets, t))
    return g, DeterminationTable(rules)


def _random_triple(names, rnd):
    while True:
        assign = [rnd.randrange(4) for _ in names]
        x = frozenset(v for v, a in zip(names, assign) if a == 0)
        y = frozenset(v for v, a in zip(names, assign) if a == 1)
        z = frozenset(v for v, a in zip(names, assign) if a == 2)
        if x and y:
            return x, y, z


@given(st.integers(2, 6), st.integers(0, 10**6))
@settings(max_examples=200)
def test_engines_match_oracles_with_random_tables(n, seed):
    g, table = _random_graph_and_table(n, seed)
    rnd = random.Random(seed ^ 0xABCDEF)
    names = sorted(g.nodes)
    for _ in range(10):
        x, y, z = _random_triple(names, rnd)
        qa = q(x, y, z, AMP, table)
        ql = q(x, y, z, LWF, table)
        assert amp_separated(g, qa) == amp_separated_oracle(g, qa)
        assert lwf_separated(g, ql) == lwf_route_oracle(g, ql)


@given(st.integers(2, 7), st.integers(0, 10**6))
def test_symmetry(n, seed):
    g, table = _random_graph_and_table(n, seed)
    rnd = random.Random(seed ^ 0x5EED)
    names = sorted(g.nodes)
    for _ in range(8):
        x, y, z = _random_triple(names, rnd)
        for sem, fn in ((AMP, amp_separated), (LWF, lwf_separated)):
            assert fn(g, q(x, y, z, sem, table)) == fn(g, q(y, x, z, sem, table))


@given(st.integers(2, 7), st.integers(0, 10**6))
def test_dag_agreement_empty_table(n, seed):
    rnd = random.Random(seed)
    names = [chr(65 + i) for i in range(n)]
    directed = {(a, b) for a, b in itertools.combinations(names, 2) if rnd.random() < 0.4}
    g = ChainGraph({v: VARIABLE for v in names}, directed, [])
    for _ in range(8):
        x, y, z = _random_triple(names, rnd)
        assert amp_separated(g, q(x, y, z)) == lwf_separated(g, q(x, y, z, LWF))


@given(st.integers(2, 7), st.integers(0, 10**6))
def test_adjacent_nodes_never_separate(n, seed):
    g, table = _random_graph_and_table(n, seed)
    rnd = random.Random(seed ^ 0xFACE)
    names = sorted(g.nodes)
    edges = sorted(g.directed) + sorted(g.undirected)
    if not edges:
        return
    for _ in range(6):
        a, b = rnd.choice(edges)
        rest = [v for v in names if v not in (a, b)]
        z = frozenset(v for v in rest if rnd.random() < 0.4)
        if determined_set(table, z) & {a, b}:
            continue  # conditioning swallows an endpoint; adjacency no longer applies
        assert not amp_separated(g, q({a}, {b}, z, AMP, table))
        assert not lwf_separated(g, q({a}, {b}, z, LWF, table))


@given(st.integers(2, 7), st.integers(0, 10**6))
def test_conditioning_on_closure_is_equivalent(n, seed):
    g, table = _random_graph_and_table(n, seed)
    rnd = random.Random(seed ^ 0xC105)
    names = sorted(g.nodes)
    for _ in range(6):
        x, y, z = _random_triple(names, rnd)
        dz = determined_set(table, z)
        if dz & (x | y):
            continue
        for sem, fn in ((AMP, amp_separated), (LWF, lwf_separated)):
            assert fn(g, q(x, y, z, sem, table)) == fn(g, q(x, y, dz, sem, table))


@given(st.integers(2, 7), st.integers(0, 10**6))
def test_iteration_order_does_not_matter(n, seed):
    g, table = _random_graph_and_table(n, seed)
    rnd = random.Random(seed ^ 0x0DE2)
    names = sorted(g.nodes)
    x, y, z = _random_triple(names, rnd)
    base = [
        amp_separated(g, q(x, y, z, AMP, table)),
        lwf_separated(g, q(x, y, z, LWF, table)),
    ]
    shuffled = list(g.nodes)
    rnd.shuffle(shuffled)
    g2 = ChainGraph(
        {v: g.kind(v) for v in shuffled},
        sorted(g.directed, reverse=True),
        sorted(g.undirected, reverse=True),
    )
    assert base == [
        amp_separated(g2, q(x, y, z, AMP, table)),
        lwf_separated(g2, q(x, y, z, LWF, table)),
    ]
