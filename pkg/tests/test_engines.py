import json

import pytest
from hypothesis import given, settings, strategies as st

from localitylab import engines as eng
from localitylab import graphcore as gc
from localitylab import lcl


def label_collector(t):
    """Extensional program: multiset of labels visible within t rounds."""
    def program(view, n):
        return tuple(sorted(view.subgraph.labels[v] for v in view.subgraph.nodes()))
    return eng.LocalAlgorithm("collect", t, program)


def label_collector_rounds(t):
    """Same output produced by t synchronous flooding rounds."""
    def init(me, n, rng):
        return frozenset([(me.node, me.label)])

    def rnd(me, state, incoming):
        merged = set(state)
        for _, s in incoming:
            merged |= s
        return frozenset(merged)

    def out(me, state):
        return tuple(sorted(lbl for _, lbl in state))

    return eng.LocalAlgorithm("collect_rounds", t, init_fn=init, round_fn=rnd,
                              output_fn=out, rounds=t)


def greedy_slocal(t=1):
    def step(view, processed, prior, n):
        taken = {out for u, (out, _) in processed.items()
                 if view.subgraph.has_edge(u, view.center) or view.subgraph.has_edge(view.center, u)}
        c = 1
        while c in taken:
            c += 1
        return c, None
    return eng.SlocalAlgorithm("greedy", t, step)


def greedy_online(t=1):
    def step(memory, revealed, v, rng, prior):
        taken = {memory[w] for w in revealed.neighbors(v) if w in memory}
        c = 1
        while c in taken:
            c += 1
        memory = dict(memory)
        memory[v] = c
        return c, memory

    return eng.OnlineAlgorithm("greedy_online", t, step, init=lambda n: {})


# -- LOCAL ------------------------------------------------------------------


def test_local_sees_light_cone_only():
    tri = gc.LabeledGraph([1, 2, 3], [(1, 2), (1, 3), (2, 3)])

    def program(view, n):
        return len(view.subgraph.edges)

    out = eng.run_local(eng.LocalAlgorithm("edges", 1, program), tri)
    assert out == {1: 2, 2: 2, 3: 2}  # frontier-frontier edge invisible


def test_local_surgery_invariance():
    g = gc.gen_family("path", [7])
    alg = label_collector(2)
    base = eng.run_local(alg, g)
    # modify the graph strictly outside ball(4, 2): nodes 1 and 7 region
    h = gc.LabeledGraph({**g.labels, 8: "zzz"}, list(g.edges) + [(7, 8)],
                        check_id_range=False)
    after = eng.run_local(alg, h)
    assert after[4] == base[4]
    assert after[3] == base[3]
    assert after[6] != base[6]  # inside distance 2 of the surgery


def test_round_style_matches_extensional():
    g = gc.gen_family("random_bounded_degree", [25, 3], seed=4)
    for t in (0, 1, 2):
        a = eng.run_local(label_collector(t), g)
        b = eng.run_local(label_collector_rounds(t), g)
        assert a == b


def test_uses_n_gating():
    g = gc.gen_family("path", [5])
    seen = []

    def program(view, n):
        seen.append(n)
        return 0

    eng.run_local(eng.LocalAlgorithm("x", 0, program, uses_n=False), g)
    assert set(seen) == {None}
    seen.clear()
    eng.run_local(eng.LocalAlgorithm("x2", 0, program, uses_n=True), g)
    assert set(seen) == {5}


def test_uses_ids_anonymization():
    def program(view, n):
        return tuple(sorted(view.subgraph.nodes())), view.center

    g1 = gc.LabeledGraph([5, 6], [(5, 6)], check_id_range=False)
    g2 = gc.LabeledGraph([80, 90], [(80, 90)], check_id_range=False)
    a1 = eng.run_local(eng.LocalAlgorithm("anon", 1, program, uses_ids=False), g1)
    a2 = eng.run_local(eng.LocalAlgorithm("anon", 1, program, uses_ids=False), g2)
    assert a1[5] == a2[80]  # identical anonymous views


def test_coin_bits_deterministic_per_seed():
    g = gc.gen_family("path", [6])

    def program(view, n, coins):
        return coins

    alg = eng.LocalAlgorithm("coins", 0, program, coin_bits=8)
    a = eng.run_local(alg, g, seed=42)
    b = eng.run_local(alg, g, seed=42)
    c = eng.run_local(alg, g, seed=43)
    assert a == b
    assert a != c
    with pytest.raises(eng.EngineError):
        eng.run_local(alg, g)  # randomized without a seed


def test_ports_required_when_declared():
    g = gc.gen_family("path", [3])
    alg = eng.LocalAlgorithm("p", 1, lambda v, n: 0, uses_ports=True)
    with pytest.raises(eng.EngineError):
        eng.run_local(alg, g)


# -- SLOCAL -------------------------------------------------------------------


def test_slocal_greedy_is_proper():
    g = gc.gen_family("random_bounded_degree", [30, 4], seed=8)
    out, _ = eng.run_slocal(greedy_slocal(), g, sorted(g.nodes()))
    assert lcl.verify(lcl.q_coloring(5), g, out) == []


def test_slocal_radius_zero_order_independent():
    g = gc.gen_family("cycle", [8])

    def step(view, processed, prior, n):
        return view.subgraph.labels[view.center] + "!", None

    alg = eng.SlocalAlgorithm("const", 0, step)
    a, _ = eng.run_slocal(alg, g, sorted(g.nodes()))
    b, _ = eng.run_slocal(alg, g, sorted(g.nodes(), reverse=True))
    assert a == b


def test_slocal_chained_state_propagates():
    g = gc.gen_family("path", [6])

    def step(view, processed, prior, n):
        depth = max([st for _, (out, st) in processed.items()], default=0)
        return depth + 1, depth + 1

    alg = eng.SlocalAlgorithm("chain", 1, step)
    out, _ = eng.run_slocal(alg, g, [1, 2, 3, 4, 5, 6])
    assert out[6] == 6  # each step saw its predecessor's state


def test_slocal_order_validation():
    g = gc.gen_family("path", [3])
    with pytest.raises(eng.EngineError):
        eng.run_slocal(greedy_slocal(), g, [1, 2])


def test_compose_slocal_equals_staged_run():
    g = gc.gen_family("random_bounded_degree", [20, 3], seed=5)
    order = sorted(g.nodes(), reverse=True)
    first = greedy_slocal()

    def second_step(view, processed, prior, n):
        return prior[-1][view.center] * 10, None

    second = eng.SlocalAlgorithm("tenfold", 0, second_step)
    composed = eng.compose_slocal(first, second)
    got, _ = eng.run_slocal(composed, g, order)
    stage1, _ = eng.run_slocal(first, g, order)
    want = {v: stage1[v] * 10 for v in g.nodes()}
    assert got == want
    assert eng.resolve_locality(composed.locality, g.n) == 1


def test_compose_locality_adds():
    a = eng.SlocalAlgorithm("a", 2, lambda *x: (0, None))
    b = eng.SlocalAlgorithm("b", 3, lambda *x: (0, None))
    c = eng.compose_slocal(a, b)
    assert eng.resolve_locality(c.locality, 10) == 5
    d = eng.compose_slocal(c, a)
    assert eng.resolve_locality(d.locality, 10) == 7
    assert len(d.stages()) == 3


# -- ONLINE -------------------------------------------------------------------


def test_online_reveals_induced_union():
    g = gc.gen_family("cycle", [6])
    seen = []

    def step(memory, revealed, v, rng, prior):
        seen.append((sorted(revealed.nodes()), sorted(revealed.edges)))
        return 0, memory

    alg = eng.OnlineAlgorithm("watch", 1, step)
    eng.run_online(alg, g, [1, 4, 3])
    assert seen[0] == ([1, 2, 6], [(1, 2), (1, 6)])
    assert seen[1] == ([1, 2, 3, 4, 5, 6], sorted(g.edges))  # balls of 1,4 cover all
    # induced union: edge (2,3) appeared although neither 2 nor 3 was processed
    assert (2, 3) in seen[1][1]


def test_online_trap_on_unrevealed_access():
    g = gc.gen_family("path", [9])

    def step(memory, revealed, v, rng, prior):
        revealed.neighbors(9)  # far end is not revealed at step one
        return 0, memory

    with pytest.raises(eng.EngineError):
        eng.run_online(eng.OnlineAlgorithm("nosy", 1, step), g, [1, 2])


def test_online_greedy_proper_and_deterministic():
    g = gc.gen_family("random_bounded_degree", [40, 4], seed=13)
    order = sorted(g.nodes())
    out1, tr1 = eng.run_online(greedy_online(), g, order)
    out2, tr2 = eng.run_online(greedy_online(), g, order)
    assert out1 == out2
    assert tr1.to_json() == tr2.to_json()
    assert lcl.verify(lcl.q_coloring(5), g, out1) == []


def test_online_randomized_seed_streams():
    g = gc.gen_family("path", [30])

    def step(memory, revealed, v, rng, prior):
        return rng.randint(0, 10 ** 9), memory

    alg = eng.OnlineAlgorithm("noise", 1, step, randomized=True)
    a, _ = eng.run_online(alg, g, sorted(g.nodes()), seed=1)
    b, _ = eng.run_online(alg, g, sorted(g.nodes()), seed=1)
    c, _ = eng.run_online(alg, g, sorted(g.nodes()), seed=2)
    assert a == b
    assert a != c
    # per-node streams: processing order must not shift a node's randomness
    d, _ = eng.run_online(alg, g, sorted(g.nodes(), reverse=True), seed=1)
    assert d == a
    with pytest.raises(eng.EngineError):
        eng.run_online(alg, g, sorted(g.nodes()))


def test_transcript_json_and_replay():
    g = gc.gen_family("cycle", [5])
    out, tr = eng.run_online(greedy_online(), g, [3, 1, 5, 2, 4])
    doc = json.loads(tr.to_json())
    assert doc["model"] == "online"
    assert [s["node"] for s in doc["steps"]] == [3, 1, 5, 2, 4]
    assert eng.replay_transcript(greedy_online(), g, tr) == out


def test_adaptive_adversary_sees_outputs_and_can_be_refused():
    g = gc.gen_family("path", [4])
    outputs_seen = []

    def adversary(revealed, outputs, remaining):
        outputs_seen.append(dict(outputs))
        return remaining[0]

    out, tr = eng.run_online_adaptive(greedy_online(), g, adversary)
    assert len(outputs_seen) == 4
    assert outputs_seen[1] != {}
    with pytest.raises(eng.EngineError):
        eng.run_online_adaptive(greedy_online(), g, adversary,
                                allow_adaptive=False)


def test_order_validation_online():
    g = gc.gen_family("path", [3])
    with pytest.raises(eng.EngineError):
        eng.run_online(greedy_online(), g, [1, 1, 2])
    with pytest.raises(eng.EngineError):
        eng.run_online(greedy_online(), g, [99])


# -- registry -----------------------------------------------------------------


def test_registry_round_trip():
    @eng.register("test_dummy_algorithm")
    def factory(t=1):
        return label_collector(t)

    alg = eng.get_algorithm("test_dummy_algorithm", t=2)
    assert alg.locality == 2
    with pytest.raises(eng.EngineError):
        eng.get_algorithm("no_such_algorithm")
    with pytest.raises(eng.EngineError):
        eng.register("test_dummy_algorithm")(factory)


# -- property: revealed region growth -----------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.randoms(use_true_random=False))
def test_online_reveal_growth_property(n, rnd):
    g = gc.gen_family("path", [n])
    order = list(g.nodes())
    rnd.shuffle(order)
    sizes = []

    def step(memory, revealed, v, rng, prior):
        sizes.append(revealed.n)
        return 0, memory

    eng.run_online(eng.OnlineAlgorithm("grow", 1, step), g, order)
    assert sizes == sorted(sizes)
    assert sizes[-1] == n
