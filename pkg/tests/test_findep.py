import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from localitylab import graphcore as gc
from localitylab import findep as fd
from localitylab import lcl
from localitylab.engines import LocalAlgorithm, derive_seed


# -- oracles --------------------------------------------------------------
#
# Brute-force law of the insertion coloring of an m-cycle: enumerate every
# arrival order and branch over every color choice with its exact
# probability.  Unlike the module, this makes no use of the fact that all
# histories are equally likely, so it independently validates that claim.

def oracle_cycle_law(m, q):
    orders = list(itertools.permutations(range(m)))
    law = {}
    for order in orders:
        frontier = [((0,) * m, Fraction(1, len(orders)))]
        for p in order:
            nxt = []
            for row, pr in frontier:
                excl = set()
                for d in range(1, m):
                    c = row[(p + d) % m]
                    if c:
                        excl.add(c)
                        break
                for d in range(1, m):
                    c = row[(p - d) % m]
                    if c:
                        excl.add(c)
                        break
                free = [c for c in range(1, q + 1) if c not in excl]
                for c in free:
                    nxt.append((row[:p] + (c,) + row[p + 1:], pr / len(free)))
            frontier = nxt
        for row, pr in frontier:
            law[row] = law.get(row, Fraction(0)) + pr
    return law


def oracle_window(law, n):
    out = {}
    for row, pr in law.items():
        key = row[:n]
        out[key] = out.get(key, Fraction(0)) + pr
    return out


def law_of(g, q):
    order, w, d = fd.exact_baseline_weights(g, q)
    return order, fd.distribution_from_weights(w, d)


# -- the gate: exact factorization before anything builds on the law -------

def run_exact_gate(n_max):
    for q, k in ((4, 1), (3, 2)):
        for topo in ("path", "cycle"):
            for n in range(2, n_max + 1):
                if topo == "cycle" and n < 3:
                    continue
                g = gc.gen_family(topo, [n])
                order, w, d = fd.exact_baseline_weights(g, q)
                rep = fd.check_k_dependence_exact(g, order, w, d, k)
                assert rep["ok"], (q, topo, n, rep["violations"][:1])


def test_exact_dependence_gate():
    run_exact_gate(6)


@pytest.fixture(scope="module")
def gate():
    run_exact_gate(5)


def test_exact_law_matches_brute_force_q4():
    for m in (3, 4, 5):
        g = gc.gen_family("cycle", [m])
        order, dist = law_of(g, 4)
        assert order == list(range(1, m + 1))
        assert dist == oracle_cycle_law(m, 4)


def test_exact_law_matches_brute_force_q3():
    for m in (3, 4, 5):
        g = gc.gen_family("cycle", [m])
        _, dist = law_of(g, 3)
        assert dist == oracle_cycle_law(m, 3)


def test_path_law_matches_brute_force_window():
    for q, k, sizes in ((4, 1, (2, 3, 4)), (3, 2, (2, 3))):
        for n in sizes:
            g = gc.gen_family("path", [n])
            _, dist = law_of(g, q)
            assert dist == oracle_window(oracle_cycle_law(n + k, q), n)


def test_bare_distribution_agrees_with_graph_api():
    for q in (3, 4):
        for topo, n in (("path", 4), ("cycle", 4)):
            pos, dist = fd.exact_baseline_distribution(n, topo, q)
            assert pos == list(range(n))
            g = gc.gen_family(topo, [n])
            _, graph_dist = law_of(g, q)
            assert dist == graph_dist


def test_two_node_path_and_cycle_laws_coincide():
    for q in (3, 4):
        _, a = fd.exact_baseline_distribution(2, "path", q)
        _, b = fd.exact_baseline_distribution(2, "cycle", q)
        assert a == b


def test_frozen_small_values():
    # path(2), q=4: uniform over the 12 ordered unequal pairs
    _, dist = fd.exact_baseline_distribution(2, "path", 4)
    assert len(dist) == 12
    assert all(p == Fraction(1, 12) for p in dist.values())
    # path(3), q=4: the endpoints at distance 2 factorize into 1/16 cells
    order, w, d = fd.exact_baseline_weights(gc.gen_family("path", [3]), 4)
    ends = fd.weights_marginal(order, w, [1, 3])
    assert all(Fraction(ends[(a, b)], d) == Fraction(1, 16)
               for a in range(1, 5) for b in range(1, 5))
    singles = fd.weights_marginal(order, w, [2])
    assert all(Fraction(c, d) == Fraction(1, 4) for c in singles.values())


def test_cycle_arc_equals_shorter_path_law_q4():
    for n in (3, 4, 5, 6):
        cyc = gc.gen_family("cycle", [n])
        order, w, d = fd.exact_baseline_weights(cyc, 4)
        arc = fd.weights_marginal(order, w, list(range(1, n)))
        arc = fd.distribution_from_weights(arc, d)
        _, path_law = fd.exact_baseline_distribution(n - 1, "path", 4)
        assert arc == path_law, n


def test_windows_stabilize_at_radius_offset_q3():
    # j-windows of the m-cycle law agree for every m >= j+2; the path
    # law sits at the smallest stable size, so the definition is canonical
    for j, pairs in ((2, (4, 5, 7)), (3, (5, 6, 8)), (4, (6, 7))):
        _, want = fd.exact_baseline_distribution(j, "path", 3)
        for m in pairs:
            _, dist = fd.exact_baseline_distribution(m, "cycle", 3)
            got = {}
            for row, p in dist.items():
                got[row[:j]] = got.get(row[:j], Fraction(0)) + p
            assert got == want, (j, m)
    # below that size the arc is a genuinely different law
    _, dist = fd.exact_baseline_distribution(4, "cycle", 3)
    got = {}
    for row, p in dist.items():
        got[row[:3]] = got.get(row[:3], Fraction(0)) + p
    _, want = fd.exact_baseline_distribution(3, "path", 3)
    assert got != want


def test_interior_windows_translate():
    for q in (4, 3):
        order, w, d = fd.exact_baseline_weights(gc.gen_family("path", [7]), q)
        _, want = fd.exact_baseline_distribution(3, "path", q)
        for start in (1, 2, 3, 4, 5):
            window = fd.weights_marginal(order, w, [start, start + 1, start + 2])
            assert fd.distribution_from_weights(window, d) == want


def test_components_multiply():
    g = gc.LabeledGraph([1, 2, 3], [(1, 2)])
    order, w, d = fd.exact_baseline_weights(g, 4)
    assert sum(w.values()) == d
    rep = fd.check_k_dependence_exact(g, order, w, d, 1)
    assert rep["ok"]
    lone = fd.weights_marginal(order, w, [3])
    assert all(Fraction(c, d) == Fraction(1, 4) for c in lone.values())


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 6), q=st.sampled_from([3, 4]),
       topo=st.sampled_from(["path", "cycle"]))
def test_law_mass_support_and_symmetry(n, q, topo):
    if topo == "cycle" and n < 3:
        n = 3
    g = gc.gen_family(topo, [n])
    order, w, d = fd.exact_baseline_weights(g, q)
    assert sum(w.values()) == d
    idx = {v: i for i, v in enumerate(order)}
    for row in w:
        assert all(1 <= c <= q for c in row)
        for u, v in g.edges:
            assert row[idx[u]] != row[idx[v]]
    dist = fd.distribution_from_weights(w, d)
    # reversing the walk direction is a symmetry of the process
    assert dist == {row[::-1]: p for row, p in dist.items()}


def test_baseline_refusals():
    with pytest.raises(fd.FindepError):
        fd.exact_baseline_weights(gc.gen_family("path", [3]), 5)
    with pytest.raises(fd.FindepError):
        fd.exact_baseline_weights(gc.gen_family("star", [4]), 4)
    with pytest.raises(fd.FindepError):
        fd.exact_baseline_weights(gc.gen_family("path", [9]), 4)
    with pytest.raises(fd.FindepError):
        fd.exact_baseline_distribution(3, "loop", 4)
    g = gc.gen_family("path", [17])
    with pytest.raises(fd.FindepError):
        fd.check_k_dependence_exact(g, list(g.nodes()), {}, 1, 1)


def test_checker_flags_adjacent_dependence():
    g = gc.gen_family("path", [3])
    order, w, d = fd.exact_baseline_weights(g, 4)
    rep = fd.check_k_dependence_exact(g, order, w, d, 0)
    assert not rep["ok"]
    assert rep["violations"]
    v = rep["violations"][0]
    assert {"set_a", "set_b", "joint", "product"} <= set(v)


# -- sampler vs law ---------------------------------------------------------

def empirical_tv(sampler, nodes, dist, trials, seed):
    counts = {}
    for i in range(trials):
        x = sampler.sample(derive_seed(seed, i))
        key = tuple(x[v] for v in nodes)
        counts[key] = counts.get(key, 0) + 1
    keys = set(counts) | set(dist)
    return sum(abs(Fraction(counts.get(k, 0), trials) - dist.get(k, Fraction(0)))
               for k in keys) / 2


def test_sampler_realizes_exact_law():
    for topo, n, q in (("path", 3, 4), ("cycle", 4, 3)):
        g = gc.gen_family(topo, [n])
        s = fd.baseline_coloring(g, q)
        order, dist = s.exact_distribution()
        tv = empirical_tv(s, order, dist, 3000, f"tv/{topo}/{q}")
        assert tv < Fraction(8, 100), (topo, q, float(tv))


def test_sampler_is_seed_deterministic():
    g = gc.gen_family("path", [6])
    s = fd.baseline_coloring(g, 4)
    assert s.sample("a") == s.sample("a")
    draws = {tuple(sorted(s.sample(f"s{i}").items())) for i in range(20)}
    assert len(draws) > 1


def test_exact_accessors():
    g = gc.gen_family("path", [3])
    s = fd.baseline_coloring(g, 4)
    assert s.has_exact
    assert s.exact() is s.exact()
    bare = fd.ProcessSampler(name="x", graph=g, alphabet=[1], radius=0,
                             sample_fn=lambda seed: {})
    with pytest.raises(fd.FindepError):
        bare.exact()


# -- statistical checker ------------------------------------------------------

def test_statistical_check_consistent_on_baseline():
    g = gc.gen_family("path", [6])
    s = fd.baseline_coloring(g, 4)
    rep = fd.test_k_dependence(s, trials=250, seed="far")
    assert rep.mode == "sampled"
    assert not rep.rejected
    assert rep.pairs and all(p["distance"] > 1 for p in rep.pairs)
    assert "far pairs" in rep.summary()
    keys = set(rep.to_json_dict())
    assert {"process", "radius", "corrected_alpha", "pairs", "rejected"} <= keys


def test_statistical_check_detects_copycat():
    g = gc.gen_family("path", [2])

    def sample(seed):
        a = random.Random(derive_seed(seed, "x")).choice([1, 2])
        return {1: a, 2: a}

    s = fd.ProcessSampler(name="copycat", graph=g, alphabet=[1, 2],
                          radius=0, sample_fn=sample)
    rep = fd.test_k_dependence(s, trials=300, seed="cc")
    assert rep.rejected


def test_statistical_check_flags_degenerate():
    g = gc.gen_family("path", [4])
    s = fd.ProcessSampler(name="const", graph=g, alphabet=[1], radius=1,
                          sample_fn=lambda seed: {v: 1 for v in g.nodes()})
    rep = fd.test_k_dependence(s, trials=50, seed="c")
    assert not rep.rejected
    assert all(p["flag"] == "degenerate" for p in rep.pairs)


def test_statistical_check_reports_near_pairs_without_verdict():
    g = gc.gen_family("path", [3])
    s = fd.baseline_coloring(g, 4)
    rep = fd.test_k_dependence(s, trials=200, seed="near", include_near=True)
    assert rep.near_pairs
    assert all(p["distance"] <= 1 for p in rep.near_pairs)
    assert not rep.rejected


def test_invariance_probe_exact_windows():
    a = fd.baseline_coloring(gc.gen_family("path", [5]), 4)
    b = fd.baseline_coloring(gc.gen_family("path", [7]), 4)
    res = fd.subgraph_invariance_probe(a, [1, 2, 3], b, [2, 3, 4])
    assert res["mode"] == "exact" and res["equal"] and res["ok"]


def test_invariance_probe_exact_detects_difference():
    a = fd.baseline_coloring(gc.gen_family("path", [3]), 4)
    b = fd.baseline_coloring(gc.gen_family("path", [3]), 3)
    res = fd.subgraph_invariance_probe(a, [1], b, [1])
    assert res["mode"] == "exact" and not res["ok"]


def test_invariance_probe_sampled_mode():
    g = gc.gen_family("path", [5])
    base = fd.baseline_coloring(g, 4)
    blind = fd.ProcessSampler(name="b", graph=g, alphabet=base.alphabet,
                              radius=base.radius, sample_fn=base.sample_fn)
    res = fd.subgraph_invariance_probe(blind, [1, 2], blind, [1, 2],
                                       trials=300, tol=0.15)
    assert res["mode"] == "sampled" and res["ok"]
    with pytest.raises(fd.FindepError):
        fd.subgraph_invariance_probe(blind, [1, 2], blind, [1])


# -- decompositions ----------------------------------------------------------

def test_pseudoforest_split_keeps_directed_path_whole():
    g = gc.LabeledGraph(range(1, 7), [(i, i + 1) for i in range(1, 6)],
                        directed=True)
    for s in ("a", "b", "c"):
        ds = fd.decompose_pseudoforest(g, s)
        assert ds.kind == "pseudoforest_split" and ds.arity == 1
        assert sorted(ds.pieces[0].nodes()) == list(range(1, 7))
        assert len(ds.pieces[0].edges) == 5


def test_pseudoforest_split_deals_siblings_apart():
    g = gc.LabeledGraph([1, 2, 3], [(2, 1), (3, 1)], directed=True)
    seen = set()
    for i in range(40):
        ds = fd.decompose_pseudoforest(g, f"t{i}")
        assert ds.arity == 2
        homes = {v: ds.member_pieces(v) for v in (1, 2, 3)}
        assert homes[1] == [0]
        assert all(len(h) == 1 for h in homes.values())
        assert sorted(homes[2] + homes[3]) == [0, 1]
        seen.add((homes[2][0], homes[3][0]))
    assert seen == {(0, 1), (1, 0)}


def test_pseudoforest_split_directed_cycle():
    g = gc.LabeledGraph(range(1, 7), [(i, i % 6 + 1) for i in range(1, 7)],
                        directed=True)
    ds = fd.decompose_pseudoforest(g, "s")
    assert ds.arity == 1 and len(ds.pieces[0].edges) == 6


def test_pseudoforest_split_partitions_nodes(gate):
    for i in range(5):
        g = gc.gen_family("random_rooted_pseudoforest", [12], seed=f"p{i}")
        ds = fd.decompose_pseudoforest(g, f"d{i}")
        homes = [ds.member_pieces(v) for v in g.nodes()]
        assert all(len(h) == 1 for h in homes)
        for piece in ds.pieces:
            for v in piece.nodes():
                assert len(piece.out_neighbors(v)) <= 1
                assert len(piece.in_neighbors(v)) <= 1


def test_pseudoforest_split_refusals():
    with pytest.raises(fd.FindepError):
        fd.decompose_pseudoforest(gc.gen_family("path", [3]), "s")
    g = gc.LabeledGraph([1, 2, 3], [(1, 2), (1, 3)], directed=True)
    with pytest.raises(fd.FindepError):
        fd.decompose_pseudoforest(g, "s")


def test_bounded_degree_split_star():
    g = gc.gen_family("star", [4])
    ds = fd.decompose_bounded_degree(g, "s")
    assert ds.kind == "bounded_degree_split"
    assert ds.arity == fd.bounded_degree_arity(g) == 3
    assert sum(len(p.edges) for p in ds.pieces) == 2 * len(g.edges)
    hub_out = [piece for piece in ds.pieces
               if any(e[0] == 1 for e in piece.edges)]
    assert len(hub_out) == 3


def test_bounded_degree_split_single_edge_becomes_two_cycle():
    g = gc.gen_family("path", [2])
    ds = fd.decompose_bounded_degree(g, "s")
    assert ds.arity == 1
    assert sorted(ds.pieces[0].edges) == [(1, 2), (2, 1)]


def test_bounded_degree_split_isolated_node_joins_first_piece():
    g = gc.LabeledGraph([1, 2, 3], [(1, 2)])
    ds = fd.decompose_bounded_degree(g, "s")
    assert ds.member_pieces(3) == [0]


def test_bounded_degree_split_covers_and_varies():
    g = gc.gen_family("cycle", [3])
    piece_zero = set()
    for i in range(20):
        ds = fd.decompose_bounded_degree(g, f"v{i}")
        assert ds.arity == 2
        got = sorted(e for p in ds.pieces for e in p.edges)
        assert got == sorted([(u, v) for u, v in g.edges]
                             + [(v, u) for u, v in g.edges])
        for piece in ds.pieces:
            for v in piece.nodes():
                assert len(piece.out_neighbors(v)) <= 1
        piece_zero.add(tuple(sorted(ds.pieces[0].edges)))
    assert len(piece_zero) > 1


def test_bounded_degree_split_respects_given_orientation():
    g = gc.LabeledGraph(range(1, 5), [(i, 4) for i in (1, 2, 3)], directed=True)
    ds = fd.decompose_bounded_degree(g, "s")
    assert ds.arity == 1
    assert sorted(ds.pieces[0].edges) == [(1, 4), (2, 4), (3, 4)]


# -- composition and flattening ----------------------------------------------

def test_compose_radius_rules():
    assert fd.compose_radius("disjoint-max", 3, 2) == 3
    assert fd.compose_radius("induced", 2, 1) == 4
    assert fd.compose_radius("induced", 4, 3) == 10
    with pytest.raises(fd.FindepError):
        fd.compose_radius("sideways", 1, 1)


def constant_component(value):
    def fn(piece):
        return fd.ProcessSampler(
            name="const", graph=piece, alphabet=[value], radius=0,
            sample_fn=lambda seed: {v: value for v in piece.nodes()})
    return fn


def test_induce_process_tuples_and_radius():
    g = gc.LabeledGraph(range(1, 5), [(i, i + 1) for i in range(1, 4)],
                        directed=True)
    s = fd.induce_process(fd.decompose_pseudoforest, constant_component(7),
                          3, g, name="t")
    assert s.radius == fd.compose_radius("induced", 2, 3)
    assert s.sample("x") == {v: (7,) for v in g.nodes()}


def tupled_sampler(g, rows):
    return fd.ProcessSampler(name="rows", graph=g, alphabet=[], radius=5,
                             sample_fn=lambda seed: dict(rows))


def test_flatten_single_class():
    g = gc.gen_family("path", [2])
    s = fd.flatten_single_class(tupled_sampler(g, {1: (2, 0), 2: (0, 3)}),
                                4, name="f")
    assert s.sample("x") == {1: 1, 2: 6}
    assert s.radius == 5
    bad = fd.flatten_single_class(tupled_sampler(g, {1: (2, 3), 2: (0, 1)}),
                                  4, name="f")
    with pytest.raises(fd.FindepError):
        bad.sample("x")
    empty = fd.flatten_single_class(tupled_sampler(g, {1: (0, 0), 2: (1, 0)}),
                                    4, name="f")
    with pytest.raises(fd.FindepError):
        empty.sample("x")


def test_flatten_rank():
    g = gc.gen_family("path", [2])
    s = fd.flatten_rank(tupled_sampler(g, {1: (1, 3), 2: (0, 2)}), 4, name="f")
    assert s.sample("x") == {1: 1 + 3 * 4, 2: 2 * 4}
    bad = fd.flatten_rank(tupled_sampler(g, {1: (4, 0), 2: (0, 0)}), 4, name="f")
    with pytest.raises(fd.FindepError):
        bad.sample("x")


def identity_rounds():
    return LocalAlgorithm(
        name="keep", locality=0, uses_ids=False, uses_n=False,
        init_fn=lambda me, n, rng: me.value,
        round_fn=lambda me, state, incoming: state,
        output_fn=lambda me, state: state, rounds=0)


def test_apply_pn_rounds_zero_rounds_is_identity():
    g = gc.gen_family("path", [5])
    base = fd.baseline_coloring(g, 4)
    s = fd.apply_pn_rounds(base, identity_rounds(), name="id",
                           alphabet=base.alphabet)
    assert s.radius == base.radius
    seed = "z"
    assert s.sample(seed) == base.sample(derive_seed(seed, "base"))


def test_apply_pn_rounds_refuses_non_anonymous():
    g = gc.gen_family("path", [3])
    base = fd.baseline_coloring(g, 4)
    alg = identity_rounds()
    alg.uses_ids = True
    with pytest.raises(fd.FindepError):
        fd.apply_pn_rounds(base, alg, name="x", alphabet=[])
    ext = LocalAlgorithm(name="ext", locality=1, uses_ids=False,
                         program=lambda view, n: 1)
    with pytest.raises(fd.FindepError):
        fd.apply_pn_rounds(base, ext, name="x", alphabet=[])


# -- coloring pipelines --------------------------------------------------------

def proper(g, out, palette):
    assert all(out[v] in palette for v in g.nodes())
    assert all(out[u] != out[v] for u, v in g.edges)


def test_three_coloring_directed_path(gate):
    g = gc.LabeledGraph(range(1, 31), [(i, i + 1) for i in range(1, 30)],
                        directed=True)
    s = fd.color_pseudoforest_3(g)
    assert s.radius == fd.pseudoforest_3_radius(1) == 16
    for seed in ("a", "b", "c"):
        proper(g, s.sample(seed), {1, 2, 3})


def test_three_coloring_two_cycle(gate):
    g = gc.LabeledGraph([1, 2], [(1, 2), (2, 1)], directed=True, doubled=True)
    s = fd.color_pseudoforest_3(g)
    for seed in ("a", "b"):
        out = s.sample(seed)
        assert out[1] != out[2] and set(out.values()) <= {1, 2, 3}


def test_three_coloring_in_star(gate):
    g = gc.LabeledGraph(range(1, 7), [(i, 6) for i in range(1, 6)],
                        directed=True)
    s = fd.color_pseudoforest_3(g)
    assert s.radius == fd.pseudoforest_3_radius(5) == 22
    proper(g, s.sample("x"), {1, 2, 3})


def test_three_coloring_random_pseudoforests(gate):
    for i in range(4):
        g = gc.gen_family("random_rooted_pseudoforest", [14], seed=f"g{i}")
        s = fd.color_pseudoforest_3(g)
        proper(g, s.sample(f"s{i}"), {1, 2, 3})


def test_three_coloring_output_varies(gate):
    g = gc.LabeledGraph(range(1, 6), [(i, i + 1) for i in range(1, 5)],
                        directed=True)
    s = fd.color_pseudoforest_3(g)
    outs = {tuple(sorted(s.sample(f"v{i}").items())) for i in range(30)}
    assert len(outs) >= 3


def test_delta_plus_one_coloring(gate):
    cases = [
        (gc.gen_family("path", [12]), 3),
        (gc.gen_family("cycle", [5]), 3),
        (gc.gen_family("grid", [3, 3]), 5),
        (gc.gen_family("random_bounded_degree", [14, 3], seed="q"), 4),
    ]
    for g, colors in cases:
        s = fd.color_delta_plus_1(g)
        assert s.alphabet == list(range(1, colors + 1))
        proper(g, s.sample("x"), set(s.alphabet))


def test_claimed_radius_ignores_node_count(gate):
    a = fd.color_delta_plus_1(gc.gen_family("path", [50]))
    b = fd.color_delta_plus_1(gc.gen_family("path", [500]))
    assert a.radius == b.radius == fd.delta_plus_1_radius(2) == 70
    c = fd.color_delta_plus_1(gc.gen_family("cycle", [30]))
    d = fd.color_delta_plus_1(gc.gen_family("cycle", [61]))
    assert c.radius == d.radius


def test_distance_two_coloring(gate):
    g = gc.gen_family("path", [20])
    s = fd.distance_k_coloring(g, 2)
    out = s.sample("x")
    for v in g.nodes():
        dist = gc.bfs_distances(g, [v], limit=2)
        for w, dd in dist.items():
            if 1 <= dd <= 2:
                assert out[v] != out[w]
    t = fd.distance_k_coloring(gc.gen_family("path", [40]), 2)
    assert s.radius == t.radius
    with pytest.raises(fd.FindepError):
        fd.distance_k_coloring(g, 0)


def test_maximal_independent_set_process(gate):
    for g in (gc.gen_family("cycle", [9]), gc.gen_family("path", [11])):
        s = fd.maximal_independent_set_process(g)
        assert s.alphabet == [0, 1]
        out = s.sample("x")
        chosen = {v for v, b in out.items() if b == 1}
        assert all(not (u in chosen and v in chosen) for u, v in g.edges)
        for v in g.nodes():
            assert v in chosen or any(w in chosen for w in g.neighbors(v))


# -- solver front end ----------------------------------------------------------

def test_solver_routes_and_verifies(gate):
    g = gc.gen_family("cycle", [9])
    s = fd.solve_lcl_findep(lcl.maximal_independent_set(), g)
    assert set(s.sample("x").values()) <= {0, 1}
    p = gc.gen_family("path", [12])
    s2 = fd.solve_lcl_findep(lcl.q_coloring(3), p)
    proper(p, s2.sample("y"), {1, 2, 3})
    s3 = fd.solve_lcl_findep(lcl.distance_coloring(2, 20), gc.gen_family("path", [10]))
    assert s3.sample("z")


def test_solver_refuses_small_palettes():
    g = gc.gen_family("path", [8])
    with pytest.raises(fd.UnsolvableError) as ei:
        fd.solve_lcl_findep(lcl.q_coloring(2), g)
    assert ei.value.bundle["max_degree"] == 2
    with pytest.raises(fd.UnsolvableError) as ei:
        fd.solve_lcl_findep(lcl.distance_coloring(2, 3), g)
    assert "power_degree_plus_1" in ei.value.bundle
    with pytest.raises(fd.FindepError):
        fd.solve_lcl_findep(lcl.maximal_matching(), g)


def test_solver_custom_finisher(gate):
    g = gc.gen_family("path", [8])
    add_one = LocalAlgorithm(
        name="shift", locality=0, uses_ids=False, uses_n=False,
        init_fn=lambda me, n, rng: me.value + 1,
        round_fn=lambda me, state, incoming: state,
        output_fn=lambda me, state: state, rounds=0)
    s = fd.solve_lcl_findep(lcl.q_coloring(5), g, const_alg=add_one, k=1)
    proper(g, s.sample("x"), {1, 2, 3, 4, 5})
    with pytest.raises(fd.FindepError):
        fd.solve_lcl_findep(lcl.q_coloring(5), g, const_alg=add_one)


def test_solver_surfaces_counterexamples(gate):
    g = gc.gen_family("path", [6])
    monochrome = LocalAlgorithm(
        name="mono", locality=0, uses_ids=False, uses_n=False,
        init_fn=lambda me, n, rng: 1,
        round_fn=lambda me, state, incoming: state,
        output_fn=lambda me, state: state, rounds=0)
    s = fd.solve_lcl_findep(lcl.q_coloring(3), g, const_alg=monochrome, k=1)
    with pytest.raises(fd.VerificationError) as ei:
        s.sample("x")
    bundle = ei.value.bundle
    assert bundle["problem"] == "3_coloring" and bundle["violations"]
    assert bundle["seed"] == "x"
