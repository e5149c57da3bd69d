import time
from localitylab.graphcore import LabeledGraph, gen_family, power_graph
from localitylab import findep as F
from localitylab import lcl

t0 = time.time()

# exact baseline gate, small sizes
for q, k in ((4, 1), (3, 2)):
    for n in range(2, 6):
        for topo in ("path", "cycle"):
            g = gen_family(topo, [n])
            order, w, denom = F.exact_baseline_weights(g, q)
            rep = F.check_k_dependence_exact(g, order, w, denom, k)
            assert rep["ok"], (q, topo, n, rep["violations"][:1])
            for row, wt in w.items():
                if wt:
                    for a, b in g.edges:
                        ia, ib = order.index(a), order.index(b)
                        assert row[ia] != row[ib]
print("exact gate ok", round(time.time() - t0, 2))

# decomposition sanity: directed path -> one class holding the whole path
g = LabeledGraph(list(range(1, 6)), [(i, i + 1) for i in range(1, 5)], directed=True)
ds = F.decompose_pseudoforest(g, "s0")
assert ds.arity == 1 and sorted(ds.pieces[0].nodes()) == list(range(1, 6))
print("pf split path ok")

# 3-node in-tree: leaves get classes {1,2} in one of two orders
g = LabeledGraph([1, 2, 3], [(2, 1), (3, 1)], directed=True)
seen = set()
for i in range(40):
    ds = F.decompose_pseudoforest(g, f"t{i}")
    assert ds.arity == 2
    cls = {v: tuple(ds.member_pieces(v)) for v in (2, 3)}
    assert sorted(cls[2] + cls[3]) == [0, 1]
    seen.add((cls[2], cls[3]))
assert len(seen) == 2, seen
print("pf split in-tree ok")

# directed cycle: single class, piece is the whole cycle
g = LabeledGraph(list(range(1, 7)), [(i, i % 6 + 1) for i in range(1, 7)],
                 directed=True)
ds = F.decompose_pseudoforest(g, "s1")
assert ds.arity == 1 and len(ds.pieces[0].edges) == 6
print("pf split cycle ok")

# bounded-degree split of a star: every edge lands somewhere, out-deg <= 1
g = gen_family("star", [4])
ds = F.decompose_bounded_degree(g, "s2")
assert ds.arity == F.bounded_degree_arity(g) == 3
total = sum(len(p.edges) for p in ds.pieces)
assert total == 2 * len(g.edges)
print("bd split star ok")

# pipelines
g = LabeledGraph(list(range(1, 51)), [(i, i + 1) for i in range(1, 50)],
                 directed=True)
s = F.color_pseudoforest_3(g)
out = s.sample("a")
assert set(out.values()) <= {1, 2, 3}
for u, v in g.edges:
    assert out[u] != out[v]
print("pf3 ok radius", s.radius)

g2 = LabeledGraph([1, 2], [(1, 2), (2, 1)], directed=True, doubled=True)
out = F.color_pseudoforest_3(g2).sample("b")
assert out[1] != out[2]
print("pf3 2-cycle ok")

g3 = LabeledGraph(list(range(1, 7)), [(i, 6) for i in range(1, 6)], directed=True)
s3 = F.color_pseudoforest_3(g3)
out = s3.sample("c")
assert len({out[v] for v in range(1, 6)} | {out[6]}) >= 2
for u, v in g3.edges:
    assert out[u] != out[v]
print("pf3 in-star ok radius", s3.radius)

g4 = gen_family("path", [12])
s4 = F.color_delta_plus_1(g4)
out = s4.sample("d")
assert set(out.values()) <= {1, 2, 3}
for u, v in g4.edges:
    assert out[u] != out[v]
print("delta+1 path ok radius", s4.radius)

g5 = gen_family("cycle", [5])
s5 = F.color_delta_plus_1(g5)
out = s5.sample("e")
for u, v in g5.edges:
    assert out[u] != out[v]
print("delta+1 cycle ok")

g6 = gen_family("random_bounded_degree", [16, 3], seed="rg")
s6 = F.color_delta_plus_1(g6)
for i in range(5):
    out = s6.sample(f"f{i}")
    assert set(out.values()) <= set(s6.alphabet)
    for u, v in g6.edges:
        assert out[u] != out[v]
print("delta+1 random ok radius", s6.radius)

# radius is n-independent
gA = gen_family("path", [50])
gB = gen_family("path", [500])
assert F.color_delta_plus_1(gA).radius == F.color_delta_plus_1(gB).radius
print("radius n-independent ok")

# distance-k coloring
g7 = gen_family("path", [30])
s7 = F.distance_k_coloring(g7, 3)
out = s7.sample("g")
from localitylab.graphcore import bfs_distances
for v in g7.nodes():
    d = bfs_distances(g7, [v])
    for w in g7.nodes():
        if w != v and d.get(w, 99) <= 3:
            assert out[v] != out[w]
print("distance-3 ok radius", s7.radius)

# MIS
g8 = gen_family("cycle", [9])
s8 = F.maximal_independent_set_process(g8)
out = s8.sample("h")
ins = {v for v, x in out.items() if x == 1}
for u, v in g8.edges:
    assert not (u in ins and v in ins)
for v in g8.nodes():
    assert v in ins or any(w in ins for w in g8.neighbors(v))
print("MIS ok radius", s8.radius)

# solver routes + verification wrapper
p = lcl.maximal_independent_set()
sv = F.solve_lcl_findep(p, g8)
out = sv.sample("i")
assert set(out.values()) <= {0, 1}
print("solver MIS ok")

p2 = lcl.q_coloring(3)
sv2 = F.solve_lcl_findep(p2, g4)
out = sv2.sample("j")
print("solver 3-coloring ok")

try:
    F.solve_lcl_findep(lcl.q_coloring(2), g4)
    raise SystemExit("should have refused")
except F.UnsolvableError as e:
    print("solver refusal ok:", e.bundle["reason"])

p3 = lcl.distance_coloring(2, 20)
g9 = gen_family("grid", [4, 4])
sv3 = F.solve_lcl_findep(p3, g9)
out = sv3.sample("k")
print("solver distance-2 ok, colors used", len(set(out.values())))

print("total", round(time.time() - t0, 2), "s")
