import time
from localitylab.engines import OnlineAlgorithm, run_online
from localitylab.lcl import q_coloring, verify
from localitylab import treesim as ts
from localitylab.graphcore import LabeledGraph

print("forests<=2:", len(ts.rooted_forests_upto(2)))
print("forests<=3:", len(ts.rooted_forests_upto(3)))
sched, gcap = ts.default_schedule(2, 2, 1)
print("schedule:", sched, "gcap:", gcap)
shapes = ts.enumerate_run_types(2, 1)
print("shapes:", {k: len(v) for k, v in shapes.items()})
for ell in shapes:
    for key, ty in shapes[ell].items():
        print(ell, "seq", ty.seq, "parts", [(p, m) for p, m in ty.parts],
              "new", ty.new_nodes, ty.new_edges)


def greedy_step(memory, revealed, v, rng, prior):
    used = {memory[u] for u in revealed.neighbors(v) if u in memory}
    c = next(x for x in range(1, 10) if x not in used and x <= 2)
    memory[v] = c
    return c, memory


greedy = OnlineAlgorithm(name="greedy2", locality=1, step=greedy_step,
                         init=lambda n: {}, uses_n=False, randomized=False)

t0 = time.time()
wrapped = ts.amnesiacize(greedy, 2, q_coloring(2), verify_experiment=True)
t1 = time.time()
exp = wrapped.experiment
print(f"experiment: {t1-t0:.1f}s nodes={exp.host_nodes} edges={exp.host_edges}")
print("table:", {k[:60]: v for k, v in wrapped.table.items()})
print("accounting:", exp.accounting_rows())

# wrapped answers should depend only on the standing component: run on two
# disjoint paths interleaved vs alone
g2 = LabeledGraph({1: "", 2: "", 11: "", 12: ""},
                  [(2, 1), (12, 11)], directed=True, roots=[1, 11],
                  check_id_range=False)
outs, _ = run_online(wrapped, g2, [2, 12, 1, 11])
print("interleaved:", outs)
alone = LabeledGraph({1: "", 2: ""}, [(2, 1)], directed=True, roots=[1],
                     check_id_range=False)
outs1, _ = run_online(wrapped, alone, [2, 1])
print("alone:", outs1)
assert outs[2] == outs1[2] and outs[1] == outs1[1]
assert not verify(q_coloring(2), g2, outs)
print("ok")
