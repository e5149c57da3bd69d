import random
from localitylab.graphcore import gen_family
from localitylab.lcl import q_coloring, verify, LclProblem
from localitylab.engines import get_algorithm, run_local, SlocalAlgorithm
from localitylab.treesim import (slocal_to_local, linial_reduction_rounds,
                                 linial_distance_coloring)

# cycle(100): greedy 3-coloring through the message-passing rebuild
prob = q_coloring(3, delta=2)
alg = get_algorithm("greedy-color-slocal", colors=3)
loc = slocal_to_local(alg, prob)
g = gen_family("cycle", [100])
outs = run_local(loc, g)
viol = verify(prob, g, outs)
print("cycle100 violations:", len(viol))

# trees
prob4 = q_coloring(4, delta=3)
alg4 = get_algorithm("greedy-color-slocal", colors=4)
loc4 = slocal_to_local(alg4, prob4)
bad = 0
for t in range(15):
    n = random.Random(t).randint(5, 60)
    gt = gen_family("random_rooted_tree", [n, 3], seed=t)
    o = run_local(loc4, gt)
    if verify(prob4, gt, o):
        bad += 1
        print("BAD tree", t)
print("local trees: cases=15 bad=%d" % bad)

# c=0 algorithm: constant labeler equals plain per-node application
const = SlocalAlgorithm(name="const", locality=0,
                        step=lambda view, processed, prior, n: ("x", None))
p0 = LclProblem(name="anything", sigma_in=[""], sigma_out=["x"], radius=0,
                permissible=lambda b, out: True, delta=4)
loc0 = slocal_to_local(const, p0)
g0 = gen_family("random_rooted_tree", [12, 3], seed=1)
o0 = run_local(loc0, g0)
print("c=0 constant ok:", all(v == "x" for v in o0.values()), len(o0) == g0.n)

# log*-ish growth of the color-reduction loop
r4 = linial_reduction_rounds(2 ** 4, 3)
r16 = linial_reduction_rounds(2 ** 16, 3)
r64 = linial_reduction_rounds(2 ** 64, 3)
print("reduction rounds:", r4, r16, r64)
