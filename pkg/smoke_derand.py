from localitylab.graphcore import gen_family
from localitylab.lcl import q_coloring, verify
from localitylab.engines import get_algorithm, run_online
from localitylab.treesim import derandomize_adaptive, TreesimError
import itertools

prob = q_coloring(2, delta=2)
coin = get_algorithm("coin-color-online", colors=2)

# even cycle: a deterministic strategy exists and survives every order
c4 = gen_family("cycle", [4])
det = derandomize_adaptive(coin, [c4], prob)
bad = 0
for perm in itertools.permutations(c4.nodes()):
    outs, _ = run_online(det, c4, list(perm))
    if verify(prob, c4, outs):
        bad += 1
print("C4 strategy: all-orders bad=%d (of %d)" % (bad, 24))

# odd cycle: no strategy can 2-color it; expect a refutation certificate
c3 = gen_family("cycle", [3])
try:
    derandomize_adaptive(coin, [c4, c3], prob)
    print("C3: NO ERROR (wrong)")
except TreesimError as e:
    print("C3 refuted:", e.bundle.get("refuted"), "tried=%d" % e.bundle["assignments_tried"],
          "failure keys:", sorted(e.bundle["example_failure"]))

# deterministic passthrough
greedy = get_algorithm("greedy-color-online", colors=3)
print("passthrough is same object:", derandomize_adaptive(greedy, [c4], q_coloring(3, delta=2)) is greedy)

# conditional mode on a tiny path family
p3 = gen_family("random_rooted_path", [3], seed=0)
det2 = derandomize_adaptive(coin, [p3], prob, mode="conditional")
bad2 = 0
for perm in itertools.permutations(p3.nodes()):
    outs, _ = run_online(det2, p3, list(perm))
    if verify(prob, p3, outs):
        bad2 += 1
print("conditional path3: all-orders bad=%d" % bad2)

# history outside the family
try:
    big = gen_family("random_rooted_path", [5], seed=1)
    run_online(det, big, sorted(big.nodes()))
    print("outside-family: NO ERROR (wrong)")
except TreesimError as e:
    print("outside-family error:", str(e)[:60])
