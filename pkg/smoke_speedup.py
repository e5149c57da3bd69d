import random
from localitylab.graphcore import gen_family
from localitylab.lcl import q_coloring, verify
from localitylab.engines import get_algorithm, run_slocal
from localitylab.treesim import slocal_speedup

# paths, delta=2
prob2 = q_coloring(3, delta=2)
alg2 = get_algorithm("greedy-color-slocal", colors=3)
sq2 = slocal_speedup(alg2, prob2, 2 ** 38, 2)
bad = 0
for trial in range(20):
    g = gen_family("random_rooted_path", [random.Random(trial).randint(6, 90)], seed=trial)
    order = sorted(g.nodes())
    if trial % 3 == 1:
        rnd = random.Random(100 + trial); order = list(order); rnd.shuffle(order)
    outs, _ = run_slocal(sq2, g, order)
    lab = dict(outs)
    if verify(prob2, g, lab):
        bad += 1
        print("BAD path trial", trial)
print("speedup paths: cases=20 bad=%d" % bad)

# trees, delta=3
prob3 = q_coloring(4, delta=3)
alg3 = get_algorithm("id-hint-color-slocal", colors=4)
sq3 = slocal_speedup(alg3, prob3, 3 ** 54, 3)
rnd = random.Random(11)
bad = 0
for trial in range(30):
    n = rnd.randint(8, 130)
    g = gen_family("random_rooted_tree", [n, 3], seed=trial)
    order = sorted(g.nodes())
    if trial % 2 == 1:
        r2 = random.Random(500 + trial); order = list(order); r2.shuffle(order)
    outs, _ = run_slocal(sq3, g, order)
    lab = dict(outs)
    viol = verify(prob3, g, lab)
    if viol:
        bad += 1
        print("BAD tree trial", trial, "n", n, viol[:2])
print("speedup trees: cases=30 bad=%d" % bad)
