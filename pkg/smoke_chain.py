import random, time
from localitylab.graphcore import gen_family
from localitylab.lcl import q_coloring, verify
from localitylab.engines import get_algorithm, run_local, resolve_locality
from localitylab.treesim import (amnesiacize, online_to_slocal,
                                 slocal_speedup, slocal_to_local)

prob = q_coloring(3, delta=2)
base = get_algorithm("greedy-color-online", colors=3)
t0 = time.time()
am = amnesiacize(base, 2, prob)
print("amnesiacized %.1fs" % (time.time() - t0))
s1 = online_to_slocal(am, prob, 1)
k2 = resolve_locality(s1.locality, 2 ** 20)
print("stage-2 composed locality:", k2)
alpha_target = 6 * k2 + 2
window2 = 2 ** (4 * alpha_target + 2)
s2 = slocal_speedup(s1, prob, window2, 2)
k3 = resolve_locality(s2.locality, 2 ** 20)
print("stage-3 composed locality:", k3, "alpha2:", alpha_target)
loc = slocal_to_local(s2, prob)
bad = 0
for trial in range(6):
    n = random.Random(trial).randint(6, 28)
    g = gen_family("random_rooted_path", [n], seed=trial)
    outs = run_local(loc, g)
    v = verify(prob, g, outs)
    if v:
        bad += 1
        print("BAD", trial, n, v[:2])
    print("trial", trial, "n", n, "ok", not v, "%.1fs" % (time.time() - t0))
print("chain: bad=%d" % bad)
