import random
import sys

from localitylab.engines import get_algorithm, run_slocal
from localitylab.graphcore import gen_family
from localitylab.lcl import q_coloring, verify
from localitylab.treesim import online_to_slocal, TreesimError

problem = q_coloring(3)
alg = get_algorithm("greedy-color-online", colors=3)
conv = online_to_slocal(alg, problem, t_prime=1)
print("stages:", [s.name for s in conv.stages()],
      "locality:", conv.locality(0) if callable(conv.locality) else conv.locality)

rng = random.Random(1)
bad = 0
cases = 0
for trial in range(60):
    kind = ("random_rooted_path", "random_rooted_tree",
            "random_rooted_forest")[trial % 3]
    n = rng.randrange(2, 36)
    params = [n] if kind == "random_rooted_path" else [n, 4]
    g = gen_family(kind, params, seed=trial)
    order = sorted(g.nodes())
    if trial % 4 == 1:
        order = list(order)
        rng.shuffle(order)
    try:
        outs, _st = run_slocal(conv, g, order)
    except TreesimError as e:
        print("FAIL", kind, n, trial, "->", e, e.bundle)
        bad += 1
        continue
    v = verify(problem, g, outs)
    if v:
        print("BAD LABELING", kind, n, trial, v[:3])
        bad += 1
    cases += 1
print(f"cases={cases} bad={bad}")
sys.exit(1 if bad else 0)
