"""Throwaway fuzz for the leader clustering. Delete before finalizing."""
import random
import sys

from localitylab.graphcore import LabeledGraph, gen_family, bfs_distances
from localitylab.engines import run_slocal
from localitylab.treesim import (TreesimError, clustering_algorithm,
                                 cluster_rooted_forest, check_clustering)


def comb(spine_len, tooth_depths):
    """Spine rooted at node 1; tooth i hangs under spine node i+1."""
    nodes = list(range(1, spine_len + 1))
    edges = [(i + 1, i) for i in range(1, spine_len)]
    nxt = spine_len + 1
    for i, d in enumerate(tooth_depths, start=1):
        prev = i
        for _ in range(d):
            nodes.append(nxt)
            edges.append((nxt, prev))
            prev = nxt
            nxt += 1
    return LabeledGraph(nodes, edges, directed=True, roots=[1],
                        rooted_forest=True, check_id_range=False)


def depth_order(g, deepest_first=True):
    depth = {}
    for r in g.roots:
        for v, d in bfs_distances(g, [r]).items():
            depth[v] = d
    return sorted(g.nodes(), key=lambda v: (-depth[v] if deepest_first else depth[v], v))


def run_case(g, alpha, order, tag, stats):
    outputs, _ = run_slocal(clustering_algorithm(alpha), g, order)
    leaders = {v for v, out in outputs.items() if out["leader"]}
    bad = check_clustering(g, leaders, alpha)
    stats["cases"] += 1
    stats["leaders"] += len(leaders)
    stats["nodes"] += g.n
    if bad:
        stats["bad"] += 1
        if len(stats["examples"]) < 3:
            stats["examples"].append((tag, alpha, bad[:4], sorted(leaders),
                                      g.to_json_dict()))
    return bad


def main(n_cases):
    rng = random.Random(20260814)
    stats = {"cases": 0, "bad": 0, "examples": [], "leaders": 0, "nodes": 0}
    kinds = ["random_rooted_tree", "random_rooted_forest", "random_rooted_path"]
    for i in range(n_cases):
        alpha = rng.choice([2, 3, 3, 4, 4, 5, 6, 8])
        which = rng.randrange(5)
        if which < 3:
            kind = kinds[which]
            n = rng.randint(1, 40)
            g = gen_family(kind, [n] if kind == "random_rooted_path" else [n, rng.randint(2, 4)],
                           seed=i)
            tag = f"{kind}/{n}"
        elif which == 3:
            m = rng.randint(2, 30)
            teeth = [rng.randint(0, 2 * alpha) for _ in range(m - 1)]
            g = comb(m, teeth)
            tag = f"comb/{m}"
        else:
            m = rng.randint(2, 25)
            teeth = [alpha - 1 if j % 2 else rng.randint(1, alpha) for j in range(m - 1)]
            g = comb(m, teeth)
            tag = f"cascade-comb/{m}"
        style = rng.randrange(4)
        if style == 0:
            order = sorted(g.nodes())
        elif style == 1:
            order = list(g.nodes())
            rng.shuffle(order)
        elif style == 2:
            order = depth_order(g, deepest_first=True)
        else:
            order = depth_order(g, deepest_first=False)
        run_case(g, alpha, order, tag + f"/style{style}", stats)
    print(f"cases={stats['cases']} bad={stats['bad']} "
          f"leader_share={stats['leaders']/max(1, stats['nodes']):.3f}")
    for tag, alpha, bad, leaders, gj in stats["examples"]:
        print("FAIL", tag, "alpha", alpha)
        for b in bad:
            print("   ", b)
        print("    leaders:", leaders)
        print("    graph:", gj["edges"], "roots:", gj["roots"])
    return 1 if stats["bad"] else 0


if __name__ == "__main__":
    sys.exit(main(int(sys.argv[1]) if len(sys.argv) > 1 else 800))
