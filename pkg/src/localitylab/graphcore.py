"""Labeled graphs, balls, views, generators, and isomorphism checks.

Graphs are small and explicit: integer node ids, string input labels,
optional port numberings, optional root markers for oriented forests.
Everything downstream (verifiers, engines, samplers) builds on this module.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional


class GraphError(ValueError):
    pass


def _normalize_nodes(nodes) -> dict[int, str]:
    labels: dict[int, str] = {}
    if isinstance(nodes, dict):
        items = nodes.items()
    else:
        items = []
        for entry in nodes:
            if isinstance(entry, tuple):
                items.append(entry)
            else:
                items.append((entry, ""))
    for node, label in items:
        node = int(node)
        if node in labels:
            raise GraphError(f"duplicate node id {node}")
        if node <= 0:
            raise GraphError(f"node ids must be positive, got {node}")
        labels[node] = str(label)
    return labels


class LabeledGraph:
    """Simple graph with ids, input labels, optional ports and roots.

    directed=False: edges are unordered pairs, stored as (min, max).
    directed=True: edges are ordered pairs; doubled=True additionally permits
    both (u, v) and (v, u) between the same pair, and nothing else.
    ports, when present, list each node's incident neighbors in port order
    (port p is position p-1); the list must cover every incident edge.
    """

    def __init__(self, nodes, edges, directed: bool = False, ports=None,
                 roots=None, doubled: bool = False,
                 rooted_forest: bool = False, id_exponent: int = 2,
                 id_bound: Optional[int] = None,
                 check_id_range: bool = True):
        self.directed = bool(directed)
        self.doubled = bool(doubled)
        self.labels = _normalize_nodes(nodes)
        self.edges: list[tuple[int, int]] = []
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u not in self.labels or v not in self.labels:
                raise GraphError(f"edge ({u},{v}) references unknown node")
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge ({u},{v})")
            if self.directed and not self.doubled and (v, u) in seen:
                raise GraphError(f"antiparallel edge ({u},{v}) without doubled mode")
            seen.add(key)
            self.edges.append(key)
        self.edges.sort()
        self._adj: dict[int, list[int]] = {v: [] for v in self.labels}
        self._out: dict[int, list[int]] = {v: [] for v in self.labels}
        self._in: dict[int, list[int]] = {v: [] for v in self.labels}
        for u, v in self.edges:
            self._adj[u].append(v)
            self._adj[v].append(u)
            if self.directed:
                self._out[u].append(v)
                self._in[v].append(u)
        for v in self._adj:
            # a doubled pair (u,v),(v,u) contributes one adjacency, not two
            self._adj[v] = sorted(set(self._adj[v]))
            self._out[v].sort()
            self._in[v].sort()
        self.roots = sorted(int(r) for r in (roots or []))
        for r in self.roots:
            if r not in self.labels:
                raise GraphError(f"root {r} is not a node")
        self.ports: Optional[dict[int, list[int]]] = None
        if ports is not None:
            self.ports = {int(v): [int(x) for x in lst] for v, lst in ports.items()}
            self._check_ports()
        if rooted_forest:
            self.assert_rooted_forest()
        if check_id_range:
            bound = id_bound if id_bound is not None else max(1, self.n) ** id_exponent
            bad = [v for v in self.labels if v > bound]
            if bad:
                raise GraphError(f"ids {bad} exceed the id space [{bound}]")

    # -- basic accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    def nodes(self) -> list[int]:
        return list(self.labels)

    def has_node(self, v: int) -> bool:
        return v in self.labels

    def neighbors(self, v: int) -> list[int]:
        return self._adj[v]

    def out_neighbors(self, v: int) -> list[int]:
        return self._out[v]

    def in_neighbors(self, v: int) -> list[int]:
        return self._in[v]

    def degree(self, v: int) -> int:
        if self.directed:
            return len(self._out[v]) + len(self._in[v])
        return len(self._adj[v])

    def max_degree(self) -> int:
        return max((self.degree(v) for v in self.labels), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        if self.directed:
            return v in self._out.get(u, ())
        return v in self._adj.get(u, ())

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.edges)

    def _check_ports(self):
        for v in self.labels:
            lst = self.ports.get(v)
            if lst is None:
                raise GraphError(f"node {v} missing from port map")
            want = sorted(self._adj[v]) if not self.directed else sorted(self._out[v] + self._in[v])
            if sorted(lst) != want:
                raise GraphError(f"ports of {v} are not a bijection onto its incident edges")

    def assert_rooted_forest(self):
        if not self.directed:
            raise GraphError("rooted forests must be directed")
        for v in self.labels:
            if len(self._out[v]) > 1:
                raise GraphError(f"node {v} has out-degree {len(self._out[v])} > 1")
        # roots are exactly the sinks
        sinks = sorted(v for v in self.labels if not self._out[v])
        if self.roots and self.roots != sinks:
            raise GraphError("declared roots differ from out-degree-0 nodes")
        self.roots = sinks

    def copy(self) -> "LabeledGraph":
        return LabeledGraph(dict(self.labels), list(self.edges),
                            directed=self.directed,
                            ports={v: list(l) for v, l in self.ports.items()} if self.ports else None,
                            roots=list(self.roots), doubled=self.doubled,
                            check_id_range=False)

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (self.directed == other.directed and self.doubled == other.doubled
                and self.labels == other.labels and self.edges == other.edges
                and self.ports == other.ports and self.roots == other.roots)

    def __hash__(self):
        return hash((self.directed, tuple(sorted(self.labels.items())), tuple(self.edges)))

    def __repr__(self):
        kind = "digraph" if self.directed else "graph"
        return f"<{kind} n={self.n} m={len(self.edges)}>"

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        d = {
            "directed": self.directed,
            "nodes": [{"id": v, "label": self.labels[v]} for v in sorted(self.labels)],
            "edges": [[u, v] for u, v in self.edges],
        }
        if self.ports is not None:
            d["ports"] = {str(v): list(lst) for v, lst in sorted(self.ports.items())}
        if self.roots:
            d["roots"] = list(self.roots)
        if self.doubled:
            d["doubled"] = True
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, d: dict) -> "LabeledGraph":
        return cls(
            {int(nd["id"]): nd.get("label", "") for nd in d["nodes"]},
            [tuple(e) for e in d["edges"]],
            directed=d.get("directed", False),
            ports={int(v): lst for v, lst in d["ports"].items()} if "ports" in d else None,
            roots=d.get("roots"),
            doubled=d.get("doubled", False),
            check_id_range=False,
        )

    @classmethod
    def from_json(cls, s: str) -> "LabeledGraph":
        return cls.from_json_dict(json.loads(s))


@dataclass
class CenteredBall:
    """A radius-t view around one node: induced or light-cone subgraph.

    port_map keeps each surviving edge's original port number at each
    endpoint; full_degrees keeps each node's degree in the host graph
    (an induced ball truncates boundary degrees, the view must not lie).
    """
    subgraph: LabeledGraph
    center: int
    radius: int
    port_map: Optional[dict[int, dict[int, int]]] = None
    full_degrees: Optional[dict[int, int]] = None
    distances: dict[int, int] = field(default_factory=dict)

    def nodes(self) -> list[int]:
        return self.subgraph.nodes()


@dataclass
class JointView:
    """What an observer of a node set learns in t communication rounds:
    all nodes within distance t, and every edge incident to a node within
    distance t-1. Frontier-to-frontier edges are invisible."""
    subgraph: LabeledGraph
    centers: tuple[int, ...]
    radius: int
    distances: dict[int, int] = field(default_factory=dict)

    def key(self) -> tuple:
        g = self.subgraph
        return (self.centers, self.radius, tuple(sorted(g.labels.items())),
                tuple(g.edges), tuple(g.roots))


# -- traversal ----------------------------------------------------------


def bfs_distances(g, sources: Iterable[int], limit: Optional[int] = None) -> dict[int, int]:
    """Hop distances from a source set over the underlying undirected graph.

    Works for any object exposing neighbors(); stops at `limit` hops.
    """
    dist: dict[int, int] = {}
    q = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            q.append(s)
    while q:
        u = q.popleft()
        if limit is not None and dist[u] >= limit:
            continue
        for w in g.neighbors(u):
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def connected_components(g: LabeledGraph) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for v in g.nodes():
        if v in seen:
            continue
        comp = sorted(bfs_distances(g, [v]))
        seen.update(comp)
        comps.append(comp)
    return comps


def induced_subgraph(g: LabeledGraph, keep: Iterable[int]) -> LabeledGraph:
    keep_set = set(keep)
    nodes = {v: g.labels[v] for v in g.labels if v in keep_set}
    edges = [(u, v) for u, v in g.edges if u in keep_set and v in keep_set]
    roots = [r for r in g.roots if r in keep_set]
    return LabeledGraph(nodes, edges, directed=g.directed, roots=roots,
                        doubled=g.doubled, check_id_range=False)


def ball(g: LabeledGraph, v: int, t: int) -> CenteredBall:
    """Induced subgraph on all nodes within distance t of v."""
    if not g.has_node(v):
        raise GraphError(f"no node {v}")
    if t < 0:
        raise GraphError("radius must be >= 0")
    dist = bfs_distances(g, [v], limit=t)
    sub = induced_subgraph(g, dist)
    port_map = None
    if g.ports is not None:
        port_map = {}
        for u in sub.labels:
            port_map[u] = {w: i + 1 for i, w in enumerate(g.ports[u]) if w in sub.labels}
    degs = {u: g.degree(u) for u in sub.labels}
    return CenteredBall(sub, v, t, port_map=port_map, full_degrees=degs, distances=dist)


def joint_view(g, centers: Iterable[int], t: int) -> JointView:
    """Light-cone view of a node set after t rounds.

    Nodes: within distance t of the set. Edges: those with an endpoint
    within distance t-1 (what a message crossing the edge could reveal).
    Accepts any object with neighbors()/labels; returns a plain subgraph.
    """
    centers = tuple(sorted(set(int(c) for c in centers)))
    dist = bfs_distances(g, centers, limit=t)
    labels = {v: g.labels[v] for v in dist} if hasattr(g, "labels") else {v: "" for v in dist}
    inner = {v for v, d in dist.items() if d <= t - 1}
    edges = []
    seenpairs = set()
    for u in inner:
        for w in g.neighbors(u):
            if g_is_directed(g):
                for a, b in ((u, w), (w, u)):
                    if has_directed_edge(g, a, b) and (a, b) not in seenpairs:
                        seenpairs.add((a, b))
                        edges.append((a, b))
            else:
                key = (min(u, w), max(u, w))
                if key not in seenpairs:
                    seenpairs.add(key)
                    edges.append(key)
    roots = [r for r in getattr(g, "roots", []) if r in dist]
    sub = LabeledGraph(labels, sorted(edges), directed=g_is_directed(g),
                       roots=roots, doubled=getattr(g, "doubled", False),
                       check_id_range=False)
    return JointView(sub, centers, t, distances=dist)


def g_is_directed(g) -> bool:
    return bool(getattr(g, "directed", False))


def has_directed_edge(g, u: int, v: int) -> bool:
    return v in g.out_neighbors(u) if hasattr(g, "out_neighbors") else False


def power_graph(g: LabeledGraph, k: int) -> LabeledGraph:
    """Same nodes; an edge wherever the hop distance is between 1 and k."""
    if k < 1:
        raise GraphError("power exponent must be >= 1")
    edges = set()
    for v in g.nodes():
        dist = bfs_distances(g, [v], limit=k)
        for u, d in dist.items():
            if u != v and d >= 1:
                edges.add((min(u, v), max(u, v)))
    return LabeledGraph(dict(g.labels), sorted(edges), directed=False,
                        check_id_range=False)


# -- generators ---------------------------------------------------------


def _path(n: int) -> LabeledGraph:
    if n < 1:
        raise GraphError("path needs >= 1 node")
    return LabeledGraph(range(1, n + 1), [(i, i + 1) for i in range(1, n)])


def _cycle(n: int) -> LabeledGraph:
    if n < 2:
        raise GraphError("cycle needs >= 2 nodes")
    if n == 2:
        # adjacency-wise a 2-cycle collapses to a single edge
        return LabeledGraph([1, 2], [(1, 2)])
    edges = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    return LabeledGraph(range(1, n + 1), edges)


def _grid(rows: int, cols: int) -> LabeledGraph:
    if rows < 1 or cols < 1:
        raise GraphError("grid needs positive dimensions")
    def nid(r, c):
        return r * cols + c + 1
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((nid(r, c), nid(r, c + 1)))
            if r + 1 < rows:
                edges.append((nid(r, c), nid(r + 1, c)))
    return LabeledGraph(range(1, rows * cols + 1), edges)


def _star(n: int) -> LabeledGraph:
    if n < 1:
        raise GraphError("star needs >= 1 node")
    return LabeledGraph(range(1, n + 1), [(1, i) for i in range(2, n + 1)])


def _complete(n: int) -> LabeledGraph:
    return LabeledGraph(range(1, n + 1),
                        [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def _random_rooted_tree(n: int, maxdeg: int, rng: random.Random) -> LabeledGraph:
    if n < 1:
        raise GraphError("tree needs >= 1 node")
    if maxdeg < 2 and n > 1:
        raise GraphError("degree bound < 2 only fits a single node")
    edges = []
    degree = {1: 0}
    for child in range(2, n + 1):
        capacity = [p for p in degree if degree[p] < maxdeg - (0 if p == 1 else 1)]
        # the root may take maxdeg children; others reserve one slot for the parent
        if not capacity:
            raise GraphError("degree bound too tight for n")
        parent = rng.choice(sorted(capacity))
        edges.append((child, parent))
        degree[parent] += 1
        degree[child] = 0
    return LabeledGraph(range(1, n + 1), edges, directed=True, roots=[1],
                        rooted_forest=True)


def _random_rooted_forest(n: int, maxdeg: int, rng: random.Random,
                          root_prob: float = 0.15) -> LabeledGraph:
    edges = []
    roots = [1]
    degree = {1: 0}
    for node in range(2, n + 1):
        if rng.random() < root_prob:
            roots.append(node)
        else:
            capacity = [p for p in degree
                        if degree[p] < maxdeg - (0 if p in roots else 1)]
            if capacity:
                parent = rng.choice(sorted(capacity))
                edges.append((node, parent))
                degree[parent] += 1
            else:
                roots.append(node)
        degree.setdefault(node, 0)
    return LabeledGraph(range(1, n + 1), edges, directed=True, roots=roots,
                        rooted_forest=True)


def _random_rooted_path(n: int, rng: random.Random) -> LabeledGraph:
    """A path oriented toward one end, with ids shuffled over [n^2]."""
    ids = rng.sample(range(1, n * n + 1), n)
    edges = [(ids[i], ids[i + 1]) for i in range(n - 1)]
    return LabeledGraph(ids, edges, directed=True, roots=[ids[-1]] if n else None,
                        rooted_forest=True, check_id_range=False)


def _random_bounded_degree(n: int, maxdeg: int, rng: random.Random) -> LabeledGraph:
    target = rng.randint(n // 2, max(n // 2, (n * maxdeg) // 2 - 1))
    edges = set()
    degree = {v: 0 for v in range(1, n + 1)}
    attempts = 0
    while len(edges) < target and attempts < 20 * target + 100:
        attempts += 1
        u, v = rng.randint(1, n), rng.randint(1, n)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in edges or degree[u] >= maxdeg or degree[v] >= maxdeg:
            continue
        edges.add(key)
        degree[u] += 1
        degree[v] += 1
    return LabeledGraph(range(1, n + 1), sorted(edges))


def _random_rooted_pseudoforest(n: int, rng: random.Random) -> LabeledGraph:
    """Each node points to at most one other node; cycles allowed."""
    edges = set()
    for v in range(1, n + 1):
        if rng.random() < 0.9:
            u = rng.randint(1, n)
            if u != v and (v, u) not in edges and (u, v) not in edges:
                edges.add((v, u))
    roots = sorted(v for v in range(1, n + 1) if not any(e[0] == v for e in edges))
    return LabeledGraph(range(1, n + 1), sorted(edges), directed=True, roots=roots)


def lifebuoy() -> LabeledGraph:
    """Hexagonal prism on ids 1..12: two 6-rings joined by a perfect matching."""
    edges = [(1, 2), (1, 3), (1, 5), (2, 4), (2, 6), (3, 4), (3, 7), (4, 8),
             (5, 7), (5, 9), (6, 8), (6, 10), (7, 11), (8, 12), (9, 10),
             (9, 11), (10, 12), (11, 12)]
    return LabeledGraph(range(1, 13), edges)


def cheating_graph_h() -> LabeledGraph:
    """The prism with one parallel ring pair crossed: 9-10, 11-12 become
    9-12, 10-11. Globally this is a Moebius ladder (odd cycles appear)."""
    edges = [(1, 2), (1, 3), (1, 5), (2, 4), (2, 6), (3, 4), (3, 7), (4, 8),
             (5, 7), (5, 9), (6, 8), (6, 10), (7, 11), (8, 12), (9, 11),
             (9, 12), (10, 11), (10, 12)]
    return LabeledGraph(range(1, 13), edges)


_RANDOM_KINDS = {"random_rooted_tree", "random_rooted_forest", "random_rooted_path",
                 "random_bounded_degree", "random_rooted_pseudoforest"}


def gen_family(kind: str, params: Optional[list] = None, seed=None) -> LabeledGraph:
    """Construct a named graph. Random kinds require a seed."""
    params = list(params or [])
    if kind in _RANDOM_KINDS:
        if seed is None:
            raise GraphError(f"generator '{kind}' requires a seed")
        rng = random.Random(f"gen/{kind}/{seed}")
    if kind == "path":
        return _path(*params)
    if kind == "cycle":
        return _cycle(*params)
    if kind == "grid":
        return _grid(*params)
    if kind == "star":
        return _star(*params)
    if kind == "complete":
        return _complete(*params)
    if kind == "lifebuoy":
        return lifebuoy()
    if kind == "cheating_graph_h":
        return cheating_graph_h()
    if kind == "random_rooted_tree":
        return _random_rooted_tree(params[0], params[1] if len(params) > 1 else 3, rng)
    if kind == "random_rooted_forest":
        return _random_rooted_forest(params[0], params[1] if len(params) > 1 else 3, rng)
    if kind == "random_rooted_path":
        return _random_rooted_path(params[0], rng)
    if kind == "random_bounded_degree":
        return _random_bounded_degree(params[0], params[1] if len(params) > 1 else 4, rng)
    if kind == "random_rooted_pseudoforest":
        return _random_rooted_pseudoforest(params[0], rng)
    raise GraphError(f"unknown family kind '{kind}'")


# -- isomorphism --------------------------------------------------------

EXHAUSTIVE_ISO_LIMIT = 16


def _compatible(a: LabeledGraph, b: LabeledGraph, u: int, w: int,
                match_labels: bool) -> bool:
    if match_labels and a.labels[u] != b.labels[w]:
        return False
    if a.degree(u) != b.degree(w):
        return False
    if a.directed and (len(a.out_neighbors(u)) != len(b.out_neighbors(w))
                       or len(a.in_neighbors(u)) != len(b.in_neighbors(w))):
        return False
    if (u in a.roots) != (w in b.roots):
        return False
    return True


def _mapping_ok(a: LabeledGraph, b: LabeledGraph, mapping: dict[int, int],
                match_labels: bool) -> bool:
    if len(set(mapping.values())) != len(mapping):
        return False
    for u in mapping:
        if not _compatible(a, b, u, mapping[u], match_labels):
            return False
    if a.directed:
        for u, v in a.edges:
            if (mapping[u], mapping[v]) not in b.edge_set():
                return False
        return len(a.edges) == len(b.edges)
    for u, v in a.edges:
        mu, mv = mapping[u], mapping[v]
        if (min(mu, mv), max(mu, mv)) not in b.edge_set():
            return False
    return len(a.edges) == len(b.edges)


def _refine_colors(g: LabeledGraph, init: dict[int, object]) -> dict[int, int]:
    color = {v: hash(repr(init[v])) & 0xFFFFFFFF for v in g.nodes()}
    for _ in range(g.n):
        sig = {}
        for v in g.nodes():
            if g.directed:
                nb = (tuple(sorted(color[w] for w in g.out_neighbors(v))),
                      tuple(sorted(color[w] for w in g.in_neighbors(v))))
            else:
                nb = tuple(sorted(color[w] for w in g.neighbors(v)))
            sig[v] = (color[v], nb)
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values()), key=repr))}
        new = {v: ranks[sig[v]] for v in g.nodes()}
        if len(set(new.values())) == len(set(color.values())):
            return new
        color = new
    return color


def _backtrack_iso(a: LabeledGraph, b: LabeledGraph, match_labels: bool,
                   pinned: dict[int, int]) -> Optional[dict[int, int]]:
    order = sorted(a.nodes(), key=lambda v: (-a.degree(v), v))
    init_a = {v: (a.labels[v] if match_labels else "", v in a.roots) for v in a.nodes()}
    init_b = {v: (b.labels[v] if match_labels else "", v in b.roots) for v in b.nodes()}
    ca = _refine_colors(a, init_a)
    cb = _refine_colors(b, init_b)
    if sorted(ca.values()) != sorted(cb.values()):
        return None

    mapping = dict(pinned)
    used = set(mapping.values())

    def consistent(u, w):
        if not _compatible(a, b, u, w, match_labels):
            return False
        for x, y in mapping.items():
            if a.directed:
                if ((u, x) in a.edge_set()) != ((w, y) in b.edge_set()):
                    return False
                if ((x, u) in a.edge_set()) != ((y, w) in b.edge_set()):
                    return False
            else:
                ea = (min(u, x), max(u, x)) in a.edge_set()
                eb = (min(w, y), max(w, y)) in b.edge_set()
                if ea != eb:
                    return False
        return True

    def rec(i):
        if i == len(order):
            return dict(mapping)
        u = order[i]
        if u in mapping:
            return rec(i + 1)
        for w in b.nodes():
            if w in used or cb[w] != ca[u]:
                continue
            if consistent(u, w):
                mapping[u] = w
                used.add(w)
                got = rec(i + 1)
                if got:
                    return got
                del mapping[u]
                used.discard(w)
        return None

    for u, w in pinned.items():
        if ca[u] != cb[w] or not _compatible(a, b, u, w, match_labels):
            return None
    return rec(0)


def isomorphic(a: LabeledGraph, b: LabeledGraph, mode: str = "plain",
               seq_a: Optional[list[int]] = None,
               seq_b: Optional[list[int]] = None) -> Optional[dict[int, int]]:
    """Find an isomorphism from a to b, or None.

    mode "plain": adjacency and direction only.
    mode "label-preserving": input labels must match too.
    mode "order-preserving": additionally maps seq_a pointwise onto seq_b.
    Exhaustive search up to EXHAUSTIVE_ISO_LIMIT nodes; color refinement
    prunes larger instances (and can reject, never wrongly accept).
    """
    if mode not in ("plain", "label-preserving", "order-preserving"):
        raise GraphError(f"unknown isomorphism mode '{mode}'")
    if a.n != b.n or len(a.edges) != len(b.edges) or a.directed != b.directed:
        return None
    match_labels = mode in ("label-preserving", "order-preserving")
    pinned: dict[int, int] = {}
    if mode == "order-preserving":
        seq_a, seq_b = list(seq_a or []), list(seq_b or [])
        if len(seq_a) != len(seq_b):
            return None
        for u, w in zip(seq_a, seq_b):
            if u in pinned and pinned[u] != w:
                return None
            pinned[u] = w
        if len(set(pinned.values())) != len(pinned):
            return None
    got = _backtrack_iso(a, b, match_labels, pinned)
    if got is not None and not _mapping_ok(a, b, got, match_labels):
        return None
    return got


# -- small search utilities ---------------------------------------------


def is_bipartite(g: LabeledGraph) -> bool:
    side: dict[int, int] = {}
    for s in g.nodes():
        if s in side:
            continue
        side[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for w in g.neighbors(u):
                if w not in side:
                    side[w] = side[u] ^ 1
                    q.append(w)
                elif side[w] == side[u]:
                    return False
    return True


def find_proper_coloring(g: LabeledGraph, q: int) -> Optional[dict[int, int]]:
    """Backtracking q-coloring; None when impossible."""
    order = sorted(g.nodes(), key=lambda v: -g.degree(v))
    coloring: dict[int, int] = {}

    def rec(i):
        if i == len(order):
            return True
        v = order[i]
        taken = {coloring[w] for w in g.neighbors(v) if w in coloring}
        for c in range(1, q + 1):
            if c not in taken:
                coloring[v] = c
                if rec(i + 1):
                    return True
                del coloring[v]
        return False

    return dict(coloring) if rec(0) else None


def chromatic_number(g: LabeledGraph, max_q: int = 8) -> int:
    if g.n == 0:
        return 0
    if not g.edges:
        return 1
    for q in range(2, max_q + 1):
        if find_proper_coloring(g, q) is not None:
            return q
    raise GraphError(f"chromatic number exceeds {max_q}")
