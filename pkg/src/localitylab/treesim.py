"""Online tree algorithms made order-robust, sequential, and message-passing.

The pieces, bottom up: partial runs of an online algorithm and their
per-component restrictions; a copy-and-vote experiment that turns any
deterministic online algorithm into one whose answers depend only on the
component it is standing in (a canonical answer table, majority-voted over
many disjoint copies of every small run shape); leader clustering on rooted
forests with spacing windows; and conversions from the online model to the
sequential-greedy model, from sequential-greedy to large-id sequential with
a shrunken dependence region, and from sequential-greedy to plain
message-passing via deterministic color reduction.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .graphcore import (CenteredBall, GraphError, LabeledGraph, ball,
                        bfs_distances)
from .engines import (EngineError, OnlineAlgorithm, SlocalAlgorithm,
                      ComposedSlocal, LocalAlgorithm, RevealedGraph,
                      register, resolve_locality, reveal_ball, run_online,
                      run_slocal)
from .lcl import LclProblem, verify

__all__ = [
    "TreesimError",
    "PartialRun",
    "canonical_run_key",
    "rooted_forests_upto",
    "enumerate_run_types",
    "default_schedule",
    "ExperimentGraph",
    "amnesiacize",
    "amnesiacize_randomized",
    "ClusterAssignment",
    "clustering_algorithm",
    "cluster_rooted_forest",
    "check_clustering",
    "online_to_slocal",
    "slocal_speedup",
    "linial_reduction_rounds",
    "linial_distance_coloring",
    "slocal_to_local",
    "derandomize_adaptive",
]


class TreesimError(Exception):
    """Failure with a machine-readable context bundle."""

    def __init__(self, message, bundle=None):
        super().__init__(message)
        self.bundle = bundle or {}


# -- partial runs ----------------------------------------------------------


def _replay_region(host, prefix, t: int) -> LabeledGraph:
    """Induced union of the radius-t balls of `prefix`, in reveal order."""
    revealed = RevealedGraph(directed=getattr(host, "directed", False),
                             doubled=getattr(host, "doubled", False))
    for v in prefix:
        reveal_ball(host, revealed, v, t)
    return revealed.snapshot()


_CANON_CAP = 9  # canonical forms are computed by brute force; keep them tiny


def canonical_run_key(graph: LabeledGraph, seq) -> tuple[str, dict]:
    """Canonical form of (graph, processed sequence) under relabeling.

    Two runs get the same key exactly when some bijection of node ids maps
    one onto the other preserving edges (with direction), input labels,
    root marks, and the processed sequence position by position. Returns
    (key, to_canonical) where to_canonical maps concrete ids to 1..k.
    """
    nodes = sorted(graph.labels)
    seq = tuple(seq)
    if len(nodes) > _CANON_CAP:
        raise TreesimError(f"canonical form capped at {_CANON_CAP} nodes, "
                           f"got {len(nodes)}")
    for v in seq:
        if v not in graph.labels:
            raise TreesimError(f"sequence names {v}, not a node of the run")
    best = None
    best_map = None
    roots = set(graph.roots)
    for perm in itertools.permutations(range(1, len(nodes) + 1)):
        m = dict(zip(nodes, perm))
        enc = (
            tuple(sorted((m[u], m[w]) for u, w in graph.edges)),
            tuple(graph.labels[v] for v in nodes_by_image(m)),
            tuple(sorted(m[r] for r in roots)),
            tuple(m[v] for v in seq),
        )
        if best is None or enc < best:
            best = enc
            best_map = m
    key = repr((graph.directed, best))
    return key, best_map


def nodes_by_image(m: dict) -> list:
    """Concrete ids sorted by their canonical image."""
    return [v for v, _ in sorted(m.items(), key=lambda kv: kv[1])]


@dataclass
class PartialRun:
    """What an online run has shown so far: the revealed region (the
    induced union of the processed nodes' balls) plus the order they were
    processed in."""
    graph: LabeledGraph
    seq: tuple
    radius: int

    @classmethod
    def of(cls, host, prefix, t: int) -> "PartialRun":
        return cls(_replay_region(host, prefix, t), tuple(prefix), t)

    def component_of(self, v: int) -> "PartialRun":
        """Restriction to v's connected component: that component of the
        revealed region, with the processed subsequence that lies in it."""
        if v not in self.graph.labels:
            raise TreesimError(f"{v} is not in the revealed region")
        comp = set(bfs_distances(self.graph, [v]))
        sub = _induced_like(self.graph, comp)
        return PartialRun(sub, tuple(u for u in self.seq if u in comp),
                          self.radius)

    def restrict_last(self) -> "PartialRun":
        if not self.seq:
            raise TreesimError("empty run has no last node")
        return self.component_of(self.seq[-1])

    def one_component(self) -> bool:
        if not self.seq:
            return False
        r = self.restrict_last()
        return set(r.graph.labels) == set(self.graph.labels) and r.seq == self.seq

    def canonical_key(self) -> str:
        return canonical_run_key(self.graph, self.seq)[0]

    def to_json_dict(self) -> dict:
        return {"graph": self.graph.to_json_dict(),
                "seq": list(self.seq), "radius": self.radius}


def _induced_like(g, keep) -> LabeledGraph:
    """Induced subgraph of any host-shaped object, keeping direction and
    whatever true root marks fall inside."""
    keep = set(keep)
    nodes = {v: g.labels[v] for v in keep}
    directed = getattr(g, "directed", False)
    edges = [(u, w) for u, w in g.edges if u in keep and w in keep]
    roots = [r for r in getattr(g, "roots", []) if r in keep]
    return LabeledGraph(nodes, edges, directed=directed, roots=roots,
                        doubled=getattr(g, "doubled", False),
                        check_id_range=False)


def _induced_host(g, keep) -> LabeledGraph:
    """Induced subgraph promoted to a standalone input: in directed hosts
    every sink of the piece counts as a root (a cut parent edge turns the
    child into the root of its own piece)."""
    sub = _induced_like(g, keep)
    if sub.directed:
        roots = sorted(v for v in sub.labels if not sub.out_neighbors(v))
        return LabeledGraph(dict(sub.labels), list(sub.edges), directed=True,
                            roots=roots, check_id_range=False)
    return sub


# -- run-shape enumeration -------------------------------------------------


def rooted_forests_upto(n: int, sigma_in=("",)) -> list[LabeledGraph]:
    """All rooted forests on at most n nodes with inputs from sigma_in,
    one representative per isomorphism class."""
    if n < 1:
        raise TreesimError("need n >= 1")
    out = []
    seen = set()
    for k in range(1, n + 1):
        for parents in itertools.product(*([None] + [p for p in range(1, k + 1)
                                                     if p != v]
                                           for v in range(1, k + 1))):
            edges = [(v, p) for v, p in zip(range(1, k + 1), parents)
                     if p is not None]
            if _has_directed_cycle(k, edges):
                continue
            for labels in itertools.product(sigma_in, repeat=k):
                g = LabeledGraph({v: labels[v - 1] for v in range(1, k + 1)},
                                 edges, directed=True,
                                 roots=[v for v, p in zip(range(1, k + 1), parents)
                                        if p is None],
                                 rooted_forest=True, check_id_range=False)
                key, _ = canonical_run_key(g, ())
                if key not in seen:
                    seen.add(key)
                    out.append(g)
    return out


def _has_directed_cycle(k: int, edges) -> bool:
    nxt = {v: None for v in range(1, k + 1)}
    for u, w in edges:
        nxt[u] = w
    for start in nxt:
        seen = set()
        v = start
        while v is not None:
            if v in seen:
                return True
            seen.add(v)
            v = nxt[v]
    return False


@dataclass
class RunType:
    """One shape of a one-component partial run, in canonical ids 1..k,
    plus the recipe for assembling a fresh physical copy out of good
    copies of its one-step-shorter component runs."""
    key: str
    graph: LabeledGraph          # canonical ids
    seq: tuple                   # canonical ids, length = phase
    parts: list                  # [(part_key, {part_canonical_id: my_id})]
    new_nodes: list              # my ids not covered by any part
    new_edges: list              # my edges not inside any part


def enumerate_run_types(n: int, t: int, sigma_in=("",),
                        family: Optional[list] = None) -> dict:
    """All one-component run shapes of length 1..n over the family of
    rooted forests with at most n nodes, keyed by canonical form.

    Returns {length: {key: RunType}}.
    """
    members = family if family is not None else rooted_forests_upto(n, sigma_in)
    shapes: dict[int, dict[str, RunType]] = {ell: {} for ell in range(1, n + 1)}
    for g in members:
        nodes = sorted(g.labels)
        for ell in range(1, len(nodes) + 1):
            for seq in itertools.permutations(nodes, ell):
                region = _replay_region(g, seq, t)
                if len(bfs_distances(region, [seq[-1]])) != region.n:
                    continue  # not one component
                key, to_canon = canonical_run_key(region, seq)
                if key in shapes[ell]:
                    continue
                canon_g = _relabel(region, to_canon)
                canon_seq = tuple(to_canon[v] for v in seq)
                shapes[ell][key] = _make_type(key, canon_g, canon_seq, t)
    return shapes


def _relabel(g: LabeledGraph, m: dict) -> LabeledGraph:
    return LabeledGraph({m[v]: g.labels[v] for v in g.labels},
                        [(m[u], m[w]) for u, w in g.edges],
                        directed=g.directed, roots=[m[r] for r in g.roots],
                        doubled=g.doubled, check_id_range=False)


def _make_type(key: str, canon_g: LabeledGraph, canon_seq: tuple,
               t: int) -> RunType:
    prefix_region = _replay_region(canon_g, canon_seq[:-1], t)
    covered = set(prefix_region.labels)
    parts = []
    left = set(covered)
    while left:
        comp = set(bfs_distances(prefix_region, [min(left)]))
        sub = _induced_like(prefix_region, comp)
        subseq = tuple(v for v in canon_seq[:-1] if v in comp)
        part_key, to_canon = canonical_run_key(sub, subseq)
        parts.append((part_key, {c: v for v, c in to_canon.items()}))
        left -= comp
    covered_edges = set(prefix_region.edges)
    return RunType(
        key=key, graph=canon_g, seq=canon_seq, parts=parts,
        new_nodes=sorted(set(canon_g.labels) - covered),
        new_edges=[e for e in canon_g.edges if e not in covered_edges],
    )


# -- the copy-and-vote experiment ------------------------------------------


def default_schedule(n: int, out_size: int, in_size: int = 1) -> tuple[dict, int]:
    """Copy counts per phase, sized so each majority vote survives every
    later phase's consumption of good copies: N_l = (3*|out|*n*g)^(n-l+1)*n
    with g = 2^(n^2) * |in|^n an upper bound on shapes per phase."""
    g_cap = (2 ** (n * n)) * (in_size ** n)
    base = 3 * out_size * n * g_cap
    return {ell: (base ** (n - ell + 1)) * n for ell in range(1, n + 1)}, g_cap


class _GrowingHost:
    """Mutable disjoint-union host the experiment is revealed from."""

    def __init__(self, directed: bool):
        self.directed = directed
        self.doubled = False
        self.labels: dict[int, str] = {}
        self._adj: dict[int, list] = {}
        self._out: dict[int, list] = {}
        self._in: dict[int, list] = {}
        self.roots: set = set()
        self.edges: list = []
        self.ports = None

    @property
    def n(self):
        return len(self.labels)

    def nodes(self):
        return list(self.labels)

    def has_node(self, v):
        return v in self.labels

    def neighbors(self, v):
        return self._adj[v]

    def out_neighbors(self, v):
        return self._out[v]

    def in_neighbors(self, v):
        return self._in[v]

    def degree(self, v):
        if self.directed:
            return len(self._out[v]) + len(self._in[v])
        return len(self._adj[v])

    def max_degree(self):
        return max((self.degree(v) for v in self.labels), default=0)

    def add_node(self, v, label, is_root):
        self.labels[v] = label
        self._adj[v] = []
        self._out[v] = []
        self._in[v] = []
        if is_root:
            self.roots.add(v)

    def add_edge(self, u, w):
        self.edges.append((u, w))
        self._adj[u].append(w)
        self._adj[w].append(u)
        if self.directed:
            self._out[u].append(w)
            self._in[w].append(u)
            self.roots.discard(u)


@dataclass
class _Copy:
    type_key: str
    phase: int
    node_map: dict         # canonical id -> global id
    center: int            # global id of the node processed in its phase
    output: object = None
    good: bool = False
    consumed: bool = False  # absorbed as a component of a later-phase copy


@dataclass
class ExperimentGraph:
    """The assembled experiment: every physical copy with its vote, the
    canonical answer table the votes produced, and size accounting."""
    locality: int
    schedule: dict
    shape_counts: dict
    copies: list
    table: dict                       # canonical run key -> canonical label
    host_nodes: int
    host_edges: int
    phase_nodes: dict = field(default_factory=dict)

    def accounting_rows(self) -> list[dict]:
        rows = []
        per = {}
        for c in self.copies:
            rec = per.setdefault((c.phase, c.type_key),
                                 {"copies": 0, "good": 0, "consumed": 0})
            rec["copies"] += 1
            rec["good"] += int(c.good)
            rec["consumed"] += int(c.consumed)
        for (phase, key), rec in sorted(per.items()):
            rows.append({"phase": phase, "shape": key,
                         "copies": rec["copies"], "good": rec["good"],
                         "consumed": rec["consumed"],
                         "nodes_added": self.phase_nodes.get(phase, 0)})
        return rows

    def table_json_dict(self) -> dict:
        return {"locality": self.locality,
                "entries": [{"shape": k, "label": self.table[k]}
                            for k in sorted(self.table)]}


def amnesiacize(alg: OnlineAlgorithm, n: int, problem: LclProblem,
                schedule: Optional[dict] = None,
                locality: Optional[int] = None,
                verify_experiment: bool = True) -> OnlineAlgorithm:
    """Make a deterministic online algorithm's answers depend only on the
    component it is standing in.

    Runs `alg` on many disjoint copies of every one-component run shape of
    length 1..n, phase by phase, reusing majority-voted copies of shorter
    runs as the prefix components of longer ones. The majority label per
    shape becomes a canonical answer table; the returned algorithm answers
    from the table and falls back to simulating `alg` fresh on the standing
    component for shapes outside it. The experiment and table are attached
    as `.experiment` and `.table`.
    """
    if alg.randomized:
        raise TreesimError("only deterministic algorithms can be tabled; "
                           "fix the randomness first")
    out_alpha = list(problem.sigma_out)
    in_alpha = list(problem.sigma_in)
    sched_default, g_cap = default_schedule(n, len(out_alpha), len(in_alpha))
    sched = dict(sched_default)
    if schedule is not None:
        for ell, count in schedule.items():
            if int(count) < 1:
                raise TreesimError(f"phase {ell} needs at least one copy")
            sched[int(ell)] = int(count)
    size_bound = sum(sched[ell] * g_cap * n for ell in sched)
    t = locality if locality is not None else resolve_locality(alg.locality,
                                                               size_bound)
    shapes = enumerate_run_types(n, t, sigma_in=in_alpha)
    for ell in shapes:
        if len(shapes[ell]) > g_cap:
            raise TreesimError(f"phase {ell} has {len(shapes[ell])} shapes, "
                               f"cap is {g_cap}")

    host = _GrowingHost(directed=True)
    revealed = RevealedGraph(directed=True)
    memory = alg.init(size_bound if alg.uses_n else None) if alg.init else None
    copies: list[_Copy] = []
    pools: dict[str, list] = {}   # shape key -> indices of good unused copies
    table: dict[str, object] = {}
    next_id = 1
    phase_nodes: dict[int, int] = {}

    for ell in range(1, n + 1):
        phase_new = 0
        phase_copies: dict[str, list] = {}
        for key in sorted(shapes[ell]):
            ty = shapes[ell][key]
            made = []
            for _ in range(sched[ell]):
                node_map = {}
                for part_key, canon_to_mine in ty.parts:
                    pool = pools.get(part_key, [])
                    while pool and copies[pool[-1]].consumed:
                        pool.pop()
                    if not pool:
                        raise TreesimError(
                            "experiment schedule exhausted: no good unused "
                            f"copy of a length-{len(canon_to_mine)} component "
                            f"while assembling phase {ell}",
                            bundle={"phase": ell, "shape": key,
                                    "missing_part": part_key,
                                    "schedule": dict(sched)})
                    idx = pool.pop()
                    part = copies[idx]
                    part.consumed = True
                    for part_canon, mine in canon_to_mine.items():
                        node_map[mine] = part.node_map[part_canon]
                for v in ty.new_nodes:
                    node_map[v] = next_id
                    next_id += 1
                    phase_new += 1
                new_set = set(ty.new_nodes)
                for v in ty.new_nodes:
                    host.add_node(node_map[v], ty.graph.labels[v],
                                  v in ty.graph.roots)
                for u, w in ty.new_edges:
                    host.add_edge(node_map[u], node_map[w])
                    if u not in new_set:
                        host.roots.discard(node_map[u])
                center = node_map[ty.seq[-1]]
                reveal_ball(host, revealed, center, t)
                out, memory = alg.step(memory, revealed, center, None, ())
                if out not in out_alpha:
                    raise TreesimError(
                        f"algorithm output {out!r} is outside the problem "
                        "alphabet", bundle={"phase": ell, "shape": key,
                                            "node": center})
                c = _Copy(key, ell, node_map, center, output=out)
                copies.append(c)
                made.append(len(copies) - 1)
            phase_copies[key] = made
        phase_nodes[ell] = phase_new
        # majority vote: the label that survives must cover at least a
        # 1/|out| fraction of this phase's copies of each shape
        for key, made in phase_copies.items():
            tally = Counter(copies[i].output for i in made)
            label, hits = min(tally.items(), key=lambda kv: (-kv[1], repr(kv[0])))
            if hits * len(out_alpha) < len(made):
                raise TreesimError("majority vote broke: no label reaches "
                                   f"a 1/{len(out_alpha)} share for {key}")
            table[key] = label
            good = [i for i in made if copies[i].output == label]
            for i in good:
                copies[i].good = True
            pools[key] = good[::-1]  # consumed back to front

    if verify_experiment:
        _verify_experiment(problem, shapes, copies)

    exp = ExperimentGraph(locality=t, schedule=sched,
                          shape_counts={ell: len(shapes[ell]) for ell in shapes},
                          copies=copies, table=table,
                          host_nodes=host.n, host_edges=len(host.edges),
                          phase_nodes=phase_nodes)
    wrapped = _table_algorithm(alg, table, t, n)
    wrapped.experiment = exp
    wrapped.table = table
    return wrapped


def _verify_experiment(problem, shapes, copies):
    """Check the base algorithm actually solved the problem on the final
    experiment host, one surviving copy at a time (consumed copies live on
    inside the copy that absorbed them). Only processed nodes carry labels,
    so the check covers exactly the processed nodes whose balls are fully
    labeled; memoized per (shape, label pattern) since copies of a shape
    run identically."""
    outputs_of = {c.center: c.output for c in copies}
    cache = {}
    for c in copies:
        if c.consumed:
            continue
        ty = shapes[c.phase][c.type_key]
        labeling = {v: outputs_of[c.node_map[v]] for v in ty.seq}
        sig = (c.type_key, tuple(labeling[v] for v in ty.seq))
        if sig not in cache:
            bad = []
            for v in ty.seq:
                b = ball(ty.graph, v, problem.radius)
                if all(u in labeling for u in b.subgraph.nodes()):
                    if not problem.permissible(b, labeling):
                        bad.append(v)
            cache[sig] = bad
        if cache[sig]:
            raise TreesimError(
                "the base algorithm failed inside the experiment",
                bundle={"shape": c.type_key, "center": c.center,
                        "bad_nodes": cache[sig],
                        "labels": {v: labeling[v] for v in ty.seq}})


def _table_algorithm(alg, table, t, n_max):
    def step(memory, revealed, v, rng, prior):
        seq = (memory or ()) + (v,)
        comp = set(bfs_distances(revealed, [v]))
        sub = _induced_like(revealed, comp)
        subseq = tuple(u for u in seq if u in comp)
        # the table only holds shapes of up to n_max processed nodes, so
        # canonicalizing anything longer is wasted work
        if sub.n <= _CANON_CAP and len(subseq) <= n_max:
            key, _ = canonical_run_key(sub, subseq)
            if key in table:
                return table[key], seq
        # shape outside the table: replay the base algorithm on the
        # standing component alone
        outs, _tr = run_online(alg, sub, subseq, keep_transcript=False)
        return outs[v], seq

    return OnlineAlgorithm(name=f"{alg.name}#tabled", locality=t, step=step,
                           init=(lambda _n: ()), uses_n=False,
                           randomized=False)


# -- fixing bounded randomness ---------------------------------------------


class _FixedBits:
    """Stand-in rng that serves a predeclared bit string."""

    def __init__(self, bits):
        self.bits = list(bits)
        self.used = 0

    def getrandbits(self, k):
        if self.used + k > len(self.bits):
            raise TreesimError("declared randomness budget exceeded")
        val = 0
        for _ in range(k):
            val = (val << 1) | self.bits[self.used]
            self.used += 1
        return val

    def randrange(self, n):
        span = max(1, n)
        k = max(1, (span - 1).bit_length())
        return self.getrandbits(k) % span

    def choice(self, seq):
        return seq[self.randrange(len(seq))]


def amnesiacize_randomized(alg: OnlineAlgorithm, n: int, problem: LclProblem,
                           budget: int, bits_per_node: int = 1,
                           schedule: Optional[dict] = None,
                           verify_experiment: bool = True) -> OnlineAlgorithm:
    """Search fallback for randomized algorithms: enumerate bit fixings
    lexicographically, keep the first whose deterministic version solves
    the problem on every rooted forest with at most n nodes under every
    processing order, and table that one.

    A deterministic input skips the search. `budget` caps the number of
    fixings tried; 0 means the search is not allowed to start.
    """
    if not alg.randomized:
        return amnesiacize(alg, n, problem, schedule=schedule,
                           verify_experiment=verify_experiment)
    members = rooted_forests_upto(n, sigma_in=list(problem.sigma_in))
    total_bits = bits_per_node * n
    tried = 0
    for bits in itertools.product((0, 1), repeat=total_bits):
        if tried >= budget:
            raise TreesimError(
                f"randomness search budget {budget} exhausted after "
                f"{tried} fixings", bundle={"budget": budget, "tried": tried})
        tried += 1
        det = _fixed_bits_algorithm(alg, bits, bits_per_node)
        if _solves_everywhere(det, members, problem):
            return amnesiacize(det, n, problem, schedule=schedule,
                               verify_experiment=verify_experiment)
    raise TreesimError(
        f"no correct fixing among {tried} tried (bits_per_node="
        f"{bits_per_node})", bundle={"budget": budget, "tried": tried})


def _fixed_bits_algorithm(alg, bits, per_node):
    def step(memory, revealed, v, rng, prior):
        inner, i = memory
        lo = i * per_node
        if lo + per_node > len(bits):
            raise TreesimError("fixing is shorter than the run")
        fake = _FixedBits(bits[lo:lo + per_node])
        out, inner = alg.step(inner, revealed, v, fake, prior)
        return out, (inner, i + 1)

    def init(n_arg):
        inner = alg.init(n_arg) if alg.init else None
        return (inner, 0)

    return OnlineAlgorithm(name=f"{alg.name}#bits{''.join(map(str, bits))}",
                           locality=alg.locality, step=step, init=init,
                           uses_n=alg.uses_n, randomized=False)


def _solves_everywhere(det, members, problem) -> bool:
    for g in members:
        for order in itertools.permutations(sorted(g.labels)):
            try:
                outs, _ = run_online(det, g, order, keep_transcript=False)
            except TreesimError:
                return False
            if verify(problem, g, outs):
                return False
    return True


# -- leader clustering on rooted forests -----------------------------------
#
# Leaders are picked so that (a) every root is a leader, (b) two leaders on
# a common ancestor chain are at least alpha-1 apart, and (c) along every
# root-to-leaf path consecutive leaders are at most 2*alpha+1 apart with at
# most 2*alpha of trail past the last one. Three sequential stages:
#
#   phase   every node adopts a depth offset mod (alpha-1) from the oldest
#           visible reference (a root if one is in range, else the earliest
#           processed region); offsets transport along tree paths, so nodes
#           sharing a reference agree on a common grid of depths.
#   appoint a processed node that sees no leader within 2*alpha below it on
#           some branch commits the first free on-grid descendant in the
#           depth window [alpha-1, 2*alpha-2] of that branch. Free means no
#           committed leader or root within alpha-2 up or down the chain,
#           which keeps comparable leaders alpha-1 apart unconditionally.
#           Nodes on a shared grid can never block each other (on-chain
#           grid points differ by multiples of alpha-1 > alpha-2); blocking
#           happens only where two reference regions meet, and there the
#           window has enough slack to commit on the neighboring grid.
#   crown   leaders are the roots plus every committed appointee.


def _parent(sub, v):
    out = sub.out_neighbors(v)
    if len(out) > 1:
        raise TreesimError(f"{v} has several parents; not a rooted forest")
    return out[0] if out else None


def _chain_up(sub, v, cap):
    """Ancestors of v in the view, nearest first, at most cap of them."""
    chain = []
    cur = v
    for _ in range(cap):
        p = _parent(sub, cur)
        if p is None:
            break
        chain.append(p)
        cur = p
    return chain


def _subtree_within(sub, v, depth):
    """Strict descendants of v within the given depth."""
    found = []
    frontier = [v]
    for _ in range(max(0, depth)):
        frontier = [c for u in frontier for c in sub.in_neighbors(u)]
        found.extend(frontier)
    return found


def _view_depths(view):
    """Depth of every view node measured from the center's highest visible
    ancestor (within a tree, undirected distance from an ancestor is depth)."""
    sub = view.subgraph
    top = view.center
    while True:
        p = _parent(sub, top)
        if p is None:
            break
        top = p
    return top, bfs_distances(sub, [top])


def _downward_prefixes(sub, v, limit):
    """Maximal directed paths from v, cut at `limit` edges; each is the node
    list [v, child, ...]."""
    out = []
    stack = [[v]]
    while stack:
        path = stack.pop()
        kids = sub.in_neighbors(path[-1]) if len(path) <= limit else []
        if not kids or len(path) == limit + 1:
            out.append(path)
            continue
        for c in kids:
            stack.append(path + [c])
    return sorted(out)


def clustering_algorithm(alpha: int):
    """Sequential-greedy leader election on rooted forests with the window
    guarantees of `check_clustering`, locality linear in alpha."""
    if alpha < 1:
        raise TreesimError("alpha must be at least 1")
    if alpha <= 2:
        # every node may lead: spacing >= alpha-1 <= 1 holds trivially
        return SlocalAlgorithm(
            name=f"cluster(a{alpha})", locality=1,
            step=lambda view, processed, prior, n: ({"leader": True}, None))

    modulus = alpha - 1
    spacing = alpha - 2
    serve = 2 * alpha
    reach = 4 * alpha

    def phase_step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        top, depth = _view_depths(view)
        if top in sub.roots:
            return {"anchor": (0, top), "phase": depth[v] % modulus}, None
        best = None
        for u, (out, _state) in sorted(processed.items()):
            got = (out["anchor"], (out["phase"] + depth[v] - depth[u]) % modulus)
            if best is None or got[0] < best[0]:
                best = got
            elif got[0] == best[0] and got[1] != best[1]:
                raise TreesimError("phase transport inconsistency",
                                   bundle={"node": v, "anchor": got[0]})
        if best is None:
            best = ((1, v), 0)
        return {"anchor": best[0], "phase": best[1]}, None

    def _blocked(sub, committed, roots, x):
        if any(y in committed or y in roots for y in _chain_up(sub, x, spacing)):
            return True
        return any(z in committed for z in _subtree_within(sub, x, spacing))

    def appoint_step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        phases = prior[-1]
        committed = set()
        for u, (out, _state) in processed.items():
            committed.update(out["targets"])
        roots = set(sub.roots)
        mine = []
        for path in _downward_prefixes(sub, v, serve):
            if any(y in committed or y in roots for y in path[1:]):
                continue
            hi = min(2 * alpha - 2, len(path) - 1)
            for j in range(alpha - 1, hi + 1):
                x = path[j]
                if (phases[v]["phase"] + j) % modulus != 0:
                    continue
                if _blocked(sub, committed, roots, x):
                    continue
                committed.add(x)
                mine.append(x)
                break
        return {"targets": sorted(set(mine))}, None

    def crown_step(view, processed, prior, n):
        sub = view.subgraph
        appointed = prior[-1]
        v = view.center
        if v in sub.roots:
            return {"leader": True}, None
        for u in sub.nodes():
            if v in appointed[u]["targets"]:
                return {"leader": True}, None
        return {"leader": False}, None

    return ComposedSlocal(
        name=f"cluster(a{alpha})",
        parts=[SlocalAlgorithm(name=f"phase(a{alpha})", locality=reach,
                               step=phase_step),
               SlocalAlgorithm(name=f"appoint(a{alpha})", locality=reach,
                               step=appoint_step),
               SlocalAlgorithm(name=f"crown(a{alpha})", locality=2 * alpha + 1,
                               step=crown_step)])


@dataclass
class ClusterAssignment:
    """Leaders plus the derived cluster structure of a rooted forest."""
    alpha: int
    leaders: list
    clusters: list          # components of non-leader nodes, each sorted
    closed_clusters: list   # cluster plus its adjacent leaders
    leader_of: dict         # node -> nearest leader ancestor (self if leader)

    def to_json_dict(self) -> dict:
        return {"alpha": self.alpha, "leaders": list(self.leaders),
                "clusters": [list(c) for c in self.clusters],
                "closed_clusters": [list(c) for c in self.closed_clusters],
                "leader_of": {str(k): v for k, v in sorted(self.leader_of.items())}}


def cluster_rooted_forest(g: LabeledGraph, alpha: int,
                          order=None) -> ClusterAssignment:
    """Run the leader election and package the resulting clusters."""
    g.assert_rooted_forest()
    if order is None:
        order = sorted(g.nodes())
    outputs, _states = run_slocal(clustering_algorithm(alpha), g, order)
    leaders = {v for v, out in outputs.items() if out["leader"]}
    bad = check_clustering(g, leaders, alpha)
    if bad:
        raise TreesimError("leader election broke its own contract",
                           bundle={"alpha": alpha, "violations": bad})
    leader_of = {}
    for v in g.nodes():
        cur = v
        for _ in range(g.n + 1):
            if cur in leaders:
                leader_of[v] = cur
                break
            nxt = g.out_neighbors(cur)
            if not nxt:
                raise TreesimError(f"no leader above {v}")
            cur = nxt[0]
    unassigned = set(g.nodes()) - leaders
    clusters = []
    closed = []
    while unassigned:
        start = min(unassigned)
        comp = set()
        frontier = [start]
        edge = set()
        while frontier:
            u = frontier.pop()
            if u in comp:
                continue
            comp.add(u)
            for w in g.neighbors(u):
                if w in leaders:
                    edge.add(w)
                elif w not in comp:
                    frontier.append(w)
        clusters.append(sorted(comp))
        closed.append(sorted(comp | edge))
        unassigned -= comp
    return ClusterAssignment(alpha=alpha, leaders=sorted(leaders),
                             clusters=clusters, closed_clusters=closed,
                             leader_of=leader_of)


def check_clustering(g: LabeledGraph, leaders, alpha: int) -> list[dict]:
    """Independent audit of a leader set: roots lead, comparable leaders
    are >= alpha-1 apart, and every root-to-leaf path sees a leader at
    gaps <= 2*alpha+1 with <= 2*alpha of trail past the last one."""
    leaders = set(leaders)
    violations = []
    for r in g.roots:
        if r not in leaders:
            violations.append({"kind": "root-not-leader", "nodes": [r]})
    for v in sorted(leaders):
        cur = v
        dist = 0
        while True:
            up = g.out_neighbors(cur)
            if not up:
                break
            cur = up[0]
            dist += 1
            if cur in leaders:
                if dist < alpha - 1:
                    violations.append({"kind": "spacing", "nodes": [v, cur],
                                       "distance": dist})
                break
            if dist >= alpha - 1:
                break
    for leaf in sorted(v for v in g.nodes() if not g.in_neighbors(v)):
        cur = leaf
        since = 0
        tail_done = False
        while True:
            if cur in leaders:
                if not tail_done:
                    if since > 2 * alpha:
                        violations.append({"kind": "tail",
                                           "nodes": [leaf, cur],
                                           "distance": since})
                    tail_done = True
                elif since > 2 * alpha + 1:
                    violations.append({"kind": "gap", "nodes": [leaf, cur],
                                       "distance": since})
                since = 0
            up = g.out_neighbors(cur)
            if not up:
                if not tail_done:
                    violations.append({"kind": "no-leader-on-path",
                                       "nodes": [leaf]})
                break
            cur = up[0]
            since += 1
    return violations


# -- online to sequential-greedy --------------------------------------------
#
# The conversion rides on the clustering. Around every leader, a precommit
# stage runs the online algorithm on the radius-2r balls of the boundary
# leaders of the leader's region (hosted with enough fringe that the run
# never notices the cut), a commit stage publishes the precommitted labels,
# and a completion stage re-runs the online algorithm over each remaining
# cluster with the precommitted balls replayed first, in the same per-ball
# sorted order. Because the algorithm is amnesiac, the replay reproduces
# the committed labels exactly and its continuation labels the cluster
# consistently with both ends.


def _ball_set(sub, sources, radius):
    if not sources:
        return set()
    return set(bfs_distances(sub, list(sources), limit=radius))


def _leaders_in(sub, flags):
    return {u for u in sub.nodes() if flags[u]["leader"]}


def _nearest_leader_up(sub, leaders, v, cap):
    cur = v
    for _ in range(cap):
        p = _parent(sub, cur)
        if p is None:
            return None
        cur = p
        if cur in leaders:
            return cur
    return None


def _region_of(sub, leaders, v):
    """Leader v's domain: the non-leader flood below v and the boundary
    leaders the flood runs into, both sorted."""
    cluster = []
    bottoms = []
    frontier = [v]
    seen = {v}
    while frontier:
        u = frontier.pop()
        for c in sub.in_neighbors(u):
            if c in seen:
                continue
            seen.add(c)
            if c in leaders:
                bottoms.append(c)
            else:
                cluster.append(c)
                frontier.append(c)
    return sorted(cluster), sorted(bottoms)


def online_to_slocal(alg: OnlineAlgorithm, problem: LclProblem, t_prime: int,
                     exhaustive: bool = False) -> ComposedSlocal:
    """Turn an amnesiac online algorithm into a sequential-greedy one with
    locality linear in its own.

    `exhaustive` switches the completion stage from re-running the online
    algorithm per cluster to enumerating labelings outright (independent
    cross-check; capped).
    """
    if alg.randomized:
        raise TreesimError("only deterministic algorithms convert; "
                           "fix the randomness first")
    r = problem.radius
    if t_prime < 0:
        raise TreesimError("locality must be >= 0")
    alpha = 10 * t_prime + 4 * r
    if alpha < 1:
        raise TreesimError("locality and checking radius are both zero; "
                           "nothing to window")
    pad = 2 * r + 2 * t_prime  # fringe that hides host truncation from runs
    cluster_span = 2 * alpha + 2

    def _owners(sub, leaders, v):
        """Ball owners of leader v's precommit region."""
        _cluster, bottoms = _region_of(sub, leaders, v)
        owners = list(bottoms)
        if v in sub.roots:
            owners.append(v)
        return sorted(owners)

    def precommit_step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        flags = prior[-1]
        if not flags[v]["leader"]:
            return {"assign": {}}, None
        leaders = _leaders_in(sub, flags)
        owners = _owners(sub, leaders, v)
        if not owners:
            return {"assign": {}}, None
        balls = sorted(_ball_set(sub, owners, 2 * r))
        host = _induced_host(sub, _ball_set(sub, owners, pad))
        outs, _tr = run_online(alg, host, balls, keep_transcript=False)
        return {"assign": {u: outs[u] for u in balls}}, None

    def commit_step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        assigns = prior[-1]
        writers = sorted(u for u in sub.nodes() if v in assigns[u]["assign"])
        if len(writers) > 1:
            raise TreesimError(
                "conflicting precommitments; regions were not disjoint",
                bundle={"node": v, "writers": writers})
        if not writers:
            return {"label": None}, None
        return {"label": assigns[writers[0]]["assign"][v]}, None

    completions: dict = {}

    def complete_step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        committed = prior[-1]
        flags = prior[-3]
        if committed[v]["label"] is not None:
            return committed[v]["label"], None
        leaders = _leaders_in(sub, flags)
        top = _nearest_leader_up(sub, leaders, v, cluster_span)
        if top is None:
            raise TreesimError(f"no leader above {v}; clustering broken")
        cluster, bottoms = _region_of(sub, leaders, top)
        # replay the full precommit invocations that labeled the balls
        # adjacent to this cluster: the one owned by top and, unless top
        # is a root, the one owned by top's own leader
        invokers = [top]
        up = _nearest_leader_up(sub, leaders, top, cluster_span)
        if up is not None:
            invokers.append(up)
        balls: set = set()
        fringe: set = set()
        for L in invokers:
            owners = _owners(sub, leaders, L)
            balls |= _ball_set(sub, owners, 2 * r)
            fringe |= _ball_set(sub, owners, pad)
        host = _induced_host(sub, fringe | set(cluster))
        replay = sorted(balls)
        rest = sorted(set(cluster) - balls)
        # memoized on content, not on node names: the same converted
        # algorithm may be run over many graphs
        memo = (tuple(sorted(host.nodes())), tuple(sorted(host.edges)),
                tuple(host.roots), tuple(replay), tuple(rest))
        if memo not in completions:
            if exhaustive:
                completions[memo] = _exhaustive_completion(
                    problem, host, replay, rest, committed,
                    [top] + bottoms, cluster)
            else:
                outs, _tr = run_online(alg, host, replay + rest,
                                       keep_transcript=False)
                for u in replay:
                    if outs[u] != committed[u]["label"]:
                        raise TreesimError(
                            "replay diverged from the precommitted labels; "
                            "the algorithm is not amnesiac",
                            bundle={"node": u, "replayed": outs[u],
                                    "committed": committed[u]["label"]})
                completions[memo] = outs
        return completions[memo][v], None

    cluster = clustering_algorithm(alpha)
    parts = list(cluster.stages()) + [
        SlocalAlgorithm(name="precommit", step=precommit_step,
                        locality=2 * alpha + pad + 2),
        SlocalAlgorithm(name="commit", step=commit_step,
                        locality=2 * alpha + 2 * r + 2),
        SlocalAlgorithm(name="complete", step=complete_step,
                        locality=3 * (2 * alpha + 1) + pad + 1),
    ]
    return ComposedSlocal(name=f"{alg.name}@slocal", parts=parts)


_EXHAUSTIVE_CAP = 2_000_000


def _exhaustive_completion(problem, host, replay, rest, committed,
                           anchors, cluster):
    """Try every labeling of the uncommitted cluster nodes, first one whose
    visible constraint balls all pass wins."""
    sigma = list(problem.sigma_out)
    if len(sigma) ** max(1, len(rest)) > _EXHAUSTIVE_CAP:
        raise TreesimError(
            "cluster too large for exhaustive completion",
            bundle={"cluster_nodes": len(rest), "labels": len(sigma)})
    base = {u: committed[u]["label"] for u in replay}
    check_nodes = sorted(set(cluster) | set(anchors))
    cached_balls = {x: ball(host, x, problem.radius) for x in check_nodes}
    for combo in itertools.product(sigma, repeat=len(rest)):
        full = dict(base)
        full.update(zip(rest, combo))
        if all(problem.permissible(cached_balls[x], full)
               for x in check_nodes):
            return full
    raise TreesimError("no completion exists; the base algorithm cannot "
                       "have been correct", bundle={"cluster": list(rest)})


# -- sequential-greedy locality squashing -----------------------------------
#
# An algorithm whose locality is small next to log(window) gets rebuilt at
# constant locality: cluster the forest so each closed cluster fits well
# inside the window, hand out identifiers from four fixed blocks keyed to
# four distance bands around each leader, and answer every node by running
# the original algorithm on its region's virtual graph under the identifier
# order. The band layout makes the identifiers that matter for any one
# node's output pairwise distinct even though blocks repeat across regions.


def _id_blocks(window: int) -> dict:
    """Identifier ranges per distance band; bands 2 and 3 swap blocks so
    that walking away from a leader the identifier order is not monotone,
    which keeps middle-band dependence chains from running outward."""
    q = window // 4
    return {1: (1, q), 3: (q + 1, 2 * q), 2: (2 * q + 1, 3 * q),
            4: (3 * q + 1, window)}


def _restricted_ball(sub, allowed, source, limit):
    """Hop distances from `source` staying inside the `allowed` node set."""
    dist = {source: 0}
    frontier = [source]
    d = 0
    while frontier and d < limit:
        d += 1
        nxt = []
        for u in frontier:
            for w in sub.neighbors(u):
                if w in allowed and w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def _relabel_view(sub, dist, values, center, radius):
    """A view whose nodes are shown under their assigned values.

    Truthful apart from names: edges come from the host, degrees are the
    host degrees (a view must not understate a boundary node's degree),
    and root status carries over. Two members sharing a value means the
    window was too small for the locality; fail loudly rather than rename.
    """
    members = set(dist)
    if len({values[u] for u in members}) != len(members):
        raise TreesimError("identifier collision inside one view")
    nodes = {values[u]: sub.labels[u] for u in members}
    edges = [(values[a], values[b]) for a, b in sub.edges
             if a in members and b in members]
    roots = [values[r] for r in sub.roots if r in members]
    vg = LabeledGraph(nodes, edges, directed=sub.directed, roots=roots,
                      doubled=sub.doubled, check_id_range=False)
    port_map = None
    if sub.ports is not None:
        port_map = {values[u]: {values[w]: i + 1
                                for i, w in enumerate(sub.ports[u])
                                if w in members}
                    for u in members}
    degs = {values[u]: sub.degree(u) for u in members}
    dmap = {values[u]: d for u, d in dist.items()}
    return CenteredBall(vg, values[center], radius, port_map=port_map,
                        full_degrees=degs, distances=dmap)


def _region_signature(sub, window_nodes, values, process):
    nodes = tuple(sorted(window_nodes))
    edges = tuple(sorted((a, b) for a, b in sub.edges
                         if a in window_nodes and b in window_nodes))
    roots = tuple(sorted(r for r in sub.roots if r in window_nodes))
    vals = tuple(values[u] for u in nodes)
    return (nodes, edges, roots, vals, tuple(sorted(process)))


def _valued_slocal_run(alg, sub, window_nodes, values, process):
    """Sequential run over the valued window, in ascending value order.

    Only `process` members take a turn; the rest of the window is visible
    context without outputs. Every view is value-named, so the algorithm
    never observes the host's real identifiers.
    """
    stages = alg.stages() if isinstance(alg, ComposedSlocal) else [alg]
    order = sorted(process, key=lambda u: (values[u], u))
    n = len(window_nodes)
    acc = ()
    outs: dict = {}
    for stage in stages:
        t = resolve_locality(stage.locality, n)
        outs = {}
        states: dict = {}
        for u in order:
            dist = _restricted_ball(sub, window_nodes, u, t)
            view = _relabel_view(sub, dist, values, u, t)
            processed = {values[w]: (outs[w], states[w])
                         for w in dist if w in outs}
            prior = tuple({values[w]: stage_outs[w]
                           for w in dist if w in stage_outs}
                          for stage_outs in acc)
            out, st = stage.step(view, processed, prior, n)
            outs[u] = out
            states[u] = st
        acc = acc + (outs,)
    return outs


def slocal_speedup(alg, problem: LclProblem, window: int,
                   delta: int) -> ComposedSlocal:
    """Constant-locality rebuild of a sequential-greedy algorithm that is
    correct on all inputs with at most `window` nodes and ids up to
    window**2, over forests of maximum degree `delta`."""
    if delta < 2:
        raise TreesimError("need a degree bound of at least 2")
    alpha = 0
    while delta ** (4 * (alpha + 1) + 2) <= window:
        alpha += 1
    if alpha < 1:
        raise TreesimError("window too small for the degree bound")
    k = max(resolve_locality(alg.locality, window), problem.radius)
    # the whole construction leans on identifier-equal nodes never sharing
    # a radius-k view and on dependence chains never crossing a band in one
    # hop, so the window must dominate the locality comfortably
    if 6 * k > alpha - 1 or k + 1 > (alpha - 1) // 4:
        raise TreesimError(
            "window too small relative to the algorithm's locality",
            bundle={"locality": k, "alpha": alpha})
    blocks = _id_blocks(window)
    q1 = (alpha - 1) // 4
    q2 = (alpha - 1) // 3
    q3 = (alpha - 1) // 2

    def band_of(d):
        if d <= q1:
            return 1
        if d <= q2:
            return 2
        if d <= q3:
            return 3
        return 4

    def assign_step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        flags = prior[-1]
        if not flags[v]["leader"]:
            return {"ids": {}}, None
        leaders = _leaders_in(sub, flags)
        cluster, bottoms = _region_of(sub, leaders, v)
        region = {v} | set(cluster) | set(bottoms)
        pool = (region - _ball_set(sub, [v], k)) | _ball_set(sub, bottoms, k)
        dist = bfs_distances(sub, [v])
        bands = {1: [], 2: [], 3: [], 4: []}
        for u in pool:
            if dist[u] <= k:
                raise TreesimError("band partition starts inside the "
                                   "excluded core; window too small")
            # within the deep band, nodes hanging below the region come
            # after every region member: a simulation that covers this
            # region never feeds their outputs into its own answers
            halo = 0 if u in region else 1
            bands[band_of(dist[u])].append((halo, dist[u], u))
        ids = {}
        for b in (1, 2, 3, 4):
            lo, hi = blocks[b]
            ordered = sorted(bands[b])
            if lo + len(ordered) - 1 > hi:
                raise TreesimError("identifier band capacity exceeded",
                                   bundle={"band": b, "nodes": len(ordered)})
            for i, (_h, _d, u) in enumerate(ordered):
                ids[u] = lo + i
        if v in sub.roots:
            lo, hi = blocks[4]
            start = lo + len(bands[4])
            core = sorted(_ball_set(sub, [v], k))
            if start + len(core) - 1 > hi:
                raise TreesimError("identifier band capacity exceeded",
                                   bundle={"band": 4, "nodes": len(core)})
            for i, u in enumerate(core):
                ids[u] = start + i
        return {"ids": ids}, None

    regions: dict = {}

    def simulate_step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        flags = prior[-1 - 1]
        idmaps = prior[-1]
        leaders = _leaders_in(sub, flags)
        cap = 2 * alpha + 2
        v1 = v if v in sub.roots else _nearest_leader_up(sub, leaders, v, cap)
        if v1 is None:
            raise TreesimError(f"no leader above {v}; clustering broken")
        v2 = _nearest_leader_up(sub, leaders, v1, cap)
        cluster, bottoms = _region_of(sub, leaders, v1)
        closed = sorted({v1} | set(cluster) | set(bottoms))
        process = sorted(_ball_set(sub, closed, k))
        # the simulation window extends one more locality radius so that no
        # processed node ever works from a cut-off view
        window_nodes = _ball_set(sub, closed, 2 * k)
        values = {}
        for owner in [v2] + closed if v2 is not None else closed:
            if owner in leaders:
                for u, val in idmaps[owner]["ids"].items():
                    if u in window_nodes:
                        values[u] = val
        for u in window_nodes:
            if u not in values:
                raise TreesimError("identifier coverage hole",
                                   bundle={"node": u, "region": v1})
        memo = _region_signature(sub, window_nodes, values, process)
        if memo not in regions:
            regions[memo] = _valued_slocal_run(
                alg, sub, window_nodes, values, process)
        return regions[memo][v], None

    cluster = clustering_algorithm(alpha)
    parts = list(cluster.stages()) + [
        SlocalAlgorithm(name="assign-ids", step=assign_step,
                        locality=2 * alpha + k + 2),
        SlocalAlgorithm(name="simulate", step=simulate_step,
                        locality=4 * alpha + 2 * k + 4),
    ]
    return ComposedSlocal(name=f"{getattr(alg, 'name', 'alg')}@squashed",
                          parts=parts)


# -- sequential-greedy to message-passing ------------------------------------
#
# Distance coloring by iterated polynomial color reduction (ids are the
# initial colors; each round a node rewrites its color as an evaluation
# point plus value at which its polynomial differs from every power-graph
# neighbor), then the color classes are processed in ascending order, each
# class simultaneously: a distance-(2c+1) coloring keeps the c-balls of
# same-class nodes disjoint, so the sequential steps cannot see each other.


def _next_prime(x: int) -> int:
    x = max(2, x)
    while True:
        if all(x % p for p in range(2, int(math.isqrt(x)) + 1)):
            return x
        x += 1


def _linial_params(space: int, degree: int) -> tuple[int, int]:
    """Field size and polynomial degree for one reduction round from
    `space` colors against `degree` power-graph neighbors."""
    q = _next_prime(degree + 2)
    while True:
        d = 0
        while q ** (d + 1) < space:
            d += 1
        if q > d * degree:
            return q, d
        q = _next_prime(q + 1)


def linial_reduction_rounds(space: int, degree: int) -> int:
    """How many reduction rounds the color space takes to stop shrinking."""
    rounds = 0
    while True:
        q, _d = _linial_params(space, degree)
        if q * q >= space:
            return rounds
        space = q * q
        rounds += 1


def _digits(x: int, q: int, width: int) -> list:
    out = []
    for _ in range(width):
        out.append(x % q)
        x //= q
    return out


def _poly_eval(coeffs, a: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * a + c) % q
    return acc


def linial_distance_coloring(g: LabeledGraph, k: int,
                             space: Optional[int] = None,
                             degree: Optional[int] = None) -> tuple[dict, int]:
    """Deterministic distance-k coloring from ids; returns (colors, rounds).

    Two nodes within distance k always end with different colors; the final
    palette size depends on the power-graph degree, not on n. Callers that
    run the reduction over many partial views of one host must pin `space`
    and `degree` globally, otherwise the per-view parameters drift and the
    same node can end up with different colors in different views.
    """
    neigh = {v: sorted(_ball_set(g, [v], k) - {v}) for v in g.nodes()}
    if degree is None:
        degree = max((len(a) for a in neigh.values()), default=0)
    colors = {v: v for v in g.nodes()}
    if space is None:
        space = max(colors.values(), default=1) + 1
    rounds = 0
    while True:
        q, d = _linial_params(space, degree)
        if q * q >= space:
            return colors, rounds
        nxt = {}
        for v in g.nodes():
            mine = _digits(colors[v], q, d + 1)
            others = [_digits(colors[u], q, d + 1) for u in neigh[v]]
            for a in range(q):
                pv = _poly_eval(mine, a, q)
                if all(_poly_eval(o, a, q) != pv for o in others):
                    nxt[v] = a * q + pv
                    break
            else:
                raise TreesimError(f"no safe evaluation point at {v}; "
                                   "colors were not proper")
        colors = nxt
        space = q * q
        rounds += 1


def _palette_cap(space: int, degree: int) -> int:
    """Size of the color space the reduction loop stabilizes at."""
    while True:
        q, _d = _linial_params(space, degree)
        if q * q >= space:
            return space
        space = q * q


def _power_degree_bound(delta: int, k: int) -> int:
    if k == 0:
        return 0
    if delta <= 1:
        return 1
    if delta == 2:
        return 2 * k
    return delta * ((delta - 1) ** k - 1) // (delta - 2) + delta


def slocal_to_local(alg, problem: LclProblem) -> LocalAlgorithm:
    """Message-passing rebuild of a constant-locality sequential-greedy
    algorithm; the round count inherits the color reduction's growth."""
    c = alg.locality if not callable(alg.locality) else alg.locality(2 ** 20)
    c = int(c)
    if problem.delta is None:
        raise TreesimError("needs the problem's degree bound")
    if c == 0:
        def program0(view, n):
            return alg.step(view, {}, (), n)[0]
        return LocalAlgorithm(name=f"{getattr(alg, 'name', 'alg')}@local",
                              locality=0, program=program0, uses_ids=True,
                              uses_n=True)
    span = 2 * c + 1
    power_bound = _power_degree_bound(problem.delta, span)
    palette = _palette_cap  # alias to keep the closures short

    def degree_bound(n):
        # the span-power graph's degree: the walk bound, but never more
        # than the other n-1 nodes
        return max(1, min(power_bound, n - 1))

    def horizon(n):
        space = (n * n) + 1
        deg = degree_bound(n)
        rounds = linial_reduction_rounds(space, deg)
        return rounds * span + (palette(space, deg) + 1) * c

    stages = alg.stages() if isinstance(alg, ComposedSlocal) else [alg]

    def program(view, n):
        sub = view.subgraph
        me = view.center
        space = (n * n) + 1
        deg = degree_bound(n)
        rounds = linial_reduction_rounds(space, deg)
        pal = palette(space, deg)
        t_list = [resolve_locality(s.locality, n) for s in stages]
        # nodes whose color survives the light cone of the reduction
        full = {u for u in sub.nodes()
                if len(sub.neighbors(u)) == view.full_degrees[u]}
        colors, _r = linial_distance_coloring(sub, span, space=space,
                                              degree=deg)
        valid = {}
        for u in sub.nodes():
            zone = _ball_set(sub, [u], rounds * span)
            if all(w in full or w == u and sub.n == n for w in zone):
                valid[u] = colors[u]
        # each stage must be globally faithful on the zone the next stage
        # reads, plus the dependence chains feeding that zone
        reach = [0] * len(stages)
        reach[-1] = pal * t_list[-1]
        for i in range(len(stages) - 2, -1, -1):
            reach[i] = reach[i + 1] + t_list[i + 1] + pal * t_list[i]
        acc = ()
        outs: dict = {}
        for i, stage in enumerate(stages):
            todo = sorted(_ball_set(sub, [me], reach[i]),
                          key=lambda u: (valid.get(u, 0), u))
            t = t_list[i]
            outs = {}
            states: dict = {}
            for u in todo:
                if u not in valid:
                    raise TreesimError("view horizon too small for the "
                                       "class simulation", bundle={"node": u})
                b = ball(sub, u, t)
                processed = {w: (outs[w], states[w])
                             for w in b.subgraph.nodes() if w in outs}
                prior = tuple({w: so[w] for w in b.subgraph.nodes()
                               if w in so}
                              for so in acc)
                out, st = stage.step(b, processed, prior, n)
                outs[u] = out
                states[u] = st
            acc = acc + (outs,)
        return outs[me]

    return LocalAlgorithm(name=f"{getattr(alg, 'name', 'alg')}@local",
                          locality=horizon, program=program, uses_ids=True,
                          uses_n=True)


# -- beating the adaptive adversary ------------------------------------------
#
# Over a tiny finite family, a randomized online algorithm that wins the
# adaptive game with positive probability certifies that some deterministic
# strategy wins it outright. The search enumerates strategy entries (one
# output per isomorphism class of game history) depth-first in label order
# and backtracks through the full game tree: adversary moves are universally
# quantified, entries are shared wherever two histories are isomorphic. The
# alternative mode fixes declared per-step coin bits greedily by exact
# conditional failure probabilities instead of searching output labels.


_FAMILY_CAP = 5


def _history_key(region: LabeledGraph, seq) -> str:
    key, _m = canonical_run_key(region, seq)
    return key


def derandomize_adaptive(alg: OnlineAlgorithm, family, problem: LclProblem,
                         mode: str = "search",
                         bits_per_node: int = 1) -> OnlineAlgorithm:
    """Deterministic replacement for `alg` that survives every adaptive
    processing order on every family member; raises with a refutation
    certificate when no such strategy exists."""
    if not alg.randomized:
        return alg
    members = list(family)
    for g in members:
        if g.n > _FAMILY_CAP:
            raise TreesimError(f"family members are capped at {_FAMILY_CAP} "
                               "nodes")
    if mode == "conditional":
        return _derand_conditional(alg, members, problem, bits_per_node)
    if mode != "search":
        raise TreesimError(f"unknown mode {mode!r}")
    sigma = list(problem.sigma_out)
    strategy: dict[str, object] = {}
    tried = [0]
    failure = [None]

    def outputs_along(g, t, seq):
        outs = {}
        for i in range(1, len(seq) + 1):
            region = _replay_region(g, seq[:i], t)
            outs[seq[i - 1]] = strategy[_history_key(region, seq[:i])]
        return outs

    def solve(pending) -> bool:
        if not pending:
            return True
        g, t, seq = pending[0]
        key = _history_key(_replay_region(g, seq, t), seq)
        if key not in strategy:
            for lab in sigma:
                strategy[key] = lab
                tried[0] += 1
                if solve(pending):
                    return True
                del strategy[key]
            return False
        rest = pending[1:]
        if len(seq) == g.n:
            outs = outputs_along(g, t, seq)
            if verify(problem, g, outs):
                failure[0] = {"graph": g.to_json_dict(), "order": list(seq),
                              "outputs": {str(v): outs[v] for v in outs}}
                return False
            return solve(rest)
        moves = [(g, t, seq + (v,))
                 for v in sorted(set(g.nodes()) - set(seq))]
        return solve(moves + rest)

    starts = [(g, resolve_locality(alg.locality, g.n), ()) for g in members]
    opening = [(g, t, (v,)) for g, t, _ in starts for v in sorted(g.nodes())]
    if not solve(opening):
        raise TreesimError(
            "no deterministic strategy survives the adaptive game",
            bundle={"refuted": True, "assignments_tried": tried[0],
                    "example_failure": failure[0]})
    frozen = dict(strategy)

    def step(memory, revealed, v, rng, prior):
        seq = (memory or ()) + (v,)
        region = _induced_like(revealed, revealed.nodes())
        key = _history_key(region, seq)
        if key not in frozen:
            raise TreesimError("history outside the derandomized family",
                               bundle={"node": v})
        return frozen[key], seq

    return OnlineAlgorithm(name=f"{alg.name}#adaptive-fixed",
                           locality=alg.locality, step=step,
                           init=(lambda _n: ()), randomized=False)


def _derand_conditional(alg, members, problem, bits_per_node):
    """Fix per-step coins one history class at a time, choosing the value
    whose worst-case adaptive failure probability (future coins uniform) is
    smallest; exact arithmetic via Fraction."""
    from fractions import Fraction

    fixed: dict[str, tuple] = {}
    patterns = list(itertools.product((0, 1), repeat=bits_per_node))

    def run_prefix(g, t, seq, bits_list):
        """Outputs and final memory when the prefix consumes bits_list."""
        revealed = RevealedGraph(directed=getattr(g, "directed", False),
                                 doubled=getattr(g, "doubled", False))
        memory = alg.init(g.n if alg.uses_n else None) if alg.init else None
        outs = {}
        for v, bits in zip(seq, bits_list):
            reveal_ball(g, revealed, v, t)
            out, memory = alg.step(memory, revealed, v, _FixedBits(bits), ())
            outs[v] = out
        return outs

    def key_of(g, t, seq):
        return _history_key(_replay_region(g, seq, t), seq)

    def fail_prob(g, t, seq, bits_list) -> Fraction:
        if len(seq) == g.n:
            # a play on which the algorithm gives up counts as lost, the
            # same as one that verifies badly
            try:
                outs = run_prefix(g, t, seq, bits_list)
            except TreesimError:
                return Fraction(1)
            return Fraction(1 if verify(problem, g, outs) else 0)
        worst = Fraction(0)
        for v in sorted(set(g.nodes()) - set(seq)):
            nxt = seq + (v,)
            key = key_of(g, t, nxt)
            if key in fixed:
                got = fail_prob(g, t, nxt, bits_list + [fixed[key]])
            else:
                got = sum(fail_prob(g, t, nxt, bits_list + [list(p)])
                          for p in patterns) / len(patterns)
            worst = max(worst, got)
        return worst

    # fix histories breadth-first by reachability so every prefix is
    # already deterministic when its extensions are evaluated
    frontier = [(g, resolve_locality(alg.locality, g.n), ()) for g in members]
    while frontier:
        nxt_frontier = []
        for g, t, seq in frontier:
            if len(seq) == g.n:
                continue
            for v in sorted(set(g.nodes()) - set(seq)):
                nxt = seq + (v,)
                key = key_of(g, t, nxt)
                if key not in fixed:
                    bits_list = [fixed[key_of(g, t, nxt[:i + 1])]
                                 for i in range(len(seq))]
                    best = min(patterns,
                               key=lambda p: fail_prob(g, t, nxt,
                                                       bits_list + [list(p)]))
                    fixed[key] = list(best)
                nxt_frontier.append((g, t, nxt))
        frontier = nxt_frontier
    for g in members:
        t = resolve_locality(alg.locality, g.n)
        if fail_prob(g, t, (), []) != 0:
            raise TreesimError(
                "conditional fixing still loses some adaptive play; "
                "the success hypothesis fails",
                bundle={"refuted": True})
    frozen = dict(fixed)

    def step(memory, revealed, v, rng, prior):
        inner, seq = memory
        seq = seq + (v,)
        region = _induced_like(revealed, revealed.nodes())
        key = _history_key(region, seq)
        if key not in frozen:
            raise TreesimError("history outside the derandomized family",
                               bundle={"node": v})
        out, inner = alg.step(inner, revealed, v, _FixedBits(frozen[key]),
                              prior)
        return out, (inner, seq)

    def init(n_arg):
        return (alg.init(n_arg) if alg.init else None, ())

    return OnlineAlgorithm(name=f"{alg.name}#conditional-fixed",
                           locality=alg.locality, step=step, init=init,
                           uses_n=alg.uses_n, randomized=False)


# -- stock algorithms --------------------------------------------------------


@register("greedy-color-online")
def _greedy_color_online(colors=3):
    def step(memory, revealed, v, rng, prior):
        used = {memory.get(u) for u in revealed.neighbors(v)}
        for c in range(1, colors + 1):
            if c not in used:
                memory[v] = c
                return c, memory
        raise TreesimError(f"ran out of {colors} colors at {v}")

    return OnlineAlgorithm(name=f"greedy-color-online({colors})", locality=1,
                           step=step, init=lambda _n: {})


@register("coin-color-online")
def _coin_color_online(colors=2):
    def step(memory, revealed, v, rng, prior):
        bit = rng.getrandbits(1) if rng is not None else 0
        prefs = list(range(1, colors + 1))
        if bit:
            prefs.reverse()
        used = {memory.get(u) for u in revealed.neighbors(v)}
        for c in prefs:
            if c not in used:
                memory[v] = c
                return c, memory
        raise TreesimError(f"ran out of {colors} colors at {v}")

    return OnlineAlgorithm(name=f"coin-color-online({colors})", locality=1,
                           step=step, init=lambda _n: {}, randomized=True)


@register("greedy-color-slocal")
def _greedy_color_slocal(colors=3):
    def step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        used = {out for u, (out, _st) in processed.items()
                if sub.has_edge(v, u) or sub.has_edge(u, v)}
        for c in range(1, colors + 1):
            if c not in used:
                return c, None
        raise TreesimError(f"ran out of {colors} colors at {v}")

    return SlocalAlgorithm(name=f"greedy-color-slocal({colors})", locality=1,
                           step=step)


@register("id-hint-color-slocal")
def _id_hint_color_slocal(colors=3):
    """Greedy coloring whose preference order is spun by the ids within
    distance 2; exercises identifier reassignment in the speedup."""
    def step(view, processed, prior, n):
        sub = view.subgraph
        v = view.center
        spin = sum(1 for u in _ball_set(sub, [v], 2) if u < v) % colors
        prefs = [(spin + i) % colors + 1 for i in range(colors)]
        used = {out for u, (out, _st) in processed.items()
                if sub.has_edge(v, u) or sub.has_edge(u, v)}
        for c in prefs:
            if c not in used:
                return c, None
        raise TreesimError(f"ran out of {colors} colors at {v}")

    return SlocalAlgorithm(name=f"id-hint-color-slocal({colors})",
                           locality=2, step=step)

