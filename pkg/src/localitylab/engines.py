"""Execution engines: synchronous message passing, sequential-greedy, and
online processing with global memory.

Node programs only ever receive the view an honest run would grant them:
message-passing programs get the light-cone view (edges incident to the
interior), sequential programs get the induced ball plus the states of
already-processed nodes inside it, online programs get the growing union
of revealed balls and nothing else.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .graphcore import (CenteredBall, GraphError, LabeledGraph, ball,
                        bfs_distances, joint_view)


class EngineError(RuntimeError):
    pass


def derive_seed(seed, *parts) -> str:
    return "/".join([str(seed)] + [str(p) for p in parts])


def node_rng(seed, v) -> random.Random:
    """Independent per-node randomness stream, stable across platforms."""
    return random.Random(derive_seed(seed, "node", v))


def resolve_locality(locality, n: int) -> int:
    t = locality(n) if callable(locality) else locality
    if t < 0:
        raise EngineError("locality must be >= 0")
    return int(t)


# -- algorithm containers -------------------------------------------------


@dataclass
class LocalAlgorithm:
    """T-round message passing, given extensionally (program on the view)
    or as synchronous rounds (init/round/output on per-node states).

    program(view, n) must depend only on the view; n is None unless
    uses_n. Round-style programs see neighbor states in port order when
    ports exist, else in ascending-id order (only sound if uses_ids).
    """
    name: str
    locality: object  # int or callable n -> int
    program: Optional[Callable[[CenteredBall, Optional[int]], object]] = None
    uses_ids: bool = True
    uses_n: bool = False
    uses_ports: bool = False
    init_fn: Optional[Callable] = None
    round_fn: Optional[Callable] = None
    output_fn: Optional[Callable] = None
    rounds: Optional[int] = None
    coin_bits: int = 0  # per-node fair coins consumed by randomized programs

    def is_round_style(self) -> bool:
        return self.round_fn is not None


@dataclass
class SlocalAlgorithm:
    """Sequential-greedy: nodes processed in an adversarial order; each
    step sees its induced radius-T ball, the (output, state) of processed
    nodes inside it, and outputs of any earlier pipeline stages."""
    name: str
    locality: object
    step: Callable = None  # step(view, processed, prior, n) -> (output, state)

    def stages(self):
        return [self]


@dataclass
class ComposedSlocal:
    """Pipeline of sequential-greedy stages; locality adds up."""
    name: str
    parts: list

    @property
    def locality(self):
        def total(n):
            return sum(resolve_locality(p.locality, n) for p in self.parts)
        return total

    def stages(self):
        out = []
        for p in self.parts:
            out.extend(p.stages())
        return out


def compose_slocal(a, b) -> ComposedSlocal:
    return ComposedSlocal(f"{a.name}+{b.name}", [a, b])


@dataclass
class OnlineAlgorithm:
    """Online processing with unbounded global memory.

    step(memory, revealed, v, rng, prior) -> (output, memory); `revealed`
    is the induced union of all balls revealed so far, and the only graph
    the program can inspect. rng is None for deterministic runs.
    """
    name: str
    locality: object
    step: Callable = None
    init: Optional[Callable] = None  # init(node_count) -> memory
    uses_n: bool = False
    randomized: bool = False


@dataclass
class NodeView:
    """What a round-style program knows about one node."""
    node: int
    label: str
    degree: int
    ports: Optional[list] = None
    value: object = None  # per-node input handed to the round program


@dataclass
class Transcript:
    model: str
    algorithm: str
    locality: int
    seed: object
    order: list
    steps: list  # per step: {node, output, new_nodes, new_edges}

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "algorithm": self.algorithm,
            "locality": self.locality,
            "seed": self.seed,
            "order": list(self.order),
            "steps": [
                {"node": s["node"], "output": s["output"],
                 "new_nodes": list(s["new_nodes"]),
                 "new_edges": [list(e) for e in s["new_edges"]]}
                for s in self.steps
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


# -- LOCAL ----------------------------------------------------------------


def _anonymize_view(view: CenteredBall) -> CenteredBall:
    """Replace ids by 1..m in (distance, id) order. Best-effort hygiene for
    programs declaring uses_ids=False; refusal checks live at call sites."""
    order = sorted(view.subgraph.nodes(), key=lambda v: (view.distances.get(v, 0), v))
    remap = {v: i + 1 for i, v in enumerate(order)}
    sub = view.subgraph
    g = LabeledGraph({remap[v]: sub.labels[v] for v in sub.nodes()},
                     [(remap[u], remap[w]) for u, w in sub.edges],
                     directed=sub.directed,
                     roots=[remap[r] for r in sub.roots],
                     doubled=sub.doubled, check_id_range=False)
    ports = None
    if view.port_map is not None:
        ports = {remap[v]: {remap[w]: p for w, p in d.items()}
                 for v, d in view.port_map.items()}
    degs = {remap[v]: d for v, d in (view.full_degrees or {}).items()}
    dists = {remap[v]: d for v, d in view.distances.items()}
    return CenteredBall(g, remap[view.center], view.radius,
                        port_map=ports, full_degrees=degs, distances=dists)


def communication_view(g, v: int, t: int) -> CenteredBall:
    """Light-cone centered view: what v can learn in t rounds."""
    jv = joint_view(g, [v], t)
    port_map = None
    if getattr(g, "ports", None) is not None:
        port_map = {}
        for u in jv.subgraph.nodes():
            port_map[u] = {w: i + 1 for i, w in enumerate(g.ports[u])
                           if w in jv.subgraph.labels and
                           (jv.subgraph.has_edge(u, w) or jv.subgraph.has_edge(w, u))}
    degs = {u: g.degree(u) for u in jv.subgraph.nodes()}
    return CenteredBall(jv.subgraph, v, t, port_map=port_map,
                        full_degrees=degs, distances=jv.distances)


def _neighbor_order(g, v: int, uses_ids: bool):
    if getattr(g, "ports", None) is not None:
        return list(g.ports[v])
    if not uses_ids:
        raise EngineError(
            "round-style program without ports needs uses_ids to order neighbors")
    return sorted(g.neighbors(v))


def _edge_direction(g, v: int, w: int) -> str:
    """How the edge between v and w is oriented, seen from v."""
    if not g.directed:
        return "adj"
    fwd = w in g.out_neighbors(v)
    back = w in g.in_neighbors(v)
    if fwd and back:
        return "both"
    return "out" if fwd else "in"


def run_local_rounds(alg: LocalAlgorithm, g, seed=None, inputs=None) -> dict:
    """Synchronous lockstep simulation of a round-style program.

    Each round a node sees its own state plus a list of
    (direction, neighbor_state) pairs, direction being "adj" on
    undirected graphs and "out"/"in"/"both" relative to the node
    otherwise.  `inputs` optionally hands node v the value inputs[v]
    through view.value.
    """
    n = g.n
    views = {}
    for v in g.nodes():
        ports = list(g.ports[v]) if getattr(g, "ports", None) is not None else None
        val = inputs.get(v) if inputs is not None else None
        views[v] = NodeView(v if alg.uses_ids else 0, g.labels[v], g.degree(v),
                            ports, val)
    rngs = {v: node_rng(seed, v) for v in g.nodes()} if seed is not None else {}
    state = {}
    for v in g.nodes():
        if alg.init_fn is None:
            state[v] = None
        else:
            state[v] = alg.init_fn(views[v], n if alg.uses_n else None,
                                   rngs.get(v))
    order = {v: _neighbor_order(g, v, alg.uses_ids) for v in g.nodes()}
    dirs = {v: [_edge_direction(g, v, w) for w in order[v]] for v in g.nodes()}
    for _ in range(alg.rounds):
        nxt = {}
        for v in g.nodes():
            incoming = list(zip(dirs[v], (state[w] for w in order[v])))
            nxt[v] = alg.round_fn(views[v], state[v], incoming)
        state = nxt
    out = {}
    for v in g.nodes():
        out[v] = alg.output_fn(views[v], state[v]) if alg.output_fn else state[v]
    return out


def run_local(alg: LocalAlgorithm, g, seed=None, inputs=None) -> dict:
    """Outputs of a LOCAL algorithm on every node of g."""
    if alg.uses_ports and getattr(g, "ports", None) is None:
        raise EngineError(f"algorithm '{alg.name}' needs port numbers")
    if alg.is_round_style():
        return run_local_rounds(alg, g, seed=seed, inputs=inputs)
    if inputs is not None:
        raise EngineError("per-node inputs only make sense for round-style programs")
    n = g.n
    t = resolve_locality(alg.locality, n)
    out = {}
    for v in g.nodes():
        view = communication_view(g, v, t)
        if not alg.uses_ids:
            view = _anonymize_view(view)
        rng = node_rng(seed, v) if seed is not None else None
        if alg.coin_bits and rng is None:
            raise EngineError(f"algorithm '{alg.name}' is randomized, pass a seed")
        args = [view, n if alg.uses_n else None]
        if alg.coin_bits:
            args.append(tuple(rng.getrandbits(1) for _ in range(alg.coin_bits)))
        out[v] = alg.program(*args)
    return out


# -- SLOCAL ---------------------------------------------------------------


def slocal_view(g, v: int, t: int) -> CenteredBall:
    return ball(g, v, t)


def run_slocal(alg, g, order, prior: tuple = ()) -> tuple[dict, dict]:
    """Process `order` sequentially; returns (outputs, states).

    For composed pipelines each stage runs to completion under the same
    order, later stages seeing earlier outputs via `prior`.
    """
    order = list(order)
    if sorted(order) != sorted(g.nodes()):
        raise EngineError("order must be a permutation of the node set")
    stages = alg.stages()
    if len(stages) > 1:
        outputs = None
        states = None
        acc = tuple(prior)
        for stage in stages:
            outputs, states = run_slocal(stage, g, order, prior=acc)
            acc = acc + (outputs,)
        return outputs, states
    n = g.n
    t = resolve_locality(alg.locality, n)
    outputs: dict = {}
    states: dict = {}
    for v in order:
        view = ball(g, v, t)
        processed = {u: (outputs[u], states[u])
                     for u in view.subgraph.nodes() if u in outputs}
        out, st = alg.step(view, processed, tuple(prior), n)
        outputs[v] = out
        states[v] = st
    return outputs, states


# -- ONLINE ---------------------------------------------------------------


class RevealedGraph:
    """Induced union of revealed balls; grows monotonically.

    Exposes the same read surface a LabeledGraph does. Reads outside the
    revealed region raise, which is the engine's access trap.
    """

    def __init__(self, directed=False, doubled=False):
        self.directed = directed
        self.doubled = doubled
        self.labels: dict[int, str] = {}
        self._adj: dict[int, list[int]] = {}
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        self.edges: list = []
        self.roots: list = []
        self.ports = None

    @property
    def n(self) -> int:
        return len(self.labels)

    def nodes(self):
        return list(self.labels)

    def has_node(self, v):
        return v in self.labels

    def neighbors(self, v):
        if v not in self.labels:
            raise EngineError(f"access to unrevealed node {v}")
        return self._adj[v]

    def out_neighbors(self, v):
        if v not in self.labels:
            raise EngineError(f"access to unrevealed node {v}")
        return self._out[v]

    def in_neighbors(self, v):
        if v not in self.labels:
            raise EngineError(f"access to unrevealed node {v}")
        return self._in[v]

    def degree(self, v):
        return len(self._adj[v]) if not self.directed else len(self._out[v]) + len(self._in[v])

    def has_edge(self, u, v):
        if self.directed:
            return v in self._out.get(u, ())
        return v in self._adj.get(u, ())

    def max_degree(self):
        return max((len(self._adj[v]) for v in self.labels), default=0)

    def _add_node(self, v, label, is_root):
        self.labels[v] = label
        self._adj[v] = []
        self._out[v] = []
        self._in[v] = []
        if is_root:
            self.roots.append(v)

    def _add_edge(self, u, v):
        key = (u, v) if self.directed else (min(u, v), max(u, v))
        self.edges.append(key)
        self._adj[u].append(v)
        self._adj[v].append(u)
        if self.directed:
            self._out[u].append(v)
            self._in[v].append(u)

    def snapshot(self) -> LabeledGraph:
        return LabeledGraph(dict(self.labels), list(self.edges),
                            directed=self.directed, doubled=self.doubled,
                            roots=list(self.roots), check_id_range=False)


def reveal_ball(host, revealed: RevealedGraph, v: int, t: int):
    """Add N_t(v) (computed in the host) and induced edges to `revealed`.

    Returns (new_nodes, new_edges) sorted, for transcripts.
    """
    dist = bfs_distances(host, [v], limit=t)
    host_roots = getattr(host, "roots", [])
    new_nodes = sorted(u for u in dist if u not in revealed.labels)
    new_edges = []
    for u in new_nodes:
        revealed._add_node(u, host.labels[u], u in host_roots)
    for u in new_nodes:
        if getattr(host, "directed", False):
            for w in host.out_neighbors(u):
                if w in revealed.labels:
                    revealed._add_edge(u, w)
                    new_edges.append((u, w))
            for w in host.in_neighbors(u):
                if w in revealed.labels and w not in new_nodes:
                    revealed._add_edge(w, u)
                    new_edges.append((w, u))
        else:
            for w in host.neighbors(u):
                if w in revealed.labels and (w not in new_nodes or w > u):
                    revealed._add_edge(u, w)
                    new_edges.append((min(u, w), max(u, w)))
    return new_nodes, sorted(new_edges)


def run_online(alg: OnlineAlgorithm, g, order, seed=None,
               keep_transcript: bool = True, prior: tuple = ()):
    """Oblivious online run: the whole order is fixed before the run.

    Returns (outputs, transcript). The program sees only the growing
    revealed union; its per-node randomness comes from (seed, node id).
    """
    order = list(order)
    if len(set(order)) != len(order):
        raise EngineError("order contains repeats")
    for v in order:
        if not host_has_node(g, v):
            raise EngineError(f"order names unknown node {v}")
    n = g.n
    t = resolve_locality(alg.locality, n)
    if alg.randomized and seed is None:
        raise EngineError(f"algorithm '{alg.name}' is randomized, pass a seed")
    revealed = RevealedGraph(directed=getattr(g, "directed", False),
                             doubled=getattr(g, "doubled", False))
    memory = alg.init(n if alg.uses_n else None) if alg.init else None
    outputs: dict = {}
    steps = []
    for v in order:
        new_nodes, new_edges = reveal_ball(g, revealed, v, t)
        rng = node_rng(seed, v) if (seed is not None and alg.randomized) else None
        out, memory = alg.step(memory, revealed, v, rng, tuple(prior))
        outputs[v] = out
        if keep_transcript:
            steps.append({"node": v, "output": out,
                          "new_nodes": new_nodes, "new_edges": new_edges})
    tr = Transcript("online", alg.name, t, seed, order, steps) if keep_transcript else None
    return outputs, tr


def host_has_node(g, v) -> bool:
    if hasattr(g, "has_node"):
        return g.has_node(v)
    return v in g.labels


def run_online_adaptive(alg: OnlineAlgorithm, g, adversary, seed=None,
                        allow_adaptive: bool = True):
    """Adversary picks the next node per step. Adaptive adversaries see
    committed outputs; contexts that require obliviousness must refuse
    this entry point (allow_adaptive=False raises)."""
    if not allow_adaptive:
        raise EngineError("this context requires an oblivious adversary")
    n = g.n
    t = resolve_locality(alg.locality, n)
    revealed = RevealedGraph(directed=getattr(g, "directed", False))
    memory = alg.init(n if alg.uses_n else None) if alg.init else None
    outputs: dict = {}
    steps = []
    remaining = set(g.nodes())
    while remaining:
        v = adversary(revealed, dict(outputs), sorted(remaining))
        if v is None:
            break
        if v not in remaining:
            raise EngineError(f"adversary picked processed/unknown node {v}")
        remaining.discard(v)
        new_nodes, new_edges = reveal_ball(g, revealed, v, t)
        rng = node_rng(seed, v) if (seed is not None and alg.randomized) else None
        out, memory = alg.step(memory, revealed, v, rng, ())
        outputs[v] = out
        steps.append({"node": v, "output": out,
                      "new_nodes": new_nodes, "new_edges": new_edges})
    return outputs, Transcript("online-adaptive", alg.name, t, seed,
                               [s["node"] for s in steps], steps)


def replay_transcript(alg: OnlineAlgorithm, g, tr: Transcript):
    """Re-run and demand an identical transcript; returns the outputs."""
    outputs, tr2 = run_online(alg, g, tr.order, seed=tr.seed)
    if tr2.to_json() != tr.to_json():
        raise EngineError("replay diverged from the recorded transcript")
    return outputs


# -- registry ---------------------------------------------------------------

REGISTRY: dict[str, Callable] = {}


def register(name: str):
    def deco(factory):
        if name in REGISTRY:
            raise EngineError(f"duplicate algorithm name '{name}'")
        REGISTRY[name] = factory
        return factory
    return deco


def get_algorithm(name: str, **params):
    if name not in REGISTRY:
        raise EngineError(f"unknown algorithm '{name}' (have: {sorted(REGISTRY)})")
    return REGISTRY[name](**params)
