"""Locally checkable labeling problems and their verifier.

A problem fixes input/output alphabets, a degree bound, a checking radius,
and a permissibility rule on centered balls. The verifier materializes the
radius-r ball of every node and asks the rule; a complete labeling is
correct exactly when the violation list is empty.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from .graphcore import (CenteredBall, GraphError, LabeledGraph, ball,
                        isomorphic)

Labeling = dict  # node id -> output symbol, possibly partial


class LclError(ValueError):
    pass


@dataclass
class LclProblem:
    name: str
    sigma_in: list
    sigma_out: list
    radius: int
    permissible: Callable[[CenteredBall, Labeling], bool]
    delta: Optional[int] = None          # max degree the problem is defined for
    needs_ports: bool = False
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "sigma_in": list(self.sigma_in),
            "sigma_out": list(self.sigma_out),
            "radius": self.radius,
            "delta": self.delta,
            "params": dict(self.params),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class Violation:
    center: int
    radius: int
    reason: str
    ball_nodes: list[int]
    ball_edges: list[tuple[int, int]]

    def to_json_dict(self) -> dict:
        return {
            "center": self.center,
            "radius": self.radius,
            "reason": self.reason,
            "ball": {"nodes": list(self.ball_nodes),
                     "edges": [list(e) for e in self.ball_edges]},
        }


def verify(problem: LclProblem, g: LabeledGraph, out: Labeling) -> list[Violation]:
    """All violations of `problem` by `out` on `g`, one ball per center."""
    if problem.delta is not None and g.max_degree() > problem.delta:
        raise LclError(
            f"graph has max degree {g.max_degree()}, problem allows {problem.delta}")
    if problem.needs_ports and g.ports is None:
        raise LclError(f"problem '{problem.name}' needs port numbers on the graph")
    for v in g.nodes():
        if g.labels[v] not in problem.sigma_in:
            raise LclError(f"input label {g.labels[v]!r} at {v} not in the input alphabet")
    violations = []
    for v in g.nodes():
        b = ball(g, v, problem.radius)
        reason = None
        if v not in out:
            reason = "missing output"
        else:
            try:
                ok = problem.permissible(b, out)
            except KeyError:
                ok = False
            if not ok:
                reason = "ball not permissible"
        if reason:
            violations.append(Violation(v, problem.radius, reason,
                                        sorted(b.subgraph.nodes()),
                                        list(b.subgraph.edges)))
    return violations


# -- builtin problems -----------------------------------------------------


def q_coloring(q: int, delta: Optional[int] = None) -> LclProblem:
    """Proper vertex coloring with colors 1..q, checked at radius 1."""
    colors = list(range(1, q + 1))

    def ok(b: CenteredBall, out: Labeling) -> bool:
        c = out.get(b.center)
        if c not in colors:
            return False
        return all(out.get(w) != c for w in b.subgraph.neighbors(b.center))

    return LclProblem(f"{q}_coloring", [""], colors, 1, ok, delta=delta,
                      params={"q": q})


def distance_coloring(k: int, q: int, delta: Optional[int] = None) -> LclProblem:
    """Colors 1..q where nodes within hop distance k must differ."""
    colors = list(range(1, q + 1))

    def ok(b: CenteredBall, out: Labeling) -> bool:
        c = out.get(b.center)
        if c not in colors:
            return False
        for w, d in b.distances.items():
            if 1 <= d <= k and out.get(w) == c:
                return False
        return True

    return LclProblem(f"distance_{k}_{q}_coloring", [""], colors, k, ok,
                      delta=delta, params={"k": k, "q": q})


def maximal_independent_set(delta: Optional[int] = None) -> LclProblem:
    """1 = in the set. No two adjacent 1s; every 0 has a 1 neighbor."""

    def ok(b: CenteredBall, out: Labeling) -> bool:
        c = out.get(b.center)
        if c not in (0, 1):
            return False
        nbrs = b.subgraph.neighbors(b.center)
        if c == 1:
            return all(out.get(w) != 1 for w in nbrs)
        return any(out.get(w) == 1 for w in nbrs)

    return LclProblem("maximal_independent_set", [""], [0, 1], 1, ok, delta=delta)


def maximal_matching(delta: Optional[int] = None) -> LclProblem:
    """Port-encoded matching: a node outputs the port of its matched edge
    (0 = unmatched). Matches must be mutual; no edge may join two
    unmatched nodes."""

    def ok(b: CenteredBall, out: Labeling) -> bool:
        c = b.center
        p = out.get(c)
        deg = b.full_degrees[c]
        if not isinstance(p, int) or p < 0 or p > deg:
            return False
        if p > 0:
            # the matched edge must be visible and reciprocated
            partner = None
            for w, port in (b.port_map.get(c) or {}).items():
                if port == p:
                    partner = w
            if partner is None:
                return False
            return out.get(partner) == b.port_map[partner][c]
        return all(out.get(w, 0) != 0 for w in b.subgraph.neighbors(c))

    return LclProblem("maximal_matching", [""], ["port"], 1, ok, delta=delta,
                      needs_ports=True)


def edge_grabbing_toy(delta: Optional[int] = None) -> LclProblem:
    """Every non-isolated node names one incident port; isolated nodes
    output 0. Checkable at radius 0 given true degrees."""

    def ok(b: CenteredBall, out: Labeling) -> bool:
        c = out.get(b.center)
        deg = b.full_degrees[b.center]
        if deg == 0:
            return c == 0
        return isinstance(c, int) and 1 <= c <= deg

    return LclProblem("edge_grabbing_toy", [""], ["port"], 0, ok, delta=delta)


BUILTIN_PROBLEMS = {
    "q_coloring": q_coloring,
    "distance_coloring": distance_coloring,
    "maximal_independent_set": maximal_independent_set,
    "maximal_matching": maximal_matching,
    "edge_grabbing_toy": edge_grabbing_toy,
}


def problem_from_name(name: str, params: Optional[dict] = None) -> LclProblem:
    if name not in BUILTIN_PROBLEMS:
        raise LclError(f"unknown problem '{name}'")
    return BUILTIN_PROBLEMS[name](**(params or {}))


def problem_from_json(s: str) -> LclProblem:
    d = json.loads(s)
    base = d["name"]
    for key, ctor in BUILTIN_PROBLEMS.items():
        try:
            candidate = ctor(**d.get("params", {}))
        except TypeError:
            continue
        if candidate.name == base:
            return candidate
    raise LclError(f"cannot reconstruct problem '{base}' from JSON")


# -- explicit permissible sets -------------------------------------------

MATERIALIZE_CAP = 4


def _ball_shapes(num_nodes: int):
    """All graphs on nodes 1..num_nodes (node 1 = center), as edge sets."""
    pairs = list(itertools.combinations(range(1, num_nodes + 1), 2))
    for bits in range(1 << len(pairs)):
        yield [pairs[i] for i in range(len(pairs)) if bits >> i & 1]


def materialize_permissible(problem: LclProblem, max_nodes: int = MATERIALIZE_CAP,
                            sigma_out: Optional[list] = None) -> list[dict]:
    """Enumerate accepted centered balls up to `max_nodes` nodes.

    Exponential in max_nodes; the cap guards against runaway calls.
    Returns JSON-able entries (nodes, edges, center, outputs).
    """
    if max_nodes > 6:
        raise LclError("materialization cap exceeded (max 6 nodes)")
    symbols = sigma_out if sigma_out is not None else problem.sigma_out
    accepted = []
    for n in range(1, max_nodes + 1):
        for edges in _ball_shapes(n):
            g = LabeledGraph(range(1, n + 1), edges)
            b = ball(g, 1, problem.radius)
            if set(b.subgraph.nodes()) != set(g.nodes()):
                continue  # not a radius-r ball around the center
            for combo in itertools.product(symbols, repeat=n):
                out = dict(zip(range(1, n + 1), combo))
                try:
                    if problem.permissible(b, out):
                        accepted.append({"nodes": list(range(1, n + 1)),
                                         "edges": [list(e) for e in edges],
                                         "center": 1,
                                         "outputs": list(combo)})
                except (KeyError, TypeError):
                    continue
    return accepted


def permissible_set_predicate(entries: list[dict]) -> Callable[[CenteredBall, Labeling], bool]:
    """Turn an explicit ball list into a permissibility predicate
    (matching up to label-preserving isomorphism with the center pinned)."""
    catalog = []
    for e in entries:
        nodes = {v: str(out) for v, out in zip(e["nodes"], e["outputs"])}
        catalog.append((LabeledGraph(nodes, [tuple(x) for x in e["edges"]],
                                     check_id_range=False), e["center"]))

    def ok(b: CenteredBall, out: Labeling) -> bool:
        try:
            labeled = LabeledGraph({v: str(out[v]) for v in b.subgraph.nodes()},
                                   b.subgraph.edges, check_id_range=False)
        except KeyError:
            return False
        for ref, center in catalog:
            if isomorphic(ref, labeled, "order-preserving",
                          seq_a=[center], seq_b=[b.center]) is not None:
                return True
        return False

    return ok
