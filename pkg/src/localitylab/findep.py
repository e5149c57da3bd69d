"""Bounded-dependence label processes on graphs.

A process here is a distribution over labelings of a fixed graph,
packaged with the radius k at which it claims independence: outputs on
two node sets farther than k apart are distributed as a product.  The
module provides

  * a greedy random-sequential coloring baseline with an exact law,
  * exact and statistical dependence checks,
  * decompositions that split a graph into out-degree-one pieces,
  * combinators that bolt port-numbering rounds on top of a process,
  * full coloring / MIS pipelines built from those parts.

Exact computations use integer weights over a common denominator so
that factorization checks are pure integer identities.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .graphcore import LabeledGraph, bfs_distances, power_graph
from .engines import LocalAlgorithm, derive_seed, run_local

__all__ = [
    "FindepError", "UnsolvableError", "VerificationError", "ProcessSampler",
    "exact_baseline_weights", "exact_baseline_distribution",
    "baseline_coloring", "weights_marginal",
    "distribution_from_weights", "check_k_dependence_exact",
    "DependenceReport", "test_k_dependence", "subgraph_invariance_probe",
    "DecompositionSample", "pseudoforest_arity", "bounded_degree_arity",
    "decompose_pseudoforest", "decompose_bounded_degree",
    "underlying_undirected", "compose_radius", "induce_process",
    "flatten_single_class", "flatten_rank", "apply_pn_rounds",
    "pseudoforest_3_radius", "color_pseudoforest_3",
    "delta_plus_1_radius", "color_delta_plus_1", "distance_k_coloring",
    "maximal_independent_set_process", "solve_lcl_findep",
]


class FindepError(Exception):
    pass


class UnsolvableError(FindepError):
    """Raised when no bounded-dependence route exists; carries evidence."""

    def __init__(self, message: str, bundle: dict):
        super().__init__(message)
        self.bundle = bundle


# -- process objects --------------------------------------------------------


@dataclass
class ProcessSampler:
    """A seeded distribution over labelings of `graph`.

    `radius` is the dependence radius the construction claims.  When the
    law is small enough to tabulate, `exact_fn` returns
    (node_order, weights, denom): weights maps each labeling row (tuple
    aligned with node_order) to an integer, and probabilities are
    weight/denom.
    """
    name: str
    graph: object
    alphabet: list
    radius: int
    sample_fn: Callable[[str], dict]
    exact_fn: Optional[Callable[[], tuple]] = None
    trace: list = field(default_factory=list)
    _exact_cache: Optional[tuple] = field(default=None, repr=False)

    def sample(self, seed: str) -> dict:
        return self.sample_fn(seed)

    @property
    def has_exact(self) -> bool:
        return self.exact_fn is not None

    def exact(self) -> tuple:
        if self.exact_fn is None:
            raise FindepError(f"process '{self.name}' has no exact law")
        if self._exact_cache is None:
            self._exact_cache = self.exact_fn()
        return self._exact_cache

    def exact_distribution(self) -> tuple:
        order, weights, denom = self.exact()
        return order, {row: Fraction(w, denom) for row, w in weights.items()}


# -- insertion-process baseline ----------------------------------------------
#
# Nodes arrive in a uniformly random order.  An arriving node is colored
# uniformly among the colors of 1..q not used by its nearest
# already-colored position in each direction around the cycle; the first
# two arrivals see q and q-1 free colors, later ones exactly q-2
# (consecutive colored positions always differ).  Path laws are windows
# of the law on a cycle extended by k extra positions, which keeps all
# window marginals consistent with one another.

EXACT_NODE_CAP = 8
BASELINE_RADII = {4: 1, 3: 2}


def _cycle_insertion_weights(m: int, q: int):
    """Exact law of the insertion coloring of an m-cycle.

    Returns (weights, denom): weights maps each color row (positions
    0..m-1 around the cycle) to the number of arrival histories that
    produce it; every history has probability 1/denom.
    """
    colors = range(1, q + 1)
    states = {(0,) * m: 1}
    for _ in range(m):
        nxt: dict = {}
        for row, cnt in states.items():
            for p in range(m):
                if row[p]:
                    continue
                excl = set()
                for d in range(1, m):
                    c = row[(p + d) % m]
                    if c:
                        excl.add(c)
                        break
                for d in range(1, m):
                    c = row[(p - d) % m]
                    if c:
                        excl.add(c)
                        break
                head, tail = row[:p], row[p + 1:]
                for c in colors:
                    if c not in excl:
                        key = head + (c,) + tail
                        nxt[key] = nxt.get(key, 0) + cnt
        states = nxt
    denom = math.factorial(m) * q * (q - 1) * (q - 2) ** max(0, m - 2)
    if sum(states.values()) != denom:
        raise FindepError("probability mass leaked in the exact recursion")
    return states, denom


def _component_layout(g, comp):
    """Classify a max-degree-2 component and order its nodes along it."""
    comp = sorted(comp)
    cs = set(comp)
    edges = sum(1 for u, v in g.edges if u in cs and v in cs)
    if len(comp) == 1:
        return "path", comp
    kind = "cycle" if edges == len(comp) else "path"
    if kind == "path":
        start = min(v for v in comp if len(g.neighbors(v)) <= 1)
    else:
        start = comp[0]
    seq = [start]
    prev = None
    while len(seq) < len(comp):
        nxt = min(w for w in g.neighbors(seq[-1]) if w != prev)
        prev = seq[-1]
        seq.append(nxt)
    return kind, seq


def _baseline_components(g, q: int):
    if q not in BASELINE_RADII:
        raise FindepError(f"no dependence radius known for q={q}")
    if g.max_degree() > 2:
        raise FindepError("baseline needs max degree <= 2")
    from .graphcore import connected_components
    k = BASELINE_RADII[q]
    out = []
    for comp in connected_components(g):
        kind, seq = _component_layout(g, comp)
        extra = 0 if kind == "cycle" else k
        out.append((kind, seq, len(seq) + extra))
    return out


def exact_baseline_weights(g, q: int):
    """Exact insertion-coloring law of a max-degree-2 graph.

    Components are independent; cycle components carry the m-cycle law,
    path components the matching window of the (m+k)-cycle law.  Returns
    (order, weights, denom) with integer weights.
    """
    if g.n > EXACT_NODE_CAP:
        raise FindepError(f"exact law capped at {EXACT_NODE_CAP} nodes, got {g.n}")
    order: list = []
    weights = {(): 1}
    denom = 1
    for kind, seq, m in _baseline_components(g, q):
        cw, cd = _cycle_insertion_weights(m, q)
        if len(seq) < m:
            window: dict = {}
            for row, cnt in cw.items():
                key = row[:len(seq)]
                window[key] = window.get(key, 0) + cnt
            cw = window
        merged: dict = {}
        for row, w in weights.items():
            for crow, cnt in cw.items():
                merged[row + crow] = w * cnt
        weights = merged
        denom *= cd
        order.extend(seq)
    return order, weights, denom


def exact_baseline_distribution(n: int, topology: str, q: int):
    """Exact law for a bare n-path or n-cycle, as (positions, rationals)."""
    if topology not in ("path", "cycle"):
        raise FindepError(f"unknown topology '{topology}'")
    if n > EXACT_NODE_CAP:
        raise FindepError(f"exact law capped at {EXACT_NODE_CAP} nodes, got {n}")
    k = BASELINE_RADII[q]
    m = n if topology == "cycle" else n + k
    cw, cd = _cycle_insertion_weights(m, q)
    dist: dict = {}
    for row, cnt in cw.items():
        key = row[:n]
        dist[key] = dist.get(key, Fraction(0)) + Fraction(cnt, cd)
    return list(range(n)), dist


def baseline_coloring(g, q: int) -> ProcessSampler:
    """Insertion-process q-coloring of a max-degree-2 graph.

    Dependence radius 1 for q=4 and 2 for q=3; other palettes carry no
    such guarantee and are refused.  The sampler realizes exactly the law
    of exact_baseline_weights: per component, positions (plus k virtual
    ones closing a path into a cycle) arrive by i.i.d. priorities and
    take uniform colors unused by their nearest colored positions.
    """
    comps = _baseline_components(g, q)
    colors = list(range(1, q + 1))

    def sample(seed: str) -> dict:
        out: dict = {}
        for kind, seq, m in comps:
            cid = seq[0]
            pri = []
            for j, v in enumerate(seq):
                r = random.Random(derive_seed(seed, "pri", v))
                pri.append((r.random(), j))
            for j in range(len(seq), m):
                r = random.Random(derive_seed(seed, "vpri", cid, j))
                pri.append((r.random(), j))
            row = [0] * m
            for _, p in sorted(pri):
                excl = set()
                for d in range(1, m):
                    c = row[(p + d) % m]
                    if c:
                        excl.add(c)
                        break
                for d in range(1, m):
                    c = row[(p - d) % m]
                    if c:
                        excl.add(c)
                        break
                free = [c for c in colors if c not in excl]
                src = (derive_seed(seed, "col", seq[p]) if p < len(seq)
                       else derive_seed(seed, "vcol", cid, p))
                row[p] = random.Random(src).choice(free)
            for j, v in enumerate(seq):
                out[v] = row[j]
        return out

    def exact():
        return exact_baseline_weights(g, q)

    return ProcessSampler(
        name=f"insertion_coloring_{q}", graph=g, alphabet=colors,
        radius=BASELINE_RADII[q], sample_fn=sample, exact_fn=exact,
        trace=[f"insertion process, q={q}, radius {BASELINE_RADII[q]}"])


# -- exact dependence checking ----------------------------------------------


def weights_marginal(order, weights, nodes):
    """Marginal weight table over `nodes` (keys follow the given sequence)."""
    pos = [order.index(v) for v in nodes]
    out: dict = {}
    for row, w in weights.items():
        key = tuple(row[p] for p in pos)
        out[key] = out.get(key, 0) + w
    return out


def distribution_from_weights(weights, denom):
    return {row: Fraction(w, denom) for row, w in weights.items()}


def _merge_rows(pos_a, pos_b, row_a, row_b):
    # interleave two marginal keys back into union-position order
    merged = []
    ia = ib = 0
    while ia < len(pos_a) or ib < len(pos_b):
        if ib >= len(pos_b) or (ia < len(pos_a) and pos_a[ia] < pos_b[ib]):
            merged.append(row_a[ia])
            ia += 1
        else:
            merged.append(row_b[ib])
            ib += 1
    return tuple(merged)


def check_k_dependence_exact(g, order, weights, denom, k: int,
                             max_violations: int = 10) -> dict:
    """Verify the product law for every pair of disjoint node sets at
    distance > k, by integer cross-multiplication on the exact table."""
    n = len(order)
    if n > 16:
        raise FindepError("exhaustive subset check capped at 16 nodes")
    idx = {v: i for i, v in enumerate(order)}
    full = (1 << n) - 1
    close = [0] * n
    for v in order:
        i = idx[v]
        for w, d in bfs_distances(g, [v]).items():
            if d <= k:
                close[i] |= 1 << idx[w]
    marg: dict = {}
    for mask in range(1, full + 1):
        pos = [i for i in range(n) if mask >> i & 1]
        table: dict = {}
        for row, w in weights.items():
            key = tuple(row[p] for p in pos)
            table[key] = table.get(key, 0) + w
        marg[mask] = (pos, table)
    far = [0] * (full + 1)
    for mask in range(1, full + 1):
        lo = mask & -mask
        far[mask] = far[mask ^ lo] if mask ^ lo else full
        far[mask] &= full ^ close[lo.bit_length() - 1]
    pairs = 0
    violations = []
    for a in range(1, full + 1):
        fm = far[a]
        b = fm
        while b:
            if b > a:
                pairs += 1
                pos_a, ta = marg[a]
                pos_b, tb = marg[b]
                _, tu = marg[a | b]
                for ra, wa in ta.items():
                    for rb, wb in tb.items():
                        joint = tu.get(_merge_rows(pos_a, pos_b, ra, rb), 0)
                        if joint * denom != wa * wb:
                            violations.append({
                                "set_a": [order[p] for p in pos_a],
                                "set_b": [order[p] for p in pos_b],
                                "values_a": list(ra), "values_b": list(rb),
                                "joint": str(Fraction(joint, denom)),
                                "product": str(Fraction(wa, denom) * Fraction(wb, denom)),
                            })
                            if len(violations) >= max_violations:
                                return {"ok": False, "pairs": pairs,
                                        "violations": violations}
            b = (b - 1) & fm
    return {"ok": not violations, "pairs": pairs, "violations": violations}


# -- statistical dependence checking ----------------------------------------


@dataclass
class DependenceReport:
    process: str
    radius: int
    mode: str
    trials: int
    alpha: float
    corrected_alpha: float
    pairs: list
    rejected: bool
    near_pairs: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "process": self.process, "radius": self.radius, "mode": self.mode,
            "trials": self.trials, "alpha": self.alpha,
            "corrected_alpha": self.corrected_alpha, "pairs": self.pairs,
            "rejected": self.rejected, "near_pairs": self.near_pairs,
        }

    def summary(self) -> str:
        verdict = "DEPENDENT" if self.rejected else "consistent"
        return (f"{self.process}: {len(self.pairs)} far pairs, "
                f"{self.trials} trials, {verdict} at alpha={self.alpha}")


def _pair_pvalue(xs, ys):
    """Chi-square independence p-value for two observed symbol sequences.
    Returns (p, flag); flag marks tables too degenerate to test."""
    from scipy.stats import chi2_contingency
    rows = sorted(set(xs))
    cols = sorted(set(ys))
    if len(rows) < 2 or len(cols) < 2:
        return None, "degenerate"
    table = [[0] * len(cols) for _ in rows]
    ri = {v: i for i, v in enumerate(rows)}
    ci = {v: i for i, v in enumerate(cols)}
    for x, y in zip(xs, ys):
        table[ri[x]][ci[y]] += 1
    res = chi2_contingency(table)
    return float(res[1]), "ok"


def test_k_dependence(sampler: ProcessSampler, trials: int = 400,
                      seed: str = "dep", alpha: float = 0.01,
                      max_pairs: int = 50, include_near: bool = False,
                      k: Optional[int] = None) -> DependenceReport:
    """Chi-square probe of the claimed dependence radius.

    Samples the process `trials` times, then tests independence of every
    (subsampled) node pair at distance > k with a Bonferroni-corrected
    chi-square.  `rejected` means some far pair shows dependence, i.e.
    evidence against the claim.  Near pairs can be probed too; those are
    reported without any verdict.
    """
    g = sampler.graph
    if k is None:
        k = sampler.radius
    nodes = sorted(g.nodes())
    dist = {v: bfs_distances(g, [v]) for v in nodes}

    def d(u, w):
        return dist[u].get(w, math.inf)

    far = [(u, w) for i, u in enumerate(nodes) for w in nodes[i + 1:]
           if d(u, w) > k]
    near = [(u, w) for i, u in enumerate(nodes) for w in nodes[i + 1:]
            if d(u, w) <= k]
    rng = random.Random(derive_seed(seed, "pairs"))
    if len(far) > max_pairs:
        far = sorted(rng.sample(far, max_pairs))
    if include_near and len(near) > max_pairs:
        near = sorted(rng.sample(near, max_pairs))
    draws = [sampler.sample(derive_seed(seed, "trial", i))
             for i in range(trials)]

    def probe(pairs):
        out = []
        for u, w in pairs:
            xs = [dr[u] for dr in draws]
            ys = [dr[w] for dr in draws]
            p, flag = _pair_pvalue(xs, ys)
            duw = d(u, w)
            out.append({"u": u, "w": w,
                        "distance": None if math.isinf(duw) else duw,
                        "p_value": p, "flag": flag})
        return out

    pairs = probe(far)
    tested = [p for p in pairs if p["flag"] == "ok"]
    corrected = alpha / max(1, len(tested))
    rejected = any(p["p_value"] < corrected for p in tested)
    near_pairs = probe(near) if include_near else []
    return DependenceReport(
        process=sampler.name, radius=k, mode="sampled", trials=trials,
        alpha=alpha, corrected_alpha=corrected, pairs=pairs,
        rejected=rejected, near_pairs=near_pairs)


def subgraph_invariance_probe(sampler_a: ProcessSampler, nodes_a,
                              sampler_b: ProcessSampler, nodes_b,
                              trials: int = 400, seed: str = "inv",
                              tol: float = 0.1) -> dict:
    """Compare the law of sampler_a on nodes_a with sampler_b on nodes_b
    (positional correspondence).  Uses the exact tables when both sides
    have one, otherwise an empirical total-variation estimate."""
    if len(nodes_a) != len(nodes_b):
        raise FindepError("windows must have equal length")
    if sampler_a.has_exact and sampler_b.has_exact:
        oa, wa, da = sampler_a.exact()
        ob, wb, db = sampler_b.exact()
        ma = weights_marginal(oa, wa, nodes_a)
        mb = weights_marginal(ob, wb, nodes_b)
        keys = set(ma) | set(mb)
        tv = sum(abs(Fraction(ma.get(key, 0), da) - Fraction(mb.get(key, 0), db))
                 for key in keys) / 2
        return {"mode": "exact", "tv": tv, "equal": tv == 0,
                "ok": tv == 0, "tol": 0}
    ca: dict = {}
    cb: dict = {}
    for i in range(trials):
        xa = sampler_a.sample(derive_seed(seed, "a", i))
        xb = sampler_b.sample(derive_seed(seed, "b", i))
        ka = tuple(xa[v] for v in nodes_a)
        kb = tuple(xb[v] for v in nodes_b)
        ca[ka] = ca.get(ka, 0) + 1
        cb[kb] = cb.get(kb, 0) + 1
    keys = set(ca) | set(cb)
    tv = sum(abs(ca.get(key, 0) - cb.get(key, 0)) for key in keys) / (2 * trials)
    return {"mode": "sampled", "tv": tv, "equal": None, "ok": tv <= tol,
            "tol": tol, "trials": trials}


# -- decompositions ----------------------------------------------------------


def underlying_undirected(g) -> LabeledGraph:
    """Forget orientation; antiparallel pairs collapse to one edge."""
    edges = sorted({(min(u, v), max(u, v)) for u, v in g.edges})
    return LabeledGraph(list(g.labels.items()), edges, check_id_range=False)


@dataclass
class DecompositionSample:
    """One sampled split of a graph into out-degree-one pieces.

    pieces[i] holds only its member nodes; a node may belong to one piece
    (node splits) or several (edge splits).  Both split kinds decide
    membership by randomness within one hop, which is what the radius-2
    accounting of the schemes relies on.
    """
    kind: str
    pieces: list

    @property
    def arity(self) -> int:
        return len(self.pieces)

    def member_pieces(self, v: int) -> list:
        return [i for i, p in enumerate(self.pieces) if p.has_node(v)]


DECOMPOSITION_RADIUS = 2


def pseudoforest_arity(g) -> int:
    return max(1, max((len(g.in_neighbors(v)) for v in g.nodes()), default=0))


def bounded_degree_arity(g) -> int:
    if g.directed:
        return max(1, max((len(g.out_neighbors(v)) for v in g.nodes()), default=0))
    return max(1, g.max_degree())


def _check_out_degree_one(piece, also_in: bool):
    for v in piece.nodes():
        if len(piece.out_neighbors(v)) > 1:
            raise FindepError(f"piece violates out-degree 1 at node {v}")
        if also_in and len(piece.in_neighbors(v)) > 1:
            raise FindepError(f"piece violates in-degree 1 at node {v}")


def decompose_pseudoforest(g, seed: str) -> DecompositionSample:
    """Node split of an out-degree-one graph.

    Every node deals a uniform permutation of 1..indeg to its in-neighbors;
    a node joins the piece its parent dealt it, parentless nodes join
    piece 1.  Each piece, induced on its members, is a disjoint union of
    directed paths and cycles (asserted).
    """
    if not g.directed:
        raise FindepError("pseudoforest decomposition needs a directed graph")
    for v in g.nodes():
        if len(g.out_neighbors(v)) > 1:
            raise FindepError(f"node {v} has out-degree > 1")
    count = pseudoforest_arity(g)
    cls = {}
    for u in sorted(g.nodes()):
        children = sorted(g.in_neighbors(u))
        if not g.out_neighbors(u):
            cls[u] = 1
        if not children:
            continue
        rng = random.Random(derive_seed(seed, "deal", u))
        slots = rng.sample(range(1, len(children) + 1), len(children))
        for child, s in zip(children, slots):
            cls[child] = s
    pieces = []
    for i in range(1, count + 1):
        members = {v for v, c in cls.items() if c == i}
        nodes = [(v, g.labels[v]) for v in sorted(members)]
        edges = [e for e in g.edges if e[0] in members and e[1] in members]
        piece = LabeledGraph(nodes, edges, directed=True, doubled=g.doubled,
                             check_id_range=False)
        _check_out_degree_one(piece, also_in=True)
        pieces.append(piece)
    return DecompositionSample(kind="pseudoforest_split", pieces=pieces)


def decompose_bounded_degree(g, seed: str) -> DecompositionSample:
    """Edge split into out-degree-one pieces.

    Undirected inputs are doubled (each edge oriented both ways) first.
    Every node deals a uniform permutation of 1..outdeg to its out-edges;
    piece i holds the edges dealt i, so it has out-degree at most 1
    (asserted).  Isolated nodes join piece 1.
    """
    if g.directed:
        host = g
    else:
        both = [(u, v) for u, v in g.edges] + [(v, u) for u, v in g.edges]
        host = LabeledGraph(list(g.labels.items()), both, directed=True,
                            doubled=True, check_id_range=False)
    count = bounded_degree_arity(g)
    piece_edges: list = [[] for _ in range(count)]
    piece_nodes: list = [set() for _ in range(count)]
    for v in sorted(host.nodes()):
        outs = sorted(host.out_neighbors(v))
        if not outs:
            if not host.in_neighbors(v):
                piece_nodes[0].add(v)
            continue
        rng = random.Random(derive_seed(seed, "deal", v))
        slots = rng.sample(range(len(outs)), len(outs))
        for w, s in zip(outs, slots):
            piece_edges[s].append((v, w))
            piece_nodes[s].update((v, w))
    pieces = []
    for i in range(count):
        nodes = [(v, host.labels[v]) for v in sorted(piece_nodes[i])]
        piece = LabeledGraph(nodes, piece_edges[i], directed=True,
                             doubled=True, check_id_range=False)
        _check_out_degree_one(piece, also_in=False)
        pieces.append(piece)
    return DecompositionSample(kind="bounded_degree_split", pieces=pieces)


# -- composition --------------------------------------------------------------

COMPOSE_RULES = ("disjoint-max", "induced")


def compose_radius(rule: str, outer: int, inner: int) -> int:
    """Dependence radius of a two-stage construction.

    disjoint-max: stages draw from disjoint randomness on the same graph.
    induced: the inner stage runs on pieces/values produced by the outer
    one, so inner distances may stretch across outer-radius hops.
    """
    if rule == "disjoint-max":
        return max(outer, inner)
    if rule == "induced":
        return outer + 2 * inner
    raise FindepError(f"unknown composition rule '{rule}'")


def induce_process(decomp_fn: Callable, component_fn: Callable,
                   component_radius: int, g, name: str,
                   decomp_radius: int = DECOMPOSITION_RADIUS) -> ProcessSampler:
    """Split g, run an independent component process per piece, and emit
    at each node the tuple of its piece values (0 where it is not a
    member).  decomp_fn(g, seed) must return a DecompositionSample."""
    nodes = sorted(g.nodes())

    def sample(seed: str) -> dict:
        ds = decomp_fn(g, derive_seed(seed, "split"))
        cols = []
        for i, piece in enumerate(ds.pieces):
            if not piece.n:
                cols.append({})
                continue
            comp = component_fn(piece)
            cols.append(comp.sample(derive_seed(seed, "piece", i)))
        return {v: tuple(x.get(v, 0) for x in cols) for v in nodes}

    radius = compose_radius("induced", decomp_radius, component_radius)
    return ProcessSampler(
        name=name, graph=g, alphabet=[], radius=radius, sample_fn=sample,
        trace=[f"decomposition radius {decomp_radius} + components at "
               f"radius {component_radius}: radius {radius}"])


def flatten_single_class(tupled: ProcessSampler, base: int,
                         name: str) -> ProcessSampler:
    """Flatten tuples with exactly one nonzero coordinate to the color
    (i, value) encoded as i*base + (value-1); palette size base*arity."""

    def sample(seed: str) -> dict:
        out = {}
        for v, row in tupled.sample(seed).items():
            hot = [(i, c) for i, c in enumerate(row) if c]
            if len(hot) != 1:
                raise FindepError(
                    f"node {v} is in {len(hot)} pieces, single-class flatten needs 1")
            i, c = hot[0]
            if not 1 <= c <= base:
                raise FindepError(f"piece value {c} outside 1..{base}")
            out[v] = i * base + (c - 1)
        return out

    return ProcessSampler(
        name=name, graph=tupled.graph, alphabet=[], radius=tupled.radius,
        sample_fn=sample,
        trace=tupled.trace + [f"flattened to class*{base}+color"])


def flatten_rank(tupled: ProcessSampler, base: int,
                 name: str) -> ProcessSampler:
    """Flatten tuples positionally to an integer rank, base-`base` digits
    (0 marks a missing membership)."""

    def sample(seed: str) -> dict:
        out = {}
        for v, row in tupled.sample(seed).items():
            val = 0
            for i, c in enumerate(row):
                if not 0 <= c < base:
                    raise FindepError(f"piece value {c} outside 0..{base - 1}")
                val += c * base ** i
            out[v] = val
        return out

    return ProcessSampler(
        name=name, graph=tupled.graph, alphabet=[], radius=tupled.radius,
        sample_fn=sample, trace=tupled.trace + [f"flattened to base-{base} rank"])


def _checked_proper(sampler: ProcessSampler) -> ProcessSampler:
    """Wrap a sampler with a runtime guard that its output is proper."""
    g = sampler.graph

    def sample(seed: str) -> dict:
        out = sampler.sample(seed)
        for u, v in g.edges:
            if out[u] == out[v]:
                raise FindepError(
                    f"stage '{sampler.name}' produced equal values on edge ({u},{v})")
        return out

    return ProcessSampler(
        name=sampler.name, graph=g, alphabet=sampler.alphabet,
        radius=sampler.radius, sample_fn=sample, exact_fn=sampler.exact_fn,
        trace=sampler.trace)


def apply_pn_rounds(base: ProcessSampler, alg: LocalAlgorithm,
                    name: str, alphabet: list) -> ProcessSampler:
    """Feed the base process into a round-style port-numbering program.

    The program must be anonymous (no ids, no n); ports are drawn fresh
    per sample.  Each synchronous round stretches dependence by two hops.
    """
    if alg.uses_ids or alg.uses_n:
        raise FindepError("only anonymous port-numbering programs compose here")
    if not alg.is_round_style():
        raise FindepError("need a round-style program to account for rounds")
    g = base.graph

    def sample(seed: str) -> dict:
        x = base.sample(derive_seed(seed, "base"))
        ports = {}
        for v in g.nodes():
            incident = (sorted(g.out_neighbors(v)) + sorted(g.in_neighbors(v))
                        if g.directed else list(g.neighbors(v)))
            rng = random.Random(derive_seed(seed, "ports", v))
            rng.shuffle(incident)
            ports[v] = incident
        g2 = LabeledGraph(list(g.labels.items()), g.edges, directed=g.directed,
                          doubled=g.doubled, ports=ports, check_id_range=False)
        return run_local(alg, g2, seed=derive_seed(seed, "coins"), inputs=x)

    radius = compose_radius("induced", base.radius, alg.rounds)
    return ProcessSampler(
        name=name, graph=g, alphabet=alphabet, radius=radius,
        sample_fn=sample,
        trace=base.trace + [f"{alg.rounds} PN rounds on top, radius {radius}"])


# -- coloring pipelines -------------------------------------------------------


def _cv_phase_list(palette: int) -> list:
    phases: list = []
    c = palette
    while c > 6:
        phases.append("cv")
        c = 2 * (c - 1).bit_length()
    for cls in (5, 4, 3):
        phases.append("shift")
        phases.append(("recolor", cls))
    return phases


def _palette_reduction_alg(palette: int) -> LocalAlgorithm:
    """Collapse a proper coloring by ranks < palette to colors {0,1,2}
    on an out-degree-one graph.  Bit-fixing rounds shrink the palette to
    six, then alternating adopt-parent / retire-one-class rounds finish."""
    phases = _cv_phase_list(palette)

    def init(me, n, rng):
        return (0, me.value)

    def rnd(me, state, incoming):
        k, col = state
        ph = phases[k]
        parent = None
        for d, s in incoming:
            if d in ("out", "both"):
                parent = s[1]
                break
        if ph == "cv":
            pc = parent if parent is not None else col ^ 1
            diff = col ^ pc
            i = (diff & -diff).bit_length() - 1
            col = 2 * i + (col >> i & 1)
        elif ph == "shift":
            col = parent if parent is not None else (col + 1) % 3
        else:
            cls = ph[1]
            if col == cls:
                excl = {parent}
                for d, s in incoming:
                    if d in ("in", "both"):
                        excl.add(s[1])
                col = min(c for c in (0, 1, 2) if c not in excl)
        return (k + 1, col)

    def out(me, state):
        return state[1] + 1

    return LocalAlgorithm(
        name=f"palette_reduction_{palette}", locality=len(phases),
        uses_ids=False, uses_n=False, init_fn=init, round_fn=rnd,
        output_fn=out, rounds=len(phases))


def pseudoforest_3_radius(max_in_degree: int) -> int:
    """Claimed dependence radius of color_pseudoforest_3 as a function of
    the maximum in-degree (n plays no part)."""
    count = max(1, max_in_degree)
    base = compose_radius("induced", DECOMPOSITION_RADIUS, BASELINE_RADII[4])
    rounds = len(_cv_phase_list(4 * count))
    return compose_radius("induced", base, rounds)


def color_pseudoforest_3(g) -> ProcessSampler:
    """Proper 3-coloring (colors 1..3) of an out-degree-one graph as a
    bounded-dependence process: node-split into path/cycle pieces, give
    each piece the insertion 4-coloring, flatten to 4*maxindeg class
    colors, then reduce the palette with anonymous port-numbering rounds."""
    count = pseudoforest_arity(g)
    tupled = induce_process(
        decompose_pseudoforest,
        lambda piece: baseline_coloring(underlying_undirected(piece), 4),
        BASELINE_RADII[4], g, name="piecewise_insertion_tuple")
    flat = flatten_single_class(tupled, 4, name="class_colors_4x")
    alg = _palette_reduction_alg(4 * count)
    out = apply_pn_rounds(_checked_proper(flat), alg,
                          name="pseudoforest_3_coloring", alphabet=[1, 2, 3])
    assert out.radius == pseudoforest_3_radius(count)
    return out


def _class_scheduling_alg(classes: int) -> LocalAlgorithm:
    """Nodes fire in rank order; each picks the smallest color (1..deg+1)
    unused by already-decided neighbors."""

    def init(me, n, rng):
        return (0, None)

    def rnd(me, state, incoming):
        k, fin = state
        if fin is None and me.value == k:
            used = {s[1] for _, s in incoming}
            fin = min(c for c in range(1, me.degree + 2) if c not in used)
        return (k + 1, fin)

    def out(me, state):
        return state[1]

    return LocalAlgorithm(
        name=f"class_scheduling_{classes}", locality=classes,
        uses_ids=False, uses_n=False, init_fn=init, round_fn=rnd,
        output_fn=out, rounds=classes)


def delta_plus_1_radius(max_degree: int) -> int:
    """Claimed dependence radius of color_delta_plus_1 as a function of
    the maximum degree (n plays no part)."""
    count = max(1, max_degree)
    base = compose_radius("induced", DECOMPOSITION_RADIUS,
                          pseudoforest_3_radius(count))
    return compose_radius("induced", base, 4 ** count)


def color_delta_plus_1(g) -> ProcessSampler:
    """Proper (max degree + 1)-coloring of an undirected graph as a
    bounded-dependence process: edge-split into out-degree-one pieces,
    3-color each, stack the piece colors into a rank, then retire the
    rank classes one PN round at a time."""
    count = bounded_degree_arity(g)
    tupled = induce_process(decompose_bounded_degree, color_pseudoforest_3,
                            pseudoforest_3_radius(count), g,
                            name="piecewise_3_coloring_tuple")
    flat = flatten_rank(tupled, 4, name="rank_colors")
    alg = _class_scheduling_alg(4 ** count)
    out = apply_pn_rounds(
        _checked_proper(flat), alg, name="delta_plus_1_coloring",
        alphabet=list(range(1, g.max_degree() + 2)))
    assert out.radius == delta_plus_1_radius(count)
    return out


def distance_k_coloring(g, k: int) -> ProcessSampler:
    """Distance-k coloring of g via the (max degree + 1)-coloring of its
    k-th power; the claimed radius converts back to g's metric."""
    if k < 1:
        raise FindepError("need k >= 1")
    pg = power_graph(g, k)
    inner = color_delta_plus_1(pg)
    return ProcessSampler(
        name=f"distance_{k}_coloring", graph=g, alphabet=inner.alphabet,
        radius=k * inner.radius, sample_fn=inner.sample_fn,
        trace=inner.trace + [f"power graph k={k}: radius x{k} in host metric"])


def _shift_values(sampler: ProcessSampler, delta: int) -> ProcessSampler:
    def sample(seed: str) -> dict:
        return {v: c + delta for v, c in sampler.sample(seed).items()}

    return ProcessSampler(
        name=sampler.name, graph=sampler.graph,
        alphabet=[c + delta for c in sampler.alphabet],
        radius=sampler.radius, sample_fn=sample, trace=sampler.trace)


def _mis_finisher_alg(classes: int) -> LocalAlgorithm:
    """Distance-2 color classes fire in order; a node joins unless a
    neighbor already did."""

    def init(me, n, rng):
        return (0, None)

    def rnd(me, state, incoming):
        k, dec = state
        if dec is None and me.value == k:
            dec = 0 if any(s[1] == 1 for _, s in incoming) else 1
        return (k + 1, dec)

    def out(me, state):
        return state[1]

    return LocalAlgorithm(
        name=f"mis_by_classes_{classes}", locality=classes,
        uses_ids=False, uses_n=False, init_fn=init, round_fn=rnd,
        output_fn=out, rounds=classes)


def maximal_independent_set_process(g) -> ProcessSampler:
    base = _shift_values(distance_k_coloring(g, 2), -1)
    classes = len(base.alphabet)
    return apply_pn_rounds(base, _mis_finisher_alg(classes),
                           name="maximal_independent_set", alphabet=[0, 1])


class VerificationError(FindepError):
    """A pipeline sample failed its problem's checker; carries evidence."""

    def __init__(self, message: str, bundle: dict):
        super().__init__(message)
        self.bundle = bundle


def _verified(sampler: ProcessSampler, problem) -> ProcessSampler:
    from .lcl import verify

    def sample(seed: str) -> dict:
        out = sampler.sample(seed)
        violations = verify(problem, sampler.graph, out)
        if violations:
            raise VerificationError(
                f"sample for '{problem.name}' rejected by its checker",
                bundle={"problem": problem.name, "seed": seed,
                        "graph": sampler.graph.to_json(),
                        "violations": [v.to_json_dict() for v in violations]})
        return out

    return ProcessSampler(
        name=sampler.name, graph=sampler.graph, alphabet=sampler.alphabet,
        radius=sampler.radius, sample_fn=sample, exact_fn=sampler.exact_fn,
        trace=sampler.trace + [f"checked against {problem.name}"])


def solve_lcl_findep(problem, g, const_alg: Optional[LocalAlgorithm] = None,
                     k: Optional[int] = None) -> ProcessSampler:
    """Bounded-dependence solver: distance-k coloring stage plus an
    anonymous constant-round finisher.

    Without const_alg, a builtin route is chosen by problem name (the
    class-scheduled MIS finisher, or the coloring pipelines).  Every
    sample is re-checked against the problem; failures raise
    VerificationError with a counterexample bundle.  The claimed radius
    depends on the degree bound and k, never on the node count.
    """
    params = problem.params or {}
    delta = g.max_degree()
    if const_alg is not None:
        if k is None:
            raise FindepError("a custom finisher needs an explicit k")
        stage = _shift_values(distance_k_coloring(g, k), -1)
        out = apply_pn_rounds(stage, const_alg,
                              name=f"solve_{problem.name}",
                              alphabet=list(problem.sigma_out))
        return _verified(out, problem)
    if problem.name == "maximal_independent_set":
        return _verified(maximal_independent_set_process(g), problem)
    if "q" in params and "k" not in params:
        q = params["q"]
        if q < delta + 1:
            hub = max(g.nodes(), key=g.degree)
            raise UnsolvableError(
                f"palette {q} below max degree + 1 = {delta + 1}",
                bundle={"problem": problem.name, "q": q, "max_degree": delta,
                        "witness_node": hub,
                        "reason": "greedy route needs q >= max degree + 1"})
        return _verified(color_delta_plus_1(g), problem)
    if "q" in params and "k" in params:
        kk, q = params["k"], params["q"]
        sampler = distance_k_coloring(g, kk)
        need = len(sampler.alphabet)
        if q < need:
            raise UnsolvableError(
                f"palette {q} below power-graph degree + 1 = {need}",
                bundle={"problem": problem.name, "q": q, "k": kk,
                        "power_degree_plus_1": need,
                        "reason": "power-graph route needs a larger palette"})
        return _verified(sampler, problem)
    raise FindepError(f"no bounded-dependence route for '{problem.name}'")
