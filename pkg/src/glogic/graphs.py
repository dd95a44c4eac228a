"""Labeled graphs with irreflexive symmetric edges, modules, contexts and
composition.

Vertices are plain integers, locally unique within a graph.  Labels are
literals (an atom name plus a polarity); a vertex may be unlabeled, which is
only used for the distinguished hole of a context.  Graphs are immutable:
every operation returns a fresh value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple


class GraphError(ValueError):
    """Domain error raised by graph operations (bad vertex, arity, ...)."""


@dataclass(frozen=True, order=True)
class Literal:
    atom: str
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        return self.atom if self.positive else "~" + self.atom


def _norm_edge(a: int, b: int) -> Tuple[int, int]:
    if a == b:
        raise GraphError("reflexive edge %r" % ((a, b),))
    return (a, b) if a < b else (b, a)


class LabeledGraph:
    """Finite graph with a partial literal labeling and undirected edges."""

    __slots__ = ("vertices", "labels", "edges", "_adj", "_key")

    def __init__(
        self,
        vertices: Iterable[int],
        labels: Optional[Dict[int, Literal]] = None,
        edges: Iterable[Tuple[int, int]] = (),
    ):
        vs = frozenset(vertices)
        lb = dict(labels or {})
        for v in lb:
            if v not in vs:
                raise GraphError("label on unknown vertex %r" % (v,))
        es = frozenset(_norm_edge(a, b) for a, b in edges)
        for a, b in es:
            if a not in vs or b not in vs:
                raise GraphError("edge endpoint not a vertex: %r" % ((a, b),))
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "labels", lb)
        object.__setattr__(self, "edges", es)
        adj: Dict[int, set] = {v: set() for v in vs}
        for a, b in es:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "_adj", {v: frozenset(ns) for v, ns in adj.items()})
        key = (vs, frozenset(lb.items()), es)
        object.__setattr__(self, "_key", key)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("LabeledGraph is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, LabeledGraph) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        lab = ",".join(
            "%d:%s" % (v, self.labels[v]) if v in self.labels else str(v)
            for v in sorted(self.vertices)
        )
        edg = ",".join("%d-%d" % e for e in sorted(self.edges))
        return "Graph[%s | %s]" % (lab, edg)

    # -- basic queries -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    def is_empty(self) -> bool:
        return not self.vertices

    def neighbors(self, v: int) -> FrozenSet[int]:
        try:
            return self._adj[v]
        except KeyError:
            raise GraphError("unknown vertex %r" % (v,))

    def has_edge(self, a: int, b: int) -> bool:
        return _norm_edge(a, b) in self.edges

    def label(self, v: int) -> Optional[Literal]:
        if v not in self.vertices:
            raise GraphError("unknown vertex %r" % (v,))
        return self.labels.get(v)

    def fully_labeled(self) -> bool:
        return all(v in self.labels for v in self.vertices)

    # -- spec operations ---------------------------------------------------

    def induced(self, w: Iterable[int]) -> "LabeledGraph":
        ws = frozenset(w)
        bad = ws - self.vertices
        if bad:
            raise GraphError("unknown vertices %r" % (sorted(bad),))
        return LabeledGraph(
            ws,
            {v: l for v, l in self.labels.items() if v in ws},
            (e for e in self.edges if e[0] in ws and e[1] in ws),
        )

    def is_module(self, w: Iterable[int]) -> bool:
        ws = frozenset(w)
        bad = ws - self.vertices
        if bad:
            raise GraphError("unknown vertices %r" % (sorted(bad),))
        outside = self.vertices - ws
        for z in outside:
            nz = self._adj[z]
            seen = None
            for x in ws:
                inside = x in nz
                if seen is None:
                    seen = inside
                elif inside != seen:
                    return False
        return True

    def dual(self) -> "LabeledGraph":
        if not self.fully_labeled():
            raise GraphError("dual of a graph with unlabeled vertices")
        vs = sorted(self.vertices)
        comp = [
            (a, b)
            for a, b in itertools.combinations(vs, 2)
            if (a, b) not in self.edges
        ]
        return LabeledGraph(
            self.vertices,
            {v: l.negated() for v, l in self.labels.items()},
            comp,
        )

    def connected_components(self) -> List[FrozenSet[int]]:
        seen: set = set()
        comps: List[FrozenSet[int]] = []
        for start in sorted(self.vertices):
            if start in seen:
                continue
            stack = [start]
            comp = set()
            while stack:
                v = stack.pop()
                if v in comp:
                    continue
                comp.add(v)
                stack.extend(self._adj[v] - comp)
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    def complement_components(self) -> List[FrozenSet[int]]:
        """Connected components of the edge-complement (labels ignored)."""
        vs = sorted(self.vertices)
        seen: set = set()
        comps: List[FrozenSet[int]] = []
        for start in vs:
            if start in seen:
                continue
            stack = [start]
            comp = set()
            while stack:
                v = stack.pop()
                if v in comp:
                    continue
                comp.add(v)
                stack.extend(
                    u for u in vs if u != v and u not in comp and not self.has_edge(u, v)
                )
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": [
                {"id": v, "label": str(self.labels[v]) if v in self.labels else None}
                for v in sorted(self.vertices)
            ],
            "edges": [list(e) for e in sorted(self.edges)],
        }

    @staticmethod
    def from_json(data: dict) -> "LabeledGraph":
        labels = {}
        vertices = []
        for entry in data["vertices"]:
            v = int(entry["id"])
            vertices.append(v)
            lab = entry.get("label")
            if lab is not None:
                labels[v] = parse_literal(lab)
        edges = [(int(a), int(b)) for a, b in data["edges"]]
        return LabeledGraph(vertices, labels, edges)

    def to_dot(self, name: str = "G") -> str:
        lines = ["graph %s {" % name]
        for v in sorted(self.vertices):
            lab = str(self.labels[v]) if v in self.labels else "?"
            lines.append('  v%d [label="%s"];' % (v, lab))
        for a, b in sorted(self.edges):
            lines.append("  v%d -- v%d;" % (a, b))
        lines.append("}")
        return "\n".join(lines)


def parse_literal(text: str) -> Literal:
    text = text.strip()
    if text.startswith("~"):
        return Literal(text[1:].strip(), False)
    return Literal(text, True)


EMPTY_GRAPH = LabeledGraph((), {}, ())


def single_vertex(v: int, literal: Literal) -> LabeledGraph:
    return LabeledGraph((v,), {v: literal}, ())


def disjoint_union(parts: Sequence[LabeledGraph]) -> LabeledGraph:
    vs: set = set()
    labels: Dict[int, Literal] = {}
    edges: List[Tuple[int, int]] = []
    for p in parts:
        overlap = vs & p.vertices
        if overlap:
            raise GraphError("vertex sets not disjoint: %r" % (sorted(overlap),))
        vs |= p.vertices
        labels.update(p.labels)
        edges.extend(p.edges)
    return LabeledGraph(vs, labels, edges)


def compose_via(
    template: LabeledGraph,
    order: Sequence[int],
    parts: Sequence[LabeledGraph],
) -> LabeledGraph:
    """Substitute ``parts[i]`` for the i-th template vertex.

    Edges of the template are copied between whole parts; template labels are
    discarded.  Parts must have pairwise disjoint vertex sets and may be
    empty.
    """
    if set(order) != set(template.vertices) or len(order) != len(template.vertices):
        raise GraphError("order must enumerate the template vertices exactly once")
    if len(parts) != len(order):
        raise GraphError(
            "arity mismatch: template has %d vertices, got %d parts"
            % (len(order), len(parts))
        )
    g = disjoint_union(parts)
    edges = list(g.edges)
    for i, j in itertools.combinations(range(len(order)), 2):
        if template.has_edge(order[i], order[j]):
            for x in parts[i].vertices:
                for y in parts[j].vertices:
                    edges.append(_norm_edge(x, y))
    return LabeledGraph(g.vertices, g.labels, edges)


@dataclass(frozen=True)
class GraphContext:
    """A graph with one distinguished unlabeled hole vertex."""

    graph: LabeledGraph
    hole: int

    def __post_init__(self):
        if self.hole not in self.graph.vertices:
            raise GraphError("hole is not a vertex")
        if self.hole in self.graph.labels:
            raise GraphError("hole must be unlabeled")

    def is_trivial(self) -> bool:
        return len(self.graph) == 1

    def plug(self, g: LabeledGraph) -> LabeledGraph:
        rest = self.graph.vertices - {self.hole}
        overlap = rest & g.vertices
        if overlap:
            raise GraphError("plugged graph shares vertices %r" % (sorted(overlap),))
        hole_nbrs = self.graph.neighbors(self.hole)
        vertices = rest | g.vertices
        labels = {v: l for v, l in self.graph.labels.items() if v != self.hole}
        labels.update(g.labels)
        edges = [e for e in self.graph.edges if self.hole not in e]
        edges.extend(g.edges)
        for v in hole_nbrs:
            for w in g.vertices:
                edges.append(_norm_edge(v, w))
        return LabeledGraph(vertices, labels, edges)


def context_of_module(g: LabeledGraph, module: Iterable[int], hole: int) -> GraphContext:
    """Context obtained by collapsing a module of ``g`` to a hole vertex."""
    ms = frozenset(module)
    if not g.is_module(ms):
        raise GraphError("vertex set is not a module")
    if not ms:
        raise GraphError("cannot collapse the empty module to a hole")
    rest = g.vertices - ms
    if hole in rest:
        raise GraphError("hole id collides with a remaining vertex")
    rep = next(iter(ms))
    vertices = rest | {hole}
    labels = {v: l for v, l in g.labels.items() if v in rest}
    edges = [e for e in g.edges if e[0] in rest and e[1] in rest]
    for v in rest:
        if g.has_edge(v, rep):
            edges.append(_norm_edge(v, hole))
    return GraphContext(LabeledGraph(vertices, labels, edges), hole)


# -- isomorphism ---------------------------------------------------------


def check_bijection(
    g: LabeledGraph, h: LabeledGraph, mapping: Dict[int, int]
) -> Optional[str]:
    """Verify a candidate isomorphism; returns a diagnostic or None if valid."""
    if set(mapping.keys()) != set(g.vertices):
        return "mapping domain is not the vertex set of the first graph"
    if set(mapping.values()) != set(h.vertices) or len(set(mapping.values())) != len(
        mapping
    ):
        return "mapping is not a bijection onto the second vertex set"
    for v in g.vertices:
        if g.labels.get(v) != h.labels.get(mapping[v]):
            return "label mismatch at vertex %r" % (v,)
    for a, b in itertools.combinations(sorted(g.vertices), 2):
        if g.has_edge(a, b) != h.has_edge(mapping[a], mapping[b]):
            return "edge mismatch at pair %r" % ((a, b),)
    return None


def find_isomorphism(
    g: LabeledGraph,
    h: LabeledGraph,
    candidate: Optional[Dict[int, int]] = None,
    similarity_only: bool = False,
) -> Optional[Dict[int, int]]:
    """Find (or verify) a label-respecting edge-preserving bijection.

    With ``candidate`` given, only verification is done (raising on malformed
    candidates).  Without one, a backtracking search ordered by refinement
    signatures is used; ``similarity_only`` ignores labels.
    """
    if candidate is not None:
        if set(candidate.keys()) != set(g.vertices) or sorted(
            candidate.values()
        ) != sorted(set(candidate.values())):
            raise GraphError("candidate is not a bijection between the vertex sets")
        return candidate if check_bijection(g, h, candidate) is None else None
    if len(g) != len(h) or len(g.edges) != len(h.edges):
        return None

    def sig(graph: LabeledGraph, v: int):
        lab = None if similarity_only else graph.labels.get(v)
        return (lab, len(graph.neighbors(v)))

    gs = sorted(g.vertices, key=lambda v: (sig(g, v), v))
    if sorted(sig(g, v) for v in g.vertices) != sorted(sig(h, v) for v in h.vertices):
        return None

    hs_by_sig: Dict[object, List[int]] = {}
    for v in sorted(h.vertices):
        hs_by_sig.setdefault(sig(h, v), []).append(v)

    mapping: Dict[int, int] = {}
    used: set = set()

    def extend(i: int) -> bool:
        if i == len(gs):
            return True
        v = gs[i]
        for w in hs_by_sig.get(sig(g, v), ()):
            if w in used:
                continue
            ok = True
            for u, wu in mapping.items():
                if g.has_edge(u, v) != h.has_edge(wu, w):
                    ok = False
                    break
            if ok:
                mapping[v] = w
                used.add(w)
                if extend(i + 1):
                    return True
                del mapping[v]
                used.discard(w)
        return False

    return dict(mapping) if extend(0) else None


def enumerate_modules(g: LabeledGraph, proper_only: bool = False) -> List[FrozenSet[int]]:
    """All modules of ``g`` by bitmask enumeration (desk scale, <= ~16 vertices)."""
    vs = sorted(g.vertices)
    n = len(vs)
    if n > 16:
        raise GraphError("module enumeration capped at 16 vertices (got %d)" % n)
    idx = {v: i for i, v in enumerate(vs)}
    nbr = [0] * n
    for a, b in g.edges:
        nbr[idx[a]] |= 1 << idx[b]
        nbr[idx[b]] |= 1 << idx[a]
    out: List[FrozenSet[int]] = []
    full = (1 << n) - 1
    for mask in range(1 << n):
        if proper_only and (mask == full or mask == 0 or mask & (mask - 1) == 0):
            continue
        ok = True
        rest = full & ~mask
        r = rest
        while r:
            zbit = r & -r
            z = zbit.bit_length() - 1
            inter = nbr[z] & mask
            if inter != 0 and inter != mask:
                ok = False
                break
            r &= r - 1
        if ok:
            out.append(frozenset(vs[i] for i in range(n) if mask >> i & 1))
    return out


def is_prime_graph(g: LabeledGraph) -> bool:
    """True iff the graph has >1 vertex and only trivial modules."""
    if len(g) <= 1:
        return False
    return not enumerate_modules(g, proper_only=True)
