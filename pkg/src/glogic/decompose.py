"""Modular decomposition of labeled graphs into base connectives.

The decomposition tree is the canonical syntax for a graph: leaves are
labeled vertices, ``par``/``tens`` nodes are n-ary (flattened), and every
other node is a prime connective from the base applied to the maximal
modules of the graph.  The naive strong-module computation enumerates
modules by bitmask, which is entirely adequate at desk scale and easy to
audit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .connectives import PAR, TENS, Base
from .graphs import (
    EMPTY_GRAPH,
    GraphError,
    LabeledGraph,
    Literal,
    compose_via,
    find_isomorphism,
    single_vertex,
)


@dataclass(frozen=True)
class DLeaf:
    literal: Literal
    vertex: Optional[int] = None  # original vertex id; None in canonical trees


@dataclass(frozen=True)
class DNode:
    conn: str
    children: Tuple["DTree", ...]


DTree = Union[DLeaf, DNode]


def tree_literals(t: DTree) -> List[Literal]:
    if isinstance(t, DLeaf):
        return [t.literal]
    out: List[Literal] = []
    for c in t.children:
        out.extend(tree_literals(c))
    return out


def _maximal_proper_modules(g: LabeledGraph) -> List[FrozenSet[int]]:
    """Maximal proper modules of a graph that is connected and co-connected.

    In that case they are pairwise disjoint and partition the vertex set.
    """
    from .graphs import enumerate_modules

    mods = enumerate_modules(g, proper_only=True)
    maximal = [m for m in mods if not any(m < other for other in mods)]
    claimed: set = set()
    for m in maximal:
        if claimed & m:
            raise GraphError("maximal modules overlap; graph not prime-quotient")
        claimed |= m
    singles = [frozenset({v}) for v in g.vertices - claimed]
    return sorted(maximal + singles, key=lambda m: min(m))


def decompose(g: LabeledGraph, base: Base) -> DTree:
    """Canonical-shape modular decomposition; registers fresh primes in the base."""
    if g.is_empty():
        raise GraphError("cannot decompose the empty graph")
    if not g.fully_labeled():
        raise GraphError("cannot decompose a graph with unlabeled vertices")
    if len(g) == 1:
        v = next(iter(g.vertices))
        return DLeaf(g.labels[v], v)
    comps = g.connected_components()
    if len(comps) > 1:
        return DNode(PAR, tuple(decompose(g.induced(c), base) for c in comps))
    cocomps = g.complement_components()
    if len(cocomps) > 1:
        return DNode(TENS, tuple(decompose(g.induced(c), base) for c in cocomps))
    modules = _maximal_proper_modules(g)
    reps = [min(m) for m in modules]
    quotient = g.induced(reps)
    name = base.register_prime(quotient, order=reps)
    slot_map = base.match_slots(name, quotient, reps)
    if slot_map is None:
        raise GraphError("quotient does not match registered connective %r" % (name,))
    by_rep = {min(m): m for m in modules}
    children = tuple(
        decompose(g.induced(by_rep[reps[slot_map[i]]]), base)
        for i in range(base.arity(name))
    )
    return DNode(name, children)


def realize(t: DTree, base: Base) -> LabeledGraph:
    """Graph of a decomposition tree; inverse of decompose up to isomorphism.

    Leaves carrying vertex ids keep them; id-less leaves get fresh ids.
    """
    counter = itertools.count(_max_vertex(t) + 1)

    def go(node: DTree) -> LabeledGraph:
        if isinstance(node, DLeaf):
            v = node.vertex if node.vertex is not None else next(counter)
            return single_vertex(v, node.literal)
        if node.conn in (PAR, TENS) and len(node.children) != base.arity(node.conn):
            # flattened associative node: fold with the binary template
            parts = [go(c) for c in node.children]
            if len(parts) < 2:
                raise GraphError("associative node with fewer than 2 children")
            template = base.get(node.conn).graph()
            acc = parts[0]
            for p in parts[1:]:
                acc = compose_via(template, [0, 1], [acc, p])
            return acc
        conn = base.get(node.conn)
        if len(node.children) != conn.arity:
            raise GraphError(
                "arity mismatch at %r: %d children" % (node.conn, len(node.children))
            )
        parts = [go(c) for c in node.children]
        return compose_via(conn.graph(), list(range(conn.arity)), parts)

    return go(t)


def _max_vertex(t: DTree) -> int:
    if isinstance(t, DLeaf):
        return t.vertex if t.vertex is not None else -1
    return max([_max_vertex(c) for c in t.children] or [-1])


# -- canonical form --------------------------------------------------------


def _strip(t: DTree) -> DTree:
    if isinstance(t, DLeaf):
        return DLeaf(t.literal, None)
    return DNode(t.conn, tuple(_strip(c) for c in t.children))


def _flatten(t: DTree) -> DTree:
    if isinstance(t, DLeaf):
        return t
    children: List[DTree] = []
    for c in t.children:
        fc = _flatten(c)
        if isinstance(fc, DNode) and fc.conn == t.conn and t.conn in (PAR, TENS):
            children.extend(fc.children)
        else:
            children.append(fc)
    return DNode(t.conn, tuple(children))


def tree_key(t: DTree):
    if isinstance(t, DLeaf):
        return (0, t.literal.atom, not t.literal.positive)
    return (1, t.conn, len(t.children), tuple(tree_key(c) for c in t.children))


def canonical_form(t: DTree, base: Base) -> DTree:
    """Unique representative of the tree modulo connective symmetries and
    par/tens associativity-commutativity.  Vertex ids are dropped."""

    def go(node: DTree) -> DTree:
        if isinstance(node, DLeaf):
            return node
        kids = [go(c) for c in node.children]
        if node.conn in (PAR, TENS):
            return DNode(node.conn, tuple(sorted(kids, key=tree_key)))
        best = None
        for sigma in base.sym(node.conn):
            arranged = tuple(kids[sigma[i]] for i in range(len(kids)))
            k = tuple(tree_key(c) for c in arranged)
            if best is None or k < best[0]:
                best = (k, arranged)
        return DNode(node.conn, best[1])

    return go(_flatten(_strip(t)))


def canonical_key(g: LabeledGraph, base: Base):
    """Hashable canonical form of a non-empty labeled graph."""
    return tree_key(canonical_form(decompose(g, base), base))


def graphs_isomorphic(g: LabeledGraph, h: LabeledGraph, base: Base) -> bool:
    if g.is_empty() or h.is_empty():
        return g.is_empty() and h.is_empty()
    if len(g) != len(h):
        return False
    return canonical_key(g, base) == canonical_key(h, base)


def is_cograph(g: LabeledGraph, base: Optional[Base] = None) -> bool:
    """True iff the decomposition uses only par/tens nodes."""
    if g.is_empty():
        return True
    if not g.fully_labeled():
        g = LabeledGraph(
            g.vertices,
            {v: g.labels.get(v, Literal("x")) for v in g.vertices},
            g.edges,
        )
    base = base or _scratch_base()

    def only_assoc(t: DTree) -> bool:
        if isinstance(t, DLeaf):
            return True
        return t.conn in (PAR, TENS) and all(only_assoc(c) for c in t.children)

    return only_assoc(decompose(g, base))


def p4_free(g: LabeledGraph) -> bool:
    """Independent cograph oracle: no induced 4-vertex path."""
    vs = sorted(g.vertices)
    for quad in itertools.combinations(vs, 4):
        sub = g.induced(quad)
        degs = sorted(len(sub.neighbors(v)) for v in quad)
        if len(sub.edges) == 3 and degs == [1, 1, 2, 2]:
            # 3 edges with degree profile (1,1,2,2) and connected = path
            if len(sub.connected_components()) == 1:
                return False
    return True


def _scratch_base() -> Base:
    from .connectives import default_base

    return default_base()


def is_prime(g: LabeledGraph) -> bool:
    from .graphs import is_prime_graph

    return is_prime_graph(g)
