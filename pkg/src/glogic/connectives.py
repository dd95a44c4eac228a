"""Graphical connectives and the base registry.

A graphical connective is a prime graph with a significant vertex order; its
slots are the positions 0..arity-1.  A base keeps one connective per
similarity class of prime graphs, pairs each connective with its dual and a
fixed slot correspondence used by formula negation, and caches symmetry data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .graphs import GraphError, LabeledGraph, is_prime_graph

Perm = Tuple[int, ...]

DEFAULT_ARITY_CAP = 8

PAR = "par"
TENS = "tens"


class CapacityError(ValueError):
    """Raised when a brute-force enumeration exceeds the configured bound."""


def _norm_pos_edges(arity: int, edges: Iterable[Tuple[int, int]]) -> FrozenSet[Tuple[int, int]]:
    out = set()
    for a, b in edges:
        if a == b:
            raise GraphError("reflexive connective edge")
        if not (0 <= a < arity and 0 <= b < arity):
            raise GraphError("connective edge out of range")
        out.add((a, b) if a < b else (b, a))
    return frozenset(out)


@dataclass(frozen=True)
class GraphicalConnective:
    """Ordered-vertex graph used as an n-ary connective."""

    name: str
    arity: int
    edges: FrozenSet[Tuple[int, int]]

    @staticmethod
    def make(name: str, arity: int, edges: Iterable[Tuple[int, int]]) -> "GraphicalConnective":
        return GraphicalConnective(name, arity, _norm_pos_edges(arity, edges))

    def graph(self) -> LabeledGraph:
        return LabeledGraph(range(self.arity), {}, self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return ((i, j) if i < j else (j, i)) in self.edges

    def complement_edges(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(
            p for p in itertools.combinations(range(self.arity), 2) if p not in self.edges
        )

    def is_prime(self) -> bool:
        return is_prime_graph(self.graph())


def perm_compose(p: Perm, q: Perm) -> Perm:
    """(p . q)(i) = p(q(i))"""
    return tuple(p[q[i]] for i in range(len(p)))


def perm_inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def _automorphism(conn: GraphicalConnective, sigma: Perm) -> bool:
    for i, j in itertools.combinations(range(conn.arity), 2):
        if conn.has_edge(i, j) != conn.has_edge(sigma[i], sigma[j]):
            return False
    return True


def _complementing(src: GraphicalConnective, dst: GraphicalConnective, sigma: Perm) -> bool:
    # sigma maps src positions to dst positions, edges to non-edges and back
    for i, j in itertools.combinations(range(src.arity), 2):
        if src.has_edge(i, j) == dst.has_edge(sigma[i], sigma[j]):
            return False
    return True


def symmetry_group(
    conn: GraphicalConnective, arity_cap: int = DEFAULT_ARITY_CAP
) -> FrozenSet[Perm]:
    """All argument permutations leaving the connective's graph unchanged."""
    if conn.arity > arity_cap:
        raise CapacityError(
            "symmetry enumeration capped at arity %d (got %d)" % (arity_cap, conn.arity)
        )
    return frozenset(
        sigma
        for sigma in itertools.permutations(range(conn.arity))
        if _automorphism(conn, sigma)
    )


def dualizing_symmetries(
    conn: GraphicalConnective, arity_cap: int = DEFAULT_ARITY_CAP
) -> FrozenSet[Perm]:
    """Permutations realizing the dual on negated arguments; empty unless
    the connective's graph is self-complementary."""
    if conn.arity > arity_cap:
        raise CapacityError(
            "symmetry enumeration capped at arity %d (got %d)" % (arity_cap, conn.arity)
        )
    return frozenset(
        sigma
        for sigma in itertools.permutations(range(conn.arity))
        if _complementing(conn, conn, sigma)
    )


def dual_correspondences(
    src: GraphicalConnective, dst: GraphicalConnective
) -> List[Perm]:
    """All maps f from src slots to dst slots with i~j in src iff f(i)!~f(j)."""
    if src.arity != dst.arity:
        return []
    return [
        sigma
        for sigma in itertools.permutations(range(src.arity))
        if _complementing(src, dst, sigma)
    ]


def is_dual_pairing(
    c: GraphicalConnective, d: GraphicalConnective, pairing: Perm
) -> bool:
    """True iff pairing (c slot -> d slot) is a valid dualizing correspondence."""
    return len(pairing) == c.arity == d.arity and _complementing(c, d, pairing)


def canonical_edge_key(arity: int, edges: FrozenSet[Tuple[int, int]]) -> Tuple[Tuple[int, int], ...]:
    """Lexicographically least edge set over all vertex orders (similarity key)."""
    pairs = list(itertools.combinations(range(arity), 2))
    best: Optional[Tuple[Tuple[int, int], ...]] = None
    for sigma in itertools.permutations(range(arity)):
        mapped = frozenset(
            (min(sigma[a], sigma[b]), max(sigma[a], sigma[b])) for a, b in edges
        )
        bits = tuple(p for p in pairs if p in mapped)
        if best is None or bits < best:
            best = bits
    return best if best is not None else ()


_BUILTINS = [
    (PAR, 2, ()),
    (TENS, 2, ((0, 1),)),
    ("P4", 4, ((0, 1), (1, 2), (2, 3))),
    ("Bull", 5, ((0, 1), (1, 2), (2, 3), (1, 4), (2, 4))),
]


class Base:
    """Registry of prime graphical connectives, their duals and symmetries.

    Exactly one connective is kept per similarity class.  Fresh primes found
    during decomposition are registered lazily (single-writer; reads are
    pure).  For each connective C the base fixes its dual D and a permutation
    sigma so that negating C<phi_1..phi_n> yields D<~phi_sigma(1)..>; sigma is
    the lexicographically least valid correspondence, with sigma_D chosen as
    its inverse for non-self-dual pairs.
    """

    def __init__(self, arity_cap: int = DEFAULT_ARITY_CAP, builtins: bool = True):
        self.arity_cap = arity_cap
        self.connectives: Dict[str, GraphicalConnective] = {}
        self.dual_name: Dict[str, str] = {}
        self.dual_sigma: Dict[str, Perm] = {}
        self._by_class: Dict[Tuple[int, Tuple[Tuple[int, int], ...]], str] = {}
        self._sym: Dict[str, FrozenSet[Perm]] = {}
        self._dsym: Dict[str, FrozenSet[Perm]] = {}
        if builtins:
            for name, arity, edges in _BUILTINS:
                self._install(GraphicalConnective.make(name, arity, edges))

    # -- lookup ------------------------------------------------------------

    def __contains__(self, name: str) -> bool:
        return name in self.connectives

    def get(self, name: str) -> GraphicalConnective:
        try:
            return self.connectives[name]
        except KeyError:
            raise GraphError("unknown connective %r" % (name,))

    def arity(self, name: str) -> int:
        return self.get(name).arity

    def dual_of(self, name: str) -> str:
        return self.dual_name[name]

    def sigma_of(self, name: str) -> Perm:
        return self.dual_sigma[name]

    def sym(self, name: str) -> FrozenSet[Perm]:
        if name not in self._sym:
            self._sym[name] = symmetry_group(self.get(name), self.arity_cap)
        return self._sym[name]

    def dsym(self, name: str) -> FrozenSet[Perm]:
        if name not in self._dsym:
            self._dsym[name] = dualizing_symmetries(self.get(name), self.arity_cap)
        return self._dsym[name]

    def names(self) -> List[str]:
        return sorted(self.connectives)

    # -- registration ------------------------------------------------------

    def _install(self, conn: GraphicalConnective) -> str:
        if not conn.is_prime():
            raise GraphError("connective %r is not prime" % (conn.name,))
        key = (conn.arity, canonical_edge_key(conn.arity, conn.edges))
        if key in self._by_class:
            raise GraphError(
                "similarity class already registered as %r" % (self._by_class[key],)
            )
        self.connectives[conn.name] = conn
        self._by_class[key] = conn.name
        # pair with the dual connective
        comp = GraphicalConnective.make(conn.name + "~", conn.arity, conn.complement_edges())
        comp_key = (conn.arity, canonical_edge_key(conn.arity, comp.edges))
        if comp_key == key:
            # self-dual: fix the least dualizing symmetry
            cands = dual_correspondences(conn, conn)
            self.dual_name[conn.name] = conn.name
            self.dual_sigma[conn.name] = min(cands)
        elif comp_key in self._by_class:
            other = self._by_class[comp_key]
            sigma = min(dual_correspondences(self.get(other), conn))
            self.dual_name[conn.name] = other
            self.dual_name[other] = conn.name
            self.dual_sigma[conn.name] = sigma
            self.dual_sigma[other] = perm_inverse(sigma)
        # else: dual registered later (register() always installs both)
        return conn.name

    def register_prime(self, graph: LabeledGraph, order: Optional[Sequence[int]] = None) -> str:
        """Register the similarity class of a prime graph; returns the name of
        its base connective (existing or fresh).  The fresh connective's slot
        order minimizes the adjacency relation lexicographically; its dual is
        registered along with it."""
        if not is_prime_graph(graph):
            raise GraphError("cannot register a non-prime graph")
        n = len(graph)
        if n > self.arity_cap:
            raise CapacityError(
                "connective arity capped at %d (got %d)" % (self.arity_cap, n)
            )
        verts = list(order) if order is not None else sorted(graph.vertices)
        pos_edges = frozenset(
            (min(verts.index(a), verts.index(b)), max(verts.index(a), verts.index(b)))
            for a, b in graph.edges
        )
        key = (n, canonical_edge_key(n, pos_edges))
        if key in self._by_class:
            return self._by_class[key]
        canon_edges = frozenset(key[1])
        name = "Prime_%x_%d" % (
            sum(1 << (a * n + b) for a, b in canon_edges),
            n,
        )
        conn = GraphicalConnective(name, n, canon_edges)
        self._install(conn)
        if name not in self.dual_name:
            # dual class not present yet: install it with the canonical order
            comp_edges = conn.complement_edges()
            comp_key = frozenset(canonical_edge_key(n, comp_edges))
            dual_default = GraphicalConnective(
                "Prime_%x_%d" % (sum(1 << (a * n + b) for a, b in comp_key), n),
                n,
                comp_key,
            )
            self._install(dual_default)
        return name

    def match_slots(self, name: str, graph: LabeledGraph, order: Sequence[int]) -> Optional[Perm]:
        """A map from connective slots to positions of ``order`` realizing a
        similarity between the connective and the (unlabeled) graph."""
        conn = self.get(name)
        if len(order) != conn.arity:
            return None

        def ok(partial: Dict[int, int]) -> bool:
            items = list(partial.items())
            for (i, pi), (j, pj) in itertools.combinations(items, 2):
                if conn.has_edge(i, j) != graph.has_edge(order[pi], order[pj]):
                    return False
            return True

        slots = list(range(conn.arity))

        def extend(k: int, partial: Dict[int, int], used: set) -> Optional[Perm]:
            if k == len(slots):
                return tuple(partial[i] for i in slots)
            for p in range(conn.arity):
                if p in used:
                    continue
                partial[slots[k]] = p
                if ok(partial):
                    used.add(p)
                    res = extend(k + 1, partial, used)
                    if res is not None:
                        return res
                    used.discard(p)
                del partial[slots[k]]
            return None

        return extend(0, {}, set())

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        out = []
        for name in self.names():
            conn = self.get(name)
            out.append(
                {
                    "name": name,
                    "arity": conn.arity,
                    "edges": [list(e) for e in sorted(conn.edges)],
                    "dual": self.dual_name[name],
                    "sigma": list(self.dual_sigma[name]),
                    "sym": sorted(list(p) for p in self.sym(name)),
                    "dsym": sorted(list(p) for p in self.dsym(name)),
                }
            )
        return {"arity_cap": self.arity_cap, "connectives": out}

    @staticmethod
    def from_json(data: dict) -> "Base":
        base = Base(arity_cap=data.get("arity_cap", DEFAULT_ARITY_CAP), builtins=False)
        for entry in data["connectives"]:
            conn = GraphicalConnective.make(
                entry["name"], entry["arity"], [tuple(e) for e in entry["edges"]]
            )
            base.connectives[conn.name] = conn
            base._by_class[(conn.arity, canonical_edge_key(conn.arity, conn.edges))] = conn.name
        for entry in data["connectives"]:
            base.dual_name[entry["name"]] = entry["dual"]
            base.dual_sigma[entry["name"]] = tuple(entry["sigma"])
            base._sym[entry["name"]] = frozenset(tuple(p) for p in entry["sym"])
            base._dsym[entry["name"]] = frozenset(tuple(p) for p in entry["dsym"])
        return base


def default_base(arity_cap: int = DEFAULT_ARITY_CAP) -> Base:
    return Base(arity_cap=arity_cap)
