"""The formula language over graphical connectives.

Formulas are in negation normal form by construction: negation is an
operation (pushed to literals through the registered dual connectives), not
a constructor.  The unit ``o`` is a first-class formula interpreted as the
empty graph.

Grammar (bit-exact):
    formula  :=  term  ( '|' term )*            par, lowest precedence
    term     :=  factor ( '&' factor )*         tens
    factor   :=  'o' | atom | '~' factor
               | Name '<' formula (',' formula)* '>' | '(' formula ')'
    atom     :=  [a-z][a-z0-9_]*   (the bare word 'o' is the unit)
    Name     :=  [A-Z][A-Za-z0-9_]*
Both infix operators are left-associative.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .connectives import PAR, TENS, Base, Perm, perm_inverse
from .decompose import DLeaf, DNode, DTree, canonical_form, decompose
from .graphs import (
    EMPTY_GRAPH,
    GraphError,
    LabeledGraph,
    Literal,
    compose_via,
    single_vertex,
)


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class FUnit:
    def __repr__(self):
        return "o"


@dataclass(frozen=True)
class FLit:
    atom: str
    positive: bool = True

    def __repr__(self):
        return self.atom if self.positive else "~" + self.atom


@dataclass(frozen=True)
class FApp:
    conn: str
    args: Tuple["Formula", ...]

    def __repr__(self):
        return render(self)


Formula = Union[FUnit, FLit, FApp]
Path = Tuple[int, ...]

UNIT = FUnit()


def lit(atom: str, positive: bool = True) -> FLit:
    return FLit(atom, positive)


def fpar(*args: Formula) -> Formula:
    out = args[0]
    for a in args[1:]:
        out = FApp(PAR, (out, a))
    return out


def ftens(*args: Formula) -> Formula:
    out = args[0]
    for a in args[1:]:
        out = FApp(TENS, (out, a))
    return out


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<atom>[a-z][a-z0-9_]*)|(?P<name>[A-Z][A-Za-z0-9_]*)"
    r"|(?P<op>[|&~<>(),]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise FormulaError("syntax error at position %d: %r" % (pos, text[pos:pos + 10]))
        if m.group("atom"):
            out.append(("atom", m.group("atom"), m.start("atom")))
        elif m.group("name"):
            out.append(("name", m.group("name"), m.start("name")))
        else:
            out.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, base: Base):
        self.toks = tokens
        self.i = 0
        self.base = base

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", -1)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise FormulaError("expected %r at position %d, got %r" % (value, pos, val))

    def formula(self) -> Formula:
        out = self.term()
        while self.peek()[1] == "|":
            self.take()
            out = FApp(PAR, (out, self.term()))
        return out

    def term(self) -> Formula:
        out = self.factor()
        while self.peek()[1] == "&":
            self.take()
            out = FApp(TENS, (out, self.factor()))
        return out

    def factor(self) -> Formula:
        kind, val, pos = self.take()
        if kind == "atom":
            return UNIT if val == "o" else FLit(val, True)
        if val == "~":
            return negate(self.factor(), self.base)
        if val == "(":
            out = self.formula()
            self.expect(")")
            return out
        if kind == "name":
            if val not in self.base:
                raise FormulaError("unknown connective %r at position %d" % (val, pos))
            self.expect("<")
            args = [self.formula()]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.formula())
            self.expect(">")
            arity = self.base.arity(val)
            if len(args) != arity:
                raise FormulaError(
                    "connective %r expects %d arguments, got %d (position %d)"
                    % (val, arity, len(args), pos)
                )
            return FApp(val, tuple(args))
        raise FormulaError("unexpected token %r at position %d" % (val, pos))


def parse(text: str, base: Base) -> Formula:
    tokens = _tokenize(text)
    p = _Parser(tokens, base)
    out = p.formula()
    if p.peek()[0] != "eof":
        raise FormulaError(
            "trailing input at position %d: %r" % (p.peek()[2], p.peek()[1])
        )
    return out


_PREC = {PAR: 1, TENS: 2}


def render(f: Formula) -> str:
    def go(node: Formula, parent_prec: int, right: bool) -> str:
        if isinstance(node, FUnit):
            return "o"
        if isinstance(node, FLit):
            return node.atom if node.positive else "~" + node.atom
        if node.conn in _PREC:
            prec = _PREC[node.conn]
            opsym = " | " if node.conn == PAR else " & "
            body = go(node.args[0], prec, False) + opsym + go(node.args[1], prec, True)
            if prec < parent_prec or (right and prec == parent_prec):
                return "(" + body + ")"
            return body
        return node.conn + "<" + ", ".join(go(a, 0, False) for a in node.args) + ">"

    return go(f, 0, False)


# -- structure helpers -------------------------------------------------------


def subformula_at(f: Formula, path: Path) -> Formula:
    for i in path:
        if not isinstance(f, FApp):
            raise FormulaError("path leaves the formula")
        f = f.args[i]
    return f


def replace_at(f: Formula, path: Path, sub: Formula) -> Formula:
    if not path:
        return sub
    if not isinstance(f, FApp):
        raise FormulaError("path leaves the formula")
    i = path[0]
    args = list(f.args)
    args[i] = replace_at(args[i], path[1:], sub)
    return FApp(f.conn, tuple(args))


def literal_paths(f: Formula) -> List[Path]:
    out: List[Path] = []

    def go(node: Formula, path: Path):
        if isinstance(node, FLit):
            out.append(path)
        elif isinstance(node, FApp):
            for i, a in enumerate(node.args):
                go(a, path + (i,))

    go(f, ())
    return out


def size(f: Formula) -> int:
    """Units and connectives count once, literals twice."""
    if isinstance(f, FUnit):
        return 1
    if isinstance(f, FLit):
        return 2
    return 1 + sum(size(a) for a in f.args)


def negate(f: Formula, base: Base) -> Formula:
    if isinstance(f, FUnit):
        return UNIT
    if isinstance(f, FLit):
        return FLit(f.atom, not f.positive)
    dual = base.dual_of(f.conn)
    sigma = base.sigma_of(f.conn)
    return FApp(dual, tuple(negate(f.args[sigma[j]], base) for j in range(len(f.args))))


# -- graph interpretation ----------------------------------------------------


def graph_of_with_occs(f: Formula, base: Base, offset: int = 0) -> Tuple[LabeledGraph, Dict[Path, int]]:
    """Graph of the formula; vertices are consecutive ids (preorder over
    literal occurrences, starting at ``offset``) with the occurrence map."""
    occs: Dict[Path, int] = {}
    counter = itertools.count(offset)

    def go(node: Formula, path: Path) -> LabeledGraph:
        if isinstance(node, FUnit):
            return EMPTY_GRAPH
        if isinstance(node, FLit):
            v = next(counter)
            occs[path] = v
            return single_vertex(v, Literal(node.atom, node.positive))
        conn = base.get(node.conn)
        parts = [go(a, path + (i,)) for i, a in enumerate(node.args)]
        return compose_via(conn.graph(), list(range(conn.arity)), parts)

    return go(f, ()), occs


def graph_of(f: Formula, base: Base) -> LabeledGraph:
    return graph_of_with_occs(f, base)[0]


def graph_of_sequent(
    fs: Sequence[Formula], base: Base
) -> Tuple[LabeledGraph, Dict[Tuple[int, Path], int]]:
    """Graph of the par of all formulas in a sequent (disjoint union)."""
    graphs = []
    occs: Dict[Tuple[int, Path], int] = {}
    offset = 0
    for idx, f in enumerate(fs):
        g, o = graph_of_with_occs(f, base, offset)
        offset += len(g)
        graphs.append(g)
        for p, v in o.items():
            occs[(idx, p)] = v
    from .graphs import disjoint_union

    return disjoint_union(graphs), occs


def tree_to_formula(t: DTree, base: Base) -> Formula:
    if isinstance(t, DLeaf):
        return FLit(t.literal.atom, t.literal.positive)
    kids = [tree_to_formula(c, base) for c in t.children]
    if t.conn in (PAR, TENS):
        out = kids[0]
        for k in kids[1:]:
            out = FApp(t.conn, (out, k))
        return out
    return FApp(t.conn, tuple(kids))


def formula_of(g: LabeledGraph, base: Base) -> Formula:
    """Canonical unit-free formula of a non-empty labeled graph."""
    if g.is_empty():
        raise GraphError("no formula for the empty graph")
    return tree_to_formula(canonical_form(decompose(g, base), base), base)


# -- classification ----------------------------------------------------------


@dataclass(frozen=True)
class Flags:
    unit_free: bool
    vacuous: bool
    pure: bool
    mll: bool


def is_unit_free(f: Formula) -> bool:
    if isinstance(f, FUnit):
        return False
    if isinstance(f, FLit):
        return True
    return all(is_unit_free(a) for a in f.args)


def is_vacuous(f: Formula) -> bool:
    if isinstance(f, FUnit):
        return True
    if isinstance(f, FLit):
        return False
    return all(is_vacuous(a) for a in f.args)


def _pure_sub(f: Formula) -> bool:
    """Every vacuous subformula is exactly the unit."""
    if isinstance(f, (FUnit, FLit)):
        return True
    if is_vacuous(f):
        return False
    return all(_pure_sub(a) for a in f.args)


def is_pure(f: Formula) -> bool:
    return not is_vacuous(f) and _pure_sub(f)


def is_mll(f: Formula) -> bool:
    if isinstance(f, (FUnit, FLit)):
        return True
    return f.conn in (PAR, TENS) and all(is_mll(a) for a in f.args)


def classify(f: Formula) -> Flags:
    return Flags(is_unit_free(f), is_vacuous(f), is_pure(f), is_mll(f))


# -- equivalence (symmetries + associativity, units kept) --------------------


def _canon_key(f: Formula, base: Base):
    if isinstance(f, FUnit):
        return (0,)
    if isinstance(f, FLit):
        return (1, f.atom, not f.positive)
    if f.conn in (PAR, TENS):
        flat: List[Formula] = []

        def collect(node: Formula):
            if isinstance(node, FApp) and node.conn == f.conn:
                collect(node.args[0])
                collect(node.args[1])
            else:
                flat.append(node)

        collect(f)
        keys = sorted(_canon_key(a, base) for a in flat)
        return (2, f.conn, len(keys), tuple(keys))
    kid_keys = [_canon_key(a, base) for a in f.args]
    best = min(
        tuple(kid_keys[sigma[i]] for i in range(len(kid_keys)))
        for sigma in base.sym(f.conn)
    )
    return (3, f.conn, best)


def equiv(f: Formula, g: Formula, base: Base) -> bool:
    """The congruence generated by connective symmetries, par/tens
    associativity and the De Morgan laws (absorbed by NNF); no unit laws."""
    return _canon_key(f, base) == _canon_key(g, base)


# -- unitor support: canonical voided formulas -------------------------------


def canonical_void(conn_name: str, args: Sequence[Formula], void_slot: int, base: Base) -> Formula:
    """The canonical premise formula of a unitor absorbing ``void_slot``:
    the remaining arguments composed per the decomposition of the voided
    template graph (chunks are kept intact)."""
    conn = base.get(conn_name)
    keep = [i for i in range(conn.arity) if i != void_slot]
    if not keep:
        raise FormulaError("cannot void the only slot")
    if len(keep) == 1:
        return args[keep[0]]
    marker = {i: Literal("s%d" % i) for i in keep}
    g = LabeledGraph(
        keep,
        marker,
        [(a, b) for a, b in conn.edges if a in keep and b in keep],
    )
    tree = decompose(g, base)

    def build(t: DTree) -> Formula:
        if isinstance(t, DLeaf):
            return args[t.vertex]
        kids = [build(c) for c in t.children]
        if t.conn in (PAR, TENS):
            out = kids[0]
            for k in kids[1:]:
                out = FApp(t.conn, (out, k))
            return out
        return FApp(t.conn, tuple(kids))

    return build(tree)


def _chunk_sites(premise: Formula, chunks: List[Formula]) -> List[Dict[Path, int]]:
    """Ways to read ``premise`` as glue (connectives and units) over the given
    chunks, each used exactly once.  Returns site->chunk-index assignments.

    ``walk`` returns every (remaining-chunks, assignment) outcome for one
    subtree: either the subtree is consumed whole as a chunk occurrence, or we
    descend through a connective; bare literals must be consumed.
    """
    n = len(chunks)

    def walk(node: Formula, path: Path, remaining, acc):
        out = []
        for i in range(n):
            if remaining[i] and chunks[i] == node:
                acc2 = dict(acc)
                acc2[path] = i
                out.append((remaining[:i] + (False,) + remaining[i + 1 :], acc2))
        if isinstance(node, FApp):
            states = [(remaining, acc)]
            for j, child in enumerate(node.args):
                new_states = []
                for rem, a in states:
                    new_states.extend(walk(child, path + (j,), rem, a))
                states = new_states
                if not states:
                    break
            out.extend(states)
        elif isinstance(node, FUnit):
            out.append((remaining, acc))
        return out

    return [
        acc
        for rem, acc in walk(premise, (), tuple(True for _ in range(n)), {})
        if not any(rem)
    ]


def check_unitor(
    premise: Formula,
    conn_name: str,
    args: Sequence[Formula],
    void_slot: int,
    base: Base,
) -> Optional[str]:
    """Validate a unitor instance: conclusion ``conn<args>`` whose
    ``void_slot`` argument is the unit, premise built from the remaining
    arguments as intact chunks with the same (non-empty) graph.  Returns a
    diagnostic or None."""
    conn = base.get(conn_name)
    if len(args) != conn.arity:
        return "arity mismatch on unitor conclusion"
    if not isinstance(args[void_slot], FUnit):
        return "designated unitor slot is not the unit"
    keep = [i for i in range(conn.arity) if i != void_slot]
    chunks = [args[i] for i in keep]
    pgraph, poccs = graph_of_with_occs(premise, base)
    if pgraph.is_empty():
        return "unitor requires a non-empty interpretation"
    assignments = _chunk_sites(premise, chunks)
    if not assignments:
        return "premise is not built from the conclusion's remaining arguments"
    # adjacency of chunk sites must mirror the voided template
    for assign in assignments:
        site_of_occ: Dict[int, int] = {}
        for occ_path, vid in poccs.items():
            site = None
            for spath, ci in assign.items():
                if occ_path[: len(spath)] == spath:
                    site = ci
                    break
            if site is None:
                break  # literal outside every chunk: invalid reading
            site_of_occ[vid] = site
        else:
            reps: Dict[int, int] = {}
            for vid, ci in site_of_occ.items():
                reps.setdefault(ci, vid)
            ok = True
            for a, b in itertools.combinations(sorted(reps), 2):
                want = conn.has_edge(keep[a], keep[b])
                have = pgraph.has_edge(reps[a], reps[b])
                if want != have:
                    ok = False
                    break
            if ok:
                return None
    return "premise chunk arrangement does not match the voided template graph"


# -- quasi-subformulas -------------------------------------------------------


def quasi_subformulas(f: Formula, base: Base, max_count: int = 10000) -> Set[Formula]:
    """Closure of ``f`` under voiding connective slots (re-decomposing the
    residual template) and taking quasi-subformulas of the arguments."""
    seen: Set[Formula] = set()

    def qs(node: Formula) -> Set[Formula]:
        if isinstance(node, (FUnit, FLit)):
            return {node}
        arg_sets = [qs(a) for a in node.args]
        out: Set[Formula] = set()
        slots = range(len(node.args))
        for r in range(1, len(node.args) + 1):
            for kept in itertools.combinations(slots, r):
                for combo in itertools.product(*(sorted(arg_sets[i], key=repr) for i in kept)):
                    if len(kept) == len(node.args):
                        out.add(FApp(node.conn, tuple(combo)))
                    else:
                        full = [UNIT] * len(node.args)
                        for i, sub in zip(kept, combo):
                            full[i] = sub
                        if len(kept) == 1:
                            out.add(combo[0])
                        else:
                            void_order = [i for i in slots if i not in kept]
                            shaped = _void_many(node.conn, full, void_order, base)
                            out.add(shaped)
                    if len(out) > max_count:
                        return out
        return out

    result = qs(f)
    result.add(f)
    return result


def _void_many(conn_name: str, args: Sequence[Formula], void_slots: Sequence[int], base: Base) -> Formula:
    conn = base.get(conn_name)
    keep = [i for i in range(conn.arity) if i not in set(void_slots)]
    if len(keep) == 1:
        return args[keep[0]]
    marker = {i: Literal("s%d" % i) for i in keep}
    g = LabeledGraph(
        keep,
        marker,
        [(a, b) for a, b in conn.edges if a in keep and b in keep],
    )
    tree = decompose(g, base)

    def build(t: DTree) -> Formula:
        if isinstance(t, DLeaf):
            return args[t.vertex]
        kids = [build(c) for c in t.children]
        if t.conn in (PAR, TENS):
            out = kids[0]
            for k in kids[1:]:
                out = FApp(t.conn, (out, k))
            return out
        return FApp(t.conn, tuple(kids))

    return build(tree)
