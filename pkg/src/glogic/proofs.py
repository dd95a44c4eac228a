"""Sequent proof objects.

A sequent is a tuple of formula occurrences (multiset semantics: rule checks
compare contexts as multisets, so occurrence order never matters for
validity).  Each proof node stores its rule name, its full conclusion, its
children and a small dict of instance data naming the principal occurrences
and, where a rule needs them, slots, paths and pairings.  Nodes are built by
the ``mk_*`` constructors; ``checker.check_proof`` validates them against a
rule system.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .connectives import PAR, TENS, Base
from .formulas import (
    FApp,
    FLit,
    Formula,
    FUnit,
    UNIT,
    negate,
    parse,
    render,
    replace_at,
    subformula_at,
)

Sequent = Tuple[Formula, ...]

# rule identifiers
AX = "ax"
PAR_R = "par"
TENS_R = "tens"
DCONR = "dconr"
MIX = "mix"
WD_TENS = "wd_tens"
UNITOR = "unitor"
CUT = "cut"
BIG_AX = "AX"
WD_PAR = "wd_par"
DEEP = "deep"
DCONR_CHI = "dconr_chi"
CONR = "conr"
WEAK = "w"
CONTR = "c"

SYSTEM_MGL = frozenset({AX, PAR_R, TENS_R, DCONR})
SYSTEM_MGL0 = SYSTEM_MGL | {MIX, WD_TENS, UNITOR}
SYSTEM_GLK = SYSTEM_MGL | {WEAK, CONTR}
SYSTEM_MLLCONR = frozenset({AX, PAR_R, TENS_R, MIX, CONR})

SYSTEMS = {
    "mgl": SYSTEM_MGL,
    "mgl0": SYSTEM_MGL0,
    "glk": SYSTEM_GLK,
    "mllconr": SYSTEM_MLLCONR,
}


@dataclass(frozen=True)
class Proof:
    rule: str
    conclusion: Sequent
    children: Tuple["Proof", ...] = ()
    data: tuple = ()  # sorted (key, value) pairs; values hashable

    def get(self, key, default=None):
        for k, v in self.data:
            if k == key:
                return v
        return default

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def rules_used(self) -> Counter:
        out = Counter([self.rule])
        for c in self.children:
            out.update(c.rules_used())
        return out


def _data(**kw) -> tuple:
    return tuple(sorted(kw.items()))


_CONCL_FIELDS = frozenset({"target", "c_target", "d_target", "extracted"})


def reorder_conclusion(p: "Proof", want: Sequent) -> "Proof":
    """Same proof with its root conclusion occurrences permuted to ``want``
    (which must be a permutation of the current conclusion)."""
    if p.conclusion == tuple(want):
        return p
    used = [False] * len(want)
    perm: Dict[int, int] = {}
    for old, f in enumerate(p.conclusion):
        for new, g in enumerate(want):
            if not used[new] and f == g:
                used[new] = True
                perm[old] = new
                break
        else:
            raise ValueError("target sequent is not a permutation of the conclusion")
    newdata = tuple(
        (k, perm[v]) if k in _CONCL_FIELDS else (k, v) for k, v in p.data
    )
    return Proof(p.rule, tuple(want), p.children, newdata)


def seq_minus(seq: Sequent, positions) -> Sequent:
    drop = set(positions)
    return tuple(f for i, f in enumerate(seq) if i not in drop)


def seq_multiset(seq: Sequent) -> Counter:
    return Counter(seq)


# -- constructors ------------------------------------------------------------


def mk_ax(atom: str) -> Proof:
    return Proof(AX, (FLit(atom, True), FLit(atom, False)))


def mk_big_ax(f: Formula, base: Base) -> Proof:
    return Proof(BIG_AX, (f, negate(f, base)))


def mk_par(child: Proof, i: int, j: int) -> Proof:
    phi, psi = child.conclusion[i], child.conclusion[j]
    ctx = seq_minus(child.conclusion, (i, j))
    concl = ctx + (FApp(PAR, (phi, psi)),)
    return Proof(PAR_R, concl, (child,), _data(target=len(concl) - 1, phi0=i, psi0=j))


def mk_tens(c0: Proof, i0: int, c1: Proof, i1: int) -> Proof:
    phi, psi = c0.conclusion[i0], c1.conclusion[i1]
    ctx = seq_minus(c0.conclusion, (i0,)) + seq_minus(c1.conclusion, (i1,))
    concl = ctx + (FApp(TENS, (phi, psi)),)
    return Proof(
        TENS_R, concl, (c0, c1), _data(target=len(concl) - 1, phi0=i0, psi1=i1)
    )


def mk_mix(c0: Proof, c1: Proof) -> Proof:
    return Proof(MIX, c0.conclusion + c1.conclusion, (c0, c1))


def mk_dconr(
    base: Base,
    cname: str,
    children: Sequence[Proof],
    assignments: Sequence[Tuple[int, int, int, int]],
) -> Proof:
    """assignments[i] = (p_i, q_i, phi_pos, psi_pos): child i proves
    ... C-arg p_i at phi_pos ... D-arg q_i at psi_pos."""
    dname = base.dual_of(cname)
    n = base.arity(cname)
    cargs: List[Optional[Formula]] = [None] * n
    dargs: List[Optional[Formula]] = [None] * n
    ctx: List[Formula] = []
    for child, (p, q, ppos, qpos) in zip(children, assignments):
        cargs[p] = child.conclusion[ppos]
        dargs[q] = child.conclusion[qpos]
        ctx.extend(seq_minus(child.conclusion, (ppos, qpos)))
    concl = tuple(ctx) + (FApp(cname, tuple(cargs)), FApp(dname, tuple(dargs)))
    return Proof(
        DCONR,
        concl,
        tuple(children),
        _data(
            c_target=len(concl) - 2,
            d_target=len(concl) - 1,
            pairs=tuple(tuple(a) for a in assignments),
        ),
    )


def mk_wd_tens(base: Base, c0: Proof, i0: int, c1: Proof, i1: int) -> Proof:
    """c0 proves the extracted factor at i0; c1 proves the connective with a
    unit in the extraction slot at i1."""
    phi = c0.conclusion[i0]
    shell = c1.conclusion[i1]
    if not isinstance(shell, FApp):
        raise ValueError("wd_tens shell must be a connective application")
    slots = [k for k, a in enumerate(shell.args) if isinstance(a, FUnit)]
    if not slots:
        raise ValueError("wd_tens shell has no unit slot")
    slot = slots[0]
    args = list(shell.args)
    args[slot] = phi
    ctx = seq_minus(c0.conclusion, (i0,)) + seq_minus(c1.conclusion, (i1,))
    concl = ctx + (FApp(shell.conn, tuple(args)),)
    return Proof(
        WD_TENS,
        concl,
        (c0, c1),
        _data(target=len(concl) - 1, slot=slot, phi0=i0, shell1=i1),
    )


def mk_wd_tens_at(base: Base, c0: Proof, i0: int, c1: Proof, i1: int, slot: int) -> Proof:
    phi = c0.conclusion[i0]
    shell = c1.conclusion[i1]
    args = list(shell.args)
    if not isinstance(args[slot], FUnit):
        raise ValueError("designated wd_tens slot is not a unit")
    args[slot] = phi
    ctx = seq_minus(c0.conclusion, (i0,)) + seq_minus(c1.conclusion, (i1,))
    concl = ctx + (FApp(shell.conn, tuple(args)),)
    return Proof(
        WD_TENS,
        concl,
        (c0, c1),
        _data(target=len(concl) - 1, slot=slot, phi0=i0, shell1=i1),
    )


def mk_unitor(child: Proof, pos: int, cname: str, args: Sequence[Formula], slot: int) -> Proof:
    concl = seq_minus(child.conclusion, (pos,)) + (FApp(cname, tuple(args)),)
    return Proof(
        UNITOR,
        concl,
        (child,),
        _data(target=len(concl) - 1, slot=slot, premise_pos=pos),
    )


def mk_cut(c0: Proof, i0: int, c1: Proof, i1: int) -> Proof:
    ctx = seq_minus(c0.conclusion, (i0,)) + seq_minus(c1.conclusion, (i1,))
    return Proof(CUT, ctx, (c0, c1), _data(phi0=i0, nphi1=i1))


def mk_weak(child: Proof, f: Formula) -> Proof:
    concl = child.conclusion + (f,)
    return Proof(WEAK, concl, (child,), _data(target=len(concl) - 1))


def mk_contr(child: Proof, p1: int, p2: int) -> Proof:
    f = child.conclusion[p1]
    concl = seq_minus(child.conclusion, (p1, p2)) + (f,)
    return Proof(CONTR, concl, (child,), _data(target=len(concl) - 1, p1=p1, p2=p2))


def contract_surplus(p: Proof, target: Counter) -> Proof:
    """Contract duplicated occurrences until the conclusion matches ``target``
    as a multiset (used by additive-style GLK steps)."""
    cur = p
    while True:
        have = Counter(cur.conclusion)
        if have == target:
            return cur
        excess = None
        for f, k in have.items():
            if k > target.get(f, 0):
                excess = f
                break
        if excess is None:
            raise ValueError("conclusion lacks formulas of the target multiset")
        positions = [i for i, g in enumerate(cur.conclusion) if g == excess]
        cur = mk_contr(cur, positions[0], positions[1])


def mk_conr(
    base: Base, cname: str, children: Sequence[Proof], positions: Sequence[int]
) -> Proof:
    args = tuple(ch.conclusion[p] for ch, p in zip(children, positions))
    ctx: List[Formula] = []
    for ch, p in zip(children, positions):
        ctx.extend(seq_minus(ch.conclusion, (p,)))
    concl = tuple(ctx) + (FApp(cname, args),)
    return Proof(
        CONR,
        concl,
        tuple(children),
        _data(target=len(concl) - 1, phis=tuple(positions)),
    )


def mk_wd_par(child: Proof, pos: int, path: Tuple[int, ...]) -> Proof:
    """From |- Gamma, zeta[phi] infer |- Gamma, zeta[o], phi."""
    zf = child.conclusion[pos]
    phi = subformula_at(zf, path)
    shell = replace_at(zf, path, UNIT)
    ctx = seq_minus(child.conclusion, (pos,))
    concl = ctx + (shell, phi)
    return Proof(
        WD_PAR,
        concl,
        (child,),
        _data(
            target=len(concl) - 2,
            extracted=len(concl) - 1,
            path=tuple(path),
            premise_pos=pos,
        ),
    )


def mk_deep(c0: Proof, i0: int, c1: Proof, i1: int, zeta: Formula, path: Tuple[int, ...]) -> Proof:
    """zeta has a unit at ``path``; conclusion gets zeta[phi] for phi at i0."""
    phi = c0.conclusion[i0]
    target_f = replace_at(zeta, path, phi)
    ctx = seq_minus(c0.conclusion, (i0,)) + seq_minus(c1.conclusion, (i1,))
    concl = ctx + (target_f,)
    return Proof(
        DEEP,
        concl,
        (c0, c1),
        _data(target=len(concl) - 1, path=tuple(path), phi0=i0, psi1=i1),
    )


def mk_dconr_chi(
    children: Sequence[Proof],
    u: Formula,
    v: Formula,
    c_paths: Sequence[Tuple[int, ...]],
    d_paths: Sequence[Tuple[int, ...]],
    phi_pos: Sequence[int],
    psi_pos: Sequence[int],
) -> Proof:
    ctx: List[Formula] = []
    for ch, pp, qp in zip(children, phi_pos, psi_pos):
        ctx.extend(seq_minus(ch.conclusion, (pp, qp)))
    concl = tuple(ctx) + (u, v)
    return Proof(
        DCONR_CHI,
        concl,
        tuple(children),
        _data(
            c_target=len(concl) - 2,
            d_target=len(concl) - 1,
            c_paths=tuple(tuple(p) for p in c_paths),
            d_paths=tuple(tuple(p) for p in d_paths),
            phi_pos=tuple(phi_pos),
            psi_pos=tuple(psi_pos),
        ),
    )


# -- serialization -----------------------------------------------------------


def proof_to_json(p: Proof) -> dict:
    out = {
        "rule": p.rule,
        "conclusion": [render(f) for f in p.conclusion],
        "children": [proof_to_json(c) for c in p.children],
    }
    principal = []
    for key in ("target", "c_target", "d_target", "extracted"):
        v = p.get(key)
        if v is not None:
            principal.append(v)
    out["principal"] = principal
    pairs = p.get("pairs")
    if pairs is not None:
        out["sigma"] = [pr[0] for pr in pairs]
        out["tau"] = [pr[1] for pr in pairs]
    extra = {k: v for k, v in p.data}
    if extra:
        out["data"] = _jsonable(extra)
    return out


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def proof_from_json(data: dict, base: Base) -> Proof:
    children = tuple(proof_from_json(c, base) for c in data.get("children", []))
    conclusion = tuple(parse(s, base) for s in data["conclusion"])
    raw = data.get("data", {})
    fixed = {}
    for k, v in raw.items():
        fixed[k] = _tupled(v)
    return Proof(data["rule"], conclusion, children, tuple(sorted(fixed.items())))


def _tupled(value):
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value
