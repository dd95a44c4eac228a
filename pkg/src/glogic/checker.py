"""Rule checker for the sequent systems.

``check_proof`` validates every node of a proof against a rule system,
reporting one diagnostic per violated side condition.  Contexts are compared
as multisets; principal occurrences are those named by the node's instance
data.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from .connectives import PAR, TENS, Base, is_dual_pairing
from .formulas import (
    FApp,
    FLit,
    Formula,
    FUnit,
    UNIT,
    check_unitor,
    graph_of,
    is_pure,
    negate,
    quasi_subformulas,
    render,
    replace_at,
    subformula_at,
)
from .graphs import find_isomorphism
from . import proofs as P
from .proofs import Proof, Sequent, seq_minus, seq_multiset


@dataclass
class CheckResult:
    ok: bool
    errors: List[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _dual_formulas(f: Formula, g: Formula, base: Base) -> bool:
    return negate(f, base) == g or negate(g, base) == f


def check_proof(
    proof: Proof,
    system: FrozenSet[str],
    base: Base,
    allow_aux: bool = False,
    strict_analytic: bool = False,
) -> CheckResult:
    """Validate a proof against ``system``.

    ``allow_aux`` additionally admits the admissible-rule nodes (cut, AX,
    wd_par, deep, dconr_chi) so that transformer inputs can be checked before
    elimination.  ``strict_analytic`` asserts that every sequent consists of
    quasi-subformulas of the root conclusion.
    """
    errors: List[str] = []
    aux = {P.CUT, P.BIG_AX, P.WD_PAR, P.DEEP, P.DCONR_CHI}

    def fail(where: str, msg: str):
        errors.append("%s: %s" % (where, msg))

    def visit(node: Proof, where: str):
        rule = node.rule
        if rule not in system and not (allow_aux and rule in aux):
            fail(where, "rule %r not in system" % rule)
            return
        handler = _HANDLERS.get(rule)
        if handler is None:
            fail(where, "unknown rule %r" % rule)
            return
        msg = handler(node, base)
        if msg:
            fail(where, msg)
        for k, child in enumerate(node.children):
            visit(child, where + "." + str(k))

    visit(proof, "root")

    if strict_analytic and not errors:
        space = set()
        for f in proof.conclusion:
            space |= quasi_subformulas(f, base)

        def scan(node: Proof, where: str):
            for f in node.conclusion:
                if f not in space and not isinstance(f, FUnit):
                    fail(where, "formula %s outside quasi-subformula space" % render(f))
            for k, child in enumerate(node.children):
                scan(child, where + "." + str(k))

        scan(proof, "root")

    return CheckResult(not errors, errors)


def _ctx_match(node: Proof, removed_concl, removed_children) -> Optional[str]:
    """Multiset check: conclusion minus its principal occurrences equals the
    union of the children's conclusions minus their active occurrences."""
    want = Counter(seq_minus(node.conclusion, removed_concl))
    have: Counter = Counter()
    for child, removed in zip(node.children, removed_children):
        have.update(seq_minus(child.conclusion, removed))
    if want != have:
        return "context mismatch between conclusion and premises"
    return None


def _check_ax(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 0:
        return "ax takes no premises"
    if len(node.conclusion) != 2:
        return "ax concludes exactly two formulas"
    a, b = node.conclusion
    if not (isinstance(a, FLit) and isinstance(b, FLit)):
        return "ax applies to atoms only, not compound formulas"
    if a.atom != b.atom or a.positive == b.positive:
        return "not dual atoms"
    return None


def _check_big_ax(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 0 or len(node.conclusion) != 2:
        return "AX concludes exactly two formulas from no premises"
    a, b = node.conclusion
    if not _dual_formulas(a, b, base):
        return "AX formulas are not dual"
    if not (is_pure(a) or isinstance(a, FLit)):
        return "AX requires a pure formula"
    return None


def _check_par(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 1:
        return "par takes one premise"
    t = node.get("target")
    if t is None or not (0 <= t < len(node.conclusion)):
        return "par: bad target"
    f = node.conclusion[t]
    if not (isinstance(f, FApp) and f.conn == PAR):
        return "par: principal formula is not a par"
    want = Counter(seq_minus(node.conclusion, (t,)))
    want.update([f.args[0], f.args[1]])
    if want != Counter(node.children[0].conclusion):
        return "par: premise does not match the two components plus context"
    return None


def _check_tens(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 2:
        return "tens takes two premises"
    t, i0, i1 = node.get("target"), node.get("phi0"), node.get("psi1")
    c0, c1 = node.children
    try:
        f = node.conclusion[t]
        phi = c0.conclusion[i0]
        psi = c1.conclusion[i1]
    except (IndexError, TypeError):
        return "tens: bad occurrence indices"
    if not (isinstance(f, FApp) and f.conn == TENS):
        return "tens: principal formula is not a tens"
    if f.args != (phi, psi):
        return "tens: components do not match the premises"
    return _ctx_match(node, (t,), ((i0,), (i1,)))


def _check_mix(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 2:
        return "mix takes two premises"
    return _ctx_match(node, (), ((), ()))


def _check_dconr(node: Proof, base: Base) -> Optional[str]:
    ct, dt = node.get("c_target"), node.get("d_target")
    pairs = node.get("pairs")
    if ct is None or dt is None or pairs is None:
        return "dconr: missing instance data"
    try:
        cf = node.conclusion[ct]
        df = node.conclusion[dt]
    except IndexError:
        return "dconr: bad principal indices"
    if not (isinstance(cf, FApp) and isinstance(df, FApp)):
        return "dconr: principal formulas must be connective applications"
    if cf.conn not in base.connectives or df.conn != base.dual_of(cf.conn):
        return "dconr: second principal is not the dual connective"
    n = base.arity(cf.conn)
    if len(node.children) != n or len(pairs) != n:
        return "dconr: premise count differs from the arity"
    ps = [p for p, q, _, _ in pairs]
    qs = [q for p, q, _, _ in pairs]
    if sorted(ps) != list(range(n)) or sorted(qs) != list(range(n)):
        return "dconr: slot assignment is not a bijection"
    pairing = [0] * n
    for p, q, _, _ in pairs:
        pairing[p] = q
    if not is_dual_pairing(base.get(cf.conn), base.get(df.conn), tuple(pairing)):
        return "dconr: premise pairing is not a dualizing correspondence"
    removed = []
    for child, (p, q, ppos, qpos) in zip(node.children, pairs):
        try:
            if child.conclusion[ppos] != cf.args[p]:
                return "dconr: premise lacks slot %d of the connective" % p
            if child.conclusion[qpos] != df.args[q]:
                return "dconr: premise lacks slot %d of the dual" % q
        except IndexError:
            return "dconr: bad premise occurrence index"
        if ppos == qpos:
            return "dconr: one occurrence used twice"
        removed.append((ppos, qpos))
    return _ctx_match(node, (ct, dt), removed)


def _check_wd_tens(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 2:
        return "wd_tens takes two premises"
    t, slot = node.get("target"), node.get("slot")
    i0, i1 = node.get("phi0"), node.get("shell1")
    c0, c1 = node.children
    try:
        f = node.conclusion[t]
        phi = c0.conclusion[i0]
        shell = c1.conclusion[i1]
    except (IndexError, TypeError):
        return "wd_tens: bad occurrence indices"
    if not isinstance(f, FApp) or f.conn not in base.connectives:
        return "wd_tens: principal formula is not a connective application"
    if not (0 <= slot < len(f.args)):
        return "wd_tens: bad slot"
    if f.args[slot] != phi:
        return "wd_tens: extracted factor differs from the first premise"
    want = list(f.args)
    want[slot] = UNIT
    if shell != FApp(f.conn, tuple(want)):
        return "wd_tens: second premise is not the connective with a unit slot"
    return _ctx_match(node, (t,), ((i0,), (i1,)))


def _check_unitor_node(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 1:
        return "unitor takes one premise"
    t, slot, pos = node.get("target"), node.get("slot"), node.get("premise_pos")
    try:
        f = node.conclusion[t]
        prem = node.children[0].conclusion[pos]
    except (IndexError, TypeError):
        return "unitor: bad occurrence indices"
    if not isinstance(f, FApp) or f.conn not in base.connectives:
        return "unitor: principal formula is not a connective application"
    msg = check_unitor(prem, f.conn, f.args, slot, base)
    if msg:
        return "unitor: " + msg
    return _ctx_match(node, (t,), ((pos,),))


def _check_cut(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 2:
        return "cut takes two premises"
    i0, i1 = node.get("phi0"), node.get("nphi1")
    c0, c1 = node.children
    try:
        phi = c0.conclusion[i0]
        nphi = c1.conclusion[i1]
    except (IndexError, TypeError):
        return "cut: bad occurrence indices"
    if not _dual_formulas(phi, nphi, base):
        return "cut: active formulas are not dual"
    return _ctx_match(node, (), ((i0,), (i1,)))


def _check_weak(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 1:
        return "w takes one premise"
    t = node.get("target")
    if t is None or not (0 <= t < len(node.conclusion)):
        return "w: bad target"
    if Counter(seq_minus(node.conclusion, (t,))) != Counter(node.children[0].conclusion):
        return "w: premise must be the conclusion without the weakened formula"
    return None


def _check_contr(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 1:
        return "c takes one premise"
    t, p1, p2 = node.get("target"), node.get("p1"), node.get("p2")
    child = node.children[0]
    try:
        f = node.conclusion[t]
        if child.conclusion[p1] != f or child.conclusion[p2] != f or p1 == p2:
            return "c: premise does not duplicate the contracted formula"
    except (IndexError, TypeError):
        return "c: bad occurrence indices"
    return _ctx_match(node, (t,), ((p1, p2),))


def _check_conr(node: Proof, base: Base) -> Optional[str]:
    t = node.get("target")
    phis = node.get("phis")
    try:
        f = node.conclusion[t]
    except (IndexError, TypeError):
        return "conr: bad target"
    if not isinstance(f, FApp) or f.conn not in base.connectives:
        return "conr: principal formula is not a connective application"
    n = base.arity(f.conn)
    if len(node.children) != n or phis is None or len(phis) != n:
        return "conr: premise count differs from the arity"
    removed = []
    for k, (child, pos) in enumerate(zip(node.children, phis)):
        try:
            if child.conclusion[pos] != f.args[k]:
                return "conr: premise %d lacks slot %d" % (k, k)
        except IndexError:
            return "conr: bad premise occurrence index"
        removed.append((pos,))
    return _ctx_match(node, (t,), removed)


def _check_wd_par(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 1:
        return "wd_par takes one premise"
    t, ex = node.get("target"), node.get("extracted")
    path, pos = node.get("path"), node.get("premise_pos")
    child = node.children[0]
    try:
        shell = node.conclusion[t]
        phi = node.conclusion[ex]
        prem = child.conclusion[pos]
    except (IndexError, TypeError):
        return "wd_par: bad occurrence indices"
    if not path:
        return "wd_par: trivial extraction path"
    try:
        if subformula_at(shell, path) != UNIT:
            return "wd_par: conclusion does not carry a unit at the path"
        if replace_at(shell, path, phi) != prem:
            return "wd_par: premise does not match the re-plugged formula"
    except Exception:
        return "wd_par: path leaves the formula"
    return _ctx_match(node, (t, ex), ((pos,),))


def _check_deep(node: Proof, base: Base) -> Optional[str]:
    if len(node.children) != 2:
        return "deep takes two premises"
    t, path = node.get("target"), node.get("path")
    i0, i1 = node.get("phi0"), node.get("psi1")
    c0, c1 = node.children
    try:
        zf = node.conclusion[t]
        phi = c0.conclusion[i0]
        psi = c1.conclusion[i1]
    except (IndexError, TypeError):
        return "deep: bad occurrence indices"
    if not path:
        return "deep: trivial context"
    try:
        if subformula_at(zf, path) != phi:
            return "deep: conclusion does not carry the first premise formula"
        shell = replace_at(zf, path, UNIT)
    except Exception:
        return "deep: path leaves the formula"
    g1 = graph_of(shell, base)
    g2 = graph_of(psi, base)
    if find_isomorphism(g1, g2) is None:
        return "deep: context interpretation differs from the second premise"
    return _ctx_match(node, (t,), ((i0,), (i1,)))


def _check_dconr_chi(node: Proof, base: Base) -> Optional[str]:
    ct, dt = node.get("c_target"), node.get("d_target")
    c_paths, d_paths = node.get("c_paths"), node.get("d_paths")
    phi_pos, psi_pos = node.get("phi_pos"), node.get("psi_pos")
    if None in (ct, dt, c_paths, d_paths, phi_pos, psi_pos):
        return "dconr_chi: missing instance data"
    try:
        u = node.conclusion[ct]
        v = node.conclusion[dt]
    except IndexError:
        return "dconr_chi: bad principal indices"
    n = len(node.children)
    if not (len(c_paths) == len(d_paths) == len(phi_pos) == len(psi_pos) == n):
        return "dconr_chi: inconsistent premise data"
    u_marked, v_marked = u, v
    removed = []
    for k in range(n):
        try:
            phi = node.children[k].conclusion[phi_pos[k]]
            psi = node.children[k].conclusion[psi_pos[k]]
            if subformula_at(u, c_paths[k]) != phi:
                return "dconr_chi: premise %d differs from the named subformula" % k
            if subformula_at(v, d_paths[k]) != psi:
                return "dconr_chi: premise %d differs from the named dual subformula" % k
        except Exception:
            return "dconr_chi: bad path or occurrence"
        marker = FLit("_slot%d" % k, True)
        u_marked = replace_at(u_marked, c_paths[k], marker)
        v_marked = replace_at(v_marked, d_paths[k], FLit("_slot%d" % k, False))
        removed.append((phi_pos[k], psi_pos[k]))
    if negate(u_marked, base) != v_marked:
        from .formulas import equiv

        if not equiv(negate(u_marked, base), v_marked, base):
            return "dconr_chi: shells are not dual synthetic connectives"
    return _ctx_match(node, (ct, dt), removed)


_HANDLERS = {
    P.AX: _check_ax,
    P.BIG_AX: _check_big_ax,
    P.PAR_R: _check_par,
    P.TENS_R: _check_tens,
    P.MIX: _check_mix,
    P.DCONR: _check_dconr,
    P.WD_TENS: _check_wd_tens,
    P.UNITOR: _check_unitor_node,
    P.CUT: _check_cut,
    P.WEAK: _check_weak,
    P.CONTR: _check_contr,
    P.CONR: _check_conr,
    P.WD_PAR: _check_wd_par,
    P.DEEP: _check_deep,
    P.DCONR_CHI: _check_dconr_chi,
}
