"""Bounded-complete backward proof search.

The search explores the analytic space of a sequent (quasi-subformulas only:
unitor premises use the canonical voided formula).  Results are memoized on
the sequent multiset; "refuted" is reported only when the space below the
sequent was exhausted without hitting the depth bound or an on-path repeat,
so a negative answer really is a refutation for the cut-free system.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .connectives import PAR, TENS, Base, dual_correspondences
from .formulas import (
    FApp,
    FLit,
    Formula,
    FUnit,
    UNIT,
    canonical_void,
    is_pure,
    render,
)
from . import proofs as P
from .proofs import Proof, Sequent, seq_minus

PROVED = "proved"
REFUTED = "refuted"
UNKNOWN = "unknown"


@dataclass
class SearchResult:
    status: str
    proof: Optional[Proof] = None

    def __bool__(self):
        return self.status == PROVED


_render_cache: Dict[Formula, str] = {}


def _render1(f: Formula) -> str:
    s = _render_cache.get(f)
    if s is None:
        s = render(f)
        _render_cache[f] = s
    return s


def _key(seq: Sequent) -> Tuple[str, ...]:
    return tuple(sorted(_render1(f) for f in seq))


class Prover:
    def __init__(
        self,
        system: FrozenSet[str],
        base: Base,
        depth_bound: int = 400,
        contraction_cap: int = 2,
        goal_cap: int = 400000,
    ):
        self.system = system
        self.base = base
        self.depth_bound = depth_bound
        self.contraction_cap = contraction_cap
        self.goal_cap = goal_cap
        self.memo: Dict[Tuple[str, ...], Tuple[str, Optional[Proof]]] = {}

    # -- public -------------------------------------------------------------

    def prove(self, seq: Sequence[Formula]) -> SearchResult:
        """Lazy depth-first search first; if it cannot conclude (an on-path
        repeat, the depth bound or the node budget got in the way), saturate
        the reachable goal space and decide by least fixpoint."""
        self._dfs_budget = 20000
        status, proof, _ = self._explore(tuple(seq), set(), self.depth_bound)
        if status != UNKNOWN:
            return SearchResult(status, proof)
        return self._saturate(tuple(seq))

    # -- saturation ----------------------------------------------------------

    def _saturate(self, root: Sequent) -> SearchResult:
        goals: Dict[Tuple[str, ...], Tuple[Sequent, list]] = {}
        todo: List[Sequent] = [root]
        while todo:
            seq = todo.pop()
            key = _key(seq)
            if key in goals:
                continue
            cached = self.memo.get(key)
            if cached is not None and cached[0] == PROVED:
                goals[key] = (seq, [((), None, cached[1])])
                continue
            if len(goals) > self.goal_cap:
                return SearchResult(UNKNOWN)
            alts: list = []
            for candidate in self._moves(seq):
                if isinstance(candidate, Proof):
                    alts.append(((), None, candidate))
                else:
                    prems, build = candidate
                    alts.append((tuple(prems), build, None))
                    todo.extend(prems)
            goals[key] = (seq, alts)
        # fixpoint marking by rounds; a goal proved in round r only relies on
        # goals proved strictly earlier, so reconstruction is well-founded
        stage: Dict[Tuple[str, ...], int] = {}
        rnd = 0
        changed = True
        while changed:
            rnd += 1
            changed = False
            for key, (seq, alts) in goals.items():
                if key in stage:
                    continue
                for prems, build, leaf in alts:
                    if leaf is not None or all(
                        stage.get(_key(p), rnd) < rnd for p in prems
                    ):
                        stage[key] = rnd
                        changed = True
                        break
        rebuilt: Dict[Tuple[str, ...], Proof] = {}

        def rebuild(key: Tuple[str, ...]) -> Proof:
            if key in rebuilt:
                return rebuilt[key]
            seq, alts = goals[key]
            for prems, build, leaf in alts:
                if leaf is not None:
                    rebuilt[key] = leaf
                    return leaf
                if all(stage.get(_key(p), 10 ** 9) < stage[key] for p in prems):
                    kids = [
                        P.reorder_conclusion(rebuild(_key(p)), p) for p in prems
                    ]
                    out = P.reorder_conclusion(build(kids), seq)
                    rebuilt[key] = out
                    return out
            raise RuntimeError("saturation marking inconsistent")

        for key, (seq, alts) in goals.items():
            if key not in stage and key not in self.memo:
                self.memo[key] = (REFUTED, None)
        rkey = _key(root)
        if rkey in stage:
            proof = P.reorder_conclusion(rebuild(rkey), root)
            self.memo[rkey] = (PROVED, proof)
            return SearchResult(PROVED, proof)
        return SearchResult(REFUTED)

    # -- engine -------------------------------------------------------------

    def _explore(
        self, seq: Sequent, on_path: Set[Tuple[str, ...]], depth: int
    ) -> Tuple[str, Optional[Proof], bool]:
        """Returns (status, proof, tainted); tainted means the negative answer
        may be an artifact of an on-path repeat or the depth bound."""
        key = _key(seq)
        hit = self.memo.get(key)
        if hit is not None:
            proof = hit[1]
            if proof is not None:
                proof = P.reorder_conclusion(proof, seq)
            return hit[0], proof, False
        if key in on_path:
            return UNKNOWN, None, True
        if depth <= 0 or self._dfs_budget <= 0:
            return UNKNOWN, None, True
        self._dfs_budget -= 1
        on_path.add(key)
        tainted = False
        proof: Optional[Proof] = None
        try:
            for candidate in self._moves(seq):
                if isinstance(candidate, Proof):  # leaf rule
                    proof = candidate
                    break
                premises, build = candidate
                kids: List[Proof] = []
                failed = False
                for prem in premises:
                    status, kid, sub_taint = self._explore(prem, on_path, depth - 1)
                    tainted = tainted or sub_taint
                    if status != PROVED:
                        failed = True
                        break
                    kids.append(kid)
                if not failed:
                    proof = build(kids)
                    break
        finally:
            on_path.discard(key)
        if proof is not None:
            proof = P.reorder_conclusion(proof, seq)
            self.memo[key] = (PROVED, proof)
            return PROVED, proof, False
        if tainted:
            return UNKNOWN, None, True
        self.memo[key] = (REFUTED, None)
        return REFUTED, None, False

    # -- move generation ------------------------------------------------------

    def _trim(self, seq: Sequent) -> Sequent:
        from collections import Counter

        seen: Dict[Formula, int] = {}
        out = []
        for f in seq:
            k = seen.get(f, 0)
            if k < self.contraction_cap:
                out.append(f)
                seen[f] = k + 1
        return tuple(out)

    def _norm_move(self, move):
        """Cap occurrence multiplicities in premises (bounded-contraction
        discipline for systems with w/c); trimmed copies are restored by
        weakenings when the proof is assembled."""
        if P.CONTR not in self.system:
            return move
        premises, build = move
        trimmed = tuple(self._trim(p) for p in premises)
        if trimmed == tuple(premises):
            return move

        def build2(kids):
            from collections import Counter

            fixed = []
            for kid, orig, tr in zip(kids, premises, trimmed):
                cur = kid
                need = Counter(orig) - Counter(tr)
                for f, k in need.items():
                    for _ in range(k):
                        cur = P.mk_weak(cur, f)
                fixed.append(P.reorder_conclusion(cur, orig))
            return build(fixed)

        return (trimmed, build2)

    def _moves(self, seq: Sequent):
        for move in self._raw_moves(seq):
            if isinstance(move, Proof):
                yield move
            else:
                yield self._norm_move(move)

    def _raw_moves(self, seq: Sequent):
        sysr = self.system
        n = len(seq)

        if P.AX in sysr and n == 2:
            a, b = seq
            if (
                isinstance(a, FLit)
                and isinstance(b, FLit)
                and a.atom == b.atom
                and a.positive != b.positive
            ):
                yield Proof(P.AX, seq)
                return
        if P.WEAK in sysr:
            leaf = self._ax_weak_move(seq)
            if leaf is not None:
                yield leaf
                return

        # invertible par applications first (pure components only: with a
        # vacuous side the unitor route may be the only one)
        if P.PAR_R in sysr:
            for i, f in enumerate(seq):
                if isinstance(f, FApp) and f.conn == PAR:
                    if is_pure(f.args[0]) and is_pure(f.args[1]):
                        prem = seq_minus(seq, (i,)) + (f.args[0], f.args[1])
                        m = len(prem)
                        yield ((prem,), lambda kids, i=i: P.mk_par(kids[0], m - 2, m - 1))
                        return

        for move in self._par_moves(seq):
            yield move
        for move in self._unitor_moves(seq):
            yield move
        for move in self._tens_moves(seq):
            yield move
        for move in self._dconr_moves(seq):
            yield move
        for move in self._wd_tens_moves(seq):
            yield move
        for move in self._mix_moves(seq):
            yield move
        for move in self._conr_moves(seq):
            yield move
        for move in self._glk_moves(seq):
            yield move

    def _par_moves(self, seq: Sequent):
        if P.PAR_R not in self.system:
            return
        for i, f in enumerate(seq):
            if isinstance(f, FApp) and f.conn == PAR:
                if is_pure(f.args[0]) and is_pure(f.args[1]):
                    continue  # handled eagerly
                prem = seq_minus(seq, (i,)) + (f.args[0], f.args[1])
                m = len(prem)
                yield ((prem,), lambda kids: P.mk_par(kids[0], m - 2, m - 1))

    def _tens_moves(self, seq: Sequent):
        if P.TENS_R not in self.system:
            return
        additive = P.CONTR in self.system
        for i, f in enumerate(seq):
            if isinstance(f, FApp) and f.conn == TENS:
                ctx = [j for j in range(len(seq)) if j != i]
                if additive:
                    # with w/c available the context may go to both premises;
                    # the surplus copy is contracted away below the tens node
                    gamma = tuple(seq[j] for j in ctx)
                    prem0 = gamma + (f.args[0],)
                    prem1 = (f.args[1],) + gamma
                    from collections import Counter

                    target = Counter(seq)
                    yield (
                        (prem0, prem1),
                        lambda kids, a=len(prem0) - 1, t=target: P.contract_surplus(
                            P.mk_tens(kids[0], a, kids[1], 0), t
                        ),
                    )
                    continue
                for left in _subsets(ctx):
                    right = [j for j in ctx if j not in left]
                    prem0 = tuple(seq[j] for j in left) + (f.args[0],)
                    prem1 = (f.args[1],) + tuple(seq[j] for j in right)
                    yield (
                        (prem0, prem1),
                        lambda kids, a=len(prem0) - 1: P.mk_tens(kids[0], a, kids[1], 0),
                    )

    def _dconr_moves(self, seq: Sequent):
        if P.DCONR not in self.system:
            return
        for i, j in itertools.permutations(range(len(seq)), 2):
            f, g = seq[i], seq[j]
            if not (isinstance(f, FApp) and isinstance(g, FApp)):
                continue
            if f.conn not in self.base.connectives:
                continue
            if g.conn != self.base.dual_of(f.conn):
                continue
            if f.conn in (PAR, TENS):
                continue  # covered by par/tens moves
            cn = self.base.get(f.conn)
            dn = self.base.get(g.conn)
            arity = cn.arity
            ctx = [k for k in range(len(seq)) if k not in (i, j)]
            additive = P.CONTR in self.system
            for pairing in dual_correspondences(cn, dn):
                if additive:
                    from collections import Counter

                    gamma = tuple(seq[c] for c in ctx)
                    premises = []
                    builds = []
                    for k in range(arity):
                        prem = gamma + (f.args[k], g.args[pairing[k]])
                        premises.append(prem)
                        builds.append((k, pairing[k], len(prem) - 2, len(prem) - 1))
                    target = Counter(seq)
                    yield (
                        tuple(premises),
                        lambda kids, b=tuple(builds), cname=f.conn, t=target: P.contract_surplus(
                            P.mk_dconr(self.base, cname, kids, b), t
                        ),
                    )
                    continue
                for assign in _distributions(ctx, arity):
                    premises = []
                    builds = []
                    for k in range(arity):
                        ctx_k = tuple(seq[c] for c in assign[k])
                        prem = ctx_k + (f.args[k], g.args[pairing[k]])
                        premises.append(prem)
                        builds.append((k, pairing[k], len(prem) - 2, len(prem) - 1))
                    yield (
                        tuple(premises),
                        lambda kids, b=tuple(builds), cname=f.conn: P.mk_dconr(
                            self.base, cname, kids, b
                        ),
                    )

    def _wd_tens_moves(self, seq: Sequent):
        if P.WD_TENS not in self.system:
            return
        for i, f in enumerate(seq):
            if not isinstance(f, FApp) or f.conn in (PAR, TENS):
                continue
            if f.conn not in self.base.connectives:
                continue
            ctx = [k for k in range(len(seq)) if k != i]
            for slot, arg in enumerate(f.args):
                if isinstance(arg, FUnit):
                    continue
                shell_args = list(f.args)
                shell_args[slot] = UNIT
                shell = FApp(f.conn, tuple(shell_args))
                for left in _subsets(ctx):
                    right = [k for k in ctx if k not in left]
                    prem0 = tuple(seq[k] for k in left) + (arg,)
                    prem1 = tuple(seq[k] for k in right) + (shell,)
                    yield (
                        (prem0, prem1),
                        lambda kids, a=len(prem0) - 1, b=len(prem1) - 1, s=slot: P.mk_wd_tens_at(
                            self.base, kids[0], a, kids[1], b, s
                        ),
                    )

    def _unitor_moves(self, seq: Sequent):
        if P.UNITOR not in self.system:
            return
        for i, f in enumerate(seq):
            if not isinstance(f, FApp):
                continue
            unit_slots = [k for k, a in enumerate(f.args) if isinstance(a, FUnit)]
            if not unit_slots:
                continue
            for slot in unit_slots:
                try:
                    prem_f = canonical_void(f.conn, f.args, slot, self.base)
                except Exception:
                    continue
                if isinstance(prem_f, FUnit):
                    continue  # premise would be a bare unit: dead branch
                prem = seq_minus(seq, (i,)) + (prem_f,)
                yield (
                    (prem,),
                    lambda kids, pos=len(prem) - 1, cname=f.conn, args=f.args, s=slot: P.mk_unitor(
                        kids[0], pos, cname, args, s
                    ),
                )

    def _mix_moves(self, seq: Sequent):
        if P.MIX not in self.system or len(seq) < 2:
            return
        idxs = list(range(len(seq)))
        for left in _subsets(idxs[1:]):
            left0 = (0,) + tuple(left)
            right = tuple(k for k in idxs if k not in left0)
            if not right:
                continue
            prem0 = tuple(seq[k] for k in left0)
            prem1 = tuple(seq[k] for k in right)
            yield ((prem0, prem1), lambda kids: P.mk_mix(kids[0], kids[1]))

    def _conr_moves(self, seq: Sequent):
        if P.CONR not in self.system:
            return
        for i, f in enumerate(seq):
            if not isinstance(f, FApp) or f.conn in (PAR, TENS):
                continue
            if f.conn not in self.base.connectives:
                continue
            arity = self.base.arity(f.conn)
            ctx = [k for k in range(len(seq)) if k != i]
            for assign in _distributions(ctx, arity):
                premises = []
                positions = []
                for k in range(arity):
                    prem = tuple(seq[c] for c in assign[k]) + (f.args[k],)
                    premises.append(prem)
                    positions.append(len(prem) - 1)
                yield (
                    tuple(premises),
                    lambda kids, pos=tuple(positions), cname=f.conn: P.mk_conr(
                        self.base, cname, kids, pos
                    ),
                )

    def _glk_moves(self, seq: Sequent):
        """Weakening is absorbed at the axioms (see _ax_weak_move) and
        contraction by the additive contexts of tens/dconr; explicit
        duplication is only offered for prime-connective formulas, which the
        additive absorption does not cover, up to the contraction cap."""
        if P.CONTR not in self.system:
            return
        seen = set()
        for i, f in enumerate(seq):
            if not isinstance(f, FApp) or f.conn in (PAR, TENS):
                continue
            if f in seen:
                continue
            seen.add(f)
            if seq.count(f) >= self.contraction_cap:
                continue
            prem = seq + (f,)
            yield (
                (prem,),
                lambda kids, p1=i, p2=len(seq): P.mk_contr(kids[0], p1, p2),
            )

    def _ax_weak_move(self, seq: Sequent) -> Optional[Proof]:
        """With weakening in the system, any sequent containing a dual pair
        of atoms is provable outright."""
        lits = {}
        for i, f in enumerate(seq):
            if isinstance(f, FLit):
                partner = lits.get((f.atom, not f.positive))
                if partner is not None:
                    proof = P.mk_ax(f.atom)
                    for j, g in enumerate(seq):
                        if j in (i, partner):
                            continue
                        proof = P.mk_weak(proof, g)
                    return P.reorder_conclusion(proof, seq)
                lits.setdefault((f.atom, f.positive), i)
        return None


def _subsets(items: Sequence[int]):
    for r in range(len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield combo


def _distributions(items: Sequence[int], bins: int):
    """All ways to deal the items into ordered bins."""
    if not items:
        yield tuple(() for _ in range(bins))
        return
    for rest in _distributions(items[1:], bins):
        for b in range(bins):
            yield tuple(
                rest[k] + (items[0],) if k == b else rest[k] for k in range(bins)
            )


def prove(
    seq: Sequence[Formula],
    system,
    base: Base,
    depth_bound: int = 400,
    contraction_cap: int = 2,
    prover: Optional[Prover] = None,
) -> SearchResult:
    if isinstance(system, str):
        system = P.SYSTEMS[system]
    if prover is None:
        prover = Prover(system, base, depth_bound, contraction_cap)
    return prover.prove(seq)
