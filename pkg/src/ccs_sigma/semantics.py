"""Operational semantics.

Two independent rule sets live here:

* :func:`ccsp_step` -- the unlabeled calculus, all enabled transitions.
* :func:`step` -- complete processes ``P || S`` (optionally with an
  independent scheduler ``T``) where the scheduler picks the transition by
  label.  Scheduler choice is resolved first, trying operands in order; the
  selected single move is then derived structurally.  More than one
  derivation for the selected move raises :class:`AmbiguousStep`.

Pairs ``sigma(l1, l2)`` are accepted in either orientation: one of the two
labels must justify an input and the other the complementary output.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .distribution import Distribution
from .terms import (
    TAU, Action, Bang, Hole, Label, Nil, Par, Prefix, Process, ProbSum, Protect, Restrict,
    SChoice, Scheduler, Sigma, SigmaPair, Sum, relabel,
)


# ---------------------------------------------------------------------------
# scheduler moves


@dataclass(frozen=True, slots=True)
class Single:
    label: Label

    def __str__(self):
        return f"sigma({self.label})"


@dataclass(frozen=True, slots=True)
class Pair:
    first: Label
    second: Label

    def __str__(self):
        return f"sigma({self.first},{self.second})"


@dataclass(frozen=True, slots=True)
class Delegate:
    """Selecting a protected block; steps exactly like :class:`Single`."""

    label: Label

    def __str__(self):
        return f"sigma({self.label})"


Move = Union[Single, Pair, Delegate]


def move_to_scheduler(move: Move, cont: Scheduler) -> Scheduler:
    if isinstance(move, Pair):
        return SigmaPair(move.first, move.second, cont)
    return Sigma(move.label, cont)


def resolve(s: Scheduler) -> list[tuple[Move, Scheduler]]:
    """Single moves offered by ``s`` in the order the TEST rule tries them."""
    if isinstance(s, Sigma):
        return [(Single(s.label), s.cont)]
    if isinstance(s, SigmaPair):
        return [(Pair(s.first, s.second), s.cont)]
    if isinstance(s, SChoice):
        out = []
        for o in s.options:
            out.extend(resolve(o))
        return out
    return []


# ---------------------------------------------------------------------------
# derivations


class _AnyIndep:
    """Stand-in for 'every possible independent scheduler' (determinism checks)."""

    def __repr__(self):
        return "ANY"


ANY_INDEP = _AnyIndep()


@dataclass(frozen=True, slots=True)
class Derivation:
    action: Action
    dist: Distribution          # over processes
    indep: object               # independent scheduler after the step
    rule: tuple                 # derivation tree, used to tell derivations apart
    sync: tuple | None = None   # (channel, input label, output label) for COM/BANG2


class AmbiguousStep(Exception):
    """The selected move admits more than one derivation."""

    def __init__(self, process: Process, move, derivations: list[Derivation]):
        self.process = process
        self.move = move
        self.derivations = derivations
        rules = "; ".join(format_rule(d.rule) for d in derivations[:2])
        super().__init__(f"{move} has {len(derivations)} derivations: {rules}")


def format_rule(rule: tuple) -> str:
    name, *rest = rule
    args = []
    for r in rest:
        if isinstance(r, tuple):
            args.append(format_rule(r))
        else:
            args.append(str(r))
    return f"{name}({', '.join(args)})" if args else name


def derive(p: Process, move: Move, indep=None) -> list[Derivation]:
    """All derivations of a transition of ``p`` under the single move ``move``."""
    if isinstance(move, Pair):
        return _pair(p, move.first, move.second, indep)
    return _single(p, move.label, indep)


def distinct(ds: list[Derivation]) -> list[Derivation]:
    """Derivations with pairwise different rule trees."""
    seen = {}
    for d in ds:
        seen.setdefault(d.rule, d)
    return list(seen.values())


def _single(p: Process, lab: Label, indep) -> list[Derivation]:
    if lab not in p.labels:
        return []
    t = type(p)
    if t is Prefix:
        if p.label == lab:
            return [Derivation(p.action, Distribution.dirac(p.cont), indep, ("ACT", lab))]
        return []
    if t is ProbSum:
        if p.label == lab:
            mu = Distribution((q, w) for w, q in p.branches)
            return [Derivation(TAU, mu, indep, ("PROB", lab))]
        return []
    if t is Protect:
        if p.label == lab:
            return _indep(p, indep)
        return []
    if t is Restrict:
        a = p.channel
        return [Derivation(d.action, d.dist.map(lambda x: Restrict(a, x)), d.indep, ("RES", d.rule), d.sync)
                for d in _single(p.body, lab, indep) if d.action.channel != a]
    if t is Sum:
        return ([_wrap(d, "SUM1") for d in _single(p.left, lab, indep)]
                + [_wrap(d, "SUM2") for d in _single(p.right, lab, indep)])
    if t is Par:
        q, r = p.left, p.right
        return ([Derivation(d.action, d.dist.map(lambda x: Par(x, r)), d.indep, ("PAR1", d.rule), d.sync)
                 for d in _single(q, lab, indep)]
                + [Derivation(d.action, d.dist.map(lambda x: Par(q, x)), d.indep, ("PAR2", d.rule), d.sync)
                   for d in _single(r, lab, indep)])
    if t is Bang:
        ds = _single(p.body, lab, indep)
        if not ds:
            return []
        rest = relabel(p, "1")
        return [Derivation(d.action, d.dist.map(lambda x: Par(relabel(x, "0"), rest)), d.indep,
                           ("BANG1", d.rule), d.sync) for d in ds]
    return []


def _wrap(d: Derivation, name: str) -> Derivation:
    return Derivation(d.action, d.dist, d.indep, (name, d.rule), d.sync)


def _indep(p: Protect, indep) -> list[Derivation]:
    if indep is None:
        return []
    if indep is ANY_INDEP:
        out = []
        for m in candidate_moves(p.body):
            for d in derive(p.body, m, None):
                out.append(Derivation(d.action, d.dist, ANY_INDEP, ("INDEP", p.label)))
        return out
    for m, cont in resolve(indep):
        ds = distinct(derive(p.body, m, None))
        if len(ds) > 1:
            raise AmbiguousStep(p.body, m, ds)
        if ds:
            d = ds[0]
            return [Derivation(d.action, d.dist, cont, ("INDEP", p.label, d.rule), d.sync)]
    return []


def _pair(p: Process, l1: Label, l2: Label, indep) -> list[Derivation]:
    labs = p.labels
    if l1 not in labs or l2 not in labs:
        return []
    t = type(p)
    if t is Restrict:
        a = p.channel
        return [Derivation(d.action, d.dist.map(lambda x: Restrict(a, x)), d.indep, ("RES", d.rule), d.sync)
                for d in _pair(p.body, l1, l2, indep)]
    if t is Sum:
        return ([_wrap(d, "SUM1") for d in _pair(p.left, l1, l2, indep)]
                + [_wrap(d, "SUM2") for d in _pair(p.right, l1, l2, indep)])
    if t is Par:
        q, r = p.left, p.right
        out = [Derivation(d.action, d.dist.map(lambda x: Par(x, r)), d.indep, ("PAR1", d.rule), d.sync)
               for d in _pair(q, l1, l2, indep)]
        out += [Derivation(d.action, d.dist.map(lambda x: Par(q, x)), d.indep, ("PAR2", d.rule), d.sync)
                for d in _pair(r, l1, l2, indep)]
        orientations = [(l1, l2)] if l1 == l2 else [(l1, l2), (l2, l1)]
        for xl, xr in orientations:
            lefts = [d for d in _single(q, xl, None) if not d.action.is_tau]
            if not lefts:
                continue
            rights = [d for d in _single(r, xr, None) if not d.action.is_tau]
            for dl in lefts:
                for dr in rights:
                    if dr.action.channel != dl.action.channel or dr.action.output == dl.action.output:
                        continue
                    (ql,) = dl.dist.support()
                    (rr,) = dr.dist.support()
                    if dl.action.output:
                        sync = (dl.action.channel, xr, xl)
                    else:
                        sync = (dl.action.channel, xl, xr)
                    out.append(Derivation(TAU, Distribution.dirac(Par(ql, rr)), indep,
                                          ("COM", dl.rule, dr.rule), sync))
        return out
    if t is Bang:
        body = p.body
        out = []
        ds = _pair(body, l1, l2, indep)
        if ds:
            rest = relabel(p, "1")
            out += [Derivation(d.action, d.dist.map(lambda x: Par(relabel(x, "0"), rest)), d.indep,
                               ("BANG1", d.rule), d.sync) for d in ds]
        orientations = [(l1, l2)] if l1 == l2 else [(l1, l2), (l2, l1)]
        for xi, xo in orientations:
            ins = [d for d in _single(body, xi, None) if not d.action.is_tau and not d.action.output]
            if not ins:
                continue
            outs = [d for d in _single(body, xo, None) if d.action.output]
            for di in ins:
                for do in outs:
                    if do.action.channel != di.action.channel:
                        continue
                    (p1,) = di.dist.support()
                    (p2,) = do.dist.support()
                    target = Par(Par(relabel(p1, "0"), relabel(p2, "10")), relabel(p, "11"))
                    out.append(Derivation(TAU, Distribution.dirac(target), indep,
                                          ("BANG2", di.rule, do.rule), (di.action.channel, xi, xo)))
        return out
    return []


# ---------------------------------------------------------------------------
# moves available in a process


def active_sites(p: Process) -> list[Process]:
    """Prefix, probabilistic-sum and protect nodes that are not guarded."""
    sites = []
    stack = [p]
    while stack:
        t = stack.pop()
        if isinstance(t, (Prefix, ProbSum, Protect)):
            sites.append(t)
        elif isinstance(t, (Par, Sum)):
            stack.append(t.right)
            stack.append(t.left)
        elif isinstance(t, (Restrict, Bang)):
            stack.append(t.body)
    return sites


def candidate_moves(p: Process) -> list[Move]:
    """Moves worth trying on ``p``: every unguarded label, and every pair of an
    unguarded input and unguarded output on the same channel."""
    sites = active_sites(p)
    moves: dict[Move, None] = {}
    for s in sites:
        if s.label is None:
            continue
        if isinstance(s, Protect):
            moves.setdefault(Delegate(s.label), None)
        else:
            moves.setdefault(Single(s.label), None)
    inputs = [s for s in sites if isinstance(s, Prefix) and s.label is not None
              and s.action.channel is not None and not s.action.output]
    outputs = [s for s in sites if isinstance(s, Prefix) and s.label is not None and s.action.output]
    seen = set()
    for i in inputs:
        for o in outputs:
            if i.action.channel != o.action.channel:
                continue
            key = frozenset((i.label, o.label))
            if key in seen:
                continue
            seen.add(key)
            moves.setdefault(Pair(i.label, o.label), None)
    return list(moves)


def enabled_moves(p: Process, indep=None) -> dict[Move, Derivation]:
    """Moves with a transition from ``p``, each with its unique derivation.

    Raises :class:`AmbiguousStep` when a move has several derivations.
    """
    out = {}
    for m in candidate_moves(p):
        ds = distinct(derive(p, m, indep))
        if len(ds) > 1:
            raise AmbiguousStep(p, m, ds)
        if ds:
            out[m] = ds[0]
    return out


def can_move(p: Process, indep=None) -> bool:
    return any(derive(p, m, indep) for m in candidate_moves(p))


# ---------------------------------------------------------------------------
# complete processes


@dataclass(frozen=True, slots=True)
class CompleteState:
    process: Process
    scheduler: Scheduler
    indep: Scheduler | None = None


@dataclass(frozen=True, slots=True)
class Step:
    action: Action
    dist: Distribution      # over CompleteState
    move: Move
    derivation: Derivation


@dataclass(frozen=True, slots=True)
class StuckProcess:
    pass


@dataclass(frozen=True, slots=True)
class StuckScheduler:
    pass


STUCK_PROCESS = StuckProcess()
STUCK_SCHEDULER = StuckScheduler()

StepResult = Union[Step, StuckProcess, StuckScheduler]


def step(cs: CompleteState) -> StepResult:
    p, t = cs.process, cs.indep
    for move, cont in resolve(cs.scheduler):
        ds = distinct(derive(p, move, t))
        if len(ds) > 1:
            raise AmbiguousStep(p, move, ds)
        if ds:
            d = ds[0]
            tnext = d.indep
            return Step(d.action, d.dist.map(lambda x: CompleteState(x, cont, tnext)), move, d)
    if can_move(p, t):
        return STUCK_SCHEDULER
    return STUCK_PROCESS


# ---------------------------------------------------------------------------
# unlabeled calculus


def ccsp_step(p: Process) -> list[tuple[Action, Distribution]]:
    """Every transition of ``p`` under the unlabeled rules (labels ignored)."""
    seen: dict[tuple[Action, Distribution], None] = {}
    for tr in _ccsp(p):
        seen.setdefault(tr, None)
    return list(seen)


def _ccsp(p: Process) -> list[tuple[Action, Distribution]]:
    if isinstance(p, Prefix):
        return [(p.action, Distribution.dirac(p.cont))]
    if isinstance(p, ProbSum):
        return [(TAU, Distribution.convex((w, Distribution.dirac(q)) for w, q in p.branches))]
    if isinstance(p, Restrict):
        a = p.channel
        return [(act, mu.map(lambda x: Restrict(a, x))) for act, mu in _ccsp(p.body) if act.channel != a]
    if isinstance(p, Sum):
        return _ccsp(p.left) + _ccsp(p.right)
    if isinstance(p, Par):
        q, r = p.left, p.right
        lt, rt = _ccsp(q), _ccsp(r)
        out = [(act, mu.map(lambda x: Par(x, r))) for act, mu in lt]
        out += [(act, mu.map(lambda x: Par(q, x))) for act, mu in rt]
        for a1, m1 in lt:
            if a1.is_tau:
                continue
            for a2, m2 in rt:
                if not a2.is_tau and a2 == a1.complement():
                    (x,) = m1.support()
                    (y,) = m2.support()
                    out.append((TAU, Distribution.dirac(Par(x, y))))
        return out
    if isinstance(p, Bang):
        bt = _ccsp(p.body)
        out = [(act, mu.map(lambda x: Par(x, p))) for act, mu in bt]
        for a1, m1 in bt:
            if a1.is_tau or a1.output:
                continue
            for a2, m2 in bt:
                if a2.output and a2.channel == a1.channel:
                    (x,) = m1.support()
                    (y,) = m2.support()
                    out.append((TAU, Distribution.dirac(Par(Par(x, y), p))))
        return out
    if isinstance(p, Protect):
        return _ccsp(p.body)
    return []


def is_terminal(p: Process) -> bool:
    return isinstance(p, (Nil, Hole)) or not ccsp_step(p)
