"""Simple probabilistic automata built from terms, plus schedulers over them.

States are numbered in discovery order (breadth first), so every automaton
built here is reproducible.  Executions are tuples ``(s0, a1, s1, ...)`` of
state numbers and actions.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .distribution import Distribution
from .semantics import (
    STUCK_PROCESS, STUCK_SCHEDULER, CompleteState, Step, StuckProcess, ccsp_step, step,
)
from .terms import Process

DEFAULT_MAX_STATES = 200_000


class StateLimitExceeded(RuntimeError):
    pass


@dataclass
class ProbAutomaton:
    """``(S, q, A, D)`` with ``D`` stored per source state.

    ``transitions[s]`` lists ``(action, Distribution over state numbers)``.
    ``truncated`` holds states cut by the depth bound that could still move;
    ``stuck`` maps states of complete processes to ``"process"`` or
    ``"scheduler"``.
    """

    states: list
    transitions: list
    initial: int = 0
    truncated: frozenset = frozenset()
    stuck: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.states)
        if len(self.transitions) != n:
            raise ValueError("one transition list per state expected")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        for trs in self.transitions:
            for _, mu in trs:
                for t in mu:
                    if not 0 <= t < n:
                        raise ValueError(f"transition target {t} out of range")

    @classmethod
    def from_edges(cls, n: int, edges, initial: int = 0) -> ProbAutomaton:
        """Build from ``(src, action, {dst: prob})`` triples on states ``0..n-1``."""
        trans = [[] for _ in range(n)]
        for src, act, mu in edges:
            trans[src].append((act, Distribution((d, Fraction(w)) for d, w in mu.items())))
        return cls(list(range(n)), trans, initial)

    def __len__(self):
        return len(self.states)

    @property
    def actions(self) -> list:
        seen: dict = {}
        for trs in self.transitions:
            for a, _ in trs:
                seen.setdefault(a, None)
        return list(seen)

    def edges(self):
        for s, trs in enumerate(self.transitions):
            for a, mu in trs:
                yield s, a, mu

    def num_transitions(self) -> int:
        return sum(len(t) for t in self.transitions)

    def is_terminal(self, s: int) -> bool:
        return not self.transitions[s]


def is_fully_probabilistic(m: ProbAutomaton) -> bool:
    return all(len(trs) <= 1 for trs in m.transitions)


def _explore(root, depth: int, succ: Callable, max_states: int, stuck_of=None) -> ProbAutomaton:
    index = {root: 0}
    states = [root]
    trans: list = [None]
    dist = [0]
    truncated = set()
    stuck = {}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s = states[i]
        out = succ(s)
        if stuck_of is not None:
            kind = stuck_of(out)
            if kind is not None:
                stuck[i] = kind
                trans[i] = []
                continue
            out = [out]
        if dist[i] >= depth:
            trans[i] = []
            if out:
                truncated.add(i)
            continue
        mine = []
        for act, mu in out:
            def number(x):
                j = index.get(x)
                if j is None:
                    if len(states) >= max_states:
                        raise StateLimitExceeded(f"more than {max_states} states")
                    j = len(states)
                    index[x] = j
                    states.append(x)
                    trans.append(None)
                    dist.append(dist[i] + 1)
                    queue.append(j)
                return j
            mine.append((act, mu.map(number)))
        trans[i] = mine
    return ProbAutomaton(states, trans, 0, frozenset(truncated), stuck)


def unfold_process(p: Process, depth: int, max_states: int = DEFAULT_MAX_STATES) -> ProbAutomaton:
    """Breadth-first closure of the unlabeled transition relation."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    return _explore(p, depth, ccsp_step, max_states)


def _complete_succ(cs: CompleteState):
    r = step(cs)
    if isinstance(r, Step):
        return (r.action, r.dist)
    return r


def _complete_stuck(r) -> str | None:
    if r is STUCK_PROCESS or isinstance(r, StuckProcess):
        return "process"
    if r is STUCK_SCHEDULER:
        return "scheduler"
    return None


def unfold_complete(cs: CompleteState, depth: int, max_states: int = DEFAULT_MAX_STATES) -> ProbAutomaton:
    """Unfold ``P || S`` (with its independent scheduler, if any).

    Leaves are marked in ``stuck`` as ``"process"`` (nothing can move) or
    ``"scheduler"`` (the process could move but the scheduler selects nothing).
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    return _explore(cs, depth, _complete_succ, max_states, _complete_stuck)


# ---------------------------------------------------------------------------
# semantic schedulers


def _check_acyclic(m: ProbAutomaton):
    colour = [0] * len(m)
    for root in range(len(m)):
        if colour[root]:
            continue
        stack = [(root, iter(_succs(m, root)))]
        colour[root] = 1
        while stack:
            s, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[s] = 2
                stack.pop()
            elif colour[nxt] == 1:
                raise ValueError("automaton has a cycle; schedulers are only enumerated for acyclic automata")
            elif colour[nxt] == 0:
                colour[nxt] = 1
                stack.append((nxt, iter(_succs(m, nxt))))


def _succs(m: ProbAutomaton, s: int):
    for _, mu in m.transitions[s]:
        yield from mu


def enumerate_semantic_schedulers(m: ProbAutomaton) -> Iterator[dict]:
    """Every scheduler of an acyclic automaton, as a dict from executions to
    transition numbers (indexes into ``m.transitions[last state]``).

    A scheduler is given on the executions it can itself produce; the choices
    it would make elsewhere never influence its execution tree.  Order is depth
    first, transitions in the order the automaton lists them.
    """
    _check_acyclic(m)
    yield from _schedulers_from(m, (m.initial,))


def _schedulers_from(m: ProbAutomaton, alpha: tuple) -> Iterator[dict]:
    s = alpha[-1]
    trs = m.transitions[s]
    if not trs:
        yield {}
        return
    for k, (a, mu) in enumerate(trs):
        subs = [list(_schedulers_from(m, alpha + (a, t))) for t in mu]
        for combo in itertools.product(*subs):
            z = {alpha: k}
            for part in combo:
                z.update(part)
            yield z


def count_semantic_schedulers(m: ProbAutomaton) -> int:
    """Number of schedulers, by counting strategies state by state."""
    _check_acyclic(m)
    memo: dict[int, int] = {}

    def n(s: int) -> int:
        if s in memo:
            return memo[s]
        trs = m.transitions[s]
        if not trs:
            r = 1
        else:
            r = 0
            for _, mu in trs:
                prod = 1
                for t in mu:
                    prod *= n(t)
                r += prod
        memo[s] = r
        return r

    # the schedulers below an execution depend only on its last state
    return n(m.initial)


def etree(m: ProbAutomaton, zeta: dict) -> ProbAutomaton:
    """The fully probabilistic automaton of executions resolved by ``zeta``."""
    root = (m.initial,)
    states = [root]
    index = {root: 0}
    trans: list = [[]]
    truncated = set()
    queue = deque([0])
    while queue:
        i = queue.popleft()
        alpha = states[i]
        s = alpha[-1]
        if s in m.truncated:
            truncated.add(i)
        k = zeta.get(alpha)
        if k is None:
            continue
        a, mu = m.transitions[s][k]

        def number(t, alpha=alpha, a=a):
            ext = alpha + (a, t)
            j = index.get(ext)
            if j is None:
                j = len(states)
                index[ext] = j
                states.append(ext)
                trans.append([])
                queue.append(j)
            return j

        trans[i] = [(a, mu.map(number))]
    return ProbAutomaton(states, trans, 0, frozenset(truncated))


# ---------------------------------------------------------------------------
# bisimulation


def prob_bisim(m1: ProbAutomaton, m2: ProbAutomaton) -> bool:
    """Probabilistic bisimilarity of the initial states of two fully
    probabilistic automata, by partition refinement."""
    if not (is_fully_probabilistic(m1) and is_fully_probabilistic(m2)):
        raise ValueError("bisimulation is only decided for fully probabilistic automata")
    n1 = len(m1)
    trans = []
    for trs in m1.transitions:
        trans.append([(a, list(mu.items())) for a, mu in trs])
    for trs in m2.transitions:
        trans.append([(a, [(t + n1, w) for t, w in mu.items()]) for a, mu in trs])
    total = len(trans)
    block = [0] * total
    count = 1
    while True:
        keys: dict = {}
        new = [0] * total
        for s in range(total):
            sig = []
            for a, pairs in trans[s]:
                mass: dict[int, Fraction] = {}
                for t, w in pairs:
                    b = block[t]
                    mass[b] = mass.get(b, 0) + w
                sig.append((repr(a), tuple(sorted(mass.items()))))
            key = (block[s], tuple(sig))
            new[s] = keys.setdefault(key, len(keys))
        block = new
        if len(keys) == count:
            break
        count = len(keys)
    return block[m1.initial] == block[n1 + m2.initial]


def reachable_states(m: ProbAutomaton) -> list[int]:
    seen = {m.initial}
    order = [m.initial]
    queue = deque([m.initial])
    while queue:
        s = queue.popleft()
        for t in _succs(m, s):
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order
