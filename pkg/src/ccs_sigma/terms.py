"""Abstract syntax for labeled processes, schedulers and contexts.

Every node is an immutable, hashable value.  Hashes are computed once at
construction so that large terms can be used as dictionary keys cheaply
during state-space exploration.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

OMEGA = "omega"


class TermError(ValueError):
    """A term violates a structural well-formedness condition."""


@dataclass(frozen=True, slots=True, order=True)
class Label:
    atom: str
    index: str = ""

    def __post_init__(self):
        if not self.atom:
            raise TermError("label atom must be non-empty")
        if self.index.strip("01"):
            raise TermError(f"label index must be a bit string, got {self.index!r}")

    def extend(self, bits: str) -> Label:
        return Label(self.atom, self.index + bits)

    def __str__(self):
        return f"{self.atom}^{self.index}" if self.index else self.atom


@dataclass(frozen=True, slots=True)
class Action:
    """An input ``a``, an output ``!a`` or the silent action (channel None)."""

    channel: str | None
    output: bool = False

    @property
    def is_tau(self) -> bool:
        return self.channel is None

    @property
    def is_omega(self) -> bool:
        return self.channel == OMEGA and self.output

    def complement(self) -> Action:
        if self.channel is None:
            raise TermError("tau has no complement")
        return Action(self.channel, not self.output)

    def __str__(self):
        if self.channel is None:
            return "tau"
        if self.is_omega:
            return OMEGA
        return ("!" if self.output else "") + self.channel


TAU = Action(None)
OMEGA_ACTION = Action(OMEGA, True)


def inp(channel: str) -> Action:
    return Action(channel, False)


def out(channel: str) -> Action:
    return Action(channel, True)


# ---------------------------------------------------------------------------
# processes


class Process:
    __slots__ = ()

    # filled in by subclasses
    labels: frozenset

    def __hash__(self):
        return self._hash


def _labels_union(*parts: frozenset) -> frozenset:
    nonempty = [p for p in parts if p]
    if not nonempty:
        return frozenset()
    if len(nonempty) == 1:
        return nonempty[0]
    return frozenset().union(*nonempty)


@dataclass(frozen=True, slots=True, eq=True)
class Nil(Process):
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash("Nil"))

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Hole(Process):
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash("Hole"))

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Prefix(Process):
    label: Label | None
    action: Action
    cont: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Prefix", self.label, self.action, self.cont._hash)))
        own = frozenset((self.label,)) if self.label is not None else frozenset()
        object.__setattr__(self, "labels", _labels_union(own, self.cont.labels))

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Par(Process):
    left: Process
    right: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Par", self.left._hash, self.right._hash)))
        object.__setattr__(self, "labels", _labels_union(self.left.labels, self.right.labels))

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Sum(Process):
    """Nondeterministic choice ``left + right``."""

    left: Process
    right: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Sum", self.left._hash, self.right._hash)))
        object.__setattr__(self, "labels", _labels_union(self.left.labels, self.right.labels))

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class ProbSum(Process):
    """Internal probabilistic choice over weighted branches."""

    label: Label | None
    branches: tuple[tuple[Fraction, Process], ...]
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        if not self.branches:
            raise TermError("probabilistic sum needs at least one branch")
        total = Fraction(0)
        for w, _ in self.branches:
            if not isinstance(w, Fraction):
                raise TermError(f"weights must be exact rationals, got {w!r}")
            if not 0 < w <= 1:
                raise TermError(f"weight {w} outside (0,1]")
            total += w
        if total != 1:
            raise TermError(f"weights sum to {total}, not 1")
        object.__setattr__(
            self, "_hash",
            hash(("ProbSum", self.label, tuple((w, p._hash) for w, p in self.branches))))
        own = frozenset((self.label,)) if self.label is not None else frozenset()
        object.__setattr__(self, "labels", _labels_union(own, *(p.labels for _, p in self.branches)))

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Restrict(Process):
    channel: str
    body: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Restrict", self.channel, self.body._hash)))
        object.__setattr__(self, "labels", self.body.labels)

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Bang(Process):
    body: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Bang", self.body._hash)))
        object.__setattr__(self, "labels", self.body.labels)

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Protect(Process):
    """``l:{P}``: the body is scheduled by the independent scheduler."""

    label: Label
    body: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Protect", self.label, self.body._hash)))
        object.__setattr__(self, "labels", _labels_union(frozenset((self.label,)), self.body.labels))

    __hash__ = Process.__hash__


# Value-passing sugar.  These nodes only exist before desugaring.

@dataclass(frozen=True, slots=True, eq=True)
class InValue(Process):
    """``l: c(x).P``"""

    label: Label | None
    channel: str
    var: str
    cont: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("InValue", self.label, self.channel, self.var, self.cont._hash)))
        own = frozenset((self.label,)) if self.label is not None else frozenset()
        object.__setattr__(self, "labels", _labels_union(own, self.cont.labels))

    __hash__ = Process.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class OutValue(Process):
    """``l: !c<v>.P``; ``value`` is a value name or a bound variable."""

    label: Label | None
    channel: str
    value: str
    cont: Process
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    labels: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("OutValue", self.label, self.channel, self.value, self.cont._hash)))
        own = frozenset((self.label,)) if self.label is not None else frozenset()
        object.__setattr__(self, "labels", _labels_union(own, self.cont.labels))

    __hash__ = Process.__hash__


NIL = Nil()
HOLE = Hole()


def prefix(label, action, cont: Process = NIL) -> Prefix:
    if isinstance(label, str):
        label = Label(label)
    return Prefix(label, action, cont)


def psum(label, p, left: Process, right: Process) -> ProbSum:
    """Binary probabilistic choice ``left +_p right``."""
    if isinstance(label, str):
        label = Label(label)
    p = Fraction(p)
    if not 0 < p < 1:
        raise TermError(f"binary probabilistic sum needs 0 < p < 1, got {p}")
    return ProbSum(label, ((p, left), (1 - p, right)))


def par(*procs: Process) -> Process:
    """Left-associated parallel composition of ``procs``."""
    if not procs:
        return NIL
    result = procs[0]
    for p in procs[1:]:
        result = Par(result, p)
    return result


def nsum(*procs: Process) -> Process:
    """Left-associated nondeterministic sum of ``procs``."""
    if not procs:
        return NIL
    result = procs[0]
    for p in procs[1:]:
        result = Sum(result, p)
    return result


def restrict(channels: Iterable[str], body: Process) -> Process:
    for c in reversed(list(channels)):
        body = Restrict(c, body)
    return body


# ---------------------------------------------------------------------------
# schedulers


class Scheduler:
    __slots__ = ()

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True, eq=True)
class SNil(Scheduler):
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash("SNil"))

    __hash__ = Scheduler.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class Sigma(Scheduler):
    """``sigma(l).S``"""

    label: Label
    cont: Scheduler
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Sigma", self.label, self.cont._hash)))

    __hash__ = Scheduler.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class SigmaPair(Scheduler):
    """``sigma(l1,l2).S``: synchronize the prefixes labeled l1 and l2."""

    first: Label
    second: Label
    cont: Scheduler
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("SigmaPair", self.first, self.second, self.cont._hash)))

    __hash__ = Scheduler.__hash__


@dataclass(frozen=True, slots=True, eq=True)
class SChoice(Scheduler):
    """Scheduler choice; operand order is significant."""

    options: tuple[Scheduler, ...]
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        if len(self.options) < 2:
            raise TermError("scheduler choice needs at least two operands")
        object.__setattr__(self, "_hash", hash(("SChoice", tuple(o._hash for o in self.options))))

    __hash__ = Scheduler.__hash__


SNIL = SNil()


def sigma(*labels, cont: Scheduler = SNIL) -> Scheduler:
    """``sigma(l)`` or ``sigma(l1, l2)`` with labels given as Label or str."""
    labs = [Label(x) if isinstance(x, str) else x for x in labels]
    if len(labs) == 1:
        return Sigma(labs[0], cont)
    if len(labs) == 2:
        return SigmaPair(labs[0], labs[1], cont)
    raise TermError("sigma takes one or two labels")


def sequence(*steps: Scheduler) -> Scheduler:
    """Chain single-step schedulers: ``sequence(sigma('a'), sigma('b'))``."""
    result: Scheduler = SNIL
    for s in reversed(steps):
        result = _with_cont(s, result)
    return result


def _with_cont(s: Scheduler, cont: Scheduler) -> Scheduler:
    if isinstance(s, Sigma):
        return Sigma(s.label, _with_cont(s.cont, cont))
    if isinstance(s, SigmaPair):
        return SigmaPair(s.first, s.second, _with_cont(s.cont, cont))
    if isinstance(s, SNil):
        return cont
    raise TermError("cannot sequence after a scheduler choice")


def scheduler_labels(s: Scheduler) -> list[Label]:
    out: list[Label] = []
    stack = [s]
    while stack:
        t = stack.pop()
        if isinstance(t, Sigma):
            out.append(t.label)
            stack.append(t.cont)
        elif isinstance(t, SigmaPair):
            out.extend((t.first, t.second))
            stack.append(t.cont)
        elif isinstance(t, SChoice):
            stack.extend(reversed(t.options))
    return out


# ---------------------------------------------------------------------------
# structural operations


def children(p: Process) -> tuple[Process, ...]:
    if isinstance(p, (Prefix, InValue, OutValue)):
        return (p.cont,)
    if isinstance(p, (Par, Sum)):
        return (p.left, p.right)
    if isinstance(p, ProbSum):
        return tuple(q for _, q in p.branches)
    if isinstance(p, (Restrict, Bang, Protect)):
        return (p.body,)
    return ()


def subterms(p: Process) -> Iterator[Process]:
    """Pre-order walk over all subterms including ``p``."""
    stack = [p]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(reversed(children(t)))


def label_multiset(p: Process) -> Counter:
    """Labels of every prefix, probabilistic sum and protect node, with multiplicity."""
    counts: Counter = Counter()
    for t in subterms(p):
        lab = getattr(t, "label", None)
        if lab is not None:
            counts[lab] += 1
    return counts


def labels_of(p: Process) -> frozenset:
    return p.labels


def check_linear(p: Process) -> bool:
    return all(n == 1 for n in label_multiset(p).values())


def check_fresh(context: Process, others: Iterable[Process]) -> bool:
    """True iff ``context`` is linearly labeled and shares no label with ``others``."""
    if not check_linear(context):
        return False
    mine = context.labels
    return all(not (mine & o.labels) for o in others)


def relabel(p: Process, bit: str) -> Process:
    """Append ``bit`` to the index of every label in ``p``."""
    if bit not in ("0", "1", "00", "01", "10", "11") and bit.strip("01"):
        raise TermError(f"relabel index must be bits, got {bit!r}")
    if not p.labels:
        return p
    return _relabel(p, bit)


def _relabel(p: Process, bit: str) -> Process:
    if not p.labels:
        return p
    if isinstance(p, Prefix):
        lab = p.label.extend(bit) if p.label is not None else None
        return Prefix(lab, p.action, _relabel(p.cont, bit))
    if isinstance(p, Par):
        return Par(_relabel(p.left, bit), _relabel(p.right, bit))
    if isinstance(p, Sum):
        return Sum(_relabel(p.left, bit), _relabel(p.right, bit))
    if isinstance(p, ProbSum):
        lab = p.label.extend(bit) if p.label is not None else None
        return ProbSum(lab, tuple((w, _relabel(q, bit)) for w, q in p.branches))
    if isinstance(p, Restrict):
        return Restrict(p.channel, _relabel(p.body, bit))
    if isinstance(p, Bang):
        return Bang(_relabel(p.body, bit))
    if isinstance(p, Protect):
        return Protect(p.label.extend(bit), _relabel(p.body, bit))
    if isinstance(p, InValue):
        lab = p.label.extend(bit) if p.label is not None else None
        return InValue(lab, p.channel, p.var, _relabel(p.cont, bit))
    if isinstance(p, OutValue):
        lab = p.label.extend(bit) if p.label is not None else None
        return OutValue(lab, p.channel, p.value, _relabel(p.cont, bit))
    return p


def rebuild(p: Process, kids: tuple[Process, ...]) -> Process:
    """Return ``p`` with its immediate children replaced by ``kids``."""
    if isinstance(p, Prefix):
        return Prefix(p.label, p.action, kids[0])
    if isinstance(p, Par):
        return Par(*kids)
    if isinstance(p, Sum):
        return Sum(*kids)
    if isinstance(p, ProbSum):
        return ProbSum(p.label, tuple((w, k) for (w, _), k in zip(p.branches, kids)))
    if isinstance(p, Restrict):
        return Restrict(p.channel, kids[0])
    if isinstance(p, Bang):
        return Bang(kids[0])
    if isinstance(p, Protect):
        return Protect(p.label, kids[0])
    if isinstance(p, InValue):
        return InValue(p.label, p.channel, p.var, kids[0])
    if isinstance(p, OutValue):
        return OutValue(p.label, p.channel, p.value, kids[0])
    return p


def count_holes(p: Process) -> int:
    return sum(1 for t in subterms(p) if isinstance(t, Hole))


def is_context(p: Process) -> bool:
    return count_holes(p) == 1


def fill(context: Process, p: Process) -> Process:
    """Substitute ``p`` for the unique hole of ``context``."""
    if count_holes(context) != 1:
        raise TermError("a context must contain exactly one hole")
    return _fill(context, p)


def _fill(c: Process, p: Process) -> Process:
    if isinstance(c, Hole):
        return p
    kids = children(c)
    if not kids:
        return c
    return rebuild(c, tuple(_fill(k, p) for k in kids))


def contains_bang(p: Process) -> bool:
    return any(isinstance(t, Bang) for t in subterms(p))


def contains_sum(p: Process) -> bool:
    return any(isinstance(t, Sum) for t in subterms(p))


def erase(p: Process) -> Process:
    """Drop labels and protect wrappers, giving the underlying unlabeled term."""
    if isinstance(p, Prefix):
        return Prefix(None, p.action, erase(p.cont))
    if isinstance(p, ProbSum):
        return ProbSum(None, tuple((w, erase(q)) for w, q in p.branches))
    if isinstance(p, Protect):
        return erase(p.body)
    kids = children(p)
    if not kids:
        return p
    return rebuild(p, tuple(erase(k) for k in kids))


def label_linear(p: Process, atom: str = "l", start: int = 1) -> Process:
    """Assign fresh pairwise-distinct labels ``atom1, atom2, ...`` in pre-order."""
    counter = iter(range(start, 1 << 62))

    def go(t: Process) -> Process:
        if isinstance(t, Prefix):
            lab = Label(f"{atom}{next(counter)}")
            return Prefix(lab, t.action, go(t.cont))
        if isinstance(t, ProbSum):
            lab = Label(f"{atom}{next(counter)}")
            return ProbSum(lab, tuple((w, go(q)) for w, q in t.branches))
        if isinstance(t, Protect):
            lab = Label(f"{atom}{next(counter)}")
            return Protect(lab, go(t.body))
        kids = children(t)
        if not kids:
            return t
        return rebuild(t, tuple(go(k) for k in kids))

    return go(p)


def free_channels(p: Process) -> list[str]:
    """Channels used by prefixes of ``p`` and not bound by an enclosing restriction,
    in order of first occurrence."""
    seen: dict[str, None] = {}

    def go(t: Process, bound: frozenset):
        if isinstance(t, Prefix):
            c = t.action.channel
            if c is not None and c not in bound:
                seen.setdefault(c, None)
        elif isinstance(t, (InValue, OutValue)):
            if t.channel not in bound:
                seen.setdefault(t.channel, None)
        if isinstance(t, Restrict):
            go(t.body, bound | {t.channel})
            return
        for k in children(t):
            go(k, bound)

    go(p, frozenset())
    return list(seen)


def restrict_all(p: Process) -> Process:
    """Restrict every free channel of ``p`` except the success channel."""
    chans = sorted(c for c in free_channels(p) if c != OMEGA)
    return restrict(chans, p)


def size(p: Process) -> int:
    return sum(1 for _ in subterms(p))
