"""Dining cryptographers instances and strong anonymity checks.

Channel naming after value passing is expanded: ``m{i}%v`` (master to
cryptographer ``i``), ``c{i}_{j}%v`` (coin to cryptographer), ``out{i}%v``
(public announcement of cryptographer ``i``).
"""
from __future__ import annotations

import csv
import io
import random
import re
from dataclasses import dataclass
from fractions import Fraction

from .analysis import DEFAULT_CAP, MassDomain, MassEngine, SampledMassEngine
from .semantics import (
    CompleteState, Pair, Single, Step, active_sites, candidate_moves, derive, move_to_scheduler, step,
)
from .terms import (
    NIL, SNIL, TAU, Label, Par, Prefix, Process, ProbSum, Protect, SChoice, Scheduler, children, inp,
    nsum, out, par, restrict,
)
from .values import fuse

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class DcpConfig:
    """``master_weights`` of None means the culprit is chosen nondeterministically
    inside a protected block."""

    master_weights: tuple | None = (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))
    coin_bias: Fraction = HALF
    n: int = 3
    sabotage: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("the ring needs at least three cryptographers")
        if self.master_weights is not None:
            ws = tuple(Fraction(w) for w in self.master_weights)
            object.__setattr__(self, "master_weights", ws)
            if len(ws) != self.n:
                raise ValueError(f"expected {self.n} master weights")
            if any(w <= 0 for w in ws) or sum(ws) != 1:
                raise ValueError("master weights must be positive and sum to 1")
        bias = Fraction(self.coin_bias)
        object.__setattr__(self, "coin_bias", bias)
        if not 0 < bias < 1:
            raise ValueError("coin bias must lie strictly between 0 and 1")

    @classmethod
    def uniform(cls, n: int = 3, **kw) -> DcpConfig:
        return cls(tuple(Fraction(1, n) for _ in range(n)), n=n, **kw)

    @classmethod
    def nondeterministic(cls, n: int = 3, **kw) -> DcpConfig:
        return cls(None, n=n, **kw)


def _l(name: str) -> Label:
    return Label(name)


def master_channel(i: int) -> str:
    return f"m{i}"


def coin_channel(i: int, j: int) -> str:
    return f"c{i}_{j}"


def announce_channel(i: int) -> str:
    return f"out{i}"


def _master_branch(cfg: DcpConfig, culprit: int) -> Process:
    outs = []
    for j in range(cfg.n):
        name = f"l{2 + j}_b{culprit}" if cfg.sabotage else f"l{2 + j}"
        bit = 1 if j == culprit else 0
        outs.append(Prefix(_l(name), out(fuse(master_channel(j), bit)), NIL))
    return par(*outs)


def _crypt(cfg: DcpConfig, i: int) -> Process:
    n = cfg.n
    left, right = coin_channel(i, i), coin_channel(i, (i + 1) % n)

    def announce(pay, c1, c2):
        return Prefix(_l(f"l8_{i}"), out(fuse(announce_channel(i), pay ^ c1 ^ c2)), NIL)

    def second(pay, c1):
        return nsum(*(Prefix(_l(f"l7_{i}"), inp(fuse(right, c2)), announce(pay, c1, c2)) for c2 in (0, 1)))

    def first(pay):
        return nsum(*(Prefix(_l(f"l6_{i}"), inp(fuse(left, c1)), second(pay, c1)) for c1 in (0, 1)))

    return nsum(*(Prefix(_l(f"l5_{i}"), inp(fuse(master_channel(i), pay)), first(pay)) for pay in (0, 1)))


def _coin(cfg: DcpConfig, i: int) -> Process:
    n = cfg.n
    own, prev = coin_channel(i, i), coin_channel((i - 1) % n, i)

    def side(v):
        return Par(Prefix(_l(f"l10_{i}"), out(fuse(own, v)), NIL),
                   Prefix(_l(f"l11_{i}"), out(fuse(prev, v)), NIL))

    b = cfg.coin_bias
    return ProbSum(_l(f"l9_{i}"), ((b, side(0)), (1 - b, side(1))))


def _master(cfg: DcpConfig) -> Process:
    if cfg.master_weights is not None:
        return ProbSum(_l("l1"), tuple((w, _master_branch(cfg, i)) for i, w in enumerate(cfg.master_weights)))
    body = nsum(*(Prefix(_l(f"l12_{i}"), TAU, _master_branch(cfg, i)) for i in range(cfg.n)))
    return Protect(_l("l1"), body)


def _assemble(cfg: DcpConfig) -> Process:
    n = cfg.n
    inner = par(*(_crypt(cfg, i) for i in range(n)), *(_coin(cfg, i) for i in range(n)))
    cchans = [fuse(coin_channel(i, j), v) for i in range(n) for j in (i, (i + 1) % n) for v in (0, 1)]
    mchans = [fuse(master_channel(i), v) for i in range(n) for v in (0, 1)]
    return restrict(mchans, Par(_master(cfg), restrict(cchans, inner)))


def build_dcp(cfg: DcpConfig | None = None) -> Process:
    cfg = cfg or DcpConfig.uniform()
    if cfg.master_weights is None:
        raise ValueError("build_dcp needs master weights; use build_dcp_nondet")
    return _assemble(cfg)


def build_dcp_nondet(n: int = 3, sabotage: bool = False) -> Process:
    return _assemble(DcpConfig.nondeterministic(n, sabotage=sabotage))


_ANNOUNCE = re.compile(r"out(\d+)%(\d+)$")
_MASTER = re.compile(r"m(\d+)%1$")


def announcement(action) -> tuple | None:
    """``(cryptographer, bit)`` for an announcement action, else None."""
    if action.channel is None or not action.output:
        return None
    m = _ANNOUNCE.match(action.channel)
    if m is None:
        return None
    return int(m.group(1)), int(m.group(2))


def culprit_of(p: Process) -> int | None:
    """The cryptographer told to pay by an already resolved master, if any."""
    stack = [p]
    while stack:
        t = stack.pop()
        if isinstance(t, (ProbSum, Protect)):
            continue
        if isinstance(t, Prefix) and t.action.output and t.action.channel:
            m = _MASTER.match(t.action.channel)
            if m:
                return int(m.group(1))
        stack.extend(children(t))
    return None


# ---------------------------------------------------------------------------
# anonymity


class AnonymityDomain(MassDomain):
    """Items carry ``(tag, observations so far)``; ``tag_of`` fills in a
    missing tag from the successor state."""

    def __init__(self, observe=announcement, tag_of=culprit_of):
        self.observe = observe
        self.tag_of = tag_of

    def advance(self, annot, action, process):
        tag, obs = annot
        if tag is None and self.tag_of is not None:
            tag = self.tag_of(process)
        o = self.observe(action)
        if o is not None:
            obs = obs + (o,)
        return False, (tag, obs)

    def leaf(self, annot, kind):
        tag, obs = annot
        return (tag, obs, kind)


@dataclass(frozen=True)
class AnonymityWitness:
    scheduler: Scheduler
    observable: tuple
    probabilities: tuple        # (tag, conditional probability) per condition


@dataclass(frozen=True)
class SchedulerReport:
    scheduler: Scheduler
    conditionals: tuple         # (tag, ((observable, probability), ...)) per condition
    truncated: bool


@dataclass(frozen=True)
class AnonymityVerdict:
    holds: bool | None
    classes: int
    witness: AnonymityWitness | None = None
    reports: tuple = ()


def _conditionals(outcome) -> tuple[dict, bool]:
    mass: dict = {}
    joint: dict = {}
    truncated = False
    for (tag, obs, kind), w in outcome:
        if kind == "truncated":
            truncated = True
        key = obs if kind != "truncated" else obs + (("cut",),)
        mass[tag] = mass.get(tag, 0) + w
        joint.setdefault(tag, {})
        joint[tag][key] = joint[tag].get(key, 0) + w
    cond = {t: {o: w / mass[t] for o, w in d.items()} for t, d in joint.items()}
    return cond, truncated


def check_anonymity(system: Process, start: list, depth: int, tags: list | None = None,
                    cap: int = DEFAULT_CAP, domain: AnonymityDomain | None = None,
                    engine: MassEngine | None = None) -> AnonymityVerdict:
    """Generic check: ``start`` lists ``(indep, tag, weight)`` starting items.

    Holds iff for every scheduler the distributions of observations
    conditioned on each tag coincide.  A custom ``engine`` must use the
    same domain.
    """
    domain = domain or AnonymityDomain()
    engine = engine or MassEngine(domain, depth, nonblocking=True, cap=cap)
    group = {}
    for indep, tag, w in start:
        key = (system, indep, (tag, ()))
        group[key] = group.get(key, 0) + Fraction(w)
    res = engine.run(group)
    reports = []
    witness = None
    undecided = False
    for outcome, sched in res.items():
        cond, trunc = _conditionals(outcome)
        undecided |= trunc
        order = sorted(cond, key=lambda t: (t is None, t if t is not None else -1))
        if tags is not None:
            missing = [t for t in tags if t not in cond]
            if missing:
                raise ValueError(f"condition(s) {missing} have probability zero")
        reports.append(SchedulerReport(
            sched, tuple((t, tuple(sorted(cond[t].items()))) for t in order), trunc))
        if witness is None and not trunc:
            ref = cond[order[0]]
            for t in order[1:]:
                if cond[t] != ref:
                    obs = sorted(set(ref) | set(cond[t]))
                    bad = next(o for o in obs if ref.get(o, 0) != cond[t].get(o, 0))
                    probs = tuple((u, cond[u].get(bad, Fraction(0))) for u in order)
                    witness = AnonymityWitness(sched, bad, probs)
                    break
    if witness is not None:
        holds = False
    elif undecided:
        holds = None
    else:
        holds = True
    return AnonymityVerdict(holds, len(res), witness, tuple(reports))


def check_strong_anonymity(prot: Process, depth: int = 20, cap: int = DEFAULT_CAP, n: int | None = None) -> AnonymityVerdict:
    """Every scheduler class yields culprit-independent observation distributions."""
    tags = list(range(n)) if n is not None else None
    return check_anonymity(prot, [(None, None, 1)], depth, tags=tags, cap=cap)


def independent_schedulers(prot: Process) -> list[tuple[Scheduler, int | None]]:
    """One-step independent schedulers for the protected blocks of ``prot``,
    each with the culprit it selects."""
    out = []
    for site in active_sites(prot):
        if not isinstance(site, Protect):
            continue
        for m in candidate_moves(site.body):
            for d in derive(site.body, m, None):
                tags = {culprit_of(q) for q in d.dist}
                tag = tags.pop() if len(tags) == 1 else None
                out.append((move_to_scheduler(m, SNIL), tag))
    return out


def check_anonymity_nondet(prot: Process, depth: int = 20, cap: int = DEFAULT_CAP,
                           indeps: list | None = None) -> AnonymityVerdict:
    """For every main scheduler and independent schedulers picking different
    culprits, the observation distributions coincide.

    ``indeps`` overrides the independent schedulers as ``(T, culprit)`` pairs.
    """
    ts = independent_schedulers(prot) if indeps is None else list(indeps)
    if not ts:
        raise ValueError("no protected nondeterministic choice found")
    start = [(t, tag, 1) for t, tag in ts]
    return check_anonymity(prot, start, depth, cap=cap, domain=AnonymityDomain(tag_of=None))


def sample_anonymity(prot: Process, samples: int, seed: int = 0, depth: int = 20,
                     nondet: bool = False) -> AnonymityVerdict:
    """Check ``samples`` randomly drawn nonblocking schedulers instead of all
    of them.  Finding no violation proves nothing, so ``holds`` is then None;
    ``classes`` counts the distinct outcomes seen."""
    rng = random.Random(seed)
    if nondet:
        ts = independent_schedulers(prot)
        if not ts:
            raise ValueError("no protected nondeterministic choice found")
        start = [(t, tag, 1) for t, tag in ts]
        domain = AnonymityDomain(tag_of=None)
    else:
        start = [(None, None, 1)]
        domain = AnonymityDomain()
    reports = {}
    for _ in range(samples):
        engine = SampledMassEngine(domain, depth, rng)
        v = check_anonymity(prot, start, depth, domain=domain, engine=engine)
        for rep in v.reports:
            reports.setdefault(rep.conditionals, rep)
        if v.witness is not None:
            return AnonymityVerdict(False, len(reports), v.witness, tuple(reports.values()))
    return AnonymityVerdict(None, len(reports), None, tuple(reports.values()))


def conditional_observable_dist(prot: Process, s: Scheduler, culprit: int, depth: int = 40,
                                indep: Scheduler | None = None) -> dict:
    """Distribution of announcement sequences under ``s`` given the culprit."""
    joint: dict = {}

    def go(cs: CompleteState, pr: Fraction, tag, obs, d: int):
        if tag is None:
            tag = culprit_of(cs.process)
        r = step(cs)
        if not isinstance(r, Step) or d <= 0:
            if isinstance(r, Step):
                obs = obs + (("cut",),)
            joint[(tag, obs)] = joint.get((tag, obs), 0) + pr
            return
        o = announcement(r.action)
        nobs = obs + (o,) if o is not None else obs
        for x, w in r.dist.items():
            go(x, pr * w, tag, nobs, d - 1)

    go(CompleteState(prot, s, indep), Fraction(1), None, (), depth)
    total = sum((w for (t, _), w in joint.items() if t == culprit), Fraction(0))
    if total == 0:
        raise ValueError(f"culprit {culprit} has probability zero under this scheduler")
    return {o: w / total for (t, o), w in joint.items() if t == culprit}


def payer_first_scheduler(n: int = 3) -> Scheduler:
    """A scheduler for the branch-labeled (sabotaged) protocol that lets the
    payer announce before anybody else."""
    def chain(moves, tail=SNIL):
        s = tail
        for m in reversed(moves):
            s = move_to_scheduler(m, s)
        return s

    coins = [Single(_l(f"l9_{i}")) for i in range(n)]
    branches = []
    for culprit in range(n):
        order = [culprit] + [i for i in range(n) if i != culprit]
        moves = []
        for i in range(n):
            moves.append(Pair(_l(f"l5_{i}"), _l(f"l{2 + i}_b{culprit}")))
        for i in order:
            moves.append(Pair(_l(f"l6_{i}"), _l(f"l10_{i}")))
            moves.append(Pair(_l(f"l7_{i}"), _l(f"l11_{(i + 1) % n}")))
            moves.append(Single(_l(f"l8_{i}")))
        branches.append(chain(moves))
    # only the payer's branch can perform its first master synchronization
    return chain([Single(_l("l1"))] + coins, SChoice(tuple(branches)))


def announcements_consistent(prot: Process, s: Scheduler, depth: int = 40, indep: Scheduler | None = None) -> bool:
    """Every execution under ``s`` announces each cryptographer once, with
    announced bits of odd parity."""
    n = len({int(m.group(1)) for m in map(_MASTER.match, _channels(prot)) if m})

    def go(cs: CompleteState, obs, d: int) -> bool:
        r = step(cs)
        if not isinstance(r, Step):
            idx = sorted(i for i, _ in obs)
            return idx == list(range(n)) and sum(b for _, b in obs) % 2 == 1
        if d <= 0:
            return False
        o = announcement(r.action)
        nobs = obs + (o,) if o is not None else obs
        return all(go(x, nobs, d - 1) for x in r.dist.support())

    return go(CompleteState(prot, s, indep), (), depth)


def _channels(p: Process):
    from .terms import Restrict
    for t in _walk(p):
        if isinstance(t, Restrict):
            yield t.channel


def _walk(p: Process):
    stack = [p]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(children(t))


# ---------------------------------------------------------------------------
# receiver/sender toy system


def build_sender_system(shared: bool = False) -> Process:
    """A receiver picks one of two senders at random and signals ``ok``; two
    listeners on ``ok`` report on ``s`` and ``t``.

    With ``shared`` the receiver's branches carry identical labels and the two
    senders form one labeled choice, so a scheduler cannot tell the branches
    apart.
    """
    if shared:
        recv = ProbSum(_l("r"), ((HALF, Prefix(_l("r1"), inp("a"), Prefix(_l("r2"), out("ok"), NIL))),
                                 (HALF, Prefix(_l("r1"), inp("b"), Prefix(_l("r2"), out("ok"), NIL)))))
        senders = nsum(Prefix(_l("s1"), out("a"), NIL), Prefix(_l("s1"), out("b"), NIL))
    else:
        recv = ProbSum(_l("r"), ((HALF, Prefix(_l("r1"), inp("a"), Prefix(_l("r2"), out("ok"), NIL))),
                                 (HALF, Prefix(_l("r3"), inp("b"), Prefix(_l("r4"), out("ok"), NIL)))))
        senders = Par(Prefix(_l("s1"), out("a"), NIL), Prefix(_l("t1"), out("b"), NIL))
    listeners = Par(Prefix(_l("a1"), inp("ok"), Prefix(_l("a2"), out("s"), NIL)),
                    Prefix(_l("b1"), inp("ok"), Prefix(_l("b2"), out("t"), NIL)))
    return restrict(["a", "b", "ok"], par(recv, senders, listeners))


def sender_of(p: Process) -> int | None:
    """0 or 1 once the receiver has picked the sender it listens to."""
    stack = [p]
    while stack:
        t = stack.pop()
        if isinstance(t, ProbSum):
            continue
        if isinstance(t, Prefix) and t.action.channel in ("a", "b") and not t.action.output:
            return 0 if t.action.channel == "a" else 1
        stack.extend(children(t))
    return None


def listener_report(action) -> str | None:
    if action.output and action.channel in ("s", "t"):
        return action.channel
    return None


def check_sender_anonymity(system: Process, depth: int = 12) -> AnonymityVerdict:
    dom = AnonymityDomain(observe=listener_report, tag_of=sender_of)
    return check_anonymity(system, [(None, None, 1)], depth, tags=[0, 1], domain=dom)


# ---------------------------------------------------------------------------
# reports


def _obs_text(obs) -> str:
    parts = []
    for o in obs:
        if o == ("cut",):
            parts.append("...")
        elif isinstance(o, tuple):
            parts.append(":".join(str(x) for x in o))
        else:
            parts.append(str(o))
    return " ".join(parts)


def anonymity_csv(verdict: AnonymityVerdict) -> str:
    from .parser import format_scheduler
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "scheduler", "condition", "observable", "probability"])
    for k, rep in enumerate(verdict.reports):
        s = format_scheduler(rep.scheduler)
        for tag, dist in rep.conditionals:
            for obs, pr in dist:
                w.writerow([k, s, "" if tag is None else tag, _obs_text(obs), str(pr)])
    return buf.getvalue()


def anonymity_json(verdict: AnonymityVerdict) -> dict:
    from .parser import format_scheduler
    out = {
        "holds": verdict.holds,
        "classes": verdict.classes,
        "witness": None,
        "reports": [
            {
                "scheduler": format_scheduler(rep.scheduler),
                "truncated": rep.truncated,
                "conditions": [
                    {"condition": tag, "distribution": [
                        {"observable": _obs_text(obs), "probability": str(pr)} for obs, pr in dist]}
                    for tag, dist in rep.conditionals
                ],
            }
            for rep in verdict.reports
        ],
    }
    if verdict.witness is not None:
        w = verdict.witness
        out["witness"] = {
            "scheduler": format_scheduler(w.scheduler),
            "observable": _obs_text(w.observable),
            "probabilities": [{"condition": t, "probability": str(p)} for t, p in w.probabilities],
        }
    return out
