"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
import itertools
import sys
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from ccs_sigma.analysis import (  # noqa: E402
    check_deterministic, check_distributivity, enumerate_syntactic_schedulers, is_nonblocking,
    pomega_values, pomega_values_bruteforce, scheduler_correspondence, testing_equivalent,
    testing_preorder,
)
from ccs_sigma.anonymity import (  # noqa: E402
    DcpConfig, build_dcp, build_dcp_nondet, check_anonymity_nondet, check_strong_anonymity,
    conditional_observable_dist, payer_first_scheduler,
)
from ccs_sigma.automata import is_fully_probabilistic, unfold_complete  # noqa: E402
from ccs_sigma.parser import format_scheduler, parse_context, parse_process, parse_source  # noqa: E402
from ccs_sigma.semantics import CompleteState  # noqa: E402
from ccs_sigma.terms import SNIL, SChoice, fill, label_linear, labels_of, sequence, sigma  # noqa: E402

from gen import distributivity_instance, random_labeled  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
H = Fraction(1, 2)


class Check:
    """Collect the outcome of one criterion and print a single line."""

    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.failures: list[str] = []
        self.start = time.perf_counter()

    def expect(self, cond, what: str):
        if not cond:
            self.failures.append(what)

    def finish(self, capsys=None):
        elapsed = time.perf_counter() - self.start
        self.expect(elapsed < self.budget, f"took {elapsed:.1f}s, budget {self.budget:g}s")
        status = "PASS" if not self.failures else "FAIL"
        line = f"[criterion {self.number:2d}] {status} {self.title} ({elapsed:.2f}s)"
        if self.failures:
            line += ": " + "; ".join(self.failures[:3])
        if capsys is not None:
            with capsys.disabled():
                print("\n" + line)
        else:
            print(line)
        assert not self.failures, line


def successes(values) -> list:
    return sorted({r.success for r in values})


def coin_oracle(n: int, payer: int, bias=H) -> dict:
    """Announced values indexed by cryptographer, over all coin outcomes."""
    dist = Counter()
    for coins in itertools.product((0, 1), repeat=n):
        w = Fraction(1)
        for c in coins:
            w *= bias if c == 0 else 1 - bias
        dist[tuple(int(j == payer) ^ coins[j] ^ coins[(j + 1) % n] for j in range(n))] += w
    return dict(dist)


def by_index(dist) -> dict:
    """Forget the announcement order."""
    out = Counter()
    for obs, w in dist.items():
        d = dict(obs)
        out[tuple(d[i] for i in range(len(d)))] += w
    return dict(out)


# ---------------------------------------------------------------------------


def test_criterion_01_intro_leak(capsys):
    chk = Check(1, "receiver leak: max p_omega(A|C) = 1/2, max p_omega(B|C) = 1", 1.0)
    src = parse_source((CORPUS / "intro.ccs").read_text())
    o = src.get("O")
    best_a = max(successes(pomega_values(src.get("AC"), o, 12)))
    best_b = max(successes(pomega_values(src.get("BC"), o, 12)))
    chk.expect(best_a == H, f"A|C max {best_a}")
    chk.expect(best_b == 1, f"B|C max {best_b}")
    chk.finish(capsys)


def test_criterion_02_blocking(capsys):
    chk = Check(2, "blocking: no choice-free scheduler is nonblocking, sigma(l).(sigma(l1)+sigma(l2)) is", 1.0)
    p = parse_process("l: (l1: a +_1/2 l2: b)")
    labels = sorted(labels_of(p))
    steps = [sigma(x) for x in labels] + [sigma(x, y) for x, y in itertools.combinations(labels, 2)]
    tried = 0
    # the process makes at most two moves, so longer sequences add nothing
    for k in range(4):
        for seq in itertools.product(steps, repeat=k):
            s = sequence(*seq) if seq else SNIL
            tried += 1
            chk.expect(not is_nonblocking(p, s, 4), f"{format_scheduler(s)} is nonblocking")
    chk.expect(tried == 1 + 6 + 36 + 216, f"enumerated {tried} sequences")
    total = sigma("l", cont=SChoice((sigma("l1"), sigma("l2"))))
    chk.expect(is_nonblocking(p, total, 4), "sigma(l).(sigma(l1)+sigma(l2)) blocks")
    chk.finish(capsys)


def test_criterion_03_linear_labelings(capsys):
    chk = Check(3, "500 random linear labelings: deterministic, every scheduler gives a fully probabilistic unfolding", 60.0)
    schedulers = 0
    for seed in range(500):
        p = random_labeled(seed, depth=5)
        v = check_deterministic(p, 4)
        chk.expect(v.ok, f"seed {seed}: {v}")
        for cls in enumerate_syntactic_schedulers(p, 3):
            schedulers += 1
            m = unfold_complete(CompleteState(p, cls.scheduler), 3)
            chk.expect(is_fully_probabilistic(m), f"seed {seed}: {format_scheduler(cls.scheduler)}")
    chk.expect(schedulers > 500, f"only {schedulers} schedulers enumerated")
    chk.finish(capsys)


def test_criterion_04_scheduler_correspondence(capsys):
    chk = Check(4, "semantic and syntactic schedulers match both ways at depth 4", 10.0)
    for text in ["a . 0 | b . 0", "a . (b + c)", "a . 0 | !a . 0"]:
        c = scheduler_correspondence(label_linear(parse_process(text)), 4)
        chk.expect(c.holds, f"{text}: {c}")
        chk.expect(c.semantic > 0, f"{text}: no schedulers")
    chk.finish(capsys)


def test_criterion_05_context_counterexample(capsys):
    chk = Check(5, "probabilistic context: max p_omega(C[Q]) = 1, max p_omega(C[P]) = max(p, 1-p)", 10.0)
    src = parse_source((CORPUS / "context.ccs").read_text())
    o = src.get("O")
    for prob in (Fraction(1, 10), H, Fraction(9, 10)):
        ctx = parse_context(f"l: (l1: a . l2: c +_{prob} hole)")
        for name, expect in (("P", max(prob, 1 - prob)), ("Q", Fraction(1))):
            term = fill(ctx, src.get(name))
            engine = max(successes(pomega_values(term, o, 10)))
            brute = max(successes(pomega_values_bruteforce(term, o, 10)))
            chk.expect(engine == brute == expect, f"p={prob} C[{name}]: {engine}, {brute}, want {expect}")
    chk.finish(capsys)


def test_criterion_06_tau_guards(capsys):
    chk = Check(6, "tau guards: R1 and R2 differ under must, R1' and R2 are equivalent", 10.0)
    src = parse_source((CORPUS / "guards.ccs").read_text())
    o = src.get("O")
    r1, r1g, r2 = src.get("R1"), src.get("R1g"), src.get("R2")
    v = testing_preorder(r1, r2, [o], "must", 8)
    chk.expect(v.holds is False and v.witness is not None, "no must witness for R1 below R2")
    chk.expect(testing_equivalent(r1, r2, [o], "must", 8) is False, "R1 and R2 must-equivalent")
    for mode in ("may", "must"):
        chk.expect(testing_equivalent(r1g, r2, [o], mode, 8) is True, f"R1' and R2 not {mode}-equivalent")
    # hand computed: the guard hides the coin from the scheduler
    chk.expect(successes(pomega_values(r1, o, 8)) == [H, Fraction(11, 20)], "R1 values")
    for p in (r1g, r2):
        chk.expect(successes(pomega_values(p, o, 8)) == [Fraction(1, 10), H], "R1'/R2 values")
    chk.finish(capsys)


def test_criterion_07_distributivity(capsys):
    chk = Check(7, "distributivity on 100 random bang-free instances, may and must, with identities", 600.0)
    for seed in range(100):
        c, p, q, prob, o = distributivity_instance(seed)
        r = check_distributivity(c, p, q, prob, [o], 8)
        chk.expect(r.may is True and r.must is True and r.matched is True, f"seed {seed}: may={r.may} must={r.must}")
        chk.expect(all(i.holds for i in r.identities) and r.identities, f"seed {seed}: identities")
    chk.finish(capsys)


def test_criterion_08_dcp_anonymity(capsys):
    chk = Check(8, "dining cryptographers: strong anonymity, conditionals equal the coin oracle", 600.0)
    v = check_strong_anonymity(build_dcp(DcpConfig.uniform()), 20)
    chk.expect(v.holds is True, f"verdict {v.holds}")
    chk.expect(v.classes == len(v.reports) > 0, "no scheduler classes")
    quarter = {bits: Fraction(1, 4) for bits in itertools.product((0, 1), repeat=3) if sum(bits) % 2}
    for rep in v.reports:
        chk.expect(not rep.truncated, "truncated run")
        chk.expect(sorted(t for t, _ in rep.conditionals) == [0, 1, 2], "missing culprit")
        for culprit, dist in rep.conditionals:
            d = by_index(dict(dist))
            chk.expect(d == coin_oracle(3, culprit) == quarter, f"culprit {culprit}: {d}")
    chk.finish(capsys)


def test_criterion_09_sabotaged_dcp(capsys):
    chk = Check(9, "sabotaged dining cryptographers: anonymity fails with a witness scheduler", 600.0)
    sab = build_dcp(DcpConfig.uniform(sabotage=True))
    v = check_strong_anonymity(sab, 20)
    chk.expect(v.holds is False and v.witness is not None, f"verdict {v.holds}")
    if v.witness is not None:
        w = v.witness
        probs = {t: conditional_observable_dist(sab, w.scheduler, t).get(w.observable, 0) for t in range(3)}
        chk.expect(len(set(probs.values())) > 1, f"witness does not separate: {probs}")
        chk.expect(probs == dict(w.probabilities), f"witness {w.probabilities} vs recomputed {probs}")
    s = payer_first_scheduler()
    for payer in range(3):
        dist = conditional_observable_dist(sab, s, payer)
        chk.expect(all(obs[0][0] == payer for obs in dist), f"payer {payer} not first")
        chk.expect(by_index(dist) == coin_oracle(3, payer), f"payer {payer} values")
    chk.finish(capsys)


def test_criterion_10_nondeterministic_master(capsys):
    chk = Check(10, "nondeterministic master: anonymity holds, sabotaged variant fails", 600.0)
    v = check_anonymity_nondet(build_dcp_nondet(), 20)
    chk.expect(v.holds is True, f"verdict {v.holds}")
    bad = check_anonymity_nondet(build_dcp_nondet(sabotage=True), 20)
    chk.expect(bad.holds is False and bad.witness is not None, f"sabotaged verdict {bad.holds}")
    chk.finish(capsys)


if __name__ == "__main__":
    tests = [f for name, f in sorted(globals().items()) if name.startswith("test_criterion_")]
    failed = 0
    for f in tests:
        try:
            f(None)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
