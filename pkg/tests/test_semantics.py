from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ccs_sigma.analysis import check_deterministic
from ccs_sigma.parser import format_process, parse_process, parse_scheduler
from ccs_sigma.semantics import (
    ANY_INDEP, STUCK_PROCESS, STUCK_SCHEDULER, AmbiguousStep, CompleteState, Delegate, Pair,
    Single, Step, candidate_moves, ccsp_step, derive, distinct, enabled_moves, is_terminal,
    resolve, step,
)
from ccs_sigma.terms import TAU, Label, erase

from gen import labeled_terms, random_labeled

L = Label


def run(p, s, t=None):
    return step(CompleteState(parse_process(p), parse_scheduler(s), parse_scheduler(t) if t else None))


def test_act_and_res():
    r = run("new b . l: a . k: b", "sigma(l)")
    assert isinstance(r, Step)
    assert str(r.action) == "a"
    assert run("new a . l: a", "sigma(l)") is STUCK_PROCESS


def test_sum_picks_the_labeled_branch():
    r = run("l1: a + l2: b", "sigma(l2)")
    assert str(r.action) == "b"
    (nxt,) = r.dist.support()
    assert format_process(nxt.process) == "0"


def test_probabilistic_step():
    r = run("l: (l1: a +_1/3 l2: b)", "sigma(l) . sigma(l1)")
    assert r.action == TAU
    ws = sorted(r.dist[x] for x in r.dist)
    assert ws == [Fraction(1, 3), Fraction(2, 3)]


def test_identical_branches_merge():
    r = run("l: (k: a +_1/2 k: a)", "sigma(l)")
    assert r.dist.is_dirac()


def test_synchronization_in_both_orders():
    a = run("new a . (l1: a | l2: !a)", "sigma(l1, l2)")
    b = run("new a . (l1: a | l2: !a)", "sigma(l2, l1)")
    assert a.action == TAU and b.action == TAU
    assert a.dist == b.dist
    assert a.derivation.sync == ("a", L("l1"), L("l2"))


def test_test_rule_takes_first_enabled_operand():
    r = run("l1: a | l2: b", "sigma(l3) + sigma(l2) + sigma(l1)")
    assert str(r.action) == "b"
    assert [str(m) for m, _ in resolve(parse_scheduler("sigma(a) + sigma(b, c)"))] == ["sigma(a)", "sigma(b,c)"]


def test_scheduler_stuck_versus_process_stuck():
    assert run("l: (l1: a +_1/2 l2: b)", "sigma(l) . sigma(l1)") != STUCK_SCHEDULER
    assert run("l1: a", "sigma(l2)") is STUCK_SCHEDULER
    assert run("0", "sigma(l2)") is STUCK_PROCESS
    assert run("l1: a", "0") is STUCK_SCHEDULER


def test_bang_relabels_copies():
    r = run("bang (l1: a . l2: b)", "sigma(l1)")
    (nxt,) = r.dist.support()
    assert format_process(nxt.process) == "l2^0: b | bang l1^1: a . l2^1: b"


def test_bang_synchronization_between_copies():
    r = run("bang (l1: a + l2: !a)", "sigma(l1, l2)")
    assert r.action == TAU
    assert r.derivation.rule[0] == "BANG2"


def test_replicated_parallel_body_is_ambiguous():
    # a synchronization inside one copy and between two copies are both derivable
    p = parse_process("bang (l1: a | l2: !a)")
    ds = distinct(derive(p, Pair(L("l1"), L("l2"))))
    assert sorted(d.rule[0] for d in ds) == ["BANG1", "BANG2"]
    with pytest.raises(AmbiguousStep):
        step(CompleteState(p, parse_scheduler("sigma(l1, l2)")))
    assert not check_deterministic(p, 3).ok


def test_shared_label_is_ambiguous():
    with pytest.raises(AmbiguousStep) as exc:
        run("l1: a | l1: b", "sigma(l1)")
    assert len(exc.value.derivations) == 2


def test_shared_label_in_sum_is_deterministic_when_restricted():
    p = "new a, b . ((l1: a . l3: c + l1: b) | l2: !a)"
    assert check_deterministic(parse_process(p), 5).ok
    r = run(p, "sigma(l1, l2) . sigma(l3)")
    assert r.action == TAU


def test_protected_block_needs_independent_scheduler():
    p = "l: { k1: tau . l1: a + k2: tau . l2: b }"
    assert run(p, "sigma(l)") is STUCK_PROCESS
    r = run(p, "sigma(l)", "sigma(k2)")
    (nxt,) = r.dist.support()
    assert format_process(nxt.process) == "l2: b"
    assert nxt.indep == parse_scheduler("0")
    assert Delegate(L("l")) in candidate_moves(parse_process(p))
    ds = derive(parse_process(p), Delegate(L("l")), ANY_INDEP)
    assert len(ds) == 2


def test_enabled_moves_and_terminal():
    p = parse_process("new a . (l1: a | l2: !a | l3: b)")
    moves = enabled_moves(p)
    assert set(moves) == {Pair(L("l1"), L("l2")), Single(L("l3"))}
    assert is_terminal(parse_process("new a . l: a"))
    assert not is_terminal(p)


def _erase_dist(mu):
    return mu.map(erase)


@given(labeled_terms)
def test_labeled_steps_are_unlabeled_steps(p):
    unlabeled = {(a, mu) for a, mu in ccsp_step(erase(p))}
    for m in candidate_moves(p):
        for d in derive(p, m):
            assert (d.action, _erase_dist(d.dist)) in unlabeled


@given(labeled_terms)
def test_every_unlabeled_step_has_a_move(p):
    labeled = set()
    for m in candidate_moves(p):
        for d in derive(p, m):
            labeled.add((d.action, _erase_dist(d.dist)))
    for tr in ccsp_step(erase(p)):
        assert tr in labeled


@given(labeled_terms)
def test_linear_labelings_never_ambiguous(p):
    for m in candidate_moves(p):
        assert len(distinct(derive(p, m))) <= 1


@given(labeled_terms)
def test_linear_labelings_deterministic_everywhere(p):
    v = check_deterministic(p, 20)
    assert v.kind == "deterministic"


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_linear_labelings_with_replication_deterministic(seed):
    assert check_deterministic(random_labeled(seed, depth=4), 6).ok
