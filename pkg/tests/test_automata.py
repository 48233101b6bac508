from fractions import Fraction

import pytest
from hypothesis import given, settings

from ccs_sigma.analysis import scheduler_correspondence
from ccs_sigma.automata import (
    ProbAutomaton, StateLimitExceeded, count_semantic_schedulers, enumerate_semantic_schedulers,
    etree, is_fully_probabilistic, prob_bisim, reachable_states, unfold_complete, unfold_process,
)
from ccs_sigma.parser import parse_process, parse_scheduler
from ccs_sigma.semantics import CompleteState
from ccs_sigma.terms import erase

from gen import labeled_terms

H = Fraction(1, 2)


def complete(p, s):
    return unfold_complete(CompleteState(parse_process(p), parse_scheduler(s)), 10)


def test_unfold_interleaving():
    m = unfold_process(parse_process("a | b"), 5)
    assert len(m) == 4
    assert m.num_transitions() == 4
    assert not is_fully_probabilistic(m)
    assert count_semantic_schedulers(m) == 2


def test_unfold_truncates_replication():
    m = unfold_process(parse_process("bang a"), 3)
    assert m.truncated
    with pytest.raises(StateLimitExceeded):
        unfold_process(parse_process("bang a | bang b"), 50, max_states=20)


def test_complete_process_marks_stuck_kinds():
    m = complete("l: (l1: a +_1/2 l2: b)", "sigma(l) . sigma(l1)")
    assert sorted(m.stuck.values()) == ["process", "scheduler"]
    assert is_fully_probabilistic(m)
    assert len(reachable_states(m)) == len(m)


def test_semantic_scheduler_count_matches_enumeration():
    for text in ["a | b | c", "a . (b + c) | d", "(a + b) | (c + d)"]:
        m = unfold_process(parse_process(text), 6)
        assert count_semantic_schedulers(m) == len(list(enumerate_semantic_schedulers(m)))


def test_etree_is_fully_probabilistic():
    m = unfold_process(parse_process("(a +_1/2 b) | c"), 6)
    for z in enumerate_semantic_schedulers(m):
        t = etree(m, z)
        assert is_fully_probabilistic(t)


def test_bisimulation_basics():
    a = ProbAutomaton.from_edges(3, [(0, "t", {1: H, 2: H}), (1, "a", {2: 1})])
    b = ProbAutomaton.from_edges(4, [(0, "t", {1: H, 2: H}), (1, "a", {3: 1})])
    c = ProbAutomaton.from_edges(3, [(0, "t", {1: Fraction(1, 3), 2: Fraction(2, 3)}), (1, "a", {2: 1})])
    assert prob_bisim(a, b)
    assert not prob_bisim(a, c)
    # states with the same future are lumped: two branches to equal leaves
    d = ProbAutomaton.from_edges(4, [(0, "t", {1: H, 2: H}), (1, "a", {3: 1}), (2, "a", {3: 1})])
    e = ProbAutomaton.from_edges(3, [(0, "t", {1: 1}), (1, "a", {2: 1})])
    assert prob_bisim(d, e)
    with pytest.raises(ValueError):
        prob_bisim(unfold_process(parse_process("a | b"), 3), e)


def test_semantic_and_syntactic_schedulers_correspond():
    for text in ["l1: a | l2: b", "l1: a . (l2: b + l3: c)", "l1: a | l2: !a"]:
        c = scheduler_correspondence(parse_process(text), 4)
        assert c.holds
        assert c.semantic == c.syntactic


def test_correspondence_needs_scheduler_choice_after_a_coin():
    c = scheduler_correspondence(parse_process("l: (l1: a +_1/2 l2: b)"), 4)
    assert c.holds and c.semantic == 1


def test_cycles_rejected():
    m = ProbAutomaton.from_edges(2, [(0, "a", {1: 1}), (1, "b", {0: 1})])
    with pytest.raises(ValueError):
        list(enumerate_semantic_schedulers(m))


@settings(max_examples=25)
@given(labeled_terms)
def test_correspondence_on_pure_terms(p):
    from ccs_sigma.terms import ProbSum, subterms
    if any(isinstance(t, ProbSum) for t in subterms(p)):
        return
    m = unfold_process(erase(p), 4)
    if count_semantic_schedulers(m) > 60:
        return
    assert scheduler_correspondence(p, 4).holds
