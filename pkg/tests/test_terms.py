from fractions import Fraction

import pytest
from hypothesis import given

from ccs_sigma.distribution import Distribution, DistributionError, lift_distribution
from ccs_sigma.parser import parse_context, parse_process
from ccs_sigma.terms import (
    HOLE, NIL, InValue, Label, Par, Prefix, ProbSum, TermError, check_fresh, check_linear, children,
    count_holes, erase, fill, free_channels, inp, label_linear, label_multiset, out, psum,
    relabel, restrict_all, subterms,
)
from ccs_sigma.values import ValuePassingError, ValueSpec, desugar_value_passing, fuse, split_fused

from gen import labeled_terms, unlabeled_terms


def test_label_index_must_be_bits():
    assert str(Label("l", "01")) == "l^01"
    with pytest.raises(TermError):
        Label("l", "2")
    with pytest.raises(TermError):
        Label("")


def test_probsum_weights_checked():
    with pytest.raises(TermError):
        ProbSum(None, ((Fraction(1, 2), NIL), (Fraction(1, 3), NIL)))
    with pytest.raises(TermError):
        psum("l", 1, NIL, NIL)
    with pytest.raises(TermError):
        ProbSum(None, ((0.5, NIL), (0.5, NIL)))


def test_linear_and_fresh():
    p = parse_process("l1: a | l2: b")
    q = parse_process("l1: a | l1: b")
    assert check_linear(p)
    assert not check_linear(q)
    assert label_multiset(q)[Label("l1")] == 2
    assert check_fresh(parse_process("k: a"), [p])
    assert not check_fresh(parse_process("l2: a"), [p])
    # sharing inside branches of a choice is not linear but can be deterministic
    assert not check_linear(parse_process("new a, b . (l1: a . l3: c + l1: b | l2: !a)"))


def test_relabel_appends_bits():
    p = parse_process("l1: a . l2: b | k: (l3: c +_1/2 0)")
    r = relabel(p, "0")
    assert {str(x) for x in r.labels} == {"l1^0", "l2^0", "k^0", "l3^0"}
    assert relabel(NIL, "1") is NIL


def test_fill_and_holes():
    c = parse_context("l: (l1: a +_1/2 hole)")
    assert count_holes(c) == 1
    filled = fill(c, parse_process("l2: b"))
    assert count_holes(filled) == 0
    with pytest.raises(TermError):
        fill(parse_process("l1: a"), NIL)
    assert fill(HOLE, NIL) == NIL


def test_restrict_all_keeps_omega():
    p = parse_process("l1: a . l2: omega | l3: !b")
    assert free_channels(p) == ["a", "omega", "b"]
    assert free_channels(restrict_all(p)) == ["omega"]


def test_value_passing_expansion():
    spec = ValueSpec("c", ("0", "1"))
    p = parse_process("l1: c(x) . l2: !d<x>", values={"c": spec, "d": ValueSpec("d", ("0", "1"))})
    assert check_linear(p) is False        # one label per value branch
    assert set(label_multiset(p).values()) == {2}
    assert split_fused(fuse("c", 1)) == ("c", "1")
    with pytest.raises(ValuePassingError):
        ValueSpec("c", ())
    with pytest.raises(ValuePassingError):
        desugar_value_passing(InValue(Label("l"), "e", "x", NIL), [spec])


def test_distribution_merges_and_checks():
    d = Distribution([("a", Fraction(1, 2)), ("a", Fraction(1, 4)), ("b", Fraction(1, 4))])
    assert d["a"] == Fraction(3, 4)
    assert d.total() == 1
    with pytest.raises(DistributionError):
        Distribution([("a", Fraction(1, 2))])
    m = d.map(lambda s: "x")
    assert m.is_dirac() and m["x"] == 1
    mixed = Distribution.convex([(Fraction(1, 2), Distribution.dirac("a")), (Fraction(1, 2), d)])
    assert mixed["a"] == Fraction(7, 8)
    assert lift_distribution(d, str.upper)["A"] == Fraction(3, 4)


@given(labeled_terms)
def test_label_linear_is_linear(p):
    assert check_linear(p)
    assert erase(label_linear(erase(p))) == erase(p)


@given(labeled_terms)
def test_relabel_preserves_linearity(p):
    assert check_linear(relabel(p, "1"))
    assert len(relabel(p, "0").labels) == len(p.labels)


@given(labeled_terms)
def test_linearity_inherited_by_subterms(p):
    for t in subterms(p):
        assert check_linear(t)


@given(unlabeled_terms)
def test_children_cover_subterms(p):
    count = sum(1 for _ in subterms(p))
    assert count == 1 + sum(sum(1 for _ in subterms(k)) for k in children(p))


def test_constructors():
    p = Par(Prefix(Label("l"), inp("a"), NIL), Prefix(None, out("a"), NIL))
    assert p.labels == frozenset({Label("l")})
