"""Random term generators shared by the property tests and the acceptance run."""
from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from ccs_sigma.terms import (
    NIL, TAU, Bang, Par, Prefix, ProbSum, Restrict, Sum, inp, label_linear, out,
)

CHANNELS = ("a", "b", "c")
WEIGHTS = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(2, 5))


def _action(rng: random.Random):
    k = rng.randrange(7)
    if k == 6:
        return TAU
    ch = CHANNELS[k % 3]
    return inp(ch) if k < 3 else out(ch)


def _guarded(rng: random.Random, depth: int):
    # replicated bodies are prefixes or sums of prefixes, never a parallel
    # composition that could talk to itself
    body = Prefix(None, _action(rng), random_term(rng, depth - 1, bang=False))
    if rng.random() < 0.3:
        body = Sum(body, Prefix(None, _action(rng), NIL))
    return Bang(body)


def random_term(rng: random.Random, depth: int, bang: bool = True, psum: bool = True,
                choice: bool = True, restrict: bool = True):
    """An unlabeled term of nesting depth at most ``depth``."""
    if depth <= 1:
        return NIL if rng.random() < 0.25 else Prefix(None, _action(rng), NIL)
    ops = ["prefix", "prefix", "par"]
    if choice:
        ops.append("sum")
    if psum:
        ops.append("psum")
    if restrict:
        ops.append("new")
    if bang:
        ops.append("bang")
    op = rng.choice(ops)
    kw = dict(bang=bang, psum=psum, choice=choice, restrict=restrict)
    sub = lambda: random_term(rng, depth - 1, **kw)  # noqa: E731
    if op == "prefix":
        return Prefix(None, _action(rng), sub())
    if op == "par":
        return Par(sub(), sub())
    if op == "sum":
        return Sum(sub(), sub())
    if op == "psum":
        w = rng.choice(WEIGHTS)
        return ProbSum(None, ((w, sub()), (1 - w, sub())))
    if op == "new":
        return Restrict(rng.choice(CHANNELS), sub())
    return _guarded(rng, depth)


def random_labeled(seed: int, depth: int = 5, **kw):
    return label_linear(random_term(random.Random(seed), depth, **kw))


# hypothesis strategies

actions = st.one_of(
    st.just(TAU),
    st.sampled_from(CHANNELS).map(inp),
    st.sampled_from(CHANNELS).map(out),
)
weights = st.sampled_from(WEIGHTS)


def _extend(children):
    return st.one_of(
        st.builds(lambda a, p: Prefix(None, a, p), actions, children),
        st.builds(Par, children, children),
        st.builds(Sum, children, children),
        st.builds(lambda w, p, q: ProbSum(None, ((w, p), (1 - w, q))), weights, children, children),
        st.builds(Restrict, st.sampled_from(CHANNELS), children),
    )


leaves = st.one_of(st.just(NIL), actions.map(lambda a: Prefix(None, a, NIL)))
unlabeled_terms = st.recursive(leaves, _extend, max_leaves=8)
labeled_terms = unlabeled_terms.map(label_linear)


def random_context(rng: random.Random, depth: int):
    """A bang-free context with exactly one hole."""
    from ccs_sigma.terms import HOLE
    if depth <= 1:
        return HOLE
    op = rng.choice(["hole", "prefix", "par", "sum", "psum", "new"])
    sub = lambda: random_context(rng, depth - 1)  # noqa: E731
    other = lambda: random_term(rng, depth - 1, bang=False)  # noqa: E731
    if op == "hole":
        return HOLE
    if op == "prefix":
        return Prefix(None, _action(rng), sub())
    if op == "new":
        return Restrict(rng.choice(CHANNELS), sub())
    pair = [sub(), other()]
    rng.shuffle(pair)
    if op == "par":
        return Par(*pair)
    if op == "sum":
        return Sum(*pair)
    w = rng.choice(WEIGHTS)
    return ProbSum(None, ((w, pair[0]), (1 - w, pair[1])))


def random_test(rng: random.Random, depth: int):
    """A test: visible prefixes only, success reached at some leaves."""
    from ccs_sigma.terms import OMEGA_ACTION
    if depth <= 1:
        return Prefix(None, OMEGA_ACTION, NIL) if rng.random() < 0.6 else NIL
    k = rng.randrange(6)
    ch = CHANNELS[k % 3]
    act = inp(ch) if k < 3 else out(ch)
    op = rng.choice(["prefix", "prefix", "par", "sum"])
    sub = lambda: random_test(rng, depth - 1)  # noqa: E731
    if op == "prefix":
        return Prefix(None, act, sub())
    if op == "par":
        return Par(sub(), sub())
    return Sum(Prefix(None, act, sub()), Prefix(None, _visible(rng), sub()))


def _visible(rng: random.Random):
    k = rng.randrange(6)
    ch = CHANNELS[k % 3]
    return inp(ch) if k < 3 else out(ch)


def distributivity_instance(seed: int):
    """``(C, P, Q, p, O)`` with disjoint label atoms."""
    rng = random.Random(seed)
    c = label_linear(random_context(rng, 3), atom="c")
    p = label_linear(random_term(rng, 3, bang=False), atom="p")
    q = label_linear(random_term(rng, 3, bang=False), atom="q")
    prob = rng.choice(WEIGHTS)
    o = label_linear(random_test(rng, 4), atom="o")
    return c, p, q, prob, o
