"""Labeled probabilistic CCS with syntactic schedulers.

Processes carry labels; schedulers are terms that pick what moves next by
label, so they cannot observe the outcome of private random choices.
"""
from .analysis import (
    EnumerationCapExceeded, PomegaResult, check_deterministic, check_distributivity,
    enumerate_syntactic_schedulers, is_nonblocking, p_omega, pomega_values, testing_equivalent,
    testing_preorder, test_system,
)
from .anonymity import (
    DcpConfig, build_dcp, build_dcp_nondet, check_anonymity_nondet, check_strong_anonymity,
    conditional_observable_dist, sample_anonymity,
)
from .automata import ProbAutomaton, prob_bisim, unfold_complete, unfold_process
from .parser import ParseError, format_process, format_scheduler, parse_context, parse_process, parse_scheduler, parse_source
from .semantics import AmbiguousStep, CompleteState, step
from .terms import Label, Process, Scheduler

__all__ = [
    "AmbiguousStep", "CompleteState", "DcpConfig", "EnumerationCapExceeded", "Label", "ParseError",
    "PomegaResult", "ProbAutomaton", "Process", "Scheduler", "build_dcp", "build_dcp_nondet",
    "check_anonymity_nondet", "check_deterministic", "check_distributivity", "check_strong_anonymity",
    "conditional_observable_dist", "enumerate_syntactic_schedulers", "format_process",
    "format_scheduler", "is_nonblocking", "p_omega", "parse_context", "parse_process",
    "parse_scheduler", "parse_source", "pomega_values", "prob_bisim", "sample_anonymity", "step", "test_system",
    "testing_equivalent", "testing_preorder", "unfold_complete", "unfold_process",
]
