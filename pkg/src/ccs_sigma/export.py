"""DOT and JSON export of automata, and JSON forms of analysis verdicts.

Probabilities are always written as ``"num/den"`` strings.
"""
from __future__ import annotations

import json
from fractions import Fraction

import jsonschema

from .automata import ProbAutomaton
from .distribution import Distribution
from .parser import format_action, format_process, format_scheduler
from .semantics import CompleteState
from .terms import Action


def frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(text: str) -> Fraction:
    return Fraction(text)


def describe_state(s) -> str:
    if isinstance(s, CompleteState):
        text = f"{format_process(s.process)} || {format_scheduler(s.scheduler)}"
        if s.indep is not None:
            text += f" || T = {format_scheduler(s.indep)}"
        return text
    if hasattr(s, "labels"):
        return format_process(s)
    return str(s)


def _action_text(a) -> str:
    return format_action(a) if isinstance(a, Action) else str(a)


def _status(m: ProbAutomaton, i: int) -> str:
    if i in m.truncated:
        return "truncated"
    kind = m.stuck.get(i)
    if kind == "scheduler":
        return "scheduler-stuck"
    if kind == "process" or not m.transitions[i]:
        return "terminal"
    return "internal"


# ---------------------------------------------------------------------------
# DOT

_STYLE = {
    "internal": 'shape=ellipse',
    "terminal": 'shape=doublecircle',
    "scheduler-stuck": 'shape=box, style=dashed',
    "truncated": 'shape=box, style=dotted',
}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def automaton_to_dot(m: ProbAutomaton, name: str = "automaton", terms: bool = True) -> str:
    """Graphviz source.  Probabilistic transitions with several targets go
    through a small point node."""
    lines = [f'digraph "{_dot_escape(name)}" {{', "  rankdir=TB;"]
    for i, s in enumerate(m.states):
        label = f"{i}: {describe_state(s)}" if terms else str(i)
        extra = ", penwidth=2" if i == m.initial else ""
        lines.append(f'  s{i} [label="{_dot_escape(label)}", {_STYLE[_status(m, i)]}{extra}];')
    for i, trs in enumerate(m.transitions):
        for k, (a, mu) in enumerate(trs):
            act = _dot_escape(_action_text(a))
            items = list(mu.items())
            if len(items) == 1:
                t, w = items[0]
                lines.append(f'  s{i} -> s{t} [label="{act} [{frac(w)}]"];')
                continue
            hub = f"p{i}_{k}"
            lines.append(f'  {hub} [shape=point];')
            lines.append(f'  s{i} -> {hub} [label="{act}", arrowhead=none];')
            for t, w in items:
                lines.append(f'  {hub} -> s{t} [label="{act} [{frac(w)}]", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON

FRACTION_PATTERN = r"^-?[0-9]+/[1-9][0-9]*$"

AUTOMATON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "probabilistic automaton",
    "type": "object",
    "required": ["initial", "states", "transitions"],
    "additionalProperties": False,
    "properties": {
        "initial": {"type": "integer", "minimum": 0},
        "states": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "term", "status"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "term": {"type": "string"},
                    "status": {"enum": sorted(_STYLE)},
                },
            },
        },
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source", "action", "distribution"],
                "additionalProperties": False,
                "properties": {
                    "source": {"type": "integer", "minimum": 0},
                    "action": {"type": "string"},
                    "distribution": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["target", "probability"],
                            "additionalProperties": False,
                            "properties": {
                                "target": {"type": "integer", "minimum": 0},
                                "probability": {"type": "string", "pattern": FRACTION_PATTERN},
                            },
                        },
                    },
                },
            },
        },
    },
}


def automaton_to_json(m: ProbAutomaton) -> dict:
    return {
        "initial": m.initial,
        "states": [{"id": i, "term": describe_state(s), "status": _status(m, i)} for i, s in enumerate(m.states)],
        "transitions": [
            {"source": i, "action": _action_text(a),
             "distribution": [{"target": t, "probability": frac(w)} for t, w in mu.items()]}
            for i, trs in enumerate(m.transitions) for a, mu in trs
        ],
    }


def validate_automaton_json(doc: dict):
    """Raise ``jsonschema.ValidationError`` or ``ValueError`` on a malformed document."""
    jsonschema.validate(doc, AUTOMATON_SCHEMA)
    n = len(doc["states"])
    if [s["id"] for s in doc["states"]] != list(range(n)):
        raise ValueError("state ids must be 0..n-1 in order")
    if not 0 <= doc["initial"] < n:
        raise ValueError("initial state out of range")
    for tr in doc["transitions"]:
        if not 0 <= tr["source"] < n:
            raise ValueError(f"transition source {tr['source']} out of range")
        total = sum(parse_frac(d["probability"]) for d in tr["distribution"])
        if total != 1:
            raise ValueError(f"distribution from state {tr['source']} sums to {total}")
        for d in tr["distribution"]:
            if not 0 <= d["target"] < n:
                raise ValueError(f"transition target {d['target']} out of range")


def automaton_from_json(doc: dict) -> ProbAutomaton:
    """Rebuild an automaton; states become their printed terms and actions
    stay strings."""
    validate_automaton_json(doc)
    n = len(doc["states"])
    trans = [[] for _ in range(n)]
    for tr in doc["transitions"]:
        mu = Distribution((d["target"], parse_frac(d["probability"])) for d in tr["distribution"])
        trans[tr["source"]].append((tr["action"], mu))
    truncated = frozenset(s["id"] for s in doc["states"] if s["status"] == "truncated")
    stuck = {s["id"]: ("scheduler" if s["status"] == "scheduler-stuck" else "process")
             for s in doc["states"] if s["status"] in ("scheduler-stuck", "terminal")}
    return ProbAutomaton([s["term"] for s in doc["states"]], trans, doc["initial"], truncated, stuck)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# verdicts


def pomega_to_dict(r) -> dict:
    return {"success": frac(r.success), "failure": frac(r.failure), "truncated": frac(r.truncated)}


def verdict_to_dict(v) -> dict:
    """JSON form of a :class:`~ccs_sigma.analysis.PreorderVerdict`."""
    out = {
        "mode": v.mode,
        "holds": v.holds,
        "depth": v.depth,
        "tests": list(v.tests),
        "details": [
            {"test": c.test, "values_p": [frac(x) for x in c.values_p],
             "values_q": [frac(x) for x in c.values_q], "truncated": c.truncated, "holds": c.holds}
            for c in v.details
        ],
        "witness": None,
    }
    w = v.witness
    if w is not None:
        out["witness"] = {
            "test": w.test,
            "scheduler_p": format_scheduler(w.scheduler_p) if w.scheduler_p is not None else None,
            "scheduler_q": format_scheduler(w.scheduler_q) if w.scheduler_q is not None else None,
            "result_p": pomega_to_dict(w.result_p) if w.result_p is not None else None,
            "result_q": pomega_to_dict(w.result_q) if w.result_q is not None else None,
        }
    return out


def distributivity_to_dict(r) -> dict:
    return {
        "holds": r.holds,
        "depth": r.depth,
        "r1": format_process(r.r1),
        "r2": format_process(r.r2),
        "may": r.may,
        "must": r.must,
        "matched": r.matched,
        "tests": [
            {"test": name, "values_r1": [frac(x) for x in v1], "values_r2": [frac(x) for x in v2],
             "matched": matched, "truncated": trunc}
            for name, v1, v2, matched, trunc in r.per_test
        ],
        "identities": [{"name": i.name, "test": i.test, "holds": i.holds, "detail": i.detail}
                       for i in r.identities],
    }
