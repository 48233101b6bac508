"""Secret value passing over finite domains.

``l: c(x).P`` becomes the nondeterministic sum over the domain of ``c`` of
``l: c%v.P[v/x]``, every branch keeping the same label ``l``; an output
``l: !c<v>.P`` becomes ``l: !c%v.P``.  Restricting ``c`` restricts every
fused channel ``c%v``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .terms import (
    InValue, OutValue, Prefix, Process, Restrict, TermError, children, inp, nsum,
    out, rebuild,
)

FUSE = "%"


class ValuePassingError(TermError):
    pass


@dataclass(frozen=True)
class ValueSpec:
    channel: str
    domain: tuple[str, ...]

    def __post_init__(self):
        if not self.domain:
            raise ValuePassingError(f"value channel {self.channel!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise ValuePassingError(f"value channel {self.channel!r} has repeated values")
        if FUSE in self.channel:
            raise ValuePassingError(f"{self.channel!r}: value channel names may not contain {FUSE!r}")


def fuse(channel: str, value) -> str:
    return f"{channel}{FUSE}{value}"


def split_fused(name: str) -> tuple[str, str] | None:
    if FUSE not in name:
        return None
    base, _, value = name.partition(FUSE)
    return base, value


def desugar_value_passing(p: Process, specs: Iterable[ValueSpec] | Mapping[str, ValueSpec]) -> Process:
    if isinstance(specs, Mapping):
        table = dict(specs)
    else:
        table = {s.channel: s for s in specs}
    return _desugar(p, table, {})


def _desugar(p: Process, table: dict[str, ValueSpec], env: dict[str, str]) -> Process:
    if isinstance(p, InValue):
        spec = _spec(table, p.channel)
        branches = []
        for v in spec.domain:
            inner = dict(env)
            inner[p.var] = v
            branches.append(Prefix(p.label, inp(fuse(p.channel, v)), _desugar(p.cont, table, inner)))
        return nsum(*branches)
    if isinstance(p, OutValue):
        spec = _spec(table, p.channel)
        v = env.get(p.value, p.value)
        if v not in spec.domain:
            raise ValuePassingError(f"value {v!r} outside the domain of {p.channel!r}")
        return Prefix(p.label, out(fuse(p.channel, v)), _desugar(p.cont, table, env))
    if isinstance(p, Restrict) and p.channel in table:
        body = _desugar(p.body, table, env)
        for v in reversed(table[p.channel].domain):
            body = Restrict(fuse(p.channel, v), body)
        return body
    if isinstance(p, Prefix) and p.action.channel is not None:
        c = p.action.channel
        if c in table:
            raise ValuePassingError(f"value channel {c!r} used without a value")
        fused = split_fused(c)
        if fused and fused[0] in table:
            raise ValuePassingError(f"channel {c!r} collides with the encoding of value channel {fused[0]!r}")
    kids = children(p)
    if not kids:
        return p
    return rebuild(p, tuple(_desugar(k, table, env) for k in kids))


def _spec(table: dict[str, ValueSpec], channel: str) -> ValueSpec:
    try:
        return table[channel]
    except KeyError:
        raise ValuePassingError(f"no value specification for channel {channel!r}") from None


def has_sugar(p: Process) -> bool:
    stack = [p]
    while stack:
        t = stack.pop()
        if isinstance(t, (InValue, OutValue)):
            return True
        stack.extend(children(t))
    return False
