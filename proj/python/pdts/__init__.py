"""Deterministic simulator and property checker for parallel distributed
transactional systems.

Traces are lists of step dicts; everything else is plain JSON data.
"""

import json

from . import _core
from ._core import PdtsError

__all__ = [
    "PdtsError",
    "Run",
    "run",
    "check",
    "check_history",
    "history",
    "explore",
    "matrix",
    "scenario",
    "scenario_names",
    "variants",
]


def _text(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return json.dumps(value)


class Run:
    """Result of :func:`run`: the trace plus what is needed to replay it."""

    def __init__(self, jsonl, context):
        self.jsonl = jsonl
        self.context = json.loads(context)

    @property
    def steps(self):
        return [json.loads(line) for line in self.jsonl.splitlines()]

    @property
    def schedule(self):
        return self.context["schedule"]

    def responses(self):
        return [s for s in self.steps if s["kind"] == "response" and s.get("coord")]

    def check(self, prop, s=1):
        return check(self, prop, s=s)


def run(scenario, algorithm="base", schedule="fifo", config=None):
    """Run a builtin scenario name (or scenario dict) under a schedule spec
    ("builtin:fids", "fifo", "random:7", or a schedule dict / decision list)."""
    return Run(*_core.run(_text(scenario), algorithm, _text(schedule), _text(config)))


def check(trace, prop, context=None, s=1):
    """Check a property on a :class:`Run` or a JSON-lines trace string."""
    if isinstance(trace, Run):
        context = trace.context if context is None else context
        trace = trace.jsonl
    return json.loads(_core.check(trace, prop, _text(context), s))


def check_history(hist, method="auto"):
    """Serializability of a committed history dict; method is auto, brute-force or graph."""
    return json.loads(_core.check_history(_text(hist), method))


def history(trace, initial=None):
    if isinstance(trace, Run):
        if initial is None:
            initial = {i["id"]: i["initial"] for i in trace.context["scenario"]["items"]}
        trace = trace.jsonl
    return json.loads(_core.history(trace, _text(initial)))


def explore(scenario, algorithm="base", mode="exhaustive", max=None, seed=1, preemption_bound=0):
    return json.loads(_core.explore(_text(scenario), algorithm, mode, max, seed, preemption_bound))


def matrix():
    """Returns (markdown, report dict)."""
    md, report = _core.matrix()
    return md, json.loads(report)


def scenario(name):
    return json.loads(_core.scenario(name))


def scenario_names():
    return list(_core.scenario_names())


def variants():
    return list(_core.variants())
