"""Python front end for the tracewise library.

Instances, answers and verdicts are plain dicts in the same JSON shape the
command line tool reads and writes.
"""

import json

from . import _core
from ._core import (
    TracewiseError,
    log_failure_probability,
    plateau_scan,
    simulate_independent,
    simulate_tree,
    success_probability,
    verify_expression_24,
)

__all__ = [
    "TracewiseError",
    "error_code",
    "generate",
    "solve",
    "oracle",
    "prompt",
    "parse",
    "audit",
    "audit_fixture",
    "run_campaign",
    "verify_expression_24",
    "success_probability",
    "log_failure_probability",
    "simulate_independent",
    "simulate_tree",
    "plateau_scan",
]


def error_code(err):
    """Code name carried by a TracewiseError, e.g. "DomainError"."""
    return err.args[1] if len(err.args) > 1 else None


def generate(kind, size=None, seed=0):
    return json.loads(_core.generate(kind, dict(size or {}), seed))


def solve(instance):
    """Canonical trace text and answer for an instance dict."""
    return json.loads(_core.solve(json.dumps(instance)))


def oracle(instance):
    return json.loads(_core.oracle(json.dumps(instance)))


def prompt(instance, template_dir=""):
    return _core.prompt(json.dumps(instance), template_dir)


def parse(kind, text):
    return json.loads(_core.parse(kind, text))


def audit(instance, raw, thinking=None, model=""):
    return json.loads(_core.audit(json.dumps(instance), raw, thinking, model))


def audit_fixture(fixture):
    if not isinstance(fixture, str):
        fixture = json.dumps(fixture)
    return json.loads(_core.audit_fixture(fixture))


def run_campaign(config, workers=0):
    """Run a campaign from a config dict. Relative paths resolve against the
    current directory."""
    return json.loads(_core.run_campaign(json.dumps(config), workers))
