"""Exact higher derived brackets on graded Lie algebras.

Algebra bundles are json documents (see the repository README for the
schema); every operation takes the bundle as a json string and returns a
plain dict with an "ok" flag and a list of checks.
"""

import json as _json

from ._core import (
    bernoulli_first,
    bernoulli_second,
    brackets,
    check,
    cocone,
    fiber_model,
    transfer_check,
    validate,
)

__all__ = [
    "bernoulli_first",
    "bernoulli_second",
    "brackets",
    "check",
    "cocone",
    "fiber_model",
    "transfer_check",
    "validate",
    "load_bundle",
]


def load_bundle(path):
    """Read a bundle file and return its json text."""
    with open(path, "r", encoding="utf-8") as fh:
        return _json.dumps(_json.load(fh))
