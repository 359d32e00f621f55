"""Seeded random instances, reference constructions and the property suite."""

from . import invariants  # noqa: F401
from .registry import get_invariant, register, registered_invariants  # noqa: F401
from .suite import replay, run_suite, run_trial  # noqa: F401
