"""Runtime instrumentation of primitive operations.

Functions decorated with :func:`primitive` report each call to every active
:func:`record_primitives` block. The checklist uses this to confirm that a
hypothesis evaluator declared as classical never reaches a quantum surrogate.
"""
import contextvars
import functools
from collections import Counter
from contextlib import contextmanager

# primitives that stand in for a quantum algorithm
SURROGATE_PRIMITIVES = frozenset({"discrete_log", "factor_semiprime"})

_recorders = contextvars.ContextVar("learnsep_primitive_recorders", default=())


def note(name, count=1):
    for rec in _recorders.get():
        rec[name] += count


def primitive(name):
    def decorate(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            note(name)
            return func(*args, **kwargs)

        wrapper.primitive_name = name
        return wrapper

    return decorate


@contextmanager
def record_primitives():
    """Collect a Counter of primitive calls made inside the block."""
    rec = Counter()
    token = _recorders.set(_recorders.get() + (rec,))
    try:
        yield rec
    finally:
        _recorders.reset(token)
