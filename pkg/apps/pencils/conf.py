# apps/pencils/conf.py

from contextlib import contextmanager
from contextvars import ContextVar

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    "TOL_RANK": 1e-9,
    "TOL_CLUSTER": 1e-7,
    "TOL_REGULAR": 1e-10,
    "TOL_MATCH": 1e-6,
    "TOL_RESIDUAL": 1e-8,
    "COND_LIMIT": 1e12,
    "DET_SAMPLES": 7,
    "SEED": None,
}

_scoped = ContextVar("pencil_lab_scoped_settings", default={})


def setting(name, override=None):
    """
    Returns the configured value of a ``PENCIL_LAB`` key.

    Precedence: explicit ``override``, then values scoped with
    :func:`overrides`, then ``settings.PENCIL_LAB``, then the built-in
    defaults (plain library use without Django settings).
    """
    if override is not None:
        return override
    scoped = _scoped.get()
    if name in scoped:
        return scoped[name]
    try:
        configured = getattr(settings, "PENCIL_LAB", {})
    except ImproperlyConfigured:
        configured = {}
    return configured.get(name, DEFAULTS[name])


@contextmanager
def overrides(**values):
    """Scopes ``PENCIL_LAB`` values, e.g. ``overrides(tol_rank=1e-8)``; ``None`` is ignored."""
    values = {key.upper(): value for key, value in values.items() if value is not None}
    unknown = set(values) - set(DEFAULTS)
    if unknown:
        raise KeyError(f"Unknown PENCIL_LAB keys: {', '.join(sorted(unknown))}")
    token = _scoped.set({**_scoped.get(), **values})
    try:
        yield
    finally:
        _scoped.reset(token)


def tolerances(**overrides):
    """Effective tolerance set, echoed into every report."""
    keys = ("TOL_RANK", "TOL_CLUSTER", "TOL_REGULAR", "TOL_MATCH", "TOL_RESIDUAL")
    return {key.lower(): setting(key, overrides.get(key.lower())) for key in keys}
