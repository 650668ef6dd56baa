"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
always available.  ``PCTCOEF_BACKEND=pure`` (or ``compiled``) forces a
choice, which the benchmark and the cross-backend tests rely on.
"""

from __future__ import annotations

import logging
import os

from . import _ols_fallback

log = logging.getLogger(__name__)

try:
    from . import _ols_kernel
except ImportError:  # pragma: no cover - depends on the build environment
    _ols_kernel = None

_BACKENDS = {"pure": _ols_fallback}
if _ols_kernel is not None:
    _BACKENDS["compiled"] = _ols_kernel


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Return a kernel module by name, or the best available one."""
    if name is None:
        return _BACKENDS.get("compiled", _ols_fallback)
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {available_backends()}"
        ) from None


_active = get_backend(os.environ.get("PCTCOEF_BACKEND") or None)
if _active is _ols_fallback and _ols_kernel is None:
    log.debug("compiled kernel unavailable; using the pure-NumPy fallback")


def active():
    """The kernel module in use for this process."""
    return _active


BACKEND = _active.NAME
RANK_TOL = _ols_fallback.RANK_TOL
