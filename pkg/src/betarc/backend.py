"""Kernel backend selection.

The hot kernels (orbit iteration, beta log-likelihood sum) exist twice: a
Cython extension ``betarc._kernels_c`` and a pure-Python/numpy fallback
``betarc._kernels_py``.  The compiled one is preferred when importable.

Set ``BETARC_BACKEND=python`` (or ``c``) to force a specific backend; forcing
``c`` raises if the extension was not built.
"""

import os

_choice = os.environ.get("BETARC_BACKEND", "auto").lower()

if _choice in ("auto", "c", "ext", "compiled"):
    try:
        from betarc import _kernels_c as _impl

        BACKEND = "c"
    except ImportError:
        if _choice != "auto":
            raise
        from betarc import _kernels_py as _impl

        BACKEND = "python"
elif _choice in ("python", "py"):
    from betarc import _kernels_py as _impl

    BACKEND = "python"
else:
    raise ValueError(f"unknown BETARC_BACKEND value: {_choice!r}")

map_step = _impl.map_step
orbit_into = _impl.orbit_into
beta_loglik_sum = _impl.beta_loglik_sum


def backend_info() -> dict:
    """Name and module of the active kernel backend."""
    return {"backend": BACKEND, "module": _impl.__name__}
