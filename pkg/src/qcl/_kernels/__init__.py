"""Hot-loop kernels with a compiled fast path and a numpy fallback.

The two backends implement the same three entry points with identical
integer semantics (same PRNG, same decision logic).  Floating-point results
can differ by rounding since operation order is not pinned; the test suite
checks cross-backend agreement on fixed seeds and grids, but bit identity
across backends is not part of the contract.

Selection happens once at import: QCL_BACKEND=fast requires the compiled
extension, QCL_BACKEND=fallback forces pure numpy, unset prefers fast when
available.
"""

from __future__ import annotations

import os


def _load():
    choice = os.environ.get("QCL_BACKEND", "").strip().lower()
    if choice not in ("", "fast", "fallback"):
        raise ValueError(f"QCL_BACKEND must be 'fast' or 'fallback', got {choice!r}")
    if choice != "fallback":
        try:
            from . import _fast

            return _fast, "fast"
        except ImportError:
            if choice == "fast":
                raise
    from . import _fallback

    return _fallback, "fallback"


_backend, BACKEND_NAME = _load()

classify_cells = _backend.classify_cells
simulate_chain = _backend.simulate_chain
sm64_uniforms = _backend.sm64_uniforms
