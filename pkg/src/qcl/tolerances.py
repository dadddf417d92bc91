"""Numerical tolerances and iteration caps used across the package.

All comparisons in the library go through these module-level constants so
that every threshold is documented in one place.  `EPS_CLASS` (the
classification tolerance) can be overridden at runtime through the
``QCL_TOLERANCE`` environment variable; call :func:`eps_class` to read the
effective value.
"""

from __future__ import annotations

import os

# Unitarity acceptance: max-norm of U U* - I.
EPS_UNIT = 1e-9

# Eigen-decomposition residuals (reconstruction, eigenvector residual).
EPS_EIG = 1e-8

# Generic numerical agreement (algebraic identities, traces, inner products).
EPS_NUM = 1e-9

# Phase clustering threshold for repeated eigenvalues of a 3x3 unitary.
EPS_CLUSTER = 1e-8

# Probability floor: anything at or below this counts as "outside the domain".
EPS_PROB = 1e-12

# Classification tolerance on eigenvalue moduli / ratio tests (overridable).
EPS_CLASS_DEFAULT = 1e-9

# Geometric membership tolerance for barycentric coordinates.
EPS_GEO = 1e-9

# Fixed-point residual tolerance.
EPS_FIX = 1e-8

# Trajectory convergence / period-return tolerance.
EPS_CONV = 1e-8

# Rational-approximation acceptance for upsilon / pi.
EPS_RAT = 1e-9

# Largest denominator certified by the commensurability search.
Q_MAX = 64

# Default trajectory length cap.
N_MAX = 10000

# Simulator state-matching radius.
MATCH_TOL = 1e-6

# Atlas curve-containment constant: elliptic cells satisfy
# |musselman_eval(center)| <= CURVE_TOL * cell_size.  The cell test bounds
# |M| by |f'| * cell_size / 2 and |f'| = |trU - z||trU - 3z| <= 24 on the
# closed unit disc, so 16 holds with margin for every unitary; the worked
# example's atlas at resolution 512 peaks at ratio 1.90 (zero violations,
# rechecked in tests/test_acceptance.py).
CURVE_TOL = 16.0


def eps_class() -> float:
    """Effective classification tolerance.

    Reads ``QCL_TOLERANCE`` from the environment on every call so the CLI
    and long-lived processes pick up changes; falls back to
    :data:`EPS_CLASS_DEFAULT`.
    """
    raw = os.environ.get("QCL_TOLERANCE")
    if raw is None:
        return EPS_CLASS_DEFAULT
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"QCL_TOLERANCE is not a float: {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"QCL_TOLERANCE must be positive, got {value}")
    return value
