"""Shared generators and frozen constants for the test suite."""

import math

import numpy as np

from qcl.cli import CW_MATRIX
from qcl.numrange import NumericalRange

__all__ = [
    "CW_MATRIX",
    "OMEGA_B",
    "OMEGA_P",
    "PARABOLIC_LAMBDA",
    "CIRCULAR_LAMBDA",
    "haar_unitary",
    "random_state_vector",
    "random_density",
    "interior_omega",
    "edge_omega",
    "vertex_angles",
]

SQRT2 = math.sqrt(2.0)

# Landmarks of the worked three-level example, from its closed forms:
# the obtuse end of the real axis chord, the parabolic point, and the
# double eigenvalue / circular eigenvalue magnitudes met along the way.
OMEGA_B = (SQRT2 - 2.0) / 4.0
OMEGA_P = SQRT2 / 2.0 + 2.0 - math.sqrt(4.0 + 2.0 * SQRT2)
PARABOLIC_LAMBDA = math.sqrt(1.0 + 1.0 / SQRT2) - 1.0
CIRCULAR_LAMBDA = 2.0 ** (-0.25)


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 3x3 unitary via QR with the phase fix."""
    g = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / SQRT2
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state_vector(rng: np.random.Generator, dim: int = 3) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator) -> np.ndarray:
    """A full-rank random density matrix (Wishart, normalized)."""
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    m = g @ g.conj().T
    return m / np.trace(m).real


def interior_omega(nr: NumericalRange, rng: np.random.Generator, margin: float = 0.05) -> complex:
    """A point of W(U) with all barycentric coordinates at least `margin`."""
    w = margin + (1.0 - 3.0 * margin) * rng.dirichlet((1.0, 1.0, 1.0))
    return complex(sum(a * v for a, v in zip(w, nr.vertices)))


def edge_omega(nr: NumericalRange, rng: np.random.Generator, margin: float = 0.05) -> complex:
    """A point on a random triangle edge, away from the vertices."""
    i = int(rng.integers(3))
    j = (i + 1 + int(rng.integers(2))) % 3
    t = rng.uniform(margin, 1.0 - margin)
    return (1.0 - t) * nr.vertices[i] + t * nr.vertices[j]


def vertex_angles(vertices) -> list[float]:
    """Interior angle of the triangle at each vertex, in radians."""
    angles = []
    for i in range(3):
        a, b, c = vertices[i], vertices[(i + 1) % 3], vertices[(i + 2) % 3]
        u1, u2 = b - a, c - a
        cosang = (u1.real * u2.real + u1.imag * u2.imag) / (abs(u1) * abs(u2))
        angles.append(math.acos(max(-1.0, min(1.0, cosang))))
    return angles
