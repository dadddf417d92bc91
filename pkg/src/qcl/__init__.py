"""Qutrit chain classification and simulation.

The package follows one pipeline: build a rank-1 measurement on a
three-level unitary (:mod:`qcl.quantum`), restrict the dynamics to the
two-dimensional complement (:mod:`qcl.subsystem`), classify the induced
Markov chain either from the subsystem spectrum or from the numerical
range of the unitary (:mod:`qcl.classifier`, :mod:`qcl.numrange`), and
check the analytic picture against seeded Monte-Carlo runs
(:mod:`qcl.simulator`).  ``qcl.cli`` wraps all of it in a command-line
tool; ``qcl._kernels`` holds the compiled hot loops and their pure
NumPy fallback.
"""

from .classifier import (
    ChainKind,
    ChainType,
    CommensurabilityResult,
    TransitionDiagram,
    classify_by_eigen,
    classify_by_range,
    commensurability,
    expected_diagram,
)
from .errors import (
    DegenerateRange,
    DegenerateSpectrum,
    NotUnitary,
    OmegaMismatch,
    OutsideRange,
    QclError,
    SubsystemUnitary,
    ZeroProbability,
)
from .linalg import Spectrum3, eig_unitary3
from .numrange import (
    NumericalRange,
    RangeAtlas,
    RangeKind,
    numerical_range,
    render_atlas,
    write_atlas_csv,
    write_atlas_svg,
    z_from_omega,
)
from .quantum import (
    DensityMatrix,
    Pifs,
    density,
    evolve,
    maximally_mixed,
    pifs,
    prob,
    pure_state,
    rho_m,
    rho_v,
    rho_z,
)
from .simulator import SimConfig, SimReport, analytic_family
from .simulator import run as simulate
from .subsystem import (
    BallReport,
    MobiusClass,
    SubsystemMap,
    ball_eigenstates,
    ball_report,
    build_subsystem,
    fixed_points,
    iterate_f1,
    mobius_class,
)

__version__ = "0.1.0"

__all__ = [
    "BallReport",
    "ChainKind",
    "ChainType",
    "CommensurabilityResult",
    "DegenerateRange",
    "DegenerateSpectrum",
    "DensityMatrix",
    "MobiusClass",
    "NotUnitary",
    "NumericalRange",
    "OmegaMismatch",
    "OutsideRange",
    "Pifs",
    "QclError",
    "RangeAtlas",
    "RangeKind",
    "SimConfig",
    "SimReport",
    "Spectrum3",
    "SubsystemMap",
    "SubsystemUnitary",
    "TransitionDiagram",
    "ZeroProbability",
    "analytic_family",
    "ball_eigenstates",
    "ball_report",
    "build_subsystem",
    "classify_by_eigen",
    "classify_by_range",
    "commensurability",
    "density",
    "eig_unitary3",
    "evolve",
    "expected_diagram",
    "fixed_points",
    "iterate_f1",
    "maximally_mixed",
    "mobius_class",
    "numerical_range",
    "pifs",
    "prob",
    "pure_state",
    "render_atlas",
    "rho_m",
    "rho_v",
    "rho_z",
    "simulate",
    "write_atlas_csv",
    "write_atlas_svg",
    "z_from_omega",
]
