"""Command-line surface: classify, map, simulate, and the worked-example check.

Exit codes: 0 success, 2 flag/input parse error, 3 domain error (omega
outside the range, degenerate geometry), 4 I/O error, 5 verification
failure.  The environment variable QCL_TOLERANCE overrides the default
classification tolerance (1e-9) for one process.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import re
import sys

import numpy as np

from . import tolerances as tol
from .classifier import ChainKind, ChainType, classify_by_eigen, classify_by_range, expected_diagram
from .errors import (
    DegenerateRange,
    DegenerateSpectrum,
    NotUnitary,
    OmegaMismatch,
    OutsideRange,
    SubsystemUnitary,
    ZeroProbability,
)
from .numrange import (
    ATLAS_COLORS,
    ATLAS_LEGEND,
    cubic_curve,
    musselman_eval,
    numerical_range,
    render_atlas,
    write_atlas_csv,
    write_atlas_svg,
    z_from_omega,
)
from .quantum import pifs
from .simulator import (
    SimConfig,
    analytic_edge_probs,
    report_json,
    run,
    write_outcome_stream,
)
from .subsystem import build_subsystem, det3, fixed_points, mobius_class

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4
EXIT_VERIFY = 5

_SQ2 = math.sqrt(2.0)

CW_MATRIX = np.array(
    [
        [1.0 / _SQ2, 1.0 / _SQ2, 0.0],
        [0.0, 0.0, -1.0],
        [-1.0 / _SQ2, 1.0 / _SQ2, 0.0],
    ],
    dtype=complex,
)

_BASIS = {
    "e1": np.array([1.0, 0.0, 0.0], dtype=complex),
    "e2": np.array([0.0, 1.0, 0.0], dtype=complex),
    "e3": np.array([0.0, 0.0, 1.0], dtype=complex),
}


class SpecError(ValueError):
    """Unparseable unitary/omega/z specification."""


_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_RE_REAL = re.compile(rf"^({_NUM})$")
_RE_IMAG = re.compile(rf"^({_NUM})i$")
_RE_BOTH = re.compile(rf"^({_NUM})([+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i$")


def parse_complex(text: str) -> complex:
    """Accepts `a`, `bi`, `a+bi`, `a-bi` with decimal reals."""
    text = text.strip()
    m = _RE_REAL.match(text)
    if m:
        return complex(float(m.group(1)), 0.0)
    m = _RE_IMAG.match(text)
    if m:
        return complex(0.0, float(m.group(1)))
    m = _RE_BOTH.match(text)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    raise SpecError(f"cannot parse complex literal {text!r} (use a, bi, a+bi or a-bi)")


def parse_unitary(spec: str) -> np.ndarray:
    """Resolve a UnitarySpec: `cw`, `diag:p1,p2,p3`, or a JSON file path."""
    if spec == "cw":
        return CW_MATRIX.copy()
    if spec.startswith("diag:"):
        parts = spec[len("diag:") :].split(",")
        if len(parts) != 3:
            raise SpecError(f"diag preset needs 3 phases, got {len(parts)}")
        try:
            phases = [float(p) for p in parts]
        except ValueError as exc:
            raise SpecError(f"bad diag phase: {exc}") from exc
        return np.diag([cmath.exp(1j * p) for p in phases])

    try:
        with open(spec, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise SpecError(f"unitary spec {spec!r} is not a preset and not a readable file") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON in {spec}: {exc}") from exc
    mat = doc.get("matrix") if isinstance(doc, dict) else None
    if mat is None:
        raise SpecError(f'{spec}: expected an object with a "matrix" key')
    try:
        u = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in mat],
            dtype=complex,
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise SpecError(f"{spec}: matrix entries must be [re, im] pairs") from exc
    if u.shape != (3, 3):
        raise SpecError(f"{spec}: matrix must be 3x3, got {u.shape}")
    defect = float(np.max(np.abs(u @ u.conj().T - np.eye(3))))
    if defect > 1e-9:
        raise SpecError(
            f"{spec}: matrix is not unitary (max |UU* - I| = {defect:.3e}); "
            "re-orthonormalize it (e.g. via a QR decomposition) and retry"
        )
    return u


def parse_zvec(text: str) -> np.ndarray:
    """A named basis vector e1/e2/e3 or three comma-separated complex literals."""
    if text in _BASIS:
        return _BASIS[text].copy()
    parts = text.split(",")
    if len(parts) != 3:
        raise SpecError(f"z-vector needs 3 components, got {len(parts)}")
    z = np.array([parse_complex(p) for p in parts], dtype=complex)
    norm = float(np.linalg.norm(z))
    if norm < 1e-12:
        raise SpecError("z-vector must be nonzero")
    return z / norm


def resolve_measurement(u: np.ndarray, omega_spec: str | None, z_spec: str | None):
    """Turn the --omega/--z flags into (omega, z or None)."""
    if z_spec is not None:
        z = parse_zvec(z_spec)
        return complex(z.conj() @ u @ z), z
    if omega_spec is None:
        raise SpecError("one of --omega or --z is required")
    if omega_spec == "trU":
        return complex(np.trace(u)), None
    if omega_spec == "zero":
        return 0.0 + 0.0j, None
    if "," in omega_spec:
        z = parse_zvec(omega_spec)
        return complex(z.conj() @ u @ z), z
    return parse_complex(omega_spec), None


def _fmt_c(w: complex) -> str:
    return f"{w.real:+.9f}{w.imag:+.9f}i"


def cmd_classify(args) -> int:
    u = parse_unitary(args.unitary)
    omega, z = resolve_measurement(u, args.omega, args.z)
    ct = classify_by_range(u, omega)
    if z is None:
        z = z_from_omega(u, omega)
    sub = build_subsystem(pifs(u, z))

    print(str(ct))
    print(f"omega: {_fmt_c(omega)}")
    print(f"lambda1: {_fmt_c(sub.lambda1)}")
    print(f"lambda2: {_fmt_c(sub.lambda2)}")
    print(f"psi: {sub.psi:.9f}" if sub.psi is not None else "psi: n/a")
    print(f"mobius: {mobius_class(sub).value}")
    try:
        fps = fixed_points(sub)
        if not fps.points:
            print("fixed points: none in the ball")
        else:
            names = ", ".join(f"rho_e{k + 1} ({fp.stability})" for k, fp in enumerate(fps.points))
            print(f"fixed points: {names}" + (" [segment]" if fps.segment else ""))
    except SubsystemUnitary:
        print("fixed points: every ball state (subsystem acts unitarily)")
    diagram = expected_diagram(ct, sub)
    print("diagram:")
    for edge in diagram.edges:
        prob_txt = f"p={edge.prob:.6f}" if edge.prob is not None else "p=?"
        suffix = " (possibly absent)" if edge.possibly_absent else ""
        print(f"  {edge.src} -> {edge.dst} {prob_txt}{suffix}")
    return EXIT_OK


def cmd_map(args) -> int:
    u = parse_unitary(args.unitary)
    try:
        atlas = render_atlas(u, args.resolution)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    write_atlas_csv(atlas, args.out)
    svg_path = args.svg
    if svg_path is None:
        base = args.out[:-4] if args.out.endswith(".csv") else args.out
        svg_path = base + ".svg"
    write_atlas_svg(atlas, svg_path)

    counts = atlas.counts()
    print(f"atlas {atlas.nx}x{atlas.ny} cells={len(atlas.cells)} -> {args.out}, {svg_path}")
    for code in sorted(counts):
        print(f"  {code} {ATLAS_LEGEND[code]}: {counts[code]}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    u = parse_unitary(args.unitary)
    omega, z = resolve_measurement(u, args.omega, args.z)
    if z is None:
        z = z_from_omega(u, omega)
    p = pifs(u, z)
    cfg = SimConfig(seed=args.seed, steps=args.steps, match_tol=args.match_tol)
    report = run(p, cfg)

    if args.out:
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(report_json(report))
            fh.write("\n")
    if args.stream:
        write_outcome_stream(report, args.stream)

    analytic = dict()
    for src, dst, pr in analytic_edge_probs(p, report.family, cfg.match_tol):
        analytic[(src, dst)] = pr
    print(f"steps={cfg.steps} seed={cfg.seed} unmatched={report.unmatched_states}")
    print(f"{'edge':<34}{'count':>8}{'empirical':>12}{'analytic':>12}")
    for src, dst, n, freq in report.empirical_edges:
        pr = analytic.get((src, dst))
        pr_txt = f"{pr:.6f}" if pr is not None else "-"
        print(f"{src + ' -> ' + dst:<34}{n:>8}{freq:>12.6f}{pr_txt:>12}")
    return EXIT_OK


def _cw_axis_expected(omega: float, omega_b: float, omega_p: float) -> tuple[ChainKind, ...]:
    """Expected kinds on the real axis of the worked example, with endpoints exact."""
    if omega == omega_b:
        return (ChainKind.TAUPEK,)
    if omega == 0.0:
        return (ChainKind.GENERIC_NULL,)
    if omega == 1.0:
        return (ChainKind.UNITARY,)
    if omega_b < omega <= omega_p:
        return (ChainKind.GENERIC,)
    if omega_p < omega < 1.0:
        return (ChainKind.FINITE_ELLIPTIC, ChainKind.INFINITE_ELLIPTIC)
    return ()


def cw_axis_report(n_points: int, endpoint_slack: float = 1e-6) -> list[tuple[float, str, str]]:
    """Classify n_points samples of [omega_b, 1] on the real axis of the example.

    Returns deviations as (omega, got, expected) for samples farther than
    endpoint_slack from every interval endpoint; an empty list means the
    whole axis matches the predicted intervals.
    """
    u = CW_MATRIX
    omega_b = (_SQ2 - 2.0) / 4.0
    omega_p = _SQ2 / 2.0 + 2.0 - math.sqrt(4.0 + 2.0 * _SQ2)
    endpoints = (omega_b, 0.0, omega_p, 1.0)

    samples = list(np.linspace(omega_b, 1.0, n_points)) + [omega_b, 0.0, omega_p, 1.0]
    bad: list[tuple[float, str, str]] = []
    for omega in samples:
        omega = float(omega)
        near_endpoint = any(abs(omega - e) <= endpoint_slack for e in endpoints)
        expected = _cw_axis_expected(omega, omega_b, omega_p)
        if not expected:
            continue
        ct = classify_by_range(u, complex(omega, 0.0))
        if ct.kind not in expected and not near_endpoint:
            bad.append((omega, str(ct), "/".join(k.name for k in expected)))
    return bad


def cmd_cw(args) -> int:
    """Recompute the worked example's constants and table, check by check."""
    u = CW_MATRIX
    checks: list[tuple[str, bool, str]] = []

    trace = complex(np.trace(u))
    checks.append(("trace", abs(trace - 1.0 / _SQ2) <= 1e-12, f"tr U = {_fmt_c(trace)}"))
    det = det3(u)
    checks.append(("determinant", abs(det - 1.0) <= 1e-12, f"det U = {_fmt_c(det)}"))

    rng = numerical_range(u)
    cos_gamma = (_SQ2 - 2.0) / 4.0
    off_axis = [w for w in rng.vertices if abs(w.imag) > 1e-9]
    gamma_ok = len(off_axis) == 2 and all(abs(w.real - cos_gamma) <= 1e-12 for w in off_axis)
    checks.append(("gamma_cos", gamma_ok, f"cos(gamma) = {cos_gamma:.9f}"))

    omega_b = cos_gamma
    checks.append(("omega_b", abs(omega_b - (-0.146)) <= 1e-3, f"omega_b = {omega_b:.9f}"))
    omega_p = _SQ2 / 2.0 + 2.0 - math.sqrt(4.0 + 2.0 * _SQ2)
    checks.append(("omega_p", abs(omega_p - 0.094) <= 1e-3, f"omega_p = {omega_p:.9f}"))

    sub_p = build_subsystem(pifs(u, z_from_omega(u, complex(omega_p, 0.0))))
    lam_expect = math.sqrt(2.0 + _SQ2) / _SQ2 - 1.0
    par_ok = (
        abs(sub_p.lambda1 - lam_expect) <= 1e-9 and abs(sub_p.lambda2 - lam_expect) <= 1e-9
    )
    checks.append(
        ("parabolic_eigenvalue", par_ok, f"lambda = {_fmt_c(sub_p.lambda1)} (double)")
    )

    sub_c = build_subsystem(pifs(u, _BASIS["e1"]))
    target = 1j * 2.0 ** (-0.25)
    got = sorted([sub_c.lambda1, sub_c.lambda2], key=lambda w: w.imag)
    circ_ok = abs(got[0] + target) <= 1e-9 and abs(got[1] - target) <= 1e-9
    checks.append(("circular_eigenvalues", circ_ok, f"lambda = +-{_fmt_c(target)}"))

    deviations = cw_axis_report(args.axis_points)
    checks.append(
        (
            "axis_intervals",
            not deviations,
            f"{args.axis_points} samples of [omega_b, 1]"
            + (f"; first deviation {deviations[0]}" if deviations else ""),
        )
    )

    atlas = render_atlas(u, 512)
    off = [c for c in atlas.cells if c.code in (5, 6) and abs(c.y) > atlas.cell_size]
    stride = max(1, len(off) // 20)
    sampled = off[::stride][:20]
    worst = 0.0
    for cell in sampled:
        worst = max(worst, abs(18.0 * (cell.x - _SQ2 / 3.0) ** 2 - 6.0 * cell.y**2 - 1.0))
    checks.append(
        ("hyperbola_cells", len(sampled) == 20 and worst <= 0.05,
         f"{len(sampled)} off-axis elliptic cells, max residual {worst:.4f}")
    )

    for name, ok, detail in checks:
        if not ok:
            print(f"check failed: {name} ({detail})", file=sys.stderr)
            return EXIT_VERIFY
        print(f"ok {name}: {detail}")
    print("all checks passed")
    return EXIT_OK


def _legend_help() -> str:
    lines = ["type codes and SVG colors:"]
    for code in sorted(ATLAS_LEGEND):
        lines.append(f"  {code} {ATLAS_LEGEND[code]:<16} {ATLAS_COLORS[code]}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcl",
        description="Classify and simulate the Markov chains of a repeatedly measured qutrit.",
        epilog="exit codes: 0 ok, 2 parse error, 3 domain error, 4 I/O error, 5 verification failure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cls = sub.add_parser(
        "classify",
        help="chain type and ball dynamics for one (U, omega)",
        description="Classify the chain generated by U with a measurement of mean omega.",
    )
    p_cls.add_argument("--unitary", required=True, help='unitary spec: "cw", "diag:p1,p2,p3", or a JSON file')
    p_cls.add_argument("--omega", help='omega spec: complex literal, "trU", "zero", or a z-vector')
    p_cls.add_argument("--z", help="measurement vector: e1/e2/e3 or three complex components")
    p_cls.set_defaults(func=cmd_classify)

    p_map = sub.add_parser(
        "map",
        help="render the chain-type atlas over W(U)",
        description="Write the CSV and SVG atlas of chain types over the numerical range.",
        epilog=_legend_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_map.add_argument("--unitary", required=True)
    p_map.add_argument("--resolution", type=int, default=256)
    p_map.add_argument("--out", required=True, help="CSV output path")
    p_map.add_argument("--svg", help="SVG output path (default: CSV path with .svg)")
    p_map.set_defaults(func=cmd_map)

    p_sim = sub.add_parser(
        "simulate",
        help="seeded Monte-Carlo run with empirical chain reconstruction",
        description="Simulate repeated measurements from the maximally mixed state.",
    )
    p_sim.add_argument("--unitary", required=True)
    p_sim.add_argument("--omega")
    p_sim.add_argument("--z")
    p_sim.add_argument("--steps", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--match-tol", type=float, default=tol.MATCH_TOL)
    p_sim.add_argument("--out", help="write the JSON report here")
    p_sim.add_argument("--stream", help="write the raw 1/2 outcome stream here")
    p_sim.set_defaults(func=cmd_simulate)

    p_cw = sub.add_parser(
        "cw",
        help="verify the worked three-level example end to end",
        description="Recompute the worked example's constants, eigenvalues, axis intervals and hyperbola.",
    )
    p_cw.add_argument("--axis-points", type=int, default=401)
    p_cw.set_defaults(func=cmd_cw)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK

    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NotUnitary, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (
        OutsideRange,
        DegenerateRange,
        DegenerateSpectrum,
        OmegaMismatch,
        SubsystemUnitary,
        ZeroProbability,
    ) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
