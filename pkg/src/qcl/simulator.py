"""Seeded Monte-Carlo trajectories of the measured-qutrit chain.

A run starts at the maximally mixed state, samples one outcome per step
and matches every post-measurement state against the analytic family
(rho_z, the branch-1 orbits of rho_m and rho_v, and the ball eigenstates).
The report compares the empirical walk with the predicted diagram; for a
fixed config it is byte-reproducible across platforms and backends.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import tolerances as tol
from ._kernels import simulate_chain, sm64_uniforms
from .quantum import DensityMatrix, Pifs, evolve, maximally_mixed, prob, rho_m, rho_v, rho_z
from .subsystem import SubsystemMap, ball_eigenstates, build_subsystem, iterate_f1

RHO_STAR_ID = "rho_star"
UNMATCHED_ID = "unmatched"


@dataclass(frozen=True)
class SimConfig:
    """Run parameters; `family_depth` caps the precomputed orbit length."""

    seed: int
    steps: int
    match_tol: float = tol.MATCH_TOL
    family_depth: int = 512

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not 0.0 < self.match_tol < 1.0:
            raise ValueError(f"match_tol out of range: {self.match_tol}")


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    outcome_sequence: list[int]
    visited: list[tuple[str, DensityMatrix | None, int]]
    empirical_edges: list[tuple[str, str, int, float]]
    unmatched_states: int
    family: list[tuple[str, DensityMatrix]] = field(repr=False, default_factory=list)
    matched_sequence: list[str] = field(repr=False, default_factory=list)


def _orbit_entries(
    label: str, sub: SubsystemMap, start: DensityMatrix, depth: int
) -> tuple[list[tuple[str, DensityMatrix]], bool]:
    traj = iterate_f1(sub, start, n_max=depth)
    entries = [(f"F1^{n}({label})", s) for n, s in enumerate(traj.states) if n > 0]
    return entries, traj.termination.kind == "truncated"


def analytic_family(
    p: Pifs, sub: SubsystemMap | None = None, depth: int = 512
) -> tuple[list[tuple[str, DensityMatrix]], bool]:
    """Named analytic states: rho_z, the orbits, and the ball eigenstates.

    Named states take priority; orbit states landing on an earlier entry
    (within 1e-12) are dropped.  Returns (family, any_orbit_truncated).
    """
    if sub is None:
        sub = build_subsystem(p)

    named: list[tuple[str, DensityMatrix]] = [("rho_z", rho_z(p)), ("rho_m", rho_m(p))]
    has_v = prob(p, 1, rho_z(p)) > tol.EPS_PROB
    if has_v:
        named.append(("rho_v", rho_v(p)))
    e1, e2 = ball_eigenstates(sub)
    named.append(("rho_e1", e1))
    if e2 is not None:
        named.append(("rho_e2", e2))

    orbit_m, trunc_m = _orbit_entries("rho_m", sub, rho_m(p), depth)
    orbit_v, trunc_v = ([], False)
    if has_v:
        orbit_v, trunc_v = _orbit_entries("rho_v", sub, rho_v(p), depth)

    family: list[tuple[str, DensityMatrix]] = []
    for sid, state in named + orbit_m + orbit_v:
        if all(state.distance(prev) > 1e-12 for _, prev in family):
            family.append((sid, state))
    return family, trunc_m or trunc_v


def run(p: Pifs, cfg: SimConfig) -> SimReport:
    """Simulate cfg.steps measurements from rho_* and reconstruct the chain.

    If states fall off the end of a truncated orbit (unmatched steps while
    an orbit hit the depth cap), the family is rebuilt deeper and the same
    seeded walk is replayed, so the report never depends on the first guess.
    """
    sub = build_subsystem(p)
    depth = cfg.family_depth
    while True:
        family, truncated = analytic_family(p, sub, depth)
        fam_arr = np.ascontiguousarray(np.stack([s.mat for _, s in family]))
        outcomes, matched, _ = simulate_chain(
            p.u, p.pvm.z, fam_arr, cfg.seed, cfg.steps, cfg.match_tol, tol.EPS_PROB
        )
        unmatched = int(np.count_nonzero(matched == -1))
        if unmatched == 0 or not truncated or depth >= tol.N_MAX:
            break
        depth = min(depth * 4, tol.N_MAX)

    ids = [family[m][0] if m >= 0 else UNMATCHED_ID for m in matched]

    counts: dict[str, int] = {}
    for sid in ids:
        counts[sid] = counts.get(sid, 0) + 1
    visited: list[tuple[str, DensityMatrix | None, int]] = [
        (sid, state, counts[sid]) for sid, state in family if counts.get(sid, 0) > 0
    ]
    if unmatched:
        visited.append((UNMATCHED_ID, None, unmatched))

    srcs = [RHO_STAR_ID] + ids[:-1]
    edge_counts: dict[tuple[str, str], int] = {}
    out_totals: dict[str, int] = {}
    for src, dst in zip(srcs, ids):
        edge_counts[(src, dst)] = edge_counts.get((src, dst), 0) + 1
        out_totals[src] = out_totals.get(src, 0) + 1
    empirical_edges = [
        (src, dst, n, n / out_totals[src])
        for (src, dst), n in sorted(edge_counts.items())
    ]

    return SimReport(
        config=cfg,
        outcome_sequence=[int(o) for o in outcomes],
        visited=visited,
        empirical_edges=empirical_edges,
        unmatched_states=unmatched,
        family=family,
        matched_sequence=ids,
    )


def analytic_edge_probs(
    p: Pifs,
    family: list[tuple[str, DensityMatrix]],
    match_tol: float = tol.MATCH_TOL,
) -> list[tuple[str, str, float]]:
    """Exact one-step transition probabilities over the named family.

    Sources are rho_* plus every family state; outcome 2 always leads to
    rho_z, outcome 1 to whichever single family state F1 lands on (or to
    `unmatched` if the landing state is not in the family).
    """
    edges: list[tuple[str, str, float]] = []
    sources = [(RHO_STAR_ID, maximally_mixed())] + family
    for sid, state in sources:
        p1 = prob(p, 1, state)
        p2 = 1.0 - p1
        if p2 > tol.EPS_PROB:
            edges.append((sid, "rho_z", p2))
        if p1 > tol.EPS_PROB:
            nxt = evolve(p, 1, state)
            hits = [fid for fid, fs in family if nxt.distance(fs) <= match_tol]
            dst = hits[0] if len(hits) == 1 else UNMATCHED_ID
            edges.append((sid, dst, p1))
    return sorted(edges)


def reentry_violations(report: SimReport) -> int:
    """Count visits to the rho_m orbit after the walk first reaches rho_z."""
    m_orbit = {sid for sid, _ in report.family if sid == "rho_m" or sid.endswith("(rho_m)")}
    seq = report.matched_sequence
    try:
        first_z = seq.index("rho_z")
    except ValueError:
        return 0
    return sum(1 for sid in seq[first_z + 1 :] if sid in m_orbit)


def first_step_check(p: Pifs, cfg: SimConfig) -> tuple[float, float]:
    """Empirical outcome frequencies of single measurements on rho_*."""
    if cfg.steps < 10_000:
        raise ValueError(f"first_step_check needs >= 10000 trials, got {cfg.steps}")
    p1 = prob(p, 1, maximally_mixed())
    draws = sm64_uniforms(cfg.seed, cfg.steps)
    freq1 = float(np.count_nonzero(draws < p1)) / cfg.steps
    return freq1, 1.0 - freq1


def _state_json(state: DensityMatrix | None):
    if state is None:
        return None
    return [[[float(w.real), float(w.imag)] for w in row] for row in state.mat]


def report_json(report: SimReport, include_outcomes: bool = True) -> str:
    """Deterministic key-ordered JSON text for a report."""
    doc = {
        "seed": report.config.seed,
        "steps": report.config.steps,
        "match_tol": report.config.match_tol,
        "unmatched_states": report.unmatched_states,
        "visited": [
            {"state_id": sid, "count": n, "state": _state_json(s)}
            for sid, s, n in report.visited
        ],
        "empirical_edges": [
            {"from": src, "to": dst, "count": n, "frequency": f}
            for src, dst, n, f in report.empirical_edges
        ],
    }
    if include_outcomes:
        doc["outcome_sequence"] = report.outcome_sequence
        doc["matched_sequence"] = report.matched_sequence
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def write_outcome_stream(report: SimReport, path) -> None:
    """Raw `1`/`2` character stream of the outcome sequence."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("".join(str(o) for o in report.outcome_sequence))
