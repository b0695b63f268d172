"""Solving the top-dimensional embedded system and cascading down.

Stage one solves a random-coefficient system with the same supports as
the embedded target through pipelined polyhedral homotopies; stage two
continues its solutions to the embedded system with a gamma-trick
homotopy on the work crew.  Each cascade step deforms the last
hyperplane row to the corresponding slack variable, carrying solutions
with nonzero slacks one dimension down; endpoints classify three ways
(at infinity / zero slack / nonzero slack) and the zero-slack points
are the candidate generic points at that dimension.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .parallel import JobFailure, PipelineConfig, pipeline_run, work_crew
from .polyhedral import (
    MixedCell,
    TieDetected,
    enumerate_cells,
    lift_supports,
    random_coefficient_system,
    solve_cell,
    supports_of,
)
from .polynomials import PolySystem, make_poly, variable_poly
from .systems import EmbeddedSystem
from .tracker import (
    AT_INFINITY,
    NONZERO_SLACK,
    ZERO_SLACK,
    LinearHomotopy,
    PathResult,
    Solution,
    TrackParams,
    classify,
    newton_refine,
    track,
)


@dataclass
class TopStats:
    cells: int = 0
    mixed_volume: int = 0
    start_paths: int = 0
    start_failures: int = 0
    continuation_paths: int = 0
    at_infinity: int = 0
    finite: int = 0
    failures: int = 0
    lifting_attempt: int = 0
    time_start_system: float = 0.0
    time_continuation: float = 0.0


@dataclass
class CascadeLevel:
    """Classification of the solutions entering one dimension.

    ``starts`` counts the paths tracked into this level (for the top
    level, the continuation paths), so starts = at_infinity +
    len(zero_slack) + len(nonzero_slack) + failures.
    """

    dimension: int
    embedding: EmbeddedSystem
    starts: int
    at_infinity: int
    zero_slack: list[Solution] = field(default_factory=list)
    nonzero_slack: list[Solution] = field(default_factory=list)
    failures: int = 0

    @property
    def counts(self) -> dict:
        return {
            "dimension": self.dimension,
            "starts": self.starts,
            "at_infinity": self.at_infinity,
            "zero_slack": len(self.zero_slack),
            "nonzero_slack": len(self.nonzero_slack),
            "failures": self.failures,
        }


@dataclass
class WitnessSuperset:
    """Candidate generic points per dimension, top dimension first."""

    levels: list[CascadeLevel]
    embedding: EmbeddedSystem
    seed: int

    def candidates(self, dimension: int) -> list[Solution]:
        for level in self.levels:
            if level.dimension == dimension:
                return level.zero_slack
        return []

    @property
    def stage_counts(self) -> list[dict]:
        return [level.counts for level in self.levels]


def solve_start_system(
    emb_system: PolySystem,
    seed: int,
    p: int = 1,
    params: TrackParams = TrackParams(),
    mode: str = "thread",
    cell_log: list | None = None,
) -> tuple[PolySystem, list[Solution], TopStats]:
    """Polyhedral solve of the random-coefficient system sharing the
    embedded system's supports.  With p >= 2 a 2-stage pipeline overlaps
    cell production with path tracking."""
    stats = TopStats()
    supports = supports_of(emb_system)
    g = random_coefficient_system(supports, emb_system.nvars, seed)
    t0 = time.perf_counter()
    for attempt in range(6):
        lifted = lift_supports(supports, seed, attempt)
        stats.lifting_attempt = attempt
        try:
            if p >= 2:
                results, _ = _pipelined_cells(lifted, g, supports, p, params, mode, stats, cell_log)
            else:
                results = []

                def consume(cell: MixedCell):
                    stats.cells += 1
                    stats.mixed_volume += cell.volume
                    if cell_log is not None:
                        cell_log.append(cell)
                    results.extend(solve_cell(cell, g, supports, params))
                    return True

                enumerate_cells(lifted, consume)
            break
        except TieDetected:
            stats.cells = 0
            stats.mixed_volume = 0
            if cell_log is not None:
                cell_log.clear()
            continue
    else:
        raise RuntimeError("could not find a generic lifting for the start system")
    stats.time_start_system = time.perf_counter() - t0
    sols = []
    for r in results:
        stats.start_paths += 1
        if r.succeeded and r.endpoint is not None:
            sols.append(r.endpoint)
        else:
            stats.start_failures += 1
    return g, sols, stats


def _pipelined_cells(lifted, g, supports, p, params, mode, stats, cell_log=None):
    """Bounded-queue pipeline: one producer enumerating cells, p-1
    consumers running the per-cell polyhedral homotopies.  The
    enumeration callback feeds a small handoff queue that the pipeline
    producer side drains as a generator."""
    import queue as _q
    import threading as _t

    hand: _q.Queue = _q.Queue(maxsize=64)
    error: list = []

    def run_enum():
        try:

            def emit(cell):
                stats.cells += 1
                stats.mixed_volume += cell.volume
                if cell_log is not None:
                    cell_log.append(cell)
                hand.put(cell)
                return True

            enumerate_cells(lifted, emit)
        except BaseException as exc:  # noqa: BLE001 - forwarded to consumer side
            error.append(exc)
        finally:
            hand.put(None)

    th = _t.Thread(target=run_enum)
    th.start()

    def stream():
        while True:
            cell = hand.get()
            if cell is None:
                break
            yield cell

    cfg = PipelineConfig(p=p, queue_capacity=64, mode=mode)
    pairs, pstats = pipeline_run(stream(), lambda cell: solve_cell(cell, g, supports, params), cfg)
    th.join()
    if error:
        raise error[0]
    results = []
    for _, out in pairs:
        if isinstance(out, JobFailure):
            raise RuntimeError(f"cell worker failed: {out.message}")
        results.extend(out)
    return results, pstats


def solve_top(
    emb: EmbeddedSystem,
    p: int = 1,
    seed: int | None = None,
    params: TrackParams = TrackParams(),
    mode: str = "thread",
    cell_log: list | None = None,
) -> tuple[list[PathResult], TopStats]:
    """Solve the embedded system: polyhedral start, then continuation."""
    seed = emb.seed if seed is None else seed
    system = emb.system if emb.k > 0 else emb.base
    g, g_sols, stats = solve_start_system(system, seed, p, params, mode, cell_log)
    gamma = complex(rngmod.unit_complex(rngmod.stream(seed, rngmod.GAMMA)))
    h = LinearHomotopy(g, system, gamma)
    t0 = time.perf_counter()
    jobs = [s.coordinates for s in g_sols]
    results = work_crew(jobs, p, lambda x0: track(h, x0, params), mode=mode)
    stats.time_continuation = time.perf_counter() - t0
    out = []
    for r in results:
        if isinstance(r, JobFailure):
            r = PathResult("failed", None, 0, 0.0)
        stats.continuation_paths += 1
        if r.status == AT_INFINITY:
            stats.at_infinity += 1
        elif r.succeeded:
            stats.finite += 1
        else:
            stats.failures += 1
        out.append(r)
    if stats.continuation_paths and stats.finite == 0:
        raise RuntimeError("all continuation paths failed")
    return out, stats


def _classify_level(
    results: list[PathResult],
    emb_level: EmbeddedSystem,
    dimension: int,
    params: TrackParams,
) -> CascadeLevel:
    """Split tracked paths into the level's three-way classification."""
    level = CascadeLevel(dimension, emb_level, starts=len(results), at_infinity=0)
    system = emb_level.system if emb_level.k else emb_level.base
    for r in results:
        if r.status == AT_INFINITY:
            level.at_infinity += 1
            continue
        if not r.succeeded or r.endpoint is None:
            level.failures += 1
            continue
        sol = newton_refine(system, r.endpoint.coordinates, tol=1e-13, max_iters=6)
        cls = classify(sol.coordinates, emb_level.n_original, params.infinity_threshold)
        if cls == AT_INFINITY:
            level.at_infinity += 1
        elif cls == ZERO_SLACK:
            level.zero_slack.append(
                Solution(sol.coordinates, sol.residual, sol.condition, sol.regularity, ZERO_SLACK)
            )
        else:
            level.nonzero_slack.append(
                Solution(sol.coordinates, sol.residual, sol.condition, sol.regularity, NONZERO_SLACK)
            )
    return level


def _slack_removal_homotopy(emb: EmbeddedSystem, gamma: complex) -> LinearHomotopy:
    """Deform the last hyperplane row of the level-d embedding into
    z_d = 0; every other row stays fixed."""
    system = emb.system
    nvars = system.nvars
    rows_start = list(system.polys)
    rows_target = list(system.polys)
    last = len(rows_start) - 1
    deformed = make_poly(nvars, [(e, gamma * c) for e, c in rows_start[last].terms])
    rows_start[last] = deformed
    rows_target[last] = variable_poly(nvars, nvars - 1)
    start = PolySystem(nvars, tuple(rows_start), system.names)
    target = PolySystem(nvars, tuple(rows_target), system.names)
    return LinearHomotopy(start, target)


def cascade_step(
    level: CascadeLevel,
    p: int = 1,
    params: TrackParams = TrackParams(),
    mode: str = "thread",
) -> CascadeLevel:
    """Track the level's nonzero-slack solutions one dimension down."""
    if level.dimension < 1:
        raise ValueError("cannot cascade below dimension 0")
    emb = level.embedding
    next_emb = emb.level(emb.k - 1)
    if not level.nonzero_slack:
        return CascadeLevel(level.dimension - 1, next_emb, starts=0, at_infinity=0)
    gamma = complex(rngmod.unit_complex(rngmod.stream(emb.seed, rngmod.GAMMA, level.dimension)))
    h = _slack_removal_homotopy(emb, gamma)
    jobs = [s.coordinates for s in level.nonzero_slack]
    tracked = work_crew(jobs, p, lambda x0: track(h, x0, params), mode=mode)
    results = []
    for r in tracked:
        if isinstance(r, JobFailure):
            r = PathResult("failed", None, 0, 0.0)
        if r.succeeded and r.endpoint is not None:
            # the target row pins z_d = 0: drop that coordinate
            coords = r.endpoint.coordinates[:-1]
            r = PathResult(r.status, Solution(coords, r.endpoint.residual, r.endpoint.condition), r.steps_used, r.t_reached)
        results.append(r)
    return _classify_level(results, next_emb, level.dimension - 1, params)


def run_cascade(
    top_results: list[PathResult],
    emb: EmbeddedSystem,
    p: int = 1,
    params: TrackParams = TrackParams(),
    mode: str = "thread",
) -> WitnessSuperset:
    """Iterate cascade steps from the top dimension down to zero."""
    top_level = _classify_level(top_results, emb, emb.k, params)
    levels = [top_level]
    while levels[-1].dimension > 0:
        levels.append(cascade_step(levels[-1], p, params, mode))
    return WitnessSuperset(levels, emb, emb.seed)
