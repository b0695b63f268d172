"""Predictor-corrector path tracking for polynomial homotopies.

A secant predictor with adaptive step control feeds a Newton corrector;
the corrector is the accuracy authority (a step is accepted only when
it converges within its iteration budget).  Endpoints are polished at
t=1 with a damped least-squares Newton so that paths running into
singular endpoints still return usable solutions, and optionally
re-polished in double-double arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np

from .dd import CDD
from .linalg import SINGULARITY_TOL, condition_and_rank, newton_step, solve_dd
from .polynomials import (
    PolySystem,
    eval_magnitude,
    eval_system,
    eval_system_generic,
    jacobian,
    jacobian_generic,
)

# residuals are meaningful only down to the cancellation noise of the
# evaluation; 50 ulps of the absolute-term scale is the practical floor
_NOISE_ULPS = 50.0 * 2.220446049250313e-16

REGULAR = "regular"
SINGULAR = "singular"

CONVERGED = "converged"
AT_INFINITY = "at_infinity"
SINGULAR_ENDPOINT = "singular_endpoint"
FAILED = "failed"

ZERO_SLACK = "zero_slack"
NONZERO_SLACK = "nonzero_slack"
NOT_APPLICABLE = "not_applicable"

ZERO_SLACK_TOL = 1e-8
CONVERGED_RESIDUAL = 1e-8


class Homotopy(Protocol):
    dim: int

    def eval(self, x: np.ndarray, t: float) -> np.ndarray: ...

    def jac(self, x: np.ndarray, t: float) -> np.ndarray: ...


@dataclass(frozen=True)
class LinearHomotopy:
    """h(x,t) = (1-t) * gamma * start(x) + t * target(x), row by row.

    With gamma a random unit-modulus constant this is the usual path
    deformation between two systems of the same shape; with
    start == target on all but one row it expresses homotopies where
    only designated coefficients move (cascade and membership steps).
    """

    start: PolySystem
    target: PolySystem
    gamma: complex = 1.0 + 0j

    def __post_init__(self):
        if self.start.nvars != self.target.nvars or len(self.start.polys) != len(
            self.target.polys
        ):
            raise ValueError("start and target systems must have the same shape")

    @property
    def dim(self) -> int:
        return self.start.nvars

    def eval(self, x: np.ndarray, t: float) -> np.ndarray:
        a = eval_system(self.start, x)
        b = eval_system(self.target, x)
        return (1.0 - t) * self.gamma * a + t * b

    def jac(self, x: np.ndarray, t: float) -> np.ndarray:
        a = jacobian(self.start, x)
        b = jacobian(self.target, x)
        return (1.0 - t) * self.gamma * a + t * b

    def eval_scale(self, x: np.ndarray, t: float) -> float:
        return (1.0 - t) * eval_magnitude(self.start, x) + t * eval_magnitude(self.target, x)

    def eval_generic(self, x: list[CDD], t: float) -> list[CDD]:
        a = eval_system_generic(self.start, x)
        b = eval_system_generic(self.target, x)
        g = CDD.from_complex(self.gamma * (1.0 - t))
        return [g * ai + t * bi for ai, bi in zip(a, b)]

    def jac_generic(self, x: list[CDD], t: float) -> list[list[CDD]]:
        a = jacobian_generic(self.start, x)
        b = jacobian_generic(self.target, x)
        g = CDD.from_complex(self.gamma * (1.0 - t))
        return [
            [g * aij + t * bij for aij, bij in zip(ra, rb)] for ra, rb in zip(a, b)
        ]


@dataclass(frozen=True)
class TrackParams:
    """Step control knobs; the defaults are the blackbox settings."""

    initial_step: float = 0.1
    min_step: float = 1e-8
    max_step: float = 0.2
    corrector_tol: float = 1e-10
    max_corrector_iters: int = 4
    max_steps: int = 2000
    infinity_threshold: float = 1e8
    endgame_start: float = 0.9
    endgame_contraction: float = 0.5
    # endpoint handling
    snap_remaining: float = 2e-8  # jump to t=1 once this close
    final_newton_iters: int = 40
    soft_infinity: float = 1e4  # failed final polish + coords above this => at infinity
    precision: str = "double"  # "double" | "double_double"
    dd_refine_singular: int = 3  # extra double-double steps on singular endpoints

    def __post_init__(self):
        if not (self.min_step < self.initial_step <= self.max_step):
            raise ValueError("need min_step < initial_step <= max_step")
        for name in ("corrector_tol", "min_step", "infinity_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Solution:
    """A solution point with its numerical quality measures."""

    coordinates: np.ndarray
    residual: float
    condition: float
    regularity: str = REGULAR
    slack_class: str = NOT_APPLICABLE

    def __post_init__(self):
        object.__setattr__(
            self, "coordinates", np.asarray(self.coordinates, dtype=np.complex128)
        )

    @property
    def is_regular(self) -> bool:
        return self.regularity == REGULAR


@dataclass(frozen=True)
class PathResult:
    status: str
    endpoint: Solution | None
    steps_used: int
    t_reached: float

    @property
    def succeeded(self) -> bool:
        return self.status in (CONVERGED, SINGULAR_ENDPOINT)


def _finite(x: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(x.view(np.float64))))


def _res_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def _effective_tol(h: Homotopy, x: np.ndarray, t: float, tol: float) -> float:
    scale_fn = getattr(h, "eval_scale", None)
    if scale_fn is None:
        return tol
    return max(tol, _NOISE_ULPS * scale_fn(x, t))


def _correct(h: Homotopy, x: np.ndarray, t: float, tol: float, iters: int):
    """Newton iteration at fixed t.  Returns (x, residual, iterations, ok).

    Convergence is judged against the larger of the requested tolerance
    and the evaluation noise floor at the current point; an absolute
    tolerance alone stalls as soon as coordinates grow.
    """
    r = h.eval(x, t)
    resid = _res_norm(r)
    tol_eff = _effective_tol(h, x, t, tol)
    for it in range(iters):
        if not np.isfinite(resid):
            return x, resid, it, False
        if resid <= tol_eff:
            return x, resid, it, True
        J = h.jac(x, t)
        dx = newton_step(J, r)
        x = x + dx
        if not _finite(x):
            return x, float("inf"), it + 1, False
        r = h.eval(x, t)
        resid = _res_norm(r)
    tol_eff = _effective_tol(h, x, t, tol)
    return x, resid, iters, resid <= tol_eff


def _damped_newton(h: Homotopy, x: np.ndarray, t: float, tol: float, iters: int):
    """Damped Newton that never accepts a residual increase.

    Uses least-squares steps so rank-deficient Jacobians (singular
    endpoints, points on positive dimensional sets) stay tame.
    """
    r = h.eval(x, t)
    resid = _res_norm(r)
    done = 0
    for _ in range(iters):
        if not np.isfinite(resid) or resid <= tol:
            break
        J = h.jac(x, t)
        dx = newton_step(J, r)
        lam = 1.0
        improved = False
        for _ in range(8):
            x_try = x + lam * dx
            r_try = h.eval(x_try, t)
            res_try = _res_norm(r_try)
            if np.isfinite(res_try) and res_try < resid:
                x, r, resid = x_try, r_try, res_try
                improved = True
                break
            lam *= 0.5
        done += 1
        if not improved:
            break
    return x, resid, done


class _SystemHomotopy:
    """Adapter presenting a plain PolySystem as a (constant) homotopy."""

    def __init__(self, f: PolySystem):
        self.f = f
        self.dim = f.nvars

    def eval(self, x, t):
        return eval_system(self.f, x)

    def jac(self, x, t):
        return jacobian(self.f, x)


def _endpoint_solution(h: Homotopy, x: np.ndarray, resid: float) -> Solution:
    J = h.jac(x, 1.0)
    cond, _ = condition_and_rank(J)
    reg = REGULAR if cond < 1.0 / SINGULARITY_TOL else SINGULAR
    return Solution(x, resid, cond, reg)


def _dd_polish(h, x: np.ndarray, steps: int) -> np.ndarray | None:
    """A few double-double Newton steps (normal equations with a whiff
    of Tikhonov so rank-deficient Jacobians cannot blow the step up)."""
    if not hasattr(h, "eval_generic"):
        return None
    pt = [CDD.from_complex(complex(c)) for c in x]
    n = len(pt)
    scale = 1.0 + max(abs(c) for c in pt) if pt else 1.0
    for _ in range(steps):
        try:
            r = h.eval_generic(pt, 1.0)
            J = h.jac_generic(pt, 1.0)
            # normal equations: (J^H J + lam I) dx = -J^H r
            JH = [[J[i][j] for i in range(len(J))] for j in range(n)]
            conj = lambda z: CDD(z.re, -z.im)
            A = [
                [
                    sum(
                        (conj(JH[i][k]) * JH[j][k] for k in range(len(J))),
                        CDD(0.0, 0.0),
                    )
                    for j in range(n)
                ]
                for i in range(n)
            ]
            scale = max(abs(A[i][i]) for i in range(n)) or 1.0
            lam = 1e-26 * scale
            for i in range(n):
                A[i][i] = A[i][i] + lam
            b = [
                -sum((conj(JH[i][k]) * r[k] for k in range(len(J))), CDD(0.0, 0.0))
                for i in range(n)
            ]
            dx = solve_dd(A, b)
        except ZeroDivisionError:
            return None
        pt = [p + d for p, d in zip(pt, dx)]
        if max(abs(d) for d in dx) < 1e-14 * scale:
            break
    out = np.array([p.to_complex() for p in pt], dtype=np.complex128)
    return out if _finite(out) else None


def _finish(h, x, t_from, steps_used, params: TrackParams, entry_norm: float) -> PathResult:
    """Final correction at t=1 and endpoint classification.

    The t=1 Newton polish is a *correction*: an endpoint that moved far
    from the tracked point is not this path's limit (diverging paths
    would otherwise get rescued onto some unrelated finite solution).
    Divergence that never crossed the hard coordinate threshold shows
    up as strong growth across the endgame combined with a failed
    polish.
    """
    norm_now = float(np.max(np.abs(x))) if _finite(x) else float("inf")
    move_cap = 0.05 * (1.0 + norm_now)
    x1, resid, _ = _damped_newton(h, x, 1.0, params.corrector_tol, params.final_newton_iters)
    moved = float(np.max(np.abs(x1 - x))) if _finite(x1) else float("inf")
    if np.isfinite(resid) and resid <= CONVERGED_RESIDUAL and moved <= move_cap:
        sol = _endpoint_solution(h, x1, resid)
        if sol.condition > 1e4 and params.dd_refine_singular > 0:
            # near-multiple endpoints converge at linear rate 1/2, so a
            # handful of double-double steps must become a dozen to pull
            # a 1e-4 endpoint defect safely under the match tolerances
            steps = max(params.dd_refine_singular, 14)
            better = _dd_polish(h, x1, steps)
            if better is not None:
                res2 = _res_norm(h.eval(better, 1.0))
                if np.isfinite(res2) and res2 <= max(resid * 4, 1e-14):
                    sol = _endpoint_solution(h, better, res2)
        return PathResult(CONVERGED, sol, steps_used, 1.0)
    growth = (norm_now + 1e-6) / (entry_norm + 1e-6)
    if norm_now > params.soft_infinity or growth >= 8.0:
        return PathResult(AT_INFINITY, None, steps_used, t_from)
    if np.isfinite(resid) and resid <= 1e-4 and moved <= move_cap:
        sol = _endpoint_solution(h, x1, resid)
        return PathResult(SINGULAR_ENDPOINT, sol, steps_used, t_from)
    return PathResult(FAILED, None, steps_used, t_from)


def track(
    h: Homotopy,
    x0: np.ndarray,
    params: TrackParams = TrackParams(),
    trace: list | None = None,
) -> PathResult:
    """Track one path of h from t=0 to t=1.

    The start point must satisfy h(x0, 0) = 0 (a correction at t=0 is
    applied first).  A trace list, when given, receives
    (t, step, corrector_iterations) tuples per accepted step.
    """
    if params.precision == "double_double":
        return _track_dd(h, x0, params, trace)
    x = np.asarray(x0, dtype=np.complex128)
    x, resid, _, ok = _correct(h, x, 0.0, params.corrector_tol * 10, 3)
    if not ok:
        return PathResult(FAILED, None, 0, 0.0)

    t = 0.0
    step = params.initial_step
    prev_x = None
    prev_step = 0.0
    steps_used = 0
    entry_norm = float(np.max(np.abs(x))) if x.size else 0.0
    in_endgame = False
    while steps_used < params.max_steps:
        remaining = 1.0 - t
        if not in_endgame and t >= params.endgame_start:
            in_endgame = True
            entry_norm = float(np.max(np.abs(x)))
        if remaining <= params.snap_remaining:
            return _finish(h, x, t, steps_used, params, entry_norm)
        steps_used += 1
        hstep = min(step, params.max_step, remaining)
        if in_endgame:
            hstep = min(hstep, params.endgame_contraction * remaining)
        t_try = t + hstep
        if 1.0 - t_try < 1e-14:
            t_try = 1.0
        if prev_x is not None and prev_step > 0:
            x_pred = x + (x - prev_x) * (hstep / prev_step)
        else:
            x_pred = x
        x_new, resid, iters, ok = _correct(
            h, x_pred, t_try, params.corrector_tol, params.max_corrector_iters
        )
        if ok:
            if float(np.max(np.abs(x_new))) > params.infinity_threshold:
                return PathResult(AT_INFINITY, None, steps_used, t_try)
            prev_x, prev_step = x, hstep
            x, t = x_new, t_try
            if trace is not None:
                trace.append((t, hstep, iters))
            if t >= 1.0:
                return _finish(h, x, t, steps_used, params, entry_norm)
            if iters <= 2:
                step = min(step * 2.0, params.max_step)
        else:
            step = hstep * 0.5
            if step < params.min_step:
                if in_endgame:
                    return _finish(h, x, t, steps_used, params, entry_norm)
                return PathResult(FAILED, None, steps_used, t)
    if in_endgame:
        return _finish(h, x, t, steps_used, params, entry_norm)
    return PathResult(FAILED, None, steps_used, t)


def newton_refine(
    f: PolySystem,
    x,
    tol: float = 1e-12,
    max_iters: int = 10,
) -> Solution:
    """Damped Newton against a plain system; updates quality measures.

    If the residual cannot be decreased (four consecutive rejected
    damping attempts count as growth) the input point is returned with
    its measures recomputed rather than a worse point.
    """
    h = _SystemHomotopy(f)
    x = np.asarray(x, dtype=np.complex128)
    best, resid, _ = _damped_newton(h, x, 1.0, tol, max_iters)
    J = jacobian(f, best)
    cond, _ = condition_and_rank(J)
    reg = REGULAR if cond < 1.0 / SINGULARITY_TOL else SINGULAR
    return Solution(best, resid, cond, reg)


def refine_dd(f: PolySystem, x, steps: int = 3) -> np.ndarray:
    """Double-double Newton polish of a (possibly singular) root."""
    h = LinearHomotopy(f, f)
    out = _dd_polish(h, np.asarray(x, dtype=np.complex128), steps)
    return np.asarray(x, dtype=np.complex128) if out is None else out


def classify(
    coords,
    n_original: int,
    infinity_threshold: float = 1e8,
    zero_tol: float = ZERO_SLACK_TOL,
) -> str:
    """Three-way slack classification of an endpoint.

    Coordinates beyond ``n_original`` are the slack variables; with no
    slacks every finite point counts as zero-slack.
    """
    coords = np.asarray(coords, dtype=np.complex128)
    if not _finite(coords) or float(np.max(np.abs(coords))) > infinity_threshold:
        return AT_INFINITY
    slacks = coords[n_original:]
    if slacks.size == 0 or float(np.max(np.abs(slacks))) < zero_tol:
        return ZERO_SLACK
    return NONZERO_SLACK


# -- double-double tracking ------------------------------------------------


class _DDView:
    """Presents generic (CDD) evaluation through the double interface
    so the same stepping loop can run in double-double precision."""

    def __init__(self, h):
        self.h = h
        self.dim = h.dim

    def eval(self, x, t):
        pt = [CDD.from_complex(complex(c)) for c in x]
        return np.array([v.to_complex() for v in self.h.eval_generic(pt, t)])

    def jac(self, x, t):
        pt = [CDD.from_complex(complex(c)) for c in x]
        rows = self.h.jac_generic(pt, t)
        return np.array([[v.to_complex() for v in row] for row in rows])


def _track_dd(h, x0, params: TrackParams, trace):
    """Double-double tracking: the stepping logic runs unchanged, but
    every evaluation/Jacobian passes through CDD arithmetic (correction
    steps are still solved in double, which bounds the achievable
    accuracy by the final double-double polish)."""
    if not hasattr(h, "eval_generic"):
        inner = h
    else:
        inner = _DDView(h)
    p = replace(params, precision="double")
    res = track(inner if inner is not h else h, x0, p, trace)
    if res.endpoint is not None and hasattr(h, "eval_generic"):
        better = _dd_polish(h, res.endpoint.coordinates, max(3, params.dd_refine_singular))
        if better is not None:
            resid = _res_norm(h.eval(better, 1.0)) if hasattr(h, "eval") else res.endpoint.residual
            if np.isfinite(resid) and resid <= res.endpoint.residual * 4:
                sol = _endpoint_solution(h, better, resid)
                res = PathResult(res.status, sol, res.steps_used, res.t_reached)
    return res
