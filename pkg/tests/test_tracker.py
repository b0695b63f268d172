"""Path tracking, Newton refinement, and endpoint classification."""

import numpy as np
import pytest

from nidpipe.polynomials import PolySystem, make_poly, residual
from nidpipe.systems import cyclic, demo_system, embed
from nidpipe.tracker import (
    AT_INFINITY,
    CONVERGED,
    NONZERO_SLACK,
    SINGULAR,
    ZERO_SLACK,
    LinearHomotopy,
    TrackParams,
    classify,
    newton_refine,
    refine_dd,
    track,
)


def linear_system(rows, nvars):
    polys = []
    for row in rows:
        terms = [((0,) * nvars, row[0])]
        for j in range(nvars):
            expo = [0] * nvars
            expo[j] = 1
            terms.append((tuple(expo), row[j + 1]))
        polys.append(make_poly(nvars, terms))
    return PolySystem(nvars, tuple(polys))


def eq6_system():
    return PolySystem(
        2,
        (
            make_poly(2, [((2, 0), 1), ((1, 0), -3), ((0, 0), 2)]),
            make_poly(2, [((1, 2), 1), ((0, 2), -1)]),
        ),
    )


def test_params_validation():
    with pytest.raises(ValueError):
        TrackParams(initial_step=0.3, max_step=0.2)
    with pytest.raises(ValueError):
        TrackParams(min_step=0.5)


def test_identity_homotopy_returns_start():
    f = cyclic(3)
    h = LinearHomotopy(f, f)
    root = np.array([1.0, -0.5 + 0.8660254037844387j, -0.5 - 0.8660254037844387j])
    r = track(h, root)
    assert r.status == CONVERGED
    assert np.max(np.abs(r.endpoint.coordinates - root)) < 1e-10


def test_linear_to_linear_matches_direct_solve():
    g = linear_system([[1, 2, 1], [2, -1, 1]], 2)
    f = linear_system([[-3, 1, 4], [5, 2, -1]], 2)
    x0 = np.linalg.solve([[2, 1], [-1, 1]], [-1, -2])
    r = track(LinearHomotopy(g, f, gamma=0.6 + 0.8j), x0)
    assert r.status == CONVERGED
    direct = np.linalg.solve([[1, 4], [2, -1]], [3, -5])
    assert np.max(np.abs(r.endpoint.coordinates - direct)) < 1e-8


def test_endpoints_insensitive_to_step_schedule():
    e = embed(cyclic(4), 1, 11)
    from nidpipe.cascade import solve_start_system
    from nidpipe import rng as rngmod

    g, sols, _ = solve_start_system(e.system, 11)
    gamma = complex(rngmod.unit_complex(rngmod.stream(11, rngmod.GAMMA)))
    h = LinearHomotopy(g, e.system, gamma)
    coarse = TrackParams()
    fine = TrackParams(initial_step=0.05, max_step=0.1)
    for s in sols[:6]:
        a = track(h, s.coordinates, coarse)
        b = track(h, s.coordinates, fine)
        assert a.status == b.status == CONVERGED
        assert np.max(np.abs(a.endpoint.coordinates - b.endpoint.coordinates)) < 1e-8


def test_trace_records_steps():
    f = cyclic(3)
    h = LinearHomotopy(f, f)
    root = np.array([1.0, -0.5 + 0.8660254037844387j, -0.5 - 0.8660254037844387j])
    trace = []
    track(h, root, trace=trace)
    assert trace and all(len(entry) == 3 for entry in trace)
    ts = [entry[0] for entry in trace]
    assert ts == sorted(ts) and ts[-1] >= 0.999999


def test_track_rejects_bad_start():
    # a nonlinear start system: three correction iterations cannot pull
    # a far-off point onto it, so the precondition check trips
    g = cyclic(3)
    f = linear_system([[-3, 1, 4, 0], [5, 2, -1, 1], [1, 1, 1, 1]], 3)
    r = track(LinearHomotopy(g, f), np.array([100.0, 70.0, -55.0]))
    assert r.status == "failed"
    assert r.t_reached == 0.0


def test_newton_refine_exact_root_unchanged():
    f = demo_system()
    s = newton_refine(f, [3, 2, 2, 1])
    assert s.residual == 0.0
    assert np.allclose(s.coordinates, [3, 2, 2, 1])
    assert s.regularity == "regular"


def test_newton_refine_quadratic_decay_on_regular_root():
    f = demo_system()
    rng = np.random.default_rng(5)
    x = np.array([3, 2, 2, 1], dtype=complex) + 1e-4 * rng.normal(size=4)
    resids = [residual(f, x)]
    cur = x
    for _ in range(4):
        s = newton_refine(f, cur, tol=0.0, max_iters=1)
        cur = s.coordinates
        resids.append(s.residual)
    # quadratic: each residual at most C * previous^2 (generous C),
    # judged only above the evaluation noise floor
    for a, b in zip(resids, resids[1:]):
        if a > 1e-7:
            assert b <= 50 * a * a
    final = newton_refine(f, x)
    assert np.max(np.abs(final.coordinates - np.array([3, 2, 2, 1]))) < 1e-12


def test_newton_refine_perturbed_cyclic4_point():
    f = cyclic(4)
    rng = np.random.default_rng(2)
    x = np.array([1, 1, -1, -1], dtype=complex) + 1e-4 * rng.normal(size=4)
    s = newton_refine(f, x)
    assert s.residual < 1e-12
    # the limit stays near the perturbed start (it lands on the curve)
    assert np.max(np.abs(s.coordinates - np.array([1, 1, -1, -1]))) < 1e-3


def test_newton_refine_flags_multiplicity_two_point():
    f = eq6_system()
    s = newton_refine(f, [2.0, 0.0])
    assert s.residual < 1e-10
    assert s.regularity == SINGULAR


def test_newton_refine_does_not_accept_worse_point():
    f = cyclic(4)
    x = np.array([10.0, 10.0, 10.0, 10.0], dtype=complex)
    s = newton_refine(f, x, tol=1e-12, max_iters=2)
    assert residual(f, s.coordinates) <= residual(f, x)


def test_refine_dd_improves_multiple_point():
    f = eq6_system()
    x = np.array([2.0 + 1e-5, 1e-5], dtype=complex)
    out = refine_dd(f, x, steps=12)
    assert abs(out[0] - 2.0) < 1e-8
    assert abs(out[1]) < 1e-8


def test_classify_thresholds():
    assert classify([1.0, 2.0, 1e-12], 2) == ZERO_SLACK
    assert classify([1.0, 2.0, 0.3], 2) == NONZERO_SLACK
    assert classify([1e9, 2.0, 0.0], 2) == AT_INFINITY
    # no slacks at all: every finite point is zero-slack
    assert classify([1.0, 2.0], 2) == ZERO_SLACK


def test_double_double_mode_tracks_small_system():
    g = linear_system([[1, 2, 1], [2, -1, 1]], 2)
    f = linear_system([[-3, 1, 4], [5, 2, -1]], 2)
    x0 = np.linalg.solve([[2, 1], [-1, 1]], [-1, -2])
    r = track(LinearHomotopy(g, f), x0, TrackParams(precision="double_double"))
    assert r.status == CONVERGED
    direct = np.linalg.solve([[1, 4], [2, -1]], [3, -5])
    assert np.max(np.abs(r.endpoint.coordinates - direct)) < 1e-10
