"""Mixed cells, mixed volumes, binomial starts, and the max-slack LP."""

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from nidpipe.polynomials import PolySystem, make_poly, residual
from nidpipe.polyhedral import (
    MixedCell,
    _max_slack_simplex,
    binomial_solutions,
    enumerate_cells,
    lift_supports,
    mixed_volume,
    random_coefficient_system,
    solve_cell,
    supports_of,
)
from nidpipe.systems import cyclic, demo_system, embed


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


def test_supports_of_examples():
    f = cyclic(4)
    sup = supports_of(f)
    assert set(sup[3]) == {(1, 1, 1, 1), (0, 0, 0, 0)}
    lin = linear_system([[1, 2, 3]], 2)
    assert set(supports_of(lin)[0]) == {(0, 0), (1, 0), (0, 1)}
    with pytest.raises(ValueError):
        supports_of(PolySystem(2, (make_poly(2, []),)))


def test_embed_adds_slack_exponent_to_base_supports():
    e = embed(cyclic(4), 1, 5)
    sup = supports_of(e.system)
    for i in range(4):
        assert (0, 0, 0, 0, 1) in sup[i]


def test_single_linear_polynomial_one_cell():
    f = PolySystem(1, (make_poly(1, [((0,), 1.0), ((1,), 2.0)]),))
    lifted = lift_supports(supports_of(f), 3)
    cells = []
    n = enumerate_cells(lifted, lambda c: cells.append(c))
    assert n == 1 and cells[0].volume == 1


def test_univariate_dense_mixed_volume_is_degree():
    for d in (1, 2, 3, 5):
        terms = [((k,), 1.0 + 0.5j * k) for k in range(d + 1)]
        f = PolySystem(1, (make_poly(1, terms),))
        assert mixed_volume(f, 9) == d


def test_linear_square_system_mixed_volume_one():
    f = linear_system([[1, 2, 3], [4, 5, 6.5]], 2)
    assert mixed_volume(f, 9) == 1


def test_cyclic4_embedded_mixed_volume_20():
    e = embed(cyclic(4), 1, 11)
    assert mixed_volume(e.system, 13) == 20


def test_mixed_volume_requires_square():
    f = PolySystem(2, (make_poly(2, [((1, 0), 1)]),))
    with pytest.raises(ValueError):
        mixed_volume(f, 1)


def test_mixed_volume_invariant_over_liftings():
    e = embed(cyclic(4), 1, 11)
    values = {mixed_volume(e.system, seed) for seed in range(40, 50)}
    assert values == {20}


def test_cells_streamed_incrementally():
    e = embed(cyclic(4), 1, 11)
    lifted = lift_supports(supports_of(e.system), 13)
    seen = []
    count = enumerate_cells(lifted, lambda c: (seen.append(c), len(seen) < 2)[1])
    # the consumer stopped the search after two cells: production had
    # not finished when the first cells arrived
    assert count == 2 and len(seen) == 2
    full = enumerate_cells(lifted, lambda c: True)
    assert full > 2


def test_emitted_cells_certified_strictly():
    e = embed(cyclic(4), 1, 11)
    lifted = lift_supports(supports_of(e.system), 13)
    cells = []
    enumerate_cells(lifted, lambda c: cells.append(c))
    for cell in cells:
        assert cell.volume >= 1
        assert cell.normal[-1] == 1.0
        alpha = np.array(cell.normal[:-1])
        for pts, ws, (a, b), texp in zip(
            lifted.points, lifted.lifts, cell.pairs, cell.texps
        ):
            vals = np.array([np.dot(p, alpha) + w for p, w in zip(pts, ws)])
            pa = list(pts).index(tuple(a))
            pb = list(pts).index(tuple(b))
            base = vals[pa]
            assert abs(vals[pb] - base) < 1e-7
            for c_idx, v in enumerate(vals):
                if c_idx in (pa, pb):
                    continue
                assert v - base >= 1e-9
            # homotopy exponents: zero exactly on the pair, the slacks elsewhere
            assert texp[pa] == 0.0 and texp[pb] == 0.0


# -- brute-force oracle -------------------------------------------------------


def brute_force_cells(lifted):
    """Exhaustive check over all edge tuples (test oracle)."""
    n = lifted.nvars
    found = {}
    edge_sets = [list(itertools.combinations(range(len(pts)), 2)) for pts in lifted.points]
    for combo in itertools.product(*edge_sets):
        A = []
        rhs = []
        for (p, q), pts, ws in zip(combo, lifted.points, lifted.lifts):
            A.append(np.array(pts[p]) - np.array(pts[q]))
            rhs.append(ws[q] - ws[p])
        A = np.array(A, dtype=float)
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        alpha = np.linalg.solve(A, rhs)
        ok = True
        for (p, q), pts, ws in zip(combo, lifted.points, lifted.lifts):
            vals = np.array([np.dot(pt, alpha) + w for pt, w in zip(pts, ws)])
            base = vals[p]
            others = [v for c, v in enumerate(vals) if c not in (p, q)]
            if others and min(others) - base <= 1e-9:
                ok = False
                break
        if ok:
            vol = abs(round(np.linalg.det(A)))
            key = tuple(
                (tuple(pts[p]), tuple(pts[q]))
                for (p, q), pts in zip(combo, lifted.points)
            )
            found[key] = int(round(vol))
    return found


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_enumeration_matches_brute_force_oracle(seed):
    rng = np.random.default_rng(seed)
    nvars = int(rng.integers(2, 4))
    supports = []
    for _ in range(nvars):
        npts = int(rng.integers(2, 5))
        pts = {tuple(int(v) for v in rng.integers(0, 3, nvars)) for _ in range(npts)}
        while len(pts) < 2:
            pts.add(tuple(int(v) for v in rng.integers(0, 4, nvars)))
        supports.append(tuple(sorted(pts)))
    lifted = lift_supports(tuple(supports), seed * 100 + 7)
    cells = []
    enumerate_cells(lifted, lambda c: cells.append(c))
    mine = {c.pairs: c.volume for c in cells}
    oracle = brute_force_cells(lifted)

    def canon(d):
        return {tuple(tuple(sorted(pair)) for pair in k): v for k, v in d.items()}

    assert canon(mine) == canon(oracle)


def test_cyclic3_against_oracle():
    e = embed(cyclic(3), 1, 3)
    # 4 variables exceeds the oracle budget; use the plain cyclic(3)
    f = cyclic(3)
    lifted = lift_supports(supports_of(f), 21)
    cells = []
    enumerate_cells(lifted, lambda c: cells.append(c))
    oracle = brute_force_cells(lifted)
    assert sum(cells_.volume for cells_ in cells) == sum(oracle.values())
    assert len(cells) == len(oracle)


# -- binomial start systems ---------------------------------------------------


def test_binomial_solutions_simple():
    # y1^2 = 4  and  y1 y2 = 6
    sols = binomial_solutions([[2, 0], [1, 1]], [4.0 + 0j, 6.0 + 0j])
    assert len(sols) == 2
    for y in sols:
        assert abs(y[0] ** 2 - 4) < 1e-10
        assert abs(y[0] * y[1] - 6) < 1e-10


def test_binomial_solutions_negative_exponents_via_unimodular():
    # y1 y2^-1 would appear after the change of coordinates; check a volume-3 case
    sols = binomial_solutions([[3, 0], [1, 1]], [1.0 + 0j, 2.0 + 0j])
    assert len(sols) == 3
    for y in sols:
        assert abs(y[0] ** 3 - 1) < 1e-10
        assert abs(y[0] * y[1] - 2) < 1e-10


def test_solve_cell_linear_unique_solution():
    f = linear_system([[1, 2, 3], [4, 5, 6.5]], 2)
    sup = supports_of(f)
    lifted = lift_supports(sup, 9)
    cells = []
    enumerate_cells(lifted, lambda c: cells.append(c))
    assert len(cells) == 1 and cells[0].volume == 1
    results = solve_cell(cells[0], f, sup)
    assert len(results) == 1
    x = results[0].endpoint.coordinates
    direct = np.linalg.solve(np.array([[2, 3], [5, 6.5]]), [-1, -4])
    assert np.allclose(x, direct, atol=1e-8)


def test_start_system_solutions_count_and_residual():
    e = embed(cyclic(4), 1, 11)
    sup = supports_of(e.system)
    g = random_coefficient_system(sup, e.system.nvars, 17)
    lifted = lift_supports(sup, 13)
    cells = []
    enumerate_cells(lifted, lambda c: cells.append(c))
    endpoints = []
    for cell in cells:
        for r in solve_cell(cell, g, sup):
            assert r.status == "converged"
            assert residual(g, r.endpoint.coordinates) < 1e-10
            endpoints.append(r.endpoint.coordinates)
    assert len(endpoints) == 20
    # all distinct
    pts = np.array(endpoints)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert np.max(np.abs(pts[i] - pts[j])) > 1e-6


# -- the max-slack LP ---------------------------------------------------------


def _scipy_reference(G, b):
    d = G.shape[1]
    res = linprog(
        np.append(np.zeros(d), -1.0),
        A_ub=np.hstack([G, np.ones((len(b), 1))]),
        b_ub=b,
        bounds=[(None, None)] * d + [(None, 1.0)],
        method="highs",
    )
    assert res.status == 0
    return float(res.x[-1])


@pytest.mark.parametrize("seed", range(6))
def test_max_slack_simplex_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    for _ in range(120):
        m = int(rng.integers(1, 35))
        d = int(rng.integers(1, 10))
        G = rng.normal(size=(m, d)).round(3)
        b = rng.normal(size=m).round(3)
        out = _max_slack_simplex(G, b)
        assert out is not None
        eps, v = out
        ref = _scipy_reference(G, b)
        assert abs(eps - ref) < 1e-7
        # the returned maximizer attains the reported slack
        attained = float(np.min(b - G @ v)) if m else 1.0
        assert min(attained, 1.0) >= eps - 1e-7
