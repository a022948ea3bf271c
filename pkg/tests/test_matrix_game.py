"""Saddle detection, gaps, the epsilon equilibrium test, and the LP solver."""
import json

import numpy as np
import pytest

from zsg.matrix_game import (
    EQ_TOL,
    GapProfile,
    MinimaxSolverError,
    NoPureEquilibriumError,
    PayoffMatrix,
    PureEquilibrium,
    compute_gaps,
    eps_ne_satisfied,
    find_pure_ne,
    joint_probabilities,
    solve_minimax,
)
from zsg.oracles import brute_force_saddles, closed_form_2x2_mixed

CANON = np.array([[0.5, 0.2], [0.9, 0.1]])
PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])


def random_matrix(rng, max_side=6):
    m = int(rng.integers(1, max_side + 1))
    l = int(rng.integers(1, max_side + 1))
    return rng.normal(0.0, 1.0, size=(m, l))


# --- PayoffMatrix ----------------------------------------------------------


def test_payoff_matrix_basics():
    pm = PayoffMatrix(CANON)
    assert pm.m == 2 and pm.l == 2 and pm.n_pairs == 4
    assert list(pm.pairs()) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert not pm.values.flags.writeable
    np.testing.assert_array_equal(pm.values, CANON)


def test_payoff_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        PayoffMatrix([1.0, 2.0])
    with pytest.raises(ValueError):
        PayoffMatrix(np.empty((0, 2)))
    with pytest.raises(ValueError):
        PayoffMatrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        PayoffMatrix([[np.inf]])


def test_payoff_matrix_json_roundtrip():
    pm = PayoffMatrix(CANON)
    doc = json.loads(pm.to_json())
    assert doc["m"] == 2 and doc["l"] == 2
    assert doc["entries"] == [0.5, 0.2, 0.9, 0.1]
    back = PayoffMatrix.from_json(pm.to_json())
    np.testing.assert_array_equal(back.values, CANON)


def test_payoff_matrix_json_rejects_bad_schema():
    with pytest.raises(ValueError):
        PayoffMatrix.from_json(json.dumps({"m": 2, "l": 2, "entries": [1.0]}))
    with pytest.raises(ValueError):
        PayoffMatrix.from_json(json.dumps({"m": 2, "entries": [1, 2]}))


# --- pure equilibria -------------------------------------------------------


def test_find_pure_ne_canonical():
    ne, unique = find_pure_ne(CANON)
    assert ne == PureEquilibrium(row=0, col=1, value=0.2)
    assert unique


def test_find_pure_ne_absent():
    ne, unique = find_pure_ne(PENNIES)
    assert ne is None and not unique


def test_find_pure_ne_ties_lexicographic():
    ne, unique = find_pure_ne(np.zeros((2, 3)))
    assert (ne.row, ne.col) == (0, 0)
    assert not unique


def test_find_pure_ne_1x1():
    ne, unique = find_pure_ne([[3.5]])
    assert (ne.row, ne.col, ne.value) == (0, 0, 3.5)
    assert unique


# --- gaps -------------------------------------------------------------------


def test_compute_gaps_canonical_values():
    g = compute_gaps(CANON)
    assert g.unique and (g.equilibrium.row, g.equilibrium.col) == (0, 1)
    np.testing.assert_allclose(g.delta_max[0, 0], 0.4)
    np.testing.assert_allclose(g.delta_min[0, 0], 0.3)
    np.testing.assert_allclose(g.delta[0, 0], 0.7)
    np.testing.assert_allclose(g.delta_star[0, 0], -0.3)
    np.testing.assert_allclose(g.delta[1, 1], 0.1)
    np.testing.assert_allclose(g.delta_min[1, 1], 0.0)
    np.testing.assert_allclose(g.delta_star[1, 1], 0.1)
    assert g.delta[0, 1] == 0.0 and g.delta_star[0, 1] == 0.0


def test_delta_star_requires_equilibrium():
    g = compute_gaps(PENNIES)
    assert g.equilibrium is None
    with pytest.raises(NoPureEquilibriumError):
        _ = g.delta_star


def test_gap_signs_and_dominance_on_random_matrices():
    rng = np.random.default_rng(101)
    seen_ne = 0
    for _ in range(1000):
        a = random_matrix(rng)
        g = compute_gaps(a)
        assert (g.delta_max >= 0).all()
        assert (g.delta_min >= 0).all()
        np.testing.assert_array_equal(g.delta, g.delta_max + g.delta_min)
        if g.equilibrium is not None:
            seen_ne += 1
            # signed gap never exceeds the two-sided gap, exactly
            assert (g.delta_star <= g.delta).all()
    assert seen_ne > 200


def test_shift_leaves_gaps_and_indices_unchanged():
    rng = np.random.default_rng(102)
    for _ in range(50):
        a = random_matrix(rng, max_side=5)
        c = float(rng.normal()) * 3.0
        ne_a, uniq_a = find_pure_ne(a)
        ne_b, uniq_b = find_pure_ne(a + c)
        assert uniq_a == uniq_b
        if ne_a is None:
            assert ne_b is None
        else:
            assert (ne_a.row, ne_a.col) == (ne_b.row, ne_b.col)
            assert ne_b.value == a[ne_a.row, ne_a.col] + c
        ga, gb = compute_gaps(a), compute_gaps(a + c)
        np.testing.assert_allclose(gb.delta_max, ga.delta_max, atol=1e-9)
        np.testing.assert_allclose(gb.delta_min, ga.delta_min, atol=1e-9)
        np.testing.assert_allclose(gb.delta, ga.delta, atol=1e-9)


# --- epsilon equilibrium test ------------------------------------------------


def test_eps_ne_zero_eps_marks_exactly_the_saddles():
    rng = np.random.default_rng(103)
    for _ in range(200):
        a = random_matrix(rng, max_side=4)
        saddles = set(brute_force_saddles(a))
        m, l = a.shape
        for i in range(m):
            for j in range(l):
                assert eps_ne_satisfied(a, i, j, 0.0) == ((i, j) in saddles)


def test_eps_ne_slack_threshold():
    # pair (0,0) of the canonical matrix misses by 0.4 on the column side
    assert not eps_ne_satisfied(CANON, 0, 0, 0.35)
    assert eps_ne_satisfied(CANON, 0, 0, 0.41)


def test_eps_ne_active_set_restriction():
    # against row 0 and column 0 only, (0,0) is trivially an equilibrium
    assert eps_ne_satisfied(CANON, 0, 0, 0.0, active_rows=[0], active_cols=[0])
    assert not eps_ne_satisfied(CANON, 0, 0, 0.0, active_rows=[0, 1], active_cols=[0])


def test_eps_ne_validation():
    with pytest.raises(ValueError):
        eps_ne_satisfied(CANON, 0, 0, -0.1)
    with pytest.raises(ValueError):
        eps_ne_satisfied(CANON, 0, 0, 0.1, active_rows=[])
    with pytest.raises(ValueError):
        eps_ne_satisfied(CANON, 0, 0, 0.1, active_cols=[7])
    with pytest.raises(ValueError):
        eps_ne_satisfied(CANON, 5, 0, 0.1)


# --- joint probabilities -----------------------------------------------------


def test_joint_probabilities_outer_product():
    p = np.array([0.25, 0.75])
    q = np.array([0.5, 0.5])
    out = joint_probabilities(p, q)
    np.testing.assert_allclose(out, np.outer(p, q))
    np.testing.assert_allclose(out.sum(), 1.0)
    with pytest.raises(ValueError):
        joint_probabilities(np.array([0.5, 0.6]), q)
    with pytest.raises(ValueError):
        joint_probabilities(np.array([-0.1, 1.1]), q)


# --- minimax LP ---------------------------------------------------------------


def test_solve_minimax_known_2x2():
    prof = solve_minimax([[2.0, 0.0], [1.0, 3.0]])
    np.testing.assert_allclose(prof.p, [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(prof.q, [0.75, 0.25], atol=1e-9)
    assert abs(prof.value - 1.5) <= 1e-9


def test_solve_minimax_matching_pennies():
    prof = solve_minimax(PENNIES)
    np.testing.assert_allclose(prof.p, [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(prof.q, [0.5, 0.5], atol=1e-9)
    assert abs(prof.value) <= 1e-9


def test_solve_minimax_value_matches_pure_ne():
    rng = np.random.default_rng(104)
    checked = 0
    while checked < 100:
        a = random_matrix(rng, max_side=5)
        ne, unique = find_pure_ne(a)
        if ne is None:
            continue
        prof = solve_minimax(a)
        assert abs(prof.value - ne.value) <= 1e-7
        checked += 1


def test_solve_minimax_concentrates_on_strict_unique_saddle():
    rng = np.random.default_rng(105)
    checked = 0
    while checked < 60:
        a = random_matrix(rng, max_side=4)
        ne, unique = find_pure_ne(a)
        if ne is None or not unique:
            continue
        m, l = a.shape
        # strictness: saddle beats every other row in its column and every
        # other column in its row with a real margin
        col = np.delete(a[:, ne.col], ne.row)
        row = np.delete(a[ne.row, :], ne.col)
        if (col.size and col.max() > ne.value - 1e-6) or (
            row.size and row.min() < ne.value + 1e-6
        ):
            continue
        prof = solve_minimax(a)
        assert prof.p[ne.row] >= 1.0 - 1e-6
        assert prof.q[ne.col] >= 1.0 - 1e-6
        checked += 1


def test_solve_minimax_residuals_on_random_matrices():
    rng = np.random.default_rng(106)
    for _ in range(300):
        a = random_matrix(rng, max_side=5)
        prof = solve_minimax(a)
        assert abs(prof.p.sum() - 1.0) <= 1e-9
        assert abs(prof.q.sum() - 1.0) <= 1e-9
        assert prof.p.min() >= -1e-12 and prof.q.min() >= -1e-12
        # optimality residuals, both sides
        assert (a @ prof.q).max() <= prof.value + 1e-7
        assert (prof.p @ a).min() >= prof.value - 1e-7
        assert a.min() - 1e-9 <= prof.value <= a.max() + 1e-9


def test_solve_minimax_agrees_with_closed_form():
    rng = np.random.default_rng(107)
    checked = 0
    while checked < 200:
        a = rng.normal(0.0, 1.0, size=(2, 2))
        if brute_force_saddles(a):
            continue
        lp = solve_minimax(a)
        cf = closed_form_2x2_mixed(a)
        np.testing.assert_allclose(lp.p, cf.p, atol=1e-9)
        np.testing.assert_allclose(lp.q, cf.q, atol=1e-9)
        assert abs(lp.value - cf.value) <= 1e-9
        checked += 1


def test_solve_minimax_shift_equivariance():
    rng = np.random.default_rng(108)
    for _ in range(40):
        a = random_matrix(rng, max_side=4)
        c = float(rng.normal()) * 2.0
        base = solve_minimax(a)
        moved = solve_minimax(a + c)
        np.testing.assert_allclose(moved.p, base.p, atol=1e-9)
        np.testing.assert_allclose(moved.q, base.q, atol=1e-9)
        assert abs(moved.value - (base.value + c)) <= 1e-9


def test_solve_minimax_scale_equivariance():
    rng = np.random.default_rng(109)
    for _ in range(40):
        a = random_matrix(rng, max_side=4)
        s = float(rng.uniform(0.25, 2.0))
        assert abs(solve_minimax(a * s).value - s * solve_minimax(a).value) <= 1e-6


def test_error_hierarchy():
    assert issubclass(NoPureEquilibriumError, ValueError)
    assert issubclass(MinimaxSolverError, RuntimeError)
