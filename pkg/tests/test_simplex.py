"""The in-package simplex solver: hand fixtures, random programs, duals,
degenerate cases, and status classification."""

import numpy as np
import pytest

from lrac import IterationLimit, LinearProgram, LpSolution, kkt_residuals, solve


def _assert_kkt(lp, sol, tol=1e-8):
    res = kkt_residuals(lp, sol)
    worst = max(res.values())
    assert worst <= tol, res
    return res


class TestHandFixtures:
    def test_one_dim(self):
        lp = LinearProgram(c=np.array([3.0]), A=np.array([[2.0]]), b=np.array([4.0]))
        sol = solve(lp)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(6.0)
        assert sol.x.tolist() == [2.0]

    def test_classic_two_var(self):
        # min -x - 2y s.t. x + y + s1 = 4, y + s2 = 3
        lp = LinearProgram(
            c=np.array([-1.0, -2.0, 0.0, 0.0]),
            A=np.array([[1.0, 1.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]),
            b=np.array([4.0, 3.0]),
        )
        sol = solve(lp)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(-7.0)
        assert sol.x[:2].tolist() == [1.0, 3.0]
        _assert_kkt(lp, sol)

    def test_max_sense(self):
        lp = LinearProgram(
            c=np.array([1.0, 2.0, 0.0, 0.0]),
            A=np.array([[1.0, 1.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]),
            b=np.array([4.0, 3.0]),
            sense="max",
        )
        sol = solve(lp)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(7.0)
        # duals priced for the stated sense: b'y equals the objective
        assert float(lp.b @ sol.y) == pytest.approx(7.0)
        _assert_kkt(lp, sol)

    def test_free_variable_goes_negative(self):
        # min x with x free and x = -3 forced
        lp = LinearProgram(
            c=np.array([1.0]),
            A=np.array([[1.0]]),
            b=np.array([-3.0]),
            free=np.array([True]),
        )
        sol = solve(lp)
        assert sol.status == "optimal"
        assert sol.x.tolist() == [-3.0]
        _assert_kkt(lp, sol)

    def test_redundant_rows_tolerated(self):
        lp = LinearProgram(
            c=np.array([1.0, 2.0]),
            A=np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]),
            b=np.array([1.0, 2.0, 3.0]),
        )
        sol = solve(lp)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(1.0)
        _assert_kkt(lp, sol)

    def test_degenerate_vertex(self):
        # three constraints meet at the optimum; Bland fallback must cope
        lp = LinearProgram(
            c=np.array([-1.0, -1.0, 0.0, 0.0, 0.0]),
            A=np.array(
                [
                    [1.0, 0.0, 1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0, 1.0, 0.0],
                    [1.0, 1.0, 0.0, 0.0, 1.0],
                ]
            ),
            b=np.array([1.0, 1.0, 2.0]),
        )
        sol = solve(lp)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(-2.0)
        _assert_kkt(lp, sol)

    def test_zero_objective(self):
        lp = LinearProgram(
            c=np.zeros(2), A=np.array([[1.0, 1.0]]), b=np.array([1.0])
        )
        sol = solve(lp)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(0.0)


class TestStatuses:
    def test_infeasible_contradictory(self):
        lp = LinearProgram(
            c=np.array([1.0]), A=np.array([[1.0], [1.0]]), b=np.array([1.0, 2.0])
        )
        sol = solve(lp)
        assert sol.status == "infeasible"
        assert sol.phase1_objective > 1e-9
        assert sol.x is None and sol.y is None and sol.objective is None

    def test_infeasible_zero_equals_one(self):
        lp = LinearProgram(
            c=np.array([1.0, 1.0]),
            A=np.array([[1.0, 1.0], [0.0, 0.0]]),
            b=np.array([1.0, 1.0]),
        )
        assert solve(lp).status == "infeasible"

    def test_infeasible_negative_mass(self):
        lp = LinearProgram(
            c=np.array([0.0, 0.0]), A=np.array([[1.0, 1.0]]), b=np.array([-1.0])
        )
        assert solve(lp).status == "infeasible"

    def test_unbounded_ray(self):
        lp = LinearProgram(
            c=np.array([0.0, -1.0]), A=np.array([[1.0, 0.0]]), b=np.array([1.0])
        )
        assert solve(lp).status == "unbounded"

    def test_unbounded_free_variable(self):
        lp = LinearProgram(
            c=np.array([1.0, 0.0]),
            A=np.array([[0.0, 1.0]]),
            b=np.array([1.0]),
            free=np.array([True, False]),
        )
        assert solve(lp).status == "unbounded"

    def test_max_unbounded(self):
        lp = LinearProgram(
            c=np.array([1.0, 0.0]),
            A=np.array([[0.0, 1.0]]),
            b=np.array([1.0]),
            sense="max",
        )
        assert solve(lp).status == "unbounded"

    def test_iteration_limit_raises(self):
        rng = np.random.default_rng(5)
        A = rng.normal(size=(6, 14))
        x0 = rng.uniform(1.0, 2.0, size=14)
        lp = LinearProgram(c=rng.normal(size=14), A=A, b=A @ x0)
        with pytest.raises(IterationLimit):
            solve(lp, max_iter=1)


class TestValidation:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            LinearProgram(c=np.zeros(3), A=np.zeros((2, 2)), b=np.zeros(2))

    def test_bad_sense(self):
        with pytest.raises(ValueError):
            LinearProgram(
                c=np.zeros(1), A=np.zeros((1, 1)), b=np.zeros(1), sense="argmin"
            )

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            LinearProgram(c=np.array([np.nan]), A=np.ones((1, 1)), b=np.ones(1))

    def test_dump_lists_rows_and_free_vars(self):
        lp = LinearProgram(
            c=np.array([1.0, 0.0]),
            A=np.array([[1.0, -2.0]]),
            b=np.array([3.0]),
            free=np.array([False, True]),
            names=("a", "b"),
        )
        text = lp.dump()
        assert text.splitlines()[0] == "min +1 a"
        assert "[0] +1 a -2 b = 3" in text
        assert text.splitlines()[-1] == "free: b"


def _random_bounded_lp(rng):
    """Feasible by construction; bounded either through a pinned total
    mass row or through nonnegative costs on a nonnegative cone."""
    m = int(rng.integers(1, 9))
    n = int(rng.integers(m, m + 12))
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.0, 2.0, size=n)
    b = A @ x0
    if rng.uniform() < 0.5:
        A = np.vstack([np.ones(n), A])
        b = np.concatenate([[x0.sum()], b])
        c = rng.normal(size=n)
        sense = "min" if rng.uniform() < 0.5 else "max"
        return LinearProgram(c=c, A=A, b=b, sense=sense)
    return LinearProgram(c=rng.uniform(0.0, 1.0, size=n), A=A, b=b)


class TestRandomPrograms:
    def test_random_suite_solves_with_tight_kkt(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            lp = _random_bounded_lp(rng)
            sol = solve(lp)
            assert sol.status == "optimal"
            _assert_kkt(lp, sol)

    def test_duals_price_rhs_perturbations(self):
        # moving b along a random direction moves the optimum at rate y'db
        rng = np.random.default_rng(7)
        n = 6
        A = np.vstack([np.ones(n), rng.normal(size=(2, n))])
        x0 = rng.uniform(0.5, 1.5, size=n)
        b = A @ x0
        c = rng.normal(size=n)
        lp = LinearProgram(c=c, A=A, b=b)
        sol = solve(lp)
        assert sol.status == "optimal"
        db = rng.normal(size=3) * 1e-6
        sol2 = solve(LinearProgram(c=c, A=A, b=b + db))
        predicted = sol.objective + float(sol.y @ db)
        assert sol2.objective == pytest.approx(predicted, abs=1e-9)

    def test_deterministic_given_input(self):
        rng = np.random.default_rng(3)
        lp = _random_bounded_lp(rng)
        a = solve(lp)
        bsol = solve(lp)
        assert a.status == bsol.status == "optimal"
        assert np.array_equal(a.x, bsol.x)
        assert a.iterations == bsol.iterations
