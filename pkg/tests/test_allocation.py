import numpy as np
import pytest

from resopt.allocation import (
    AllocationProblem,
    allocate,
    allocate_oracle,
    allocation_cost,
)


def problem(available, demands, weights, formulation="linear", nu=50):
    return AllocationProblem(available, tuple(demands), tuple(weights), formulation, nu)


def test_trivial_branch_any_weights():
    for form in ("linear", "quadratic"):
        p = problem(100.0, (30.0, 40.0), (5.0, 1.0), form)
        assert np.allclose(allocate(p), [30.0, 40.0])
        assert np.allclose(allocate_oracle(p), [30.0, 40.0])


def test_linear_greedy_by_weight():
    p = problem(50.0, (40.0, 40.0), (2.0, 1.0))
    assert np.allclose(allocate(p), [40.0, 10.0])
    assert np.allclose(allocate_oracle(p), [40.0, 10.0])


def test_linear_equal_weights_fill_by_index():
    p = problem(50.0, (40.0, 40.0), (1.0, 1.0))
    assert np.allclose(allocate(p), [40.0, 10.0])


def test_quadratic_symmetry_fine_grid():
    p = problem(50.0, (40.0, 40.0), (1.0, 1.0), "quadratic", nu=1000)
    r = allocate(p)
    assert np.allclose(r, [25.0, 25.0], atol=1e-9)


def test_zero_available():
    p = problem(0.0, (10.0, 20.0), (1.0, 2.0))
    assert np.allclose(allocate(p), [0.0, 0.0])
    assert np.allclose(allocate_oracle(p), [0.0, 0.0])


def test_single_user():
    p = problem(15.0, (40.0,), (3.0,), "quadratic", nu=40)
    assert allocate_oracle(p)[0] == pytest.approx(min(40.0, 15.0), abs=15.0 / 40)
    lin = problem(15.0, (40.0,), (3.0,))
    assert allocate_oracle(lin)[0] == pytest.approx(15.0)
    assert allocate(lin)[0] == pytest.approx(15.0)


def test_oracle_refuses_oversize():
    with pytest.raises(ValueError, match="oracle"):
        allocate_oracle(problem(1.0, (1.0,) * 7, (1.0,) * 7))
    with pytest.raises(ValueError, match="nu"):
        allocate_oracle(problem(1.0, (1.0,) * 3, (1.0,) * 3, "quadratic", nu=61))


def _random_problem(rng, formulation):
    n = int(rng.integers(1, 6))
    demands = rng.uniform(0.0, 50.0, size=n)
    weights = np.round(rng.uniform(0.0, 5.0, size=n), 3)
    # keep the non-trivial branch in play most of the time
    available = float(rng.uniform(0.0, 1.2) * max(demands.sum(), 1.0))
    return problem(available, demands, weights, formulation, nu=50)


def test_allocate_matches_oracle_linear():
    rng = np.random.default_rng(101)
    for _ in range(100):
        p = _random_problem(rng, "linear")
        mine = allocate(p)
        ref = allocate_oracle(p)
        assert allocation_cost(p, mine) == pytest.approx(
            allocation_cost(p, ref), abs=1e-9
        )


def test_allocate_matches_oracle_quadratic_within_increment():
    rng = np.random.default_rng(202)
    for _ in range(100):
        p = _random_problem(rng, "quadratic")
        mine = allocate(p)
        ref = allocate_oracle(p)
        delta = p.available / p.nu
        # one grid increment's largest possible marginal effect
        tol = max(
            (w * delta * 2.0 * d for w, d in zip(p.weights, p.demands)), default=0.0
        ) + 1e-9
        assert allocation_cost(p, mine) <= allocation_cost(p, ref) + tol
        assert allocation_cost(p, ref) <= allocation_cost(p, mine) + tol
        assert np.all(np.abs(mine - ref) <= delta + 1e-9)


def test_feasibility_invariants():
    rng = np.random.default_rng(303)
    for _ in range(200):
        form = "linear" if rng.random() < 0.5 else "quadratic"
        p = _random_problem(rng, form)
        r = allocate(p)
        assert r.sum() <= p.available + 1e-9
        assert np.all(r >= -1e-12)
        assert np.all(r <= np.asarray(p.demands) + 1e-9)


def test_monotone_in_available():
    rng = np.random.default_rng(404)
    for _ in range(50):
        form = "linear" if rng.random() < 0.5 else "quadratic"
        n = int(rng.integers(1, 6))
        demands = tuple(rng.uniform(1.0, 50.0, size=n))
        weights = tuple(rng.uniform(0.1, 5.0, size=n))
        a_small = float(rng.uniform(0.0, sum(demands)))
        a_big = a_small * float(rng.uniform(1.0, 1.5))
        p_small = problem(a_small, demands, weights, form)
        p_big = problem(a_big, demands, weights, form)
        cost_small = allocation_cost(p_small, allocate(p_small))
        cost_big = allocation_cost(p_big, allocate(p_big))
        assert cost_big <= cost_small + 1e-6 * max(1.0, cost_small)


def test_linear_weight_dominance():
    rng = np.random.default_rng(505)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        demands = rng.uniform(1.0, 50.0, size=n)
        weights = rng.permutation(np.arange(1.0, n + 1.0))
        available = float(rng.uniform(0.0, demands.sum()))
        r = allocate(problem(available, demands, weights))
        for i in range(n):
            for j in range(n):
                if weights[i] > weights[j] and r[j] > 1e-9:
                    assert r[i] == pytest.approx(demands[i], abs=1e-9)


def test_problem_validation():
    with pytest.raises(ValueError):
        problem(-1.0, (1.0,), (1.0,))
    with pytest.raises(ValueError):
        problem(1.0, (-1.0,), (1.0,))
    with pytest.raises(ValueError):
        problem(1.0, (1.0,), (-1.0,))
    with pytest.raises(ValueError):
        problem(1.0, (1.0,), (1.0,), "cubic")
    with pytest.raises(ValueError):
        problem(1.0, (1.0,), (1.0,), "quadratic", nu=0)
