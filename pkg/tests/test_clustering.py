import numpy as np
import pytest

from resopt.clustering import (
    InflowClustering,
    build_transition_matrices,
    class_representatives,
    kmeans_cluster,
    kmeans_objective,
)


def test_two_separated_groups():
    data = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0]
    c = kmeans_cluster(data, 2, seed=1)
    assert c.centres == (0.0, 10.0)
    assert c.edges[1] == pytest.approx(5.0)
    assert c.edges[-1] == pytest.approx(50.0)


def test_single_cluster_is_l1_minimizer():
    data = np.array([1.0, 2.0, 9.0])
    c = kmeans_cluster(data, 1, seed=0)
    # the median minimizes the sum of absolute deviations
    assert c.centres[0] == pytest.approx(2.0)
    grid = np.linspace(0, 10, 201)
    best = min(kmeans_objective(data, [g]) for g in grid)
    assert c.objective <= best + 1e-9


def test_objective_non_increasing_vs_random_centres():
    rng = np.random.default_rng(11)
    data = np.concatenate([
        rng.uniform(0, 100, 80),
        rng.uniform(400, 600, 60),
        rng.uniform(1500, 2500, 30),
    ])
    c = kmeans_cluster(data, 3, seed=5)
    # converged objective beats 200 random centre triples
    for _ in range(200):
        centres = np.sort(rng.choice(data, size=3, replace=False))
        assert c.objective <= kmeans_objective(data, centres) + 1e-9


def test_classify_centres_and_clamping():
    c = kmeans_cluster([10.0, 20.0, 100.0, 110.0, 500.0, 520.0], 3, seed=2)
    for l, centre in enumerate(c.centres):
        assert c.classify(centre) == l
    assert c.classify(1e9) == c.n_classes - 1
    assert c.classify(0.0) == 0
    arr = c.classify(np.array([0.0, 1e9]))
    assert list(arr) == [0, c.n_classes - 1]


def test_cluster_seed_reproducible():
    rng = np.random.default_rng(3)
    data = rng.lognormal(5, 1, size=300)
    a = kmeans_cluster(data, 5, seed=42)
    b = kmeans_cluster(data, 5, seed=42)
    assert a.centres == b.centres


def test_cluster_validation():
    with pytest.raises(ValueError):
        kmeans_cluster([], 1)
    with pytest.raises(ValueError):
        kmeans_cluster([1.0, -2.0], 1)
    with pytest.raises(ValueError):
        kmeans_cluster([1.0, 1.0], 2)  # only one distinct value


# -- transition matrices -----------------------------------------------------


def test_hand_counted_transitions():
    # 2 steps/year, 3 years; classes chosen via an explicit clustering
    clustering = InflowClustering(
        centres=(10.0, 100.0), edges=(0.0, 55.0, 500.0), objective=0.0, iterations=1
    )
    #          y1        y2         y3
    values = [10, 100, 10, 10, 100, 100]
    tm = build_transition_matrices(clustering, values, 2)
    # step 0 -> 1 pairs: (10,100) (10,10) (100,100): from class 0: 1x c1, 1x c0
    assert tm.matrices[0][0] == pytest.approx([0.5, 0.5])
    assert tm.matrices[0][1] == pytest.approx([0.0, 1.0])
    # step 1 -> 0 pairs (year wrap): (100,10) (10,100): each observed once
    assert tm.matrices[1][0] == pytest.approx([0.0, 1.0])
    assert tm.matrices[1][1] == pytest.approx([1.0, 0.0])


def test_constant_inflow_unit_row_and_uniform_fallback():
    clustering = InflowClustering(
        centres=(10.0, 100.0, 1000.0),
        edges=(0.0, 55.0, 550.0, 5000.0),
        objective=0.0,
        iterations=1,
    )
    values = [100.0] * 8  # always class 1
    tm = build_transition_matrices(clustering, values, 2)
    for t in range(2):
        assert tm.matrices[t][1] == pytest.approx([0.0, 1.0, 0.0])
        assert tm.matrices[t][0] == pytest.approx([1 / 3] * 3)
        assert tm.matrices[t][2] == pytest.approx([1 / 3] * 3)


def test_rows_sum_to_one_exactly():
    rng = np.random.default_rng(9)
    data = rng.lognormal(5.5, 0.8, size=52 * 12)
    clustering = kmeans_cluster(data, 5, seed=0)
    tm = build_transition_matrices(clustering, data, 52)
    assert np.all(np.abs(tm.matrices.sum(axis=2) - 1.0) <= 1e-12)


def test_partial_year_dropped_with_warning():
    clustering = InflowClustering(
        centres=(10.0,), edges=(0.0, 50.0), objective=0.0, iterations=1
    )
    with pytest.warns(UserWarning, match="trailing"):
        tm = build_transition_matrices(clustering, [10.0] * 5, 2)
    assert tm.steps_per_year == 2


def test_class_representatives_mean_and_fallback():
    cq = InflowClustering(centres=(10.0, 100.0), edges=(0.0, 55.0, 500.0),
                          objective=0.0, iterations=1)
    ctr = InflowClustering(centres=(5.0, 50.0), edges=(0.0, 27.5, 250.0),
                           objective=0.0, iterations=1)
    q = [10.0, 100.0, 10.0, 100.0]  # 2 years x 2 steps
    qtr = [4.0, 60.0, 8.0, 40.0]
    reps = class_representatives(cq, ctr, q, qtr, 2)
    assert reps[0, 0] == pytest.approx(6.0)  # mean of 4 and 8
    assert reps[1, 1] == pytest.approx(50.0)  # mean of 60 and 40
    assert reps[0, 1] == pytest.approx(50.0)  # unseen: tributary centre
    assert reps[1, 0] == pytest.approx(5.0)
