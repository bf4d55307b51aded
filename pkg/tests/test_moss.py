import numpy as np
import pytest

from oracles import brute_force_non_dominated

from resopt.dp import ndp_solve
from resopt.moss import MossEntry, dominance_mask, entry_seed, moss_execute, pareto_filter
from resopt.outcomes import OutcomeSeries
from resopt.synthetic import toy_series
from resopt.system import WeightVector


def outcome_with_sums(sums):
    T = 1
    z = np.zeros(T)
    dev = np.zeros((T, 8))
    dev[0] = sums
    return OutcomeSeries(
        t=np.arange(T), s_start=z.copy(), s_end=z.copy(), r_total=z.copy(),
        user_releases=np.zeros((T, 5)), evap=z.copy(), overspill=z.copy(),
        deviations=dev, power=z.copy(), reward=np.array([float(np.sum(sums))]),
    )


def test_single_entry_trivially_kept():
    w = WeightVector(1, 1, 1, 1, 1, 1, 1, 1)
    run = moss_execute(lambda weights, seed: outcome_with_sums(np.ones(8)), [w])
    assert len(run.entries) == 1
    assert run.entries[0].dominated is False


def test_pairwise_dominance_flag():
    sums = {0: np.ones(8), 1: np.concatenate([[2.0], np.ones(7)])}
    w = WeightVector(1, 1, 1, 1, 1, 1, 1, 1)
    run = moss_execute(lambda weights, seed: outcome_with_sums(sums[seed % 2]),
                       [w, w], master_seed=0)
    # entry seeds are distinct, so map them through the capture above
    flags = [e.dominated for e in run.entries]
    assert flags.count(True) + flags.count(False) == 2


def test_identical_vectors_all_retained():
    v = np.tile(np.array([1.0, 2, 3, 4, 5, 6, 7, 8]), (4, 1))
    kept = pareto_filter(v)
    assert kept.shape[0] == 4


def test_orthogonal_unit_vectors_incomparable():
    v = np.array([[1.0, 0, 0, 0, 0, 0, 0, 0], [0, 1.0, 0, 0, 0, 0, 0, 0]])
    assert pareto_filter(v).shape[0] == 2


def test_filter_matches_brute_force_oracle():
    rng = np.random.default_rng(99)
    v = np.round(rng.uniform(0, 5, size=(100, 8)), 1)
    mask = dominance_mask(v)
    assert sorted(np.nonzero(mask)[0]) == brute_force_non_dominated(v)


def test_output_is_antichain():
    rng = np.random.default_rng(5)
    v = rng.uniform(0, 10, size=(60, 8))
    kept = pareto_filter(v)
    for a in range(kept.shape[0]):
        for b in range(kept.shape[0]):
            if a == b:
                continue
            dominates = np.all(kept[b] <= kept[a] + 1e-9) and np.any(
                kept[b] < kept[a] - 1e-9
            )
            assert not dominates


def test_entries_keep_input_order_and_errors_recorded():
    w = WeightVector(1, 1, 1, 1, 1, 1, 1, 1)

    def run_one(weights, seed):
        if seed == entry_seed(0, 1):
            raise RuntimeError("boom")
        return outcome_with_sums(np.full(8, float(seed % 97)))

    run = moss_execute(run_one, [w, w, w], master_seed=0, workers=3)
    assert [e.index for e in run.entries] == [0, 1, 2]
    assert run.entries[1].error is not None
    assert "boom" in run.entries[1].error
    assert run.entries[1].dominated is None
    assert run.entries[0].ok and run.entries[2].ok


def test_parallel_matches_sequential(toy_spec, toy_grid):
    recs = toy_series(T=4)
    vectors = [
        WeightVector(50, 50, 2, 1, 0, 0, 0, 0),
        WeightVector(50, 50, 1, 2, 0, 0, 0, 0),
        WeightVector(5, 5, 1, 1, 0, 0, 0, 0),
    ]

    def run_one(weights, seed):
        return ndp_solve(toy_spec, recs, toy_grid, weights).outcomes

    seq = moss_execute(run_one, vectors, workers=1, master_seed=3)
    par = moss_execute(run_one, vectors, workers=3, master_seed=3)
    for a, b in zip(seq.entries, par.entries):
        assert np.allclose(a.objective_sums, b.objective_sums)
        assert a.total_cost == pytest.approx(b.total_cost)
        assert a.dominated == b.dominated


def test_moss_entry_filter_sets_flags():
    entries = [
        MossEntry(0, WeightVector(1, 1, 1, 1, 1, 1, 1, 1), "ndp", "linear",
                  objective_sums=np.ones(8), total_cost=1.0),
        MossEntry(1, WeightVector(1, 1, 1, 1, 1, 1, 1, 1), "ndp", "linear",
                  objective_sums=np.full(8, 2.0), total_cost=2.0),
    ]
    kept = pareto_filter(entries)
    assert [e.index for e in kept] == [0]
    assert entries[0].dominated is False
    assert entries[1].dominated is True


def test_requires_at_least_one_vector():
    with pytest.raises(ValueError):
        moss_execute(lambda w, s: None, [])
