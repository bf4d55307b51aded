import numpy as np
import pytest

from resopt.clustering import kmeans_cluster
from resopt.dp import ndp_solve, simulate_policy
from resopt.grid import StorageGrid
from resopt.rl import (
    QStore,
    RlBenchmark,
    RlConfig,
    TotalRlPolicy,
    feasible_actions,
    nrl_train,
    q_update,
    s_n_benchmark,
)
from resopt.synthetic import toy_system
from resopt.system import StepRecord, SystemSpec, WeightVector


def flat_record(t, q, d3=80.0, d4=120.0, d1=101.0, d2=109.0):
    return StepRecord(t=t, q=q, q1=q * 1.2, q2=q * 1.35, q3=q * 1.5, d3=d3,
                      d4=d4, d5=0, d6=0, d7=0, d8=0, d1=d1, d2=d2)


def training_year(T=12, scale=1.0):
    pattern = [500, 750, 900, 700, 420, 260, 160, 120, 150, 260, 380, 460]
    return [flat_record(t, scale * pattern[t % 12]) for t in range(T)]


@pytest.fixture(scope="module")
def rl_setup():
    spec = toy_system(steps_per_year=12)
    grid = StorageGrid.uniform(spec, 500.0)  # m=9
    year = training_year()
    weights = WeightVector(30, 30, 2, 1, 0, 0, 0, 0)
    q_vals = [r.q for r in year]
    qtr_vals = [r.q3 - r.q for r in year]
    cq = kmeans_cluster(q_vals, 1, seed=0)
    ctr = kmeans_cluster(qtr_vals, 1, seed=0)
    return spec, grid, year, weights, cq, ctr


# -- feasible actions -------------------------------------------------------


def test_feasible_actions_zero_inflow_zero_evap():
    spec = toy_system(steps_per_year=12)
    no_evap = SystemSpec(
        storage_curve=spec.storage_curve, s_dead=spec.s_dead, s_max=spec.s_max,
        h_dead=spec.h_dead, h_max=spec.h_max, hec_max=spec.hec_max,
        gen=spec.gen, heads=spec.heads, evap_rates=(0.0,) * 12,
        tailwater_level=spec.tailwater_level, release_cap_enforced=False,
        steps_per_year=12,
    )
    grid = StorageGrid.uniform(no_evap, 1000.0)
    rec = flat_record(0, q=0.0)
    for i in range(grid.m):
        acts = feasible_actions(no_evap, grid, i, rec)
        assert list(acts) == list(range(i + 1))  # only draining moves remain


def test_feasible_actions_forced_fill_spills_to_top():
    spec = toy_system(steps_per_year=12)
    capped = SystemSpec(
        storage_curve=spec.storage_curve, s_dead=spec.s_dead, s_max=spec.s_max,
        h_dead=spec.h_dead, h_max=spec.h_max, hec_max=spec.hec_max,
        gen=spec.gen, heads=spec.heads, evap_rates=spec.evap_rates,
        tailwater_level=spec.tailwater_level, release_cap_enforced=True,
        steps_per_year=12,
    )
    grid = StorageGrid.uniform(capped, 1000.0)
    # inflow far beyond both the free grid range and the release cap
    rec = flat_record(0, q=50_000.0)
    acts = feasible_actions(capped, grid, grid.m - 1, rec)
    assert list(acts) == [grid.m - 1]


def test_feasible_actions_depend_on_episode_inflow(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    wet = flat_record(0, q=900.0)
    dry = flat_record(0, q=50.0)
    acts_wet = feasible_actions(spec, grid, 4, wet)
    acts_dry = feasible_actions(spec, grid, 4, dry)
    assert set(acts_dry) < set(acts_wet)


# -- q_update ----------------------------------------------------------------


def test_q_update_full_overwrite():
    store = QStore(3)
    state = (0, 0, 0, 0)
    mag = q_update(store, state, 1, reward=-7.5, next_state=None,
                   next_actions=None, alpha=1.0, gamma=0.0)
    assert store.get(state, 1) == pytest.approx(-7.5)
    assert mag == pytest.approx(7.5)


def test_q_update_zero_reward_fixed_point():
    store = QStore(2)
    a, b = (0, 0, 0, 0), (1, 0, 0, 0)
    acts = np.array([0])
    for _ in range(10):
        assert q_update(store, a, 0, 0.0, b, acts, 0.9, 0.5) == 0.0
        assert q_update(store, b, 0, 0.0, a, acts, 0.9, 0.5) == 0.0
    assert store.get(a, 0) == 0.0


def test_q_update_two_state_chain_converges_to_bellman_fixed_point():
    # A --(-1)--> B --(0)--> A, gamma .5:
    # Q(A) = -1 + .5 Q(B), Q(B) = .5 Q(A)  =>  Q(A) = -4/3, Q(B) = -2/3
    store = QStore(1)
    a, b = (0, 0, 0, 0), (1, 0, 0, 0)
    acts = np.array([0])
    for _ in range(2000):
        q_update(store, a, 0, -1.0, b, acts, 0.1, 0.5)
        q_update(store, b, 0, 0.0, a, acts, 0.1, 0.5)
    assert store.get(a, 0) == pytest.approx(-4 / 3, abs=1e-6)
    assert store.get(b, 0) == pytest.approx(-2 / 3, abs=1e-6)


def test_q_update_rejects_bad_alpha():
    with pytest.raises(ValueError):
        q_update(QStore(1), (0, 0, 0, 0), 0, 0.0, None, None, 0.0, 0.5)


# -- schedules ---------------------------------------------------------------


def test_default_epsilon_schedule_breakpoints():
    cfg = RlConfig(max_episodes=400_000)
    assert cfg.epsilon_for(0) == pytest.approx(0.8)
    assert cfg.epsilon_for(100_000) == pytest.approx(0.4)
    assert cfg.epsilon_for(200_000) == pytest.approx(0.2)
    assert cfg.epsilon_for(300_000) == pytest.approx(0.05)
    assert cfg.epsilon_for(350_000) == pytest.approx(0.0001)
    assert cfg.epsilon_for(399_999) == pytest.approx(0.0001)


def test_alpha_linear_decay_and_stride():
    cfg = RlConfig(max_episodes=400_000, alpha0=0.8, alpha_min=0.001,
                   alpha_stride=500)
    assert cfg.alpha_for(0) == pytest.approx(0.8)
    assert cfg.alpha_for(400_000) == pytest.approx(0.001)
    assert cfg.alpha_for(499) == pytest.approx(0.8)  # held within the stride
    assert cfg.alpha_for(500) < 0.8


def test_config_validation():
    with pytest.raises(ValueError):
        RlConfig(alpha0=0.0)
    with pytest.raises(ValueError):
        RlConfig(epsilon_schedule=((5, 0.5),))
    with pytest.raises(ValueError):
        RlConfig(epsilon_schedule=((0, 1.5),))
    with pytest.raises(ValueError):
        RlConfig(terminal_bootstrap="loop")
    with pytest.warns(UserWarning):
        RlConfig(gamma=1.0)


# -- training ----------------------------------------------------------------


def test_single_year_training_tracks_ndp(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    ndp = ndp_solve(spec, year, grid, weights)
    cfg = RlConfig(max_episodes=4000, gamma=0.5, seed=11, checkpoint_every=0,
                   alpha_stride=100)
    policy = nrl_train(spec, year, grid, cq, ctr, weights, cfg)
    sim = simulate_policy(spec, year, TotalRlPolicy(policy), ndp.start_storage)
    s_n = s_n_benchmark(ndp.outcomes, sim)
    assert s_n <= len(year) * 500.0  # within one grid step per timestep
    assert sim.total_cost() <= 1.5 * ndp.total_cost() + 1e-9


def test_training_is_seed_deterministic(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    cfg = RlConfig(max_episodes=300, gamma=0.5, seed=5, checkpoint_every=0)
    p1 = nrl_train(spec, year, grid, cq, ctr, weights, cfg)
    p2 = nrl_train(spec, year, grid, cq, ctr, weights, cfg)
    assert p1.actions == p2.actions
    assert p1.learning_curve == p2.learning_curve


def test_q_values_stay_bounded_under_bounded_rewards():
    # |Q| <= max|reward| / (1 - gamma) for any update sequence
    rng = np.random.default_rng(13)
    gamma, r_max = 0.5, 40.0
    store = QStore(4)
    states = [(t, i, 0, 0) for t in range(3) for i in range(4)]
    for _ in range(5000):
        s = states[rng.integers(len(states))]
        ns = states[rng.integers(len(states))]
        acts = np.sort(rng.choice(4, size=rng.integers(1, 5), replace=False))
        a = int(acts[rng.integers(acts.size)])
        reward = -float(rng.uniform(0, r_max))
        q_update(store, s, a, reward, ns, acts, float(rng.uniform(0.05, 1.0)), gamma)
    bound = r_max / (1 - gamma) + 1e-9
    for state, action in store.visited_pairs():
        assert abs(store.get(state, action)) <= bound


def test_all_stored_pairs_were_feasible(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    cfg = RlConfig(max_episodes=200, gamma=0.5, seed=7, checkpoint_every=0)
    policy = nrl_train(spec, year, grid, cq, ctr, weights, cfg)
    for (t, i, lq, ltr), j in policy.actions.items():
        acts = feasible_actions(spec, grid, i, year[t], t)
        assert j in set(int(a) for a in acts)


def test_m_zero_returns_empty_policy(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    cfg = RlConfig(max_episodes=0, checkpoint_every=0)
    policy = nrl_train(spec, year, grid, cq, ctr, weights, cfg)
    assert policy.episodes_trained == 0
    assert policy.actions == {}
    assert policy.decide(0, 2500.0, year[0]) is None


def test_learning_threshold_stops_training(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    cfg = RlConfig(max_episodes=10_000, gamma=0.5, seed=1,
                   learning_threshold=1e12, checkpoint_every=0)
    policy = nrl_train(spec, year, grid, cq, ctr, weights, cfg)
    # an absurdly generous threshold stops after the first full pass
    assert policy.episodes_trained == 1
    assert policy.converged


def test_checkpoints_record_s_n(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    ndp = ndp_solve(spec, year, grid, weights)
    cfg = RlConfig(max_episodes=400, gamma=0.5, seed=2, checkpoint_every=100)
    bench = RlBenchmark(series=year, start_storage=ndp.start_storage,
                        reference=ndp.outcomes)
    policy = nrl_train(spec, year, grid, cq, ctr, weights, cfg, benchmark=bench)
    assert len(policy.checkpoints) == 4
    assert all("s_n" in c for c in policy.checkpoints)


# -- the benchmark metric ----------------------------------------------------


def test_s_n_identical_is_zero(rl_setup):
    spec, grid, year, weights, cq, ctr = rl_setup
    ndp = ndp_solve(spec, year, grid, weights)
    assert s_n_benchmark(ndp.outcomes, ndp.outcomes) == 0.0


def test_s_n_constant_offset():
    from resopt.outcomes import OutcomeSeries

    def fake(levels):
        T = len(levels)
        z = np.zeros(T)
        return OutcomeSeries(
            t=np.arange(T), s_start=np.array(levels, dtype=float),
            s_end=np.array(levels, dtype=float), r_total=z,
            user_releases=np.zeros((T, 5)), evap=z, overspill=z,
            deviations=np.zeros((T, 8)), power=z, reward=z,
        )

    a = fake([1000.0] * 10)
    b = fake([1300.0] * 10)
    assert s_n_benchmark(a, b) == pytest.approx(3000.0)
    with pytest.raises(ValueError, match="length"):
        s_n_benchmark(a, fake([0.0] * 9))
