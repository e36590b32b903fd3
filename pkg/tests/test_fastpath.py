"""The compiled kernel must match the reference loop bit for bit."""

import math

import numpy as np
import pytest

import teamsim.engine as engine
from teamsim.engine import ScenarioConfig, _simulate_round, phase_streams, scenario_key
from teamsim.landscape import SubtaskValues, build_matrix, generate_landscape
from teamsim.population import UtilityView, init_population

numba = pytest.importorskip("numba")


BATTERY = [
    ScenarioConfig(mode=mode, tau=tau, structure=structure, prob=prob, rounds=1)
    for mode in ("fully_autonomous", "sequential", "liaison", "lateral")
    for tau, structure, prob in (
        (math.inf, "random", 0.5),
        (10.0, "block", 0.2),
        (1.0, "centralized", 0.8),
    )
] + [
    ScenarioConfig(mode="lateral", tau=1.0, structure="dependent", prob=0.0, rounds=1),
    ScenarioConfig(mode="liaison", tau=10.0, structure="hierarchical", prob=1.0, rounds=1),
    ScenarioConfig(mode="sequential", tau=math.inf, structure="local", prob=1.0, k=5, rounds=1),
    ScenarioConfig(mode="fully_autonomous", tau=1.0, structure="random", prob=0.5, error_sd=0.0, rounds=1),
    ScenarioConfig(mode="lateral", tau=10.0, structure="random", prob=0.5, n=6, m_subtasks=2, p_agents=7, rounds=1),
]


@pytest.mark.parametrize("cfg", BATTERY, ids=lambda c: c.scenario_id())
def test_kernel_matches_reference_trajectories(cfg):
    for r in (0, 11):
        ref = _simulate_round(cfg, r, jit=False)
        fast = _simulate_round(cfg, r, jit=True)
        assert np.array_equal(ref.norm, fast.norm)
        assert np.array_equal(ref.raw, fast.raw)
        assert np.array_equal(ref.members, fast.members)
        assert np.array_equal(ref.reformed, fast.reformed)


def _final_population(cfg, round_index, jit):
    key = scenario_key(cfg)
    land, pop_rng, form, coord, learn = phase_streams(cfg.master_seed, key, round_index)
    matrix = build_matrix(cfg.structure, cfg.n, cfg.k, land)
    scape = generate_landscape(matrix, land)
    values = SubtaskValues(scape, cfg.m_subtasks)
    view = UtilityView(values)
    population = init_population(cfg.p_agents, cfg.m_subtasks, values.s_bits, pop_rng)
    standing = int(pop_rng.integers(0, scape.perf.size))

    if jit:
        from teamsim import fastpath

        fastpath.simulate_round_arrays(
            cfg, view, population, standing, 1.0 / scape.global_max, form, coord, learn
        )
        return population

    from teamsim.coordination import DECIDERS
    from teamsim.formation import TeamState, form_team, should_reform
    from teamsim.learning import end_of_period
    from teamsim.streams import DrawBuffer

    fb, cb, lb = DrawBuffer(form), DrawBuffer(coord), DrawBuffer(learn)
    rows = view.util_rows
    team = TeamState(members=[], standing=standing, member_last_utilities=[0.0] * cfg.m_subtasks)
    for t in range(1, cfg.periods + 1):
        if should_reform(t, cfg.tau):
            team.members = form_team(population, team.standing, view, fb, cfg.error_sd)
        prev = team.standing
        baselines = [rows[m][prev] for m in range(cfg.m_subtasks)]
        team.member_last_utilities = baselines
        solution = DECIDERS[cfg.mode](team, population, view, cb, cfg.error_sd)
        utilities = [rows[m][solution] for m in range(cfg.m_subtasks)]
        team.standing = solution
        end_of_period(population, team.members, solution, utilities, baselines, cfg.prob, lb)
    return population


@pytest.mark.parametrize(
    "cfg",
    [
        ScenarioConfig(mode="lateral", tau=10.0, structure="random", prob=0.7, rounds=1),
        ScenarioConfig(mode="liaison", tau=1.0, structure="block", prob=0.4, rounds=1),
        ScenarioConfig(mode="fully_autonomous", tau=math.inf, structure="local", prob=0.9, rounds=1),
    ],
    ids=lambda c: c.scenario_id(),
)
def test_kernel_matches_reference_population_state(cfg):
    ref = _final_population(cfg, 3, jit=False)
    fast = _final_population(cfg, 3, jit=True)
    assert ref.known == fast.known
    assert np.array_equal(ref.known_mask, fast.known_mask)
    for name in ("alpha", "beta", "lam", "delta"):
        assert np.array_equal(getattr(ref, name), getattr(fast, name)), name
    assert ref.last_utility == fast.last_utility


def test_jit_request_fails_cleanly_when_unavailable(monkeypatch):
    monkeypatch.setattr(engine, "_FASTPATH", None)
    monkeypatch.setattr(engine, "_FASTPATH_PROBED", True)
    from teamsim.errors import ConfigError

    with pytest.raises(ConfigError):
        _simulate_round(ScenarioConfig(rounds=1), 0, jit=True)
    # auto selection degrades to the reference loop instead of failing
    res = _simulate_round(ScenarioConfig(rounds=1, periods=5), 0)
    assert res.norm.shape == (5,)


def test_env_switch_disables_kernel(monkeypatch):
    monkeypatch.setenv("TEAMSIM_JIT", "0")
    cfg = ScenarioConfig(rounds=1, periods=5)
    auto = _simulate_round(cfg, 0)
    ref = _simulate_round(cfg, 0, jit=False)
    assert np.array_equal(auto.norm, ref.norm)
