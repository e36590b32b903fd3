"""Scenario orchestration: deterministic streams, the period loop, and
chunked Monte-Carlo execution across rounds and scenarios.

Every round draws five independent substreams (landscape, population,
formation, coordination, learning) seeded from (master_seed, scenario
key, round index), so any round of any scenario can be reproduced in
isolation and results never depend on execution order or worker count.
Rounds are processed in fixed-size chunks whose partial sums are always
combined in chunk order, which keeps parallel and serial runs
bit-identical.

When numba is installed the period loop runs through a compiled kernel
that reproduces the reference loop bit for bit; set TEAMSIM_JIT=0 to
force the pure-Python path.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .coordination import DECIDERS, MODES
from .errors import ConfigError
from .formation import TeamState, form_team, should_reform
from .landscape import STRUCTURES, SubtaskValues, build_matrix, generate_landscape
from .learning import end_of_period
from .population import UtilityView, init_population
from .streams import DrawBuffer

PHASES = ("landscape", "population", "formation", "coordination", "learning")
CHUNK_ROUNDS = 50
_MASK64 = (1 << 64) - 1

_FASTPATH = None
_FASTPATH_PROBED = False


def _fast_module():
    """The compiled-kernel module, or None when numba is unavailable."""
    global _FASTPATH, _FASTPATH_PROBED
    if not _FASTPATH_PROBED:
        _FASTPATH_PROBED = True
        try:
            from . import fastpath
        except ImportError:
            _FASTPATH = None
        else:
            _FASTPATH = fastpath
    return _FASTPATH

GRID_KS = (3, 5)
GRID_TAUS = (math.inf, 10.0, 1.0)
GRID_PROBS = tuple(i / 10 for i in range(11))


@dataclass(frozen=True)
class ScenarioConfig:
    """One cell of the experiment grid plus the fixed model parameters."""

    mode: str = "fully_autonomous"
    k: int = 3
    structure: str = "block"
    tau: float = math.inf
    prob: float = 0.5
    n: int = 12
    m_subtasks: int = 3
    p_agents: int = 30
    periods: int = 100
    rounds: int = 300
    error_sd: float = 0.02
    master_seed: int = 42

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.structure not in STRUCTURES:
            raise ConfigError(f"unknown structure {self.structure!r}; expected one of {', '.join(STRUCTURES)}")
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.m_subtasks < 1 or self.n % self.m_subtasks:
            raise ConfigError(f"m_subtasks must divide n; got n={self.n}, m_subtasks={self.m_subtasks}")
        if not 0 <= self.k <= self.n - 1:
            raise ConfigError(f"k must lie in [0, n-1]; got k={self.k} with n={self.n}")
        if self.structure == "block" and self.n % (self.k + 1):
            raise ConfigError(f"block structure needs k+1 to divide n; got n={self.n}, k={self.k}")
        tau = float(self.tau)
        if not (tau == math.inf or (tau >= 1 and tau == int(tau))):
            raise ConfigError(f"tau must be a positive whole number of periods or infinite, got {self.tau}")
        if not 0.0 <= self.prob <= 1.0:
            raise ConfigError(f"prob must lie in [0, 1], got {self.prob}")
        if self.periods < 1:
            raise ConfigError(f"periods must be positive, got {self.periods}")
        if self.rounds < 1:
            raise ConfigError(f"rounds must be positive, got {self.rounds}")
        if self.p_agents < self.m_subtasks:
            raise ConfigError(f"need at least one agent per subtask; got p_agents={self.p_agents}, m_subtasks={self.m_subtasks}")
        if self.error_sd < 0:
            raise ConfigError(f"error_sd must be non-negative, got {self.error_sd}")

    def scenario_id(self) -> str:
        return f"{self.mode}-k{self.k}-{self.structure}-tau{float(self.tau):g}-p{float(self.prob):g}"


def scenario_key(config: ScenarioConfig) -> int:
    """Stable 64-bit key over every parameter that shapes a round.

    rounds and master_seed are deliberately excluded: extending a run to
    more rounds, or reseeding, must not reshuffle the existing rounds.
    """
    canon = "|".join(
        (
            config.mode,
            config.structure,
            str(config.k),
            repr(float(config.tau)),
            repr(float(config.prob)),
            str(config.n),
            str(config.m_subtasks),
            str(config.p_agents),
            str(config.periods),
            repr(float(config.error_sd)),
        )
    )
    return int.from_bytes(hashlib.blake2b(canon.encode(), digest_size=8).digest(), "big")


def phase_streams(master_seed: int, key: int, round_index: int) -> list[np.random.Generator]:
    """Five independent generators for one round, in PHASES order."""
    root = np.random.SeedSequence([master_seed & _MASK64, key, round_index])
    return [np.random.default_rng(child) for child in root.spawn(len(PHASES))]


@dataclass
class RoundResult:
    """Per-period trajectories of one simulated round."""

    norm: np.ndarray      # (T,) performance / landscape optimum
    raw: np.ndarray       # (T,) unnormalized performance
    members: np.ndarray   # (T, M) agent id implementing each subtask
    reformed: np.ndarray  # (T,) whether the team re-formed this period


@dataclass(frozen=True)
class PeriodRecord:
    """One period of one round, in external-interface form."""

    period: int
    raw_performance: float
    norm_performance: float
    members: tuple[int, ...]
    reformed: bool


def _simulate_round(config: ScenarioConfig, round_index: int, matrix=None, jit: bool | None = None) -> RoundResult:
    key = scenario_key(config)
    land_rng, pop_rng, form_rng, coord_rng, learn_rng = phase_streams(config.master_seed, key, round_index)

    if matrix is None:
        matrix = build_matrix(config.structure, config.n, config.k, land_rng)
    scape = generate_landscape(matrix, land_rng)
    values = SubtaskValues(scape, config.m_subtasks)
    view = UtilityView(values)

    population = init_population(config.p_agents, config.m_subtasks, values.s_bits, pop_rng)
    standing = int(pop_rng.integers(0, scape.perf.size))

    if jit is None:
        jit = _fast_module() is not None and os.environ.get("TEAMSIM_JIT", "1") != "0"
    if jit:
        fast = _fast_module()
        if fast is None:
            raise ConfigError("compiled fast path requested but numba is not installed")
        norm, raw, members_log, reformed = fast.simulate_round_arrays(
            config, view, population, standing, 1.0 / scape.global_max,
            form_rng, coord_rng, learn_rng,
        )
        return RoundResult(norm=norm, raw=raw, members=members_log, reformed=reformed)

    form_buf = DrawBuffer(form_rng)
    coord_buf = DrawBuffer(coord_rng)
    learn_buf = DrawBuffer(learn_rng)

    decide = DECIDERS[config.mode]
    n_periods = config.periods
    n_sub = config.m_subtasks
    tau, prob, sd = config.tau, config.prob, config.error_sd
    rows = view.util_rows
    sub_range = range(n_sub)
    inv_best = 1.0 / scape.global_max

    norm = np.empty(n_periods)
    raw = np.empty(n_periods)
    members_log = np.empty((n_periods, n_sub), dtype=np.int16)
    reformed = np.zeros(n_periods, dtype=bool)

    team = TeamState(members=[], standing=standing, member_last_utilities=[0.0] * n_sub)
    for t in range(1, n_periods + 1):
        if should_reform(t, tau):
            team.members = form_team(population, team.standing, view, form_buf, sd)
            reformed[t - 1] = True
        previous = team.standing
        baselines = [rows[m][previous] for m in sub_range]
        team.member_last_utilities = baselines

        solution = decide(team, population, view, coord_buf, sd)
        utilities = [rows[m][solution] for m in sub_range]
        # Mean member utility equals task performance (the residual terms
        # average out), so no separate performance table is consulted.
        perf = sum(utilities) / n_sub

        i = t - 1
        raw[i] = perf
        norm[i] = perf * inv_best
        members_log[i] = team.members
        team.standing = solution

        end_of_period(population, team.members, solution, utilities, baselines, prob, learn_buf)

    return RoundResult(norm=norm, raw=raw, members=members_log, reformed=reformed)


def run_round(config: ScenarioConfig, round_index: int) -> list[PeriodRecord]:
    """Simulate one round and return its full per-period trace."""
    if round_index < 0:
        raise ConfigError(f"round_index must be non-negative, got {round_index}")
    res = _simulate_round(config, round_index)
    return [
        PeriodRecord(
            period=t + 1,
            raw_performance=float(res.raw[t]),
            norm_performance=float(res.norm[t]),
            members=tuple(int(a) for a in res.members[t]),
            reformed=bool(res.reformed[t]),
        )
        for t in range(config.periods)
    ]


@dataclass
class ScenarioResult:
    """Aggregated trajectories of one scenario across all its rounds."""

    config: ScenarioConfig
    period_means: np.ndarray  # (T,) across-round mean of normalized performance
    round_means: np.ndarray   # (rounds,) per-round mean over periods
    round_finals: np.ndarray  # (rounds,) per-round final-period value


def _chunk_bounds(rounds: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + CHUNK_ROUNDS, rounds)) for lo in range(0, rounds, CHUNK_ROUNDS)]


def _run_chunk(args: tuple[ScenarioConfig, int, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    config, lo, hi = args
    matrix = None
    if config.structure != "random":
        matrix = build_matrix(config.structure, config.n, config.k)
    psum = np.zeros(config.periods)
    means = np.empty(hi - lo)
    finals = np.empty(hi - lo)
    for r in range(lo, hi):
        res = _simulate_round(config, r, matrix)
        psum += res.norm
        means[r - lo] = res.norm.mean()
        finals[r - lo] = res.norm[-1]
    return psum, means, finals


def _combine_chunks(config: ScenarioConfig, parts: Sequence[tuple]) -> ScenarioResult:
    psum = np.zeros(config.periods)
    means = []
    finals = []
    for part_sum, part_means, part_finals in parts:
        psum += part_sum
        means.append(part_means)
        finals.append(part_finals)
    return ScenarioResult(
        config=config,
        period_means=psum / config.rounds,
        round_means=np.concatenate(means),
        round_finals=np.concatenate(finals),
    )


def effective_workers(workers: int | None) -> int:
    if workers is None:
        return os.cpu_count() or 1
    if workers < 1:
        raise ConfigError(f"workers must be positive, got {workers}")
    return workers


def run_scenario(config: ScenarioConfig, workers: int | None = 1) -> ScenarioResult:
    """Run all rounds of one scenario."""
    return run_grid([config], workers=workers)[0]


def run_grid(
    configs: Sequence[ScenarioConfig],
    workers: int | None = 1,
    progress: Callable[[int, int], None] | None = None,
) -> list[ScenarioResult]:
    """Run every scenario; results are bit-identical for any worker count.

    Work is split into (scenario, chunk-of-rounds) tasks executed in a
    fixed order; per-chunk partials are combined in that same order.
    """
    tasks: list[tuple[ScenarioConfig, int, int]] = []
    owner: list[int] = []
    for ci, config in enumerate(configs):
        for lo, hi in _chunk_bounds(config.rounds):
            tasks.append((config, lo, hi))
            owner.append(ci)

    nworkers = effective_workers(workers)
    parts_by_scenario: list[list[tuple]] = [[] for _ in configs]
    done = 0
    if nworkers > 1 and len(tasks) > 1:
        chunksize = max(1, len(tasks) // (nworkers * 8))
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            for ci, part in zip(owner, pool.map(_run_chunk, tasks, chunksize=chunksize)):
                parts_by_scenario[ci].append(part)
                done += 1
                if progress is not None:
                    progress(done, len(tasks))
    else:
        for ci, task in zip(owner, tasks):
            parts_by_scenario[ci].append(_run_chunk(task))
            done += 1
            if progress is not None:
                progress(done, len(tasks))

    return [_combine_chunks(config, parts) for config, parts in zip(configs, parts_by_scenario)]


def enumerate_scenarios(
    modes: Iterable[str] = MODES,
    ks: Iterable[int] = GRID_KS,
    structures: Iterable[str] = STRUCTURES,
    taus: Iterable[float] = GRID_TAUS,
    probs: Iterable[float] = GRID_PROBS,
    **overrides,
) -> list[ScenarioConfig]:
    """The experiment grid in canonical order (mode, k, structure, tau, prob)."""
    out = []
    for mode in modes:
        for k in ks:
            for structure in structures:
                for tau in taus:
                    for prob in probs:
                        out.append(ScenarioConfig(mode=mode, k=k, structure=structure, tau=tau, prob=prob, **overrides))
    return out
