"""Self-contained cross-checks of the model against independent logic.

Each oracle re-derives an expected behavior from first principles
(brute-force enumeration over raw contribution tables, closed-form
frequencies, literal replay of a protocol's sampling) and compares the
package's implementation against it. They are cheap enough to run at a
desk and are exposed both to tests and through the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coordination import decide_fully_autonomous, decide_lateral, decide_liaison, decide_sequential
from .engine import ScenarioConfig, run_grid
from .formation import TeamState, form_team, signal
from .landscape import (
    STRUCTURES,
    SubtaskValues,
    build_matrix,
    compose,
    count_local_optima,
    generate_landscape,
    subtask_performance,
)
from .learning import discovery_step, forgetting_step
from .population import Population, UtilityView, build_population, init_population, utility
from .streams import DrawBuffer


@dataclass
class OracleReport:
    name: str
    ok: bool
    detail: str


def _rng(seed):
    return np.random.default_rng(seed)


def check_k0_single_peak(seed: int = 0, trials: int = 100) -> OracleReport:
    """Without interdependencies every landscape has exactly one local optimum."""
    rng = _rng(seed)
    worst = 0
    for i in range(trials):
        structure = STRUCTURES[i % len(STRUCTURES)]
        matrix = build_matrix(structure, 12, 0, rng)
        scape = generate_landscape(matrix, rng)
        worst = max(worst, count_local_optima(scape))
    ok = worst == 1
    return OracleReport("k0-single-peak", ok, f"max local optima over {trials} k=0 landscapes: {worst}")


def check_block_decomposable(seed: int = 0, trials: int = 100) -> OracleReport:
    """With block structure the global optimum decomposes into per-block optima."""
    rng = _rng(seed)
    n, k = 12, 3
    width = k + 1
    bad = 0
    for _ in range(trials):
        matrix = build_matrix("block", n, k, rng)
        scape = generate_landscape(matrix, rng)
        assembled = 0
        for b in range(n // width):
            lo = b * width
            # Best joint setting of one block, judged only by that block's tables.
            best_val, best_sub = -1.0, 0
            for sub in range(1 << width):
                sol = sub << lo
                val = sum(scape.contrib[sol, i] for i in range(lo, lo + width))
                if val > best_val:
                    best_val, best_sub = val, sub
            assembled |= best_sub << lo
        if assembled != scape.global_argmax:
            bad += 1
    return OracleReport("block-decomposable", bad == 0, f"{bad}/{trials} landscapes failed block-wise assembly")


def check_ruggedness_trend(seed: int = 0, trials: int = 100) -> OracleReport:
    """Mean count of local optima grows with k on random structures."""
    rng = _rng(seed)
    ks = (0, 3, 7, 11)
    means = []
    for k in ks:
        counts = [count_local_optima(generate_landscape(build_matrix("random", 12, k, rng), rng)) for _ in range(trials)]
        means.append(sum(counts) / trials)
    ok = all(a < b for a, b in zip(means, means[1:]))
    detail = ", ".join(f"k={k}: {m:.2f}" for k, m in zip(ks, means))
    return OracleReport("ruggedness-trend", ok, f"mean local optima {detail}")


def _random_instance(rng, n=4, m=2):
    """Small team decision instance on a fresh landscape."""
    structure = STRUCTURES[int(rng.integers(len(STRUCTURES)))]
    k = int(rng.integers(0, n))
    if structure == "block":
        k = int(rng.choice([c for c in range(n) if n % (c + 1) == 0]))
    matrix = build_matrix(structure, n, k, rng)
    scape = generate_landscape(matrix, rng)
    values = SubtaskValues(scape, m)
    view = UtilityView(values)
    space = 1 << values.s_bits
    endowments = [int(rng.integers(space)) for _ in range(m)]
    population = build_population(list(range(m)), endowments, values.s_bits)
    for sub in range(m):
        extra = int(rng.integers(1, space))
        for x in rng.integers(0, space, size=extra):
            if not population.known_mask[sub, int(x)]:
                population.add_known(sub, int(x))
    standing = int(rng.integers(scape.perf.size))
    team = TeamState(members=list(range(m)), standing=standing,
                     member_last_utilities=[utility(values, standing, mm) for mm in range(m)])
    return scape, values, view, population, team


def _true_util(scape, solution, subtask, m):
    """Member utility recomputed from raw tables, bypassing the cached view."""
    own = subtask_performance(scape, solution, subtask, m)
    if m == 1:
        return own
    rest = sum(subtask_performance(scape, solution, r, m) for r in range(m) if r != subtask)
    return 0.5 * (own + rest / (m - 1))


def check_argmax_equivalence(seed: int = 0, trials: int = 1000) -> OracleReport:
    """Error-free one-shot decisions match brute-force enumeration."""
    rng = _rng(seed)
    m = 2
    bad = 0
    for _ in range(trials):
        scape, values, view, population, team = _random_instance(rng, n=4, m=m)
        buf = DrawBuffer(_rng(rng.integers(1 << 32)))

        got_auto = decide_fully_autonomous(team, population, view, buf, 0.0)
        want = 0
        for sub in range(m):
            known = population.known[sub]
            best = max(known, key=lambda x: _true_util(scape, compose(team.standing, x, sub, values.s_bits), sub, m))
            want |= best << (sub * values.s_bits)
        if got_auto != want:
            bad += 1
            continue

        got_seq = decide_sequential(team, population, view, buf, 0.0)
        want_seq = team.standing
        for sub in range(m):
            known = population.known[sub]
            best = max(known, key=lambda x: _true_util(scape, compose(want_seq, x, sub, values.s_bits), sub, m))
            want_seq = compose(want_seq, best, sub, values.s_bits)
        if got_seq != want_seq:
            bad += 1
    return OracleReport("argmax-equivalence", bad == 0, f"{bad}/{trials} instances disagreed with brute force")


def check_veto_fallback(seed: int = 0, trials: int = 500) -> OracleReport:
    """Consensus protocols only move to unanimous improvements, else stand pat.

    With every error scale forced to zero, a lateral move requires each
    member's utility of the full candidate to beat its previous utility,
    and a liaison move requires each member's own slot of the candidate,
    spliced into the standing solution, to beat the standing solution.
    """
    rng = _rng(seed)
    m = 2
    bad = 0
    for i in range(trials):
        scape, values, view, population, team = _random_instance(rng, n=4, m=m)
        buf = DrawBuffer(_rng(int(rng.integers(1 << 32))))
        if i % 2 == 0:
            got = decide_liaison(team, population, view, buf, 0.0, judgment_sd=0.0)
            if got == team.standing:
                continue
            improves = all(
                _true_util(scape, compose(team.standing, (got >> (sub * values.s_bits)) & ((1 << values.s_bits) - 1), sub, values.s_bits), sub, m)
                > team.member_last_utilities[sub]
                for sub in range(m)
            )
        else:
            got = decide_lateral(team, population, view, buf, 0.0)
            if got == team.standing:
                continue
            improves = all(_true_util(scape, got, sub, m) > team.member_last_utilities[sub] for sub in range(m))
        if not improves:
            bad += 1
    return OracleReport("veto-fallback", bad == 0, f"{bad}/{trials} accepted moves were not unanimous improvements")


def check_formation_matches_signals(seed: int = 0, trials: int = 200) -> OracleReport:
    """Batched formation equals the literal per-agent signal replay."""
    rng = _rng(seed)
    bad = 0
    for _ in range(trials):
        matrix = build_matrix("random", 12, 3, rng)
        scape = generate_landscape(matrix, rng)
        values = SubtaskValues(scape, 3)
        view = UtilityView(values)
        population = init_population(10, 3, values.s_bits, rng)
        standing = int(rng.integers(scape.perf.size))
        draw_seed = int(rng.integers(1 << 32))

        got = form_team(population, standing, view, DrawBuffer(_rng(draw_seed)), 0.1)

        replay = DrawBuffer(_rng(draw_seed))
        sigs = [signal(population, a, standing, values, replay, 0.1) for a in range(population.n_agents)]
        want = []
        for roster in population.rosters:
            best = max(sigs[a] for a in roster)
            top = [a for a in roster if sigs[a] == best]
            pick = top[0] if len(top) == 1 else top[replay.randbelow(len(top))]
            want.append(pick)
        if got != want:
            bad += 1
    return OracleReport("formation-signal-replay", bad == 0, f"{bad}/{trials} formations diverged from signal replay")


def check_tie_break_uniform(seed: int = 0, trials: int = 10000, tol: float = 0.02) -> OracleReport:
    """Identical signals are broken uniformly at random."""
    rng = _rng(seed)
    matrix = build_matrix("local", 12, 2, rng)
    scape = generate_landscape(matrix, rng)
    values = SubtaskValues(scape, 3)
    view = UtilityView(values)
    # Three rivals for subtask 0 with identical knowledge, so their
    # error-free signals tie exactly.
    population = build_population([0, 0, 0, 1, 2], [5, 5, 5, 0, 0], values.s_bits)
    buf = DrawBuffer(rng)
    counts = [0, 0, 0]
    for _ in range(trials):
        members = form_team(population, 0, view, buf, 0.0)
        counts[members[0]] += 1
    freqs = [c / trials for c in counts]
    ok = all(abs(f - 1 / 3) <= tol for f in freqs)
    return OracleReport("tie-break-uniform", ok, "member frequencies " + ", ".join(f"{f:.3f}" for f in freqs))


def check_discovery_sampling(seed: int = 0, trials: int = 10000, tol: float = 0.02) -> OracleReport:
    """Discovery picks unknowns in proportion to their discovery weights."""
    rng = _rng(seed)
    buf = DrawBuffer(rng)
    counts = {1: 0, 2: 0, 3: 0}
    for _ in range(trials):
        population = build_population([0], [0], 2)
        # Weights 1/2, 1/2, 1/4 over unknowns 1, 2, 3 -> probabilities 0.4, 0.4, 0.2.
        population.beta[0, 3] = 3
        got = discovery_step(population, 0, 1.0, buf)
        counts[got] += 1
    freqs = {x: c / trials for x, c in counts.items()}
    want = {1: 0.4, 2: 0.4, 3: 0.2}
    ok = all(abs(freqs[x] - want[x]) <= tol for x in want)
    return OracleReport(
        "discovery-sampling", ok, ", ".join(f"sub {x}: {freqs[x]:.3f} (expect {want[x]:.2f})" for x in want)
    )


def check_forgetting_sampling(seed: int = 0, trials: int = 10000, tol: float = 0.02) -> OracleReport:
    """Forgetting reconsiders a uniform victim and drops it at its weight."""
    rng = _rng(seed)
    buf = DrawBuffer(rng)
    counts = {0: 0, 1: 0, None: 0}
    for _ in range(trials):
        population = build_population([0], [0], 2)
        population.add_known(0, 1)
        # q(0) = 3/4, q(1) = 1/4; each is the victim half the time, so the
        # drop frequencies are 0.375 / 0.125 and nothing drops otherwise.
        population.lam[0, 0] = 3
        population.delta[0, 1] = 3
        got = forgetting_step(population, 0, 1.0, buf)
        counts[got] += 1
    freqs = {x: c / trials for x, c in counts.items()}
    want = {0: 0.375, 1: 0.125, None: 0.5}
    ok = all(abs(freqs[x] - want[x]) <= tol for x in want)
    return OracleReport(
        "forgetting-sampling", ok, ", ".join(f"sub {x}: {freqs[x]:.3f} (expect {want[x]:.3f})" for x in want)
    )


def check_lateral_pick_rate(seed: int = 0, trials: int = 10000, tol: float = 0.02) -> OracleReport:
    """Each candidate slot samples a member's two picks uniformly."""
    rng = _rng(seed)
    matrix = build_matrix("local", 4, 1, rng)
    scape = generate_landscape(matrix, rng)
    values = SubtaskValues(scape, 2)
    view = UtilityView(values)
    buf = DrawBuffer(rng)
    counts = {1: 0, 2: 0}
    for _ in range(trials):
        population = build_population([0, 1], [1, 0], values.s_bits)
        population.add_known(0, 2)
        team = TeamState(members=[0, 1], standing=0, member_last_utilities=[-1.0, -1.0])
        # Baselines below every utility: the first candidate is always
        # accepted, so its member-0 slot is one uniform choice between the
        # member's two picks, which here are always sub-solutions 1 and 2.
        got = decide_lateral(team, population, view, buf, 0.0)
        counts[got & ((1 << values.s_bits) - 1)] += 1
    freqs = {x: c / trials for x, c in counts.items()}
    ok = all(abs(f - 0.5) <= tol for f in freqs.values())
    return OracleReport(
        "lateral-pick-rate", ok, ", ".join(f"sub {x}: {f:.3f} (expect 0.50)" for x, f in sorted(freqs.items()))
    )


def check_serial_parallel_equal(seed: int = 0) -> OracleReport:
    """Worker count never changes results."""
    configs = [
        ScenarioConfig(mode="lateral", k=3, structure="local", tau=1.0, prob=0.5,
                       rounds=120, periods=20, master_seed=seed),
        ScenarioConfig(mode="liaison", k=5, structure="random", tau=10.0, prob=0.3,
                       rounds=120, periods=20, master_seed=seed),
    ]
    serial = run_grid(configs, workers=1)
    parallel = run_grid(configs, workers=2)
    ok = True
    for a, b in zip(serial, parallel):
        ok &= np.array_equal(a.period_means, b.period_means)
        ok &= np.array_equal(a.round_means, b.round_means)
        ok &= np.array_equal(a.round_finals, b.round_finals)
    return OracleReport("serial-parallel-equal", bool(ok), "serial and 2-worker runs compared bitwise")


ORACLES = {
    "k0-single-peak": check_k0_single_peak,
    "block-decomposable": check_block_decomposable,
    "ruggedness-trend": check_ruggedness_trend,
    "argmax-equivalence": check_argmax_equivalence,
    "veto-fallback": check_veto_fallback,
    "formation-signal-replay": check_formation_matches_signals,
    "tie-break-uniform": check_tie_break_uniform,
    "discovery-sampling": check_discovery_sampling,
    "forgetting-sampling": check_forgetting_sampling,
    "lateral-pick-rate": check_lateral_pick_rate,
    "serial-parallel-equal": check_serial_parallel_equal,
}


def run_oracles(names=None, seed: int = 0) -> list[OracleReport]:
    chosen = list(ORACLES) if not names else list(names)
    reports = []
    for name in chosen:
        if name not in ORACLES:
            raise KeyError(name)
        reports.append(ORACLES[name](seed))
    return reports
