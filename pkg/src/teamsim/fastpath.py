"""Compiled round loop, bit-identical to the reference implementation.

The kernel replays exactly the logical draw sequence of the pure-Python
period loop, including its block-buffered stream discipline (4096-value
refills per draw kind per phase, lazily on first use), so norm/raw
trajectories, team logs, and final population state match the reference
bit for bit. numba reproduces NumPy Generator output bitwise, which the
test suite verifies both directly and end to end.

This module imports numba at load time; callers treat an ImportError as
"fast path unavailable" and use the reference loop instead.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .population import Population, UtilityView

_BLOCK = 4096


@njit(cache=True, inline="always")
def _nextn(gen, block, i):
    if i >= block.size:
        block = gen.standard_normal(_BLOCK)
        i = 0
    return block[i], block, i + 1


@njit(cache=True, inline="always")
def _nextu(gen, block, i):
    if i >= block.size:
        block = gen.random(_BLOCK)
        i = 0
    return block[i], block, i + 1


@njit(cache=True, inline="always")
def _kth_known(known, aid, k):
    seen = -1
    for x in range(known.shape[1]):
        if known[aid, x]:
            seen += 1
            if seen == k:
                return x
    return -1


@njit(cache=True)
def _kernel(
    mode,
    tau_periods,
    prob,
    sd,
    n_periods,
    standing0,
    inv_best,
    util,
    offsets,
    masks,
    s_bits,
    subtask_of,
    known,
    counts,
    alpha,
    beta,
    lam,
    delta,
    last_util,
    gform,
    gcoord,
    glearn,
    norm_out,
    raw_out,
    members_out,
    reformed_out,
):
    n_sub = util.shape[0]
    n_agents = subtask_of.size
    space = 1 << s_bits

    fz = np.empty(0)
    fzi = 0
    fu = np.empty(0)
    fui = 0
    cz = np.empty(0)
    czi = 0
    cu = np.empty(0)
    cui = 0
    lu = np.empty(0)
    lui = 0

    members = np.empty(n_sub, np.int64)
    baselines = np.empty(n_sub)
    utilities = np.empty(n_sub)
    best_sig = np.empty(n_agents)
    bern = np.empty(2 * n_agents)
    top1 = np.empty(n_sub, np.int64)
    top2 = np.empty(n_sub, np.int64)
    pick_a = np.empty(n_sub, np.int64)
    pick_b = np.empty(n_sub, np.int64)
    cands = np.empty(2, np.int64)

    standing = standing0

    for t in range(1, n_periods + 1):
        reform = t == 1 or (tau_periods > 0 and (t - 1) % tau_periods == 0)
        if reform:
            # Signals: one fresh error draw per (agent, known sub-solution).
            for aid in range(n_agents):
                m = subtask_of[aid]
                row = util[m]
                base = standing & ~masks[m]
                off = offsets[m]
                best = -np.inf
                for x in range(space):
                    if known[aid, x]:
                        z, fz, fzi = _nextn(gform, fz, fzi)
                        eu = row[base | (x << off)] * (1.0 + sd * z)
                        if eu > best:
                            best = eu
                best_sig[aid] = best
            for m in range(n_sub):
                top = -1
                top_sig = -np.inf
                tied = 1
                for aid in range(n_agents):
                    if subtask_of[aid] == m:
                        sig = best_sig[aid]
                        if top < 0 or sig > top_sig:
                            top = aid
                            top_sig = sig
                            tied = 1
                        elif sig == top_sig:
                            tied += 1
                if tied > 1:
                    u, fu, fui = _nextu(gform, fu, fui)
                    want = int(u * tied)
                    seen = 0
                    for aid in range(n_agents):
                        if subtask_of[aid] == m and best_sig[aid] == top_sig:
                            if seen == want:
                                top = aid
                                break
                            seen += 1
                members[m] = top

        previous = standing
        for m in range(n_sub):
            baselines[m] = util[m, previous]

        solution = previous
        if mode == 0:  # fully autonomous
            out = 0
            for m in range(n_sub):
                aid = members[m]
                row = util[m]
                base = standing & ~masks[m]
                off = offsets[m]
                best_eu = -np.inf
                best_x = -1
                for x in range(space):
                    if known[aid, x]:
                        z, cz, czi = _nextn(gcoord, cz, czi)
                        eu = row[base | (x << off)] * (1.0 + sd * z)
                        if best_x < 0 or eu > best_eu:
                            best_eu = eu
                            best_x = x
                out |= best_x << off
            solution = out
        elif mode == 1:  # sequential
            for m in range(n_sub):
                aid = members[m]
                row = util[m]
                base = solution & ~masks[m]
                off = offsets[m]
                best_eu = -np.inf
                best_x = -1
                for x in range(space):
                    if known[aid, x]:
                        z, cz, czi = _nextn(gcoord, cz, czi)
                        eu = row[base | (x << off)] * (1.0 + sd * z)
                        if best_x < 0 or eu > best_eu:
                            best_eu = eu
                            best_x = x
                solution = base | (best_x << off)
        elif mode == 2:  # liaison
            for m in range(n_sub):
                aid = members[m]
                row = util[m]
                base = standing & ~masks[m]
                off = offsets[m]
                eu1 = -np.inf
                eu2 = -np.inf
                b1 = -1
                b2 = -1
                for x in range(space):
                    if known[aid, x]:
                        z, cz, czi = _nextn(gcoord, cz, czi)
                        eu = row[base | (x << off)] * (1.0 + sd * z)
                        if b1 < 0 or eu > eu1:
                            eu2 = eu1
                            b2 = b1
                            eu1 = eu
                            b1 = x
                        elif eu > eu2:
                            eu2 = eu
                            b2 = x
                if b2 < 0:
                    b2 = b1
                top1[m] = b1
                top2[m] = b2
            cand1 = 0
            cand2 = 0
            for m in range(n_sub):
                cand1 |= top1[m] << offsets[m]
                cand2 |= top2[m] << offsets[m]
            cands[0] = cand1
            cands[1] = cand2
            # Private judgment: each member compares its own slot of the
            # candidate spliced into the standing solution against the
            # standing solution, both under unit-scale uncertainty about
            # the colleague parts (independent of sd).
            for c in range(2):
                cand = cands[c]
                accepted = True
                for m in range(n_sub):
                    spliced = (standing & ~masks[m]) | (cand & masks[m])
                    z, cz, czi = _nextn(gcoord, cz, czi)
                    zb, cz, czi = _nextn(gcoord, cz, czi)
                    eu = util[m, spliced] * (1.0 + z)
                    eu_base = util[m, standing] * (1.0 + zb)
                    if not eu > eu_base:
                        accepted = False
                if accepted:
                    solution = cand
                    break
        else:  # lateral
            for m in range(n_sub):
                aid = members[m]
                size = counts[aid]
                if size == 1:
                    only = _kth_known(known, aid, 0)
                    pick_a[m] = only
                    pick_b[m] = only
                else:
                    u, cu, cui = _nextu(gcoord, cu, cui)
                    i = int(u * size)
                    u, cu, cui = _nextu(gcoord, cu, cui)
                    j = int(u * (size - 1))
                    if j >= i:
                        j += 1
                    pick_a[m] = _kth_known(known, aid, i)
                    pick_b[m] = _kth_known(known, aid, j)
            for c in range(2):
                sol = 0
                for m in range(n_sub):
                    u, cu, cui = _nextu(gcoord, cu, cui)
                    sel = pick_a[m] if int(u * 2) == 0 else pick_b[m]
                    sol |= sel << offsets[m]
                cands[c] = sol
            for c in range(2):
                cand = cands[c]
                accepted = True
                for m in range(n_sub):
                    z, cz, czi = _nextn(gcoord, cz, czi)
                    eu = util[m, cand] * (1.0 + sd * z)
                    if not eu > baselines[m]:
                        accepted = False
                if accepted:
                    solution = cand
                    break

        perf = 0.0
        for m in range(n_sub):
            u_now = util[m, solution]
            utilities[m] = u_now
            perf += u_now
        perf /= n_sub

        i = t - 1
        raw_out[i] = perf
        norm_out[i] = perf * inv_best
        for m in range(n_sub):
            members_out[i, m] = members[m]
        reformed_out[i] = reform
        standing = solution

        # Learning: member outcome updates, then memory decay, then one
        # discovery and one forgetting draw per agent.
        for m in range(n_sub):
            aid = members[m]
            sub = (solution >> offsets[m]) & (space - 1)
            u_now = utilities[m]
            u_prev = baselines[m]
            if u_now >= u_prev:
                alpha[aid, sub] += 1
            else:
                beta[aid, sub] += 1
            extra = 0.0 if known[aid, sub] else 1.0
            lam[aid, sub] += extra + (1.0 if u_now < u_prev else 0.0)
            if u_now > u_prev:
                delta[aid, sub] += 1
            last_util[aid] = u_now

        for aid in range(n_agents):
            for x in range(space):
                if known[aid, x]:
                    lam[aid, x] += 1

        for b in range(2 * n_agents):
            u, lu, lui = _nextu(glearn, lu, lui)
            bern[b] = u

        for aid in range(n_agents):
            if bern[2 * aid] < prob and counts[aid] < space:
                u, lu, lui = _nextu(glearn, lu, lui)
                total = 0.0
                for x in range(space):
                    if not known[aid, x]:
                        total += alpha[aid, x] / (alpha[aid, x] + beta[aid, x])
                r = u * total
                acc = 0.0
                chosen = -1
                last = -1
                for x in range(space):
                    if not known[aid, x]:
                        acc += alpha[aid, x] / (alpha[aid, x] + beta[aid, x])
                        last = x
                        if acc > r:
                            chosen = x
                            break
                if chosen < 0:
                    chosen = last
                known[aid, chosen] = True
                counts[aid] += 1

        for aid in range(n_agents):
            if bern[2 * aid + 1] < prob and counts[aid] >= 2:
                u, lu, lui = _nextu(glearn, lu, lui)
                want = int(u * counts[aid])
                if want >= counts[aid]:
                    want = counts[aid] - 1
                x = _kth_known(known, aid, want)
                u, lu, lui = _nextu(glearn, lu, lui)
                if u < lam[aid, x] / (lam[aid, x] + delta[aid, x]):
                    known[aid, x] = False
                    counts[aid] -= 1


_MODE_CODES = {"fully_autonomous": 0, "sequential": 1, "liaison": 2, "lateral": 3}


def simulate_round_arrays(
    config,
    view: UtilityView,
    population: Population,
    standing: int,
    inv_best: float,
    form_rng: np.random.Generator,
    coord_rng: np.random.Generator,
    learn_rng: np.random.Generator,
):
    """Run one round through the kernel; returns (norm, raw, members, reformed).

    Mutates the population arrays in place exactly as the reference loop
    would, and rebuilds the per-agent known lists afterwards so the
    Population object stays coherent.
    """
    n_periods = config.periods
    n_sub = view.n_subtasks
    tau = float(config.tau)
    tau_periods = 0 if not np.isfinite(tau) else int(tau)

    norm = np.empty(n_periods)
    raw = np.empty(n_periods)
    members = np.empty((n_periods, n_sub), dtype=np.int16)
    reformed = np.zeros(n_periods, dtype=bool)
    counts = population.known_mask.sum(axis=1).astype(np.int64)
    last_util = np.full(population.n_agents, np.nan)
    for aid, v in enumerate(population.last_utility):
        if v is not None:
            last_util[aid] = v

    _kernel(
        _MODE_CODES[config.mode],
        tau_periods,
        float(config.prob),
        float(config.error_sd),
        n_periods,
        standing,
        inv_best,
        view.util_stack,
        np.asarray(view.offsets, dtype=np.int64),
        np.asarray(view.masks, dtype=np.int64),
        view.s_bits,
        population.subtask_arr,
        population.known_mask,
        counts,
        population.alpha,
        population.beta,
        population.lam,
        population.delta,
        last_util,
        form_rng,
        coord_rng,
        learn_rng,
        norm,
        raw,
        members,
        reformed,
    )

    population.known = [np.flatnonzero(row).tolist() for row in population.known_mask]
    population.last_utility = [None if np.isnan(v) else float(v) for v in last_util]
    return norm, raw, members, reformed
