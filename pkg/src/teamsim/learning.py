"""End-of-period belief updating, memory decay, discovery, forgetting.

Members first update the counters of the sub-solution the team actually
implemented: utility at least as high as last period's reinforces alpha,
a drop reinforces beta; lam always takes its memory step and takes a
second step on a drop, while an outright improvement also reinforces
delta. Every other known solution of every agent decays (lam += 1).
Each agent then draws once for discovery and once for forgetting: with
probability prob it picks up an unknown sub-solution (chosen with odds
proportional to discovery weights), and with probability prob it
reconsiders one known solution picked uniformly, dropping it with
probability equal to that solution's forgetting weight and never
dropping its last.

The per-agent step functions define the semantics and serve tests and
oracles; end_of_period applies the identical updates to the whole
population at once. Its canonical draw order is: one interleaved
(discovery, forgetting) Bernoulli pair per agent in id order, then one
sampling uniform per triggered discovery in agent id order, then one
(victim, retention) uniform pair per triggered (and eligible)
forgetting in agent id order.
"""

from __future__ import annotations

import numpy as np

from .landscape import sub_bits
from .population import Population


def update_beliefs_on_outcome(population: Population, aid: int, sub: int, u_now: float, u_prev: float) -> None:
    """Counter updates for the sub-solution a member just implemented."""
    if u_now >= u_prev:
        population.alpha[aid, sub] += 1
    else:
        population.beta[aid, sub] += 1
    population.lam[aid, sub] += 2 if u_now < u_prev else 1
    if u_now > u_prev:
        population.delta[aid, sub] += 1


def apply_memory_decay(population: Population, aid: int, exclude: int = -1) -> None:
    """One lam step for every known solution except `exclude`."""
    lam = population.lam
    for x in population.known[aid]:
        if x != exclude:
            lam[aid, x] += 1


def discovery_step(
    population: Population,
    aid: int,
    prob: float,
    rng,
    bernoulli: float | None = None,
    sample: float | None = None,
) -> int | None:
    """With probability prob, learn one unknown sub-solution.

    The candidate is sampled with probability proportional to its discovery
    weight. The Bernoulli draw is consumed even when nothing can be
    learned; the sampling draw only when a pick actually happens. Returns
    the discovered solution, or None.
    """
    u = rng.uniform() if bernoulli is None else bernoulli
    if u >= prob:
        return None
    known_mask = population.known_mask[aid]
    space = population.space
    if len(population.known[aid]) == space:
        return None
    alpha, beta = population.alpha[aid], population.beta[aid]
    total = 0.0
    for x in range(space):
        if not known_mask[x]:
            total += alpha[x] / (alpha[x] + beta[x])
    r = (rng.uniform() if sample is None else sample) * total
    acc = 0.0
    last = -1
    for x in range(space):
        if not known_mask[x]:
            acc += alpha[x] / (alpha[x] + beta[x])
            last = x
            if r < acc:
                population.add_known(aid, x)
                return x
    population.add_known(aid, last)  # accumulated rounding pushed r past the total
    return last


def forgetting_step(
    population: Population,
    aid: int,
    prob: float,
    rng,
    bernoulli: float | None = None,
    sample: float | None = None,
    retention: float | None = None,
) -> int | None:
    """With probability prob, reconsider one known sub-solution.

    The candidate victim is picked uniformly from the known set and is
    dropped when the retention draw falls below its forgetting weight, so
    a solution the agent believes in survives reconsideration. An agent
    never forgets its only solution. The Bernoulli draw is consumed
    regardless; the victim and retention draws only when the agent is
    eligible. Returns the forgotten solution, or None.
    """
    u = rng.uniform() if bernoulli is None else bernoulli
    if u >= prob:
        return None
    known = population.known[aid]
    if len(known) < 2:
        return None
    pick = rng.uniform() if sample is None else sample
    x = known[min(int(pick * len(known)), len(known) - 1)]
    lam, delta = population.lam[aid], population.delta[aid]
    test = rng.uniform() if retention is None else retention
    if test < lam[x] / (lam[x] + delta[x]):
        population.remove_known(aid, x)
        return x
    return None


def end_of_period(
    population: Population,
    members: list[int],
    solution: int,
    member_utilities: list[float],
    previous_utilities: list[float],
    prob: float,
    rng,
) -> None:
    """Run the full learning pass for one period, vectorized over agents.

    Equivalent to applying the step functions above to every agent in id
    order (members get the outcome update plus decay on the rest of their
    known set, everyone else just decays), with draws consumed in the
    canonical order documented in the module docstring.
    """
    alpha, beta = population.alpha, population.beta
    lam, delta = population.lam, population.delta
    known_mask = population.known_mask
    n = len(population.subtasks)
    s_bits = population.s_bits

    # Memory decay for every known solution; members' implemented
    # sub-solutions get their outcome-specific lam step on top (the extra
    # +1 below completes the two-step penalty on a utility drop, and the
    # no-decay case for a sub the member does not currently know is
    # rebuilt by adding the missing base step).
    np.add(lam, known_mask, out=lam)
    for m, aid in enumerate(members):
        sub = sub_bits(solution, m, s_bits)
        u_now, u_prev = member_utilities[m], previous_utilities[m]
        if u_now >= u_prev:
            alpha[aid, sub] += 1
        else:
            beta[aid, sub] += 1
        base = 0 if known_mask[aid, sub] else 1
        lam[aid, sub] += base + (1 if u_now < u_prev else 0)
        if u_now > u_prev:
            delta[aid, sub] += 1
        population.last_utility[aid] = u_now

    draws = rng.uniforms(2 * n)
    bern = np.asarray(draws).reshape(n, 2)

    counts = known_mask.sum(axis=1)
    discover = (bern[:, 0] < prob) & (counts < population.space)
    picked = np.flatnonzero(discover)
    if picked.size:
        a, b = alpha[picked], beta[picked]
        weights = (a / (a + b)) * ~known_mask[picked]
        for aid, x in zip(picked.tolist(), _weighted_picks(weights, rng).tolist()):
            population.add_known(aid, x)

    counts = known_mask.sum(axis=1)
    forget = (bern[:, 1] < prob) & (counts >= 2)
    picked = np.flatnonzero(forget)
    if picked.size:
        pairs = np.asarray(rng.uniforms(2 * picked.size)).reshape(-1, 2)
        for aid, (pick, test) in zip(picked.tolist(), pairs.tolist()):
            known = population.known[aid]
            x = known[min(int(pick * len(known)), len(known) - 1)]
            if test < lam[aid, x] / (lam[aid, x] + delta[aid, x]):
                population.remove_known(aid, x)


def _weighted_picks(weights: np.ndarray, rng) -> np.ndarray:
    """One weighted column pick per row: the first column whose cumulative
    weight strictly exceeds u * total, matching the step functions' scalar
    walk, including their fallback to the last positive-weight column when
    accumulated rounding pushes the threshold to the total."""
    cum = np.cumsum(weights, axis=1)
    samples = np.asarray(rng.uniforms(weights.shape[0])) * cum[:, -1]
    chosen = (cum <= samples[:, None]).sum(axis=1)
    over = chosen >= weights.shape[1]
    if over.any():
        last_valid = weights.shape[1] - 1 - np.argmax(weights[:, ::-1] > 0, axis=1)
        chosen[over] = last_valid[over]
    return chosen
