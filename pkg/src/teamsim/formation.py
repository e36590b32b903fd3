"""Signal-based team formation on a fixed cadence.

Whenever the team re-forms, every agent broadcasts a signal: the best
error-perturbed utility estimate over its known sub-solutions, each
spliced into the previous period's standing solution. The top signaler
per subtask joins; exact signal ties are resolved uniformly at random.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .population import Population, UtilityView, estimated_utility


@dataclass
class TeamState:
    """The current team and the solution it stands on."""

    members: list[int]
    standing: int
    member_last_utilities: list[float]


def should_reform(t: int, tau: float) -> bool:
    """Form at period 1, then whenever tau full periods have elapsed."""
    if t == 1:
        return True
    return math.isfinite(tau) and (t - 1) % int(tau) == 0


def signal(population: Population, aid: int, standing: int, values, rng, error_sd: float) -> float:
    """Best estimated utility over one agent's known set."""
    subtask = population.subtasks[aid]
    best = -math.inf
    for x in population.known[aid]:
        eu = estimated_utility(values, x, standing, subtask, rng, error_sd)
        if eu > best:
            best = eu
    return best


def form_team(population: Population, standing: int, view: UtilityView, rng, error_sd: float) -> list[int]:
    """Pick the highest signaler per subtask.

    One utility lookup and one fresh error draw per (agent, known solution)
    pair, consumed in ascending agent order; equivalent to calling signal()
    per agent but batched across the whole population. Tie-break draws
    follow in subtask order.
    """
    mask = population.known_mask
    space_bits = population.s_bits
    flat = np.flatnonzero(mask)                   # agent-major, sub ascending
    aid = flat >> space_bits
    sub = flat & (population.space - 1)
    owner = population.subtask_arr[aid]

    masked = np.array([standing & ~m for m in view.masks], dtype=np.int64)
    full = masked[owner] | (sub << (owner * view.s_bits))
    eu = view.util_stack[owner, full] * (1.0 + error_sd * rng.normals_np(flat.size))

    counts = mask.sum(axis=1)
    starts = np.zeros(counts.size, dtype=np.intp)
    np.cumsum(counts[:-1], out=starts[1:])
    best = np.maximum.reduceat(eu, starts).tolist()

    members = []
    for roster in population.rosters:
        top = roster[0]
        top_sig = best[top]
        tied = 1
        for a in roster[1:]:
            sig = best[a]
            if sig > top_sig:
                top, top_sig, tied = a, sig, 1
            elif sig == top_sig:
                tied += 1
        if tied > 1:
            pool = [a for a in roster if best[a] == top_sig]
            top = pool[rng.randbelow(len(pool))]
        members.append(top)
    return members
