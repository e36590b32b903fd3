"""The four coordination protocols a team can run in one period.

Every protocol starts from the previous period's standing solution and
returns the full solution implemented this period. Members always
evaluate candidate solutions through fresh error-perturbed utility
estimates; the number of draws consumed never depends on the error
magnitude or on which branch wins, so streams stay aligned.

fully_autonomous  each member independently picks its best sub-solution
                  against the stale residuals; picks are concatenated.
sequential        members decide in subtask order, each seeing the fresh
                  picks of the members before it.
liaison           members nominate their top two sub-solutions; the two
                  concatenated candidates are put to a unanimous vote in
                  which every member judges privately: it sees only its
                  own slot of a candidate (colleague slots held at the
                  standing solution) and its judgment of either side
                  carries unit-scale uncertainty about the colleagues'
                  parts. First accepted candidate wins, otherwise the
                  standing solution stays.
lateral           each member's two picks are drawn uniformly from its
                  known set, each candidate mixes the picks
                  member-by-member at random, and the vote compares full
                  candidate estimates against each member's
                  previous-period utility.
"""

from __future__ import annotations

import math

from .population import Population, UtilityView

MODES = ("fully_autonomous", "sequential", "liaison", "lateral")

# Scale of a liaison member's uncertainty about the colleague part of a
# candidate, relative to the utility level; independent of error_sd.
JUDGMENT_SD = 1.0


def decide_fully_autonomous(team, population: Population, view: UtilityView, rng, error_sd: float) -> int:
    standing = team.standing
    offs, masks, rows = view.offsets, view.masks, view.util_rows
    known_sets = population.known
    out = 0
    for m, aid in enumerate(team.members):
        known = known_sets[aid]
        errs = rng.normals(len(known))
        row = rows[m]
        base = standing & ~masks[m]
        off = offs[m]
        best_eu = -math.inf
        best_x = known[0]
        for x, e in zip(known, errs):
            eu = row[base | (x << off)] * (1.0 + error_sd * e)
            if eu > best_eu:
                best_eu, best_x = eu, x
        out |= best_x << off
    return out


def decide_sequential(team, population: Population, view: UtilityView, rng, error_sd: float) -> int:
    offs, masks, rows = view.offsets, view.masks, view.util_rows
    known_sets = population.known
    solution = team.standing
    for m, aid in enumerate(team.members):
        known = known_sets[aid]
        errs = rng.normals(len(known))
        row = rows[m]
        base = solution & ~masks[m]
        off = offs[m]
        best_eu = -math.inf
        best_x = known[0]
        for x, e in zip(known, errs):
            eu = row[base | (x << off)] * (1.0 + error_sd * e)
            if eu > best_eu:
                best_eu, best_x = eu, x
        solution = base | (best_x << off)
    return solution


def decide_liaison(team, population: Population, view: UtilityView, rng, error_sd: float, judgment_sd: float = JUDGMENT_SD) -> int:
    standing = team.standing
    offs, masks, rows = view.offsets, view.masks, view.util_rows
    known_sets = population.known
    first = 0
    second = 0
    for m, aid in enumerate(team.members):
        known = known_sets[aid]
        errs = rng.normals(len(known))
        row = rows[m]
        base = standing & ~masks[m]
        off = offs[m]
        # Top two by estimated utility; a lone known solution fills both slots.
        eu1 = eu2 = -math.inf
        x1 = x2 = None
        for x, e in zip(known, errs):
            eu = row[base | (x << off)] * (1.0 + error_sd * e)
            if eu > eu1:
                eu2, x2 = eu1, x1
                eu1, x1 = eu, x
            elif eu > eu2:
                eu2, x2 = eu, x
        if x2 is None:
            x2 = x1
        first |= x1 << off
        second |= x2 << off
    return _private_unanimous((first, second), team, view, rng, judgment_sd)


def decide_lateral(team, population: Population, view: UtilityView, rng, error_sd: float) -> int:
    offs = view.offsets
    known_sets = population.known
    picks = []
    for aid in team.members:
        known = known_sets[aid]
        size = len(known)
        if size == 1:
            picks.append((known[0], known[0]))
        else:
            i = rng.randbelow(size)
            j = rng.randbelow(size - 1)
            if j >= i:
                j += 1
            picks.append((known[i], known[j]))
    candidates = []
    for _ in range(2):
        solution = 0
        for m, pair in enumerate(picks):
            solution |= pair[rng.randbelow(2)] << offs[m]
        candidates.append(solution)
    return _first_unanimous(candidates, team, view, rng, error_sd)


def _first_unanimous(candidates, team, view: UtilityView, rng, error_sd: float) -> int:
    """First candidate every member estimates strictly above its previous
    utility; the standing solution survives when both are vetoed. Later
    candidates are only evaluated (and only consume draws) after a veto."""
    rows = view.util_rows
    baselines = team.member_last_utilities
    n = len(team.members)
    for cand in candidates:
        errs = rng.normals(n)
        accepted = True
        for m in range(n):
            eu = rows[m][cand] * (1.0 + error_sd * errs[m])
            if not eu > baselines[m]:
                accepted = False
        if accepted:
            return cand
    return team.standing


def _private_unanimous(candidates, team, view: UtilityView, rng, judgment_sd: float) -> int:
    """First candidate every member privately judges strictly above the
    standing solution; the standing solution survives when both are
    vetoed. A member sees only its own slot of a candidate, so both sides
    of its comparison are utilities with colleague slots at the standing
    solution, and each side carries an independent 1 + judgment_sd * z
    factor for the unseen colleague parts. Two draws per member per
    evaluated candidate; later candidates only consume draws after a
    veto."""
    rows, masks = view.util_rows, view.masks
    standing = team.standing
    n = len(team.members)
    for cand in candidates:
        errs = rng.normals(2 * n)
        accepted = True
        for m in range(n):
            spliced = (standing & ~masks[m]) | (cand & masks[m])
            eu_cand = rows[m][spliced] * (1.0 + judgment_sd * errs[2 * m])
            eu_base = rows[m][standing] * (1.0 + judgment_sd * errs[2 * m + 1])
            if not eu_cand > eu_base:
                accepted = False
        if accepted:
            return cand
    return team.standing


DECIDERS = {
    "fully_autonomous": decide_fully_autonomous,
    "sequential": decide_sequential,
    "liaison": decide_liaison,
    "lateral": decide_lateral,
}
