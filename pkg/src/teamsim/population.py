"""Agents with bounded capabilities and belief-guided memory.

Each agent is tied to one subtask and maintains a set of known
sub-solutions (its capabilities), plus two families of belief counters
over every sub-solution in the subtask's space: discovery beliefs
(alpha, beta) weight which unknown solutions are attractive to pick up,
forgetting beliefs (lam, delta) weight which known solutions are likely
to be dropped. Counters persist when a solution is forgotten, so a
rediscovered solution keeps its history.

Agent state is stored population-wide: counters as (agents, space)
arrays so end-of-period learning can run vectorized, known sets both as
sorted per-agent lists (what the decision protocols iterate) and as a
boolean mask kept in sync through add_known/remove_known.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .landscape import SubtaskValues, compose


@dataclass
class Population:
    """All agents' state plus the per-subtask rosters they are drawn from."""

    subtasks: list[int]
    subtask_arr: np.ndarray  # (agents,) same assignments, for vectorized maps
    known: list[list[int]]
    known_mask: np.ndarray   # (agents, space) bool, mirrors `known`
    alpha: np.ndarray        # (agents, space) counters, float for weight math
    beta: np.ndarray
    lam: np.ndarray
    delta: np.ndarray
    rosters: list[list[int]]
    s_bits: int
    last_utility: list[float | None] = field(default_factory=list)

    @property
    def n_agents(self) -> int:
        return len(self.subtasks)

    @property
    def space(self) -> int:
        return 1 << self.s_bits

    def add_known(self, aid: int, sub: int) -> None:
        insort(self.known[aid], sub)
        self.known_mask[aid, sub] = True

    def remove_known(self, aid: int, sub: int) -> None:
        self.known[aid].remove(sub)
        self.known_mask[aid, sub] = False

    def discovery_weight(self, aid: int, sub: int) -> float:
        """Probability weight alpha/(alpha+beta) that `sub` is worth discovering."""
        a = self.alpha[aid, sub]
        return float(a / (a + self.beta[aid, sub]))

    def forgetting_weight(self, aid: int, sub: int) -> float:
        """Probability weight lam/(lam+delta) that `sub` is worth forgetting."""
        l = self.lam[aid, sub]
        return float(l / (l + self.delta[aid, sub]))


def build_population(subtasks: list[int], endowments: list[int], s_bits: int, n_subtasks: int | None = None) -> Population:
    """Population from explicit assignments, one known solution per agent,
    every belief counter at one."""
    space = 1 << s_bits
    n = len(subtasks)
    if len(endowments) != n:
        raise ConfigError(f"{n} agents but {len(endowments)} endowments")
    if n_subtasks is None:
        n_subtasks = max(subtasks) + 1 if subtasks else 0
    for e in endowments:
        if not 0 <= e < space:
            raise ConfigError(f"endowment {e} outside sub-solution space [0, {space})")
    known_mask = np.zeros((n, space), dtype=bool)
    known_mask[np.arange(n), endowments] = True
    ones = np.ones((n, space))
    return Population(
        subtasks=list(subtasks),
        subtask_arr=np.asarray(subtasks, dtype=np.int64),
        known=[[int(e)] for e in endowments],
        known_mask=known_mask,
        alpha=ones.copy(),
        beta=ones.copy(),
        lam=ones.copy(),
        delta=ones.copy(),
        rosters=[[i for i, m in enumerate(subtasks) if m == r] for r in range(n_subtasks)],
        s_bits=s_bits,
        last_utility=[None] * n,
    )


def init_population(n_agents: int, n_subtasks: int, s_bits: int, rng: np.random.Generator) -> Population:
    """Assign agents to subtasks uniformly (redrawn until every subtask is
    staffed) and endow each with one uniform starting sub-solution."""
    if n_agents < n_subtasks:
        raise ConfigError(f"need at least one agent per subtask; got {n_agents} agents, {n_subtasks} subtasks")
    while True:
        assignment = rng.integers(0, n_subtasks, size=n_agents)
        if np.unique(assignment).size == n_subtasks:
            break
    endowments = rng.integers(0, 1 << s_bits, size=n_agents)
    return build_population([int(m) for m in assignment], [int(e) for e in endowments], s_bits, n_subtasks)


def utility(values: SubtaskValues, solution: int, subtask: int) -> float:
    """Member utility: own subtask performance averaged with the mean
    performance of the other subtasks. With a single subtask this is just
    task performance."""
    sub = values.sub
    m = len(sub)
    if m == 1:
        return float(sub[0][solution])
    own = float(sub[subtask][solution])
    rest = sum(float(sub[r][solution]) for r in range(m) if r != subtask)
    return 0.5 * (own + rest / (m - 1))


def estimated_utility(values, own: int, residual: int, subtask: int, rng, error_sd: float) -> float:
    """Utility of `own` spliced into the previous period's solution, scaled
    by a fresh multiplicative estimation error 1 + e, e ~ N(0, error_sd).

    A draw is consumed even when error_sd is zero, so stream consumption
    does not depend on the error setting.
    """
    full = compose(residual, own, subtask, values.s_bits)
    e = error_sd * rng.normal()
    return utility(values, full, subtask) * (1.0 + e)


class UtilityView:
    """Member utilities for every encoded solution, one row per subtask.

    util[m] mirrors utility(values, ., m) vectorized; util_rows holds the
    same values as plain lists for cheap scalar lookup in inner loops
    (materialized on first access, since the compiled path never needs
    them), and util_stack as a (n_subtasks, 2**n) array for fancy
    indexing.
    """

    __slots__ = ("values", "s_bits", "offsets", "masks", "n_subtasks", "util", "_rows", "util_stack")

    def __init__(self, values: SubtaskValues):
        sub = values.sub
        m = len(sub)
        if m == 1:
            util = [sub[0].astype(float, copy=True)]
        else:
            total = np.add.reduce(sub)
            util = [0.5 * (s + (total - s) / (m - 1)) for s in sub]
        self.values = values
        self.s_bits = values.s_bits
        self.offsets = values.offsets
        self.masks = values.masks
        self.n_subtasks = m
        self.util = util
        self._rows = None
        self.util_stack = np.stack(util)

    @property
    def util_rows(self) -> list[list[float]]:
        if self._rows is None:
            self._rows = [u.tolist() for u in self.util]
        return self._rows
