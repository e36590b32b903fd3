"""NK performance landscapes over binary decision vectors.

A task is a vector of N binary decisions. Decision n owns one performance
contribution c_n, which depends on d_n and on the other decisions named by
row n of an interdependence matrix; contribution values are i.i.d. uniform
on [0, 1) per realized joint setting, and task performance is the mean of
the N contributions. K counts the off-diagonal dependencies per row.

Solutions are encoded as integers in [0, 2**N): bit n holds decision n.
All indices are 0-based. Landscapes are enumerated exhaustively at
generation time (N is small by design), which makes the global optimum and
every later evaluation a table lookup.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

STRUCTURES = ("block", "centralized", "dependent", "hierarchical", "local", "random")


@dataclass(frozen=True)
class InterdependenceMatrix:
    """Dependency pattern: rows[i] lists the decisions feeding contribution i.

    Rows are sorted tuples of decision indices; i itself is always present
    (a contribution always depends on its own decision). For the patterned
    structures every row has exactly k off-diagonal entries, except
    "hierarchical" (row i depends on at most k immediate predecessors, so
    early rows are shorter) and "dependent" (the transpose of "centralized",
    which concentrates dependencies on the first rows instead).
    """

    n: int
    k: int
    structure: str
    rows: tuple[tuple[int, ...], ...]


def build_matrix(structure: str, n: int, k: int, rng: np.random.Generator | None = None) -> InterdependenceMatrix:
    """Construct one of the six interdependence structures.

    rng is consulted only for "random"; the other five are deterministic
    patterns. Raises ConfigError when (structure, n, k) is infeasible.
    """
    if structure not in STRUCTURES:
        raise ConfigError(f"unknown structure {structure!r}; expected one of {', '.join(STRUCTURES)}")
    if n < 1:
        raise ConfigError(f"n must be positive, got {n}")
    if not 0 <= k <= n - 1:
        raise ConfigError(f"k must lie in [0, n-1]; got k={k} with n={n}")

    if structure == "block":
        if n % (k + 1):
            raise ConfigError(f"block structure needs k+1 to divide n; got n={n}, k={k}")
        rows = []
        for i in range(n):
            lo = (i // (k + 1)) * (k + 1)
            rows.append(tuple(range(lo, lo + k + 1)))
    elif structure == "centralized":
        # The first k+1 decisions form a fully coupled core; everyone else
        # depends on the first k decisions plus itself.
        core = tuple(range(k + 1))
        rows = [core if i <= k else tuple(sorted({i, *range(k)})) for i in range(n)]
    elif structure == "dependent":
        central = build_matrix("centralized", n, k)
        rows = _transpose_rows(central.rows, n)
    elif structure == "hierarchical":
        rows = [tuple(range(max(0, i - k), i + 1)) for i in range(n)]
    elif structure == "local":
        rows = [tuple(sorted((i - j) % n for j in range(k + 1))) for i in range(n)]
    else:  # random
        if rng is None:
            raise ConfigError("random structure requires a generator")
        rows = []
        for i in range(n):
            others = [j for j in range(n) if j != i]
            extra = rng.choice(others, size=k, replace=False) if k else ()
            rows.append(tuple(sorted((i, *map(int, extra)))))

    matrix = InterdependenceMatrix(n=n, k=k, structure=structure, rows=tuple(rows))
    validate_matrix(matrix)
    return matrix


def _transpose_rows(rows: tuple[tuple[int, ...], ...], n: int) -> list[tuple[int, ...]]:
    sets = [set(r) for r in rows]
    return [tuple(sorted(j for j in range(n) if i in sets[j])) for i in range(n)]


def validate_matrix(matrix: InterdependenceMatrix) -> None:
    """Check the structural invariants every matrix must satisfy."""
    n = matrix.n
    if len(matrix.rows) != n:
        raise ConfigError(f"matrix has {len(matrix.rows)} rows, expected {n}")
    for i, row in enumerate(matrix.rows):
        if i not in row:
            raise ConfigError(f"row {i} is missing its own decision")
        if len(set(row)) != len(row):
            raise ConfigError(f"row {i} has duplicate entries")
        if any(not 0 <= j < n for j in row):
            raise ConfigError(f"row {i} references a decision outside [0, {n})")
        if tuple(sorted(row)) != tuple(row):
            raise ConfigError(f"row {i} is not sorted")


def matrix_to_text(matrix: InterdependenceMatrix) -> str:
    """Render as an X/. grid, one line per contribution, one column per decision."""
    lines = []
    for row in matrix.rows:
        present = set(row)
        lines.append("".join("X" if j in present else "." for j in range(matrix.n)))
    return "\n".join(lines)


@functools.lru_cache(maxsize=4)
def _bit_columns(n: int) -> tuple[np.ndarray, ...]:
    sols = np.arange(1 << n, dtype=np.int64)
    return tuple((sols >> j) & 1 for j in range(n))


@functools.lru_cache(maxsize=1024)
def _joint_indices(row: tuple[int, ...], n: int) -> np.ndarray:
    """Joint-setting index of the decisions in `row` for every encoded solution."""
    cols = _bit_columns(n)
    idx = np.zeros(1 << n, dtype=np.int64)
    for b, j in enumerate(row):
        idx += cols[j] << b
    return idx


class Landscape:
    """Realized contribution tables plus exhaustive evaluation caches.

    tables[i] holds contribution i's value for each joint setting of its
    row (bit b of the table index is the setting of rows[i][b]). contrib
    caches the gathered per-contribution columns for all 2**n solutions,
    perf their row means, and global_argmax/global_max the exhaustive
    optimum (ties resolved toward the lowest encoding).
    """

    __slots__ = ("matrix", "tables", "contrib", "perf", "global_argmax", "global_max")

    def __init__(self, matrix, tables, contrib, perf, global_argmax, global_max):
        self.matrix = matrix
        self.tables = tables
        self.contrib = contrib
        self.perf = perf
        self.global_argmax = global_argmax
        self.global_max = global_max


def generate_landscape(matrix: InterdependenceMatrix, rng: np.random.Generator) -> Landscape:
    """Draw fresh contribution tables and enumerate the full landscape."""
    n = matrix.n
    tables = [rng.random(1 << len(row)) for row in matrix.rows]
    contrib = np.empty((1 << n, n))
    for i, row in enumerate(matrix.rows):
        contrib[:, i] = tables[i][_joint_indices(row, n)]
    perf = contrib.mean(axis=1)
    argmax = int(np.argmax(perf))
    return Landscape(matrix, tables, contrib, perf, argmax, float(perf[argmax]))


def contribution(scape: Landscape, solution: int, index: int) -> float:
    """Contribution `index` at `solution`, read directly from its table."""
    row = scape.matrix.rows[index]
    j = 0
    for b, d in enumerate(row):
        j |= ((solution >> d) & 1) << b
    return float(scape.tables[index][j])


def evaluate(scape: Landscape, solution: int) -> float:
    """Task performance: the mean of all contributions at `solution`."""
    return float(scape.perf[solution])


def subtask_performance(scape: Landscape, solution: int, subtask: int, n_subtasks: int) -> float:
    """Mean of the contributions owned by one subtask, from the raw tables."""
    s = _subtask_width(scape.matrix.n, n_subtasks)
    lo = subtask * s
    return sum(contribution(scape, solution, i) for i in range(lo, lo + s)) / s


def global_optimum(scape: Landscape) -> tuple[int, float]:
    """The exhaustively determined best solution and its performance."""
    return scape.global_argmax, scape.global_max


def count_local_optima(scape: Landscape) -> int:
    """Solutions no single-bit flip strictly improves."""
    perf = scape.perf
    sols = np.arange(perf.size)
    is_peak = np.ones(perf.size, dtype=bool)
    for j in range(scape.matrix.n):
        is_peak &= perf >= perf[sols ^ (1 << j)]
    return int(is_peak.sum())


def _subtask_width(n: int, n_subtasks: int) -> int:
    if n_subtasks < 1 or n % n_subtasks:
        raise ConfigError(f"number of subtasks must divide n; got n={n}, subtasks={n_subtasks}")
    return n // n_subtasks


def sub_bits(solution: int, subtask: int, s_bits: int) -> int:
    """Extract subtask `subtask`'s sub-solution from a full encoding."""
    return (solution >> (subtask * s_bits)) & ((1 << s_bits) - 1)


def compose(solution: int, sub: int, subtask: int, s_bits: int) -> int:
    """Splice sub-solution `sub` into `solution` at subtask `subtask`."""
    shift = subtask * s_bits
    return (solution & ~(((1 << s_bits) - 1) << shift)) | (sub << shift)


class SubtaskValues:
    """Per-subtask mean contributions for every encoded solution.

    sub[m][d] is the mean contribution of subtask m's decisions at full
    solution d: the own-performance term of a member's utility. masks and
    offsets support splicing sub-solutions into full encodings.
    """

    __slots__ = ("n", "n_subtasks", "s_bits", "offsets", "masks", "sub")

    def __init__(self, scape: Landscape, n_subtasks: int):
        n = scape.matrix.n
        s = _subtask_width(n, n_subtasks)
        self.n = n
        self.n_subtasks = n_subtasks
        self.s_bits = s
        self.offsets = tuple(m * s for m in range(n_subtasks))
        self.masks = tuple(((1 << s) - 1) << off for off in self.offsets)
        self.sub = [scape.contrib[:, m * s : (m + 1) * s].mean(axis=1) for m in range(n_subtasks)]
