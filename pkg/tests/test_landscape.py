"""Interdependence structures and landscape evaluation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teamsim.errors import ConfigError
from teamsim.landscape import (
    STRUCTURES,
    SubtaskValues,
    build_matrix,
    compose,
    contribution,
    count_local_optima,
    evaluate,
    generate_landscape,
    global_optimum,
    matrix_to_text,
    sub_bits,
    subtask_performance,
    validate_matrix,
)


class FixedRng:
    """Serves preset tables so landscape values can be checked by hand."""

    def __init__(self, arrays):
        self.arrays = [np.asarray(a, dtype=float) for a in arrays]

    def random(self, size):
        a = self.arrays.pop(0)
        assert a.size == size
        return a


# --- structure patterns, checked against hand-written matrices (n=6, k=2) ---

HAND_ROWS = {
    "block": ((0, 1, 2), (0, 1, 2), (0, 1, 2), (3, 4, 5), (3, 4, 5), (3, 4, 5)),
    "centralized": ((0, 1, 2), (0, 1, 2), (0, 1, 2), (0, 1, 3), (0, 1, 4), (0, 1, 5)),
    "dependent": ((0, 1, 2, 3, 4, 5), (0, 1, 2, 3, 4, 5), (0, 1, 2), (3,), (4,), (5,)),
    "hierarchical": ((0,), (0, 1), (0, 1, 2), (1, 2, 3), (2, 3, 4), (3, 4, 5)),
    "local": ((0, 4, 5), (0, 1, 5), (0, 1, 2), (1, 2, 3), (2, 3, 4), (3, 4, 5)),
}


@pytest.mark.parametrize("structure", sorted(HAND_ROWS))
def test_patterned_structures_match_hand_matrices(structure):
    assert build_matrix(structure, 6, 2).rows == HAND_ROWS[structure]


def test_dependent_is_transpose_of_centralized():
    for n, k in ((6, 2), (12, 3), (12, 5)):
        cen = build_matrix("centralized", n, k)
        dep = build_matrix("dependent", n, k)
        cell = {(i, j) for i, row in enumerate(cen.rows) for j in row}
        assert {(j, i) for i, j in cell} == {(i, j) for i, row in enumerate(dep.rows) for j in row}


def test_random_structure_row_shape():
    rng = np.random.default_rng(0)
    m = build_matrix("random", 12, 3, rng)
    for i, row in enumerate(m.rows):
        assert len(row) == 4
        assert i in row
        assert len(set(row)) == 4


def test_random_structure_deterministic_per_seed():
    a = build_matrix("random", 12, 5, np.random.default_rng(7))
    b = build_matrix("random", 12, 5, np.random.default_rng(7))
    assert a.rows == b.rows


@pytest.mark.parametrize("structure", STRUCTURES)
@pytest.mark.parametrize("k", [0, 3, 5])
def test_all_structures_validate_at_working_size(structure, k):
    m = build_matrix(structure, 12, k, np.random.default_rng(1))
    validate_matrix(m)
    for i, row in enumerate(m.rows):
        assert i in row


def test_diagonal_only_at_k0():
    for structure in STRUCTURES:
        m = build_matrix(structure, 6, 0, np.random.default_rng(2))
        assert m.rows == tuple((i,) for i in range(6))


def test_build_matrix_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        build_matrix("ring", 6, 2)
    with pytest.raises(ConfigError):
        build_matrix("block", 6, 3)  # k+1 does not divide n
    with pytest.raises(ConfigError):
        build_matrix("local", 6, 6)  # k > n-1
    with pytest.raises(ConfigError):
        build_matrix("local", 6, -1)
    with pytest.raises(ConfigError):
        build_matrix("random", 6, 2)  # no generator


def test_matrix_to_text_grid():
    text = matrix_to_text(build_matrix("hierarchical", 4, 1))
    assert text == "X...\nXX..\n.XX.\n..XX"


# --- landscape values ---


def test_contributions_match_hand_tables():
    # n=2, both contributions depend on both decisions; table index bit b
    # holds the setting of the b-th entry of the row.
    m = build_matrix("block", 2, 1)
    t0 = [0.1, 0.2, 0.3, 0.4]
    t1 = [0.5, 0.6, 0.7, 0.8]
    scape = generate_landscape(m, FixedRng([t0, t1]))
    for d in range(4):
        j = ((d >> 0) & 1) | (((d >> 1) & 1) << 1)
        assert contribution(scape, d, 0) == t0[j]
        assert contribution(scape, d, 1) == t1[j]
        assert evaluate(scape, d) == pytest.approx((t0[j] + t1[j]) / 2)


def test_contrib_cache_matches_direct_reads():
    m = build_matrix("local", 6, 2)
    scape = generate_landscape(m, np.random.default_rng(3))
    for d in range(64):
        for i in range(6):
            assert scape.contrib[d, i] == contribution(scape, d, i)
        assert evaluate(scape, d) == pytest.approx(
            sum(contribution(scape, d, i) for i in range(6)) / 6
        )


def test_generate_landscape_deterministic():
    m = build_matrix("centralized", 8, 3)
    a = generate_landscape(m, np.random.default_rng(17))
    b = generate_landscape(m, np.random.default_rng(17))
    assert np.array_equal(a.perf, b.perf)
    assert a.global_argmax == b.global_argmax


def test_global_optimum_is_exhaustive_argmax():
    m = build_matrix("random", 8, 4, np.random.default_rng(5))
    scape = generate_landscape(m, np.random.default_rng(6))
    best, value = global_optimum(scape)
    assert value == scape.perf.max()
    assert best == int(np.argmax(scape.perf))
    assert 0.0 < value < 1.0


def test_global_optimum_tie_takes_lowest_encoding():
    m = build_matrix("block", 2, 0)
    scape = generate_landscape(m, FixedRng([[0.5, 0.5], [0.7, 0.7]]))
    best, value = global_optimum(scape)
    assert best == 0
    assert value == pytest.approx(0.6)


def test_count_local_optima_hand_case():
    # perf(d) = t[d] for both contributions, so peaks sit exactly where
    # the table has them: encodings 0 and 3.
    m = build_matrix("block", 2, 1)
    t = [0.9, 0.1, 0.2, 0.8]
    scape = generate_landscape(m, FixedRng([t, t]))
    assert count_local_optima(scape) == 2


def test_k0_has_single_peak():
    for seed in range(20):
        m = build_matrix("block", 8, 0)
        scape = generate_landscape(m, np.random.default_rng(seed))
        assert count_local_optima(scape) == 1


def test_full_coupling_is_rugged():
    counts = []
    for seed in range(10):
        m = build_matrix("local", 8, 7)
        scape = generate_landscape(m, np.random.default_rng(seed))
        counts.append(count_local_optima(scape))
    assert all(c >= 1 for c in counts)
    assert np.mean(counts) > 2.0


# --- sub-solution splicing ---


@given(
    st.integers(min_value=0, max_value=(1 << 12) - 1),
    st.integers(min_value=0, max_value=2),
    st.integers(min_value=0, max_value=15),
)
def test_compose_and_sub_bits_roundtrip(d, m, x):
    s_bits = 4
    assert sub_bits(compose(d, x, m, s_bits), m, s_bits) == x
    assert compose(d, sub_bits(d, m, s_bits), m, s_bits) == d
    # splicing one subtask leaves the other subtasks' bits alone
    for other in range(3):
        if other != m:
            assert sub_bits(compose(d, x, m, s_bits), other, s_bits) == sub_bits(d, other, s_bits)


def test_subtask_values_match_scalar_route():
    m = build_matrix("random", 6, 3, np.random.default_rng(8))
    scape = generate_landscape(m, np.random.default_rng(9))
    values = SubtaskValues(scape, 3)
    assert values.s_bits == 2
    assert values.offsets == (0, 2, 4)
    assert values.masks == (0b000011, 0b001100, 0b110000)
    for d in range(64):
        for sub in range(3):
            assert values.sub[sub][d] == pytest.approx(subtask_performance(scape, d, sub, 3))


def test_subtask_means_average_to_task_performance():
    m = build_matrix("hierarchical", 6, 2)
    scape = generate_landscape(m, np.random.default_rng(10))
    values = SubtaskValues(scape, 2)
    stacked = np.stack(values.sub)
    assert np.allclose(stacked.mean(axis=0), scape.perf)


def test_subtask_values_rejects_non_divisible():
    m = build_matrix("block", 6, 2)
    scape = generate_landscape(m, np.random.default_rng(11))
    with pytest.raises(ConfigError):
        SubtaskValues(scape, 4)
