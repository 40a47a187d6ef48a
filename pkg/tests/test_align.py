"""State-sequence alignment, shifts, and the directional causality index."""

import numpy as np
import pytest

from statealign import (
    AlphabetMismatch,
    ContractViolation,
    EmptySequence,
    ShiftTooLarge,
    StateAlphabet,
    StateSequence,
    causality_index,
    dtw,
    pairwise_alignment,
    shifted_dtw,
    state_distance,
)
from statealign.align import (
    WORKERS_ENV_VAR,
    WarpPath,
    default_tau_max,
    resolve_workers,
)

from oracles import brute_dtw_cost

WIDE = StateAlphabet(("s0", "s1", "s2", "s3", "s4", "s5"))


def seq(states, series_id="s", alphabet=None):
    return StateSequence(series_id, np.asarray(states), alphabet or WIDE)


def three(states, series_id="s"):
    return StateSequence(series_id, np.asarray(states))


class TestStateDistance:
    def test_ordinal_absolute_difference(self):
        assert state_distance(0, 0) == 0.0
        assert state_distance(0, 2) == 2.0
        assert state_distance(2, 0) == 2.0

    def test_symmetric_over_all_rank_pairs(self):
        for i in range(5):
            for j in range(5):
                assert state_distance(i, j) == state_distance(j, i) == abs(i - j)


class TestDtw:
    def test_identical_sequences_cost_zero_diagonal_path(self):
        a = three([0, 1, 2, 1, 0])
        res = dtw(a, a)
        assert res.cost == 0.0
        assert tuple(res.path) == tuple((t, t) for t in range(5))

    def test_one_step_lag_absorbed_by_warping(self):
        res = dtw(three([0, 0, 2, 0]), three([0, 2, 0, 0]))
        assert res.cost == 0.0

    def test_single_point_sequences(self):
        res = dtw(three([0]), three([2]))
        assert res.cost == 2.0
        assert tuple(res.path) == ((0, 0),)

    def test_path_is_monotone_anchored_and_bounded(self, rng):
        for _ in range(25):
            m, n = rng.integers(1, 12, 2)
            a = three(rng.integers(0, 3, m), "a")
            b = three(rng.integers(0, 3, n), "b")
            path = list(dtw(a, b).path)
            assert path[0] == (0, 0)
            assert path[-1] == (m - 1, n - 1)
            assert max(m, n) <= len(path) <= m + n - 1
            for (i0, j0), (i1, j1) in zip(path, path[1:]):
                assert (i1 - i0, j1 - j0) in {(1, 0), (0, 1), (1, 1)}

    def test_cost_equals_sum_of_distances_along_path(self, rng):
        for _ in range(25):
            a = three(rng.integers(0, 3, int(rng.integers(2, 10))), "a")
            b = three(rng.integers(0, 3, int(rng.integers(2, 10))), "b")
            res = dtw(a, b)
            along = sum(
                state_distance(a.states[i], b.states[j]) for i, j in res.path
            )
            assert res.cost == pytest.approx(along, abs=1e-9)

    def test_matches_exhaustive_path_enumeration(self, rng):
        for _ in range(60):
            a = rng.integers(0, 3, int(rng.integers(1, 7)))
            b = rng.integers(0, 3, int(rng.integers(1, 7)))
            got = dtw(three(a, "a"), three(b, "b")).cost
            assert got == pytest.approx(brute_dtw_cost(a, b), abs=1e-12)

    def test_normalized_cost_divides_by_path_length(self):
        a = three([0, 2, 0, 2])
        b = three([2, 0, 2, 0])
        plain = dtw(a, b)
        normed = dtw(a, b, normalize=True)
        assert normed.cost == pytest.approx(plain.cost / len(plain.path))

    def test_empty_sequence_rejected(self):
        empty = StateSequence("e", np.empty(0, dtype=np.int64))
        with pytest.raises(EmptySequence):
            dtw(empty, three([0, 1]))

    def test_alphabet_mismatch_rejected(self):
        with pytest.raises(AlphabetMismatch):
            dtw(three([0, 1]), seq([0, 1]))

    def test_warp_path_must_be_nonempty(self):
        with pytest.raises(ContractViolation):
            WarpPath(())


class TestShiftedDtw:
    def test_spike_lag_three_vanishes_at_shift_three(self):
        a_states = np.zeros(20, dtype=np.int64)
        a_states[10] = 2
        b_states = np.zeros(20, dtype=np.int64)
        b_states[13] = 2
        a, b = three(a_states, "a"), three(b_states, "b")
        assert shifted_dtw(a, b, 3) == 0.0

    def test_zero_shift_equals_plain_alignment(self, rng):
        for _ in range(10):
            a = three(rng.integers(0, 3, 15), "a")
            b = three(rng.integers(0, 3, 15), "b")
            assert shifted_dtw(a, b, 0) == dtw(a, b).cost

    def test_matches_enumeration_oracle_on_truncated_sequences(self, rng):
        for _ in range(10):
            a = rng.integers(0, 3, 6)
            b = rng.integers(0, 3, 6)
            sa, sb = three(a, "a"), three(b, "b")
            for tau in range(-4, 5):
                got = shifted_dtw(sa, sb, tau)
                if tau >= 0:
                    want = brute_dtw_cost(a[: 6 - tau], b[tau:])
                else:
                    want = brute_dtw_cost(a[-tau:], b[: 6 + tau])
                assert got == pytest.approx(want, abs=1e-12)

    def test_shift_as_large_as_length_rejected(self):
        a = three([0, 1, 2], "a")
        b = three([0, 1, 2], "b")
        with pytest.raises(ShiftTooLarge):
            shifted_dtw(a, b, 3)
        with pytest.raises(ShiftTooLarge):
            shifted_dtw(a, b, -3)

    def test_shift_beyond_budget_rejected(self):
        a = three(np.zeros(20, dtype=np.int64), "a")
        b = three(np.zeros(20, dtype=np.int64), "b")
        with pytest.raises(ShiftTooLarge):
            shifted_dtw(a, b, 4, tau_max=3)


class TestCausalityIndex:
    def test_identical_sequences_score_one_at_zero_shift(self):
        a = three([0, 1, 2, 1, 0, 0, 0, 0], "a")
        res = causality_index(a, a)
        assert res.dci == 1.0
        assert res.best_tau == 0
        assert res.d_opt_zero == 0.0
        assert res.d_opt_best == 0.0

    def test_pure_lag_scores_zero_with_positive_best_tau(self):
        # The pattern starts at t=0 in a and two steps later in b; the
        # clipped head keeps plain warping from absorbing the lag.
        a = three([2, 2, 1, 0, 0, 0, 0, 0, 0, 0], "a")
        b = three([0, 0, 2, 2, 1, 0, 0, 0, 0, 0], "b")
        res = causality_index(a, b)
        assert res.dci == 0.0
        assert res.best_tau == 2
        assert res.d_opt_zero > 0.0
        assert res.d_opt_best == 0.0

    def test_reversed_direction_gives_negative_best_tau(self):
        a = three([2, 2, 1, 0, 0, 0, 0, 0, 0, 0], "a")
        b = three([0, 0, 2, 2, 1, 0, 0, 0, 0, 0], "b")
        res = causality_index(b, a)
        assert res.dci == 0.0
        assert res.best_tau == -2

    def test_profile_covers_full_shift_range_and_attains_best(self, rng):
        for _ in range(10):
            a = three(rng.integers(0, 3, 16), "a")
            b = three(rng.integers(0, 3, 16), "b")
            res = causality_index(a, b)
            assert set(res.tau_profile) == set(range(-4, 5))
            assert res.d_opt_best == min(res.tau_profile.values())
            assert res.tau_profile[0] == res.d_opt_zero
            assert 0.0 <= res.dci <= 1.0
            assert res.d_opt_best <= res.d_opt_zero

    def test_default_budget_is_quarter_length(self):
        assert default_tau_max(16) == 4
        assert default_tau_max(3) == 1
        a = three(np.zeros(16, dtype=np.int64), "a")
        b = three(np.ones(16, dtype=np.int64), "b")
        assert set(causality_index(a, b).tau_profile) == set(range(-4, 5))

    def test_budget_validation(self):
        a = three(np.zeros(12, dtype=np.int64), "a")
        b = three(np.ones(12, dtype=np.int64), "b")
        with pytest.raises(ShiftTooLarge):
            causality_index(a, b, tau_max=0)
        with pytest.raises(ShiftTooLarge):
            causality_index(a, b, tau_max=5)  # over len//3 = 4
        assert causality_index(a, b, tau_max=4).dci is not None

    def test_normalized_variant_uses_per_step_costs(self):
        a = three([0, 2, 0, 2, 0, 2, 0, 2], "a")
        b = three([2, 0, 2, 0, 2, 0, 2, 0], "b")
        plain = causality_index(a, b)
        normed = causality_index(a, b, normalize=True)
        assert normed.d_opt_zero == pytest.approx(
            plain.d_opt_zero / len(dtw(a, b).path)
        )


class TestPairwise:
    def test_identical_collection_gives_zero_costs_unit_dci(self):
        seqs = [three([0, 1, 2, 1, 0, 0, 0, 0], f"s{i}") for i in range(3)]
        mats = pairwise_alignment(seqs)
        assert np.all(mats.d_opt_zero == 0.0)
        assert np.all(mats.dci == 1.0)
        assert np.all(mats.best_tau == 0)

    def test_lagged_copy_detected_noise_scored_near_one(self):
        rng = np.random.default_rng(0)
        lead = np.zeros(24, dtype=np.int64)
        lead[[0, 1, 5, 6]] = 2
        lag = np.roll(lead, 2)
        noise = rng.integers(0, 3, 24)
        mats = pairwise_alignment(
            [three(lead, "lead"), three(lag, "lag"), three(noise, "noise")]
        )
        i, j, k = (mats.index_of(s) for s in ("lead", "lag", "noise"))
        assert mats.dci[i, j] < 0.2
        assert mats.best_tau[i, j] == 2
        assert mats.dci[i, k] > 0.5

    def test_best_tau_antisymmetric_costs_symmetric(self, rng):
        seqs = [three(rng.integers(0, 3, 20), f"s{i}") for i in range(5)]
        mats = pairwise_alignment(seqs)
        np.testing.assert_array_equal(mats.best_tau, -mats.best_tau.T)
        np.testing.assert_array_equal(mats.d_opt_zero, mats.d_opt_zero.T)
        np.testing.assert_array_equal(mats.d_opt_best, mats.d_opt_best.T)
        np.testing.assert_array_equal(mats.dci, mats.dci.T)
        assert np.all(np.diag(mats.d_opt_zero) == 0.0)
        assert np.all(np.diag(mats.dci) == 1.0)

    def test_costs_invariant_under_common_rank_offset(self, rng):
        base_a = rng.integers(0, 3, 15)
        base_b = rng.integers(0, 3, 15)
        plain = dtw(seq(base_a, "a"), seq(base_b, "b"))
        lifted = dtw(seq(base_a + 2, "a"), seq(base_b + 2, "b"))
        assert plain.cost == lifted.cost
        assert tuple(plain.path) == tuple(lifted.path)

    def test_worker_count_does_not_change_results(self, rng):
        seqs = [three(rng.integers(0, 3, 18), f"s{i}") for i in range(6)]
        one = pairwise_alignment(seqs, workers=1)
        many = pairwise_alignment(seqs, workers=4)
        np.testing.assert_array_equal(one.d_opt_zero, many.d_opt_zero)
        np.testing.assert_array_equal(one.d_opt_best, many.d_opt_best)
        np.testing.assert_array_equal(one.dci, many.dci)
        np.testing.assert_array_equal(one.best_tau, many.best_tau)

    def test_index_lookup(self):
        seqs = [three([0, 1, 0, 0], f"s{i}") for i in range(3)]
        mats = pairwise_alignment(seqs)
        assert mats.index_of("s1") == 1
        with pytest.raises(KeyError):
            mats.index_of("missing")

    def test_input_validation(self):
        with pytest.raises(EmptySequence):
            pairwise_alignment([])
        dup = [three([0, 1], "same"), three([1, 0], "same")]
        with pytest.raises(ContractViolation):
            pairwise_alignment(dup)
        mixed = [three([0, 1], "a"), seq([0, 1], "b")]
        with pytest.raises(AlphabetMismatch):
            pairwise_alignment(mixed)


class TestWorkerResolution:
    def test_explicit_argument_wins(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV_VAR, "7")
        assert resolve_workers(2) == 2

    def test_environment_variable_used_when_unset(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV_VAR, "3")
        assert resolve_workers() == 3

    def test_bad_environment_value_rejected(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV_VAR, "many")
        with pytest.raises(ContractViolation):
            resolve_workers()

    def test_nonpositive_count_rejected(self):
        with pytest.raises(ContractViolation):
            resolve_workers(0)
