"""Residual standardization and discretization into ordered states."""

import math

import numpy as np
import pytest

from statealign import (
    ContractViolation,
    DegenerateFitWarning,
    HmmParams,
    StateAlphabet,
    StateSequence,
    fit_and_smooth,
)
from statealign.discretize import (
    DEFAULT_CUTS,
    FIVE_STATE_SIGNED,
    THREE_STATE,
    hmm_decode,
    hmm_fit,
    standardize,
    threshold_discretize,
)
from statealign.model import ResidualProcess

from conftest import local_level_series, make_segment
from oracles import brute_best_path_log_prob, state_path_log_prob


def _sticky_magnitudes(seed: int, T: int = 600) -> np.ndarray:
    """Two-regime magnitudes: quiet near 0.5, loud near 5, sticky switching."""
    rng = np.random.default_rng(seed)
    states = [0]
    for _ in range(T - 1):
        s = states[-1]
        states.append(s if rng.random() < 0.95 else 1 - s)
    states = np.asarray(states)
    mag = np.where(
        states == 0, rng.normal(0.5, 0.1, T), rng.normal(5.0, 0.5, T)
    )
    return np.abs(mag), states


def _random_hmm(rng: np.random.Generator, k: int) -> HmmParams:
    means = np.sort(rng.uniform(0.2, 6.0, k))
    means += np.arange(k) * 0.05  # keep them strictly apart
    return HmmParams(
        init_probs=rng.dirichlet(np.ones(k)),
        trans=rng.dirichlet(np.ones(k), size=k),
        emit_means=means,
        emit_vars=rng.uniform(0.05, 2.0, k),
    )


class TestStandardize:
    def test_divides_residuals_by_scale(self):
        res = ResidualProcess("s", np.array([2.0, -4.0]), np.array([2.0, 2.0]))
        np.testing.assert_array_equal(standardize(res), [1.0, -2.0])

    def test_rejects_nonpositive_or_nonfinite_scale(self):
        with pytest.raises(ContractViolation):
            standardize(ResidualProcess("s", np.ones(2), np.array([1.0, 0.0])))
        with pytest.raises(ContractViolation):
            standardize(ResidualProcess("s", np.ones(2), np.array([1.0, math.nan])))

    def test_in_control_series_rarely_crosses_three_sigma(self):
        y = local_level_series(500, q=0.01, r=0.05, seed=2)
        _, _, _, res = fit_and_smooth(make_segment(y, "calm"))
        z = standardize(res)
        assert np.mean(np.abs(z) > 3.0) < 0.01


class TestThresholdDiscretize:
    @pytest.mark.parametrize(
        "z, expected",
        [
            ([0.5, -1.9], [0, 0]),
            ([2.5, -2.5], [1, 1]),
            ([4.0, -7.0], [2, 2]),
            ([2.0, 3.0], [0, 1]),  # exactly on a cut -> lower state
        ],
    )
    def test_default_cut_fixtures(self, z, expected):
        seq = threshold_discretize(np.array(z), series_id="t")
        np.testing.assert_array_equal(seq.states, expected)
        assert seq.alphabet == THREE_STATE
        assert seq.series_id == "t"

    def test_signed_alphabet_mirrors_severity_around_center(self):
        seq = threshold_discretize(
            np.array([2.5, -2.5, 4.0, -4.0, 0.5]), alphabet=FIVE_STATE_SIGNED
        )
        np.testing.assert_array_equal(seq.states, [3, 1, 4, 0, 2])
        assert seq.labels == ("beta+", "beta-", "lambda+", "lambda-", "alpha")

    def test_cut_count_must_match_alphabet(self):
        with pytest.raises(ContractViolation):
            threshold_discretize(np.zeros(3), cuts=(2.0,))
        with pytest.raises(ContractViolation):
            threshold_discretize(np.zeros(3), alphabet=FIVE_STATE_SIGNED, cuts=(2.0,))

    def test_cuts_must_be_ascending_and_positive(self):
        with pytest.raises(ContractViolation):
            threshold_discretize(np.zeros(3), cuts=(3.0, 2.0))
        with pytest.raises(ContractViolation):
            threshold_discretize(np.zeros(3), cuts=(-1.0, 2.0))

    def test_states_identical_across_input_scales(self):
        y = local_level_series(200, q=0.01, r=0.05, seed=1)
        y[120:123] += 10 * math.sqrt(0.05)
        reference = None
        for s in (1e-3, 1.0, 1e5):
            _, _, _, res = fit_and_smooth(make_segment(s * y, "scaled"))
            states = threshold_discretize(standardize(res)).states
            if reference is None:
                reference = states
                assert states.max() >= 1  # the bump must register at all
            else:
                np.testing.assert_array_equal(states, reference)


class TestAlphabet:
    def test_alphabet_validation(self):
        with pytest.raises(ContractViolation):
            StateAlphabet(("only",))
        with pytest.raises(ContractViolation):
            StateAlphabet(("a", "a"))
        with pytest.raises(ContractViolation):
            StateAlphabet(("a", "b"), signed=True)

    def test_extreme_ranks(self):
        assert THREE_STATE.extreme_ranks == (2,)
        assert FIVE_STATE_SIGNED.extreme_ranks == (0, 4)

    def test_sequence_ranks_must_fit_alphabet(self):
        with pytest.raises(ContractViolation):
            StateSequence("s", np.array([0, 3]), THREE_STATE)
        with pytest.raises(ContractViolation):
            StateSequence("s", np.array([-1, 0]), THREE_STATE)


class TestHmmFit:
    def test_recovers_two_regime_emission_means_within_20_percent(self):
        mag, _ = _sticky_magnitudes(seed=0)
        params = hmm_fit([mag], n_states=2)
        assert abs(params.emit_means[0] - 0.5) <= 0.1
        assert abs(params.emit_means[1] - 5.0) <= 1.0

    def test_identical_observations_floor_variance_with_warning(self):
        with pytest.warns(DegenerateFitWarning):
            params = hmm_fit([np.full(40, 1.5)], n_states=3)
        assert np.all(params.emit_vars <= 1e-9)
        assert np.all(params.emit_vars > 0)

    def test_single_state_rejected(self):
        with pytest.raises(ContractViolation):
            hmm_fit([np.ones(100)], n_states=1)

    def test_too_few_observations_rejected(self):
        with pytest.raises(ContractViolation):
            hmm_fit([np.ones(10)], n_states=3)
        with pytest.raises(ContractViolation):
            hmm_fit([np.empty(0)], n_states=3)

    def test_parameter_validation(self):
        with pytest.raises(ContractViolation):
            HmmParams(
                init_probs=np.array([0.7, 0.7]),
                trans=np.full((2, 2), 0.5),
                emit_means=np.array([0.5, 5.0]),
                emit_vars=np.ones(2),
            )
        with pytest.raises(ContractViolation):
            HmmParams(
                init_probs=np.array([0.5, 0.5]),
                trans=np.full((2, 2), 0.5),
                emit_means=np.array([5.0, 0.5]),  # not ascending
                emit_vars=np.ones(2),
            )


class TestHmmDecode:
    def _two_state(self) -> HmmParams:
        return HmmParams(
            init_probs=np.array([0.9, 0.1]),
            trans=np.array([[0.95, 0.05], [0.05, 0.95]]),
            emit_means=np.array([0.5, 5.0]),
            emit_vars=np.array([0.05, 0.5]),
        )

    def test_constant_low_magnitudes_decode_to_lowest_state(self):
        seq = hmm_decode(self._two_state(), np.full(20, 0.4), series_id="low")
        np.testing.assert_array_equal(seq.states, np.zeros(20))
        assert seq.alphabet.size == 2

    def test_replayed_emission_means_decode_to_generating_path(self):
        params = HmmParams(
            init_probs=np.array([0.5, 0.5]),
            trans=np.array([[0.999, 0.001], [0.001, 0.999]]),
            emit_means=np.array([0.5, 3.0]),
            emit_vars=np.array([0.01, 0.01]),
        )
        path = np.array([0, 0, 1, 1, 0])
        seq = hmm_decode(params, params.emit_means[path])
        np.testing.assert_array_equal(seq.states, path)

    def test_single_observation_is_pointwise_map_estimate(self):
        params = self._two_state()
        for value in (0.3, 2.0, 6.0):
            seq = hmm_decode(params, np.array([value]))
            log_dens = (
                -0.5 * (value - params.emit_means) ** 2 / params.emit_vars
                - 0.5 * np.log(2 * math.pi * params.emit_vars)
            )
            expected = int(np.argmax(np.log(params.init_probs) + log_dens))
            assert seq.states[0] == expected

    def test_decoded_path_attains_brute_force_optimum(self, rng):
        for trial in range(20):
            k = int(rng.integers(2, 4))
            params = _random_hmm(rng, k)
            T = int(rng.integers(2, 9))
            z = rng.uniform(0.0, 6.5, T) * rng.choice([-1.0, 1.0], T)
            decoded = hmm_decode(params, z)
            got = state_path_log_prob(params, z, decoded.states)
            best = brute_best_path_log_prob(params, z)
            assert got == pytest.approx(best, abs=1e-9), f"trial {trial}"

    def test_sticky_generator_mostly_recovered(self):
        mag, truth = _sticky_magnitudes(seed=3)
        params = hmm_fit([mag], n_states=2)
        seq = hmm_decode(params, mag)
        assert np.mean(seq.states == truth) > 0.95

    def test_empty_input_decodes_to_empty_sequence(self):
        seq = hmm_decode(self._two_state(), np.empty(0))
        assert len(seq) == 0

    def test_alphabet_size_must_match_model(self):
        with pytest.raises(ContractViolation):
            hmm_decode(self._two_state(), np.ones(4), alphabet=THREE_STATE)

    def test_decoding_ignores_sign(self):
        params = self._two_state()
        z = np.array([0.4, -5.2, 5.0, -0.3])
        a = hmm_decode(params, z)
        b = hmm_decode(params, np.abs(z))
        np.testing.assert_array_equal(a.states, b.states)


def test_default_cuts_are_two_and_three():
    assert DEFAULT_CUTS == (2.0, 3.0)
