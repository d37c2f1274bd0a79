"""Pattern matcher circuit, its feature map and kernel, KMP baseline, step counts."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from groversvm import sim
from groversvm.errors import StructuralError
from groversvm.grover import GroverConfig, interval_state_analytic, theoretical_success_probability
from groversvm.pattern import (
    TextInstance,
    amplification_rounds_for,
    cyclic_match_locations,
    cyclic_shift_circuit,
    encode,
    kmp_search,
    match_circuit,
    pattern_feature_map,
    pattern_kernel,
    pattern_label,
    pattern_match,
    pattern_symbolic_steps,
    random_instance,
)
from groversvm.sim import StateVector


def zero_text_with(pattern: str, location: int, length: int) -> str:
    """All-zero text with the pattern spliced in cyclically; unique for 1-bearing patterns."""
    bits = [0] * length
    for offset, ch in enumerate(pattern):
        bits[(location + offset) % length] = int(ch)
    return "".join(str(b) for b in bits)


class TestTextInstance:
    def test_location_derived(self):
        assert TextInstance("10110010", "110").location == 2

    def test_wrapping_occurrence(self):
        # Pattern 111 written at 15 wraps to positions 15, 0, 1.
        instance = TextInstance(zero_text_with("111", 15, 16), "111")
        assert instance.location == 15

    def test_multiple_occurrences_rejected(self):
        with pytest.raises(StructuralError):
            TextInstance("10100000", "10")

    def test_absent_pattern_rejected(self):
        with pytest.raises(StructuralError):
            TextInstance("00000000", "11")

    def test_full_length_pattern(self):
        instance = TextInstance("10110010", "10110010")
        assert instance.location == 0
        assert instance.pattern_length == instance.text_length

    def test_non_power_of_two_rejected(self):
        with pytest.raises(StructuralError):
            TextInstance("101100", "11")

    def test_random_instance_unique(self):
        for seed in range(5):
            instance = random_instance(16, "101", 7, seed)
            assert instance.location == 7
            assert len(cyclic_match_locations(instance.text, instance.pattern)) == 1


class TestEncode:
    def test_all_zero_strings(self):
        instance = TextInstance(zero_text_with("1", 0, 4), "1")
        state = encode(instance)
        # Text bit 0 lives on qubit n + 0 = 2, the pattern bit on qubit n + N = 6.
        expected = (1 << 2) | (1 << 6)
        assert abs(state.amplitudes[expected] - 1.0) < 1e-12

    def test_bit_layout(self):
        instance = TextInstance("10110010", "110")
        state = encode(instance)
        index = int(np.argmax(np.abs(state.amplitudes)))
        n, N = 3, 8
        assert index & 0b111 == 0  # index register zero
        text_bits = [(index >> (n + i)) & 1 for i in range(N)]
        assert "".join(map(str, text_bits)) == "10110010"
        pattern_bits = [(index >> (n + N + j)) & 1 for j in range(3)]
        assert "".join(map(str, pattern_bits)) == "110"

    def test_measurement_roundtrip(self):
        instance = TextInstance("10110010", "110")
        state = encode(instance)
        hist = sim.sample_measurement(state, range(instance.total_qubits), 50, 0)
        assert len(hist) == 1 and sum(hist.values()) == 50


class TestCyclicShift:
    def test_zero_shift_is_identity(self):
        circuit = cyclic_shift_circuit(4)
        state = StateVector.basis(6, 0b1010 << 2)  # index 0, some text bits
        out = sim.run(circuit, state)
        npt.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-12)

    def test_exhaustive_truth_table_n4(self):
        # Independent oracle: recompute the shifted text classically for every
        # (shift, text) pair and compare basis states.
        circuit = cyclic_shift_circuit(4)
        for k in range(4):
            for text_val in range(16):
                bits = [(text_val >> i) & 1 for i in range(4)]
                shifted = [bits[(i + k) % 4] for i in range(4)]
                in_index = k | (text_val << 2)
                out_index = k | (sum(b << i for i, b in enumerate(shifted)) << 2)
                out = sim.run(circuit, StateVector.basis(6, in_index))
                assert abs(out.amplitudes[out_index] - 1.0) < 1e-12, (k, text_val)

    def test_known_example(self):
        # Shift 1 of T = 1000 gives 0001: each bit picks up its right neighbor.
        circuit = cyclic_shift_circuit(4)
        out = sim.run(circuit, StateVector.basis(6, 0b01 | (0b0001 << 2)))
        expected = 0b01 | (0b1000 << 2)
        assert abs(out.amplitudes[expected] - 1.0) < 1e-12

    def test_shift_then_inverse_restores(self):
        circuit = cyclic_shift_circuit(8)
        rng = np.random.default_rng(3)
        amps = rng.normal(size=1 << 11) + 1j * rng.normal(size=1 << 11)
        state = StateVector(11, amps / np.linalg.norm(amps))
        out = sim.run(circuit.inverse(), sim.run(circuit, state))
        npt.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-10)


class TestMatcherStates:
    def test_psi4_zeroes_pattern_register_only_at_match(self):
        # Enumerate the pre-amplification state: the matching shift is the only
        # branch whose pattern register is all zero.
        instance = TextInstance("10110010", "110")
        circuit = match_circuit(instance, rounds=0)
        state = sim.run_from_zero(circuit)
        n, N, L = 3, 8, 3
        nonzero = np.flatnonzero(np.abs(state.amplitudes) > 1e-12)
        by_shift = {}
        for idx in nonzero:
            shift = idx & 0b111
            pattern_bits = (idx >> (n + N)) & ((1 << L) - 1)
            by_shift.setdefault(shift, set()).add(pattern_bits)
        assert set(by_shift) == set(range(8))
        for shift, patterns in by_shift.items():
            assert len(patterns) == 1
            if shift == instance.location:
                assert patterns == {0}
            else:
                assert patterns != {0}


class TestPatternMatch:
    def test_faithful_success_probability(self):
        instance = TextInstance("10110010", "110")
        found, prob, ledger = pattern_match(instance, GroverConfig("faithful"), rng_seed=3)
        assert abs(prob - 121.0 / 128.0) < 1e-9
        assert ledger.amplification_rounds == 2
        assert 1.0 - prob <= 5.0 / 8.0

    def test_faithful_measurement_statistics(self):
        instance = TextInstance("10110010", "110")
        hits = 0
        runs = 200
        for seed in range(runs):
            found, prob, _ = pattern_match(instance, GroverConfig("faithful"), seed)
            hits += found == 2
        p = 121.0 / 128.0
        assert abs(hits / runs - p) <= 4 * math.sqrt(p * (1 - p) / runs)

    def test_ideal_is_deterministic(self):
        instance = TextInstance("10110010", "110")
        found, prob, _ = pattern_match(instance, GroverConfig("ideal"), rng_seed=0)
        assert found == 2
        assert abs(prob - theoretical_success_probability(8, iterations=2)) < 1e-12

    def test_pattern_equal_to_text(self):
        instance = TextInstance("10110010", "10110010")
        found, _, _ = pattern_match(instance, GroverConfig("ideal"), 0)
        assert found == 0


class TestPatternFeatureMap:
    def test_ideal_circuit_matches_analytic(self):
        instance = TextInstance("10110010", "110")
        circuit_out = pattern_feature_map(instance, 2, GroverConfig("ideal"), mode="circuit")
        analytic_out = pattern_feature_map(instance, 2, GroverConfig("ideal"), mode="analytic")
        npt.assert_allclose(
            circuit_out.register_state.amplitudes,
            analytic_out.register_state.amplitudes,
            atol=1e-10,
        )
        assert circuit_out.ancilla_zero_fidelity >= 1 - 1e-9

    def test_register_is_interval_at_match(self):
        instance = TextInstance("10110010", "110")
        out = pattern_feature_map(instance, 2, GroverConfig("ideal"))
        target = interval_state_analytic(2, 2, 8)
        npt.assert_allclose(out.register_state.amplitudes, target.amplitudes, atol=1e-10)

    def test_unit_width_gives_basis_state(self):
        instance = TextInstance("10110010", "110")
        out = pattern_feature_map(instance, 1, GroverConfig("ideal"))
        assert abs(out.register_state.amplitudes[2] - 1.0) < 1e-10

    def test_faithful_uncompute_within_bound(self):
        instance = TextInstance("10110010", "110")
        out = pattern_feature_map(instance, 2, GroverConfig("faithful"))
        assert out.ancilla_zero_fidelity >= 1 - 5.0 / 8.0


class TestPatternKernel:
    def test_identical_texts(self):
        a = TextInstance("10110010", "110")
        assert pattern_kernel(a, a, 2, "exact") == 1.0

    def test_locations_two_apart(self):
        # Match locations 2 and 4 with M = 4 on length-16 texts.
        a = TextInstance(zero_text_with("111", 2, 16), "111")
        b = TextInstance(zero_text_with("111", 4, 16), "111")
        assert pattern_kernel(a, b, 4, "exact") == pytest.approx(0.5, abs=1e-15)

    def test_wraparound_distance(self):
        a = TextInstance(zero_text_with("111", 0, 16), "111")
        b = TextInstance(zero_text_with("111", 15, 16), "111")
        assert pattern_kernel(a, b, 4, "exact") == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("pattern", ["11", "110"])
    def test_circuit_modes_agree_with_analytic(self, pattern):
        a = TextInstance(zero_text_with(pattern, 1, 8), pattern)
        b = TextInstance(zero_text_with(pattern, 2, 8), pattern)
        exact = pattern_kernel(a, b, 2, "exact")
        ideal = pattern_kernel(a, b, 2, "circuit_ideal")
        assert abs(ideal - exact) < 1e-10
        faithful = pattern_kernel(a, b, 2, "circuit_faithful")
        assert abs(faithful - exact) <= 5.0 / 8.0

    def test_mismatched_patterns_rejected(self):
        a = TextInstance("10110010", "110")
        b = TextInstance(zero_text_with("111", 2, 8), "111")
        with pytest.raises(StructuralError):
            pattern_kernel(a, b, 2, "exact")


class TestKmp:
    def test_pattern_equals_text(self):
        loc, _ = kmp_search("10110010", "10110010")
        assert loc == 0

    def test_known_example(self):
        loc, ledger = kmp_search("10110010", "110")
        assert loc == 2
        assert ledger.classical_char_comparisons > 0

    def test_wrapping_match(self):
        loc, _ = kmp_search(zero_text_with("111", 15, 16), "111")
        assert loc == 15

    def test_absent_pattern(self):
        loc, ledger = kmp_search("00000000", "11")
        assert loc is None
        assert ledger.classical_char_comparisons <= 2 * (16 + 2)

    def test_comparison_bound_on_random_inputs(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            N = int(rng.choice([8, 16, 32]))
            L = int(rng.integers(1, min(N, 8)))
            text = "".join(str(b) for b in rng.integers(0, 2, size=N))
            pattern = "".join(str(b) for b in rng.integers(0, 2, size=L))
            loc, ledger = kmp_search(text, pattern)
            assert ledger.classical_char_comparisons <= 2 * (2 * N + L)
            expected = cyclic_match_locations(text, pattern)
            assert loc == (min(expected) if expected else None)

    def test_agrees_with_instance_location(self):
        for seed in range(5):
            instance = random_instance(32, "1011", int(seed * 5), seed)
            loc, _ = kmp_search(instance.text, instance.pattern)
            assert loc == instance.location


class TestLedgers:
    @pytest.mark.parametrize("N", [8, 16, 64, 256, 1024])
    def test_amplification_rounds_formula(self, N):
        assert amplification_rounds_for(N) == int(math.pi / 4 * math.sqrt(N))

    def test_symbolic_steps_scaling(self):
        # Regression: steps / (sqrt(N) (log N)^2) stays bounded through N = 2^14.
        sizes = [2**p for p in range(3, 15)]
        ratios = [
            pattern_symbolic_steps(N, 3) / (math.sqrt(N) * math.log2(N) ** 2)
            for N in sizes
        ]
        assert max(ratios) <= 4.0
        # The tail is governed by the amplification rounds, not by growth in N.
        assert ratios[-1] <= max(ratios[:4])

    def test_match_ledger_values(self):
        instance = TextInstance("10110010", "110")
        _, _, ledger = pattern_match(instance, GroverConfig("ideal"), 0)
        assert ledger.amplification_rounds == 2
        assert ledger.gate_steps == pattern_symbolic_steps(8, 3)


class TestPatternLabel:
    def test_halfspace_rule_matches_concept_geometry(self):
        assert pattern_label(0, 0, 16) == 1
        assert pattern_label(0, 7, 16) == 1
        assert pattern_label(0, 8, 16) == -1

    def test_log_width_rule(self):
        # Width (log2(16) - 2)/2 = 1: only locations start and start + 1 are positive.
        assert pattern_label(0, 0, 16, rule="log_width") == 1
        assert pattern_label(0, 1, 16, rule="log_width") == 1
        assert pattern_label(0, 2, 16, rule="log_width") == -1

    def test_unknown_rule_rejected(self):
        with pytest.raises(StructuralError):
            pattern_label(0, 0, 16, rule="other")
