import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockcoherence.errors import CapacityExceeded, InvalidArgument
from fockcoherence.fock import (
    TwoModePureState,
    mean_n,
    mean_total_n,
    number_distribution,
)
from fockcoherence.measures import von_neumann_entropy
from fockcoherence.states import (
    TruncationPolicy,
    beam_splitter_50_50,
    coherent,
    multimode_max_coherent,
    pstd,
    squeezed,
    squeezed_vacuum_state,
    thermal,
    tmsv,
    tmsv_through_bs,
    two_mode_coherent,
)
from oracles import (
    dense_squeezed_displaced,
    dense_two_mode_beam_splitter,
    exact_factorial,
    max_diff_up_to_phase,
    pascal_binomial,
)


def assert_normalized(total, tail_bound, tol=1e-12):
    assert tail_bound <= tol
    assert 1 - tail_bound - 1e-12 <= total <= 1 + 1e-12


# pstd

def test_pstd_examples():
    assert pstd(0.0).amps.tolist() == [1.0]
    p = number_distribution(pstd(1.0)).probs
    np.testing.assert_allclose(p, 0.5 ** (np.arange(p.size) + 1), rtol=1e-13)
    assert mean_n(number_distribution(pstd(1.0))) == pytest.approx(1.0, abs=1e-10)


def test_pstd_linear_phase():
    s = pstd(1.0, phase=0.3)
    np.testing.assert_allclose(np.angle(s.amps[1:6]), 0.3 * np.arange(1, 6), atol=1e-12)
    np.testing.assert_allclose(np.abs(s.amps), np.abs(pstd(1.0).amps), atol=1e-15)


def test_pstd_explicit_cutoff_records_exact_tail():
    s = pstd(1.0, cutoff=9)
    assert s.cutoff == 9
    assert s.tail_bound == pytest.approx(0.5**10)


def test_pstd_matches_thermal_diagonal():
    for nbar in (0.1, 1.0, 3.0):
        p = number_distribution(pstd(nbar)).probs
        np.testing.assert_allclose(p, thermal(nbar).diagonal, atol=1e-14, rtol=0)


# coherent

def test_coherent_examples():
    assert coherent(0).amps.tolist() == [1.0]
    p = number_distribution(coherent(1.0)).probs
    assert p[1] / p[0] == pytest.approx(1.0, rel=1e-14)
    assert mean_n(number_distribution(coherent(2.0))) == pytest.approx(4.0, abs=1e-10)


def test_coherent_phases_follow_alpha():
    alpha = 1.3 * np.exp(0.7j)
    s = coherent(alpha)
    for n in range(8):
        expected = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(exact_factorial(n))
        assert s.amps[n] == pytest.approx(expected, abs=1e-14)


# squeezed

def test_squeezed_examples():
    assert squeezed(0, 0).probs.tolist() == [1.0]
    r = 0.7
    p = squeezed(0, r).probs
    t = math.tanh(r)
    for n in range(0, 30, 2):
        dfact = 1
        for k in range(n - 1, 0, -2):
            dfact *= k
        expected = t**n * dfact**2 / (exact_factorial(n) * math.cosh(r))
        assert p[n] == pytest.approx(expected, rel=1e-12)
    r1 = math.asinh(1.0)
    assert mean_n(squeezed(0, r1)) == pytest.approx(1.0, abs=1e-10)


def test_squeezed_vacuum_odd_entries_are_exactly_zero():
    for r in (0.1, 0.9, 2.0):
        p = squeezed(0, r).probs
        assert np.all(p[1::2] == 0.0)
        assert np.all(squeezed_vacuum_state(r).amps[1::2] == 0)


@pytest.mark.parametrize("alpha,r,phi", [
    (0.0, 0.5, 0.0),
    (0.0, 0.8, 1.1),
    (1.0, 0.5, 0.0),
    (0.5 + 0.8j, 0.6, 0.9),
    (-1.2j, 0.3, 2.5),
    (2.0, 1.0, -0.4),
])
def test_squeezed_matches_dense_oracle(alpha, r, phi):
    ref = np.abs(dense_squeezed_displaced(alpha, r, phi)) ** 2
    p = squeezed(alpha, r, phi).probs
    n = min(p.size, 80)
    np.testing.assert_allclose(p[:n], ref[:n], atol=1e-10)


def test_squeezed_vacuum_state_amplitudes_match_dense_oracle():
    for r, phi in ((0.5, 0.0), (0.9, 1.3)):
        s = squeezed_vacuum_state(r, phi)
        ref = dense_squeezed_displaced(0.0, r, phi)
        n = min(s.amps.size, 80)
        np.testing.assert_allclose(s.amps[:n], ref[:n], atol=1e-10)


def test_squeezed_reduces_to_coherent_without_squeezing():
    p = squeezed(1.5, 0.0).probs
    np.testing.assert_allclose(p, number_distribution(coherent(1.5)).probs, rtol=1e-15)


def test_squeezed_rejects_negative_r():
    with pytest.raises(InvalidArgument):
        squeezed(0, -0.1)


# thermal

def test_thermal_examples():
    np.testing.assert_array_equal(thermal(0.0).entries, [[1.0]])
    d = thermal(1.0).diagonal
    np.testing.assert_allclose(d, 0.5 ** (np.arange(d.size) + 1), rtol=1e-13)
    assert von_neumann_entropy(thermal(1.0)) == pytest.approx(2 * math.log(2), abs=1e-9)


def test_thermal_capacity():
    with pytest.raises(CapacityExceeded):
        thermal(50.0)
    with pytest.raises(CapacityExceeded):
        thermal(1.0, max_dim=10)


# multimode

def test_multimode_examples():
    d1 = multimode_max_coherent(1, 1.5)
    np.testing.assert_allclose(d1.probs, number_distribution(pstd(1.5)).probs, rtol=1e-14)
    np.testing.assert_array_equal(d1.degeneracy, 1)
    d2 = multimode_max_coherent(2, 1.0)
    n = np.arange(d2.probs.size)
    np.testing.assert_array_equal(d2.degeneracy, n + 1)
    np.testing.assert_allclose(d2.probs, 0.5 ** (n + 1) / (n + 1), rtol=1e-13)
    d3 = multimode_max_coherent(3, 2.0)
    assert math.fsum(d3.weights) == pytest.approx(1.0, abs=1e-10)


def test_multimode_degeneracy_is_binomial():
    dist = multimode_max_coherent(4, 0.5)
    for n in range(20):
        assert dist.degeneracy[n] == pascal_binomial(n + 3, 3)
    assert mean_n(dist) == pytest.approx(0.5, abs=1e-10)


# two-mode states

def test_tmsv_examples():
    assert tmsv(0.0).amps == {(0, 0): 1.0}
    s = tmsv(2.0)
    for n in range(20):
        assert abs(s.amplitude(n, n)) ** 2 == pytest.approx(0.5 ** (n + 1), rel=1e-13)
        assert s.amplitude(n, n + 1) == 0
    assert mean_total_n(s) == pytest.approx(2.0, abs=1e-10)


def test_tmsv_through_bs_examples():
    assert tmsv_through_bs(0.0).amps == {(0, 0): 1.0}
    s = tmsv_through_bs(2.0)
    layer = 0.5**2
    assert abs(s.amplitude(2, 0)) ** 2 == pytest.approx(layer / 2, rel=1e-13)
    assert abs(s.amplitude(0, 2)) ** 2 == pytest.approx(layer / 2, rel=1e-13)
    assert all(n1 % 2 == 0 and n2 % 2 == 0 for n1, n2 in s.amps)


def test_tmsv_through_bs_layers_preserve_weight():
    nbar_t = 1.4
    s, base = tmsv_through_bs(nbar_t), tmsv(nbar_t)
    for n in range(base.total_cutoff // 2 + 1):
        layer = sum(abs(s.amplitude(2 * n - 2 * k, 2 * k)) ** 2 for k in range(n + 1))
        assert layer == pytest.approx(abs(base.amplitude(n, n)) ** 2, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("nbar_t", [0.5, 2.0])
def test_beam_splitter_reproduces_closed_form(nbar_t):
    out = beam_splitter_50_50(tmsv(nbar_t))
    assert max_diff_up_to_phase(out.amps, tmsv_through_bs(nbar_t).amps) < 1e-10


@pytest.mark.parametrize("convention", ["real", "symmetric"])
def test_beam_splitter_matches_full_space_oracle(convention):
    amps = {(0, 0): 0.5, (1, 0): 0.5j, (2, 1): -0.5, (0, 3): 0.3, (1, 1): math.sqrt(0.25 - 0.09)}
    state = TwoModePureState(amps)
    out = beam_splitter_50_50(state, convention)
    ref = dense_two_mode_beam_splitter(amps, box=6, convention=convention)
    for key, val in ref.items():
        assert abs(out.amps.get(key, 0j) - val) < 1e-12


def test_beam_splitter_conventions_agree_in_magnitude():
    s = tmsv(1.0)
    a = beam_splitter_50_50(s, "real").amps
    b = beam_splitter_50_50(s, "symmetric").amps
    assert max(abs(abs(a[k]) - abs(b[k])) for k in a) < 1e-12


def test_beam_splitter_vacuum_and_unknown_convention():
    assert beam_splitter_50_50(TwoModePureState({(0, 0): 1.0})).amps == {(0, 0): 1.0}
    with pytest.raises(InvalidArgument):
        beam_splitter_50_50(tmsv(1.0), "other")


def random_two_mode(seed, max_total):
    rng = np.random.default_rng(seed)
    keys = [(i, t - i) for t in range(max_total + 1) for i in range(t + 1)]
    v = rng.normal(size=len(keys)) + 1j * rng.normal(size=len(keys))
    v /= np.linalg.norm(v)
    return TwoModePureState(dict(zip(keys, v)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 8))
def test_beam_splitter_unitarity_and_double_application(seed, max_total):
    state = random_two_mode(seed, max_total)
    once = beam_splitter_50_50(state)
    norm_in = sum(abs(a) ** 2 for a in state.amps.values())
    norm_out = sum(abs(a) ** 2 for a in once.amps.values())
    assert abs(norm_in - norm_out) < 1e-12
    twice = beam_splitter_50_50(once)
    # applying the splitter twice swaps the modes, up to Fock-diagonal phases
    for (n1, n2), amp in state.amps.items():
        assert abs(abs(twice.amplitude(n2, n1)) - abs(amp)) < 1e-10


def test_two_mode_coherent_examples():
    assert two_mode_coherent(0).amps == {(0, 0): 1.0}
    s = two_mode_coherent(1.0)
    assert mean_total_n(s) == pytest.approx(2.0, abs=1e-10)
    for m in range(6):
        for n in range(6):
            expected = math.exp(-2) / (exact_factorial(m) * exact_factorial(n))
            assert abs(s.amplitude(m, n)) ** 2 == pytest.approx(expected, rel=1e-12)


# invariants

ALL_STATES = [
    lambda: pstd(0.0), lambda: pstd(2.5), lambda: coherent(1 + 1j), lambda: coherent(6.0),
    lambda: squeezed_vacuum_state(1.2, 0.4),
]
ALL_DISTS = [
    lambda: squeezed(0, 0.9), lambda: squeezed(1.0, 0.5, 0.3), lambda: squeezed(2j, 1.5),
    lambda: multimode_max_coherent(5, 3.0),
]
TWO_MODE = [lambda: tmsv(3.0), lambda: tmsv_through_bs(1.0), lambda: two_mode_coherent(0.8 - 0.2j)]


@pytest.mark.parametrize("make", ALL_STATES)
def test_pure_constructor_normalization(make):
    s = make()
    assert_normalized(math.fsum(np.abs(s.amps) ** 2), s.tail_bound)


@pytest.mark.parametrize("make", ALL_DISTS)
def test_distribution_constructor_normalization(make):
    d = make()
    assert_normalized(math.fsum(d.weights), d.tail_bound)


@pytest.mark.parametrize("make", TWO_MODE)
def test_two_mode_constructor_normalization(make):
    s = make()
    assert_normalized(math.fsum(abs(a) ** 2 for a in s.amps.values()), s.tail_bound)


@pytest.mark.parametrize("nbar", [0.2, 1.0, 3.0])
def test_thermal_trace(nbar):
    rho = thermal(nbar)
    assert_normalized(float(np.trace(rho.entries).real), rho.tail_bound)


def test_tolerance_is_respected_and_capacity_enforced():
    loose = TruncationPolicy(tol=1e-4)
    s = pstd(1.0, policy=loose)
    assert s.tail_bound <= 1e-4 and s.cutoff < pstd(1.0).cutoff
    with pytest.raises(CapacityExceeded):
        pstd(1000.0, policy=TruncationPolicy(max_cutoff=100))
    with pytest.raises(CapacityExceeded):
        coherent(30.0, policy=TruncationPolicy(max_cutoff=100))
    with pytest.raises(InvalidArgument):
        TruncationPolicy(tol=0)


def test_invalid_arguments():
    for bad in (lambda: pstd(-1), lambda: tmsv(-0.1), lambda: multimode_max_coherent(0, 1.0),
                lambda: coherent(complex("nan"))):
        with pytest.raises(InvalidArgument):
            bad()
