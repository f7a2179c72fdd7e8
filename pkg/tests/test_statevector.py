import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakloop import statevector as sv
from weakloop.errors import ConfigurationError, ConsistencyError, DomainError
from weakloop.geometry import ProblemParams, theta_offset


def uniform(n, marked):
    oracle = sv.MarkedOracle(n, frozenset(marked))
    prep = sv.Preparation.uniform(n)
    return oracle, prep, sv.prepare(oracle, prep)


def test_oracle_validation():
    for n, marked in ((4, set()), (2, {0, 1}), (4, {4}), (0, {0}), (4, {-1})):
        with pytest.raises(ConfigurationError):
            sv.MarkedOracle(n, frozenset(marked))
    o = sv.MarkedOracle(8, {1, 3})
    assert o.rho_implied == 0.25 and o.chi(3) == 1 and o.chi(2) == 0
    with pytest.raises(ValueError):
        o.mask[0] = True


def test_prepare_uniform():
    _, _, s = uniform(4, {3})
    want = np.zeros((4, 2))
    want[:, sv.BOT] = 0.5
    np.testing.assert_allclose(s.amplitudes, want)
    assert s.oracle_calls == 0


def test_prepare_rejects_zero_overlap_and_bad_dimension():
    oracle = sv.MarkedOracle(2, frozenset({1}))
    with pytest.raises(ConfigurationError):
        sv.prepare(oracle, sv.Preparation.explicit([1.0, 0.0]))
    with pytest.raises(ConfigurationError):
        sv.prepare(oracle, sv.Preparation.uniform(3))
    with pytest.raises(ConfigurationError):
        sv.Preparation.explicit([1.0, 1.0])


def test_marked_mass_reads_rho():
    oracle, prep, s = uniform(100, {0})
    assert sv.marked_mass(s, oracle) == pytest.approx(0.01, abs=1e-15)
    assert prep.rho(oracle) == pytest.approx(0.01, abs=1e-15)


def test_oracle_phase():
    oracle, prep, s = uniform(4, {3})
    t = sv.apply_oracle_phase(s, oracle)
    np.testing.assert_allclose(t.amplitudes[:, 0], [0.5, 0.5, 0.5, -0.5])
    assert t.oracle_calls == 1
    tt = sv.apply_oracle_phase(t, oracle)
    np.testing.assert_allclose(tt.amplitudes, s.amplitudes)
    assert tt.oracle_calls == 2
    assert np.vdot(s.vector, t.vector).real == pytest.approx(0.5)
    # input untouched
    np.testing.assert_allclose(s.amplitudes[:, 0], 0.5)


def test_reflection_eigenvectors():
    oracle, prep, s = uniform(4, {3})
    np.testing.assert_allclose(sv.apply_reflection_psi(s, prep).amplitudes, s.amplitudes, atol=1e-15)
    amps = np.zeros((4, 2), dtype=complex)
    amps[:, 0] = [0.5, -0.5, 0.5, -0.5]
    amps[:, 1] = [0.5, 0.5, -0.5, -0.5]
    orth = sv.JointState(amps)
    np.testing.assert_allclose(sv.apply_reflection_psi(orth, prep).amplitudes, -amps, atol=1e-15)


def test_single_grover_iteration_n4_finds_marked():
    oracle, prep, s = uniform(4, {3})
    t = sv.grover_iteration(s, oracle, prep)
    assert sv.marked_mass(t, oracle) == pytest.approx(1.0, abs=1e-14)
    assert t.oracle_calls == 1
    assert sv.extract_angle(t, oracle, prep) == pytest.approx(math.pi / 2, abs=1e-12)


def test_entangler_examples():
    oracle, prep, s = uniform(8, {2, 5})
    same = sv.apply_weak_entangler(s, oracle, 0.0)
    np.testing.assert_allclose(same.amplitudes, s.amplitudes)
    full = sv.apply_weak_entangler(s, oracle, 1.0)
    assert full.probe_mass(sv.TOP) == pytest.approx(0.25)
    np.testing.assert_allclose(full.amplitudes[[2, 5], sv.BOT], 0, atol=1e-15)
    assert full.oracle_calls == 1
    with pytest.raises(DomainError):
        sv.weak_rotation(1.5)


def test_entangler_unitary():
    oracle = sv.MarkedOracle(6, frozenset({1, 4}))
    E = sv.entangler_matrix(oracle, 0.37)
    np.testing.assert_allclose(E.conj().T @ E, np.eye(12), atol=1e-12)
    # dense matrix and the in-place update agree
    rng = np.random.default_rng(1)
    v = rng.normal(size=12) + 1j * rng.normal(size=12)
    v /= np.linalg.norm(v)
    s = sv.JointState(v.reshape(6, 2))
    np.testing.assert_allclose(sv.apply_weak_entangler(s, oracle, 0.37).vector, E @ v, atol=1e-14)


def test_measure_probe():
    oracle, prep, s = uniform(4, {3})
    for u in (0.0, 0.5, 0.999):
        out, t = sv.measure_probe(s, u)
        assert out == sv.BOT
        np.testing.assert_allclose(t.amplitudes, s.amplitudes)
    p = ProblemParams(0.25, 0.5)
    a = sv.apply_weak_entangler(s, oracle, p.kappa)
    p_top = a.probe_mass(sv.TOP)
    assert p_top == pytest.approx(0.5 * math.sin(p.alpha) ** 2, abs=1e-15)
    out, t = sv.measure_probe(a, p_top / 2)
    assert out == sv.TOP
    assert t.probe_mass(sv.BOT) == 0.0
    assert t.norm_sq == pytest.approx(1.0, abs=1e-12)
    assert sv.marked_mass(t, oracle) == pytest.approx(1.0, abs=1e-12)
    out, t = sv.measure_probe(a, p_top)
    assert out == sv.BOT


def test_measure_computational():
    oracle, prep, s = uniform(4, {3})
    us = (np.arange(100_000) + 0.5) / 100_000
    hits = [sv.measure_computational(s, oracle, u)[1] for u in us[::10]]
    assert np.mean(hits) == pytest.approx(0.25, abs=1e-3)
    t = sv.grover_iteration(s, oracle, prep)  # exactly psi1
    for u in (0.0, 0.3, 0.999999):
        assert sv.measure_computational(t, oracle, u) == (3, True)


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 128), st.floats(0.01, 1), st.floats(0, 1), st.integers(0, 40))
def test_post_top_state_is_always_marked(n, kappa, u, steps):
    oracle, prep, s = uniform(n, {n - 1})
    for _ in range(steps):
        s = sv.grover_iteration(s, oracle, prep)
    s = sv.apply_weak_entangler(s, oracle, kappa)
    if s.probe_mass(sv.TOP) == 0.0:
        return
    _, t = sv.measure_probe(s, 0.0)
    assert sv.measure_computational(t, oracle, u)[1]


def test_extract_angle_examples():
    oracle, prep, s = uniform(64, {9})
    p = ProblemParams(1 / 64, 0.1)
    assert sv.extract_angle(s, oracle, prep) == pytest.approx(p.alpha, abs=1e-14)
    t = sv.grover_iteration(s, oracle, prep)
    assert sv.extract_angle(t, oracle, prep) == pytest.approx(3 * p.alpha, abs=1e-12)
    t = sv.apply_weak_entangler(t, oracle, p.kappa)
    _, t = sv.measure_probe(t, 0.999999)
    want = 3 * p.alpha - theta_offset(3 * p.alpha, p)
    assert sv.extract_angle(t, oracle, prep) == pytest.approx(want, abs=1e-12)


def test_extract_angle_rejects_out_of_plane():
    oracle, prep, s = uniform(8, {0})
    amps = s.amplitudes.copy()
    amps[:, 0] = [0, 1, 0, 0, 0, 0, 0, 0]
    with pytest.raises(ConsistencyError):
        sv.extract_angle(sv.JointState(amps), oracle, prep)
    with pytest.raises(ConsistencyError):
        sv.extract_angle(s, oracle, prep, branch=sv.TOP)


@pytest.mark.parametrize("n,marked", [(16, {3}), (64, {0, 1, 2, 3}), (1000, {999})])
def test_grover_k_step_formula(n, marked):
    oracle, prep, s = uniform(n, marked)
    alpha = math.asin(math.sqrt(len(marked) / n))
    for k in range(51):
        got = sv.extract_angle(s, oracle, prep)
        want = (alpha + 2 * k * alpha) % (2 * math.pi)
        assert abs(math.remainder(got - want, 2 * math.pi)) < 1e-10
        s = sv.grover_iteration(s, oracle, prep)


def test_plane_invariance_and_norm_long_run():
    oracle, prep, s = uniform(1024, {17, 500})
    kappa = math.sqrt(prep.rho(oracle))
    worst_plane, worst_norm = 0.0, 0.0
    for _ in range(10_000):
        s = sv.grover_iteration(s, oracle, prep)
        worst_norm = max(worst_norm, abs(s.norm_sq - 1))
        s = sv.apply_weak_entangler(s, oracle, kappa)
        worst_norm = max(worst_norm, abs(s.norm_sq - 1))
        _, s = sv.measure_probe(s, 1.0)  # force bot to keep the loop going
        worst_norm = max(worst_norm, abs(s.norm_sq - 1))
        worst_plane = max(worst_plane, sv.out_of_plane(s, oracle, prep))
    assert worst_plane < 1e-9
    assert worst_norm < 1e-12
    assert s.oracle_calls == 20_000


def test_explicit_preparation_plane():
    rng = np.random.default_rng(3)
    v = rng.normal(size=32) + 1j * rng.normal(size=32)
    v /= np.linalg.norm(v)
    oracle = sv.MarkedOracle(32, frozenset({4, 9, 20}))
    prep = sv.Preparation.explicit(v)
    s = sv.prepare(oracle, prep)
    alpha = math.asin(math.sqrt(prep.rho(oracle)))
    assert sv.extract_angle(s, oracle, prep) == pytest.approx(alpha, abs=1e-12)
    for k in range(1, 20):
        s = sv.grover_iteration(s, oracle, prep)
        got = sv.extract_angle(s, oracle, prep)
        assert abs(math.remainder(got - (2 * k + 1) * alpha, 2 * math.pi)) < 1e-10
