import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qtransistor.dispersive import DispersiveConfig, effective_frequency, simulate_dispersive
from qtransistor.dynamics import QubitState
from qtransistor.errors import DispersiveValidityWarning, ResonantAtomError


def test_effective_frequency_examples():
    assert effective_frequency(DispersiveConfig(10.0, 3.0, 0.0)) == 10.0
    assert effective_frequency(DispersiveConfig(10.0, 0.0, 0.1)) == pytest.approx(9.999, abs=1e-15)
    assert effective_frequency(DispersiveConfig(10.0, 12.0, 0.5)) > 10.0
    with pytest.raises(ResonantAtomError):
        effective_frequency(DispersiveConfig(5.0, 5.0, 0.1))


@given(st.floats(0, 1), st.floats(0, 2 * math.pi), st.floats(0, 500),
       st.floats(0.001, 0.5), st.floats(-20, 20).filter(lambda d: abs(d) > 0.5))
def test_product_state_and_phase(alpha, theta, t, g, delta):
    cfg = DispersiveConfig(10.0, 10.0 - delta, g)
    res = simulate_dispersive(cfg, QubitState.from_angles(alpha, theta), t)
    assert res.field_purity == pytest.approx(1.0, abs=1e-12)
    assert res.phase_error <= 1e-10
    assert res.oracle_deviation <= 1e-10


@given(st.floats(0, 200))
def test_matches_effective_hamiltonian(t):
    cfg = DispersiveConfig(3.0, 1.0, 0.2)
    psi = QubitState.from_angles(0.6, 0.7)
    res = simulate_dispersive(cfg, psi, t)
    w = effective_frequency(cfg)
    expected = np.array([psi.a0, psi.a1 * np.exp(-1j * w * t)])
    np.testing.assert_allclose(res.field, expected, atol=1e-10)


def test_general_fock_cutoff():
    amps = np.array([0.5, 0.5, 0.5, 0.5])
    res = simulate_dispersive(DispersiveConfig(2.0, 0.0, 0.3), amps, 4.0, n_max=3)
    assert res.oracle_deviation <= 1e-12
    assert res.field_purity == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("g, nbar, delta, gamma", [
    (0.1, 1.0, 1.0, 0.0), (1.0, 1.0, 1.0, 0.0), (2.0, 1.0, 1.0, 1.0), (1.5, 2.0, 2.0, 0.5),
])
def test_validity_warning_exactly_at_threshold(g, nbar, delta, gamma):
    cfg = DispersiveConfig(5.0, 5.0 - delta, g, gamma, nbar)
    invalid = g ** 2 * nbar >= delta ** 2 + gamma ** 2
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = simulate_dispersive(cfg, [1.0, 0.0], 1.0)
    flagged = any(issubclass(w.category, DispersiveValidityWarning) for w in caught)
    assert flagged == invalid
    assert res.valid == (not invalid)
