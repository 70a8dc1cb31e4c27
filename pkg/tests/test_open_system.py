import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from qtransistor.design import design_gate
from qtransistor.dynamics import QubitState
from qtransistor.errors import DomainError, ScopeError, TruncationError
from qtransistor.network import NetworkConfig, build_hamiltonian
from qtransistor.open_system import (
    ReservoirParams, drain_fidelity, exchange_exponent, fidelity_avg, fidelity_map,
    fidelity_point, j_matrix, level_set_curve, nbar_from_ratio, optimal_kappa, planck_nbar,
    rho_series, theta_matrix, H_PLANCK, K_BOLTZMANN,
)
from qtransistor.oracle import average_over_states
from qtransistor.spectral import analytic_spectrum

kappas = st.integers(1, 60)
xs = st.floats(0, 5)
nbars = st.floats(0, 1)


def test_planck_examples():
    nu = 1e10
    assert planck_nbar(1.0, math.log(2) * K_BOLTZMANN / H_PLANCK) == pytest.approx(1.0, rel=1e-12)
    assert planck_nbar(1e-3, 1e10) < 1e-200
    t = 0.5 * H_PLANCK * nu / K_BOLTZMANN
    assert t == pytest.approx(0.2399, abs=1e-4)
    assert planck_nbar(t, nu) == pytest.approx(1 / (math.e ** 2 - 1), rel=1e-12)
    assert nbar_from_ratio(0.5) == pytest.approx(0.15652, abs=1e-5)
    assert nbar_from_ratio(0.0) == 0.0
    with pytest.raises(DomainError):
        planck_nbar(0.0, 1.0)


@given(kappas, nbars, st.floats(0, 1))
def test_noiseless_fidelity_is_one(kappa, nbar, alpha):
    assert fidelity_point(kappa, 0.0, nbar, alpha) == pytest.approx(1.0, abs=1e-14)
    assert fidelity_avg(kappa, 0.0, nbar) == pytest.approx(1.0, abs=1e-14)
    assert fidelity_avg(kappa, 0.0, nbar, "haar") == pytest.approx(1.0, abs=1e-14)


@given(kappas, xs)
def test_zero_temperature_excited_input(kappa, x):
    assert fidelity_point(kappa, x, 0.0, 0.0) == pytest.approx(math.exp(-x), abs=1e-12)


@given(kappas, xs)
def test_zero_temperature_average_form(kappa, x):
    want = 1 / 3 + 4 / 15 * math.exp(-x / 2) + 6 / 15 * math.exp(-x)
    assert fidelity_avg(kappa, x, 0.0) == pytest.approx(want, abs=1e-14)


def test_zero_temperature_average_increases_with_kappa():
    ks = np.arange(1, 200)
    f = fidelity_avg(ks, exchange_exponent(ks, 0.3), 0.0)
    assert np.all(np.diff(f) > 0)


@given(kappas, xs, nbars)
def test_average_matches_quadrature(kappa, x, nbar):
    for measure in ("alpha-uniform", "haar"):
        quad = average_over_states(lambda a, _t: fidelity_point(kappa, x, nbar, a), measure)
        assert fidelity_avg(kappa, x, nbar, measure) == pytest.approx(quad, abs=1e-12)


@given(kappas, xs, nbars, st.floats(0, 1))
def test_fidelities_in_unit_interval(kappa, x, nbar, alpha):
    assert 0.0 <= fidelity_point(kappa, x, nbar, alpha) <= 1.0 + 1e-9
    assert 0.0 <= fidelity_avg(kappa, x, nbar) <= 1.0 + 1e-9


@pytest.mark.parametrize("kappa", [1, 6, 30, 60])
def test_monotone_in_gamma_and_average_monotone_in_nbar(kappa):
    x = np.linspace(0, 5, 501)
    nb = np.linspace(0, 1, 201)
    for alpha in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        f = fidelity_point(kappa, x[:, None], nb[None, :], alpha)
        assert np.all(np.diff(f, axis=0) <= 1e-15)
    for measure in ("alpha-uniform", "haar"):
        f = fidelity_avg(kappa, x[:, None], nb[None, :], measure)
        assert np.all(np.diff(f, axis=0) <= 1e-15)
        assert np.all(np.diff(f, axis=1) <= 1e-15)


@pytest.mark.parametrize("kappa", [1, 6, 30, 60])
def test_point_fidelity_in_nbar_flagged_region(kappa):
    # Monotonicity in nbar is checked, not assumed: for an excited input and
    # heavy loss the drain is nearly thermal, and its one-photon population
    # nbar/(1+nbar)^2 grows with nbar. Outside that corner it holds.
    x = np.linspace(0, 5, 501)
    nb = np.linspace(0, 1, 201)
    alphas = np.linspace(0, 1, 21)
    f = fidelity_point(kappa, x[:, None, None], nb[None, :, None], alphas[None, None, :])
    rising = np.diff(f, axis=1) > 1e-15
    if kappa == 1:
        assert rising.any()
    xi, _, ai = np.nonzero(rising)
    if xi.size:
        assert x[xi].min() >= 1.7
        assert alphas[ai].max() <= 0.5
        assert f[:, :-1][rising].max() < 0.25
    assert not rising[x < 1.7].any()


def test_scope_and_domain_checks():
    with pytest.raises(ScopeError):
        fidelity_point(2, 0.1, 0.1, 0.5, n_bus=3)
    assert fidelity_point(2, 0.1, 0.1, 0.5, n_bus=3, allow_out_of_scope=True) > 0
    with pytest.raises(DomainError):
        fidelity_avg(2, 0.1, 1.5)
    with pytest.raises(DomainError):
        fidelity_avg(0, 0.1, 0.1)
    with pytest.raises(DomainError):
        fidelity_avg(2, 0.1, 0.1, "bloch")


def test_theta_matrix_properties():
    cfg = NetworkConfig(1.0, 0.2, 3, 2, 0.3)
    spec = analytic_spectrum(cfg)
    np.testing.assert_allclose(theta_matrix(spec, 0.4, 0.0), np.eye(5), atol=1e-14)
    u = scipy.linalg.expm(-1j * build_hamiltonian(cfg) * 2.7)
    np.testing.assert_allclose(theta_matrix(spec, 0.0, 2.7), u, atol=1e-10)
    th = theta_matrix(spec, 0.4, 2.7)
    np.testing.assert_allclose(np.sum(np.abs(th) ** 2, axis=0), math.exp(-0.4 * 2.7), atol=1e-10)


def test_j_matrix():
    res = ReservoirParams(0.7, 0.5)
    np.testing.assert_array_equal(j_matrix(res, 0.0, 3), np.zeros((3, 3)))
    np.testing.assert_array_equal(j_matrix(ReservoirParams(0.7, 0.0), 4.0, 3), np.zeros((3, 3)))
    np.testing.assert_allclose(j_matrix(ReservoirParams(1.0, 0.5), math.log(2), 2),
                               0.5 * np.eye(2), atol=1e-15)


def _gate_network(kappa=1, phi=math.pi / 2):
    plan = design_gate(phi, lam=1.0, kappa=kappa, ell=1)
    return plan, NetworkConfig(plan.omega, 1.0, kappa, kappa)


def test_series_vacuum_stays_vacuum():
    _, cfg = _gate_network()
    rho = rho_series(cfg, ReservoirParams(0.3, 0.0), QubitState(1.0, 0.0), 2.0)
    want = np.zeros_like(rho)
    want[0, 0] = 1.0
    np.testing.assert_allclose(rho, want, atol=1e-14)


def test_series_zero_temperature_is_damped_pure_state():
    plan, cfg = _gate_network()
    psi = QubitState.from_angles(0.5, 1.0)
    gamma, t = 0.2, 1.3
    rho = rho_series(cfg, ReservoirParams(gamma, 0.0), psi, t)
    # Independent route: closed evolution with amplitude e^{-gamma t / 2}.
    col = scipy.linalg.expm(-1j * build_hamiltonian(cfg) * t)[:, 0] * math.exp(-gamma * t / 2)
    dim = rho.shape[0]
    v = np.zeros(dim, dtype=complex)
    v[0] = psi.a0
    for mode in range(cfg.dim):
        v[5 ** (cfg.dim - 1 - mode)] = psi.a1 * col[mode]
    want = np.outer(v, v.conj())
    want[0, 0] += abs(psi.a1) ** 2 * (1 - np.sum(np.abs(col) ** 2))
    np.testing.assert_allclose(rho, want, atol=1e-12)


def test_series_long_time_is_thermal():
    _, cfg = _gate_network()
    nbar = 0.3
    rho = rho_series(cfg, ReservoirParams(1.0, nbar), QubitState.from_angles(0.2), 60.0,
                     fock_cut=12)
    p = np.array([nbar ** n / (1 + nbar) ** (n + 1) for n in range(13)])
    want = np.diag(np.kron(np.kron(p, p), p))
    np.testing.assert_allclose(rho, want, atol=1e-9)


@pytest.mark.parametrize("nbar, gamma", [(0.0, 0.1), (0.3, 0.05), (0.2, 0.02)])
def test_series_state_is_physical_and_matches_closed_form(nbar, gamma):
    plan, cfg = _gate_network()
    psi = QubitState.from_angles(0.6, 0.9)
    rho = rho_series(cfg, ReservoirParams(gamma, nbar), psi, plan.t_ex, fock_cut=6)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-15)
    assert np.linalg.eigvalsh(rho).min() >= -1e-9
    assert 1 - 1e-7 <= np.trace(rho).real <= 1 + 1e-12
    target = QubitState(psi.a0, psi.a1 * np.exp(1j * plan.phi))
    f_series = drain_fidelity(rho, cfg.dim, 6, target)
    f_closed = fidelity_point(1, gamma * plan.t_ex, nbar, 0.6)
    assert f_series == pytest.approx(f_closed, abs=1e-7)


def test_series_reports_truncation():
    plan, cfg = _gate_network()
    with pytest.raises(TruncationError) as info:
        rho_series(cfg, ReservoirParams(0.1, 1.0), QubitState.from_angles(0.5), plan.t_ex)
    assert info.value.tail_bound > 1e-7
    rho = rho_series(cfg, ReservoirParams(0.1, 1.0), QubitState.from_angles(0.5), plan.t_ex,
                     tail_tol=1e-3)
    assert np.trace(rho).real > 1 - 1e-2


def test_map_rows_and_flags():
    rows = fidelity_map([0.0, 0.5], [0.5, 2.0], [1, 3])
    assert [(r.gamma_over_lambda, r.kbt_over_hnu, r.kappa) for r in rows][:3] == [
        (0.0, 0.5, 1), (0.0, 0.5, 3), (0.0, 2.0, 1)]
    for r in rows:
        if r.gamma_over_lambda == 0.0:
            assert r.fbar == 1.0
        assert r.valid == (r.nbar <= 1.0)
        assert 0.0 <= r.fbar <= 1.0 + 1e-9
    assert rows[0].csv().count(",") == 4


def test_map_deterministic_across_workers():
    g = np.linspace(0, 1, 100)
    a = fidelity_map(g, 0.5, np.arange(1, 101), workers=1)
    b = fidelity_map(g, 0.5, np.arange(1, 101), workers=3)
    assert [r.csv() for r in a] == [r.csv() for r in b]


def test_optimal_kappa_cases():
    assert optimal_kappa(0.0, 0.3, 40) == (1, 1.0)
    k, _ = optimal_kappa(0.2, 0.0, 37)
    assert k == 37
    # Regression value on the k_B T / h nu = 0.5 panel.
    k, f = optimal_kappa(0.1, nbar_from_ratio(0.5), 60)
    assert k == 6
    assert f == pytest.approx(0.84504, abs=1e-5)


def test_level_set_has_interior_maximum():
    ks = np.arange(1, 61)
    curve = level_set_curve(ks, nbar_from_ratio(0.5))
    best = int(np.argmax(curve))
    assert 0 < best < len(ks) - 1
    assert curve[0] < curve[best] and curve[-1] < curve[best]
