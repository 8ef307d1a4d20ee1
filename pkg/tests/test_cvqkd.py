import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsoqkd import cvqkd as qk
from fsoqkd.errors import PhysicsDomainError
from oracles import erfc_continued_fraction, holevo_bruteforce


def test_protocol_defaults_and_rounding():
    p = qk.ProtocolParams(block_size=10**8)
    assert p.m_pe == 10**7 and p.n_key == 9 * 10**7
    assert p.fer == pytest.approx(0.1)
    assert qk.ProtocolParams(block_size=15, r_pe=0.1).m_pe == 2  # 1.5 rounds up
    assert qk.ProtocolParams(block_size=14, r_pe=0.1).m_pe == 1


def test_protocol_validation():
    for bad in ({"mu": 0.5}, {"beta": 1.5}, {"r_pe": 0.0}, {"eps_s": 0.0}, {"p_ec": 0.0}, {"nu_det": 3}):
        with pytest.raises(ValueError):
            qk.ProtocolParams(**bad)


def test_covariance_cases():
    assert qk.covariance(10, 0.0, 0.3) == qk.CovarianceTriplet(10, 1.6, 0.0)
    t = qk.covariance(10, 1.0, 0.0)
    assert (t.a, t.b) == (10, 10) and t.c == pytest.approx(math.sqrt(99))
    t = qk.covariance(10, 0.1, 0.01)
    assert t.b == pytest.approx(1.92, rel=1e-14)
    assert t.c == pytest.approx(3.146426544510455, rel=1e-14)


@given(st.floats(1, 1e3), st.floats(0, 1), st.floats(0, 10))
def test_covariance_physical(mu, eta, n):
    assert qk.covariance(mu, eta, n).det_ab >= 1 - 1e-9 * mu * mu


def test_mutual_information():
    assert qk.mutual_information(10, 0.0, 0.1) == 0.0
    assert qk.mutual_information(3, 0.5, 0.0) == pytest.approx(0.5, rel=1e-15)
    assert qk.mutual_information(10, 0.1, 0.01) == pytest.approx(0.4562685793748303, rel=1e-13)


def test_holevo_trivial_cases():
    assert qk.holevo_bound(qk.CovarianceTriplet(1, 1, 0)) == pytest.approx(0.0, abs=1e-15)
    assert qk.holevo_bound(qk.covariance(10, 1.0, 0.0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(PhysicsDomainError):
        qk.holevo_bound(qk.CovarianceTriplet(2, 2, 2))


def test_holevo_reference_point():
    t = qk.covariance(10, 0.1, 0.01)
    assert holevo_bruteforce(t.a, t.b, t.c) == pytest.approx(0.476007157551011, rel=1e-12)
    assert qk.holevo_bound(t) == pytest.approx(0.476007157551011, abs=1e-9)


@given(st.floats(1.01, 100), st.floats(0.001, 0.999), st.floats(0, 2))
def test_holevo_matches_symplectic_oracle(mu, eta, n):
    t = qk.covariance(mu, eta, n)
    assert qk.holevo_bound(t) == pytest.approx(holevo_bruteforce(t.a, t.b, t.c), abs=1e-9)


def test_asymptotic_rate_signs():
    assert qk.asymptotic_rate(10, 0.9999, 0.0, 1.0) > 0
    assert qk.asymptotic_rate(10, 0.1, 0.5, 0.98) < 0


def test_pe_error_probability():
    assert qk.pe_error_probability(6.34) == pytest.approx(0.5 * erfc_continued_fraction(6.34 / math.sqrt(2)),
                                                         rel=1e-10)
    assert qk.pe_error_probability(6.34) == pytest.approx(1.2e-10, rel=0.05)


def test_worst_case_limits():
    est = qk.worst_case(0.1, 0.01, 10**30, 6.34, 9.0)
    assert est.eta_wc == pytest.approx(0.1, rel=1e-10)
    assert est.n_wc == pytest.approx(0.01, rel=1e-10)
    est = qk.worst_case(0.1, 0.01, 1000, 0.0, 9.0)
    assert (est.eta_wc, est.n_wc) == (0.1, 0.01)
    assert qk.worst_case(0.01, 0.01, 10, 6.34, 9.0).eta_wc == 0.0


def test_noiseless_estimation_is_exact():
    eta, n = qk.simulate_estimation(1.0, 0.0, 10, 1000, seed=3, noiseless=True, empirical_sigma_x=True)
    assert eta == 1.0
    assert n == -0.5  # residual variance is exactly zero


def test_estimation_reproducible():
    assert qk.simulate_estimation(0.1, 0.01, 10, 5000, seed=7) == qk.simulate_estimation(0.1, 0.01, 10, 5000, seed=7)
    a = qk.simulate_estimation_batch(0.1, 0.01, 10, 1000, 5, seed=7)
    b = qk.simulate_estimation_batch(0.1, 0.01, 10, 1000, 5, seed=7)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_reference_stream():
    # PCG64 stream frozen for seed 12345
    eta, n = qk.simulate_estimation(0.1, 0.01, 10, 1000, seed=12345)
    assert (eta, n) == pytest.approx(REFERENCE_STREAM, rel=1e-12)


REFERENCE_STREAM = (0.11157976387118976, 0.018070753181977373)


def test_estimator_bias_shrinks_with_m():
    for m in (10**3, 10**4):
        etas, ns = qk.simulate_estimation_batch(0.1, 0.01, 10, m, 400, seed=11)
        se_eta = math.sqrt(qk.eta_hat_variance(0.1, 0.01, 10, m) / etas.size)
        se_n = math.sqrt(qk.n_hat_variance(0.01, m) / ns.size)
        assert abs(etas.mean() - 0.1) < 3 * se_eta + 4 * 0.1 / m  # O(1/m) bias of T_hat^2
        assert abs(ns.mean() - 0.01) < 3 * se_n + 2.0 / m


def test_epsilon_budget():
    assert qk.total_epsilon(qk.ProtocolParams()) == pytest.approx(4.5e-10, rel=0.2)


def fig4_rate(n):
    return qk.composable_rate(qk.ProtocolParams(block_size=n), 0.1272832019, 1.008542e-3)


def test_composable_rate_large_block_limit():
    p = qk.ProtocolParams(block_size=10**40)
    rec = qk.composable_rate(p, 0.2, 0.001)
    expected = p.p_ec * (1 - p.r_pe) * qk.asymptotic_rate(p.mu, 0.2, 0.001, p.beta)
    assert rec.rate == pytest.approx(expected, rel=1e-9)


def test_composable_rate_monotone_in_block_size():
    rates = [fig4_rate(int(n)).rate_raw for n in np.logspace(5, 13, 40)]
    assert np.all(np.diff(rates) >= 0)


def test_composable_rate_rejects_empty_key():
    with pytest.raises(ValueError):
        qk.composable_rate(qk.ProtocolParams(block_size=1, r_pe=0.5), 0.1, 0.0)


@given(st.floats(0.01, 0.99), st.floats(0.0, 0.05), st.integers(10**4, 10**14))
def test_composable_rate_below_asymptotic(eta, n_bar, n):
    p = qk.ProtocolParams(block_size=n)
    rec = qk.composable_rate(p, eta, n_bar)
    assert rec.rate_raw <= p.p_ec * (1 - p.r_pe) * qk.asymptotic_rate(p.mu, eta, n_bar, p.beta) + 1e-12
    assert rec.rate >= 0 and rec.rate >= rec.rate_raw
