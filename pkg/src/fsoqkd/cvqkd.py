"""GG02 coherent-state CV-QKD with homodyne detection and reverse reconciliation.

Asymptotic rate from the Alice-Bob covariance matrix, worst-case channel
parameters from a finite parameter-estimation sample, and the composable
finite-size key rate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .capacity import entropy_h
from .errors import PhysicsDomainError
from .numerics import erfc


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol and security settings; defaults follow the usual benchmark set."""

    mu: float = 10.0
    beta: float = 0.98
    block_size: int = 10**9
    r_pe: float = 0.1
    d: int = 2**5
    eps_s: float = 1e-10
    eps_h: float = 1e-10
    eps_cor: float = 1e-10
    w: float = 6.34
    p_ec: float = 0.9
    nu_det: int = 1

    def __post_init__(self):
        if self.mu < 1:
            raise ValueError("TMSV variance mu must be >= 1")
        if not 0 <= self.beta <= 1:
            raise ValueError("reconciliation efficiency must lie in [0, 1]")
        if not 0 < self.r_pe < 1:
            raise ValueError("r_pe must lie in (0, 1)")
        for name in ("eps_s", "eps_h", "eps_cor"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not 0 < self.p_ec <= 1:
            raise ValueError("p_ec must lie in (0, 1]")
        if self.d < 1:
            raise ValueError("digitization d must be >= 1")
        if self.nu_det not in (1, 2):
            raise ValueError("nu_det must be 1 or 2")

    @property
    def m_pe(self) -> int:
        # round half up
        return int(math.floor(self.r_pe * self.block_size + 0.5))

    @property
    def n_key(self) -> int:
        return int(self.block_size) - self.m_pe

    @property
    def fer(self) -> float:
        return 1.0 - self.p_ec

    def with_block_size(self, n: int) -> "ProtocolParams":
        return ProtocolParams(**{**asdict(self), "block_size": int(n)})


@dataclass(frozen=True)
class CovarianceTriplet:
    a: float
    b: float
    c: float

    @property
    def det_ab(self) -> float:
        return self.a * self.b - self.c**2

    def matrix(self) -> np.ndarray:
        """The 4x4 covariance matrix in (qA, pA, qB, pB) ordering."""
        one = np.eye(2)
        z = np.diag([1.0, -1.0])
        return np.block([[self.a * one, self.c * z], [self.c * z, self.b * one]])


@dataclass(frozen=True)
class ChannelEstimate:
    eta_hat: float
    n_hat: float
    eta_wc: float
    n_wc: float
    m: int
    eps_pe: float


@dataclass(frozen=True)
class RateRecord:
    rate: float
    rate_raw: float
    r_pe: float
    r_asy: float
    delta_aep: float
    omega: float
    n_key: int
    m_pe: int
    eta_wc: float
    n_wc: float
    eps_pe: float
    epsilon: float

    def bits_per_second(self, clock: float) -> float:
        return self.rate * clock

    def to_dict(self) -> dict:
        return asdict(self)


def covariance(mu: float, eta: float, n_bar: float) -> CovarianceTriplet:
    if mu < 1 or not 0 <= eta <= 1 or n_bar < 0:
        raise ValueError("need mu >= 1, eta in [0, 1], n_bar >= 0")
    return CovarianceTriplet(
        a=mu,
        b=eta * (mu - 1.0) + 2.0 * n_bar + 1.0,
        c=math.sqrt(eta * (mu * mu - 1.0)),
    )


def mutual_information(mu: float, eta: float, n_bar: float) -> float:
    """Alice-Bob mutual information for homodyne detection [bits]."""
    return 0.5 * math.log2(1.0 + eta * (mu - 1.0) / (2.0 * n_bar + 1.0))


def _h_of_nu(nu: float) -> float:
    return entropy_h(max(0.0, (nu - 1.0) / 2.0))


def symplectic_eigenvalues(t: CovarianceTriplet) -> tuple[float, float, float]:
    """(nu_plus, nu_minus, nu_c) of the triplet; nu_c is conditioned on Bob's homodyne."""
    s = math.sqrt(max(0.0, (t.a + t.b) ** 2 - 4.0 * t.c**2))
    nu_plus = 0.5 * (s + (t.b - t.a))
    nu_minus = 0.5 * (s - (t.b - t.a))
    nu_c = math.sqrt(t.a * t.det_ab / t.b)
    return nu_plus, nu_minus, nu_c


def holevo_bound(t: CovarianceTriplet) -> float:
    """Eve's Holevo information on Bob's homodyne outcome [bits]."""
    if t.a < 1 or t.b < 1 or t.det_ab < 1 - 1e-12:
        raise PhysicsDomainError(f"unphysical covariance triplet {t}")
    nu_plus, nu_minus, nu_c = symplectic_eigenvalues(t)
    return _h_of_nu(nu_plus) + _h_of_nu(nu_minus) - _h_of_nu(nu_c)


def asymptotic_rate(mu: float, eta: float, n_bar: float, beta: float) -> float:
    """beta * I_AB - chi_BE, unfloored."""
    t = covariance(mu, eta, n_bar)
    return beta * mutual_information(mu, eta, n_bar) - holevo_bound(t)


def pe_error_probability(w: float) -> float:
    return 0.5 * erfc(w / math.sqrt(2.0))


def worst_case(eta: float, n_bar: float, m: int, w: float, sigma_x2: float) -> ChannelEstimate:
    """Worst-case transmissivity and noise at ``w`` standard deviations."""
    if m < 2:
        raise ValueError("parameter estimation needs m >= 2 samples")
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1)")
    sigma_z2 = 2.0 * n_bar + 1.0
    eta_wc = eta - 2.0 * w * math.sqrt((2.0 * eta**2 + eta * sigma_z2 / sigma_x2) / m)
    n_wc = n_bar + w * sigma_z2 / math.sqrt(2.0 * m)
    return ChannelEstimate(eta, n_bar, max(0.0, eta_wc), n_wc, int(m), pe_error_probability(w))


def _estimators(x: np.ndarray, y: np.ndarray, sigma_x2: float | None):
    """(eta_hat, n_hat); ``sigma_x2=None`` normalises by the sample moment of x."""
    m = x.shape[-1]
    xy = np.einsum("...i,...i->...", x, y)
    if sigma_x2 is None:
        t_hat = xy / np.einsum("...i,...i->...", x, x)
    else:
        t_hat = xy / (m * sigma_x2)
    resid = y - t_hat[..., None] * x
    sz2_hat = np.einsum("...i,...i->...", resid, resid) / m
    return t_hat**2, (sz2_hat - 1.0) / 2.0


def simulate_estimation(eta_true: float, n_true: float, mu: float, m: int, seed: int | None = None,
                        noiseless: bool = False, empirical_sigma_x: bool = False) -> tuple[float, float]:
    """Draw ``m`` pairs through y = sqrt(eta) x + z and return (eta_hat, n_hat).

    Uses numpy's PCG64 generator, so a fixed seed reproduces the same stream
    on every platform.  ``noiseless`` drops the channel noise term.  By
    default T_hat is normalised by the modulation variance mu - 1, which is
    what the leading-order estimator variance assumes; ``empirical_sigma_x``
    normalises by the sample second moment of x instead.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    rng = np.random.default_rng(seed)
    sigma_x2 = mu - 1.0
    x = rng.standard_normal(m) * math.sqrt(sigma_x2)
    z = np.zeros(m) if noiseless else rng.standard_normal(m) * math.sqrt(2.0 * n_true + 1.0)
    y = math.sqrt(eta_true) * x + z
    eta_hat, n_hat = _estimators(x, y, None if empirical_sigma_x else sigma_x2)
    return float(eta_hat), float(n_hat)


def simulate_estimation_batch(eta_true: float, n_true: float, mu: float, m: int, trials: int,
                              seed: int | None = None, chunk: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Repeat the estimation ``trials`` times; returns arrays of estimates."""
    rng = np.random.default_rng(seed)
    sigma_x = math.sqrt(mu - 1.0)
    sigma_z = math.sqrt(2.0 * n_true + 1.0)
    root_eta = math.sqrt(eta_true)
    etas = np.empty(trials)
    ns = np.empty(trials)
    for start in range(0, trials, chunk):
        k = min(chunk, trials - start)
        x = rng.standard_normal((k, m))
        x *= sigma_x
        y = rng.standard_normal((k, m))
        y *= sigma_z
        y += root_eta * x
        etas[start:start + k], ns[start:start + k] = _estimators(x, y, mu - 1.0)
    return etas, ns


def eta_hat_variance(eta: float, n_bar: float, mu: float, m: int) -> float:
    """Leading-order variance of the transmissivity estimator."""
    return 4.0 / m * eta**2 * (2.0 + (2.0 * n_bar + 1.0) / (eta * (mu - 1.0)))


def n_hat_variance(n_bar: float, m: int) -> float:
    """Variance of (sigma_z2_hat - 1) / 2, i.e. sigma_z^4 / (2m)."""
    return (2.0 * n_bar + 1.0) ** 2 / (2.0 * m)


def delta_aep(p: ProtocolParams) -> float:
    return 4.0 * math.log2(math.sqrt(p.d) + 2.0) * math.sqrt(
        math.log2(18.0 / (p.p_ec**2 * p.eps_s**4))
    )


def omega_term(p: ProtocolParams) -> float:
    return math.log2(p.p_ec * (1.0 - p.eps_s**2 / 3.0)) + 2.0 * math.log2(math.sqrt(2.0) * p.eps_h)


def total_epsilon(p: ProtocolParams) -> float:
    return p.eps_cor + p.eps_s + p.eps_h + 2.0 * p.p_ec * pe_error_probability(p.w)


def composable_rate(p: ProtocolParams, eta: float, n_bar: float) -> RateRecord:
    """Composable finite-size key rate [bits/use] with its penalty breakdown."""
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1)")
    n = p.n_key
    if n < 1:
        raise ValueError(f"block size {p.block_size} leaves no symbols for the key")
    est = worst_case(eta, n_bar, p.m_pe, p.w, p.mu - 1.0)
    r_pe = asymptotic_rate(p.mu, est.eta_wc, est.n_wc, p.beta)
    d_aep = delta_aep(p)
    om = omega_term(p)
    raw = p.p_ec * (1.0 - p.r_pe) * (r_pe - d_aep / math.sqrt(n) + om / n)
    return RateRecord(
        rate=max(0.0, raw),
        rate_raw=raw,
        r_pe=r_pe,
        r_asy=asymptotic_rate(p.mu, eta, n_bar, p.beta),
        delta_aep=d_aep,
        omega=om,
        n_key=n,
        m_pe=p.m_pe,
        eta_wc=est.eta_wc,
        n_wc=est.n_wc,
        eps_pe=est.eps_pe,
        epsilon=total_epsilon(p),
    )
