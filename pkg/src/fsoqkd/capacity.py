"""Repeaterless key-capacity bounds for pure-loss and thermal-loss channels.

All rates are in bits per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicsDomainError


@dataclass(frozen=True)
class ChannelPoint:
    eta: float
    n_bar: float = 0.0

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError("transmissivity must lie in (0, 1)")
        if self.n_bar < 0:
            raise ValueError("thermal photon number must be non-negative")

    @property
    def eve_noise(self) -> float:
        return self.n_bar / (1.0 - self.eta)


def entropy_h(x):
    """h(x) = (1+x) log2(1+x) - x log2 x, with h(0) = 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("entropy_h needs x >= 0")
    safe = np.where(x > 0, x, 1.0)
    out = np.where(x > 0, (1.0 + x) * np.log2(1.0 + x) - x * np.log2(safe), 0.0)
    return float(out) if out.ndim == 0 else out


def plob_pure_loss(eta: float) -> float:
    """PLOB bound -log2(1 - eta); returns +inf at eta = 1."""
    if not 0 <= eta <= 1:
        raise ValueError("transmissivity must lie in [0, 1]")
    if eta == 1:
        return math.inf
    return -math.log1p(-eta) / math.log(2.0)


def thermal_upper_bound_raw(p: ChannelPoint) -> float:
    if p.n_bar > p.eta:
        raise PhysicsDomainError(f"thermal upper bound needs n_bar <= eta (got {p.n_bar} > {p.eta})")
    x = p.eve_noise
    return plob_pure_loss(p.eta) - x * math.log2(p.eta) - entropy_h(x)


def thermal_upper_bound(p: ChannelPoint) -> float:
    return max(0.0, thermal_upper_bound_raw(p))


def rci_lower_bound_raw(p: ChannelPoint) -> float:
    """Reverse coherent information, unfloored (negative means no key)."""
    return plob_pure_loss(p.eta) - entropy_h(p.eve_noise)


def rci_lower_bound(p: ChannelPoint) -> float:
    return max(0.0, rci_lower_bound_raw(p))


def all_bounds(eta: float, n_bar: float) -> dict:
    """PLOB, thermal upper and RCI lower bounds, failing per quantity."""
    out: dict = {"plob": plob_pure_loss(eta)}
    try:
        p = ChannelPoint(eta, n_bar)
    except ValueError as exc:
        out["k_ub"] = {"error": str(exc)}
        out["k_lb"] = {"error": str(exc)}
        return out
    try:
        out["k_ub"] = thermal_upper_bound(p)
    except PhysicsDomainError as exc:
        out["k_ub"] = {"error": str(exc)}
    out["k_lb"] = rci_lower_bound(p)
    out["k_lb_raw"] = rci_lower_bound_raw(p)
    return out
