"""Numerical kernels shared by the physics modules.

Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals, a truncating
wrapper for integrands on ``[0, inf)``, and the few special functions the
link models need.  Integrands must accept and return numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import ConvergenceError

ArrayFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 20000

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


_DEFAULT_SPEC = QuadratureSpec()


def default_spec() -> QuadratureSpec:
    return _DEFAULT_SPEC


def set_default_tolerance(relative_tolerance: float) -> QuadratureSpec:
    """Replace the process-wide default relative tolerance (used by the CLI)."""
    global _DEFAULT_SPEC
    _DEFAULT_SPEC = QuadratureSpec(
        relative_tolerance=relative_tolerance,
        absolute_tolerance=_DEFAULT_SPEC.absolute_tolerance,
        max_subdivisions=_DEFAULT_SPEC.max_subdivisions,
    )
    return _DEFAULT_SPEC


# Kronrod 15-point nodes on [-1, 1] (non-negative half) and weights.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss 7-point weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WK_FULL = np.concatenate([_WK[:-1], _WK[::-1]])
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5]] = _WG[:3]
_WG_FULL[[9, 11, 13]] = _WG[2::-1]
_WG_FULL[7] = _WG[3]


def _gk15(f: ArrayFunc, lo: np.ndarray, hi: np.ndarray):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise ValueError("integrand returned a non-finite value")
    kronrod = half * (fx @ _WK_FULL)
    gauss = half * (fx @ _WG_FULL)
    return kronrod, np.abs(kronrod - gauss)


def integrate_finite(
    f: ArrayFunc,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    breakpoints: Sequence[float] | np.ndarray | None = None,
) -> float:
    """Integrate ``f`` over ``[a, b]`` with globally adaptive GK15.

    ``breakpoints`` seeds the initial partition, which helps with oscillatory
    or kinked integrands.  All pending intervals are refined in one vectorized
    batch per pass.
    """
    spec = spec or _DEFAULT_SPEC
    if b < a:
        raise ValueError("integrate_finite requires a <= b")
    if a == b:
        return 0.0
    edges = [a, b]
    if breakpoints is not None:
        inner = [p for p in np.asarray(breakpoints, dtype=float).ravel() if a < p < b]
        edges = [a, *sorted(inner), b]
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    est, err = _gk15(f, lo, hi)
    length = b - a

    while True:
        total = float(est.sum())
        total_err = float(err.sum())
        target = max(spec.absolute_tolerance, spec.relative_tolerance * abs(total))
        if total_err <= target:
            return total
        # local budget proportional to interval width
        local = target * (hi - lo) / length
        split = err > local
        # stop refining intervals at the resolution limit
        width_ok = (hi - lo) > 64 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi))
        split &= width_ok
        if not split.any():
            if total_err <= 10 * target:
                return total
            raise ConvergenceError("quadrature hit the floating-point resolution limit", total, total_err)
        if lo.size + int(split.sum()) > spec.max_subdivisions:
            raise ConvergenceError(
                f"no convergence within {spec.max_subdivisions} subdivisions", total, total_err
            )
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_est, new_err = _gk15(f, new_lo, new_hi)
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        est = np.concatenate([est[keep], new_est])
        err = np.concatenate([err[keep], new_err])


def integrate_semi_infinite(
    f: ArrayFunc,
    spec: QuadratureSpec | None = None,
    initial_cutoff: float = 1.0,
    period: float | None = None,
    max_doublings: int = 60,
) -> float:
    """Integrate a decaying ``f`` over ``[0, inf)`` by adaptive truncation.

    The range is covered in doubling chunks ``[0, T], [T, 2T], ...`` until a
    chunk contributes less than the absolute tolerance and the integrand at the
    cutoff is negligible.  ``period`` pre-splits each chunk for oscillatory
    integrands.
    """
    spec = spec or _DEFAULT_SPEC
    if initial_cutoff <= 0:
        raise ValueError("initial_cutoff must be positive")

    def chunk(lo: float, hi: float) -> float:
        bp = None
        if period is not None and period > 0:
            n = int((hi - lo) / period)
            if n > 1:
                bp = np.linspace(lo, hi, n + 1)[1:-1]
        return integrate_finite(f, lo, hi, spec, breakpoints=bp)

    lo, hi = 0.0, float(initial_cutoff)
    total = chunk(lo, hi)
    for _ in range(max_doublings):
        lo, hi = hi, 2.0 * hi
        piece = chunk(lo, hi)
        total += piece
        edge = float(np.max(np.abs(f(np.array([hi])))))
        if abs(piece) <= spec.absolute_tolerance and edge * hi <= spec.absolute_tolerance:
            return total
    raise ConvergenceError("tail bound not reached", total, abs(piece))


def bessel_j0(x):
    """Bessel function of the first kind, order zero."""
    return special.j0(x)


def bessel_j1(x):
    """Bessel function of the first kind, order one."""
    return special.j1(x)


def erf(x):
    """Error function; exactly +/-1 for |x| >= 10."""
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) >= 10.0, np.sign(x), special.erf(x))
    return float(out) if out.ndim == 0 else out


def erfc(x):
    """Complementary error function, accurate in the far tail."""
    out = special.erfc(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out

