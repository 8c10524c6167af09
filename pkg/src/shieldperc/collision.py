"""Closed-form collision bounds for two independent oriented walks.

Everything here is a function of the dimension ``d`` only.  The quantities are

* ``B(d)``  -- an upper bound on ``p_d``, the probability that the walks ever
  meet again after time 0;
* ``t(x)``  -- the map with ``t(p_d) = p_2`` (return to l1-distance 2);
* ``g(d)``  -- an upper bound on ``rho_d`` and hence on the bond threshold.

Both ``B`` and ``g`` end with the block series

    T(d) = sum_{j >= 1} d^{-jd} (jd)! / (j!)^d

whose terms decay like ``j^{(1-d)/2}``.  Two evaluations are offered:

``"exact"``
    partial sum to ``J`` terms plus a remainder enclosed between two Hurwitz
    zeta combinations obtained from the Stirling series with error bounds.
    The reported value uses the upper end of the enclosure, so it is still a
    valid upper bound; ``tail_error`` is the enclosure width.
``"stirling"``
    every term replaced by its two-sided-Stirling upper bound
    ``sqrt(2 pi d) e^{1/(12d)} (2 pi)^{-d/2} j^{(1-d)/2}``, summed in closed
    form with the Riemann zeta function.  Cruder but cheap; this is what the
    published high-dimensional table values correspond to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import zeta

from .errors import ConvergenceError, DomainError

TailMode = Literal["exact", "stirling"]

DEFAULT_TOL = 1e-18
MAX_TAIL_TERMS = 10_000_000
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_dim(d: int, minimum: int = 2) -> None:
    if not isinstance(d, (int, np.integer)) or d < minimum:
        raise DomainError(f"dimension must be an integer >= {minimum}, got {d!r}")


# --------------------------------------------------------------------------
# log-factorials

def stirling_correction(n):
    """``log n! - (n log n - n + log(2 pi n)/2)`` for ``n >= 1``.

    Uses the asymptotic series for ``n >= 16`` (truncation below 1e-17) and
    ``lgamma`` otherwise.  Accepts scalars or integer arrays.
    """
    arr = np.asarray(n, dtype=float)
    out = np.empty_like(arr)
    big = arr >= 16
    x = arr[big]
    inv = 1.0 / x
    inv2 = inv * inv
    out[big] = inv * (1 / 12 - inv2 * (1 / 360 - inv2 * (1 / 1260 - inv2 * (1 / 1680 - inv2 / 1188))))
    small = arr[~big]
    if small.size:
        lg = np.array([math.lgamma(v + 1.0) for v in small])
        out[~big] = lg - (small * np.log(small) - small + 0.5 * np.log(small) + _HALF_LOG_2PI)
    return out if out.ndim else float(out)


def log_block_term(d: int, j):
    """``log(d^{-jd} (jd)! / (j!)^d)`` computed without large cancellations."""
    j = np.asarray(j, dtype=float)
    s = 0.5 * (d - 1)
    log_c = 0.5 * math.log(2 * math.pi * d) - 0.5 * d * math.log(2 * math.pi)
    phi = stirling_correction(j * d) - d * stirling_correction(j)
    return log_c - s * np.log(j) + phi


def max_pointmass(d: int, k: int) -> float:
    """Upper bound on ``max_{x in H_k} P(S_k = x)`` for one oriented walk.

    ``k!/d^k`` while ``k <= d``; beyond that the value at the last completed
    block ``j = floor(k/d)``, i.e. ``d^{-jd} (jd)!/(j!)^d``, which dominates by
    monotonicity of the maximal point mass.
    """
    _check_dim(d, 1)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if k <= d:
        return math.exp(math.lgamma(k + 1) - k * math.log(d))
    j = k // d
    return float(math.exp(log_block_term(d, j)))


# --------------------------------------------------------------------------
# the block series T(d)

@dataclass(frozen=True)
class TailSum:
    value: float          # upper bound on sum_{j >= j_from} of the block terms
    error: float          # value minus a lower bound on the same sum
    terms: int            # explicit terms summed


def _remainder_enclosure(d: int, J: int) -> tuple[float, float]:
    """Lower/upper bounds on ``sum_{j > J}`` of the block terms.

    Write a term as ``C j^{-s} exp(phi(j))``.  From
    ``1/(12n) - 1/(360 n^3) < mu(n) < 1/(12n)`` one gets
    ``a u - beta u^3 <= phi <= a u + gamma u^3`` with ``u = 1/j``; the
    exponential is then squeezed between cubic/quintic polynomials in ``u``
    and each monomial sums to a Hurwitz zeta value.
    """
    s = 0.5 * (d - 1)
    c = math.exp(0.5 * math.log(2 * math.pi * d) - 0.5 * d * math.log(2 * math.pi))
    a = 1.0 / (12 * d) - d / 12.0
    beta = 1.0 / (360.0 * d**3)
    gamma = d / 360.0
    u0 = 1.0 / (J + 1)
    if abs(a) * u0 > 1.0:
        raise DomainError("remainder enclosure needs J + 1 >= |a|")
    gamma_eff = gamma * math.exp(gamma * u0**3)
    # coefficients of u^0..u^6
    lo_exp = np.array([1.0, a, a * a / 2, a**3 / 6])
    hi_exp = np.array([1.0, a, a * a / 2])
    lower = np.convolve(lo_exp, [1.0, 0.0, 0.0, -beta])
    upper = np.convolve(hi_exp, [1.0, 0.0, 0.0, gamma_eff])
    z = np.array([zeta(s + k, J + 1) for k in range(len(lower))])
    lo = c * math.fsum(lower * z[: len(lower)])
    hi = c * math.fsum(upper * z[: len(upper)])
    return max(lo, 0.0), hi


def block_tail(d: int, j_from: int = 1, tol: float = DEFAULT_TOL,
               max_terms: int = MAX_TAIL_TERMS) -> TailSum:
    """Rigorous upper evaluation of ``sum_{j >= j_from} d^{-jd}(jd)!/(j!)^d``.

    The cut-off ``J`` doubles until the remainder enclosure is narrower than
    ``tol``.  Requires ``d >= 4`` (the series diverges for ``d <= 3``).
    """
    _check_dim(d, 4)
    if tol <= 0:
        raise DomainError("tol must be positive")
    J = max(j_from - 1, 2 * d, 32)
    while True:
        lo, hi = _remainder_enclosure(d, J)
        if hi - lo < tol:
            break
        if J >= max_terms:
            raise ConvergenceError(
                f"block tail for d={d} not within tol={tol:g} after {J} terms "
                f"(enclosure width {hi - lo:.3e})")
        J = min(2 * J, max_terms)
    if J >= j_from:
        js = np.arange(j_from, J + 1, dtype=float)
        partial = math.fsum(np.exp(log_block_term(d, js)))
        terms = J - j_from + 1
    else:
        partial, terms = 0.0, 0
    return TailSum(value=partial + hi, error=hi - lo, terms=terms)


def stirling_block_tail(d: int) -> float:
    """Closed-form upper bound on the full block series from ``j = 1``."""
    _check_dim(d, 4)
    c = math.sqrt(2 * math.pi * d) * math.exp(1 / (12 * d)) / (2 * math.pi) ** (d / 2)
    return c * float(zeta(0.5 * (d - 1)))


def _tail(d: int, mode: TailMode, tol: float) -> TailSum:
    if mode == "exact":
        return block_tail(d, 1, tol)
    if mode == "stirling":
        return TailSum(stirling_block_tail(d), 0.0, 0)
    raise DomainError(f"unknown tail mode {mode!r}")


def pointmass_tail_bound(d: int, k_from: int, tol: float = 1e-15) -> float:
    """Upper bound on ``sum_{k >= k_from} max_pointmass(d, k)``; needs ``d >= 4``."""
    _check_dim(d, 4)
    k_from = max(k_from, 1)
    total = []
    k = k_from
    while k <= d:
        total.append(max_pointmass(d, k))
        k += 1
    # k now lies in block j = k // d, whose (d - k % d) members share one bound
    j = k // d
    first = (j + 1) * d - k
    if first:
        total.append(first * max_pointmass(d, k))
        j += 1
    total.append(d * block_tail(d, j, tol).value)
    return math.fsum(total)


# --------------------------------------------------------------------------
# B, t, g

def _finite_factorial_sum(d: int, extra_power: int) -> float:
    """``sum_{k=5}^{d} k! / d^{k + extra_power}`` in log space."""
    if d < 5:
        return 0.0
    ks = np.arange(5, d + 1)
    logs = np.array([math.lgamma(k + 1) for k in ks]) - (ks + extra_power) * math.log(d)
    return math.fsum(np.exp(logs))


def _tau_head(d: int) -> list[float]:
    """Exact/upper values of P(tau = k), k = 1..4, as used in B(d)."""
    a = (3 * d - 4) / d**2
    b = (d * d - 3 * d + 3) / d**2
    return [
        1 / d,
        (1 - 1 / d) / d**2,
        a * (1 - 1 / d) / d**2,
        (a * a + b * 4 / d**2) * (1 - 1 / d) / d**2,
    ]


def _tau_hat_head(d: int) -> list[float]:
    """Exact/upper values of P(tau_hat = k), k = 0, 2, 3, 4, as used in g(d)."""
    a = (3 * d - 4) / d**2
    b = (d * d - 3 * d + 3) / d**2
    return [
        1 / d,
        1 / d**3 - 1 / d**4,
        a * (1 - 1 / d) / d**3,
        (a * a + b * 4 / d**2 + (1 - 1 / d) / d**2) * (1 - 1 / d) / d**3,
    ]


def B_bound(d: int, tol: float = DEFAULT_TOL, tail: TailMode = "exact") -> tuple[float, TailSum]:
    """Upper bound on ``p_d``; returns the value and the tail record."""
    _check_dim(d, 4)
    ts = _tail(d, tail, tol / d)
    parts = _tau_head(d) + [_finite_factorial_sum(d, 0), d * ts.value]
    return math.fsum(parts), TailSum(d * ts.value, d * ts.error, ts.terms)


def g_bound(d: int, tol: float = DEFAULT_TOL, tail: TailMode = "exact") -> tuple[float, TailSum]:
    """Upper bound on ``rho_d`` (and so on the bond threshold)."""
    _check_dim(d, 4)
    ts = _tail(d, tail, tol)
    parts = _tau_hat_head(d) + [_finite_factorial_sum(d, 1), ts.value]
    return math.fsum(parts), ts


def t_map(d: int, x: float) -> float:
    """``((d^2+1)x - d - 1) / (d^2 x - d)``; nondecreasing for ``x > 1/d``."""
    if x <= 1 / d:
        raise DomainError(f"t(x) needs x > 1/d, got x={x}")
    return ((d * d + 1) * x - d - 1) / (d * d * x - d)


@dataclass(frozen=True)
class CollisionBounds:
    d: int
    B: float
    p2_upper: float
    g: float
    series_terms_used: int
    tail_error: float
    tail_mode: str = "exact"


def collision_bounds(d: int, tol: float = DEFAULT_TOL, tail: TailMode = "exact") -> CollisionBounds:
    """B(d), t(B(d)) and g(d) for ``d >= 4``."""
    _check_dim(d, 4)
    if tol <= 0:
        raise DomainError("tol must be positive")
    B, tb = B_bound(d, tol, tail)
    g, tg = g_bound(d, tol, tail)
    return CollisionBounds(
        d=d, B=B, p2_upper=t_map(d, B), g=g,
        series_terms_used=max(tb.terms, tg.terms),
        tail_error=max(tb.error, tg.error),
        tail_mode=tail,
    )
