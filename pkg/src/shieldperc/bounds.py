"""Admissibility conditions for shielded-path survival and the tables built on them.

For ``q = 1 - p`` the second-moment argument succeeds when

    lhs1 = p / (1 - d^{-1/(2d-1)}) < 1                 (equivalently d q^{2d-1} > 1)
    lhs2 = f(q) / q < 1,   f(q) = (1/d - 1/d^2)/(d q^{2d-1} - 1) + p2 - 1/d^2

where ``p2`` is (an upper bound on) the probability that the walk difference
returns to l1-distance 2.  Any ``p`` passing both is a lower bound on the
shielded threshold.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal, Mapping

import numpy as np

from .collision import DEFAULT_TOL, collision_bounds
from .errors import DomainError

# Simulation estimates of the bond threshold; not rigorous.
PC_BOND = {5: 0.1181718, 6: 0.0942019, 7: 0.0786752, 8: 0.0677083, 9: 0.0594960}
PC_BOND_ALT = {5: 0.1181715, 6: 0.0942016, 7: 0.0786752, 8: 0.0677084, 9: 0.0594960}
PC_CITATIONS = {"primary": "Grassberger 2003", "alternate": "Mertens-Moore 2018"}

DEFAULT_MARGIN = 1e-5
BISECTION_TOL = 1e-9


def _check_dim(d: int, minimum: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < minimum:
        raise DomainError(f"dimension must be an integer >= {minimum}, got {d!r}")


def upper_bound_pshield(d: int, lambda_value: float | None = None) -> float:
    """``1 - lambda^{-1/(2d-1)}``, with ``lambda = 2d - 1`` by default.

    ``lambda`` stands for a connective constant, so it must be at least 1.
    """
    _check_dim(d, 1)
    lam = 2 * d - 1 if lambda_value is None else lambda_value
    if lam < 1:
        raise DomainError(f"lambda must be >= 1, got {lam}")
    return 1.0 - lam ** (-1.0 / (2 * d - 1))


def shield_exponent_gap(d: int, q: float) -> float:
    """``d q^{2d-1} - 1``; positive exactly when the first condition holds."""
    return d * q ** (2 * d - 1) - 1.0


def f_of_q(d: int, q: float, p2: float) -> float:
    if not 0 < p2 < 1:
        raise DomainError(f"p2 must lie in (0, 1), got {p2}")
    gap = shield_exponent_gap(d, q)
    if gap <= 0:
        raise DomainError(f"d q^(2d-1) = {gap + 1:.6g} <= 1; f(q) is undefined")
    return (1 / d - 1 / d**2) / gap + p2 - 1 / d**2


@dataclass(frozen=True)
class MomentBound:
    mgf: float       # E q^{-#O - (2d-1)#Z}
    ratio: float     # bound on sup_n E N_n^2 / (E N_n)^2


def moment_ratio_bound(d: int, p: float, p2: float) -> MomentBound:
    """Closed form of ``E q^{-#O-(2d-1)#Z}`` and the second-moment ratio it controls."""
    q = 1.0 - p
    if not 0 <= p < 1:
        raise DomainError(f"p must lie in [0, 1), got {p}")
    if not p2 < 1:
        raise DomainError(f"p2 < 1 violated (p2 = {p2})")
    gap = shield_exponent_gap(d, q)
    if gap <= 0:
        raise DomainError(f"d q^(2d-1) > 1 violated (value {gap + 1:.6g})")
    f = f_of_q(d, q, p2)
    if f >= q:
        raise DomainError(f"f(q) < q violated (f = {f:.6g}, q = {q:.6g})")
    a = gap + 1.0
    mgf = (1 - p2) * (1 - 1 / d) * a / gap / (q - f)
    return MomentBound(mgf=mgf, ratio=mgf / q ** (2 * d))


def mgf_excursion_sum(d: int, p: float, p2: float, rel_tol: float = 1e-12) -> float:
    """The same expectation summed term by term over excursions.

    ``(1-p2) * E q^{-(2d-1)Z_1} * sum_k q^{-k} f^{k-1}``, with the first factor
    itself a geometric sum over the length of the initial run at the origin.
    """
    q = 1.0 - p
    r = q ** (-(2 * d - 1)) / d
    if r >= 1:
        raise DomainError("d q^(2d-1) > 1 violated")
    first, term, j = 0.0, (1 - 1 / d), 0
    while True:
        first += term
        term *= r
        j += 1
        if term < rel_tol * first * (1 - r):
            break
    f = f_of_q(d, q, p2)
    ratio = f / q
    if ratio >= 1:
        raise DomainError("f(q) < q violated")
    total, term = 0.0, 1.0 / q
    while True:
        total += term
        term *= ratio
        if term < rel_tol * total * (1 - ratio):
            break
    return (1 - p2) * first * total


@dataclass(frozen=True)
class Theorem2Check:
    d: int
    p: float
    p2_upper: float
    lhs1: float
    lhs2: float
    passed: bool


def theorem2_check(d: int, p: float, p2_upper: float) -> Theorem2Check:
    _check_dim(d, 4)
    if not 0 <= p < 1:
        raise DomainError(f"p must lie in [0, 1), got {p}")
    q = 1.0 - p
    lhs1 = p / (1.0 - d ** (-1.0 / (2 * d - 1)))
    gap = shield_exponent_gap(d, q)
    if gap <= 0:
        lhs2 = math.inf
    else:
        lhs2 = (p2_upper - 1 / d**2 + (1 / d) * (1 - 1 / d) / gap) / q
    # lhs2 < 1 is f(q) < q; lhs1 < 1 is d q^{2d-1} > 1
    passed = lhs1 < 1 and lhs2 < 1 and gap > 0
    return Theorem2Check(d, p, p2_upper, lhs1, lhs2, passed)


def max_lhs(d: int, p: float, p2_upper: float) -> float:
    c = theorem2_check(d, p, p2_upper)
    return max(c.lhs1, c.lhs2)


def pshield_lower_bound(d: int, p2_upper: float, margin: float = DEFAULT_MARGIN,
                        tol: float = BISECTION_TOL, samples: int = 64) -> float:
    """Largest ``p`` with ``max(lhs1, lhs2) <= 1 - margin``, by bisection.

    Both left sides increase with ``p`` on ``(0, p*)`` where
    ``d (1-p*)^{2d-1} = 1``; this is re-checked on a sample grid.
    """
    _check_dim(d, 4)
    if not 0 < margin < 1:
        raise DomainError(f"margin must lie in (0, 1), got {margin}")
    target = 1.0 - margin
    p_star = 1.0 - d ** (-1.0 / (2 * d - 1))
    if max_lhs(d, 0.0, p2_upper) > target:
        raise DomainError(
            f"empty admissible set: at p=0 the max left side is "
            f"{max_lhs(d, 0.0, p2_upper):.6g} > {target:.6g}")
    grid = np.linspace(0.0, p_star, samples, endpoint=False)
    vals = [max_lhs(d, float(x), p2_upper) for x in grid]
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise DomainError("max left side is not monotone on the search bracket")
    lo, hi = 0.0, p_star
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if max_lhs(d, mid, p2_upper) <= target:
            lo = mid
        else:
            hi = mid
    return lo


# --------------------------------------------------------------------------
# reports and tables

@dataclass(frozen=True)
class BoundReport:
    d: int
    g: float
    B: float
    p2_upper: float
    lhs1_at_g: float
    lhs2_at_g: float
    p_lower: float
    max_lhs_at_p_lower: float
    upper_bound: float
    p_c: float | None = None
    exceeds_pc: bool | None = None
    # p_lower truncated to 7 decimals (stays admissible) and the max left side there
    p_lower_7dp: float | None = None
    max_lhs_at_7dp: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def bound_report(d: int, margin: float = DEFAULT_MARGIN, tol: float = DEFAULT_TOL,
                 p_c: float | None = None) -> BoundReport:
    cb = collision_bounds(d, tol)
    at_g = theorem2_check(d, cb.g, cb.p2_upper)
    p_low = pshield_lower_bound(d, cb.p2_upper, margin)
    p7 = math.floor(p_low * 1e7) / 1e7
    return BoundReport(
        d=d, g=cb.g, B=cb.B, p2_upper=cb.p2_upper,
        lhs1_at_g=at_g.lhs1, lhs2_at_g=at_g.lhs2,
        p_lower=p_low, max_lhs_at_p_lower=max_lhs(d, p_low, cb.p2_upper),
        upper_bound=upper_bound_pshield(d),
        p_c=p_c, exceeds_pc=None if p_c is None else p_low > p_c,
        p_lower_7dp=p7, max_lhs_at_7dp=max_lhs(d, p7, cb.p2_upper),
    )


TablePolicy = Literal["published", "exact", "stirling"]


@dataclass(frozen=True)
class Table1Row:
    d: int
    g: float            # p at which lhs2 is evaluated
    g_lhs1: float       # p at which lhs1 is evaluated
    B: float
    p2_upper: float
    lhs1: float
    lhs2: float
    passed: bool
    policy: str


STIRLING_FROM_DIM = 15


def table1_row(d: int, policy: TablePolicy = "published", tol: float = DEFAULT_TOL) -> Table1Row:
    """Left sides of both conditions at ``p = g(d)``, ``p2 = t(B(d))``.

    ``policy`` picks how the block series inside g and B is evaluated:
    ``"exact"`` and ``"stirling"`` use one mode throughout; ``"published"``
    mirrors the way the reference table was produced -- lhs1 from the
    Stirling-bounded g for every d, lhs2 from exact g and B below
    ``STIRLING_FROM_DIM`` and Stirling-bounded ones from there on.
    """
    if policy == "published":
        stir = collision_bounds(d, tol, "stirling")
        main = stir if d >= STIRLING_FROM_DIM else collision_bounds(d, tol, "exact")
        c1 = theorem2_check(d, stir.g, stir.p2_upper)
    elif policy in ("exact", "stirling"):
        main = collision_bounds(d, tol, policy)
        c1 = None
    else:
        raise DomainError(f"unknown table policy {policy!r}")
    c2 = theorem2_check(d, main.g, main.p2_upper)
    c1 = c1 or c2
    return Table1Row(
        d=d, g=main.g, g_lhs1=c1.p, B=main.B, p2_upper=main.p2_upper,
        lhs1=c1.lhs1, lhs2=c2.lhs2, passed=c1.lhs1 < 1 and c2.lhs2 < 1,
        policy=policy,
    )


def table1(policy: TablePolicy = "published", dims=range(9, 19),
           tol: float = DEFAULT_TOL) -> list[Table1Row]:
    return [table1_row(d, policy, tol) for d in dims]


def table2(pc_values: Mapping[int, float] | None = None, dims=range(5, 10),
           margin: float = DEFAULT_MARGIN, tol: float = DEFAULT_TOL) -> list[BoundReport]:
    pcs = dict(PC_BOND if pc_values is None else pc_values)
    missing = [d for d in dims if d not in pcs]
    if missing:
        raise DomainError(f"no p_c value for dimension(s) {missing}")
    return [bound_report(d, margin, tol, p_c=pcs[d]) for d in dims]


def asymptotic_ratio(d: int, margin: float = DEFAULT_MARGIN) -> float:
    """Certified lower bound divided by ``log d / (2d)``."""
    _check_dim(d, 4)
    cb = collision_bounds(d)
    return pshield_lower_bound(d, cb.p2_upper, margin) / (math.log(d) / (2 * d))
