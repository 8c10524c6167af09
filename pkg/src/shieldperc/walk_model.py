"""Exact dynamic programming for the difference of two oriented walks.

Each walk steps to ``x + e_i`` with ``i`` uniform on ``{1..d}``, so the
difference ``D_n = S_n - S'_n`` moves by ``e_i - e_j`` with probability
``1/d^2`` per ordered pair.  The step law is invariant under permuting
coordinates, so states are stored as coordinate-sorted tuples; this keeps the
state count small enough to push ``d <= 6`` past ten steps exactly.

Probabilities are floats by default; pass ``exact=True`` for
``fractions.Fraction`` arithmetic.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .collision import max_pointmass, pointmass_tail_bound
from .errors import DomainError, ResourceLimitError

DEFAULT_STATE_CAP = 5_000_000

State = tuple[int, ...]


def _check_dim(d: int) -> None:
    if not isinstance(d, int) or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")


def h_transition(d: int, src: int, dst: int) -> Fraction:
    """One-step law of ``h = ||D||_1`` from ``h = 0`` or ``h = 2``.

    The row for ``src = 2`` is conditional on the difference being of the form
    ``e_i - e_j``, which is the only way to sit at l1-distance 2.
    """
    _check_dim(d)
    if src not in (0, 2):
        raise DomainError(f"source level must be 0 or 2, got {src}")
    if dst not in (0, 2, 4):
        raise DomainError(f"target level must be 0, 2 or 4, got {dst}")
    if src == 0:
        return {0: Fraction(1, d), 2: 1 - Fraction(1, d), 4: Fraction(0)}[dst]
    return {
        0: Fraction(1, d * d),
        2: Fraction(3 * d - 4, d * d),
        4: Fraction(d * d - 3 * d + 3, d * d),
    }[dst]


def _canon(v) -> State:
    return tuple(sorted(v))


def _successors(d: int, state: State) -> dict[State, int]:
    """Canonical successors with multiplicities out of ``d^2`` ordered pairs."""
    out: dict[State, int] = defaultdict(int)
    base = list(state)
    for i in range(d):
        for j in range(d):
            v = base.copy()
            v[i] += 1
            v[j] -= 1
            out[_canon(v)] += 1
    return out


@dataclass
class WalkDistribution:
    d: int
    step: int
    mass: dict[State, object]
    absorbed_mass: object = 0
    absorbed_history: list = field(default_factory=list)  # index k -> mass absorbed at step k
    exact: bool = False

    def total(self):
        return sum(self.mass.values()) + self.absorbed_mass

    def level_marginal(self) -> dict[int, object]:
        """Distribution of ``h = ||D||_1`` over the retained mass."""
        out: dict[int, object] = defaultdict(int)
        for s, m in self.mass.items():
            out[sum(abs(c) for c in s)] += m
        return dict(out)


def _origin(d: int) -> State:
    return (0,) * d


def evolve_difference_walk(d: int, steps: int, absorb_at_origin: bool = False,
                           exact: bool = False, cap_states: int = DEFAULT_STATE_CAP,
                           ) -> WalkDistribution:
    """Distribution of the canonical difference after ``steps`` steps.

    With ``absorb_at_origin`` the mass reaching the origin at a step ``k >= 1``
    is removed and recorded in ``absorbed_history[k]``, which makes the history
    the law of the first return time.
    """
    _check_dim(d)
    if steps < 0:
        raise DomainError("steps must be >= 0")
    one = Fraction(1) if exact else 1.0
    w = Fraction(1, d * d) if exact else 1.0 / (d * d)
    zero = _origin(d)
    mass: dict[State, object] = {zero: one}
    absorbed = 0 * one
    history = [0 * one]
    succ_cache: dict[State, dict[State, int]] = {}
    for k in range(1, steps + 1):
        nxt: dict[State, object] = defaultdict(lambda: 0 * one)
        for s, m in mass.items():
            sc = succ_cache.get(s)
            if sc is None:
                sc = succ_cache[s] = _successors(d, s)
            for t, mult in sc.items():
                nxt[t] += m * mult * w
        if len(nxt) > cap_states:
            raise ResourceLimitError(
                f"difference-walk DP exceeded {cap_states} states at step {k}")
        hit = nxt.get(zero, 0 * one)
        if absorb_at_origin:
            nxt.pop(zero, None)
            absorbed += hit
            history.append(hit)
        mass = dict(nxt)
    return WalkDistribution(d, steps, mass, absorbed, history if absorb_at_origin else [], exact)


def reference_level_marginals(d: int, steps: int) -> list[dict[int, Fraction]]:
    """Non-canonical DP over full difference vectors; returns h-marginals per step.

    Independent of the sorted-state machinery, used to validate it.
    """
    _check_dim(d)
    moves = []
    for i in range(d):
        for j in range(d):
            v = [0] * d
            v[i] += 1
            v[j] -= 1
            moves.append(tuple(v))
    mass = {_origin(d): Fraction(1)}
    w = Fraction(1, d * d)
    out = [{0: Fraction(1)}]
    for _ in range(steps):
        nxt: dict = defaultdict(Fraction)
        for s, m in mass.items():
            for mv in moves:
                nxt[tuple(a + b for a, b in zip(s, mv))] += m * w
        mass = nxt
        marg: dict = defaultdict(Fraction)
        for s, m in mass.items():
            marg[sum(abs(c) for c in s)] += m
        out.append(dict(marg))
    return out


@dataclass
class TauDistribution:
    d: int
    probs: dict[int, object]   # k -> P(time == k)
    tail_bound: float          # upper bound on P(k_max < time < infinity)

    def total(self):
        return sum(self.probs.values())


def tau_distribution(d: int, k_max: int, exact: bool = False,
                     cap_states: int = DEFAULT_STATE_CAP) -> TauDistribution:
    """Exact law of ``tau = inf{k >= 1 : D_k = 0}`` on ``1..k_max``."""
    _check_dim(d)
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    wd = evolve_difference_walk(d, k_max, absorb_at_origin=True, exact=exact,
                                cap_states=cap_states)
    probs = {k: wd.absorbed_history[k] for k in range(1, k_max + 1)}
    remaining = float(1 - sum(probs.values()))
    tail = pointmass_tail_bound(d, k_max + 1) if d >= 4 else math.inf
    return TauDistribution(d, probs, min(tail, max(remaining, 0.0)))


def tau_hat_distribution(d: int, k_max: int, exact: bool = False,
                         cap_states: int = DEFAULT_STATE_CAP) -> TauDistribution:
    """Exact law of ``tau_hat = inf{k >= 0 : D_k = D_{k+1} = 0}`` on ``0..k_max``.

    A walk sitting at the origin at time ``k`` (and not yet stopped) stops with
    probability ``1/d``; the surviving mass is propagated with that transition
    removed.
    """
    _check_dim(d)
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    one = Fraction(1) if exact else 1.0
    w = Fraction(1, d * d) if exact else 1.0 / (d * d)
    stay = Fraction(1, d) if exact else 1.0 / d
    zero = _origin(d)
    mass: dict[State, object] = {zero: one}
    probs: dict[int, object] = {}
    succ_cache: dict[State, dict[State, int]] = {}
    for k in range(k_max + 1):
        at_zero = mass.get(zero, 0 * one)
        probs[k] = at_zero * stay
        if k == k_max:
            break
        nxt: dict[State, object] = defaultdict(lambda: 0 * one)
        for s, m in mass.items():
            sc = succ_cache.get(s)
            if sc is None:
                sc = succ_cache[s] = _successors(d, s)
            for t, mult in sc.items():
                if s == zero and t == zero:
                    continue
                nxt[t] += m * mult * w
        if len(nxt) > cap_states:
            raise ResourceLimitError(
                f"tau_hat DP exceeded {cap_states} states at step {k + 1}")
        mass = dict(nxt)
    remaining = float(1 - sum(probs.values()))
    tail = pointmass_tail_bound(d, k_max + 1) / d if d >= 4 else math.inf
    return TauDistribution(d, probs, min(tail, max(remaining, 0.0)))


def exact_max_pointmass(d: int, k: int) -> Fraction:
    """``max_{x in H_k} P(S_k = x)`` for a single walk, by layer DP."""
    _check_dim(d)
    if k < 0:
        raise DomainError("k must be >= 0")
    layer = {_origin(d): Fraction(1)}
    w = Fraction(1, d)
    for _ in range(k):
        nxt: dict = defaultdict(Fraction)
        for s, m in layer.items():
            for i in range(d):
                v = list(s)
                v[i] += 1
                nxt[_canon(v)] += m * w
        layer = nxt
    # canonical states merge permutations; undo that to get a point mass
    best = Fraction(0)
    for s, m in layer.items():
        orbit = math.factorial(d)
        for _, grp in itertools.groupby(s):
            orbit //= math.factorial(len(list(grp)))
        best = max(best, m / orbit)
    return best


# closed forms kept next to the DP they are checked against

def tau_closed_form(d: int, k: int) -> Fraction:
    """Exact ``P(tau = k)`` for ``k in {1, 2, 3}``."""
    a = Fraction(3 * d - 4, d * d)
    return {
        1: Fraction(1, d),
        2: (1 - Fraction(1, d)) / d**2,
        3: a * (1 - Fraction(1, d)) / d**2,
    }[k]


def tau4_upper(d: int) -> Fraction:
    a = Fraction(3 * d - 4, d * d)
    b = Fraction(d * d - 3 * d + 3, d * d)
    return (a * a + b * Fraction(4, d * d)) * (1 - Fraction(1, d)) / d**2


def tau_hat_closed_form(d: int, k: int) -> Fraction:
    """Exact ``P(tau_hat = k)`` for ``k in {0, 1, 2, 3}``."""
    a = Fraction(3 * d - 4, d * d)
    return {
        0: Fraction(1, d),
        1: Fraction(0),
        2: Fraction(1, d**3) - Fraction(1, d**4),
        3: (1 - Fraction(1, d)) * a / d**3,
    }[k]


def tau_hat4_upper(d: int) -> Fraction:
    a = Fraction(3 * d - 4, d * d)
    b = Fraction(d * d - 3 * d + 3, d * d)
    return (a * a + b * Fraction(4, d * d) + (1 - Fraction(1, d)) / d**2) * (1 - Fraction(1, d)) / d**3


__all__ = [
    "h_transition", "evolve_difference_walk", "reference_level_marginals",
    "WalkDistribution", "TauDistribution", "tau_distribution",
    "tau_hat_distribution", "exact_max_pointmass", "max_pointmass",
    "tau_closed_form", "tau4_upper", "tau_hat_closed_form", "tau_hat4_upper",
]
