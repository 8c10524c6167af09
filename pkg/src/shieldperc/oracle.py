"""Exhaustive checks of the path-pair edge counting on small instances.

For oriented paths ``gamma = (x_0..x_n)`` and ``gamma' = (x'_0..x'_n)`` from
the origin, ``E`` is the set of lattice edges with one endpoint on each path
(both endpoints may coincide on a shared vertex).  The claims checked are

    #E1 = 2d + (2d-1) #Z + #O1        #E2 <= #O2        #E <= 2d + (2d-1) #Z + #O

where ``E1`` holds the edges touching some ``x_k`` with ``k in Z u {0}`` and
``O1`` the ``k in O`` followed by a coincidence at ``k + 1``.

Also here: backtracking counts of self-avoiding walks and of the restricted
class where a new vertex may touch only its immediate predecessor, and an exact
second moment of the shielded path count computed two independent ways.
"""

from __future__ import annotations

import functools
import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, ResourceLimitError

Point = tuple[int, ...]

DEFAULT_PAIR_CAP = 1_000_000
DEFAULT_WALK_CAP = 1_000_000
MAX_BRUTE_EDGES = 28
_CHUNK_BITS = 22


def _check_dim(d: int) -> None:
    if not isinstance(d, int) or d < 1:
        raise DomainError(f"dimension must be an integer >= 1, got {d!r}")


def _neighbors(v: Point):
    for i in range(len(v)):
        for s in (1, -1):
            w = list(v)
            w[i] += s
            yield tuple(w)


def _edge(a: Point, b: Point) -> tuple[Point, Point]:
    return (a, b) if a < b else (b, a)


def _l1(a: Point, b: Point) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


def oriented_paths(d: int, n: int):
    """All ``d^n`` oriented paths as vertex tuples, in lexicographic step order."""
    for steps in itertools.product(range(d), repeat=n):
        v = [0] * d
        path = [tuple(v)]
        for i in steps:
            v[i] += 1
            path.append(tuple(v))
        yield tuple(path)


def adjacent_edges(vertices) -> set[tuple[Point, Point]]:
    return {_edge(v, w) for v in vertices for w in _neighbors(v)}


def adjacent_edge_count(d: int, vertex_set) -> int:
    """Number of lattice edges with at least one endpoint in ``vertex_set``."""
    vs = set(vertex_set)
    if not vs:
        raise DomainError("vertex set must be nonempty")
    if any(len(v) != d for v in vs):
        raise DomainError(f"all vertices must have {d} coordinates")
    return len(adjacent_edges(vs))


@dataclass(frozen=True)
class PathPair:
    d: int
    n: int
    gamma: tuple[Point, ...]
    gamma_prime: tuple[Point, ...]
    Z_count: int
    O_count: int
    E_count: int
    E1_count: int
    E2_count: int
    O1_count: int
    O2_count: int

    @property
    def bound(self) -> int:
        return 2 * self.d + (2 * self.d - 1) * self.Z_count + self.O_count

    @property
    def shield_exponent(self) -> int:
        """Exponent of ``q`` in P(all sites of both paths shielded)."""
        return 2 * (2 * self.d + self.n * (2 * self.d - 1)) - self.E_count


def path_pair(gamma, gamma_prime) -> PathPair:
    gamma, gamma_prime = tuple(map(tuple, gamma)), tuple(map(tuple, gamma_prime))
    n = len(gamma) - 1
    d = len(gamma[0])
    Z = {k for k in range(1, n + 1) if gamma[k] == gamma_prime[k]}
    O = {k for k in range(1, n + 1) if _l1(gamma[k], gamma_prime[k]) == 2}
    O1 = {k for k in O if k + 1 in Z}
    on_prime = set(gamma_prime)
    E = {_edge(u, w) for u in gamma for w in _neighbors(u) if u in on_prime or w in on_prime}
    shared = {gamma[k] for k in Z | {0}}
    E1 = {e for e in E if e[0] in shared or e[1] in shared}
    return PathPair(d, n, gamma, gamma_prime, len(Z), len(O), len(E), len(E1),
                    len(E) - len(E1), len(O1), len(O) - len(O1))


@dataclass
class EdgeBoundReport:
    d: int
    n: int
    instances_checked: int = 0
    violations: dict[str, int] = field(default_factory=lambda: {
        "edge_bound": 0, "step1_equality": 0, "step2_inequality": 0,
        "partition": 0, "exponent_identity": 0})
    worst_slack: int | None = None       # min over pairs of bound - #E
    step2_equality_cases: int = 0        # pairs with #E2 == #O2
    first_violation: tuple | None = None

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    def as_dict(self) -> dict:
        return {
            "d": self.d, "n": self.n,
            "instances_checked": self.instances_checked,
            "violations": dict(self.violations),
            "total_violations": self.total_violations,
            "worst_slack": self.worst_slack,
            "step2_equality_cases": self.step2_equality_cases,
        }


def verify_edge_bound(d: int, n: int, cap_pairs: int = DEFAULT_PAIR_CAP,
                      check_exponent: bool = True) -> EdgeBoundReport:
    """Check all three counting claims on every ordered pair of oriented paths.

    With ``check_exponent`` the union's adjacent-edge count is also recomputed
    and compared with ``2(2d + n(2d-1)) - #E``.
    """
    _check_dim(d)
    if n < 0:
        raise DomainError("n must be >= 0")
    pairs = d ** (2 * n)
    if pairs > cap_pairs:
        raise ResourceLimitError(
            f"d={d}, n={n} has {pairs} path pairs, above the cap of {cap_pairs}")
    paths = list(oriented_paths(d, n))
    rep = EdgeBoundReport(d, n)
    for g in paths:
        for gp in paths:
            pp = path_pair(g, gp)
            bad = []
            if pp.E_count > pp.bound:
                bad.append("edge_bound")
            if pp.E1_count != 2 * d + (2 * d - 1) * pp.Z_count + pp.O1_count:
                bad.append("step1_equality")
            if pp.E2_count > pp.O2_count:
                bad.append("step2_inequality")
            if pp.Z_count + pp.O_count > n:
                bad.append("partition")
            if check_exponent and adjacent_edge_count(d, set(g) | set(gp)) != pp.shield_exponent:
                bad.append("exponent_identity")
            for b in bad:
                rep.violations[b] += 1
            if bad and rep.first_violation is None:
                rep.first_violation = (g, gp, tuple(bad))
            slack = pp.bound - pp.E_count
            rep.worst_slack = slack if rep.worst_slack is None else min(rep.worst_slack, slack)
            rep.step2_equality_cases += pp.E2_count == pp.O2_count
            rep.instances_checked += 1
    return rep


# --------------------------------------------------------------------------
# walk enumeration

def _walk_cap_check(d: int, n: int, cap: int) -> None:
    worst = 2 * d * (2 * d - 1) ** (n - 1) if n >= 1 else 1
    if worst > cap:
        raise ResourceLimitError(
            f"enumeration for d={d}, n={n} may visit {worst} walks, above the cap of {cap}")


def _backtrack(d: int, n: int, restricted: bool) -> int:
    origin = (0,) * d
    visited = {origin}
    count = 0

    def extend(tip: Point, depth: int) -> None:
        nonlocal count
        if depth == n:
            count += 1
            return
        for w in _neighbors(tip):
            if w in visited:
                continue
            # the new vertex may touch no earlier vertex except the current tip
            if restricted and any(u in visited and u != tip for u in _neighbors(w)):
                continue
            visited.add(w)
            extend(w, depth + 1)
            visited.remove(w)

    extend(origin, 0)
    return count


def enumerate_saw(d: int, n: int, cap: int = DEFAULT_WALK_CAP) -> int:
    """Number of ``n``-step self-avoiding walks from the origin."""
    _check_dim(d)
    if n < 0:
        raise DomainError("n must be >= 0")
    _walk_cap_check(d, n, cap)
    return _backtrack(d, n, restricted=False)


def enumerate_xi(d: int, n: int, cap: int = DEFAULT_WALK_CAP) -> int:
    """Number of vertex sequences ``0 = y_0..y_n`` with ``y_j ~ y_{j-1}`` and
    ``y_j`` not adjacent to any ``y_i``, ``i < j - 1``."""
    _check_dim(d)
    if n < 0:
        raise DomainError("n must be >= 0")
    _walk_cap_check(d, n, cap)
    return _backtrack(d, n, restricted=True)


def saw_root_ratios(d: int, n_max: int, cap: int = DEFAULT_WALK_CAP) -> dict[int, float]:
    """``count^{1/n}`` for ``n = 1..n_max``; a crude stand-in for the connective constant."""
    return {n: enumerate_saw(d, n, cap) ** (1.0 / n) for n in range(1, n_max + 1)}


# --------------------------------------------------------------------------
# exact second moment of the shielded path count

def second_moment_pair_sum(d: int, n: int, q: Fraction | float) -> Fraction | float:
    """``sum over path pairs of q^{2(2d + n(2d-1)) - #E}``."""
    _check_dim(d)
    exps = Counter(path_pair(g, gp).shield_exponent
                   for g in oriented_paths(d, n) for gp in oriented_paths(d, n))
    return sum(c * q**e for e, c in sorted(exps.items()))


def _simplex_vertices(d: int, n: int) -> list[Point]:
    return [v for v in itertools.product(range(n + 1), repeat=d) if sum(v) <= n]


@functools.lru_cache(maxsize=16)
def second_moment_coefficients(d: int, n: int, max_edges: int = MAX_BRUTE_EDGES) -> tuple[int, ...]:
    """Integer ``c_k`` with ``E N_n^2 = sum_k c_k p^k q^(E-k)`` over all configurations.

    ``E`` is the number of edges adjacent to the simplex of oriented-path
    vertices; every one of the ``2^E`` open/closed assignments is visited and
    ``N_n^2`` is tallied by its number of open edges.
    """
    _check_dim(d)
    verts = _simplex_vertices(d, n)
    edges = sorted(adjacent_edges(verts))
    m = len(edges)
    if m > max_edges:
        raise ResourceLimitError(f"{m} adjacent edges exceed the brute-force cap of {max_edges}")
    index = {e: i for i, e in enumerate(edges)}
    masks = {v: sum(1 << index[_edge(v, w)] for w in _neighbors(v)) for v in verts}
    layers = sorted(verts, key=sum)
    # counts stay tiny for the sizes allowed here (N_n <= d^n)
    dt = np.int16 if d**n < 2**7 else np.int64
    coef = np.zeros(m + 1, dtype=np.int64)
    chunk = 1 << min(_CHUNK_BITS, m)
    for start in range(0, 1 << m, chunk):
        cfg = np.arange(start, start + chunk, dtype=np.uint32)
        count: dict[Point, np.ndarray] = {}
        for v in layers:
            shielded = (cfg & np.uint32(masks[v])) == 0
            if sum(v) == 0:
                acc = np.ones(chunk, dtype=dt)
            else:
                acc = np.zeros(chunk, dtype=dt)
                for i in range(d):
                    if v[i]:
                        w = list(v)
                        w[i] -= 1
                        acc += count[tuple(w)]
            count[v] = acc * shielded.astype(dt)
        total = sum(count[v] for v in layers if sum(v) == n)
        opened = np.bitwise_count(cfg)
        coef += np.bincount(opened, weights=(total * total).astype(np.float64),
                            minlength=m + 1).astype(np.int64)
    return tuple(int(c) for c in coef)


def second_moment_bruteforce(d: int, n: int, q: Fraction | float,
                             max_edges: int = MAX_BRUTE_EDGES) -> Fraction | float:
    coef = second_moment_coefficients(d, n, max_edges)
    m = len(coef) - 1
    p = 1 - q
    return sum(c * p**k * q ** (m - k) for k, c in enumerate(coef) if c)
