"""Seeded Monte Carlo for shielded vertices and paired oriented walks.

Random streams are numpy ``Philox`` generators keyed by ``(seed, stream_id)``;
Philox is counter based, so the ``k``-th uniform drawn from a stream is a
pure function of the key and ``k``.  Edge states are drawn in a fixed order
(config, direction, then C order over positions), which makes every
configuration reproducible from its key alone.  Batched runs use fixed-size
blocks with ``stream_id`` equal to the block index, so results do not depend
on how blocks might be scheduled.

Lattice layout: interior vertices are ``{0..n}^d``.  Edge arrays cover base
points ``{-1..n+1}^d`` (array index = coordinate + 1); entry ``[i][v]`` is the
edge ``{v, v + e_i}``.  That one-layer halo means every interior vertex has
all ``2d`` incident edges sampled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DomainError, ResourceLimitError

MASK64 = (1 << 64) - 1
BLOCK_CONFIGS = 4096
BLOCK_WALKS = 1 << 16
DEFAULT_MEMORY_CAP = 1 << 30   # bytes


def make_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    key = np.array([seed & MASK64, stream_id & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _check_args(d: int, n: int, p: float) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")
    if n < 0:
        raise DomainError(f"box extent must be >= 0, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")


def _check_memory(count: int, d: int, n: int, cap_bytes: int) -> None:
    need = count * d * (n + 3) ** d * 9      # float64 draws + bool states
    if need > cap_bytes:
        raise ResourceLimitError(
            f"sampling {count} configuration(s) with d={d}, n={n} needs ~{need} bytes "
            f"(cap {cap_bytes})")


def _draw_open(d: int, n: int, p: float, rng: np.random.Generator, count: int) -> np.ndarray:
    u = rng.random((count, d) + (n + 3,) * d)
    return u < p


@dataclass
class LatticeConfig:
    d: int
    n: int
    p: float
    seed: int
    stream_id: int
    open_edges: np.ndarray = field(repr=False)   # bool, shape (d, n+3, ..., n+3)

    @property
    def shielded(self) -> np.ndarray:
        return shielded_mask(self.open_edges[None])[0]

    def packed_edges(self) -> np.ndarray:
        return np.packbits(self.open_edges)


def sample_configuration(d: int, n: int, p: float, seed: int, stream_id: int = 0,
                         cap_bytes: int = DEFAULT_MEMORY_CAP) -> LatticeConfig:
    _check_args(d, n, p)
    _check_memory(1, d, n, cap_bytes)
    edges = _draw_open(d, n, p, make_rng(seed, stream_id), 1)[0]
    return LatticeConfig(d, n, p, seed, stream_id, edges)


def shielded_mask(open_edges: np.ndarray) -> np.ndarray:
    """Shielded interior vertices for a batch of edge arrays ``(count, d, L, ..., L)``."""
    d = open_edges.shape[1]
    L = open_edges.shape[2]
    inner = slice(1, L - 1)
    closed = np.ones((open_edges.shape[0],) + (L - 2,) * d, dtype=bool)
    for i in range(d):
        e = open_edges[:, i]
        fwd = e[(slice(None),) + (inner,) * d]
        back_idx = [inner] * d
        back_idx[i] = slice(0, L - 2)
        bwd = e[(slice(None),) + tuple(back_idx)]
        closed &= ~fwd
        closed &= ~bwd
    return closed


def shielded_mask_scan(config: LatticeConfig) -> np.ndarray:
    """Vertex-by-vertex recomputation of the shielded mask (reference)."""
    d, n = config.d, config.n
    out = np.zeros((n + 1,) * d, dtype=bool)
    for v in itertools.product(range(n + 1), repeat=d):
        ok = True
        for i in range(d):
            a = tuple(c + 1 for c in v)
            b = list(a)
            b[i] -= 1
            if config.open_edges[(i,) + a] or config.open_edges[(i,) + tuple(b)]:
                ok = False
                break
        out[v] = ok
    return out


# --------------------------------------------------------------------------
# oriented shielded paths

def _simplex_layers(d: int, n: int) -> list[list[tuple[int, ...]]]:
    layers: list[list[tuple[int, ...]]] = [[] for _ in range(n + 1)]
    for v in itertools.product(range(n + 1), repeat=d):
        s = sum(v)
        if s <= n:
            layers[s].append(v)
    return layers


def count_paths_batch(shielded: np.ndarray, n: int) -> np.ndarray:
    """Number of oriented shielded paths from the origin to ``H_n``, per config.

    Counts go through ``int64`` while ``d^n`` fits, Python integers otherwise.
    """
    d = shielded.ndim - 1
    if shielded.shape[1] < n + 1:
        raise DomainError("configuration does not cover the simplex up to H_n")
    dtype = np.int64 if d**n < 2**62 else object
    counts: dict[tuple[int, ...], np.ndarray] = {}
    origin = (0,) * d
    counts[origin] = shielded[(slice(None),) + origin].astype(dtype)
    for layer in _simplex_layers(d, n)[1:]:
        for v in layer:
            acc = np.zeros(shielded.shape[0], dtype=dtype)
            for i in range(d):
                if v[i]:
                    w = list(v)
                    w[i] -= 1
                    acc = acc + counts[tuple(w)]
            counts[v] = acc * shielded[(slice(None),) + v].astype(dtype)
    total = np.zeros(shielded.shape[0], dtype=dtype)
    for v in _simplex_layers(d, n)[n]:
        total = total + counts[v]
    return total


def count_oriented_shielded_paths(config: LatticeConfig, n: int | None = None) -> int:
    n = config.n if n is None else n
    return int(count_paths_batch(config.shielded[None], n)[0])


def count_paths_bruteforce(config: LatticeConfig, n: int | None = None) -> int:
    """Enumerate all ``d^n`` oriented paths and test each vertex (reference)."""
    n = config.n if n is None else n
    sh = config.shielded
    total = 0
    for steps in itertools.product(range(config.d), repeat=n):
        v = [0] * config.d
        ok = bool(sh[tuple(v)])
        for i in steps:
            if not ok:
                break
            v[i] += 1
            ok = bool(sh[tuple(v)])
        total += ok
    return total


@dataclass
class MomentEstimate:
    d: int
    n: int
    p: float
    trials: int
    seed: int
    mean: float
    mean_se: float
    second_moment: float
    second_moment_se: float
    survival: float
    survival_se: float
    expected_mean: float          # q^{2d} (d q^{2d-1})^n
    paley_zygmund: float          # mean^2 / second moment

    @property
    def mean_z(self) -> float:
        return (self.mean - self.expected_mean) / self.mean_se if self.mean_se > 0 else 0.0

    @property
    def mean_consistent(self) -> bool:
        if self.mean_se == 0:
            return math.isclose(self.mean, self.expected_mean, rel_tol=1e-12, abs_tol=1e-300)
        return abs(self.mean_z) <= 3.0

    @property
    def pz_holds(self) -> bool:
        return self.survival >= self.paley_zygmund - 3 * self.survival_se


def first_moment(d: int, n: int, p: float) -> float:
    q = 1.0 - p
    return q ** (2 * d) * (d * q ** (2 * d - 1)) ** n


def sample_path_counts(d: int, n: int, p: float, trials: int, seed: int,
                       cap_bytes: int = DEFAULT_MEMORY_CAP, block: int = BLOCK_CONFIGS) -> np.ndarray:
    """``N_n`` for ``trials`` independent configurations, in trial order."""
    _check_args(d, n, p)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    _check_memory(min(block, trials), d, n, cap_bytes)
    out = []
    for b, start in enumerate(range(0, trials, block)):
        m = min(block, trials - start)
        edges = _draw_open(d, n, p, make_rng(seed, b), m)
        out.append(count_paths_batch(shielded_mask(edges), n))
    return np.concatenate(out)


def estimate_moments(d: int, n: int, p: float, trials: int, seed: int,
                     cap_bytes: int = DEFAULT_MEMORY_CAP) -> MomentEstimate:
    counts = sample_path_counts(d, n, p, trials, seed, cap_bytes).astype(float)
    sq = counts**2
    pos = (counts > 0).astype(float)
    k = len(counts)

    def se(x):
        return float(x.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0

    mean, second = float(counts.mean()), float(sq.mean())
    return MomentEstimate(
        d=d, n=n, p=p, trials=trials, seed=seed,
        mean=mean, mean_se=se(counts),
        second_moment=second, second_moment_se=se(sq),
        survival=float(pos.mean()), survival_se=se(pos),
        expected_mean=first_moment(d, n, p),
        paley_zygmund=mean**2 / second if second > 0 else 0.0,
    )


# --------------------------------------------------------------------------
# shielded clusters in a box

@dataclass
class ComponentStats:
    sizes: dict[int, int]      # component size -> number of components
    largest: int
    n_components: int
    spanning: bool             # some component touches two opposite faces


def shielded_components(config: LatticeConfig) -> ComponentStats:
    sh = config.shielded
    labels, k = ndimage.label(sh, structure=ndimage.generate_binary_structure(sh.ndim, 1))
    if k == 0:
        return ComponentStats({}, 0, 0, False)
    sizes = np.bincount(labels.ravel())[1:]
    hist = {int(s): int(c) for s, c in zip(*np.unique(sizes, return_counts=True))}
    spanning = False
    for axis in range(sh.ndim):
        lo = np.unique(np.take(labels, 0, axis=axis))
        hi = np.unique(np.take(labels, -1, axis=axis))
        if np.intersect1d(lo[lo > 0], hi[hi > 0]).size:
            spanning = True
            break
    return ComponentStats(hist, int(sizes.max()), int(k), spanning)


def spanning_frequency(d: int, n: int, p: float, configs: int, seed: int) -> float:
    hits = sum(shielded_components(sample_configuration(d, n, p, seed, s)).spanning
               for s in range(configs))
    return hits / configs


# --------------------------------------------------------------------------
# paired walks

@dataclass
class PairedWalkSample:
    d: int
    horizon: int
    trials: int
    seed: int
    z_counts: np.ndarray = field(repr=False)         # #Z_n at the horizon
    o_counts: np.ndarray = field(repr=False)         # #O_n at the horizon
    first_collision: np.ndarray = field(repr=False)  # first k >= 1 with S_k = S'_k, or 0
    snapshots: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict, repr=False)

    @property
    def p_d_hat(self) -> float:
        """Fraction of pairs that met by the horizon (a lower estimate of p_d)."""
        return float(np.mean(self.first_collision > 0))

    @property
    def p_d_se(self) -> float:
        x = self.p_d_hat
        return math.sqrt(x * (1 - x) / self.trials)

    def histogram(self, which: str = "Z") -> dict[int, int]:
        arr = self.z_counts if which == "Z" else self.o_counts
        vals, cnt = np.unique(arr, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    def mgf(self, q: float, horizon: int | None = None) -> tuple[float, float]:
        """Empirical ``E q^{-#O_n - (2d-1)#Z_n}`` and its standard error."""
        horizon = self.horizon if horizon is None else horizon
        if horizon == self.horizon:
            z, o = self.z_counts, self.o_counts
        else:
            z, o = self.snapshots[horizon]
        w = np.exp(-(o + (2 * self.d - 1) * z.astype(float)) * math.log(q))
        return float(w.mean()), float(w.std(ddof=1) / math.sqrt(len(w)))


def paired_walk_sample(d: int, horizon: int, trials: int, seed: int,
                       checkpoints=(), block: int = BLOCK_WALKS) -> PairedWalkSample:
    """Run ``trials`` independent pairs of oriented walks for ``horizon`` steps."""
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")
    if horizon < 1 or trials < 1:
        raise DomainError("horizon and trials must be >= 1")
    checkpoints = sorted({c for c in checkpoints if 1 <= c < horizon})
    zs, os_, fs = [], [], []
    snaps: dict[int, list] = {c: [] for c in checkpoints}
    for b, start in enumerate(range(0, trials, block)):
        m = min(block, trials - start)
        rng = make_rng(seed, b)
        diff = np.zeros((m, d), dtype=np.int32)
        rows = np.arange(m)
        h = np.zeros(m, dtype=np.int32)
        z = np.zeros(m, dtype=np.int32)
        o = np.zeros(m, dtype=np.int32)
        first = np.zeros(m, dtype=np.int32)
        for k in range(1, horizon + 1):
            steps = rng.integers(0, d, size=(2, m))
            a = diff[rows, steps[0]]
            diff[rows, steps[0]] = a + 1
            h += np.abs(a + 1) - np.abs(a)
            c = diff[rows, steps[1]]
            diff[rows, steps[1]] = c - 1
            h += np.abs(c - 1) - np.abs(c)
            at0 = h == 0
            z += at0
            o += h == 2
            first[at0 & (first == 0)] = k
            if k in snaps:
                snaps[k].append((z.copy(), o.copy()))
        zs.append(z)
        os_.append(o)
        fs.append(first)
    snapshots = {c: (np.concatenate([s[0] for s in v]), np.concatenate([s[1] for s in v]))
                 for c, v in snaps.items()}
    return PairedWalkSample(d, horizon, trials, seed, np.concatenate(zs),
                            np.concatenate(os_), np.concatenate(fs), snapshots)
