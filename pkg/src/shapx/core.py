"""Shared domain types: feature subsets, coalition games, Shapley-kernel
weights, and reproducible random streams.

Subsets are bit-sets packed into integers (feature ``i`` lives at bit ``i``),
so set algebra is integer arithmetic and a game value cache can be keyed by
the raw bits.  Kernel weights are computed per size class with exact rational
arithmetic and only converted to floats at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Union

import numpy as np

MAX_PLAYERS = 64
MAX_ENUMERATION = 24  # guard against runaway 2^d enumeration

EFFICIENCY_ATOL = 1e-8


class CapacityError(ValueError):
    """A request exceeds a hard size limit (player count, enumeration width)."""


class ConfigError(ValueError):
    """An estimator configuration is inconsistent with the game it is applied to."""


def binomial(d: int, s: int) -> int:
    """Exact binomial coefficient C(d, s) for 0 <= s <= d <= 64."""
    if not 0 <= s <= d:
        raise ValueError(f"binomial requires 0 <= s <= d, got d={d}, s={s}")
    if d > MAX_PLAYERS:
        raise CapacityError(f"binomial supports d <= {MAX_PLAYERS}, got d={d}")
    return math.comb(d, s)


def shapley_kernel_weight(d: int, s: int) -> float:
    """Shapley kernel weight (d-1) / (C(d,s) * s * (d-s)) for a size-s subset.

    Defined only for proper non-empty subsets, so requires d >= 2 and
    1 <= s <= d-1.  Computed as an exact rational and rounded once.
    """
    if d < 2:
        raise ValueError(f"kernel weight needs d >= 2 (no proper non-empty subset), got d={d}")
    if not 1 <= s <= d - 1:
        raise ValueError(f"kernel weight defined for 1 <= s <= d-1, got s={s}, d={d}")
    return float(Fraction(d - 1, binomial(d, s) * s * (d - s)))


@dataclass(frozen=True)
class KernelWeights:
    """Per-size Shapley kernel weights, their total mass and size distribution.

    ``omega_by_size[s]`` is the weight of one size-s subset (index 0 and d are
    NaN padding; valid sizes are 1..d-1).  ``gamma`` is the total mass over all
    proper non-empty subsets and ``size_probs[s]`` the probability that a
    kernel-distributed subset has size s.
    """

    d: int
    omega_by_size: np.ndarray
    gamma: float
    size_probs: np.ndarray

    def subset_prob(self, s: int) -> float:
        """Probability of one specific size-s subset under omega/gamma."""
        return float(self.omega_by_size[s]) / self.gamma


def kernel_normalizer(d: int) -> KernelWeights:
    """Build KernelWeights for d players; gamma is summed per size class, never
    by 2^d enumeration."""
    if d < 2:
        raise ValueError(f"kernel normalizer needs d >= 2, got d={d}")
    omega = np.full(d + 1, np.nan)
    mass = []
    for s in range(1, d):
        w = Fraction(d - 1, binomial(d, s) * s * (d - s))
        omega[s] = float(w)
        mass.append(binomial(d, s) * w)
    gamma = sum(mass)
    probs = np.zeros(d + 1)
    probs[1:d] = [float(m / gamma) for m in mass]
    return KernelWeights(d=d, omega_by_size=omega, gamma=float(gamma), size_probs=probs)


@dataclass(frozen=True)
class FeatureSubset:
    """A coalition S of the d players {0..d-1}, stored as a bit-set."""

    bits: int
    d: int

    def __post_init__(self):
        if not 1 <= self.d <= MAX_PLAYERS:
            raise CapacityError(f"player count must be in 1..{MAX_PLAYERS}, got {self.d}")
        if not 0 <= self.bits < (1 << self.d):
            raise ValueError(f"bits {self.bits:#x} out of range for d={self.d}")

    @classmethod
    def from_indices(cls, indices, d: int) -> "FeatureSubset":
        bits = 0
        for i in indices:
            if not 0 <= i < d:
                raise ValueError(f"feature index {i} out of range for d={d}")
            bits |= 1 << i
        return cls(bits, d)

    @classmethod
    def empty(cls, d: int) -> "FeatureSubset":
        return cls(0, d)

    @classmethod
    def full(cls, d: int) -> "FeatureSubset":
        return cls((1 << d) - 1, d)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def contains(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def complement(self) -> "FeatureSubset":
        return FeatureSubset(self.bits ^ ((1 << self.d) - 1), self.d)

    def indicator(self) -> np.ndarray:
        """0/1 vector of length d with ones on the members of S."""
        return (self.bits >> np.arange(self.d) & 1).astype(np.float64)

    def members(self) -> tuple:
        return tuple(i for i in range(self.d) if self.bits >> i & 1)

    def __iter__(self):
        return iter(self.members())


def enumerate_subsets(d: int, include_trivial: bool = True) -> Iterator[FeatureSubset]:
    """Yield every subset of d players exactly once, in ascending bit order.

    With ``include_trivial=False`` the empty and full sets are skipped.
    """
    if d > MAX_ENUMERATION:
        raise CapacityError(f"refusing to enumerate 2^{d} subsets (limit d <= {MAX_ENUMERATION})")
    lo, hi = (0, 1 << d) if include_trivial else (1, (1 << d) - 1)
    for bits in range(lo, hi):
        yield FeatureSubset(bits, d)


def popcounts(bits: np.ndarray) -> np.ndarray:
    """Vectorized population count of a uint64 array."""
    b = np.ascontiguousarray(bits, dtype=np.uint64)
    return np.unpackbits(b.view(np.uint8)).reshape(b.size, 64).sum(axis=1).reshape(b.shape)


def bits_to_indicators(bits: np.ndarray, d: int) -> np.ndarray:
    """Expand an array of subset bits to an (n, d) 0/1 indicator matrix."""
    b = np.asarray(bits, dtype=np.uint64)
    return (b[:, None] >> np.arange(d, dtype=np.uint64)[None, :] & np.uint64(1)).astype(np.float64)


def indicators_to_bits(member: np.ndarray) -> np.ndarray:
    """Pack an (n, d) boolean membership matrix into uint64 subset bits."""
    d = member.shape[1]
    pow2 = np.uint64(1) << np.arange(d, dtype=np.uint64)
    return (member.astype(np.uint64) * pow2[None, :]).sum(axis=1, dtype=np.uint64)


class CoalitionGame:
    """A value function v over subsets of d players, with memoized evaluations.

    ``evaluate`` maps a FeatureSubset to a float and must be deterministic.
    A vectorized path can be supplied either as ``batch_evaluate`` (uint64 bits
    array -> value array) or as a precomputed ``table`` of all 2^d values
    indexed by bits; estimators always go through the cache/table so repeated
    subsets cost a single model call.
    """

    def __init__(
        self,
        evaluate: Optional[Callable[[FeatureSubset], float]],
        d: int,
        batch_evaluate: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        table: Optional[np.ndarray] = None,
    ):
        if not 1 <= d <= MAX_PLAYERS:
            raise CapacityError(f"player count must be in 1..{MAX_PLAYERS}, got {d}")
        if evaluate is None and batch_evaluate is None and table is None:
            raise ValueError("game needs an evaluate callable, a batch_evaluate, or a table")
        self.evaluate = evaluate
        self.d = d
        self._batch = batch_evaluate
        self._table = None if table is None else np.asarray(table, dtype=np.float64)
        if self._table is not None and self._table.shape != (1 << d,):
            raise ValueError(f"value table must have 2^{d} entries, got {self._table.shape}")
        self._cache: dict[int, float] = {}
        self.v_empty = self.value_of_bits(0)
        self.v_full = self.value_of_bits((1 << d) - 1)

    @property
    def v_all(self) -> float:
        """Total payoff to allocate: v(N) - v(empty)."""
        return self.v_full - self.v_empty

    def value(self, subset: FeatureSubset) -> float:
        if subset.d != self.d:
            raise ValueError(f"subset has d={subset.d}, game has d={self.d}")
        return self.value_of_bits(subset.bits)

    def value_of_bits(self, bits: int) -> float:
        if self._table is not None:
            return float(self._table[bits])
        got = self._cache.get(bits)
        if got is None:
            if self.evaluate is not None:
                got = float(self.evaluate(FeatureSubset(bits, self.d)))
            else:
                got = float(self._batch(np.array([bits], dtype=np.uint64))[0])
            self._cache[bits] = got
        return got

    def values_for_bits(self, bits: np.ndarray) -> np.ndarray:
        """Vectorized lookup of v over an array of subset bits."""
        arr = np.ascontiguousarray(bits, dtype=np.uint64)
        if self._table is not None:
            return self._table[arr]
        uniq, inverse = np.unique(arr, return_inverse=True)
        keys = [int(b) for b in uniq]
        missing = [k for k in keys if k not in self._cache]
        if missing:
            if self._batch is not None:
                vals = np.asarray(self._batch(np.asarray(missing, dtype=np.uint64)), dtype=np.float64)
            else:
                vals = np.array(
                    [self.evaluate(FeatureSubset(k, self.d)) for k in missing], dtype=np.float64
                )
            for k, v in zip(missing, vals):
                self._cache[k] = float(v)
        out = np.array([self._cache[k] for k in keys])
        return out[inverse].reshape(arr.shape)

    def all_values(self) -> np.ndarray:
        """Values of every subset, indexed by bits (requires d <= {MAX_ENUMERATION})."""
        if self.d > MAX_ENUMERATION:
            raise CapacityError(
                f"full value vector needs 2^{self.d} evaluations (limit d <= {MAX_ENUMERATION})"
            )
        return self.values_for_bits(np.arange(1 << self.d, dtype=np.uint64))


@dataclass(frozen=True)
class Attribution:
    """A length-d attribution vector together with its provenance."""

    phi: np.ndarray
    method: str
    samples_used: int
    seed: int = 0

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 1:
            raise ValueError(f"phi must be a vector, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValueError(f"non-finite attribution produced by {self.method!r}")
        if self.samples_used < 0:
            raise ValueError("samples_used must be >= 0")
        object.__setattr__(self, "phi", phi)

    @property
    def d(self) -> int:
        return self.phi.shape[0]

    def total(self) -> float:
        return float(self.phi.sum())

    def is_efficient(self, v_all: float, atol: float = EFFICIENCY_ATOL) -> bool:
        return abs(self.total() - v_all) <= atol


_SPLIT_FANOUT = 1 << 20


@dataclass(frozen=True)
class RandomSource:
    """Reproducible random stream identified by (seed, stream).

    Backed by the counter-based Philox generator, so equal (seed, stream)
    pairs reproduce identical draw sequences on any platform.  Streams are
    split, never shared: derive child streams with :meth:`child` or
    :meth:`split` and hand each worker its own.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=self.seed & (2**64 - 1), spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, k: int) -> "RandomSource":
        if k < 0 or k >= _SPLIT_FANOUT - 1:
            raise ValueError(f"child index out of range: {k}")
        return RandomSource(self.seed, self.stream * _SPLIT_FANOUT + k + 1)

    def split(self, n: int) -> tuple:
        return tuple(self.child(k) for k in range(n))


def as_generator(rng: Union[RandomSource, np.random.Generator]) -> np.random.Generator:
    """Accept either a RandomSource or an already-running Generator."""
    if isinstance(rng, RandomSource):
        return rng.generator()
    return rng
