"""Ground-truth Shapley oracles by full enumeration.

Everything here is exponential in d and exists to anchor the samplers: the
classic weighted marginal-contribution sum, the all-permutations average, the
closed-form solution of the kernel-weighted least-squares problem, and the
exact expectation of any unified sampling config.  Three independent routes to
the same vector, plus closed forms for the kernel Gram matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations as iter_permutations

import numpy as np

from shapx.core import (
    Attribution,
    CapacityError,
    CoalitionGame,
    binomial,
    bits_to_indicators,
    popcounts,
)
from shapx.stochastic import UnifiedStochasticConfig, kernel_normalizer

MAX_EXACT = 20
MAX_PERMUTATION = 8
MAX_LEAST_SQUARES = 16
MAX_UNIFIED = 14

# compensated summation pays off once 2^d-term accumulations get long
FSUM_THRESHOLD = 12


@dataclass(frozen=True)
class Permutation:
    """A feature ordering; predecessors of a feature are those placed before it."""

    order: tuple

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError(f"order must be a bijection on 0..{len(order) - 1}, got {order}")
        object.__setattr__(self, "order", order)

    @property
    def d(self) -> int:
        return len(self.order)

    def predecessors(self, i: int) -> int:
        """Bits of the predecessor set of feature i in this ordering."""
        bits = 0
        for j in self.order:
            if j == i:
                return bits
            bits |= 1 << j
        raise ValueError(f"feature {i} not in permutation")

    def reversed(self) -> "Permutation":
        return Permutation(self.order[::-1])


def _shapley_weights(d: int) -> np.ndarray:
    """w[s] = s!(d-s-1)!/d! = 1/(C(d,s)(d-s)), exactly computed per size."""
    return np.array([float(Fraction(1, binomial(d, s) * (d - s))) for s in range(d)])


def _accumulate(terms: np.ndarray, d: int) -> float:
    return math.fsum(terms) if d >= FSUM_THRESHOLD else float(terms.sum())


def exact_shapley(game: CoalitionGame) -> Attribution:
    """phi_i = sum over S not containing i of w(|S|) (v(S+i) - v(S))."""
    d = game.d
    if d > MAX_EXACT:
        raise CapacityError(f"exact enumeration supports d <= {MAX_EXACT}, got d={d}")
    vals = game.all_values()
    bits = np.arange(1 << d, dtype=np.uint64)
    sizes = popcounts(bits)
    w = _shapley_weights(d)
    phi = np.empty(d)
    for i in range(d):
        free = (bits >> np.uint64(i)) & np.uint64(1) == 0
        sb = bits[free]
        deltas = vals[sb | (np.uint64(1) << np.uint64(i))] - vals[sb]
        phi[i] = _accumulate(w[sizes[free]] * deltas, d)
    return Attribution(phi=phi, method="exact_shapley", samples_used=1 << d, seed=0)


def exact_random_order(game: CoalitionGame) -> Attribution:
    """Average marginal contributions over all d! feature orderings."""
    d = game.d
    if d > MAX_PERMUTATION:
        raise CapacityError(
            f"all-permutations enumeration supports d <= {MAX_PERMUTATION}, got d={d}"
        )
    vals = game.all_values()
    totals = [[] for _ in range(d)]
    count = 0
    for order in iter_permutations(range(d)):
        prefix = 0
        for i in order:
            with_i = prefix | (1 << i)
            totals[i].append(float(vals[with_i] - vals[prefix]))
            prefix = with_i
        count += 1
    phi = np.array([_accumulate(np.asarray(t), d) / count for t in totals])
    return Attribution(phi=phi, method="exact_random_order", samples_used=1 << d, seed=0)


def exact_least_squares(game: CoalitionGame) -> Attribution:
    """Closed-form solution of the kernel-weighted constrained least squares:

    phi = (d I - J)/(d - 1) * t + v_all/d * 1,  t = sum_S omega(S) v(S) 1^S

    summed over proper non-empty subsets.  The v(empty) shift of v drops out
    because (d I - J) kills constant vectors.
    """
    d = game.d
    if not 2 <= d <= MAX_LEAST_SQUARES:
        raise CapacityError(f"least-squares enumeration supports 2 <= d <= {MAX_LEAST_SQUARES}, got d={d}")
    weights = kernel_normalizer(d)
    bits = np.arange(1, (1 << d) - 1, dtype=np.uint64)
    sizes = popcounts(bits)
    omega = weights.omega_by_size[sizes]
    vals = game.values_for_bits(bits)
    member = bits_to_indicators(bits, d)
    terms = member * (omega * vals)[:, None]
    t = np.array([_accumulate(terms[:, i], d) for i in range(d)])
    phi = (d * t - t.sum()) / (d - 1) + game.v_all / d
    return Attribution(phi=phi, method="exact_least_squares", samples_used=(1 << d) - 2, seed=0)


def exact_unified_expectation(config: UnifiedStochasticConfig, game: CoalitionGame) -> Attribution:
    """Full-domain expectation T (sum_S p^i(S) a^i_S v(S)) + b of a sampling
    config; equals the exact Shapley values for every calibrated config."""
    d = game.d
    if d > MAX_UNIFIED:
        raise CapacityError(f"unified enumeration supports d <= {MAX_UNIFIED}, got d={d}")
    if config.d != d:
        from shapx.core import ConfigError

        raise ConfigError(f"config is for d={config.d}, game has d={d}")
    if config.domain == "proper_nonempty":
        bits = np.arange(1, (1 << d) - 1, dtype=np.uint64)
    else:
        bits = np.arange(1 << d, dtype=np.uint64)
    sizes = popcounts(bits)
    vals = game.values_for_bits(bits)
    member = bits_to_indicators(bits, d)
    probs = np.where(member > 0, config.prob_in[sizes][:, None], config.prob_out[sizes][:, None])
    coeffs = config.coefficients(member, sizes)
    contrib = probs * coeffs * vals[:, None]
    tilde = np.array([_accumulate(contrib[:, i], d) for i in range(d)])
    if isinstance(config.transform, str) and config.transform == "identity":
        phi = tilde
    else:
        phi = config.transform_matrix(kernel_normalizer(d).gamma) @ tilde
    phi = phi + config.bias_vector(game)
    return Attribution(
        phi=phi,
        method=f"unified_expectation[{config.name}]",
        samples_used=bits.shape[0],
        seed=0,
    )


def shapley_kernel_gram(d: int) -> np.ndarray:
    """Closed form of U^T W U over proper non-empty subsets:
    ((d-1)/d) I + B J with B = ((d-1)/d) (H_{d-1} - 1), H the harmonic sum."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    a_val = Fraction(d - 1, d) * sum(Fraction(1, d - i) for i in range(1, d))
    b_val = a_val - Fraction(d - 1, d)
    gram = np.full((d, d), float(b_val))
    np.fill_diagonal(gram, float(b_val + Fraction(d - 1, d)))
    return gram


def shapley_kernel_gram_inverse(d: int) -> np.ndarray:
    """Closed-form inverse (d/(d-1)) I - C J with
    C = d^2 B / ((d-1)(d^2 B + d - 1))."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    a_val = Fraction(d - 1, d) * sum(Fraction(1, d - i) for i in range(1, d))
    b_val = a_val - Fraction(d - 1, d)
    c_val = d * d * b_val / ((d - 1) * (d * d * b_val + d - 1))
    inv = np.full((d, d), float(-c_val))
    np.fill_diagonal(inv, float(Fraction(d, d - 1) - c_val))
    return inv
