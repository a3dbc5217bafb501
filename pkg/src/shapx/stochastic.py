"""Monte Carlo Shapley estimators under one sampling scheme.

Every estimator here is an instance of the same template: draw subsets S_k
from a distribution p, average per-coordinate terms a_S(i) * v(S_k), then
apply an affine map (T, b).  The scheme is captured by
:class:`UnifiedStochasticConfig`; the classic estimators (marginal-contribution
sampling, permutation averaging, kernel-weighted least squares and its
unbiased variant, and the single-pass kernel target) are specific
configurations or specializations with extra variance-reduction switches.

Probabilities and coefficients only depend on (|S|, i in S), so a config
stores four arrays indexed by subset size.  Coefficient/probability pairs are
calibrated so that the per-subset product p(S) * a_S(i) reproduces the exact
Shapley weights: summed over the whole domain the estimator's expectation *is*
the Shapley value, and Monte Carlo draws from the normalized p are unbiased.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from shapx.core import (
    Attribution,
    CoalitionGame,
    ConfigError,
    FeatureSubset,
    KernelWeights,
    RandomSource,
    as_generator,
    binomial,
    bits_to_indicators,
    indicators_to_bits,
    kernel_normalizer,
    popcounts,
)

ALL_SUBSETS = "all_subsets"
PROPER_NONEMPTY = "proper_nonempty"

RIDGE = 1e-9


@dataclass(frozen=True)
class UnifiedStochasticConfig:
    """Sampling scheme phi = T (E_{S~p}[a_S v(S)]) + b with size-indexed tables.

    ``prob_in[s]`` / ``prob_out[s]`` give the probability of one specific
    size-s subset that contains / excludes the coordinate being estimated;
    ``coeff_in`` / ``coeff_out`` give the matching coefficients a_S(i).
    ``transform`` is "identity", "gamma_centering" (gamma * (d I - J)), or an
    explicit (d, d) matrix; ``bias`` is "zero" or "efficiency"
    ((v(N) - v(empty)) / d * 1, expanded at estimation time).
    """

    name: str
    d: int
    domain: str
    prob_in: np.ndarray
    prob_out: np.ndarray
    coeff_in: np.ndarray
    coeff_out: np.ndarray
    transform: Union[str, np.ndarray] = "identity"
    bias: str = "zero"

    def __post_init__(self):
        if self.domain not in (ALL_SUBSETS, PROPER_NONEMPTY):
            raise ConfigError(f"unknown subset domain {self.domain!r}")
        if self.bias not in ("zero", "efficiency"):
            raise ConfigError(f"unknown bias descriptor {self.bias!r}")
        for label in ("prob_in", "prob_out", "coeff_in", "coeff_out"):
            arr = np.asarray(getattr(self, label), dtype=np.float64)
            if arr.shape != (self.d + 1,):
                raise ConfigError(f"{label} must have shape ({self.d + 1},), got {arr.shape}")
            object.__setattr__(self, label, arr)
        if isinstance(self.transform, str):
            if self.transform not in ("identity", "gamma_centering"):
                raise ConfigError(f"unknown transform descriptor {self.transform!r}")
        else:
            mat = np.asarray(self.transform, dtype=np.float64)
            if mat.shape != (self.d, self.d):
                raise ConfigError(f"transform matrix must be ({self.d}, {self.d})")
            object.__setattr__(self, "transform", mat)
        total = self.total_mass()
        if abs(total - 1.0) > 1e-10:
            raise ConfigError(f"config {self.name!r}: probability mass {total} != 1")

    # size support per membership class: (lo, hi) inclusive
    def size_range(self, contains: bool) -> tuple:
        if self.domain == ALL_SUBSETS:
            return (1, self.d) if contains else (0, self.d - 1)
        return 1, self.d - 1

    def total_mass(self) -> float:
        """Per-coordinate probability mass: sum of p^i(S) over the domain."""
        d = self.d
        total = 0.0
        lo, hi = self.size_range(True)
        for s in range(lo, hi + 1):
            total += binomial(d - 1, s - 1) * float(self.prob_in[s])
        lo, hi = self.size_range(False)
        for s in range(lo, hi + 1):
            total += binomial(d - 1, s) * float(self.prob_out[s])
        return total

    @property
    def shared_sampling(self) -> bool:
        """True when p(S) does not depend on the coordinate, so one subset
        batch serves all d coordinates."""
        if self.domain == ALL_SUBSETS:
            return False
        inner = slice(1, self.d)
        return bool(np.array_equal(self.prob_in[inner], self.prob_out[inner]))

    def size_distribution(self) -> np.ndarray:
        """Marginal size distribution of a shared-sampling config."""
        if not self.shared_sampling:
            raise ConfigError(f"config {self.name!r} samples per coordinate, no shared size law")
        d = self.d
        probs = np.zeros(d + 1)
        for s in range(1, d):
            probs[s] = binomial(d, s) * float(self.prob_in[s])
        return probs / probs.sum()

    def transform_matrix(self, gamma: float) -> Optional[np.ndarray]:
        """Expand the transform descriptor; None stands for identity."""
        if isinstance(self.transform, str):
            if self.transform == "identity":
                return None
            d = self.d
            return gamma * (d * np.eye(d) - np.ones((d, d)))
        return self.transform

    def bias_vector(self, game: CoalitionGame) -> np.ndarray:
        if self.bias == "efficiency":
            return np.full(self.d, game.v_all / self.d)
        return np.zeros(self.d)

    def coefficients(self, member: np.ndarray, sizes: np.ndarray) -> np.ndarray:
        """a_S(i) for an (M, d) membership matrix and matching size vector."""
        return np.where(member > 0, self.coeff_in[sizes][:, None], self.coeff_out[sizes][:, None])


def semivalue_config(d: int) -> UnifiedStochasticConfig:
    """Marginal-contribution sampling over all subsets.

    The raw scheme puts mass 1 on subsets containing i and mass 1 on the rest
    with coefficient +/-1; halving p and doubling the coefficient keeps every
    product p(S) * a_S(i) while making p a proper distribution.
    """
    if d < 1:
        raise ConfigError(f"need d >= 1, got {d}")
    prob_in = np.zeros(d + 1)
    prob_out = np.zeros(d + 1)
    for s in range(1, d + 1):
        prob_in[s] = float(Fraction(1, 2 * binomial(d, s) * s))
    for s in range(0, d):
        prob_out[s] = float(Fraction(1, 2 * binomial(d, s) * (d - s)))
    coeff_in = np.full(d + 1, 2.0)
    coeff_out = np.full(d + 1, -2.0)
    return UnifiedStochasticConfig(
        name="semivalue",
        d=d,
        domain=ALL_SUBSETS,
        prob_in=prob_in,
        prob_out=prob_out,
        coeff_in=coeff_in,
        coeff_out=coeff_out,
        transform="identity",
        bias="zero",
    )


def _kernel_probs(d: int) -> np.ndarray:
    """Per-subset probability omega(S)/gamma as a size-indexed array (exact
    rationals, floated once)."""
    gamma = sum(Fraction(d - 1, binomial(d, s) * s * (d - s)) * binomial(d, s) for s in range(1, d))
    probs = np.zeros(d + 1)
    for s in range(1, d):
        probs[s] = float(Fraction(d - 1, binomial(d, s) * s * (d - s)) / gamma)
    return probs


def least_squares_config(d: int) -> UnifiedStochasticConfig:
    """Kernel-weighted least-squares value as a sampling scheme.

    Sampling from the normalized kernel distribution omega/gamma (total mass 1)
    instead of the raw per-size weights (total mass 1/(d-1)) scales the
    coefficient down by (d-1); the transform gamma*(d I - J) and efficiency
    bias then reproduce the closed-form solution
    (d I - J)/(d - 1) U^T W v + v_all/d * 1.
    """
    if d < 2:
        raise ConfigError(f"kernel-based config needs d >= 2, got {d}")
    probs = _kernel_probs(d)
    coeff_in = np.zeros(d + 1)
    coeff_in[1:d] = float(Fraction(1, d - 1))
    coeff_out = np.zeros(d + 1)
    return UnifiedStochasticConfig(
        name="least_squares",
        d=d,
        domain=PROPER_NONEMPTY,
        prob_in=probs,
        prob_out=probs.copy(),
        coeff_in=coeff_in,
        coeff_out=coeff_out,
        transform="gamma_centering",
        bias="efficiency",
    )


def simshap_config(d: int) -> UnifiedStochasticConfig:
    """Single-pass kernel target: identity transform, per-subset coefficients.

    Every sampled subset updates all d coordinates at once:
    +c*(d-|S|)*v(S) on members, -c*|S|*v(S) on the rest, with
    c = gamma/(d-1) = sum_s 1/(s(d-s)) so that draws from the normalized
    kernel distribution stay unbiased.
    """
    if d < 2:
        raise ConfigError(f"kernel-based config needs d >= 2, got {d}")
    probs = _kernel_probs(d)
    c = sum(Fraction(1, s * (d - s)) for s in range(1, d))  # == gamma/(d-1)
    coeff_in = np.zeros(d + 1)
    coeff_out = np.zeros(d + 1)
    for s in range(1, d):
        coeff_in[s] = float(c * (d - s))
        coeff_out[s] = float(-c * s)
    return UnifiedStochasticConfig(
        name="simshap",
        d=d,
        domain=PROPER_NONEMPTY,
        prob_in=probs,
        prob_out=probs.copy(),
        coeff_in=coeff_in,
        coeff_out=coeff_out,
        transform="identity",
        bias="efficiency",
    )


@dataclass(frozen=True)
class SampledBatch:
    """Subsets drawn for one estimate, with their game values."""

    subsets: tuple
    values: np.ndarray
    paired: bool = False

    def __post_init__(self):
        object.__setattr__(self, "subsets", tuple(self.subsets))
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(self.subsets),):
            raise ValueError("values must align with subsets")
        object.__setattr__(self, "values", vals)
        if self.paired:
            if len(self.subsets) % 2:
                raise ValueError("paired batch needs an even number of subsets")
            for a, b in zip(self.subsets[::2], self.subsets[1::2]):
                if a.bits != b.complement().bits:
                    raise ValueError("paired batch must interleave (S, complement) pairs")

    def __len__(self) -> int:
        return len(self.subsets)


def _subsets_of_sizes(sizes: np.ndarray, d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random subsets with prescribed sizes, as uint64 bits.

    Rank trick: random keys per row, a feature joins iff its key ranks below
    the row's target size.
    """
    m = np.asarray(sizes).shape[0]
    if m == 0 or d == 0:
        return np.zeros(m, dtype=np.uint64)
    keys = rng.random((m, d))
    ranks = keys.argsort(axis=1).argsort(axis=1)
    member = ranks < np.asarray(sizes)[:, None]
    return indicators_to_bits(member)


def _sample_shared_batch(
    size_probs: np.ndarray, d: int, m: int, rng: np.random.Generator, paired: bool
) -> np.ndarray:
    """m subset bits with sizes drawn from ``size_probs`` then uniform at that
    size; with ``paired``, complement pairs interleaved (m must be even)."""
    if paired:
        if m % 2:
            raise ValueError("paired sampling needs an even sample count")
        sizes = rng.choice(d + 1, size=m // 2, p=size_probs)
        first = _subsets_of_sizes(sizes, d, rng)
        full = np.uint64((1 << d) - 1)
        out = np.empty(m, dtype=np.uint64)
        out[0::2] = first
        out[1::2] = first ^ full
        return out
    sizes = rng.choice(d + 1, size=m, p=size_probs)
    return _subsets_of_sizes(sizes, d, rng)


def sample_kernel_sizes(weights: KernelWeights, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw m subset sizes from the kernel size distribution."""
    return rng.choice(weights.d + 1, size=m, p=weights.size_probs)


def sample_kernel_subset(
    weights: KernelWeights,
    rng: Union[RandomSource, np.random.Generator],
    paired: bool = False,
):
    """One subset from the normalized kernel distribution omega/gamma (size by
    size-class mass, then uniform at that size); with ``paired`` also its
    complement."""
    gen = as_generator(rng)
    d = weights.d
    if paired:
        a, b = _sample_shared_batch(weights.size_probs, d, 2, gen, paired=True)
        return FeatureSubset(int(a), d), FeatureSubset(int(b), d)
    bits = _sample_shared_batch(weights.size_probs, d, 1, gen, paired=False)
    return FeatureSubset(int(bits[0]), d)


def sample_kernel_batch(
    weights: KernelWeights, m: int, rng: np.random.Generator, paired: bool = False
) -> np.ndarray:
    """m kernel-distributed subset bits; with ``paired`` both halves of each
    complement pair count toward m."""
    return _sample_shared_batch(weights.size_probs, weights.d, m, rng, paired)


def _one_feature_trivial(game: CoalitionGame, method: str, seed: int) -> Attribution:
    # d=1: efficiency pins the single coordinate, no sampling needed
    return Attribution(phi=np.array([game.v_all]), method=method, samples_used=0, seed=seed)


def estimate_unified(
    config: UnifiedStochasticConfig,
    game: CoalitionGame,
    m: int,
    rng: RandomSource,
    paired: bool = False,
) -> Attribution:
    """Monte Carlo estimate under an arbitrary unified config.

    Shared-sampling configs draw one batch of m subsets for all coordinates;
    per-coordinate configs (the marginal-contribution scheme) draw m subsets
    per coordinate from its own distribution, on split random streams.
    """
    if config.d != game.d:
        raise ConfigError(f"config is for d={config.d}, game has d={game.d}")
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    d = game.d
    if config.shared_sampling:
        gen = rng.generator()
        bits = _sample_shared_batch(config.size_distribution(), d, m, gen, paired)
        values = game.values_for_bits(bits)
        sizes = popcounts(bits)
        member = bits_to_indicators(bits, d)
        coeffs = config.coefficients(member, sizes)
        tilde = (coeffs * values[:, None]).mean(axis=0)
        samples = bits.shape[0]
    else:
        if paired:
            raise ConfigError("complement pairing needs a coordinate-independent distribution")
        tilde = np.zeros(d)
        samples = 0
        for i in range(d):
            gi = rng.child(i).generator()
            classes = []  # (size, contains-i) membership classes with their mass
            class_probs = []
            lo, hi = config.size_range(True)
            for s in range(lo, hi + 1):
                classes.append((s, True))
                class_probs.append(binomial(d - 1, s - 1) * config.prob_in[s])
            lo, hi = config.size_range(False)
            for s in range(lo, hi + 1):
                classes.append((s, False))
                class_probs.append(binomial(d - 1, s) * config.prob_out[s])
            picks = gi.choice(len(classes), size=m, p=np.asarray(class_probs))
            sizes = np.empty(m, dtype=np.int64)
            inside = np.empty(m, dtype=bool)
            for k, (s, flag) in enumerate(classes):
                hit = picks == k
                sizes[hit] = s
                inside[hit] = flag
            bits = _insert_feature(
                _subsets_of_sizes(sizes - inside.astype(np.int64), d - 1, gi), i, inside
            )
            values = game.values_for_bits(bits)
            coeff = np.where(inside, config.coeff_in[sizes], config.coeff_out[sizes])
            tilde[i] = (coeff * values).mean()
            samples += m
    if isinstance(config.transform, str) and config.transform == "identity":
        phi = tilde
    else:
        phi = config.transform_matrix(kernel_normalizer(d).gamma) @ tilde
    phi = phi + config.bias_vector(game)
    return Attribution(
        phi=phi, method=f"unified[{config.name}]", samples_used=samples, seed=rng.seed
    )


def _insert_feature(rest_bits: np.ndarray, i: int, inside: np.ndarray) -> np.ndarray:
    """Map subsets over d-1 features to subsets over d by opening slot i and
    setting it per ``inside``."""
    low = rest_bits & ((np.uint64(1) << np.uint64(i)) - np.uint64(1))
    high = (rest_bits >> np.uint64(i)) << np.uint64(i + 1)
    return low | high | (np.asarray(inside).astype(np.uint64) << np.uint64(i))


def estimate_semivalue_mc(
    game: CoalitionGame, feature: int, m: int, rng: Union[RandomSource, np.random.Generator]
) -> float:
    """Average of m sampled marginal contributions of one feature.

    Predecessor sets are drawn by size (uniform in 0..d-1, each size class
    carrying equal mass under the Shapley weights) then uniformly at that
    size from the remaining features.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    d = game.d
    if not 0 <= feature < d:
        raise ValueError(f"feature {feature} out of range for d={d}")
    gen = as_generator(rng)
    sizes = gen.integers(0, d, size=m)
    without = _insert_feature(
        _subsets_of_sizes(sizes, d - 1, gen), feature, np.zeros(m, dtype=bool)
    )
    with_i = without | (np.uint64(1) << np.uint64(feature))
    deltas = game.values_for_bits(with_i) - game.values_for_bits(without)
    return float(deltas.mean())


def estimate_permutation(
    game: CoalitionGame, m: int, rng: RandomSource, antithetical: bool = False
) -> Attribution:
    """Average marginal contributions along m uniform random feature orders.

    Each order costs d+1 game evaluations via running prefixes, and its
    attribution telescopes to v(N) - v(empty) exactly.  ``antithetical``
    pairs every order with its reversal (m must be even).
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if antithetical and m % 2:
        raise ValueError("antithetical sampling needs an even permutation count")
    d = game.d
    method = "permutation_antithetical" if antithetical else "permutation"
    if d == 1:
        return Attribution(phi=np.array([game.v_all]), method=method, samples_used=m, seed=rng.seed)
    gen = rng.generator()
    base = m // 2 if antithetical else m
    orders = gen.permuted(np.tile(np.arange(d), (base, 1)), axis=1)
    if antithetical:
        orders = np.concatenate([orders, orders[:, ::-1]], axis=0)
    rows = orders.shape[0]
    # prefix bits after each insertion: cumulative sum of distinct powers of two
    powers = np.uint64(1) << orders.astype(np.uint64)
    prefixes = np.cumsum(powers, axis=1, dtype=np.uint64)
    before = np.concatenate([np.zeros((rows, 1), dtype=np.uint64), prefixes[:, :-1]], axis=1)
    deltas = game.values_for_bits(prefixes) - game.values_for_bits(before)
    phi = np.zeros(d)
    np.add.at(phi, orders.reshape(-1), deltas.reshape(-1))
    phi /= rows
    return Attribution(phi=phi, method=method, samples_used=rows, seed=rng.seed)


def constrained_projection(a_mat: np.ndarray, b_vec: np.ndarray, v_all: float) -> np.ndarray:
    """Minimizer of phi^T A phi - 2 phi^T b subject to 1^T phi = v_all:
    A^{-1}(b - 1 (1^T A^{-1} b - v_all) / (1^T A^{-1} 1))."""
    d = a_mat.shape[0]
    ones = np.ones(d)
    sol = np.linalg.solve(a_mat, np.column_stack([b_vec, ones]))
    a_inv_b, a_inv_1 = sol[:, 0], sol[:, 1]
    lam = (ones @ a_inv_b - v_all) / (ones @ a_inv_1)
    return a_inv_b - lam * a_inv_1


def additive_efficient_shift(phi: np.ndarray, v_all: float) -> np.ndarray:
    """Project onto the efficiency hyperplane: phi - mean(phi) + v_all/d."""
    return phi - phi.mean() + v_all / phi.shape[0]


def estimate_kernelshap(
    game: CoalitionGame,
    m: int,
    rng: RandomSource,
    paired: bool = False,
    constrained: bool = True,
) -> Attribution:
    """Kernel-weighted least squares on m sampled subsets.

    Builds the empirical moments A_M = Z^T Z / M and b_M = Z^T v_delta / M
    from kernel-distributed indicator rows Z and solves the
    efficiency-constrained quadratic program.  With ``constrained=False`` the
    unconstrained solution is computed and shifted onto the constraint
    afterwards.  A singular empirical system gets ridge regularization plus a
    warning instead of an error.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    d = game.d
    method = "kernelshap_paired" if paired else "kernelshap"
    if d == 1:
        return _one_feature_trivial(game, method, rng.seed)
    if m < d:
        raise ValueError(f"need m >= d for a solvable system, got m={m}, d={d}")
    weights = kernel_normalizer(d)
    gen = rng.generator()
    bits = sample_kernel_batch(weights, m, gen, paired=paired)
    z = bits_to_indicators(bits, d)
    v_delta = game.values_for_bits(bits) - game.v_empty
    a_mat = z.T @ z / m
    b_vec = z.T @ v_delta / m
    phi = _solve_with_ridge_fallback(a_mat, b_vec, game.v_all, constrained, m)
    return Attribution(phi=phi, method=method, samples_used=m, seed=rng.seed)


def _solve_with_ridge_fallback(
    a_mat: np.ndarray, b_vec: np.ndarray, v_all: float, constrained: bool, m: int
) -> np.ndarray:
    def solve(mat):
        if constrained:
            return constrained_projection(mat, b_vec, v_all)
        return additive_efficient_shift(np.linalg.solve(mat, b_vec), v_all)

    try:
        return solve(a_mat)
    except np.linalg.LinAlgError:
        warnings.warn(
            f"singular empirical system at m={m}; adding ridge {RIDGE:g} "
            "(draw more samples for a better-conditioned solve)",
            RuntimeWarning,
        )
        return solve(a_mat + RIDGE * np.eye(a_mat.shape[0]))


def kernelshap_second_moment(d: int) -> np.ndarray:
    """A = E[1^S (1^S)^T] under the normalized kernel distribution, exactly.

    A_ii = P(i in S) = sum_s pi_s s/d; A_ij = sum_s pi_s s(s-1)/(d(d-1)).
    """
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    gamma = sum(Fraction(d - 1, binomial(d, s) * s * (d - s)) * binomial(d, s) for s in range(1, d))
    diag = Fraction(0)
    off = Fraction(0)
    for s in range(1, d):
        pi_s = Fraction(d - 1, binomial(d, s) * s * (d - s)) * binomial(d, s) / gamma
        diag += pi_s * Fraction(s, d)
        off += pi_s * Fraction(s * (s - 1), d * (d - 1))
    a_mat = np.full((d, d), float(off))
    np.fill_diagonal(a_mat, float(diag))
    return a_mat


def estimate_kernelshap_unbiased(
    game: CoalitionGame, m: int, rng: RandomSource, paired: bool = False
) -> Attribution:
    """Kernel least squares with the exact second moment A and a sampled b.

    Only b = E[1^S (v(S) - v(empty))] is estimated; the constrained solution
    is linear in b, so the estimator is unbiased and satisfies efficiency for
    every draw.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    d = game.d
    method = "kernelshap_unbiased"
    if d == 1:
        return _one_feature_trivial(game, method, rng.seed)
    weights = kernel_normalizer(d)
    gen = rng.generator()
    bits = sample_kernel_batch(weights, m, gen, paired=paired)
    z = bits_to_indicators(bits, d)
    values = game.values_for_bits(bits)
    a_mat = kernelshap_second_moment(d)
    # center each summand by v(empty): a constant game then gives b_bar = 0 for
    # every draw, and the expectation E[1^S v_delta(S)] is unchanged
    b_bar = z.T @ (values - game.v_empty) / m
    phi = constrained_projection(a_mat, b_bar, game.v_all)
    return Attribution(phi=phi, method=method, samples_used=m, seed=rng.seed)


def exact_kernelshap_moment_vector(game: CoalitionGame) -> np.ndarray:
    """Exact b = E[1^S (v(S) - v(empty))] by enumeration (testing hook for the
    unbiased estimator's expectation)."""
    d = game.d
    probs_by_size = _kernel_probs(d)
    bits = np.arange(1, (1 << d) - 1, dtype=np.uint64)
    probs = probs_by_size[popcounts(bits)]
    z = bits_to_indicators(bits, d)
    v_delta = game.values_for_bits(bits) - game.v_empty
    return z.T @ (probs * v_delta)


def simshap_target(
    game: CoalitionGame, m: int, rng: RandomSource, paired: bool = False
) -> Attribution:
    """Single-pass sampled target: every drawn subset updates all coordinates.

    Members of S_k receive +c(d-|S|)v(S_k), the rest -c|S|v(S_k), averaged
    over draws and shifted by the efficiency bias v_all/d.
    """
    d = game.d
    if d == 1:
        return _one_feature_trivial(game, "simshap_target", rng.seed)
    att = estimate_unified(simshap_config(d), game, m, rng, paired=paired)
    return Attribution(
        phi=att.phi, method="simshap_target", samples_used=att.samples_used, seed=rng.seed
    )


ESTIMATORS = {
    "permutation": lambda game, m, rng: estimate_permutation(game, m, rng, antithetical=False),
    "permutation_antithetical": lambda game, m, rng: estimate_permutation(
        game, m, rng, antithetical=True
    ),
    "kernelshap": lambda game, m, rng: estimate_kernelshap(game, m, rng, paired=False),
    "kernelshap_paired": lambda game, m, rng: estimate_kernelshap(game, m, rng, paired=True),
    "kernelshap_unbiased": lambda game, m, rng: estimate_kernelshap_unbiased(game, m, rng),
    "simshap": lambda game, m, rng: simshap_target(game, m, rng, paired=False),
    "simshap_paired": lambda game, m, rng: simshap_target(game, m, rng, paired=True),
}
