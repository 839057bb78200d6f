"""Finite-size simulation of the sign-slicer CDMA downlink.

A random +-1 spreading matrix induces an integer cross-correlation matrix
W (diagonal N). A codeword x survives the receiver iff every user's scaled
matched-filter output h_k = sum_i W_ki x_i agrees in sign with x_k; the
finite-size capacity of one realization is log2(#survivors)/K.

Counting is exact and exhaustive. The fast counter fixes the first user's
bit, walks the remaining assignments in Gray-code order so each step flips
a single bit and updates all K filter outputs in O(K) integer operations,
tracks the number of violated sign constraints incrementally, and doubles
the final tally by the global x -> -x symmetry.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .errors import DomainError, ResourceLimitError

#: Hard guard for exhaustive enumeration (2^30 half-space states).
MAX_EXHAUSTIVE_USERS = 30
#: Guard for the reference counter, which enumerates all 2^K codewords.
MAX_NAIVE_USERS = 20

_MASK64 = (1 << 64) - 1


class TiePolicy(Enum):
    """How to treat an exactly-zero matched-filter output.

    A hard slicer cannot reproduce the transmitted bit from y_k = 0, so
    STRICT (reject) is the default; INCLUSIVE (accept) matches the
    boundary-inclusive counting integral. The two differ only when K*N is
    even, and agree asymptotically.
    """

    STRICT = "strict"
    INCLUSIVE = "inclusive"


@dataclass(frozen=True)
class SpreadingMatrix:
    """K signature rows of N chips, entries +-1."""

    chips: np.ndarray

    def __post_init__(self) -> None:
        chips = np.asarray(self.chips)
        if chips.ndim != 2 or chips.shape[0] < 1 or chips.shape[1] < 1:
            raise DomainError(f"chips must be a K x N matrix, got shape {chips.shape}")
        if not np.isin(chips, (-1, 1)).all():
            raise DomainError("chips must all be -1 or +1")
        object.__setattr__(self, "chips", chips.astype(np.int8, copy=False))

    @property
    def users(self) -> int:
        return self.chips.shape[0]

    @property
    def n_chips(self) -> int:
        return self.chips.shape[1]


@dataclass(frozen=True)
class CorrelationMatrix:
    """Integer overlaps W_ki = sum_mu s_k^mu s_i^mu; diagonal equals N."""

    overlaps: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.overlaps)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise DomainError(f"overlaps must be square, got shape {w.shape}")
        w = w.astype(np.int64, copy=False)
        n = int(w[0, 0])
        if n < 1 or not (np.diag(w) == n).all():
            raise DomainError("diagonal entries must all equal the chip count N >= 1")
        if (w != w.T).any():
            raise DomainError("overlap matrix must be symmetric")
        if (np.abs(w) > n).any():
            raise DomainError("off-diagonal overlaps cannot exceed N in magnitude")
        if ((w - n) % 2 != 0).any():
            raise DomainError("every overlap must have the parity of N")
        object.__setattr__(self, "overlaps", w)

    @property
    def users(self) -> int:
        return self.overlaps.shape[0]

    @property
    def n_chips(self) -> int:
        return int(self.overlaps[0, 0])


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one spreading realization."""

    trial_index: int
    seed: int
    valid_count: int
    capacity_bits: float


@dataclass(frozen=True)
class SimulationSummary:
    """Aggregate of all trials at one load point."""

    users: int
    n_chips: int
    beta_requested: float
    beta_effective: float
    tie_policy: TiePolicy
    trials: int
    mean_capacity_bits: float
    std_capacity_bits: float
    master_seed: int
    results: tuple[TrialResult, ...]


def generate_spreading(users: int, n_chips: int, seed: int) -> SpreadingMatrix:
    """Draw a K x N matrix of i.i.d. equiprobable +-1 chips.

    Uses numpy's seeded PCG64 generator, so identical (K, N, seed) always
    produce the identical matrix.
    """
    if users < 1 or n_chips < 1:
        raise DomainError(f"need users >= 1 and n_chips >= 1, got {users}, {n_chips}")
    rng = np.random.default_rng(seed)
    chips = rng.integers(0, 2, size=(users, n_chips), dtype=np.int8) * 2 - 1
    return SpreadingMatrix(chips)


def correlate(spreading: SpreadingMatrix) -> CorrelationMatrix:
    """Integer Gram matrix of the signature rows."""
    s = spreading.chips.astype(np.int64)
    return CorrelationMatrix(s @ s.T)


def _as_codeword(x, users: int) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (users,):
        raise DomainError(f"codeword must have shape ({users},), got {x.shape}")
    if not np.isin(x, (-1, 1)).all():
        raise DomainError("codeword entries must all be -1 or +1")
    return x.astype(np.int64, copy=False)


def matched_filter(corr: CorrelationMatrix, x) -> np.ndarray:
    """Scaled matched-filter outputs h_k = sum_i W_ki x_i = N y_k, exact ints."""
    x = _as_codeword(x, corr.users)
    return corr.overlaps @ x


def is_valid(corr: CorrelationMatrix, x, policy: TiePolicy = TiePolicy.STRICT) -> bool:
    """Whether hard-slicing every filter output returns the transmitted bits."""
    x = _as_codeword(x, corr.users)
    margins = x * (corr.overlaps @ x)
    if policy is TiePolicy.STRICT:
        return bool((margins > 0).all())
    return bool((margins >= 0).all())


def count_valid_naive(
    corr: CorrelationMatrix, policy: TiePolicy = TiePolicy.STRICT
) -> int:
    """Reference counter: test all 2^K codewords directly.

    Vectorized but otherwise deliberately plain; serves as the oracle for
    count_valid_fast.
    """
    users = corr.users
    if users > MAX_NAIVE_USERS:
        raise ResourceLimitError(
            f"count_valid_naive is guarded at K <= {MAX_NAIVE_USERS}, got K={users}"
        )
    w = corr.overlaps
    bit_cols = np.arange(users, dtype=np.uint32)
    total = 0
    chunk = 1 << 14
    for start in range(0, 1 << users, chunk):
        stop = min(start + chunk, 1 << users)
        idx = np.arange(start, stop, dtype=np.uint32)[:, None]
        x = ((idx >> bit_cols) & 1).astype(np.int64) * 2 - 1
        margins = x * (x @ w)
        if policy is TiePolicy.STRICT:
            ok = (margins > 0).all(axis=1)
        else:
            ok = (margins >= 0).all(axis=1)
        total += int(ok.sum())
    return total


@njit(cache=True, nogil=True)
def _gray_count(w, x, n_gray, bad_limit):  # pragma: no cover - jitted
    """Count surviving states over Gray-code enumeration of bits 1..n_gray.

    x is the initial +-1 state (mutated in place); bits 0 and n_gray+1..K-1
    stay fixed. A constraint k is violated when x_k h_k <= bad_limit
    (0 under STRICT, -1 under INCLUSIVE; the products are integers).
    """
    users = w.shape[0]
    h = np.zeros(users, np.int64)
    for k in range(users):
        acc = np.int64(0)
        for i in range(users):
            acc += w[k, i] * x[i]
        h[k] = acc
    bad = np.zeros(users, np.int64)
    n_bad = 0
    for k in range(users):
        if x[k] * h[k] <= bad_limit:
            bad[k] = 1
            n_bad += 1
    count = 1 if n_bad == 0 else 0
    steps = np.int64(1) << n_gray
    for step in range(1, steps):
        s = step
        j = 1  # flip position: 1 + trailing zeros of the step index
        while s & 1 == 0:
            s >>= 1
            j += 1
        old = x[j]
        x[j] = -old
        delta = np.int64(-2) * old
        for k in range(users):
            hk = h[k] + delta * w[k, j]
            h[k] = hk
            b = 1 if x[k] * hk <= bad_limit else 0
            n_bad += b - bad[k]
            bad[k] = b
        if n_bad == 0:
            count += 1
    return count


def count_valid_fast(
    corr: CorrelationMatrix,
    policy: TiePolicy = TiePolicy.STRICT,
    partition_bits: int = 0,
) -> int:
    """Exact survivor count via incremental Gray-code enumeration.

    Fixes x_0 = +1, enumerates the other K-1 bits, and doubles the result
    by sign symmetry. With partition_bits = P > 0 the top P bits are pinned
    to each of their 2^P assignments and the independent sub-counts are
    summed; the result is identical for every P (the sub-enumerations may
    also run concurrently, as the kernel releases the GIL).
    """
    users = corr.users
    if not 1 <= users <= MAX_EXHAUSTIVE_USERS:
        raise ResourceLimitError(
            f"count_valid_fast is guarded at 1 <= K <= {MAX_EXHAUSTIVE_USERS}, got K={users}"
        )
    if not 0 <= partition_bits <= users - 1:
        raise DomainError(
            f"partition_bits must lie in [0, K-1] = [0, {users - 1}], got {partition_bits}"
        )
    w = np.ascontiguousarray(corr.overlaps)
    bad_limit = np.int64(0 if policy is TiePolicy.STRICT else -1)
    n_gray = users - 1 - partition_bits
    half_count = 0
    for prefix in range(1 << partition_bits):
        x = np.ones(users, dtype=np.int64)
        for j in range(partition_bits):
            if (prefix >> j) & 1:
                x[users - 1 - j] = -1
        half_count += int(_gray_count(w, x, n_gray, bad_limit))
    return 2 * half_count


def derive_trial_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    """Fold (master seed, load-point index, trial index) into one 64-bit seed.

    Chained SplitMix64 finalizers: each input is absorbed by xor and the
    state re-mixed, so trial seeds are reproducible and order-insensitive.
    """
    z = _splitmix64(master_seed & _MASK64)
    z = _splitmix64(z ^ (point_index & _MASK64))
    z = _splitmix64(z ^ (trial_index & _MASK64))
    return z


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def run_trial(
    users: int,
    n_chips: int,
    seed: int,
    policy: TiePolicy = TiePolicy.STRICT,
    trial_index: int = 0,
) -> TrialResult:
    """One realization: draw spreading, correlate, count, convert to bits."""
    spreading = generate_spreading(users, n_chips, seed)
    count = count_valid_fast(correlate(spreading), policy)
    if count <= 0:
        raise RuntimeError(
            f"impossible survivor count {count}: every instance admits >= 2 codewords"
        )
    return TrialResult(
        trial_index=trial_index,
        seed=seed,
        valid_count=count,
        capacity_bits=math.log2(count) / users,
    )


def chips_for_load(users: int, beta: float) -> int:
    """N = round(K / beta), ties to even. The effective load is then K/N."""
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"beta must be positive, got {beta!r}")
    n = round(users / beta)
    if n < 1:
        raise DomainError(
            f"beta={beta:g} rounds to zero chips at K={users}; need beta <= 2K"
        )
    return n


def run_simulation(
    users: int,
    betas,
    trials: int,
    master_seed: int,
    policy: TiePolicy = TiePolicy.STRICT,
    workers: int = 1,
) -> list[SimulationSummary]:
    """Exhaustive-count simulation over a list of requested loads.

    Per-trial seeds come from derive_trial_seed, so the outcome is a pure
    function of (users, betas, trials, master_seed, policy): trials may run
    on any number of worker threads in any order without changing a bit of
    the output. std is the sample (n-1) standard deviation, 0.0 for a
    single trial.
    """
    if not 1 <= users <= MAX_EXHAUSTIVE_USERS:
        raise ResourceLimitError(
            f"run_simulation is guarded at 1 <= K <= {MAX_EXHAUSTIVE_USERS}, got K={users}"
        )
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    betas = [float(b) for b in betas]
    if not betas:
        raise DomainError("need at least one load point")

    summaries = []
    for point_index, beta_requested in enumerate(betas):
        n_chips = chips_for_load(users, beta_requested)
        seeds = [derive_trial_seed(master_seed, point_index, t) for t in range(trials)]
        args = [(users, n_chips, seeds[t], policy, t) for t in range(trials)]
        if workers == 1 or trials == 1:
            results = [run_trial(*a) for a in args]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda a: run_trial(*a), args))
        caps = np.array([r.capacity_bits for r in results])
        std = float(caps.std(ddof=1)) if trials > 1 else 0.0
        summaries.append(
            SimulationSummary(
                users=users,
                n_chips=n_chips,
                beta_requested=beta_requested,
                beta_effective=users / n_chips,
                tie_policy=policy,
                trials=trials,
                mean_capacity_bits=float(caps.mean()),
                std_capacity_bits=std,
                master_seed=master_seed,
                results=tuple(results),
            )
        )
    return summaries
