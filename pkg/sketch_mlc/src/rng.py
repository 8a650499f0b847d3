"""
Deterministic seeded random generation

Every stochastic construction (sketch entries, sign vectors, sampled rows,
Monte-Carlo samples, synthetic data) draws from an RngState. States are
immutable: each draw returns the variates together with the next state.

Generator: Philox-4x64 (counter-based). The 128-bit key is (seed, stream_id);
the high word of the 256-bit counter holds the state's counter, so every
(seed, stream_id, counter) triple addresses its own block of the sequence
without shared mutable state.

Gaussian transform: numpy's ziggurat method (Generator.standard_normal),
which is specified bit-for-bit by numpy and does not depend on the platform
libm.
"""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngState:
    """Seed, stream and draw counter of one independent consumer"""

    seed: int = 42
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id", "counter"):
            value = getattr(self, name)
            if not 0 <= value <= _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")

    def generator(self) -> np.random.Generator:
        """numpy Generator positioned at this state's block"""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        counter = np.array([0, 0, 0, self.counter], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def advance(self) -> "RngState":
        """State for the next draw"""
        return replace(self, counter=(self.counter + 1) & _U64)

    def spawn(self, stream_id: int) -> "RngState":
        """Same seed, another stream"""
        return RngState(seed=self.seed, stream_id=stream_id, counter=0)


def gaussian(state: RngState, count: int) -> Tuple[np.ndarray, RngState]:
    """
    i.i.d. standard-normal variates

    Args:
        state: Generator state
        count: Number of variates (>= 0)

    Returns:
        (variates, next state)
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    values = state.generator().standard_normal(count)
    return values, state.advance()


def rademacher(state: RngState, count: int) -> Tuple[np.ndarray, RngState]:
    """
    i.i.d. uniform signs in {-1, +1} (float64)

    Args:
        state: Generator state
        count: Number of signs (>= 0)

    Returns:
        (signs, next state)
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    bits = state.generator().integers(0, 2, size=count, dtype=np.int8)
    return 2.0 * bits.astype(np.float64) - 1.0, state.advance()


def sample_without_replacement(
    state: RngState, m: int, n: int
) -> Tuple[np.ndarray, RngState]:
    """
    Uniform m-subset of range(n), sorted ascending

    Args:
        state: Generator state
        m: Subset size
        n: Ground set size

    Returns:
        (indices as int64, next state)
    """
    if m < 0 or n < 0:
        raise ValueError(f"sizes must be non-negative, got m={m}, n={n}")
    if m > n:
        raise ValueError(f"subset larger than ground set: m={m} > n={n}")
    chosen = state.generator().choice(n, size=m, replace=False)
    return np.sort(chosen.astype(np.int64)), state.advance()
