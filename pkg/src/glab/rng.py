"""Deterministic random-number plumbing.

All randomness in the package flows through counter-based Philox streams
derived from a single user-supplied 64-bit seed plus a text label.  Labels
are hashed with SHA-256 (never Python's salted hash), so the same
(seed, label, counter) triple yields the same stream in every process.

Chain driving uses a fixed raw-draw layout: step t of a trajectory consumes
exactly two uniforms, raws 2t and 2t+1 of the stream.  That makes runs
mergeable and restartable: a chain can be advanced to any step boundary
with `uniform_pairs`.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_entropy(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


def derive_seed_sequence(seed: int, label: str, counter: int = 0) -> np.random.SeedSequence:
    """Stable SeedSequence for (seed, label, counter)."""
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be a u64, got {seed}")
    if counter < 0:
        raise ValueError(f"counter must be nonnegative, got {counter}")
    return np.random.SeedSequence(
        entropy=seed, spawn_key=(_label_entropy(label), counter)
    )


def derive_generator(seed: int, label: str, counter: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, label, counter)."""
    return np.random.Generator(np.random.Philox(derive_seed_sequence(seed, label, counter)))


def uniform_pairs(seed: int, label: str, start_step: int, steps: int) -> np.ndarray:
    """Uniform draws for chain steps start_step .. start_step+steps-1.

    Returns an array of shape (steps, 2); row i holds the two uniforms for
    step start_step+i.  Step t always consumes raws 2t and 2t+1 of the
    stream, independent of how the trajectory is chunked.
    """
    if start_step < 0 or steps < 0:
        raise ValueError("start_step and steps must be nonnegative")
    bitgen = np.random.Philox(derive_seed_sequence(seed, label))
    # advance() moves whole counter blocks (4 doubles each); burn the rest
    blocks, rem = divmod(2 * start_step, 4)
    bitgen.advance(blocks)
    gen = np.random.Generator(bitgen)
    if rem:
        gen.random(size=rem)
    return gen.random(size=(steps, 2))
