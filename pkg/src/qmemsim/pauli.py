"""Pauli algebra modulo global phase, and event-level depolarizing noise.

Single-qubit Paulis are encoded as two-bit integers packing the symplectic
components, bit 0 = x, bit 1 = z:

    I = 0, X = 1, Z = 2, Y = 3

With this encoding the group product modulo phase is bitwise XOR, two Paulis
anticommute iff the symplectic form x1*z2 + z1*x2 is odd, and an n-qubit
string is a plain uint8 array multiplied elementwise by XOR.  Global phases
are never tracked; they are unobservable for error accounting.

Depolarizing noise at rate r is unraveled as a Poisson point process of rate
r per qubit in which every event applies a Pauli drawn uniformly from
{I, X, Y, Z}.  Identity events (rate r/4) are deliberate: this uniform form
reproduces the replace-by-maximally-mixed generator directly and gives the
single-qubit retention lambda(t) = exp(-r t), i.e. channel probabilities
p_I = (1 + 3 e^{-rt})/4 and p_X = p_Y = p_Z = (1 - e^{-rt})/4.  Sampling
only X/Y/Z at rate 3r/4 would give the same channel but different event
statistics; everything downstream assumes the uniform convention.

Classical bits under the same noise flip at rate r/2 (the X/Y half of the
events), so a bit's value after time t is flipped with probability
(1 - e^{-rt})/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

I, X, Z, Y = 0, 1, 2, 3

#: labels indexed by code (note the code order I, X, Z, Y)
CODE_LABELS = "IXZY"

_LABEL_TO_CODE = {c: i for i, c in enumerate(CODE_LABELS)}


def pauli_mul(a, b):
    """Product modulo phase; works on scalars or arrays elementwise."""
    return a ^ b


def anticommutes(a, b):
    """1 where the Paulis anticommute, 0 where they commute (elementwise)."""
    return ((a & 1) & ((b >> 1) & 1)) ^ (((a >> 1) & 1) & (b & 1))


def string_anticommutes(e, f):
    """Symplectic form of two equal-length Pauli strings (0 or 1)."""
    e = np.asarray(e)
    f = np.asarray(f)
    if e.shape[-1] != f.shape[-1]:
        raise ValueError("length mismatch")
    return np.bitwise_xor.reduce(anticommutes(e, f), axis=-1) & 1


def weight(frame):
    """Number of non-identity sites."""
    return int(np.count_nonzero(np.asarray(frame)))


def identity_frame(n_qubits, trials=None):
    shape = n_qubits if trials is None else (trials, n_qubits)
    return np.zeros(shape, dtype=np.uint8)


def frame_from_label(label):
    """Parse a string like 'XZZXI' into a code array."""
    try:
        return np.array([_LABEL_TO_CODE[c] for c in label], dtype=np.uint8)
    except KeyError as exc:
        raise ValueError(f"bad Pauli letter {exc.args[0]!r}") from exc


def frame_to_label(frame):
    return "".join(CODE_LABELS[c] for c in np.asarray(frame))


@dataclass(frozen=True)
class NoiseParams:
    """Depolarizing noise model: Pauli events at rate `rate_r` per qubit."""

    rate_r: float

    def __post_init__(self):
        if not self.rate_r > 0:
            raise ValueError("rate_r must be positive")

    @property
    def clock_flip_rate(self):
        """Classical bits driven by the same noise flip at r/2."""
        return self.rate_r / 2.0


@dataclass(frozen=True)
class RngStream:
    """Deterministic, hierarchically addressable random stream.

    Identical (master_seed, key) pairs give identical event sequences
    regardless of how trials are distributed over workers, because each
    stream derives from an independent SeedSequence spawn key rather than
    from the consumption order of a shared generator.  child(i, j, ...)
    extends the key, so per-trial streams are stable under reordering.
    """

    master_seed: int
    key: tuple = (0,)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed,
                                    spawn_key=tuple(self.key))
        return np.random.default_rng(ss)

    def child(self, *indices: int) -> "RngStream":
        return RngStream(self.master_seed, tuple(self.key) + tuple(indices))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an RngStream, or a plain int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    raise TypeError(f"cannot make a Generator from {type(rng).__name__}")


@dataclass(frozen=True)
class NoiseEvents:
    """Time-ordered noise events on an n-qubit register."""

    times: np.ndarray   # float64, ascending
    qubits: np.ndarray  # int64 indices
    paulis: np.ndarray  # uint8 codes, uniform over {I, X, Z, Y}

    def __len__(self):
        return self.times.size


def sample_noise_events(n_qubits, duration, params: NoiseParams, rng) -> NoiseEvents:
    """Draw all depolarizing events on [0, duration] for n_qubits qubits.

    The merged process has rate n_qubits * r; each event lands on a uniform
    qubit and applies a uniform Pauli, which is equivalent to independent
    per-qubit Poisson processes.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if duration < 0:
        raise ValueError("duration must be >= 0")
    gen = as_generator(rng)
    count = int(gen.poisson(n_qubits * params.rate_r * duration))
    times = np.sort(gen.uniform(0.0, duration, count))
    qubits = gen.integers(0, n_qubits, count)
    paulis = gen.integers(0, 4, count, dtype=np.uint8)
    return NoiseEvents(times=times, qubits=qubits, paulis=paulis)


def apply_events(frame, events: NoiseEvents):
    """Accumulate events into a Pauli frame (product modulo phase)."""
    frame = np.array(frame, dtype=np.uint8, copy=True)
    if len(events) and (events.qubits.min() < 0 or events.qubits.max() >= frame.shape[-1]):
        raise IndexError("event qubit index out of range")
    np.bitwise_xor.at(frame, events.qubits, events.paulis)
    return frame


def sample_cumulative_frames(n_qubits, duration, rate_r, trials, rng):
    """Cumulative Pauli frames of `trials` independent registers.

    Exactly the product of that register's events over [0, duration]: each
    (trial, qubit) cell draws its Poisson event count and XORs that many
    uniform Pauli codes.  Event times are irrelevant here because frame
    products commute modulo phase within an undisturbed interval.

    duration may be a scalar or a per-trial array (trials,).
    """
    gen = as_generator(rng)
    duration = np.asarray(duration, dtype=float)
    if np.any(duration < 0):
        raise ValueError("duration must be >= 0")
    lam = rate_r * (duration[:, None] if duration.ndim == 1 else duration)
    counts = gen.poisson(lam, size=(trials, n_qubits))
    frames = np.zeros((trials, n_qubits), dtype=np.uint8)
    pending = counts
    while True:
        mask = pending > 0
        m = int(mask.sum())
        if m == 0:
            break
        frames[mask] ^= gen.integers(0, 4, m, dtype=np.uint8)
        pending = pending - mask
    return frames


def accumulate_noise(frames, duration, rate_r, rng):
    """XOR fresh cumulative noise of the given duration onto frames, in place."""
    trials, n = frames.shape
    frames ^= sample_cumulative_frames(n, duration, rate_r, trials, rng)
    return frames


def single_qubit_probs(t, rate_r):
    """Channel probabilities (indexed by code) of the cumulative Pauli at time t."""
    lam = np.exp(-rate_r * t)
    return np.array([(1 + 3 * lam) / 4, (1 - lam) / 4, (1 - lam) / 4, (1 - lam) / 4])
