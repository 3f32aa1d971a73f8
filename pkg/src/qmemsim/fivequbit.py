"""The [[5,1,3]] five-qubit code: syndrome decoding and block error rates.

Conventions, fixed once and tested:

* Stabilizer generators, in order g1..g4: XZZXI, IXZZX, XIXZZ, ZXIXZ
  (cyclic shifts of XZZXI; the fifth shift is the product of the others).
* Logical operators: logical X = XXXXX, logical Z = ZZZZZ.
* The syndrome of an error e is the 4-bit integer whose bit i is 1 iff e
  anticommutes with generator g_{i+1}; displayed as the tuple (s1, s2, s3, s4).
* The 16 syndromes are in bijection with the 16 weight<=1 errors; the decoder
  applies that unique low-weight correction.
* The residual logical class of a corrected error c (which commutes with all
  generators by construction) is the Pauli with x component = 1 iff c
  anticommutes with logical Z and z component = 1 iff c anticommutes with
  logical X; class I means c is a stabilizer, X/Z/Y mean a logical fault.

Five-site Pauli strings pack into indices 0..1023 with site s contributing
code * 4**s.  Because each base-4 digit occupies its own bit pair, bitwise
XOR of packed indices is sitewise Pauli multiplication, and the whole decode
map is a 1024-entry lookup table.

Block error rate convention: ``b_exact(p)`` takes the depolarizing weight p,
meaning each qubit independently suffers X, Y, Z each with probability p/3.
The cumulative channel of the noise model at time t has weight
p(t) = 3(1 - e^{-rt})/4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .pauli import (I, X, Z, Y, anticommutes, frame_from_label, frame_to_label,
                    string_anticommutes, as_generator)
from .stats import wilson_interval

GENERATOR_LABELS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
LOGICAL_X_LABEL = "XXXXX"
LOGICAL_Z_LABEL = "ZZZZZ"

BLOCK = 5
N_STRINGS = 4 ** BLOCK
POW4 = 4 ** np.arange(BLOCK)


@dataclass(frozen=True)
class CodeSpec:
    generators: np.ndarray = field(
        default_factory=lambda: np.array([frame_from_label(s) for s in GENERATOR_LABELS]))
    logical_x: np.ndarray = field(default_factory=lambda: frame_from_label(LOGICAL_X_LABEL))
    logical_z: np.ndarray = field(default_factory=lambda: frame_from_label(LOGICAL_Z_LABEL))
    distance: int = 3


def pack(frames):
    """Pack (..., 5) code arrays into base-4 indices."""
    return np.asarray(frames, dtype=np.int64) @ POW4


def unpack(indices):
    """Inverse of pack: indices -> (..., 5) code arrays."""
    idx = np.asarray(indices, dtype=np.int64)
    return ((idx[..., None] >> (2 * np.arange(BLOCK))) & 3).astype(np.uint8)


def syndrome_of(frame, spec: CodeSpec | None = None) -> int:
    """4-bit syndrome; bit i is the anticommutation with generator i+1."""
    spec = spec or default_code()
    frame = np.asarray(frame, dtype=np.uint8)
    if frame.shape != (BLOCK,):
        raise ValueError("five-qubit block expected")
    s = 0
    for i, g in enumerate(spec.generators):
        s |= int(string_anticommutes(frame, g)) << i
    return s


def syndrome_bits(s):
    return tuple((s >> i) & 1 for i in range(4))


@dataclass(frozen=True)
class DecoderTable:
    """Precomputed decode maps over all 1024 five-site Pauli strings."""

    syndromes: np.ndarray    # (1024,) uint8, syndrome of each packed error
    corrections: np.ndarray  # (16,) int64, packed weight<=1 correction per syndrome
    residuals: np.ndarray    # (1024,) uint8, logical class after correction
    failing_weight_counts: np.ndarray  # (6,) counts of residual != I by error weight

    @classmethod
    def build(cls, spec: CodeSpec | None = None) -> "DecoderTable":
        spec = spec or default_code()
        idx = np.arange(N_STRINGS)
        codes = unpack(idx)

        syn = np.zeros(N_STRINGS, dtype=np.uint8)
        for i, g in enumerate(spec.generators):
            bits = np.bitwise_xor.reduce(anticommutes(codes, g[None, :]), axis=1) & 1
            syn |= (bits << i).astype(np.uint8)

        # the 16 weight<=1 errors and their syndromes must be a bijection
        corrections = np.full(16, -1, dtype=np.int64)
        low_weight = [np.zeros(BLOCK, dtype=np.uint8)]
        for q in range(BLOCK):
            for p in (X, Z, Y):
                e = np.zeros(BLOCK, dtype=np.uint8)
                e[q] = p
                low_weight.append(e)
        for e in low_weight:
            s = syndrome_of(e, spec)
            if corrections[s] != -1:
                raise RuntimeError("syndrome collision among weight<=1 errors")
            corrections[s] = int(pack(e))

        corrected = idx ^ corrections[syn]
        ccodes = unpack(corrected)
        for i, g in enumerate(spec.generators):
            bits = np.bitwise_xor.reduce(anticommutes(ccodes, g[None, :]), axis=1) & 1
            if bits.any():
                raise RuntimeError("corrected error fails to commute with generators")

        x_comp = np.bitwise_xor.reduce(
            anticommutes(ccodes, spec.logical_z[None, :]), axis=1) & 1
        z_comp = np.bitwise_xor.reduce(
            anticommutes(ccodes, spec.logical_x[None, :]), axis=1) & 1
        residuals = (x_comp | (z_comp << 1)).astype(np.uint8)

        weights = (codes != I).sum(axis=1)
        counts = np.bincount(weights[residuals != I], minlength=6)
        return cls(syndromes=syn, corrections=corrections, residuals=residuals,
                   failing_weight_counts=counts)


@lru_cache(maxsize=1)
def default_table() -> DecoderTable:
    return DecoderTable.build()


@lru_cache(maxsize=1)
def default_code() -> CodeSpec:
    return CodeSpec()


def decode_block(frame, table: DecoderTable | None = None) -> int:
    """Residual logical Pauli code of one five-qubit error frame."""
    table = table or default_table()
    frame = np.asarray(frame, dtype=np.uint8)
    if frame.shape != (BLOCK,):
        raise ValueError("five-qubit block expected")
    return int(table.residuals[pack(frame)])


def decode_blocks(frames, table: DecoderTable | None = None):
    """Vectorized decode of (..., 5) frames to residual codes (...)."""
    table = table or default_table()
    frames = np.asarray(frames, dtype=np.uint8)
    if frames.shape[-1] != BLOCK:
        raise ValueError("last axis must have length 5")
    return table.residuals[pack(frames)]


def decode_concatenated(frame, levels, table: DecoderTable | None = None):
    """Decode a 5**levels frame level by level (consecutive 5-tuples).

    Accepts a single frame (5**levels,) or a batch (trials, 5**levels);
    returns the residual code(s) after all levels.
    """
    table = table or default_table()
    frames = np.asarray(frame, dtype=np.uint8)
    single = frames.ndim == 1
    if single:
        frames = frames[None, :]
    if frames.shape[1] != BLOCK ** levels:
        raise ValueError(f"expected 5**{levels} qubits, got {frames.shape[1]}")
    for _ in range(levels):
        frames = decode_blocks(frames.reshape(frames.shape[0], -1, BLOCK), table)
    out = frames[:, 0].astype(np.uint8)
    return int(out[0]) if single else out


def b_exact(p, table: DecoderTable | None = None) -> float:
    """Exact block logical error rate at depolarizing weight p.

    Sums the probability of the 1024 error strings whose decoded residual is
    a logical fault; only the error weight matters, so the sum collapses onto
    the failing-weight counts.  Leading behavior is 10 p^2 (1-p)^3: exactly
    the 90 weight-2 errors fail at second order.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    table = table or default_table()
    counts = table.failing_weight_counts
    total = 0.0
    for w, c in enumerate(counts):
        if c:
            total += c * (p / 3.0) ** w * (1.0 - p) ** (BLOCK - w)
    return total


@dataclass(frozen=True)
class BlockErrorEstimate:
    p: float
    estimate: float
    ci_low: float
    ci_high: float
    trials: int


def sample_error_frames(p, trials, rng, n_qubits=BLOCK):
    """IID depolarizing-weight-p frames: X, Y, Z each with probability p/3."""
    gen = as_generator(rng)
    frames = np.zeros((trials, n_qubits), dtype=np.uint8)
    mask = gen.random((trials, n_qubits)) < p
    m = int(mask.sum())
    if m:
        frames[mask] = gen.integers(1, 4, m, dtype=np.uint8)
    return frames


def b_monte_carlo(p, trials, rng, table: DecoderTable | None = None,
                  z=3.2905) -> BlockErrorEstimate:
    """Monte Carlo estimate of the block error rate with a Wilson CI.

    p = 0 admits no errors at all, so the estimate is exactly 0 with a
    zero-width interval and no sampling is done.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if p == 0.0:
        return BlockErrorEstimate(p=0.0, estimate=0.0, ci_low=0.0, ci_high=0.0,
                                  trials=trials)
    table = table or default_table()
    frames = sample_error_frames(p, trials, rng)
    failures = int(np.count_nonzero(decode_blocks(frames, table)))
    lo, hi = wilson_interval(failures, trials, z=z)
    return BlockErrorEstimate(p=p, estimate=failures / trials, ci_low=lo,
                              ci_high=hi, trials=trials)


def quadratic_bound_range(table: DecoderTable | None = None, step=1e-3):
    """Largest prefix [0, p_max] of the grid on which b_exact(p) <= 10 p^2.

    Determined empirically by scanning; with this decoder the bound holds on
    the whole interval, so p_max = 1.
    """
    table = table or default_table()
    grid = np.arange(0.0, 1.0 + step / 2, step)
    ok = np.array([b_exact(p, table) <= 10 * p * p + 1e-15 for p in grid])
    if not ok[0]:
        return 0.0
    bad = np.flatnonzero(~ok)
    return float(grid[-1]) if bad.size == 0 else float(grid[bad[0] - 1])
