"""Closed-form bounds, the decoding-round error ledger, and feasibility search.

The storage protocol certifies one decoding round by the recursion

    p_next = B(p_inher + p_evol) + p_dec

where B is the exact block error rate of the five-qubit decoder, p_evol
bounds the error weight accumulated while waiting for the round, and p_dec
bounds the errors introduced by the timed decode itself (over/under-rotation
from clock inaccuracy plus noise during the window).  A parameter set is
certified when every iterate from p_0 = 0 stays at or below the per-qubit
threshold p_star.

build_ledger evaluates the reference constant choices

    t_prot = p_star / r          t_dec = p_star / (4 d r)
    delta  = p_star * t_dec / (8 pi)        h_norm = 2 pi / t_dec
    epsilon = 1/6                K = (2 e^{r tau} / (r delta))^3
    l = ceil(tau / (t_prot + t_dec))

and records the verdict of the recursion under both the exact B and the
quadratic bound 10 p^2.  feasibility_search scans multiplier grids
(t_prot = c_prot p*/r, t_dec = c_dec p*/(d r), delta = c_delta t_dec) for
sets whose recursion contracts to a fixed point with a required margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fivequbit import b_exact

TWO_PI = 2.0 * math.pi


def information_decay_time(n_qubits: int, rate_r: float) -> float:
    """Time ln(2N)/r after which recoverable information drops below 1/2."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if rate_r <= 0:
        raise ValueError("rate_r must be positive")
    return math.log(2.0 * n_qubits) / rate_r


def depolarizing_lambda(t: float, rate_r: float) -> float:
    """Surviving-signal fraction e^{-rt} of the depolarizing channel."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return math.exp(-rate_r * t)


def entanglement_breaking_time(rate_r: float) -> float:
    """ln(3)/r: the instant the channel's signal fraction reaches 1/3."""
    if rate_r <= 0:
        raise ValueError("rate_r must be positive")
    return math.log(3.0) / rate_r


def avg_fidelity_depolarizing(lam: float) -> float:
    """Haar-average fidelity (1 + lam)/2 of the depolarizing channel."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must be in [0, 1]")
    return (1.0 + lam) / 2.0


def quadratic_block_error(p: float) -> float:
    """The coarse block error bound 10 p^2."""
    return 10.0 * p * p


def clock_size_for(tau: float, rate_r: float, delta: float, epsilon: float) -> int:
    """Smallest register size whose readout error bound is <= delta/2 at tau.

    Inverts delta/2 = e^{r tau} / (r K^{1/2-epsilon}); the exponent
    1/(1/2 - epsilon) is 3 at epsilon = 1/6.  Clamped to the theorem's
    minimum register size 16.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    base = 2.0 * math.exp(rate_r * tau) / (rate_r * delta)
    size = math.ceil(base ** (1.0 / (0.5 - epsilon)))
    return max(16, int(size))


def evolution_budget(t_prot: float, delta: float, rate_r: float) -> float:
    """Waiting-error bound r (t_prot - delta) on the per-qubit weight."""
    return rate_r * (t_prot - delta)


def decode_budget(h_norm: float, delta: float, t_dec: float, block_size: int,
                  rate_r: float) -> float:
    """Timed-decode error bound e^{h_norm delta} - 1 + d r (t_dec + delta)."""
    return math.expm1(h_norm * delta) + block_size * rate_r * (t_dec + delta)


@dataclass(frozen=True)
class RecursionTrace:
    """Iterates of p -> error_fn(p + p_evol) + p_dec from p = 0."""

    iterates: tuple          # first `levels` iterates p_1 .. p_l
    fixed_point: float | None  # long-run limit, None if not converged
    p_star: float
    holds: bool              # all recorded iterates <= p_star

    @property
    def first_violation(self):
        """1-based index of the first iterate above p_star, or None."""
        return next((j + 1 for j, p in enumerate(self.iterates)
                     if p > self.p_star), None)


def iterate_round_recursion(error_fn, p_evol: float, p_dec: float, levels: int,
                            p_star: float, settle: int = 400) -> RecursionTrace:
    p = 0.0
    iterates = []
    for _ in range(levels):
        p = error_fn(min(p + p_evol, 1.0)) + p_dec
        iterates.append(p)
    holds = all(q <= p_star for q in iterates)
    fixed_point = None
    q = p
    for _ in range(settle):
        nxt = error_fn(min(q + p_evol, 1.0)) + p_dec
        if abs(nxt - q) < 1e-14:
            fixed_point = nxt
            break
        q = nxt
    return RecursionTrace(iterates=tuple(iterates), fixed_point=fixed_point,
                          p_star=p_star, holds=holds)


@dataclass(frozen=True)
class LedgerReport:
    # inputs
    rate_r: float
    p_star: float
    block_size: int
    tau: float
    # derived constants
    t_prot: float
    t_dec: float
    delta: float
    h_norm: float
    epsilon: float
    clock_bits: float        # formula value; astronomically large is expected
    levels: int
    n_qubits: int
    # budget terms
    p_evol_bound: float
    p_dec_bound: float
    # recursion results
    exact: RecursionTrace        # B = exact enumeration
    quadratic: RecursionTrace    # B = 10 p^2

    @property
    def verdict_holds(self) -> bool:
        """Primary verdict, under the exact block error function."""
        return self.exact.holds

    def to_dict(self) -> dict:
        return {
            "inputs": {"rate_r": self.rate_r, "p_star": self.p_star,
                       "block_size": self.block_size, "tau": self.tau},
            "derived": {"t_prot": self.t_prot, "t_dec": self.t_dec,
                        "delta": self.delta, "h_norm": self.h_norm,
                        "epsilon": self.epsilon, "clock_bits": self.clock_bits,
                        "levels": self.levels, "n_qubits": float(self.n_qubits)},
            "budget": {"p_evol_bound": self.p_evol_bound,
                       "p_dec_bound": self.p_dec_bound},
            "recursion_exact": {"iterates": list(self.exact.iterates),
                                "fixed_point": self.exact.fixed_point,
                                "holds": self.exact.holds},
            "recursion_quadratic": {"iterates": list(self.quadratic.iterates),
                                    "fixed_point": self.quadratic.fixed_point,
                                    "holds": self.quadratic.holds},
            "verdict_holds": self.verdict_holds,
        }


def build_ledger(rate_r: float, p_star: float, block_size: int = 5,
                 tau: float = 1.0) -> LedgerReport:
    """Evaluate the reference constants and the round recursion verdict.

    The verdict carries the result; failing the inequality is a recorded
    finding, not an exception.
    """
    if not 0.0 < p_star <= 1.0 / 40.0:
        raise ValueError("p_star must lie in (0, 1/40]")
    if tau <= 0:
        raise ValueError("tau must be positive")
    d = block_size
    t_prot = p_star / rate_r
    t_dec = p_star / (4.0 * d * rate_r)
    delta = p_star * t_dec / (8.0 * math.pi)
    h_norm = TWO_PI / t_dec
    epsilon = 1.0 / 6.0
    clock_bits = (2.0 * math.exp(rate_r * tau) / (rate_r * delta)) ** 3
    levels = math.ceil(tau / (t_prot + t_dec))
    p_evol = evolution_budget(t_prot, delta, rate_r)
    p_dec = decode_budget(h_norm, delta, t_dec, d, rate_r)
    exact = iterate_round_recursion(b_exact, p_evol, p_dec, levels, p_star)
    quad = iterate_round_recursion(quadratic_block_error, p_evol, p_dec,
                                   levels, p_star)
    return LedgerReport(rate_r=rate_r, p_star=p_star, block_size=d, tau=tau,
                        t_prot=t_prot, t_dec=t_dec, delta=delta, h_norm=h_norm,
                        epsilon=epsilon, clock_bits=clock_bits, levels=levels,
                        n_qubits=d ** levels, p_evol_bound=p_evol,
                        p_dec_bound=p_dec, exact=exact, quadratic=quad)


@dataclass(frozen=True)
class FeasibleConstants:
    """A constant set whose round recursion contracts below threshold."""

    p_star: float
    c_prot: float
    c_dec: float
    c_delta: float
    rate_r: float
    block_size: int
    t_prot: float
    t_dec: float
    delta: float
    h_norm: float
    p_evol_bound: float
    p_dec_bound: float
    levels: int
    trace: RecursionTrace

    @property
    def margin(self) -> float:
        """Relative distance of the fixed point below p_star."""
        return 1.0 - self.trace.fixed_point / self.p_star

    def to_dict(self) -> dict:
        return {"p_star": self.p_star, "c_prot": self.c_prot,
                "c_dec": self.c_dec, "c_delta": self.c_delta,
                "rate_r": self.rate_r, "block_size": self.block_size,
                "t_prot": self.t_prot, "t_dec": self.t_dec,
                "delta": self.delta, "h_norm": self.h_norm,
                "p_evol_bound": self.p_evol_bound,
                "p_dec_bound": self.p_dec_bound, "levels": self.levels,
                "iterates": list(self.trace.iterates),
                "fixed_point": self.trace.fixed_point,
                "margin": self.margin}


def assess_constants(rate_r: float, block_size: int, p_star: float,
                     c_prot: float, c_dec: float, c_delta: float,
                     levels: int = 4) -> FeasibleConstants:
    """Evaluate one multiplier set; feasibility is judged by the caller."""
    d = block_size
    t_prot = c_prot * p_star / rate_r
    t_dec = c_dec * p_star / (d * rate_r)
    delta = c_delta * t_dec
    h_norm = TWO_PI / t_dec
    p_evol = evolution_budget(t_prot, delta, rate_r)
    p_dec = decode_budget(h_norm, delta, t_dec, d, rate_r)
    trace = iterate_round_recursion(b_exact, p_evol, p_dec, levels, p_star)
    return FeasibleConstants(p_star=p_star, c_prot=c_prot, c_dec=c_dec,
                             c_delta=c_delta, rate_r=rate_r, block_size=d,
                             t_prot=t_prot, t_dec=t_dec, delta=delta,
                             h_norm=h_norm, p_evol_bound=p_evol,
                             p_dec_bound=p_dec, levels=levels, trace=trace)


def feasibility_search(rate_r: float, block_size: int = 5,
                       p_star_values=(0.01,), c_prot_values=(0.5,),
                       c_dec_values=(0.25, 0.05), c_delta_values=None,
                       levels: int = 4, margin: float = 0.1):
    """First multiplier set on the grid contracting with the required margin.

    Returns None when the whole range is infeasible.  c_delta defaults to
    the reference relation delta = (p_star/(8 pi)) * t_dec, which makes
    h_norm * delta = p_star / 4.
    """
    if not p_star_values or not c_prot_values or not c_dec_values:
        raise ValueError("search ranges must be nonempty")
    if c_delta_values is not None and not c_delta_values:
        raise ValueError("search ranges must be nonempty")
    for p_star in p_star_values:
        c_deltas = c_delta_values
        if c_deltas is None:
            c_deltas = (p_star / (8.0 * math.pi),)
        for c_prot in c_prot_values:
            for c_dec in c_dec_values:
                for c_delta in c_deltas:
                    cand = assess_constants(rate_r, block_size, p_star,
                                            c_prot, c_dec, c_delta, levels)
                    fp = cand.trace.fixed_point
                    if (cand.trace.holds and fp is not None
                            and fp <= (1.0 - margin) * p_star):
                        return cand
    return None
