"""Eavesdropper-state quantization and the continuity/tail machinery that
extends secrecy from a finite grid of states to all of them.

Canonical states have entries whose real and imaginary parts live in
[-1, 1]; snapping each part to the nearest multiple of 1/m yields a finite
net.  The tools here bound how far a log-likelihood can drift between a
state and its grid neighbour, quantify the tail exponents that power those
bounds, and evaluate the correlation-elimination parameter schedule used
against an arbitrarily varying adversary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .channel import (
    DimensionError,
    EveState,
    EveTrace,
    MainChannel,
    PowerConfig,
    as_complex_matrix,
)


@dataclass(frozen=True)
class QuantGrid:
    """Finite net of eavesdropper matrices with entries on a 1/m lattice."""

    m: int
    n_tx: int
    n_eve: int

    def __post_init__(self):
        if self.m < 1 or self.n_tx < 1 or self.n_eve < 1:
            raise ValueError("grid density and antenna counts must be >= 1")

    def log_size(self, n: int = 1) -> float:
        return grid_log_size(self.m, self.n_tx, self.n_eve, n)

    @property
    def row_error_cap(self) -> float:
        """Strict upper bound on the per-row squared snapping error."""
        return 2.0 * self.n_tx / self.m**2


def quantize_eve(st, m: int) -> np.ndarray:
    """Snap real/imag parts to the nearest 1/m lattice point.

    Rounds half away from zero, which keeps the result symmetric and inside
    the unit box that canonical entries occupy.
    """
    if m < 1:
        raise ValueError("grid density must be >= 1")
    ht = st.ht if isinstance(st, EveState) else as_complex_matrix(st)

    def snap(v):
        return np.sign(v) * np.floor(np.abs(v) * m + 0.5) / m

    return snap(ht.real) + 1j * snap(ht.imag)


def grid_log_size(m: float, n_tx: int, n_eve: int, n: int) -> float:
    """Natural log of the grid size (2m + 1)^(2 n_tx n_eve n)."""
    if m < 1 or n_tx < 1 or n_eve < 1:
        raise ValueError("grid density and antenna counts must be >= 1")
    if n < 0:
        raise ValueError("blocklength must be nonnegative")
    return 2.0 * n_tx * n_eve * n * math.log(2.0 * m + 1.0)


@dataclass(frozen=True)
class PerturbationRadii:
    """Radii controlling the log-likelihood drift between grid neighbours.

    ``r_prime`` bounds the per-use signal perturbation a grid snap can
    cause; ``r`` adds the typical residual-noise radius at margin ``eps``.
    """

    r_prime: float
    r: float
    eps: float


def perturbation_radii(
    p: float, n_tx: int, n_eve: int, m: int, eps: float
) -> PerturbationRadii:
    if p < 0:
        raise ValueError("code power must be nonnegative")
    if n_tx < 1 or n_eve < 1 or m < 1:
        raise ValueError("antenna counts and grid density must be >= 1")
    if eps <= 0:
        raise ValueError("concentration margin must be positive")
    r_prime = math.sqrt(2.0 * n_tx * n_eve * p) / m
    return PerturbationRadii(
        r_prime=r_prime, r=r_prime + math.sqrt(n_eve * (1.0 + eps)), eps=eps
    )


def loglik_drift_bound(radii: PerturbationRadii) -> float:
    """Per-use cap r'(2r + r') on the squared-residual difference."""
    return radii.r_prime * (2.0 * radii.r + radii.r_prime)


def _as_state_stack(trace) -> np.ndarray:
    """Accept an EveTrace or a raw (n, n_eve, n_tx) array of state matrices."""
    if isinstance(trace, EveTrace):
        return trace.stacked
    arr = np.asarray(trace, dtype=np.complex128)
    if arr.ndim != 3:
        raise DimensionError("state sequence must have shape (n, n_eve, n_tx)")
    return arr


@dataclass(frozen=True)
class PerturbationCheck:
    applicable: bool
    lhs: float
    rhs: float
    holds: bool


def check_loglik_perturbation(
    x, z, trace_a, trace_b, p: float, m: int, eps: float
) -> PerturbationCheck:
    """Verify the log-likelihood continuity bound on one concrete instance.

    ``lhs`` is the absolute gap between the unit-noise Gaussian
    log-likelihoods of ``z`` given ``x`` under the two state sequences;
    ``rhs`` is n times the drift cap.  Instances that violate the
    admissibility preconditions (grid-snap row error, codeword power cap,
    residual radius) come back marked not applicable rather than failed.
    """
    x = as_complex_matrix(x)
    z = as_complex_matrix(z)
    stack_a = _as_state_stack(trace_a)
    stack_b = _as_state_stack(trace_b)
    n = x.shape[1]
    n_tx = x.shape[0]
    n_eve = z.shape[0]
    if stack_a.shape != stack_b.shape or stack_a.shape != (n, n_eve, n_tx):
        raise DimensionError("state sequences do not match the signal shapes")

    radii = perturbation_radii(p, n_tx, n_eve, m, eps)
    not_applicable = PerturbationCheck(False, math.nan, math.nan, False)

    row_err = np.sum(np.abs(stack_a - stack_b) ** 2, axis=2)
    if np.any(row_err >= 2.0 * n_tx / m**2):
        return not_applicable
    if np.sum(np.abs(x) ** 2) / n > p + 1e-12:
        return not_applicable
    clean_a = np.einsum("iet,ti->ei", stack_a, x)
    residual = float(np.sum(np.abs(z - clean_a) ** 2))
    if residual / n >= radii.r**2:
        return not_applicable

    clean_b = np.einsum("iet,ti->ei", stack_b, x)
    lhs = abs(residual - float(np.sum(np.abs(z - clean_b) ** 2)))
    rhs = n * loglik_drift_bound(radii)
    return PerturbationCheck(applicable=True, lhs=lhs, rhs=rhs, holds=lhs <= rhs)


def chernoff_exponent(eps: float, side: str = "upper") -> float:
    """Large-deviation rate for the mean of i.i.d. unit-mean exponentials.

    ``upper`` bounds Pr(mean >= 1 + eps), ``lower`` bounds
    Pr(mean <= 1 - eps); the squared magnitude of each unit-variance
    complex-Gaussian entry is exactly such an exponential.
    """
    if side == "upper":
        if eps <= 0:
            raise ValueError("upper-tail margin must be positive")
        return eps - math.log1p(eps)
    if side == "lower":
        if not 0.0 < eps < 1.0:
            raise ValueError("lower-tail margin must lie in (0, 1)")
        return -eps - math.log1p(-eps)
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def truncation_exponent(eps_p: float, n_tx: int = 1) -> float:
    """Decay rate (per channel use) of the power-cap rejection probability.

    A codeword exceeds the cap exactly when the mean of its n * n_tx
    exponential entry energies exceeds 1 / (1 - eps_p); the rate is the
    matching upper-tail exponent times the n_tx entries per use.  Vanishes
    as eps_p -> 0.
    """
    if not 0.0 <= eps_p < 1.0:
        raise ValueError("truncation margin must lie in [0, 1)")
    if eps_p == 0.0:
        return 0.0
    return n_tx * chernoff_exponent(eps_p / (1.0 - eps_p), "upper")


def truncation_mass(n: int, n_tx: int, p: float, eps_p: float) -> float:
    """Probability that a Gaussian draw satisfies the per-codeword power cap.

    The codeword energy is a Gamma(n * n_tx) variable in units of the
    per-antenna variance, so the mass is a regularized incomplete gamma;
    it tends to 1/2 from above as n grows when eps_p = 0.
    """
    if n < 1 or n_tx < 1:
        raise ValueError("blocklength and antenna count must be >= 1")
    if p <= 0:
        raise ValueError("code power must be positive")
    if not 0.0 <= eps_p < 1.0:
        raise ValueError("truncation margin must lie in [0, 1)")
    shape = n * n_tx
    return float(gammainc(shape, shape / (1.0 - eps_p)))


def gallager_exponent(ch: MainChannel, pc: PowerConfig, rate_bits: float) -> float:
    """Random-coding error exponent of the main channel, in bits.

    Gaussian-input exponent for the parallel-mode channel left after the
    SVD reduction; the per-mode snr folds in the artificial-noise floor.
    Maximized over the tilt in [0, 1] by a coarse grid plus local
    refinement.  Vanishes at the channel rate and is nonincreasing in the
    target rate.
    """
    if rate_bits < 0:
        raise ValueError("rate must be nonnegative")
    if pc.n_tx != ch.n_modes:
        raise DimensionError(
            f"power config is for {pc.n_tx} active antennas but the channel "
            f"has {ch.n_modes} modes"
        )
    snrs = np.array(
        [s * s * pc.per_antenna_var / (s * s + 1.0) for s in ch.singular_values]
    )

    def objective(rho: float) -> float:
        return rho * float(np.sum(np.log2(1.0 + snrs / (1.0 + rho)))) - rho * rate_bits

    grid = np.linspace(0.0, 1.0, 513)
    values = [objective(r) for r in grid]
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    # the objective is concave in the tilt, so ternary search converges
    while hi - lo > 1e-9:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if objective(m1) < objective(m2):
            lo = m1
        else:
            hi = m2
    return max(objective(0.5 * (lo + hi)), 0.0)


@dataclass(frozen=True)
class ScheduleParams:
    """Correlation-elimination schedule values and feasibility flags.

    The codebook count and grid density explode as exp(2 eps' n), so both
    are kept in the (natural) log domain.  Each flag records one of the
    strict comparisons the schedule must win: every relevant exponent must
    beat eps', the decoding exponent must beat 2 eps', the distance-decay
    margin must have kicked in at this blocklength, and (when channel
    constants are supplied) the drift cap must already be below its target.
    """

    eps_prime: float
    n: int
    eps_n: float
    log_k: float
    log_m: float
    distance_exponent_ok: bool
    residual_tail_ok: bool
    truncation_tail_ok: bool
    decoding_exponent_ok: bool
    growth_ok: bool
    drift_ok: bool | None
    min_feasible_n: int | None


def _min_n_satisfying(predicate, start: int) -> int:
    n = max(start, 1)
    while not predicate(n):
        n += 1
    while n > 1 and predicate(n - 1):
        n -= 1
    return n


def schedule_params(
    eps_prime: float,
    n: int,
    c_prime: float,
    alpha_eps: float,
    alpha_eps_p: float,
    error_exponent: float,
    perturbation: tuple | None = None,
) -> ScheduleParams:
    """Evaluate the schedule eps_n = e^(-n eps'), K = M = e^(2 eps' n).

    The exponent inputs (``c_prime`` for the ensemble distance decay,
    ``alpha_eps`` / ``alpha_eps_p`` for the residual and truncation tails,
    ``error_exponent`` for decoding) are natural-log rates as supplied or
    measured by the caller.  ``perturbation`` optionally carries
    (p, n_tx, n_eve, eps) so the drift condition can be evaluated too.
    """
    if eps_prime <= 0:
        raise ValueError("schedule exponent must be positive")
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    eps_n = math.exp(-n * eps_prime)
    log_k = 2.0 * eps_prime * n
    log_m = 2.0 * eps_prime * n

    def growth_at(nn: int) -> bool:
        # e^2 e^(-c' nn) < e^(-eps' nn)
        return 2.0 - c_prime * nn < -eps_prime * nn

    def net_at(nn: int) -> bool:
        # 2 M + 1 <= e^(4 eps' nn) with M = e^(2 eps' nn)
        u = 2.0 * eps_prime * nn
        if u > 360.0:
            return True
        return 2.0 * math.exp(u) + 1.0 <= math.exp(2.0 * u)

    min_feasible: int | None = None
    if c_prime > eps_prime:
        n_growth = _min_n_satisfying(growth_at, int(2.0 / (c_prime - eps_prime)) + 1)
        n_net = _min_n_satisfying(
            net_at, max(int(math.log(1.0 + math.sqrt(2.0)) / (2.0 * eps_prime)), 1)
        )
        min_feasible = max(n_growth, n_net)

    drift_ok: bool | None = None
    if perturbation is not None:
        p, n_tx, n_eve, eps = perturbation
        if p == 0:
            drift_ok = True
        else:
            log_r_prime = 0.5 * math.log(2.0 * n_tx * n_eve * p) - log_m
            r_prime = math.exp(log_r_prime) if log_r_prime > -700 else 0.0
            if r_prime == 0.0:
                drift_ok = True
            else:
                r = r_prime + math.sqrt(n_eve * (1.0 + eps))
                log_ng = math.log(n) + math.log(r_prime * (2.0 * r + r_prime))
                drift_ok = log_ng < -1.5 * eps_prime * n

    return ScheduleParams(
        eps_prime=eps_prime,
        n=n,
        eps_n=eps_n,
        log_k=log_k,
        log_m=log_m,
        distance_exponent_ok=eps_prime < c_prime,
        residual_tail_ok=eps_prime < alpha_eps,
        truncation_tail_ok=eps_prime < alpha_eps_p,
        decoding_exponent_ok=2.0 * eps_prime < error_exponent,
        growth_ok=growth_at(n),
        drift_ok=drift_ok,
        min_feasible_n=min_feasible,
    )


def two_stage_overhead(eps_prime: float, r0: float) -> tuple[float, float]:
    """Blocklength inflation from announcing the codebook index.

    Publishing one of e^(2 eps' n) codebook indices over a rate-r0 channel
    costs 2 eps' log2(e) / r0 extra uses per secret use; returns the total
    stretch factor and that per-use overhead.
    """
    if r0 <= 0:
        raise ValueError("stage-two rate must be positive")
    if eps_prime < 0:
        raise ValueError("schedule exponent must be nonnegative")
    n2_per_n = 2.0 * eps_prime * math.log2(math.e) / r0
    return 1.0 + n2_per_n, n2_per_n
