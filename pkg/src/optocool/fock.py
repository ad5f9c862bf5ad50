"""Population dynamics of the mechanical oscillator in a truncated Fock basis.

Only the diagonal of the density matrix is tracked: with purely dissipative
Lindblad terms for ``a`` and ``a^dagger`` the coherences decouple from the
populations, which then obey a birth-death chain with rates

    n -> n-1 :  n     * (gamma_down + gamma_m (n_th + 1))
    n -> n+1 : (n + 1) * (gamma_up   + gamma_m n_th)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import spsolve

from .errors import CutoffTooSmall, NegativeRate, Unstable
from .noise import RateSet

TAIL_THRESHOLD = 1e-8
MIN_CUTOFF = 50
MAX_CUTOFF = 1 << 22


@dataclass(frozen=True)
class FockChain:
    """Birth-death generator over levels ``0..n_max``.

    ``down_coeff`` and ``up_coeff`` are the per-quantum rates; the transition
    out of level ``n`` goes down at ``n * down_coeff`` and up at
    ``(n + 1) * up_coeff``. The top level has no upward transition.
    """

    n_max: int
    down_coeff: float
    up_coeff: float

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_max + 1)

    def down_rates(self) -> np.ndarray:
        return self.levels * self.down_coeff

    def up_rates(self) -> np.ndarray:
        up = (self.levels + 1.0) * self.up_coeff
        up[-1] = 0.0
        return up

    @property
    def ratio(self) -> float:
        """Detailed-balance ratio ``p_{n+1} / p_n``, the same for every ``n``."""
        if self.down_coeff == 0:
            return math.inf
        return self.up_coeff / self.down_coeff

    def generator(self) -> sparse.csr_matrix:
        """Rate matrix ``L`` with ``dp/dt = L @ p``; columns sum to zero."""
        down, up = self.down_rates(), self.up_rates()
        # Each diagonal entry is minus the sum of its column's off-diagonals.
        diag = -(down + up)
        return sparse.diags([up[:-1], diag, down[1:]], [-1, 0, 1], format="csr")


@dataclass(frozen=True)
class PopulationState:
    probabilities: np.ndarray

    @property
    def mean(self) -> float:
        p = self.probabilities
        return float(np.dot(np.arange(p.size), p))

    @property
    def tail_mass(self) -> float:
        return float(self.probabilities[-1])


def build_chain(rates: RateSet, gamma_m: float, n_th: float, n_max: int) -> FockChain:
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    for name, value in (("gamma_down", rates.gamma_down), ("gamma_up", rates.gamma_up),
                        ("gamma_m", gamma_m), ("n_th", n_th)):
        if value < 0:
            raise NegativeRate(f"{name} = {value:g} is negative")
    down = rates.gamma_down + gamma_m * (n_th + 1.0)
    up = rates.gamma_up + gamma_m * n_th
    return FockChain(int(n_max), down, up)


def _check_damped(chain: FockChain) -> None:
    if chain.down_coeff == 0 and chain.up_coeff == 0:
        raise ValueError("all transition rates are zero; steady state is not unique")
    if not chain.down_coeff > chain.up_coeff:
        raise Unstable("upward rate coefficient >= downward: no normalisable steady state")


def geometric_distribution(ratio: float, n_max: int) -> np.ndarray:
    """Truncated geometric distribution ``p_n ∝ ratio**n`` on ``0..n_max``."""
    n = np.arange(n_max + 1)
    if ratio == 0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p
    w = np.exp(n * math.log(ratio))
    return w / w.sum()


def thermal_distribution(mean: float, n_max: int) -> np.ndarray:
    return geometric_distribution(mean / (mean + 1.0), n_max)


def steady_state(chain: FockChain, tail_threshold: float = TAIL_THRESHOLD) -> PopulationState:
    """Stationary distribution from detailed balance.

    Raises
    ------
    CutoffTooSmall
        If the population of the top level exceeds ``tail_threshold``.
    """
    _check_damped(chain)
    state = PopulationState(geometric_distribution(chain.ratio, chain.n_max))
    if state.tail_mass > tail_threshold:
        raise CutoffTooSmall(f"tail mass {state.tail_mass:.3g} at n_max={chain.n_max}")
    return state


def steady_state_nullspace(chain: FockChain) -> PopulationState:
    """Stationary distribution by a direct sparse solve of ``L p = 0, sum(p) = 1``.

    Kept independent of the detailed-balance route so each can check the other.
    """
    _check_damped(chain)
    gen = chain.generator().tolil()
    # Conservation makes the rows dependent; swap the first for normalisation.
    gen[0, :] = np.ones(chain.n_max + 1)
    rhs = np.zeros(chain.n_max + 1)
    rhs[0] = 1.0
    p = spsolve(gen.tocsc(), rhs)
    return PopulationState(np.clip(p, 0.0, None))


def default_cutoff(expected_mean: float) -> int:
    return max(MIN_CUTOFF, math.ceil(20.0 * expected_mean))


def auto_steady_state(rates: RateSet, gamma_m: float, n_th: float,
                      tail_threshold: float = TAIL_THRESHOLD) -> tuple[FockChain, PopulationState]:
    """Steady state with the cutoff chosen, and doubled as needed, automatically."""
    probe = build_chain(rates, gamma_m, n_th, 2)
    _check_damped(probe)
    expected = probe.up_coeff / (probe.down_coeff - probe.up_coeff)
    n_max = default_cutoff(expected)
    while True:
        chain = build_chain(rates, gamma_m, n_th, n_max)
        try:
            return chain, steady_state(chain, tail_threshold)
        except CutoffTooSmall:
            if n_max >= MAX_CUTOFF:
                raise
            n_max = min(2 * n_max, MAX_CUTOFF)


def relaxation_rate(rates: RateSet, gamma_m: float) -> float:
    total = gamma_m + rates.gamma_opt
    if not total > 0:
        raise Unstable(f"total damping {total:g} <= 0")
    return total


def evolve_mean(n0, rates: RateSet, gamma_m: float, n_th: float, t):
    """Closed-form exponential relaxation of the mean phonon number."""
    total = relaxation_rate(rates, gamma_m)
    n_ss = (gamma_m * n_th + rates.gamma_up) / total
    out = n_ss + (n0 - n_ss) * np.exp(-total * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def evolve_chain(chain: FockChain, p0: np.ndarray, times, rtol: float = 1e-10,
                 atol: float = 1e-14) -> np.ndarray:
    """Integrate ``dp/dt = L p`` from ``p0`` and return populations at ``times``.

    Uses an implicit BDF scheme with the sparse generator as Jacobian. Linear
    multistep methods conserve ``sum(p)`` up to rounding for any tolerance.
    Returns an array of shape ``(len(times), n_max + 1)``.
    """
    gen = chain.generator().tocsc()
    times = np.asarray(times, dtype=float)
    sol = solve_ivp(lambda _, p: gen @ p, (0.0, float(times.max())), np.asarray(p0, dtype=float),
                    method="BDF", t_eval=times, jac=gen, rtol=rtol, atol=atol)
    if not sol.success:
        raise ArithmeticError(sol.message)
    return sol.y.T


def mean_trajectory(populations: np.ndarray) -> np.ndarray:
    return populations @ np.arange(populations.shape[-1])
