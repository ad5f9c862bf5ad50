"""Radiation-pressure shot noise and the Golden-Rule cooling rates derived from it.

The force spectrum of a driven cavity is a Lorentzian of width ``kappa``
centred at ``omega = -detuning``. Spectral densities here are multiplied by
``x_ZPF**2 / hbar**2``, so that ``s_ff(+omega_m)`` and ``s_ff(-omega_m)`` are
directly the phonon absorption and emission rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotCooling, Unstable
from .params import ModelParams


@dataclass(frozen=True)
class NoiseSpectrum:
    """Shifted Lorentzian ``amplitude * kappa / ((omega + detuning)**2 + (kappa/2)**2)``."""

    amplitude: float
    kappa: float
    detuning: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "NoiseSpectrum":
        return cls(p.g0_ratio**2 * p.n_p * p.omega_m**2, p.kappa, p.detuning)

    def __call__(self, omega):
        return self.amplitude * self.kappa / ((omega + self.detuning) ** 2 + 0.25 * self.kappa**2)

    @property
    def peak(self) -> float:
        return 4.0 * self.amplitude / self.kappa


@dataclass(frozen=True)
class RateSet:
    gamma_down: float
    gamma_up: float
    gamma_opt: float
    n_min: float = math.nan
    n_steady: float = math.nan
    valid_weak_coupling: bool = True


def s_ff(omega, p: ModelParams):
    """Force noise spectral density at ``omega`` (scalar or array)."""
    return NoiseSpectrum.from_params(p)(omega)


def lorentzian_rates(detuning, kappa, rate_scale, omega_m=1.0):
    """Vectorised (gamma_down, gamma_up) for arrays of detunings and couplings.

    ``rate_scale`` is ``g0_ratio**2 * n_p * omega_m**2``.
    """
    quarter = 0.25 * np.square(kappa)
    down = rate_scale * kappa / (np.square(omega_m + detuning) + quarter)
    up = rate_scale * kappa / (np.square(detuning - omega_m) + quarter)
    return down, up


def golden_rule_rates(p: ModelParams) -> RateSet:
    """Phonon absorption/emission rates and their difference (the optical damping)."""
    spectrum = NoiseSpectrum.from_params(p)
    down = float(spectrum(p.omega_m))
    up = float(spectrum(-p.omega_m))
    gamma_opt = down - up
    return RateSet(down, up, gamma_opt, valid_weak_coupling=bool(gamma_opt < 0.5 * p.kappa))


def _limit_from_detuning(detuning, kappa, omega_m=1.0):
    # [S(w)/S(-w) - 1]^-1 with the Lorentzian inserted and simplified.
    return (np.square(detuning + omega_m) + 0.25 * np.square(kappa)) / (-4.0 * detuning * omega_m)


def quantum_limit(p: ModelParams) -> float:
    """Lowest phonon number reachable by optical cooling at this detuning.

    Raises
    ------
    NotCooling
        If the optical damping is not positive (blue or zero detuning, or no drive).
    """
    rates = golden_rule_rates(p)
    if not rates.gamma_opt > 0:
        raise NotCooling(f"gamma_opt = {rates.gamma_opt:g} <= 0 at detuning {p.detuning:g}")
    return float(_limit_from_detuning(p.detuning, p.kappa, p.omega_m))


def optimal_detuning(omega_m: float, kappa: float) -> float:
    return -math.hypot(omega_m, 0.5 * kappa)


def min_phonon(omega_m, kappa):
    """Quantum limit at the optimal detuning; works on arrays.

    Uses ``x**2 / (2 (sqrt(1+x**2) + 1))`` with ``x = kappa / (2 omega_m)``,
    which avoids cancellation in the resolved-sideband regime.
    """
    x2 = np.square(np.asarray(kappa, dtype=float) / (2.0 * np.asarray(omega_m, dtype=float)))
    out = 0.5 * x2 / (np.sqrt(1.0 + x2) + 1.0)
    return float(out) if np.ndim(out) == 0 else out


def steady_state_phonon(p: ModelParams, rates: RateSet | None = None) -> float:
    """Steady-state phonon number under thermal damping plus optical cooling.

    Evaluated as ``(gamma_m n_th + gamma_up) / (gamma_m + gamma_opt)``, which is
    the weighted average of ``n_th`` and the quantum limit but stays finite as
    ``gamma_opt -> 0``.
    """
    rates = rates or golden_rule_rates(p)
    total = p.gamma_m + rates.gamma_opt
    if not total > 0:
        raise Unstable(f"total damping gamma_m + gamma_opt = {total:g} <= 0")
    return (p.gamma_m * p.n_th + rates.gamma_up) / total


def rate_set(p: ModelParams) -> RateSet:
    """:func:`golden_rule_rates` with the quantum limit and steady state filled in.

    Undefined entries are NaN: ``n_min`` when not cooling, ``n_steady`` when unstable.
    """
    rates = golden_rule_rates(p)
    n_min = float(_limit_from_detuning(p.detuning, p.kappa, p.omega_m)) if rates.gamma_opt > 0 else math.nan
    try:
        n_steady = steady_state_phonon(p, rates)
    except Unstable:
        n_steady = math.nan
    return RateSet(rates.gamma_down, rates.gamma_up, rates.gamma_opt, n_min, n_steady,
                   rates.valid_weak_coupling)
