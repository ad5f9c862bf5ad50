"""Classical picture: a light force that follows the cantilever with a time lag.

The force relaxes towards its position-dependent value,
``dF/dt = (force_profile(x) - F) / tau``, and drives a damped oscillator
``m x'' = -m omega_m**2 (x - x0) - m gamma_m x' + F``. Linearizing about the
working point gives extra damping and a softened spring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, NegativeTotalDamping, NonPositiveParameter, StepTooLarge, UnstableSpring
from .params import ModelParams

# step must be below this fraction of min(1/omega_m, tau)
MAX_STEP_FRACTION = 0.1


@dataclass(frozen=True)
class ClassicalParams:
    mass: float
    tau: float
    f_max: float = 0.0
    i_max: float = 1.0
    x_equilibrium: float = 0.0
    temperature: float = 1.0

    def __post_init__(self) -> None:
        for name in ("mass", "tau", "i_max"):
            if not getattr(self, name) > 0:
                raise NonPositiveParameter(f"{name} must be > 0, got {getattr(self, name)}")
        if self.temperature < 0:
            raise NonPositiveParameter(f"temperature must be >= 0, got {self.temperature}")


@dataclass(frozen=True)
class LagForceModel:
    force_profile: Callable[[np.ndarray], np.ndarray]
    tau: float
    slope_at_working_point: float

    @classmethod
    def linear(cls, slope: float, tau: float, x_bar: float = 0.0) -> "LagForceModel":
        """Force ``slope * (x - x_bar)``, vanishing at the working point."""
        return cls(lambda x: slope * (x - x_bar), tau, slope)

    @classmethod
    def bolometric(cls, p: ModelParams, c: ClassicalParams) -> "LagForceModel":
        """Photothermal force ``f_max * I(x) / I_max`` with the cavity intensity profile."""
        profile = lambda x: c.f_max * intensity_profile(x, p, c.i_max) / c.i_max
        x_bar = working_point(profile, p, c)
        delta = p.g0_ratio * p.omega_m * x_bar
        u = 2.0 * delta / p.kappa
        # d/dx [1/(1+u^2)] with du/dx = 2 g0 omega_m / kappa
        slope = -c.f_max * 2.0 * u / (1.0 + u * u) ** 2 * (2.0 * p.g0_ratio * p.omega_m / p.kappa)
        return cls(profile, c.tau, slope)


@dataclass(frozen=True)
class ClassicalResult:
    gamma_opt: float
    omega_m_tilde: float
    t_eff: float


@dataclass
class LangevinResult:
    times: np.ndarray
    x: np.ndarray
    force: np.ndarray
    x_bar: float
    position_variance: float
    standard_error: float


def intensity_profile(x, p: ModelParams, i_max: float = 1.0):
    """Cavity intensity at displacement ``x`` given in units of ``x_ZPF``.

    The position-dependent detuning is ``g0_ratio * omega_m * x``; the laser is
    resonant with the cavity at ``x = 0``.
    """
    delta = p.g0_ratio * p.omega_m * np.asarray(x, dtype=float)
    return i_max / (1.0 + (2.0 * delta / p.kappa) ** 2)


def gamma_opt_classical(slope, mass, omega_m, tau):
    wt = omega_m * tau
    return slope / (mass * omega_m) * wt / (1.0 + wt * wt)


def frequency_shift_classical(slope: float, mass: float, omega_m: float, tau: float) -> float:
    """Renormalized frequency from the in-phase part of the lagged force at ``omega_m``.

    Raises
    ------
    UnstableSpring
        If the light force overwhelms the mechanical spring.
    """
    wt = omega_m * tau
    arg = omega_m**2 - slope / (mass * (1.0 + wt * wt))
    if not arg > 0:
        raise UnstableSpring(f"effective spring constant {mass * arg:g} <= 0")
    return math.sqrt(arg)


def effective_temperature(t_bath: float, gamma_m: float, gamma_opt: float) -> float:
    total = gamma_m + gamma_opt
    if not total > 0:
        raise NegativeTotalDamping(f"gamma_m + gamma_opt = {total:g} <= 0")
    return t_bath * gamma_m / total


def classical_result(model: LagForceModel, p: ModelParams, c: ClassicalParams) -> ClassicalResult:
    g = gamma_opt_classical(model.slope_at_working_point, c.mass, p.omega_m, model.tau)
    w = frequency_shift_classical(model.slope_at_working_point, c.mass, p.omega_m, model.tau)
    return ClassicalResult(g, w, effective_temperature(c.temperature, p.gamma_m, g))


def working_point(profile, p: ModelParams, c: ClassicalParams) -> float:
    """Static equilibrium ``m omega_m**2 (x - x0) = profile(x)`` nearest ``x0``."""
    k = c.mass * p.omega_m**2
    residual = lambda x: k * (x - c.x_equilibrium) - float(profile(x))
    f0 = float(profile(c.x_equilibrium))
    if f0 == 0.0:
        return c.x_equilibrium
    # The root lies between x0 and the displacement the static force would give
    # with the spring alone, widened until the residual changes sign.
    span = abs(f0) / k
    lo, hi = c.x_equilibrium - span, c.x_equilibrium + span
    for _ in range(60):
        if residual(lo) * residual(hi) <= 0:
            return brentq(residual, lo, hi, xtol=1e-14 * max(1.0, abs(hi)))
        span *= 2
        lo, hi = c.x_equilibrium - span, c.x_equilibrium + span
    raise UnstableSpring("no static equilibrium found")


def simulate_langevin(
    model: LagForceModel,
    c: ClassicalParams,
    p: ModelParams,
    duration: float,
    step: float,
    seed: int | None = 0,
    n_trajectories: int = 256,
    burn_in: float | None = None,
    record_every: int = 10,
) -> LangevinResult:
    """Integrate the lagged-force oscillator with thermal noise.

    An ensemble of independent trajectories is advanced together with the
    stochastic Heun scheme (weak order two for additive noise). The thermal
    force is white with spectral density ``2 m gamma_m k_B T``. The position
    variance is averaged over time after ``burn_in`` and over the ensemble;
    its standard error comes from the spread of per-trajectory averages.
    Trajectory 0 is returned (every ``record_every`` steps) as the sample path.

    Raises
    ------
    StepTooLarge
        ``step`` exceeds ``MAX_STEP_FRACTION * min(1/omega_m, tau)``.
    UnstableSpring
        The linearized motion about the working point is not a stable oscillation.
    """
    if step <= 0 or duration <= 0:
        raise ConfigError("duration and step must be positive")
    if step > MAX_STEP_FRACTION * min(1.0 / p.omega_m, model.tau):
        raise StepTooLarge(f"step {step:g} too large for omega_m={p.omega_m:g}, tau={model.tau:g}")
    if n_trajectories < 2:
        raise ConfigError("need at least two trajectories for an error estimate")

    result = classical_result(model, p, c)
    if p.gamma_m + result.gamma_opt <= 0:
        raise UnstableSpring("negative total damping: self-induced oscillations")
    if burn_in is None:
        burn_in = min(10.0 / (p.gamma_m + result.gamma_opt), 0.5 * duration)
    x_bar = working_point(model.force_profile, p, c)

    rng = np.random.default_rng(seed)
    m, w2, gm, tau = c.mass, p.omega_m**2, p.gamma_m, model.tau
    n = n_trajectories
    # Start from the thermal state the weak-coupling theory predicts.
    sd_x = math.sqrt(result.t_eff / (m * result.omega_m_tilde**2)) if result.t_eff > 0 else 0.0
    sd_v = math.sqrt(result.t_eff / m) if result.t_eff > 0 else 0.0
    x = x_bar + sd_x * rng.standard_normal(n)
    v = sd_v * rng.standard_normal(n)
    f = np.asarray(model.force_profile(x), dtype=float)
    noise_sd = math.sqrt(2.0 * gm * c.temperature / m * step)
    x0 = c.x_equilibrium
    profile = model.force_profile

    def drift(x, v, f):
        return v, -w2 * (x - x0) - gm * v + f / m, (profile(x) - f) / tau

    n_steps = int(round(duration / step))
    n_burn = int(round(burn_in / step))
    if n_burn >= n_steps:
        raise ConfigError("burn_in must be shorter than duration")
    acc = np.zeros(n)
    rec_t, rec_x, rec_f = [], [], []
    for k in range(n_steps):
        if k % record_every == 0:
            rec_t.append(k * step)
            rec_x.append(x[0])
            rec_f.append(f[0])
        dw = noise_sd * rng.standard_normal(n)
        a1, b1, c1 = drift(x, v, f)
        xp, vp, fp = x + a1 * step, v + b1 * step + dw, f + c1 * step
        a2, b2, c2 = drift(xp, vp, fp)
        x = x + 0.5 * (a1 + a2) * step
        v = v + 0.5 * (b1 + b2) * step + dw
        f = f + 0.5 * (c1 + c2) * step
        if k >= n_burn:
            acc += (x - x_bar) ** 2
    per_traj = acc / (n_steps - n_burn)
    variance = float(per_traj.mean())
    sem = float(per_traj.std(ddof=1) / math.sqrt(n))
    return LangevinResult(np.array(rec_t), np.array(rec_x), np.array(rec_f), x_bar, variance, sem)
