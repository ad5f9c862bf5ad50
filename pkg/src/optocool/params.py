"""Model parameters in the internal unit system.

All frequencies and rates are stored as multiples of the bare mechanical
frequency, with hbar = k_B = 1. Lengths never appear directly: the
optomechanical coupling enters only through the dimensionless composite

    g0_ratio = (omega_R / omega_M) * (x_ZPF / L)

so that the light-induced rates reduce to ``g0_ratio**2 * n_p * omega_m**2``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy import constants

from .errors import ConfigError, MissingField, NonPositiveParameter

# Keys accepted in configuration files (dimensionless ratios).
CONFIG_KEYS = (
    "omega_m_over_kappa",
    "kappa_over_omega_m",
    "gamma_m_over_omega_m",
    "quality_factor",
    "n_th",
    "n_p",
    "g0_ratio",
    "detuning_over_omega_m",
)
FIELD_KEYS = ("omega_m", "kappa", "gamma_m", "n_th", "n_p", "g0_ratio", "detuning")


@dataclass(frozen=True)
class ModelParams:
    """Cavity + mechanics + drive, normalized so that ``omega_m == 1``.

    Attributes
    ----------
    omega_m : float
        Mechanical angular frequency (1 after normalization).
    kappa : float
        Cavity energy decay rate.
    gamma_m : float
        Intrinsic mechanical damping rate.
    n_th : float
        Thermal occupation of the mechanical bath.
    n_p : float
        Circulating photon number.
    g0_ratio : float
        ``(omega_R/omega_M) * (x_ZPF/L)``.
    detuning : float
        Laser minus cavity frequency; negative values are red detuned.
    """

    omega_m: float
    kappa: float
    gamma_m: float
    n_th: float
    n_p: float
    g0_ratio: float
    detuning: float = 0.0

    def __post_init__(self) -> None:
        for name in FIELD_KEYS:
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{name} must be a real number, got {value!r}") from exc
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.omega_m <= 0:
            raise NonPositiveParameter(f"omega_m must be > 0, got {self.omega_m}")
        if self.kappa <= 0:
            raise NonPositiveParameter(f"kappa must be > 0, got {self.kappa}")
        for name in ("gamma_m", "n_th", "n_p", "g0_ratio"):
            if getattr(self, name) < 0:
                raise NonPositiveParameter(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.gamma_m > 0 and self.omega_m / self.gamma_m < 1:
            raise ConfigError(
                f"quality factor omega_m/gamma_m = {self.omega_m / self.gamma_m:g} is below 1"
            )

    @property
    def quality_factor(self) -> float:
        return self.omega_m / self.gamma_m if self.gamma_m > 0 else math.inf

    @property
    def alpha(self) -> float:
        return coupling_alpha(self)

    def replace(self, **changes: float) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def as_config(self) -> dict[str, float]:
        """Inverse of :func:`normalize` for a config-file dictionary."""
        p = normalize(self)
        return {
            "kappa_over_omega_m": p.kappa,
            "gamma_m_over_omega_m": p.gamma_m,
            "n_th": p.n_th,
            "n_p": p.n_p,
            "g0_ratio": p.g0_ratio,
            "detuning_over_omega_m": p.detuning,
        }


def _pick(raw: Mapping[str, Any], a: str, b: str) -> tuple[str, float] | None:
    has_a, has_b = a in raw, b in raw
    if has_a and has_b:
        raise ConfigError(f"give only one of {a!r} and {b!r}")
    if has_a:
        return a, raw[a]
    if has_b:
        return b, raw[b]
    return None


def _positive(name: str, value: Any) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a real number, got {value!r}") from exc
    if not value > 0:
        raise NonPositiveParameter(f"{name} must be > 0, got {value}")
    return value


def normalize(raw: ModelParams | Mapping[str, Any]) -> ModelParams:
    """Build :class:`ModelParams` in units of the mechanical frequency.

    ``raw`` may be an existing :class:`ModelParams`, a mapping with the field
    names of :class:`ModelParams` (``omega_m`` need not be 1), or a mapping
    with the dimensionless config keys listed in ``CONFIG_KEYS``. Missing
    ``n_p`` and ``detuning`` default to 0. Applying ``normalize`` twice is the
    same as applying it once.

    Raises
    ------
    MissingField
        A required ratio is absent.
    NonPositiveParameter
        A ratio that must be positive is not.
    """
    if isinstance(raw, ModelParams):
        if raw.omega_m == 1.0:
            return raw
        w = raw.omega_m
        return ModelParams(1.0, raw.kappa / w, raw.gamma_m / w, raw.n_th, raw.n_p,
                           raw.g0_ratio, raw.detuning / w)

    if not isinstance(raw, Mapping):
        raise ConfigError(f"cannot normalize object of type {type(raw).__name__}")

    if any(k in raw for k in ("omega_m", "kappa", "gamma_m", "detuning")):
        missing = [k for k in ("omega_m", "kappa", "gamma_m", "n_th", "g0_ratio") if k not in raw]
        if missing:
            raise MissingField(f"missing field(s): {', '.join(missing)}")
        w = _positive("omega_m", raw["omega_m"])
        return normalize(ModelParams(
            w, raw["kappa"], raw["gamma_m"], raw["n_th"], raw.get("n_p", 0.0),
            raw["g0_ratio"], raw.get("detuning", 0.0),
        ))

    kappa_key = _pick(raw, "omega_m_over_kappa", "kappa_over_omega_m")
    if kappa_key is None:
        raise MissingField("need omega_m_over_kappa or kappa_over_omega_m")
    name, value = kappa_key
    value = _positive(name, value)
    kappa = 1.0 / value if name == "omega_m_over_kappa" else value

    gamma_key = _pick(raw, "gamma_m_over_omega_m", "quality_factor")
    if gamma_key is None:
        raise MissingField("need gamma_m_over_omega_m or quality_factor")
    name, value = gamma_key
    if name == "quality_factor":
        gamma_m = 1.0 / _positive(name, value)
    else:
        gamma_m = value

    for key in ("n_th", "g0_ratio"):
        if key not in raw:
            raise MissingField(f"missing field {key!r}")

    return ModelParams(
        omega_m=1.0,
        kappa=kappa,
        gamma_m=gamma_m,
        n_th=raw["n_th"],
        n_p=raw.get("n_p", 0.0),
        g0_ratio=raw["g0_ratio"],
        detuning=raw.get("detuning_over_omega_m", 0.0),
    )


def bose_occupation(omega: float, temperature: float) -> float:
    """Thermal occupation for angular frequency ``omega`` [rad/s] at ``temperature`` [K]."""
    if temperature <= 0:
        return 0.0
    x = constants.hbar * omega / (constants.k * temperature)
    return float(1.0 / np.expm1(x))


def from_si(
    omega_m: float,
    kappa: float,
    gamma_m: float,
    omega_r: float,
    x_zpf: float,
    length: float,
    n_p: float = 0.0,
    detuning: float = 0.0,
    n_th: float | None = None,
    temperature: float | None = None,
) -> ModelParams:
    """Convert SI quantities (angular frequencies in rad/s, lengths in m).

    Exactly one of ``n_th`` and ``temperature`` [K] must be given.
    """
    if (n_th is None) == (temperature is None):
        raise ConfigError("give exactly one of n_th and temperature")
    w = _positive("omega_m", omega_m)
    if n_th is None:
        n_th = bose_occupation(w, temperature)
    g0 = (omega_r / w) * (x_zpf / _positive("length", length))
    return ModelParams(1.0, kappa / w, gamma_m / w, n_th, n_p, g0, detuning / w)


def coupling_alpha(p: ModelParams) -> float:
    """Coupling frequency ``omega_R sqrt(n_p) x_ZPF / L`` in the units of ``p``."""
    return p.g0_ratio * math.sqrt(p.n_p) * p.omega_m
