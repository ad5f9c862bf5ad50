"""Parameter sweeps over detuning, photon number and frequency.

Cells are evaluated independently and written into a preallocated grid by
index, so results do not depend on the number of worker threads or on the
order in which chunks finish. Failures inside a cell become status flags.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import linearized, noise
from .errors import ConfigError
from .params import ModelParams, normalize

OK = "ok"
UNSTABLE = "unstable"
NOT_COOLING = "not-cooling"
WEAK_INVALID = "weak-coupling-invalid"

AXIS_NAMES = ("detuning", "n_p", "omega", "omega_m_over_kappa")
OBSERVABLES = ("n_steady", "gamma_opt", "n_min", "min_phonon", "s_cc", "s_cc_neg")
_SPECTRAL = ("s_cc", "s_cc_neg")
_UNITS = {"detuning": "omega_m", "n_p": "1", "omega": "omega_m", "omega_m_over_kappa": "1"}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if int(self.count) != self.count or self.count < 1:
            raise ConfigError(f"axis {self.name}: count must be a positive integer")
        if self.count >= 2 and not self.min < self.max:
            raise ConfigError(f"axis {self.name}: need min < max")
        if self.count == 1 and self.min != self.max:
            raise ConfigError(f"axis {self.name}: a single-point axis needs min == max")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis {self.name}: scale must be 'linear' or 'log'")
        if self.scale == "log" and not self.min > 0:
            raise ConfigError(f"axis {self.name}: log scale requires min > 0")

    @classmethod
    def point(cls, name: str, value: float) -> "Axis":
        return cls(name, value, value, 1)

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, int(self.count))
        return np.linspace(self.min, self.max, int(self.count))

    @property
    def label(self) -> str:
        return f"{self.name}[{_UNITS[self.name]}]"


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    observable: str
    base: ModelParams
    axis2: Axis | None = None

    def __post_init__(self) -> None:
        if self.observable not in OBSERVABLES:
            raise ConfigError(f"unknown observable {self.observable!r}; expected one of {OBSERVABLES}")
        axes = self.axes
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ConfigError("the two axes must differ")
        if ("omega" in names) != (self.observable in _SPECTRAL):
            raise ConfigError("an 'omega' axis is required for, and only allowed with, s_cc observables")
        if "omega_m_over_kappa" in names and self.observable not in ("min_phonon", "n_min", "n_steady", "gamma_opt"):
            raise ConfigError("omega_m_over_kappa axis only applies to rate observables")

    @property
    def axes(self) -> tuple[Axis, ...]:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(a.count) for a in self.axes)


@dataclass
class GridResult:
    axes: tuple[Axis, ...]
    axis_values: tuple[np.ndarray, ...]
    values: np.ndarray
    status: np.ndarray
    observable: str
    base: ModelParams
    meta: dict = field(default_factory=dict)

    def rows(self):
        """Yield ``(axis1, [axis2,] value, status)`` in C order."""
        for idx in np.ndindex(self.values.shape):
            coords = [float(v[i]) for v, i in zip(self.axis_values, idx)]
            yield (*coords, float(self.values[idx]), str(self.status[idx]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        value_name = "S_cc(-omega)" if self.observable == "s_cc_neg" else self.observable
        writer.writerow([a.label for a in self.axes] + [value_name, "status"])
        for row in self.rows():
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        def clean(a):
            return [None if not math.isfinite(x) else x for x in np.asarray(a, dtype=float).ravel()]

        return {
            "observable": self.observable,
            "base": self.base.as_config(),
            "axes": [{"name": a.name, "unit": _UNITS[a.name], "scale": a.scale, "values": clean(v)}
                     for a, v in zip(self.axes, self.axis_values)],
            "shape": list(self.values.shape),
            "values": clean(self.values),
            "status": [str(s) for s in self.status.ravel()],
            **({"meta": self.meta} if self.meta else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _rate_cell(observable: str, p: ModelParams) -> tuple[float, str]:
    if observable == "min_phonon":
        return noise.min_phonon(p.omega_m, p.kappa), OK
    rates = noise.golden_rule_rates(p)
    if not p.gamma_m + rates.gamma_opt > 0:
        status = UNSTABLE
    elif not rates.gamma_opt > 0:
        status = NOT_COOLING
    elif not rates.valid_weak_coupling:
        status = WEAK_INVALID
    else:
        status = OK
    if observable == "gamma_opt":
        return rates.gamma_opt, status
    if observable == "n_min":
        if status in (UNSTABLE, NOT_COOLING):
            return math.nan, status
        return noise.quantum_limit(p), status
    # n_steady
    if status == UNSTABLE:
        return math.nan, status
    return noise.steady_state_phonon(p, rates), status


def _cell_params(base: ModelParams, assignments: Mapping[str, float]) -> ModelParams:
    changes = {}
    for name, value in assignments.items():
        if name == "detuning":
            changes["detuning"] = value * base.omega_m
        elif name == "n_p":
            changes["n_p"] = value
        elif name == "omega_m_over_kappa":
            changes["kappa"] = base.omega_m / value
    return base.replace(**changes) if changes else base


def _evaluate_row(spec: SweepSpec, i: int, axis_values, values, status) -> None:
    """Fill row ``i`` of the output arrays."""
    axes = spec.axes
    x1 = float(axis_values[0][i])
    if spec.observable in _SPECTRAL:
        # 'omega' is one of the axes; the other (if any) sets a parameter.
        if axes[0].name == "omega":
            omegas = axis_values[0][i:i + 1]
            others = [(axes[1].name, axis_values[1])] if spec.axis2 is not None else []
            for j, value in enumerate(others[0][1] if others else [None]):
                assign = {others[0][0]: float(value)} if others else {}
                val, st = _spectral_row(spec, _cell_params(spec.base, assign), omegas)
                idx = (i, j) if spec.axis2 is not None else (i,)
                values[idx], status[idx] = val[0], st
            return
        val, st = _spectral_row(spec, _cell_params(spec.base, {axes[0].name: x1}), axis_values[1])
        values[i], status[i] = val, st
        return
    if spec.axis2 is None:
        values[i], status[i] = _rate_cell(spec.observable, _cell_params(spec.base, {axes[0].name: x1}))
        return
    for j, x2 in enumerate(axis_values[1]):
        p = _cell_params(spec.base, {axes[0].name: x1, axes[1].name: float(x2)})
        values[i, j], status[i, j] = _rate_cell(spec.observable, p)


def _spectral_row(spec: SweepSpec, p: ModelParams, omegas: np.ndarray):
    sys = linearized.build_system(p)
    if not sys.is_stable:
        return np.full(len(omegas), np.nan), UNSTABLE
    w = np.asarray(omegas, dtype=float) * p.omega_m
    if spec.observable == "s_cc_neg":
        w = -w
    return linearized.s_cc(sys, w).values, OK


def default_threads() -> int:
    env = os.environ.get("OPTOCOOL_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"OPTOCOOL_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError("OPTOCOOL_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, threads: int | None = None) -> GridResult:
    """Evaluate the observable on every cell of the sweep grid.

    Rows of the first axis are distributed over ``threads`` workers; each
    worker writes only its own rows, so the output is identical for any
    thread count.
    """
    threads = threads or default_threads()
    axis_values = tuple(a.values() for a in spec.axes)
    values = np.full(spec.shape, np.nan)
    status = np.full(spec.shape, OK, dtype=object)
    rows = range(spec.shape[0])
    if threads == 1 or spec.shape[0] == 1:
        for i in rows:
            _evaluate_row(spec, i, axis_values, values, status)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda i: _evaluate_row(spec, i, axis_values, values, status), rows))
    return GridResult(spec.axes, axis_values, values, status.astype(str), spec.observable, spec.base)


# --- contours -----------------------------------------------------------------


def _axis_coordinate(axis: Axis, values: np.ndarray, index_coords: np.ndarray) -> np.ndarray:
    """Map fractional grid indices to axis values (geometric between log samples)."""
    idx = np.arange(values.size)
    if axis.scale == "log":
        return np.exp(np.interp(index_coords, idx, np.log(values)))
    return np.interp(index_coords, idx, values)


def extract_contours(grid: GridResult, levels: Sequence[float]) -> dict[float, list[np.ndarray]]:
    """Level sets of a 2-D scalar grid by marching squares.

    Returns ``{level: [polyline, ...]}`` with each polyline an ``(k, 2)`` array
    of ``(axis1, axis2)`` coordinates. Levels outside the data range map to an
    empty list. Undefined (NaN) cells are treated as the grid maximum, which
    suits occupation-like observables that diverge where the system is unstable.
    """
    from skimage.measure import find_contours

    if grid.values.ndim != 2:
        raise ConfigError("contours need a 2-D grid")
    data = np.asarray(grid.values, dtype=float)
    finite = np.isfinite(data)
    out: dict[float, list[np.ndarray]] = {}
    if not finite.any():
        return {float(lv): [] for lv in levels}
    data = np.where(finite, data, np.nanmax(data))
    lo, hi = float(data.min()), float(data.max())
    for level in levels:
        level = float(level)
        if not math.isfinite(level) or not lo < level < hi:
            out[level] = []
            continue
        lines = []
        for path in find_contours(data, level):
            a = _axis_coordinate(grid.axes[0], grid.axis_values[0], path[:, 0])
            b = _axis_coordinate(grid.axes[1], grid.axis_values[1], path[:, 1])
            lines.append(np.column_stack([a, b]))
        out[level] = lines
    return out


def ridge_separation(grid: GridResult) -> np.ndarray:
    """Distance between the two tallest local maxima along axis 2, per axis-1 row.

    Rows with fewer than two maxima give NaN.
    """
    from scipy.signal import find_peaks

    sep = np.full(grid.values.shape[0], np.nan)
    w = grid.axis_values[1]
    for i, row in enumerate(grid.values):
        if not np.all(np.isfinite(row)):
            continue
        idx, _ = find_peaks(row)
        if idx.size >= 2:
            top = idx[np.argsort(row[idx])[-2:]]
            sep[i] = abs(w[top[1]] - w[top[0]])
    return sep


# --- presets ------------------------------------------------------------------

FIG2_PARAMS = {"omega_m_over_kappa": 0.3, "n_th": 1e3, "quality_factor": 1e6, "g0_ratio": 0.012}
FIG3_PARAMS = {"kappa_over_omega_m": 0.1, "gamma_m_over_omega_m": 1e-5, "g0_ratio": 0.01,
               "n_p": 100.0, "n_th": 1e3, "detuning_over_omega_m": -1.0}

PRESETS: dict[str, dict[str, Any]] = {
    "fig2a": {
        **FIG2_PARAMS,
        "sweep": {
            "axis1": {"name": "detuning", "min": -4.0, "max": 1.0, "count": 201},
            "axis2": {"name": "n_p", "min": 0.1, "max": 1e4, "count": 161, "scale": "log"},
            "observable": "n_steady",
        },
    },
    "fig2b": {
        **FIG2_PARAMS,
        "sweep": {
            "axis1": {"name": "omega_m_over_kappa", "min": 0.01, "max": 100.0, "count": 200, "scale": "log"},
            "observable": "min_phonon",
        },
    },
    "fig3": {
        **FIG3_PARAMS,
        "sweep": {
            "axis1": {"name": "detuning", "min": -1.5, "max": -0.5, "count": 200},
            "axis2": {"name": "omega", "min": 0.5, "max": 1.5, "count": 400},
            "observable": "s_cc_neg",
        },
    },
}


def preset_config(name: str) -> dict[str, Any]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    return json.loads(json.dumps(PRESETS[name]))


def _axis_from_config(raw: Any) -> Axis:
    if not isinstance(raw, Mapping):
        raise ConfigError("axis must be a mapping")
    unknown = set(raw) - {"name", "min", "max", "count", "scale"}
    if unknown:
        raise ConfigError(f"unknown axis keys {sorted(unknown)}")
    try:
        return Axis(str(raw["name"]), float(raw["min"]), float(raw["max"]), int(raw["count"]),
                    str(raw.get("scale", "linear")))
    except KeyError as exc:
        raise ConfigError(f"axis missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad axis value: {exc}") from exc


def spec_from_config(config: Mapping[str, Any]) -> SweepSpec:
    sweep = config.get("sweep")
    if not isinstance(sweep, Mapping):
        raise ConfigError("config has no 'sweep' section")
    if "axis1" not in sweep or "observable" not in sweep:
        raise ConfigError("sweep needs 'axis1' and 'observable'")
    axis2 = _axis_from_config(sweep["axis2"]) if sweep.get("axis2") is not None else None
    return SweepSpec(_axis_from_config(sweep["axis1"]), str(sweep["observable"]), normalize(config), axis2)
