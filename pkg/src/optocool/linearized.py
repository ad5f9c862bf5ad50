"""Linearized quantum Langevin dynamics of the coupled cavity and cantilever.

Fluctuations ``v = (d, d^dagger, c, c^dagger)`` around the classical steady
state obey ``dv/dt = A v + B xi`` with

    d/dt d = (i Delta - kappa/2) d + i alpha (c + c^dagger) + sqrt(kappa) d_in
    d/dt c = (-i omega_m - gamma_m/2) c + i alpha (d + d^dagger) + sqrt(gamma_m) c_in

and conjugate equations for the creation operators. No rotating-wave
approximation is made on the coupling. Inputs are white: the cavity input is
vacuum, the mechanical input has occupation ``n_th``.

Fourier convention: ``x(t) = ∫ x[w] exp(-i w t) dw / 2π``. The motion spectrum
``S_cc(w) = ∫ dt exp(i w t) <c^dagger(t) c(0)>`` then peaks at ``w ≈ -omega_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg
from scipy.signal import find_peaks

from .errors import QuadratureNotConverged, UnstableSystem
from .params import ModelParams, coupling_alpha

D, DDAG, C, CDAG = range(4)
_CONJ = np.array([DDAG, D, CDAG, C])


@dataclass(frozen=True)
class DynamicalSystem:
    drift: np.ndarray
    noise_amplitudes: np.ndarray  # diagonal of B
    noise_occupations: dict = field(default_factory=dict)
    params: ModelParams | None = None

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.drift)

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.eigenvalues.real < 0))

    def input_correlations(self) -> np.ndarray:
        """``N`` with ``<xi_i(t) xi_j(t')> = N_ij delta(t - t')``."""
        n_cav = self.noise_occupations.get("cavity", 0.0)
        n_mech = self.noise_occupations.get("mechanics", 0.0)
        N = np.zeros((4, 4))
        N[D, DDAG], N[DDAG, D] = n_cav + 1.0, n_cav
        N[C, CDAG], N[CDAG, C] = n_mech + 1.0, n_mech
        return N

    def diffusion(self) -> np.ndarray:
        b = self.noise_amplitudes
        return b[:, None] * self.input_correlations() * b[None, :]

    def require_stable(self) -> None:
        ev = self.eigenvalues
        if not np.all(ev.real < 0):
            raise UnstableSystem(f"drift eigenvalue with real part {ev.real.max():.3g} >= 0")


class NormalMode(NamedTuple):
    frequency: float
    width: float


@dataclass(frozen=True)
class SpectrumGrid:
    omegas: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def weight(self) -> float:
        """Trapezoidal estimate of ``∫ S_cc dw / 2π`` over the sampled range."""
        return float(np.trapz(self.values, self.omegas) / (2 * np.pi))


def build_system(p: ModelParams) -> DynamicalSystem:
    alpha = coupling_alpha(p)
    A = np.zeros((4, 4), dtype=complex)
    A[D, D] = 1j * p.detuning - 0.5 * p.kappa
    A[D, C] = A[D, CDAG] = 1j * alpha
    A[C, C] = -1j * p.omega_m - 0.5 * p.gamma_m
    A[C, D] = A[C, DDAG] = 1j * alpha
    A[DDAG] = A[D].conj()[_CONJ]
    A[CDAG] = A[C].conj()[_CONJ]
    b = np.sqrt([p.kappa, p.kappa, p.gamma_m, p.gamma_m])
    return DynamicalSystem(A, b, {"cavity": 0.0, "mechanics": p.n_th}, p)


def normal_modes(sys: DynamicalSystem) -> list[NormalMode]:
    """Eigenmodes of the drift as (frequency, full width) pairs, sorted by frequency.

    A mode ``exp(lambda t)`` oscillates at ``-Im(lambda)`` and decays in
    energy at ``-2 Re(lambda)``; modes come in ``±frequency`` pairs.
    """
    ev = sys.eigenvalues
    modes = [NormalMode(float(-z.imag), float(-2 * z.real)) for z in ev]
    return sorted(modes)


def _mech_response(sys: DynamicalSystem, omegas: np.ndarray) -> np.ndarray:
    """Rows ``(G(w) B)[c, :]`` of the frequency-domain response, shape (n, 4)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    eye = np.eye(4)
    # Row c of inv(M) solves M^T y = e_c.
    mats = -1j * omegas[:, None, None] * eye - sys.drift
    rhs = np.broadcast_to(eye[C], (omegas.size, 4))[..., None]
    rows = np.linalg.solve(np.swapaxes(mats, -1, -2), rhs)[..., 0]
    return rows * sys.noise_amplitudes


def _s_cc_values(sys: DynamicalSystem, omegas) -> np.ndarray:
    # S_cc(w) = sum_j |(G B)_{c j}(-w)|^2 <xi_j^dagger xi_j>.
    N = sys.input_correlations()
    occupation = N[_CONJ, np.arange(4)]
    power = np.abs(_mech_response(sys, -np.asarray(omegas, dtype=float))) ** 2 * occupation
    # Fixed summation order keeps values independent of the batch size.
    return ((power[:, 0] + power[:, 1]) + power[:, 2]) + power[:, 3]


def s_cc(sys: DynamicalSystem, omegas) -> SpectrumGrid:
    """Cantilever motion spectrum on a frequency grid.

    Raises
    ------
    UnstableSystem
        No stationary spectrum exists.
    """
    sys.require_stable()
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    meta = {"detuning": sys.params.detuning} if sys.params is not None else {}
    return SpectrumGrid(omegas, _s_cc_values(sys, omegas), meta)


def s_cc_map(p: ModelParams, detunings, omegas) -> np.ndarray:
    """``S_cc`` on a (detuning, omega) grid; unstable rows are NaN."""
    out = np.full((len(detunings), len(omegas)), np.nan)
    for i, delta in enumerate(detunings):
        sys = build_system(p.replace(detuning=float(delta)))
        if sys.is_stable:
            out[i] = _s_cc_values(sys, omegas)
    return out


def phonon_number_lyapunov(sys: DynamicalSystem) -> float:
    """``<c^dagger c>`` from the stationary second moments ``A X + X A^T + D = 0``."""
    sys.require_stable()
    A = sys.drift
    X = linalg.solve_sylvester(A, A.T, -sys.diffusion())
    return float(X[CDAG, C].real)


def _breakpoints(sys: DynamicalSystem) -> np.ndarray:
    ev = sys.eigenvalues
    scale = max(1.0, float(np.max(np.abs(ev.imag))))
    points = [0.0]
    for z in ev:
        half = max(abs(z.real), 1e-12 * scale)
        offsets = half * 2.0 ** np.arange(-4, 80)
        offsets = offsets[offsets < 1e9 * scale]
        for centre in (z.imag, -z.imag):
            points.extend(centre + offsets)
            points.extend(centre - offsets)
            points.append(centre)
    return np.unique(points)


def _panel_quadrature(sys, edges, order):
    x, w = leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    vals = _s_cc_values(sys, nodes.ravel()).reshape(nodes.shape)
    return float(np.sum(0.5 * (hi - lo) * vals * w) / (2 * np.pi))


def phonon_number_quadrature(sys: DynamicalSystem, rtol: float = 1e-10,
                             max_order: int = 256) -> float:
    """``∫ S_cc dw / 2π`` by Gauss-Legendre panels refined around every mode.

    Panels grow geometrically away from each resonance; the node count per
    panel is doubled until the result changes by less than ``rtol``. The
    ``1/w**2`` tail beyond the outermost panel is added analytically.
    """
    sys.require_stable()
    edges = _breakpoints(sys)
    order = 8
    prev = _panel_quadrature(sys, edges, order)
    while order < max_order:
        order *= 2
        cur = _panel_quadrature(sys, edges, order)
        if abs(cur - prev) <= rtol * abs(cur):
            tails = _s_cc_values(sys, edges[[0, -1]]) * np.abs(edges[[0, -1]])
            return cur + float(tails.sum() / (2 * np.pi))
        prev = cur
    raise QuadratureNotConverged(f"no convergence with {order} nodes per panel")


def phonon_number(sys: DynamicalSystem, rtol: float = 1e-4) -> float:
    """Mean phonon number, cross-checked between quadrature and the Lyapunov solve.

    Raises
    ------
    QuadratureNotConverged
        If the two routes disagree by more than ``rtol``.
    """
    n_lyap = phonon_number_lyapunov(sys)
    n_quad = phonon_number_quadrature(sys)
    if abs(n_quad - n_lyap) > rtol * abs(n_lyap):
        raise QuadratureNotConverged(f"quadrature {n_quad:.8g} vs Lyapunov {n_lyap:.8g}")
    return n_lyap


def spectrum_peaks(grid: SpectrumGrid, rel_prominence: float = 0.0) -> np.ndarray:
    """Frequencies of the local maxima of a sampled spectrum."""
    values = grid.values
    idx, _ = find_peaks(values, prominence=rel_prominence * float(np.max(values)) or None)
    return grid.omegas[idx]


def peak_fwhm(grid: SpectrumGrid) -> tuple[float, float]:
    """(location, full width at half maximum) of the tallest peak, linearly interpolated."""
    v, w = grid.values, grid.omegas
    k = int(np.argmax(v))
    half = 0.5 * v[k]
    left = k
    while left > 0 and v[left] > half:
        left -= 1
    right = k
    while right < v.size - 1 and v[right] > half:
        right += 1
    if v[left] > half or v[right] > half:
        raise ValueError("half maximum not bracketed by the grid")
    wl = np.interp(half, [v[left], v[left + 1]], [w[left], w[left + 1]])
    wr = np.interp(half, [v[right], v[right - 1]], [w[right], w[right - 1]])
    return float(w[k]), float(wr - wl)
