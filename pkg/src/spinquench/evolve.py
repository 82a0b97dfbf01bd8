"""Time evolution of the collapsed state and magnetization time series.

Two propagators:

* Krylov: Lanczos factorization of H at the current state, with the
  exponential evaluated in the subspace.  One factorization serves every
  sample time it can reach within the local error tolerance, which keeps the
  matvec count near the theoretical ||H|| * t floor.
* spectral: exact reconstruction from a complete eigendecomposition
  (small systems; the oracle for the Krylov path).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .eigensolve import SpectrumTable
from .hamiltonians import LinearOperator
from .quench import CollapseResult
from .statespace import StateVector, apply_pauli, expectation

__all__ = [
    "TimeGrid",
    "TimeSeries",
    "PropagatorConfig",
    "krylov_step",
    "spectral_evolve",
    "magnetization_series",
    "spectral_magnetization",
    "SpectralSeries",
    "magnetization_difference",
]


@dataclass(frozen=True)
class TimeGrid:
    t_max: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")

    @property
    def count(self) -> int:
        return int(np.floor(self.t_max / self.dt + 1e-9)) + 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.count) * self.dt

    def to_dict(self):
        return {"t_max": self.t_max, "dt": self.dt}


@dataclass
class TimeSeries:
    grid: TimeGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.count,):
            raise ValueError("value count does not match the time grid")


@dataclass(frozen=True)
class PropagatorConfig:
    method: str = "krylov"          # "krylov" or "spectral"
    krylov_dim: int = 30
    step_tol: float = 1e-10
    max_krylov_dim: int = 120

    def __post_init__(self):
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")
        if self.method not in ("krylov", "spectral"):
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self):
        return {"method": self.method, "krylov_dim": self.krylov_dim,
                "step_tol": self.step_tol, "max_krylov_dim": self.max_krylov_dim}


# ---------------------------------------------------------------------------
# Lanczos machinery


class _Factorization:
    """Hermitian Lanczos factorization H V = V T + beta_m v_m+1 e_m^T,
    with full reorthogonalization."""

    def __init__(self, op: LinearOperator, psi: np.ndarray, m: int):
        dim = psi.size
        m = min(m, dim)
        V = np.empty((dim, m), dtype=np.complex128, order="F")
        alpha = np.zeros(m)
        beta = np.zeros(m)            # beta[j] couples v_j and v_{j+1}
        V[:, 0] = psi
        j_used = m
        breakdown = False
        for j in range(m):
            w = op.matvec(V[:, j])
            a = np.vdot(V[:, j], w).real
            alpha[j] = a
            w -= a * V[:, j]
            if j > 0:
                w -= beta[j - 1] * V[:, j - 1]
            # full reorthogonalization against the whole basis so far
            w -= V[:, :j + 1] @ (V[:, :j + 1].conj().T @ w)
            b = np.linalg.norm(w)
            if j + 1 < m:
                if b < 1e-12:
                    j_used = j + 1
                    breakdown = True
                    break
                beta[j] = b
                V[:, j + 1] = w / b
            else:
                beta[j] = b
        self.V = V[:, :j_used]
        self.alpha = alpha[:j_used]
        self.offdiag = beta[:j_used - 1]
        self.beta_end = 0.0 if breakdown else float(beta[j_used - 1])
        evals, evecs = sla.eigh_tridiagonal(self.alpha, self.offdiag)
        self._evals = evals
        self._evecs = evecs

    def coeffs(self, tau: float):
        """(subspace coefficients of exp(-i H tau) psi, local error estimate)."""
        phases = np.exp(-1j * self._evals * tau)
        u = self._evecs @ (phases * self._evecs[0])
        err = abs(self.beta_end * u[-1]) * min(abs(tau), 1.0)
        return u, float(err)

    def state(self, tau: float):
        u, err = self.coeffs(tau)
        return self.V @ u, err


def _max_reachable(fac: _Factorization, tau_hi: float, tol: float) -> float:
    """Largest tau <= tau_hi whose error estimate stays within tol."""
    if fac.beta_end == 0.0:
        return tau_hi
    _, err = fac.coeffs(tau_hi)
    if err <= tol:
        return tau_hi
    lo, hi = 0.0, tau_hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        _, err = fac.coeffs(mid)
        if err <= tol:
            lo = mid
        else:
            hi = mid
    return lo


def propagate_sampled(op: LinearOperator, psi0: np.ndarray, times: np.ndarray,
                      config: PropagatorConfig):
    """Yield (index, state, cumulative norm drift) at each requested time.

    times must be non-negative and non-decreasing.  States are renormalized
    before being yielded; the drift accumulates |norm - 1| across samples.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("sample times must be non-negative and sorted")
    psi = np.array(psi0, dtype=np.complex128)
    t = 0.0
    drift = 0.0
    i = 0
    m = config.krylov_dim
    while i < times.size and times[i] <= 1e-14:
        yield i, psi.copy(), drift
        i += 1
    while i < times.size:
        fac = _Factorization(op, psi, m)
        remaining = times[-1] - t
        tau_step = _max_reachable(fac, remaining, config.step_tol)
        if tau_step < 1e-12:
            if m < config.max_krylov_dim:
                m = min(config.max_krylov_dim, max(m + 8, int(m * 1.5)))
                continue
            raise RuntimeError(
                f"Krylov step underflow at t = {t:.6g}: tolerance "
                f"{config.step_tol:g} unreachable at krylov_dim {m}")
        t_end = t + tau_step
        advanced = False
        while i < times.size and times[i] <= t_end + 1e-12:
            state, _ = fac.state(times[i] - t)
            nrm = np.linalg.norm(state)
            drift += abs(nrm - 1.0)
            state /= nrm
            yield i, state, drift
            last_state, last_t = state, times[i]
            i += 1
            advanced = True
        if i >= times.size:
            break
        if advanced:
            psi, t = last_state, last_t
        else:
            psi, _ = fac.state(tau_step)
            nrm = np.linalg.norm(psi)
            drift += abs(nrm - 1.0)
            psi /= nrm
            t = t_end


def krylov_step(op: LinearOperator, psi: StateVector, delta_t: float,
                config: PropagatorConfig = PropagatorConfig()) -> StateVector:
    """exp(-i H delta_t) |psi> to the configured local tolerance.

    Output is renormalized; the pre-normalization drift is recorded on the
    returned StateVector as ``norm_drift``.
    """
    psi.check_normalized()
    amp = np.array(psi.amplitudes, dtype=np.complex128)
    direction = 1.0 if delta_t >= 0 else -1.0
    remaining = abs(delta_t)
    m = config.krylov_dim
    drift = 0.0
    while True:
        fac = _Factorization(op, amp, m)
        tau = _max_reachable(fac, remaining, config.step_tol)
        if tau < 1e-12 and remaining > 1e-12:
            if m < config.max_krylov_dim:
                m = min(config.max_krylov_dim, max(m + 8, int(m * 1.5)))
                continue
            raise RuntimeError(
                f"Krylov step underflow: {remaining:.3e} of delta_t left, "
                f"tolerance {config.step_tol:g} unreachable at krylov_dim {m}")
        amp, _ = fac.state(direction * tau)
        nrm = np.linalg.norm(amp)
        drift += abs(nrm - 1.0)
        amp /= nrm
        remaining -= tau
        if remaining <= 1e-12:
            break
    out = StateVector(amp, psi.basis)
    out.norm_drift = drift
    return out


def spectral_evolve(spectrum: SpectrumTable, psi0: StateVector, t: float) -> StateVector:
    """Exact evolution sum_n e^{-i E_n t} |E_n><E_n|psi0>."""
    if not spectrum.complete:
        raise ValueError("spectral evolution needs a complete spectrum")
    c = spectrum.vectors.T @ psi0.amplitudes
    amp = spectrum.vectors @ (np.exp(-1j * spectrum.energies * t) * c)
    return StateVector(amp, psi0.basis)


def magnetization_series(op: LinearOperator, collapsed: CollapseResult, site: int,
                         grid: TimeGrid, config: PropagatorConfig = PropagatorConfig(),
                         axis: str = "x", meta: dict | None = None) -> TimeSeries:
    """m_j^axis(t_k) of the post-measurement state on the sampling grid."""
    values = np.empty(grid.count)
    psi0 = collapsed.state.normalized()
    basis = psi0.basis
    for i, state, drift in propagate_sampled(op, psi0.amplitudes, grid.times, config):
        values[i] = expectation(axis, site, StateVector(state, basis))
    full_meta = {"site": site, "axis": axis, "n_sites": op.n_sites,
                 "norm_drift": drift}
    if meta:
        full_meta.update(meta)
    return TimeSeries(grid, values, full_meta)


@dataclass
class SpectralSeries:
    series: TimeSeries
    gaps: np.ndarray       # E_n - E_0 for n >= 1
    weights: np.ndarray    # |<E_n| sigma^x_j |E_0>|^2 for n >= 1


def spectral_magnetization(spectrum: SpectrumTable, site: int, grid: TimeGrid,
                           meta: dict | None = None) -> SpectralSeries:
    """m_j^x(t) = sum_n cos[(E_n - E_0) t] |<E_n|sigma^x_j|E_0>|^2.

    Valid only when the ground state has <sigma^x_j> = 0 (definite parity);
    otherwise the caller must use the generic propagation path.
    """
    if not spectrum.complete:
        raise ValueError("spectral magnetization needs a complete spectrum")
    e0 = spectrum.ground
    sx_e0 = apply_pauli("x", site, e0.vector)
    if abs(np.vdot(e0.vector.amplitudes, sx_e0.amplitudes)) > 1e-8:
        raise ValueError(
            "ground state has <sigma^x> != 0; the cosine-gap form does not "
            "apply - use the generic magnetization_series path")
    amps = spectrum.vectors.T @ sx_e0.amplitudes
    weights = np.abs(amps) ** 2
    gaps = spectrum.energies - spectrum.energies[0]
    t = grid.times
    values = np.cos(np.outer(t, gaps)) @ weights
    full_meta = {"site": site, "axis": "x", "n_sites": e0.vector.n_sites,
                 "method": "spectral"}
    if meta:
        full_meta.update(meta)
    series = TimeSeries(grid, values, full_meta)
    return SpectralSeries(series, gaps[1:], weights[1:])


def magnetization_difference(series_a: TimeSeries, series_b: TimeSeries,
                             t_window: float) -> float:
    """(1/T) integral_0^T |m_a(t) - m_b(t)| dt by trapezoidal quadrature."""
    ga, gb = series_a.grid, series_b.grid
    if ga.count != gb.count or abs(ga.dt - gb.dt) > 1e-12:
        raise ValueError("time grids do not match")
    if t_window > ga.t_max + 1e-9:
        raise ValueError(f"window T = {t_window} exceeds t_max = {ga.t_max}")
    if t_window < 2 * ga.dt:
        raise ValueError("window too short: need T >= 2 dt")
    t = ga.times
    signed = series_a.values - series_b.values
    inside = t <= t_window + 1e-12
    t_in, s_in = t[inside], signed[inside]
    if t_in[-1] < t_window - 1e-12:
        # window edge falls between samples: close it by linear interpolation
        edge = np.interp(t_window, t, signed)
        t_in = np.append(t_in, t_window)
        s_in = np.append(s_in, edge)
    # insert the zero crossings of the signed difference: |diff| has kinks
    # there, and with the crossings as nodes the trapezoid rule integrates
    # the piecewise-linear interpolant exactly
    cross = np.nonzero(s_in[:-1] * s_in[1:] < 0)[0]
    if cross.size:
        frac = s_in[cross] / (s_in[cross] - s_in[cross + 1])
        t_c = t_in[cross] + frac * (t_in[cross + 1] - t_in[cross])
        t_in = np.concatenate([t_in, t_c])
        s_in = np.concatenate([s_in, np.zeros(t_c.size)])
        order = np.argsort(t_in, kind="stable")
        t_in, s_in = t_in[order], s_in[order]
    return float(np.trapezoid(np.abs(s_in), t_in) / t_window)
