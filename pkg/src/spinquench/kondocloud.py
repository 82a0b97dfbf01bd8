"""Kondo screening-cloud detection from measurement quenches.

Sweep the measured site j across the chain, comparing the short-time
magnetization evolution with (J' < 1) and without (J' = 1) the impurity:

    dm_j(J') = (1/T) int_0^T |m_j^x(J') - m_j^x(1)| dt,   T = 1/J'.

dm_j decays exponentially outside the screening cloud; a log-linear fit of
the tail gives xi_K, and ln xi_K against 1/J' gives the exponential-law
coefficient A in xi_K ~ e^{A/J'}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolve import ground_state
from .evolve import (PropagatorConfig, TimeGrid, TimeSeries,
                     magnetization_difference, magnetization_series)
from .hamiltonians import KONDO_CRITICAL_J2, KondoChain, build_kondo_chain
from .quench import MeasurementSpec, collapse, embed, post_measurement_sector
from .statespace import build_sector_basis

__all__ = [
    "CloudProfile",
    "ScreeningFit",
    "KondoLawFit",
    "cloud_profile",
    "reference_series",
    "fit_screening_length",
    "fit_kondo_law",
    "auto_tail",
]

DEFAULT_DT = 0.02
DEFAULT_MARGIN = 2


@dataclass
class CloudProfile:
    j_values: np.ndarray
    dm: np.ndarray
    j_prime: float
    n_sites: int
    t_window: float             # T = 1/J'

    def __post_init__(self):
        self.j_values = np.asarray(self.j_values, dtype=np.int64)
        self.dm = np.asarray(self.dm, dtype=np.float64)
        if self.j_values.shape != self.dm.shape:
            raise ValueError("site list and dm lengths differ")
        if np.any(self.dm < -1e-12):
            raise ValueError("dm must be non-negative")


@dataclass
class ScreeningFit:
    xi: float
    fit_window: tuple
    r_squared: float
    residuals: np.ndarray


@dataclass
class KondoLawFit:
    a_coefficient: float
    intercept: float
    r_squared: float


def _quench_series(op, ground, j: int, grid: TimeGrid, config: PropagatorConfig) -> TimeSeries:
    spec = MeasurementSpec(site=j, axis="x", outcome_policy="forced-up")
    res = collapse(ground, spec)
    return magnetization_series(op, res, j, grid, config)


def _sector_setup(spec: KondoChain):
    n = spec.n_sites
    ground_basis = build_sector_basis(n, {n // 2})
    union = post_measurement_sector(MeasurementSpec(site=1), ground_basis)
    gs = ground_state(build_kondo_chain(spec, ground_basis)).vector
    op_union = build_kondo_chain(spec, union)
    return embed(gs, union), op_union


def reference_series(n_sites: int, j_list, t_max: float, dt: float = DEFAULT_DT,
                     config: PropagatorConfig = PropagatorConfig(),
                     j2_over_j1: float = KONDO_CRITICAL_J2):
    """Impurity-free (J' = 1) quench series for each site, reusing the mirror
    symmetry m_j = m_{N+1-j} of the homogeneous chain."""
    spec = KondoChain(n_sites=n_sites, j_prime=1.0, j2_over_j1=j2_over_j1)
    gs, op = _sector_setup(spec)
    grid = TimeGrid(t_max, dt)
    out = {}
    for j in sorted(set(j_list)):
        mirror = n_sites + 1 - j
        if mirror in out:
            series = out[mirror]
            out[j] = TimeSeries(series.grid, series.values.copy(),
                                dict(series.meta, site=j, mirrored_from=mirror))
        else:
            out[j] = _quench_series(op, gs, j, grid, config)
    return out


def cloud_profile(n_sites: int, j_prime: float, grid_margin: int = DEFAULT_MARGIN,
                  config: PropagatorConfig = PropagatorConfig(), dt: float = DEFAULT_DT,
                  j2_over_j1: float = KONDO_CRITICAL_J2,
                  reference: dict | None = None) -> CloudProfile:
    """dm_j(J') for j = 2 .. N - grid_margin.

    Ground states are solved once per Hamiltonian and reused across the site
    sweep.  ``reference`` may carry precomputed J' = 1 series (from
    reference_series) so a J' sweep shares the impurity-free branch.
    """
    if n_sites % 2:
        raise ValueError("Kondo chain needs even N")
    t_window = 1.0 / j_prime
    grid = TimeGrid(t_window, dt)
    j_values = np.arange(2, n_sites - grid_margin + 1)

    if j_prime == 1.0:
        # both branches evolve under the same Hamiltonian: dm is exactly 0
        return CloudProfile(j_values, np.zeros(j_values.size), j_prime,
                            n_sites, t_window)

    spec = KondoChain(n_sites=n_sites, j_prime=j_prime, j2_over_j1=j2_over_j1)
    gs, op = _sector_setup(spec)
    if reference is None:
        reference = reference_series(n_sites, j_values, t_window, dt, config, j2_over_j1)

    dm = np.empty(j_values.size)
    for k, j in enumerate(j_values):
        series = _quench_series(op, gs, int(j), grid, config)
        ref = reference[int(j)]
        if ref.grid.count < grid.count or abs(ref.grid.dt - dt) > 1e-12:
            raise ValueError("reference series grid too short or mismatched")
        ref_cut = TimeSeries(grid, ref.values[:grid.count], ref.meta)
        dm[k] = magnetization_difference(series, ref_cut, t_window)
    return CloudProfile(j_values, dm, j_prime, n_sites, t_window)


def _linear_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res < 1e-20 else 0.0)
    return float(slope), float(intercept), r2, y - pred


def fit_screening_length(profile: CloudProfile, tail_start="auto") -> ScreeningFit:
    """Least-squares line on (j, ln dm_j) over the tail; xi_K = -1/slope."""
    j_lo = auto_tail(profile) if tail_start == "auto" else int(tail_start)
    sel = profile.j_values >= j_lo
    j = profile.j_values[sel].astype(np.float64)
    dm = profile.dm[sel]
    if j.size < 4:
        raise ValueError("tail has fewer than 4 points")
    if np.any(dm <= 0):
        raise ValueError("tail contains non-positive dm values")
    slope, intercept, r2, resid = _linear_fit(j, np.log(dm))
    if slope >= 0:
        raise ValueError(
            "non-negative slope: no exponential decay in the tail "
            "(J' too close to 1 or N too small)")
    return ScreeningFit(xi=-1.0 / slope, fit_window=(int(j[0]), int(j[-1])),
                        r_squared=r2, residuals=resid)


def auto_tail(profile: CloudProfile) -> int:
    """Deterministic tail start: the smallest j_lo >= 3 whose log-linear fit
    reaches r^2 >= 0.95 with at least 4 points, else the r^2-maximizing one."""
    if profile.j_values.size < 6:
        raise ValueError("profile too short for tail detection (need >= 6 sites)")
    if np.all(profile.dm <= 0):
        raise ValueError("all-zero profile: no tail to fit")
    j_hi = int(profile.j_values[-1])
    best = None
    for j_lo in range(max(3, int(profile.j_values[0])), j_hi - 2):
        sel = profile.j_values >= j_lo
        j = profile.j_values[sel].astype(np.float64)
        dm = profile.dm[sel]
        if j.size < 4 or np.any(dm <= 0):
            continue
        slope, _, r2, _ = _linear_fit(j, np.log(dm))
        if slope < 0 and r2 >= 0.95:
            return j_lo
        if best is None or r2 > best[1]:
            best = (j_lo, r2)
    if best is None:
        raise ValueError("no usable tail window found")
    return best[0]


def fit_kondo_law(pairs) -> KondoLawFit:
    """ln xi_K against 1/J'; the slope is the exponential-law coefficient A."""
    pairs = [(float(jp), float(xi)) for jp, xi in pairs]
    jps = sorted(set(jp for jp, _ in pairs))
    if len(jps) < 3:
        raise ValueError("need at least 3 distinct J' values")
    x = np.array([1.0 / jp for jp, _ in pairs])
    y = np.array([np.log(xi) for _, xi in pairs])
    slope, intercept, r2, _ = _linear_fit(x, y)
    return KondoLawFit(a_coefficient=slope, intercept=intercept, r_squared=r2)
