"""Finite-size data collapse of post-quench magnetization curves.

Curves m(t) from different system sizes are rescaled to x = t/N and compared
on a common window; the collapse quality is the mean pairwise RMS distance,
which is zero for perfectly collapsing families.  The control parameter is
tuned so N/xi stays fixed across sizes: via N |lambda - lambda_c|^nu for the
transverse-field Ising chain, via a measured screening-length table for the
Kondo chain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .evolve import TimeSeries

__all__ = [
    "CollapseMember",
    "CollapseFamily",
    "CollapseMetric",
    "Curve",
    "tune_control_for_ratio",
    "rescale_time",
    "low_pass",
    "collapse_distance",
    "estimate_nu",
    "kondo_scaling_window",
]

LAMBDA_C = 1.0
METRIC_GRID_POINTS = 512


@dataclass
class CollapseMember:
    series: TimeSeries
    n_sites: int
    control: float              # lambda or J'
    xi: float = float("nan")    # correlation / screening length used for tuning


@dataclass
class CollapseFamily:
    members: list
    target_ratio: float

    def __post_init__(self):
        if not self.members:
            raise ValueError("family needs at least one member")


@dataclass
class CollapseMetric:
    value: float
    window: tuple
    filter: float | None = None


@dataclass
class Curve:
    x: np.ndarray
    values: np.ndarray


def tune_control_for_ratio(model: str, n_sites: int, target_ratio: float,
                           nu_or_xi_table) -> float:
    """Control parameter putting the system at the requested N/xi.

    TFIC: nu_or_xi_table is the exponent nu; lambda approaches the critical
    point from the antiferromagnetic side, lambda = 1 - (ratio/N)^(1/nu).
    Kondo: nu_or_xi_table is a table of (J', xi_K) pairs; J' is found by
    log-linear interpolation in (1/J', ln xi), extrapolating with the fitted
    exponential law when the target falls outside the measured range.
    """
    if target_ratio < 0:
        raise ValueError("target ratio must be >= 0")
    if model == "tfic":
        nu = float(nu_or_xi_table)
        if target_ratio == 0:
            return LAMBDA_C
        lam = LAMBDA_C - (target_ratio / n_sites) ** (1.0 / nu)
        if lam <= 0:
            raise ValueError(f"ratio {target_ratio} unreachable at N = {n_sites}")
        return lam
    if model == "kondo":
        table = [(float(jp), float(xi)) for jp, xi in nu_or_xi_table]
        if not table:
            raise ValueError("empty screening-length table")
        if target_ratio == 0:
            raise ValueError("Kondo tuning needs a finite target N/xi")
        xi_target = n_sites / target_ratio
        inv_jp = np.array([1.0 / jp for jp, _ in table])
        ln_xi = np.array([np.log(xi) for _, xi in table])
        order = np.argsort(ln_xi)
        ln_t = np.log(xi_target)
        if ln_xi[order][0] <= ln_t <= ln_xi[order][-1]:
            inv = float(np.interp(ln_t, ln_xi[order], inv_jp[order]))
        else:
            a, b = np.polyfit(inv_jp, ln_xi, 1)
            if abs(a) < 1e-12:
                raise ValueError("degenerate screening-length table")
            inv = (ln_t - b) / a
        jp = 1.0 / inv
        if not 0 < jp <= 1:
            raise ValueError(
                f"ratio {target_ratio} unreachable at N = {n_sites}: "
                f"required J' = {jp:.4g} outside (0, 1]")
        return float(jp)
    raise ValueError(f"unknown model {model!r}")


def rescale_time(series: TimeSeries, n_sites: int) -> Curve:
    """Abscissa t -> x = t/N; ordinate unchanged."""
    return Curve(series.grid.times / n_sites, series.values.copy())


def low_pass(series: TimeSeries, cutoff_window: float, n_sites: int | None = None) -> TimeSeries:
    """Centered moving average with window given in t/N units.

    Endpoints use shrinking one-sided windows so the output has the same grid.
    """
    if n_sites is None:
        n_sites = series.meta.get("n_sites")
        if n_sites is None:
            raise ValueError("n_sites not in series metadata; pass it explicitly")
    half = int(round(0.5 * cutoff_window * n_sites / series.grid.dt))
    n = series.values.size
    if 2 * half + 1 > n:
        raise ValueError("filter window exceeds the series length")
    if 2 * half + 1 < 3:
        raise ValueError("filter window shorter than 3 samples")
    c = np.concatenate(([0.0], np.cumsum(series.values)))
    idx = np.arange(n)
    lo = np.maximum(0, idx - half)
    hi = np.minimum(n, idx + half + 1)
    out = (c[hi] - c[lo]) / (hi - lo)
    return TimeSeries(series.grid, out, dict(series.meta, low_pass_window=cutoff_window))


def _member_curve(member: CollapseMember, filter_window):
    series = member.series
    if filter_window is not None:
        series = low_pass(series, filter_window, member.n_sites)
    return rescale_time(series, member.n_sites)


def collapse_distance(family: CollapseFamily, window: tuple,
                      filter: float | None = None) -> CollapseMetric:
    """Mean pairwise RMS distance between member curves on the window."""
    x_lo, x_hi = window
    curves = [_member_curve(m, filter) for m in family.members]
    lo = max(x_lo, max(c.x[0] for c in curves))
    hi = min(x_hi, min(c.x[-1] for c in curves))
    if hi <= lo:
        raise ValueError("empty overlap window")
    grid = np.linspace(lo, hi, METRIC_GRID_POINTS)
    sampled = [np.interp(grid, c.x, c.values) for c in curves]
    dists = []
    for i in range(len(sampled)):
        for j in range(i + 1, len(sampled)):
            d2 = np.trapezoid((sampled[i] - sampled[j]) ** 2, grid) / (hi - lo)
            dists.append(np.sqrt(d2))
    value = float(np.mean(dists)) if dists else 0.0
    return CollapseMetric(value=value, window=(lo, hi), filter=filter)


def estimate_nu(model_runner, sizes, ratio: float, nu_grid,
                window: tuple = (0.0, 2.0), filter: float | None = None):
    """Exponent minimizing the collapse metric over the scan grid.

    model_runner(n_sites, control) must return the quench TimeSeries for one
    system.  Returns (nu_best, [(nu, metric), ...]).
    """
    sizes = list(sizes)
    if len(sizes) < 3:
        raise ValueError("need at least 3 system sizes")
    curve = []
    for nu in nu_grid:
        members = []
        for n in sizes:
            lam = tune_control_for_ratio("tfic", n, ratio, nu)
            members.append(CollapseMember(model_runner(n, lam), n, lam))
        metric = collapse_distance(CollapseFamily(members, ratio), window, filter)
        curve.append((float(nu), metric.value))
    values = np.array([m for _, m in curve])
    if values.max() - values.min() < 1e-12:
        warnings.warn("collapse metric is flat across the scan grid")
    else:
        imin = int(np.argmin(values))
        drops = np.diff(np.sign(np.diff(values)))
        if np.count_nonzero(drops < 0) > 1:
            warnings.warn("collapse metric is not unimodal; minimum still returned")
    nu_best = curve[int(np.argmin(values))][0]
    return nu_best, curve


def kondo_scaling_window(family: CollapseFamily, x_break: float = 0.5,
                         x_max: float = 1.0, filter: float | None = None):
    """Collapse metric before and after the boundary-reflection point.

    The scaling region runs from t = 0 to roughly t = N/2; beyond it the
    collapse degrades as excitations reflect off the open ends.
    """
    if len(family.members) < 2:
        return x_break, 0.0, 0.0
    pre = collapse_distance(family, (0.0, x_break), filter).value
    post = collapse_distance(family, (x_break, x_max), filter).value
    return x_break, pre, post
