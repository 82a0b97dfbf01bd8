"""Fourier analysis of magnetization traces and gap matching.

The transform M(E) = (1/2pi) int_0^T w(t) m(t) e^{-iEt} dt is a finite-time,
windowed approximation of the infinite integral; delta peaks of weight w/2
become window lobes.  Peak weights are calibrated against a unit cosine
transformed with the same grid and window, so a monochromatic cos(Dt) yields
weight 1/2 at E = D regardless of the window choice.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import SpectrumTable
from .evolve import TimeSeries
from .statespace import apply_pauli

__all__ = [
    "WindowSpec",
    "SpectrumReport",
    "SpectralPeak",
    "MatchReport",
    "fourier_transform",
    "extract_peaks",
    "match_gaps",
]


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "hann"          # "hann", "gaussian", "none"
    sigma_t: float = 0.0        # gaussian width; ignored otherwise

    def __post_init__(self):
        if self.kind not in ("hann", "gaussian", "none"):
            raise ValueError(f"unknown window {self.kind!r}")
        if self.kind == "gaussian" and self.sigma_t <= 0:
            raise ValueError("gaussian window needs sigma_t > 0")

    def weights(self, t: np.ndarray, t_max: float) -> np.ndarray:
        if self.kind == "none":
            return np.ones_like(t)
        if self.kind == "hann":
            # half-cosine taper over [0, T]; full value at t = 0
            return np.cos(0.5 * np.pi * t / t_max) ** 2
        return np.exp(-0.5 * (t / self.sigma_t) ** 2)

    def effective_duration(self, t_max: float) -> float:
        if self.kind == "none":
            return t_max
        if self.kind == "hann":
            return 0.5 * t_max
        return min(t_max, 2.0 * self.sigma_t)

    def to_dict(self):
        return {"kind": self.kind, "sigma_t": self.sigma_t}


@dataclass
class SpectrumReport:
    energies: np.ndarray
    amplitude: np.ndarray
    window: WindowSpec
    t_max: float
    dt: float
    resolution: float           # Delta E = 2 pi / T_effective

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=np.float64)
        self.amplitude = np.asarray(self.amplitude, dtype=np.float64)
        if np.any(np.diff(self.energies) <= 0):
            raise ValueError("energy grid must be strictly increasing")


@dataclass(frozen=True)
class SpectralPeak:
    energy: float
    weight: float


def _windowed_transform(t, values, window: WindowSpec, t_max, energies):
    w = window.weights(t, t_max) * values
    out = np.empty(energies.size, dtype=np.complex128)
    block = 256
    for lo in range(0, energies.size, block):
        e = energies[lo:lo + block]
        out[lo:lo + block] = np.trapezoid(
            w[None, :] * np.exp(-1j * np.outer(e, t)), t, axis=1)
    return out / (2.0 * np.pi)


def fourier_transform(series: TimeSeries, e_grid: np.ndarray,
                      window: WindowSpec = WindowSpec()) -> SpectrumReport:
    """Windowed finite-time Fourier transform of the magnetization trace."""
    t = series.grid.times
    if t.size < 16:
        raise ValueError("series too short: need at least 16 samples")
    e_grid = np.asarray(e_grid, dtype=np.float64)
    alias = np.pi / series.grid.dt
    if np.any(np.abs(e_grid) > alias + 1e-12):
        raise ValueError(f"energy grid exceeds the alias limit |E| <= {alias:.4g}")
    t_max = series.grid.t_max
    amp = np.abs(_windowed_transform(t, series.values, window, t_max, e_grid))
    resolution = 2.0 * np.pi / window.effective_duration(t_max)
    return SpectrumReport(e_grid, amp, window, t_max, series.grid.dt, resolution)


def _parabolic_refine(e, a, i):
    if 0 < i < e.size - 1:
        y0, y1, y2 = a[i - 1], a[i], a[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            shift = 0.5 * (y0 - y2) / denom
            return float(e[i] + shift * (e[i + 1] - e[i]))
    return float(e[i])


def _peak_integral(e, a, i, half_bins=3):
    lo = max(0, i - half_bins)
    hi = min(e.size, i + half_bins + 1)
    return float(np.trapezoid(a[lo:hi], e[lo:hi])), lo, hi


def extract_peaks(report: SpectrumReport, prominence_floor: float = 0.02):
    """Local maxima above the floor, refined and weighted.

    The weight is the local amplitude integral normalized so a unit-weight
    cosine gives 1/2, the delta-function convention of the transform.
    """
    e, a = report.energies, report.amplitude
    if a.size == 0:
        return []
    floor = prominence_floor * a.max()
    peaks = []
    for i in range(1, a.size - 1):
        if a[i] >= floor and a[i] >= a[i - 1] and a[i] > a[i + 1]:
            energy = _parabolic_refine(e, a, i)
            raw, lo, hi = _peak_integral(e, a, i)
            # calibration: a unit cosine at this energy, same grid and window
            t = np.arange(int(np.floor(report.t_max / report.dt + 1e-9)) + 1) * report.dt
            ref = np.abs(_windowed_transform(
                t, np.cos(energy * t), report.window, report.t_max, e[lo:hi]))
            ref_int = float(np.trapezoid(ref, e[lo:hi]))
            if ref_int <= 0:
                continue
            peaks.append(SpectralPeak(energy=energy, weight=0.5 * raw / ref_int))
    return peaks


@dataclass
class MatchReport:
    matched: list = field(default_factory=list)   # (peak, gap index, energy error)
    orphan_peaks: list = field(default_factory=list)
    unmatched_gaps: list = field(default_factory=list)  # (gap index, gap, weight)
    resolution: float = 0.0

    def to_dict(self):
        return {
            "resolution": self.resolution,
            "matched": [{"peak_energy": p.energy, "peak_weight": p.weight,
                         "gap_index": int(n), "gap": float(g), "error": float(err)}
                        for p, n, g, err in self.matched],
            "orphan_peaks": [{"peak_energy": p.energy, "peak_weight": p.weight}
                             for p in self.orphan_peaks],
            "unmatched_gaps": [{"gap_index": int(n), "gap": float(g), "weight": float(w)}
                               for n, g, w in self.unmatched_gaps],
        }


def transition_weights(spectrum: SpectrumTable, site: int):
    """(gaps, |<E_n|sigma^x_site|E_0>|^2) for n >= 1."""
    e0 = spectrum.ground.vector
    sx_e0 = apply_pauli("x", site, e0)
    amps = spectrum.vectors.T @ sx_e0.amplitudes
    weights = np.abs(amps) ** 2
    gaps = spectrum.energies - spectrum.energies[0]
    return gaps[1:], weights[1:]


def match_gaps(peaks, spectrum: SpectrumTable, site: int,
               weight_floor: float = 1e-3, resolution: float = None) -> MatchReport:
    """Pair each peak with the nearest sigma^x-active energy gap.

    A peak within ``resolution`` of its nearest candidate gap counts as
    matched; candidate gaps left unpaired are reported as unmatched.
    """
    if not spectrum.complete:
        raise ValueError("gap matching needs the complete small-N spectrum")
    gaps, weights = transition_weights(spectrum, site)
    active = weights >= weight_floor
    cand_idx = np.nonzero(active)[0]
    report = MatchReport(resolution=resolution if resolution is not None else 0.0)
    if resolution is None:
        resolution = np.inf
    used = set()
    for p in peaks:
        if cand_idx.size == 0:
            report.orphan_peaks.append(p)
            continue
        errs = np.abs(gaps[cand_idx] - p.energy)
        j = int(np.argmin(errs))
        if errs[j] <= resolution:
            n = int(cand_idx[j])
            report.matched.append((p, n + 1, float(gaps[n]), float(errs[j])))
            used.add(n)
        else:
            report.orphan_peaks.append(p)
    # merge degenerate candidates: a gap closer than the resolution to a used
    # one counts as covered by the same (merged) peak
    for n in cand_idx:
        if n in used:
            continue
        if any(abs(gaps[n] - gaps[u]) <= resolution for u in used):
            continue
        report.unmatched_gaps.append((int(n) + 1, float(gaps[n]), float(weights[n])))
    return report
