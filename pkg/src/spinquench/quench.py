"""Projective single-site measurement: outcome probabilities and collapse.

The measurement of sigma^axis on one site is encoded by the projectors
(1 +- sigma)/2; the post-measurement state is the normalized projection and
the outcome probability is (1 +- <sigma>)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statespace import (SectorBasis, StateVector, apply_pauli,
                         build_sector_basis, expectation)

__all__ = [
    "MeasurementSpec",
    "CollapseResult",
    "outcome_probability",
    "collapse",
    "post_measurement_sector",
    "embed",
]

PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class MeasurementSpec:
    site: int
    axis: str = "x"
    outcome_policy: str = "forced-up"   # "forced-up", "forced-down", "sampled"
    seed: int = 0                       # used by the "sampled" policy only

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"bad axis {self.axis!r}")
        if self.outcome_policy not in ("forced-up", "forced-down", "sampled"):
            raise ValueError(f"unknown outcome policy {self.outcome_policy!r}")
        if self.site < 1:
            raise ValueError("sites are 1-indexed")

    def to_dict(self):
        return {"site": self.site, "axis": self.axis,
                "outcome_policy": self.outcome_policy, "seed": self.seed}


@dataclass
class CollapseResult:
    probability: float
    state: StateVector
    outcome: str                        # "up" or "down"


def outcome_probability(psi: StateVector, spec: MeasurementSpec):
    """(p_up, p_down) for measuring sigma^axis on the given site."""
    psi.check_normalized()
    m = expectation(spec.axis, spec.site, psi)
    p_up = min(1.0, max(0.0, 0.5 * (1.0 + m)))
    return p_up, 1.0 - p_up


def collapse(psi: StateVector, spec: MeasurementSpec) -> CollapseResult:
    """Project psi onto the selected measurement outcome and renormalize.

    For x/y measurements on a sector-basis state, embed psi into the union
    basis from post_measurement_sector first, so the projected state fits.
    """
    p_up, p_down = outcome_probability(psi, spec)
    if spec.outcome_policy == "forced-up":
        outcome = "up"
    elif spec.outcome_policy == "forced-down":
        outcome = "down"
    else:
        rng = np.random.default_rng(spec.seed)
        outcome = "up" if rng.random() < p_up else "down"
    p = p_up if outcome == "up" else p_down
    if p <= PROBABILITY_FLOOR:
        raise ValueError(
            f"outcome {outcome!r} has vanishing probability {p:.3e}; collapse rejected")
    sigma_psi = apply_pauli(spec.axis, spec.site, psi)
    sign = 1.0 if outcome == "up" else -1.0
    amp = 0.5 * (psi.amplitudes + sign * sigma_psi.amplitudes)
    state = StateVector(amp / np.sqrt(p), psi.basis)
    return CollapseResult(probability=float(p), state=state, outcome=outcome)


def post_measurement_sector(spec: MeasurementSpec, ground_sector: SectorBasis) -> SectorBasis:
    """Union S^z sector reachable from the ground sector by one x/y measurement.

    sigma^x maps popcount k to k +- 1, so the collapsed state of an
    S^z-conserving model lives in the union of popcounts {k-1, k, k+1}.
    """
    if not ground_sector.popcounts:
        raise ValueError("ground state basis is not a fixed-popcount sector")
    n = ground_sector.n_sites
    ks = set()
    for k in ground_sector.popcounts:
        ks.update(kk for kk in (k - 1, k, k + 1) if 0 <= kk <= n)
    return build_sector_basis(n, ks)


def embed(psi: StateVector, target: SectorBasis) -> StateVector:
    """Re-express psi on a larger basis containing all of its basis states."""
    pos = target.index_of(psi.basis.states)
    if np.any(pos < 0):
        raise ValueError("target basis does not contain the source basis")
    amp = np.zeros(target.dim, dtype=np.complex128)
    amp[pos] = psi.amplitudes
    return StateVector(amp, target)
