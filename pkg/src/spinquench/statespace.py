"""Bit-encoded computational basis, state vectors and local Pauli action.

Conventions used throughout the package:

* sites are 1-indexed in every public interface (j = 1..N);
* site j lives on bit j-1 of the basis bitmask;
* bit value 0 means sigma^z = +1 ("up" in the z basis).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SectorBasis",
    "StateVector",
    "full_basis",
    "build_sector_basis",
    "apply_pauli",
    "expectation",
]

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class SectorBasis:
    """Ordered list of basis bitmasks, either the full 2^N space or a union
    of fixed z-magnetization (fixed popcount) sectors."""

    n_sites: int
    states: np.ndarray          # sorted uint64 bitmasks
    kind: str = "full"          # "full" or "sector"
    popcounts: tuple = ()       # populated for kind == "sector"

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"need at least one site, got {self.n_sites}")
        states = np.asarray(self.states, dtype=np.uint64)
        if states.size and np.any(states[1:] <= states[:-1]):
            raise ValueError("basis states must be strictly sorted by bitmask")
        if states.size and int(states[-1]) >= (1 << self.n_sites):
            raise ValueError("bitmask exceeds 2^N")
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return int(self.states.size)

    def index_of(self, bitmasks):
        """Positions of the given bitmasks in the basis; -1 where absent."""
        bitmasks = np.asarray(bitmasks, dtype=np.uint64)
        if self.kind == "full":
            idx = bitmasks.astype(np.int64)
            return np.where(idx < self.dim, idx, -1)
        pos = np.searchsorted(self.states, bitmasks)
        pos = np.minimum(pos, self.dim - 1)
        found = self.states[pos] == bitmasks
        return np.where(found, pos, -1)

    def contains(self, bitmasks) -> bool:
        return bool(np.all(self.index_of(bitmasks) >= 0))


def full_basis(n_sites: int) -> SectorBasis:
    """The complete 2^N computational basis."""
    if n_sites < 1:
        raise ValueError(f"need at least one site, got {n_sites}")
    states = np.arange(1 << n_sites, dtype=np.uint64)
    return SectorBasis(n_sites=n_sites, states=states, kind="full")


def build_sector_basis(n_sites: int, popcounts) -> SectorBasis:
    """Union of fixed-popcount z-magnetization sectors.

    Sector sizes equal binomial coefficients C(N, k); the union is sorted by
    bitmask so index lookups are a binary search.
    """
    ks = sorted(set(int(k) for k in popcounts))
    if not ks:
        raise ValueError("popcount set must be non-empty")
    for k in ks:
        if not 0 <= k <= n_sites:
            raise ValueError(f"popcount {k} outside 0..{n_sites}")
    all_states = np.arange(1 << n_sites, dtype=np.uint64)
    counts = np.bitwise_count(all_states)
    mask = np.isin(counts, ks)
    return SectorBasis(n_sites=n_sites, states=all_states[mask],
                       kind="sector", popcounts=tuple(ks))


@dataclass
class StateVector:
    """Complex amplitudes over a SectorBasis; the system wavefunction."""

    amplitudes: np.ndarray
    basis: SectorBasis

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude length {amp.shape} does not match basis dim {self.basis.dim}")
        self.amplitudes = amp

    @property
    def n_sites(self) -> int:
        return self.basis.n_sites

    @property
    def dim(self) -> int:
        return self.basis.dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.basis)

    def check_normalized(self, tol: float = 1e-8) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(self.norm()-1.0):.3e}")

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def basis_state(n_sites: int, bitmask: int, basis: SectorBasis | None = None) -> StateVector:
    """Computational basis state |bitmask> as a StateVector."""
    if basis is None:
        basis = full_basis(n_sites)
    idx = basis.index_of(np.array([bitmask], dtype=np.uint64))[0]
    if idx < 0:
        raise ValueError(f"bitmask {bitmask} not in basis")
    amp = np.zeros(basis.dim, dtype=np.complex128)
    amp[idx] = 1.0
    return StateVector(amp, basis)


def _check_site(site: int, n_sites: int) -> int:
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")
    return site - 1


def _z_signs(basis: SectorBasis, bit: int) -> np.ndarray:
    """+1 where the bit is 0 (spin up), -1 where it is 1."""
    bits = (basis.states >> np.uint64(bit)) & np.uint64(1)
    return 1.0 - 2.0 * bits.astype(np.float64)


def apply_pauli(axis: str, site: int, psi: StateVector) -> StateVector:
    """sigma_site^axis |psi>.

    For x and y on a sector basis the image sectors (popcount +-1) must be
    contained in psi's basis; supply a union basis built for that purpose.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    bit = _check_site(site, psi.n_sites)
    basis = psi.basis
    if axis == "z":
        return StateVector(_z_signs(basis, bit) * psi.amplitudes, basis)
    mask = np.uint64(1 << bit)
    sources = basis.states ^ mask
    pos = basis.index_of(sources)
    ok = pos >= 0
    gathered = np.where(ok, psi.amplitudes[np.where(ok, pos, 0)], 0.0)
    # sources outside the basis carry no amplitude by construction; what must
    # not happen is amplitude flowing OUT of the basis, which shows up as a
    # norm deficit of the image.
    if abs(np.linalg.norm(gathered) - psi.norm()) > 1e-10 * max(1.0, psi.norm()):
        raise ValueError(
            f"sigma^{axis} on site {site} maps amplitude outside the basis; "
            "supply a union basis containing the image sectors")
    if axis == "x":
        return StateVector(gathered, basis)
    # sigma^y |s> = i (1 - 2 b_s) |s ^ m>; written from the target side the
    # phase is i (2 b_t - 1).
    phase = 1j * (2.0 * (((basis.states >> np.uint64(bit)) & np.uint64(1)).astype(np.float64)) - 1.0)
    return StateVector(phase * gathered, basis)


def expectation(axis: str, site: int, psi: StateVector) -> float:
    """<psi| sigma_site^axis |psi> as a real number.

    Computed transition-wise, so it is well defined even on a sector basis
    whose x/y image is only partially contained: transitions leaving the basis
    are orthogonal to psi and contribute zero to the expectation.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    psi.check_normalized()
    bit = _check_site(site, psi.n_sites)
    basis = psi.basis
    amp = psi.amplitudes
    if axis == "z":
        val = np.sum(_z_signs(basis, bit) * np.abs(amp) ** 2)
        return float(val)
    mask = np.uint64(1 << bit)
    targets = basis.states ^ mask
    pos = basis.index_of(targets)
    ok = pos >= 0
    if axis == "x":
        val = np.sum(np.conj(amp[pos[ok]]) * amp[ok])
    else:
        phase = 1j * _z_signs(basis, bit)[ok]
        val = np.sum(np.conj(amp[pos[ok]]) * phase * amp[ok])
    if abs(val.imag) > 1e-12:
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)
