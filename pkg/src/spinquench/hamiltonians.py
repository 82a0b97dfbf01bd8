"""Model specifications and Hamiltonian operators for the three spin chains.

Models (energy units: the nearest-neighbour exchange sets the scale):

* long-range Ising chain, open boundaries:
      H = sum_{i<j} |i-j|^-alpha sigma^x_i sigma^x_j + B sum_i sigma^z_i
  (the literal double-counted pair sum is available behind ``pair_convention``)
* transverse-field Ising chain (TFIC), periodic:
      H = sum_i sigma^x_i sigma^x_{i+1} + lambda sum_i sigma^z_i
* Kondo spin-chain emulation, open, impurity at site 1:
      H = J' (J1 s1.s2 + J2 s1.s3) + J1 sum s_i.s_{i+1} + J2 sum s_i.s_{i+2}
  with J1 = 1 and J2/J1 = 0.2412 at the dimerization critical point.

Operators act on full 2^N bases or on fixed-S^z sector bases (Kondo only);
the fast path is an assembled sparse matrix with real entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .statespace import SectorBasis, StateVector, full_basis

__all__ = [
    "LongRangeIsing",
    "TFIC",
    "KondoChain",
    "Term",
    "TermList",
    "LinearOperator",
    "build_long_range_ising",
    "build_tfic",
    "build_kondo_chain",
    "build_hamiltonian",
    "parity_operator",
    "spec_from_dict",
]

KONDO_CRITICAL_J2 = 0.2412


# ---------------------------------------------------------------------------
# declarative model specs


@dataclass(frozen=True)
class LongRangeIsing:
    n_sites: int
    alpha: float
    b_over_j: float
    boundary: str = "open"
    pair_convention: str = "i<j"    # "i<j" or "i!=j" (doubles every coupling)

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("long-range Ising needs N >= 2")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.boundary != "open":
            raise ValueError("long-range Ising supports open boundaries only")
        if self.pair_convention not in ("i<j", "i!=j"):
            raise ValueError(f"unknown pair convention {self.pair_convention!r}")
        if not np.isfinite(self.alpha) or not np.isfinite(self.b_over_j):
            raise ValueError("couplings must be finite")

    def to_dict(self):
        return {"model": "long_range_ising", "n_sites": self.n_sites,
                "alpha": self.alpha, "b_over_j": self.b_over_j,
                "boundary": self.boundary, "pair_convention": self.pair_convention}


@dataclass(frozen=True)
class TFIC:
    n_sites: int
    lam: float
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 3:
            raise ValueError("periodic TFIC needs N >= 3 (the N = 2 ring double-counts its bond)")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.boundary != "periodic":
            raise ValueError("TFIC is defined here with periodic boundaries")
        if not np.isfinite(self.lam):
            raise ValueError("couplings must be finite")

    def to_dict(self):
        return {"model": "tfic", "n_sites": self.n_sites, "lam": self.lam,
                "boundary": self.boundary}


@dataclass(frozen=True)
class KondoChain:
    n_sites: int
    j_prime: float
    j2_over_j1: float = KONDO_CRITICAL_J2
    boundary: str = "open"

    def __post_init__(self):
        if self.n_sites < 4 or self.n_sites % 2:
            raise ValueError("Kondo chain needs even N >= 4")
        if not 0 < self.j_prime <= 1:
            raise ValueError("impurity coupling J' must lie in (0, 1]")
        if self.boundary != "open":
            raise ValueError("Kondo chain supports open boundaries only")
        if not np.isfinite(self.j2_over_j1):
            raise ValueError("couplings must be finite")

    def to_dict(self):
        return {"model": "kondo", "n_sites": self.n_sites, "j_prime": self.j_prime,
                "j2_over_j1": self.j2_over_j1, "boundary": self.boundary}


def spec_from_dict(d: dict):
    """Inverse of the specs' to_dict, used by the run-config loader."""
    d = dict(d)
    kind = d.pop("model")
    if kind == "long_range_ising":
        return LongRangeIsing(**d)
    if kind == "tfic":
        return TFIC(**d)
    if kind == "kondo":
        return KondoChain(**d)
    raise ValueError(f"unknown model {kind!r}")


# ---------------------------------------------------------------------------
# Pauli-string term lists


@dataclass(frozen=True)
class Term:
    coefficient: float
    factors: tuple  # ((axis, site), ...) with 1-based sites


@dataclass
class TermList:
    n_sites: int
    terms: list

    def __post_init__(self):
        for t in self.terms:
            seen = set()
            for axis, site in t.factors:
                if axis not in ("x", "y", "z"):
                    raise ValueError(f"bad axis {axis!r}")
                if not 1 <= site <= self.n_sites:
                    raise ValueError(f"site {site} out of range 1..{self.n_sites}")
                if (axis, site) in seen:
                    raise ValueError(f"duplicate factor ({axis}, {site}) in one term")
                seen.add((axis, site))


# ---------------------------------------------------------------------------
# operator


def _term_arrays(term: Term, basis: SectorBasis):
    """Target-side action of one Pauli string on every basis state.

    Returns (source bitmasks, coefficient per target).  The operator writes
    out[t] = c(t) * psi[index(t ^ flipmask)].
    """
    states = basis.states
    flip = np.uint64(0)
    coef = np.full(states.size, term.coefficient, dtype=np.complex128)
    for axis, site in term.factors:
        bit = np.uint64(site - 1)
        b = ((states >> bit) & np.uint64(1)).astype(np.float64)
        if axis == "z":
            coef *= 1.0 - 2.0 * b
        elif axis == "x":
            flip ^= np.uint64(1) << bit
        else:  # y
            coef *= 1j * (2.0 * b - 1.0)
            flip ^= np.uint64(1) << bit
    return states ^ flip, coef


class LinearOperator:
    """Hermitian operator on a SectorBasis, assembled as a real sparse matrix.

    All model Hamiltonians here are real in the z basis (sigma^y enters in
    pairs), so the matrix is stored with float64 entries and complex vectors
    are propagated as two real matvecs.
    """

    hermitian = True

    def __init__(self, basis: SectorBasis, matrix: sp.csr_matrix,
                 terms: TermList | None = None, norm_bound: float | None = None):
        if matrix.shape != (basis.dim, basis.dim):
            raise ValueError("matrix shape does not match basis dimension")
        self.basis = basis
        self.matrix = matrix
        self.terms = terms
        if norm_bound is None:
            norm_bound = float(abs(matrix).sum(axis=1).max()) if basis.dim else 0.0
        self.norm_bound = norm_bound

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def n_sites(self) -> int:
        return self.basis.n_sites

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if np.iscomplexobj(x):
            return self.matrix.dot(x.real) + 1j * self.matrix.dot(x.imag)
        return self.matrix.dot(x)

    def apply(self, psi: StateVector) -> StateVector:
        if psi.basis is not self.basis and not np.array_equal(psi.basis.states, self.basis.states):
            raise ValueError("state lives on a different basis than the operator")
        return StateVector(self.matvec(psi.amplitudes), self.basis)

    def expectation(self, psi: StateVector) -> float:
        val = np.vdot(psi.amplitudes, self.matvec(psi.amplitudes))
        return float(val.real)

    def to_dense(self, cap: int = 1 << 14) -> np.ndarray:
        if self.dim > cap:
            raise ValueError(f"dense form refused: dim {self.dim} exceeds cap {cap}")
        return self.matrix.toarray()


def operator_from_terms(termlist: TermList, basis: SectorBasis | None = None) -> LinearOperator:
    """Assemble a TermList into a sparse operator on the given basis.

    On a sector basis every term must map the basis into itself; use the
    dedicated Kondo builder for exchange terms whose x/y pieces only cancel
    in pairs.
    """
    if basis is None:
        basis = full_basis(termlist.n_sites)
    dim = basis.dim
    rows, cols, vals = [], [], []
    for term in termlist.terms:
        sources, coef = _term_arrays(term, basis)
        pos = basis.index_of(sources)
        if np.any(pos < 0):
            raise ValueError("term maps outside the sector basis")
        if np.any(np.abs(coef.imag) > 0):
            raise ValueError("non-real term action; only real Hamiltonians are supported")
        rows.append(np.arange(dim, dtype=np.int64))
        cols.append(pos.astype(np.int64))
        vals.append(coef.real)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    norm_bound = sum(abs(t.coefficient) for t in termlist.terms)
    return LinearOperator(basis, mat, terms=termlist, norm_bound=norm_bound)


# ---------------------------------------------------------------------------
# model builders


def long_range_ising_terms(spec: LongRangeIsing) -> TermList:
    n = spec.n_sites
    double = 2.0 if spec.pair_convention == "i!=j" else 1.0
    terms = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            c = double / abs(i - j) ** spec.alpha
            terms.append(Term(c, (("x", i), ("x", j))))
    for i in range(1, n + 1):
        terms.append(Term(spec.b_over_j, (("z", i),)))
    return TermList(n, terms)


def build_long_range_ising(spec: LongRangeIsing, basis: SectorBasis | None = None) -> LinearOperator:
    return operator_from_terms(long_range_ising_terms(spec), basis)


def tfic_terms(spec: TFIC) -> TermList:
    n = spec.n_sites
    terms = [Term(1.0, (("x", i), ("x", i % n + 1))) for i in range(1, n + 1)]
    terms += [Term(spec.lam, (("z", i),)) for i in range(1, n + 1)]
    return TermList(n, terms)


def build_tfic(spec: TFIC, basis: SectorBasis | None = None) -> LinearOperator:
    return operator_from_terms(tfic_terms(spec), basis)


def kondo_bonds(spec: KondoChain):
    """(site_a, site_b, coupling) for every Heisenberg bond, J1 = 1."""
    n, jp, j2 = spec.n_sites, spec.j_prime, spec.j2_over_j1
    bonds = [(1, 2, jp), (1, 3, jp * j2)]
    bonds += [(i, i + 1, 1.0) for i in range(2, n)]
    bonds += [(i, i + 2, j2) for i in range(2, n - 1)]
    return bonds


def kondo_terms(spec: KondoChain) -> TermList:
    terms = []
    for a, b, c in kondo_bonds(spec):
        for axis in ("x", "y", "z"):
            terms.append(Term(c, ((axis, a), (axis, b))))
    return TermList(spec.n_sites, terms)


def _heisenberg_sector_matrix(spec: KondoChain, basis: SectorBasis) -> sp.csr_matrix:
    """Bond-wise assembly that works on S^z sector bases: the parallel-spin
    flips of sigma^x sigma^x and sigma^y sigma^y cancel, leaving the diagonal
    z-z part plus a 2J swap of each antiparallel pair."""
    states = basis.states
    dim = basis.dim
    diag = np.zeros(dim)
    rows, cols, vals = [], [], []
    for a, b, c in kondo_bonds(spec):
        ba = ((states >> np.uint64(a - 1)) & np.uint64(1))
        bb = ((states >> np.uint64(b - 1)) & np.uint64(1))
        anti = ba != bb
        diag += c * (1.0 - 2.0 * anti)
        mask = np.uint64((1 << (a - 1)) | (1 << (b - 1)))
        src = np.nonzero(anti)[0]
        tgt = basis.index_of(states[src] ^ mask)
        if np.any(tgt < 0):
            raise ValueError("sector basis is not closed under the exchange terms")
        rows.append(src)
        cols.append(tgt)
        vals.append(np.full(src.size, 2.0 * c))
    rows.append(np.arange(dim, dtype=np.int64))
    cols.append(np.arange(dim, dtype=np.int64))
    vals.append(diag)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    return mat


def build_kondo_chain(spec: KondoChain, basis: SectorBasis | None = None) -> LinearOperator:
    terms = kondo_terms(spec)
    norm_bound = sum(abs(t.coefficient) for t in terms.terms)
    if basis is None or basis.kind == "full":
        return operator_from_terms(terms, basis)
    if basis.n_sites != spec.n_sites:
        raise ValueError("basis size does not match the model")
    mat = _heisenberg_sector_matrix(spec, basis)
    return LinearOperator(basis, mat, terms=terms, norm_bound=norm_bound)


def build_hamiltonian(spec, basis: SectorBasis | None = None) -> LinearOperator:
    if isinstance(spec, LongRangeIsing):
        return build_long_range_ising(spec, basis)
    if isinstance(spec, TFIC):
        return build_tfic(spec, basis)
    if isinstance(spec, KondoChain):
        return build_kondo_chain(spec, basis)
    raise TypeError(f"unknown model spec {type(spec).__name__}")


def parity_operator(n_sites: int, basis: SectorBasis | None = None) -> LinearOperator:
    """P = prod_i sigma^z_i: diagonal with entries (-1)^popcount."""
    if basis is None:
        basis = full_basis(n_sites)
    signs = 1.0 - 2.0 * (np.bitwise_count(basis.states) % np.uint64(2)).astype(np.float64)
    mat = sp.diags(signs, format="csr")
    return LinearOperator(basis, mat, norm_bound=1.0)
