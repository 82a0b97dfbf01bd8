"""Dense Kronecker-product oracles shared by the test modules.

Conventions match the package: site j sits on bit j-1 of the basis index,
so site 1 varies fastest and must be the last Kronecker factor; index 0 of a
single site is spin up (sigma^z = +1).
"""

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID = np.eye(2, dtype=complex)
PAULI = {"x": SX, "y": SY, "z": SZ}


def dense_pauli(axis, site, n_sites):
    """sigma^axis on one site as a dense 2^N matrix."""
    out = np.array([[1.0 + 0.0j]])
    for j in range(n_sites, 0, -1):
        out = np.kron(out, PAULI[axis] if j == site else ID)
    return out


def dense_string(factors, n_sites):
    """Product of single-site Paulis, factors = ((axis, site), ...)."""
    out = np.eye(1 << n_sites, dtype=complex)
    for axis, site in factors:
        out = out @ dense_pauli(axis, site, n_sites)
    return out


def dense_from_terms(termlist):
    """Dense matrix of a hamiltonians.TermList."""
    n = termlist.n_sites
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for t in termlist.terms:
        out += t.coefficient * dense_string(t.factors, n)
    return out


def random_state(n_sites, rng):
    """Normalized random complex vector on the full basis."""
    dim = 1 << n_sites
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
