"""Ground states and spectra.

Small systems (dim <= 2^14) get a dense symmetric diagonalization, which also
serves as the oracle for everything else.  Larger systems use ARPACK's
implicitly restarted Lanczos through scipy.sparse.linalg.eigsh with a fixed,
documented starting vector so results are reproducible run to run.

Eigenvector gauge: all vectors are real (the Hamiltonians are real symmetric)
and the sign is fixed by making the largest-magnitude component positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .hamiltonians import LinearOperator
from .statespace import StateVector

__all__ = [
    "EigenPair",
    "SpectrumTable",
    "NonConvergenceError",
    "ground_state",
    "lowest_k",
    "full_spectrum",
]

START_VECTOR_SEED = 20170907   # fixed seed for the Lanczos starting vector
DENSE_CUTOFF = 512             # below this, dense diagonalization is cheapest
DEGENERACY_TOL = 1e-10


class NonConvergenceError(RuntimeError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


@dataclass
class EigenPair:
    value: float
    vector: StateVector


class SpectrumTable:
    """Eigenpairs in ascending energy order.

    ``vectors`` is a (dim, k) real array, one eigenvector per column;
    ``complete`` marks a full spectrum (required for spectral evolution).
    """

    def __init__(self, energies, vectors, basis, complete):
        order = np.argsort(energies, kind="stable")
        self.energies = np.asarray(energies, dtype=np.float64)[order]
        self.vectors = np.ascontiguousarray(np.asarray(vectors)[:, order])
        self.basis = basis
        self.complete = bool(complete)

    def __len__(self):
        return self.energies.size

    def pair(self, n: int) -> EigenPair:
        return EigenPair(float(self.energies[n]),
                         StateVector(self.vectors[:, n].astype(np.complex128), self.basis))

    @property
    def ground(self) -> EigenPair:
        return self.pair(0)


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(vec)))
    return -vec if vec[i] < 0 else vec


def _start_vector(dim: int) -> np.ndarray:
    rng = np.random.default_rng(START_VECTOR_SEED)
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _residual(op: LinearOperator, vec: np.ndarray, energy: float) -> float:
    return float(np.linalg.norm(op.matvec(vec) - energy * vec))


def _lowest_sparse(op: LinearOperator, k: int, tol: float, max_iter: int):
    v0 = _start_vector(op.dim)
    ncv = min(op.dim, max(4 * k + 20, 40))
    try:
        vals, vecs = spla.eigsh(op.matrix, k=k, which="SA", tol=tol,
                                v0=v0, ncv=ncv, maxiter=max_iter)
    except spla.ArpackNoConvergence as exc:
        raise NonConvergenceError(
            f"Lanczos failed to converge {k} eigenpairs within {max_iter} iterations") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def lowest_k(op: LinearOperator, k: int, tol: float = 1e-8,
             max_iter: int = 100000) -> SpectrumTable:
    """The k lowest eigenpairs with residual norm <= max(tol, 1e-12)."""
    if op.dim == 0:
        raise ValueError("operator has dimension 0")
    if k < 1 or k > op.dim:
        raise ValueError(f"k = {k} outside 1..{op.dim}")
    if op.dim <= DENSE_CUTOFF or k > op.dim - 2:
        vals, vecs = sla.eigh(op.to_dense(cap=1 << 14))
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        vals, vecs = _lowest_sparse(op, k, tol, max_iter)
        for i in range(k):
            res = _residual(op, vecs[:, i], vals[i])
            if res > max(tol, 1e-12) * max(1.0, op.norm_bound):
                # one retry at tighter ARPACK tolerance before giving up
                vals, vecs = _lowest_sparse(op, k, tol * 1e-3, max_iter)
                res = max(_residual(op, vecs[:, j], vals[j]) for j in range(k))
                if res > max(tol, 1e-12) * max(1.0, op.norm_bound):
                    raise NonConvergenceError(
                        f"residual {res:.3e} above tolerance after retry", residual=res)
                break
    vecs = np.column_stack([_fix_sign(vecs[:, i]) for i in range(k)])
    return SpectrumTable(vals, vecs, op.basis, complete=(k == op.dim))


def ground_state(op: LinearOperator, tol: float = 1e-10, max_iter: int = 100000,
                 parity: LinearOperator | None = None) -> EigenPair:
    """Lowest eigenpair; deterministic given the fixed starting-vector seed.

    When ``parity`` is given (an operator commuting with op) the returned
    vector is made a definite-parity state: for a (near-)degenerate lowest
    doublet the even-parity combination is chosen, otherwise the dominant
    parity component is kept.  Needed below the TFIC critical point, where
    the lowest doublet splitting closes and a bare solver would return an
    arbitrary superposition with <sigma^x> != 0.
    """
    if parity is None:
        table = lowest_k(op, 1, tol=tol, max_iter=max_iter)
        return table.ground
    k = min(2, op.dim)
    table = lowest_k(op, k, tol=tol, max_iter=max_iter)
    v0 = table.vectors[:, 0]
    p00 = float(v0 @ parity.matvec(v0))
    if k == 2 and table.energies[1] - table.energies[0] < max(10 * tol, 1e-8):
        v1 = table.vectors[:, 1]
        pmat = np.array([[p00, v0 @ parity.matvec(v1)],
                         [v1 @ parity.matvec(v0), v1 @ parity.matvec(v1)]])
        pvals, pvecs = sla.eigh(pmat)
        c = pvecs[:, int(np.argmax(pvals))]       # the +1-parity combination
        vec = _fix_sign(c[0] * v0 + c[1] * v1)
        vec /= np.linalg.norm(vec)
        energy = float(vec @ op.matvec(vec))
    else:
        vec = v0 + np.sign(p00) * parity.matvec(v0)
        vec = _fix_sign(vec / np.linalg.norm(vec))
        energy = float(table.energies[0])
    return EigenPair(energy, StateVector(vec.astype(np.complex128), op.basis))


def full_spectrum(op: LinearOperator) -> SpectrumTable:
    """All eigenpairs by dense diagonalization; refuses above dim 2^14."""
    if op.dim == 0:
        raise ValueError("operator has dimension 0")
    if op.dim > (1 << 14):
        raise ValueError(f"full spectrum refused: dim {op.dim} exceeds 2^14")
    vals, vecs = sla.eigh(op.to_dense())
    vecs = np.column_stack([_fix_sign(vecs[:, i]) for i in range(op.dim)])
    return SpectrumTable(vals, vecs, op.basis, complete=True)
