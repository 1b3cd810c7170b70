"""Dense complex-matrix kernel for small density matrices (dim <= 8).

Everything here is a pure function of its inputs. Logarithms in entropies are
base 2; the divided differences of the logarithm use the natural log.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
SUPPORT_CUTOFF = 1e-12
EQUAL_EIG_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending with the matching column eigenvectors."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.conj().T


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def hermitian_eig(m: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.

    Raises:
        ValueError: if ``m`` is not square and Hermitian within 1e-10.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise ValueError("hermitian_eig: input matrix is not Hermitian within 1e-10")
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    return EigenSystem(w[::-1].copy(), v[:, ::-1].copy())


def qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def check_density(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate and return ``rho`` as a complex density matrix.

    Hermiticity and unit trace are checked at ``tol``; the smallest eigenvalue
    must be >= -``tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    qubit_count(rho.shape[0])
    if not is_hermitian(rho, tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real:.3e} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def tensor(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m))
    return out


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"hadamard: shape mismatch {a.shape} vs {b.shape}")
    return a * b


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _xlog2x(p: np.ndarray) -> np.ndarray:
    p = np.where(p > SUPPORT_CUTOFF, p, 1.0)
    return p * np.log2(p)


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    w = w[w > SUPPORT_CUTOFF]
    return float(-np.sum(w * np.log2(w)))


def relative_entropy(rho: np.ndarray, tau: np.ndarray) -> float:
    """Quantum relative entropy S(rho || tau) in bits.

    Returns ``inf`` when the support of ``rho`` is not contained in that of
    ``tau`` (eigenvalue cutoff 1e-12).
    """
    rho = np.asarray(rho, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    if rho.shape != tau.shape:
        raise ValueError(f"relative_entropy: dimension mismatch {rho.shape} vs {tau.shape}")
    return -von_neumann_entropy(rho) + cross_entropy(rho, hermitian_eig(tau))


def cross_entropy(rho: np.ndarray, tau_eig: EigenSystem) -> float:
    """-Tr(rho log2 tau) given the eigensystem of tau; ``inf`` off support."""
    lam, u = tau_eig.eigenvalues, tau_eig.basis
    diag = np.einsum("ki,kl,li->i", u.conj(), rho, u).real
    support = lam > SUPPORT_CUTOFF
    if np.any(diag[~support] > SUPPORT_CUTOFF):
        return float("inf")
    return float(-np.sum(diag[support] * np.log2(lam[support])))


def log_divided_differences(lam: np.ndarray) -> np.ndarray:
    """First divided differences of the natural log at the given eigenvalues.

    Entry (k, l) is (ln a - ln b) / (a - b), or 1/a on (near-)ties. Pairs
    involving an eigenvalue below the support cutoff are set to 0.
    """
    lam = np.asarray(lam, dtype=float)
    a, b = lam[:, None], lam[None, :]
    pos = (a > SUPPORT_CUTOFF) & (b > SUPPORT_CUTOFF)
    safe_a = np.where(pos, a, 1.0)
    safe_b = np.where(pos, b, 1.0)
    tie = np.abs(safe_a - safe_b) <= EQUAL_EIG_TOL * np.maximum(safe_a, safe_b)
    diff = np.where(tie, 1.0, safe_a - safe_b)
    gamma = np.where(tie, 1.0 / safe_a, np.log1p(diff / safe_b) / diff)
    return np.where(pos, gamma, 0.0)


def cross_entropy_gradient(rho: np.ndarray, tau_eig: EigenSystem) -> np.ndarray:
    """Gradient of tau -> -Tr(rho log2 tau) as a Hermitian matrix.

    Uses the divided-difference form of the Frechet derivative of the matrix
    logarithm in the eigenbasis of tau. Only the support of tau contributes.
    """
    u = tau_eig.basis
    rho_t = u.conj().T @ rho @ u
    g = -(rho_t * log_divided_differences(tau_eig.eigenvalues)) / np.log(2)
    return u @ g @ u.conj().T
