"""Complex-matrix quantum primitives.

States are plain ``(d, d)`` complex ndarrays that satisfy the density-matrix
invariants (Hermitian, positive semidefinite, unit trace); unitaries likewise
are plain ndarrays.  The ``require_*`` validators enforce the invariants and
are called at API boundaries and in tests.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import TOL, Tolerances

__all__ = [
    "RngStream",
    "require_density_matrix",
    "require_unitary",
    "require_projector",
    "haar_unitary",
    "weighted_haar_unitary",
    "random_state",
    "random_pure_ket",
    "fidelity",
    "von_neumann_entropy",
    "unitary_log",
    "basis_projectors",
    "born_probabilities_basis",
    "born_probabilities_projectors",
]


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by (seed, stream id).

    Identical (seed, stream) pairs produce bit-identical draws.  ``derive``
    creates an independent child stream, used e.g. for per-dataset
    parallelism.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def derive(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream * 1_000_003 + index + 1)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng)).generator()


class InvariantError(ValueError):
    """A matrix failed one of the domain-type invariants."""


def require_density_matrix(rho: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvariantError(f"density matrix must be square, got {rho.shape}")
    if np.linalg.norm(rho - rho.conj().T) > max(tol.hermitian, 1e-12 * rho.shape[0]):
        raise InvariantError("density matrix is not Hermitian")
    ev = np.linalg.eigvalsh(rho)
    if ev.min() < tol.eigenvalue_floor:
        raise InvariantError(f"density matrix has negative eigenvalue {ev.min():.3e}")
    if abs(np.trace(rho).real - 1.0) > tol.trace:
        raise InvariantError(f"density matrix trace {np.trace(rho).real} != 1")
    return rho


def require_unitary(u: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvariantError(f"unitary must be square, got {u.shape}")
    d = u.shape[0]
    if np.linalg.norm(u.conj().T @ u - np.eye(d)) > tol.unitarity * max(1.0, d):
        raise InvariantError("matrix is not unitary")
    return u


def require_projector(pi: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Validate a rank-1 subnormalized projector (0 <= Pi, tr Pi <= 1)."""
    pi = np.asarray(pi, dtype=complex)
    ev = np.linalg.eigvalsh(pi)
    if ev.min() < tol.eigenvalue_floor:
        raise InvariantError("projector is not PSD")
    if np.trace(pi).real > 1.0 + tol.projector_trace:
        raise InvariantError("projector trace exceeds 1")
    if ev.size > 1 and ev[-2] > tol.projector_rank:
        raise InvariantError("projector is not rank 1")
    return pi


def haar_unitary(d: int, rng) -> np.ndarray:
    """Haar-distributed random unitary via phase-fixed QR of a Ginibre matrix."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    g = _as_generator(rng)
    a = (g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = scipy.linalg.qr(a)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return q


def weighted_haar_unitary(lam: float, d: int, rng) -> np.ndarray:
    """Unitary interpolating between the identity (lam=0) and Haar (lam=1).

    The Ginibre matrix is blended with the identity, A' = lam*A + (1-lam)*I,
    before the phase-fixed QR step, so lam=0 returns the identity exactly.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {lam}")
    g = _as_generator(rng)
    a = (g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))) / np.sqrt(2.0)
    a = lam * a + (1.0 - lam) * np.eye(d)
    q, r = scipy.linalg.qr(a)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return q


def random_pure_ket(d: int, rng) -> np.ndarray:
    g = _as_generator(rng)
    psi = g.standard_normal(d) + 1j * g.standard_normal(d)
    return psi / np.linalg.norm(psi)


def random_state(d: int, r: int, rng) -> np.ndarray:
    """Random rank-r state rho = A A^dag / tr(A A^dag), A a d x r Ginibre matrix."""
    if not 1 <= r <= d:
        raise ValueError(f"rank must satisfy 1 <= r <= d, got r={r}, d={d}")
    g = _as_generator(rng)
    a = (g.standard_normal((d, r)) + 1j * g.standard_normal((d, r))) / np.sqrt(2.0)
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh(rho)
    ev = np.clip(ev, 0.0, None)
    return (vec * np.sqrt(ev)) @ vec.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity tr{sqrt(sqrt(a) b sqrt(a))}^2.

    Negative eigenvalues from roundoff are clamped to zero before the square
    roots so slightly-off-PSD inputs stay defined.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sa = _psd_sqrt(a)
    ev = np.linalg.eigvalsh(sa @ b @ sa)
    ev = np.clip(ev, 0.0, None)
    val = np.sum(np.sqrt(ev)) ** 2
    return float(min(max(val, 0.0), 1.0 + 1e-9))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy -tr(rho log rho) in nats; zero eigenvalues contribute nothing."""
    ev = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    ev = ev[ev > 1e-15]
    return float(-np.sum(ev * np.log(ev)))


def unitary_log(u: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Hermitian H with exp(iH) = U, eigenphases on the principal branch (-pi, pi].

    Uses the complex Schur form, which stays numerically orthonormal for
    degenerate eigenphases where a plain eigendecomposition may not.
    """
    u = require_unitary(u, tol)
    t, v = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diagonal(t))  # np.angle maps -1 to +pi
    h = (v * phases) @ v.conj().T
    return 0.5 * (h + h.conj().T)


def basis_projectors(unitary: np.ndarray) -> np.ndarray:
    """Rank-1 projectors U|j><j|U^dag for all columns j, shape (d, d, d)."""
    u = np.asarray(unitary, dtype=complex)
    return np.einsum("ij,kj->jik", u, u.conj())


def born_probabilities_basis(rho: np.ndarray, unitary: np.ndarray) -> np.ndarray:
    """Probabilities diag(U^dag rho U) of measuring rho in the rotated basis."""
    rho = np.asarray(rho, dtype=complex)
    u = np.asarray(unitary, dtype=complex)
    if rho.shape[0] != u.shape[0]:
        raise ValueError("dimension mismatch between state and basis")
    p = np.einsum("ij,jk,ki->i", u.conj().T, rho, u).real
    return np.clip(p, 0.0, 1.0)


def born_probabilities_projectors(rho: np.ndarray, projectors: np.ndarray) -> np.ndarray:
    """Probabilities tr(rho Pi_l) for a stack of projectors, shape (L, d, d)."""
    rho = np.asarray(rho, dtype=complex)
    projectors = np.asarray(projectors, dtype=complex)
    if rho.shape[0] != projectors.shape[-1]:
        raise ValueError("dimension mismatch between state and projectors")
    p = np.einsum("lij,ji->l", projectors, rho).real
    return np.clip(p, 0.0, 1.0)
