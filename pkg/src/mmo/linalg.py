"""Dense complex linear-algebra kernels.

Every spectrum returned here carries an explicit ordering. The design
formulas pair "largest with smallest" or "largest with largest", so the
order is part of the contract, not an accident of LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

__all__ = [
    "LinAlgInputError", "NonHermitian", "NonFinite", "NotPSD", "Singular",
    "DimensionMismatch", "HermEig", "Svd", "herm_eig", "svd", "psd_sqrt",
    "psd_inv_sqrt", "kron", "loewner_geq", "hermitian_part", "logdet_pd",
    "random_unitary",
]

HERM_TOL = 1e-10
ABS_FLOOR = 1e-14


class LinAlgInputError(ValueError):
    """Base class for rejected inputs."""


class NonHermitian(LinAlgInputError):
    pass


class NonFinite(LinAlgInputError):
    pass


class NotPSD(LinAlgInputError):
    pass


class Singular(LinAlgInputError):
    pass


class DimensionMismatch(LinAlgInputError):
    pass


@dataclass(frozen=True)
class HermEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    order: str  # "descending" | "ascending"

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


@dataclass(frozen=True)
class Svd:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        m, n = self.U.shape[0], self.V.shape[0]
        s = np.zeros((m, n), dtype=complex)
        k = len(self.singular_values)
        s[:k, :k] = np.diag(self.singular_values)
        return self.U @ s @ self.V.conj().T


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix contains NaN or Inf")
    return a.astype(complex, copy=False)


def _check_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {a.shape}")


def hermitian_part(m) -> np.ndarray:
    """Validate Hermitian-ness (relative asymmetry <= 1e-10) and symmetrize."""
    a = _as_matrix(m)
    _check_square(a)
    scale = max(np.abs(a).max(initial=0.0), ABS_FLOOR)
    if np.abs(a - a.conj().T).max(initial=0.0) > HERM_TOL * scale:
        raise NonHermitian("matrix is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def herm_eig(m, order: str = "descending") -> HermEig:
    """Eigendecomposition of a Hermitian matrix with a fixed ordering.

    Ties are broken by a stable sort, so within a degenerate eigenspace the
    eigenvector choice is whatever LAPACK returned.
    """
    if order not in ("descending", "ascending"):
        raise ValueError(f"unknown order {order!r}")
    a = hermitian_part(m)
    w, u = np.linalg.eigh(a)
    if order == "descending":
        idx = np.argsort(-w, kind="stable")
    else:
        idx = np.argsort(w, kind="stable")
    return HermEig(w[idx], u[:, idx], order)


def svd(m) -> Svd:
    """Full SVD with non-increasing singular values; U and V are square."""
    a = _as_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    return Svd(u, s, vh.conj().T)


def psd_sqrt(m) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues down to -1e-8 * lambda_max are treated as round-off and
    clamped to zero; anything more negative is rejected.
    """
    e = herm_eig(m, "descending")
    w = e.eigenvalues
    lam_max = max(w[0], 0.0) if len(w) else 0.0
    if len(w) and w[-1] < -1e-8 * max(lam_max, ABS_FLOOR):
        raise NotPSD(f"minimum eigenvalue {w[-1]:.3e} is negative")
    w = np.clip(w, 0.0, None)
    u = e.eigenvectors
    r = (u * np.sqrt(w)) @ u.conj().T
    return 0.5 * (r + r.conj().T)


def psd_inv_sqrt(m) -> np.ndarray:
    """Inverse Hermitian square root of a positive definite matrix."""
    e = herm_eig(m, "descending")
    w = e.eigenvalues
    if len(w) == 0:
        return np.zeros((0, 0), dtype=complex)
    if w[-1] <= 1e-12 * max(abs(w[0]), ABS_FLOOR):
        raise Singular("matrix is not numerically positive definite")
    u = e.eigenvectors
    r = (u / np.sqrt(w)) @ u.conj().T
    return 0.5 * (r + r.conj().T)


def kron(a, b) -> np.ndarray:
    return np.kron(_as_matrix(a), _as_matrix(b))


def loewner_geq(a, b) -> bool:
    """True iff a - b is PSD, up to -1e-10 * max(1, lambda_max(a - b))."""
    a = hermitian_part(a)
    b = hermitian_part(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    w = np.linalg.eigvalsh(a - b)
    return bool(w[0] >= -1e-10 * max(1.0, w[-1]))


def logdet_pd(m) -> float:
    """log|m| for Hermitian positive definite m, via Cholesky."""
    a = hermitian_part(m)
    try:
        c = la.cholesky(a, lower=True)
    except la.LinAlgError as exc:
        raise Singular("matrix is not positive definite") from exc
    return float(2.0 * np.sum(np.log(np.real(np.diag(c)))))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
