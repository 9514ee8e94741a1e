"""Extremal unitary rotations.

Four two-matrix inequalities bound a function of Q^H A Q and B over all
unitary Q; the bounds are reached when the eigenbases of the two matrices
are aligned (largest with largest) or anti-aligned (largest with smallest).
The optimal inner rotation of every objective case follows from one of
these alignments, from a DFT spreading of the diagonal, or from an
equal-diagonal triangular factorization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .cases import ObjectiveCase, Schur, NotApplicable
from .linalg import herm_eig, hermitian_part, logdet_pd, svd, DimensionMismatch, NotPSD

__all__ = [
    "IneqBound", "Construction", "QSolution", "SingularSum", "NotPD",
    "ineq_trace_product", "ineq_logdet_sum", "ineq_logdet_product_plus_i",
    "ineq_trace_inv_sum", "middle_trace_product", "middle_det_sum",
    "middle_det_product_plus_i", "middle_trace_inv_sum", "INEQUALITIES",
    "optimal_q", "dft_matrix", "equal_diag_cholesky_rotation",
]


class SingularSum(ValueError):
    pass


class NotPD(ValueError):
    pass


class Construction(enum.Enum):
    EIG_ALIGN = "eig-align"
    EIG_ANTI_ALIGN = "eig-anti-align"
    DFT = "dft"
    EQUAL_DIAG_CHOLESKY = "equal-diag-cholesky"
    IDENTITY = "identity"


@dataclass(frozen=True)
class IneqBound:
    lower: float
    upper: float
    q_lower: np.ndarray
    q_upper: np.ndarray


@dataclass(frozen=True)
class QSolution:
    q: np.ndarray
    construction: Construction


def _pair(a, b):
    a = hermitian_part(a)
    b = hermitian_part(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    for name, m in (("a", a), ("b", b)):
        w = np.linalg.eigvalsh(m)
        if len(w) and w[0] < -1e-8 * max(w[-1], 1e-14):
            raise NotPSD(f"{name} is not positive semi-definite")
    ea = herm_eig(a, "descending")
    eb = herm_eig(b, "descending")
    la_ = np.clip(ea.eigenvalues, 0.0, None)
    lb = np.clip(eb.eigenvalues, 0.0, None)
    u_a = ea.eigenvectors
    u_b = eb.eigenvectors
    u_b_bar = u_b[:, ::-1]  # ascending ordering of B
    aligned = u_a @ u_b.conj().T
    anti = u_a @ u_b_bar.conj().T
    return la_, lb, aligned, anti


def middle_trace_product(a, b, q) -> float:
    return float(np.real(np.trace(q.conj().T @ a @ q @ b)))


def middle_det_sum(a, b, q) -> float:
    return float(np.real(np.linalg.det(q.conj().T @ a @ q + b)))


def middle_det_product_plus_i(a, b, q) -> float:
    # |Q^H A Q B + I| = |B^{1/2} Q^H A Q B^{1/2} + I|, real and >= 1
    return float(np.real(np.linalg.det(q.conj().T @ a @ q @ b + np.eye(a.shape[0]))))


def middle_trace_inv_sum(a, b, q) -> float:
    return float(np.real(np.trace(np.linalg.inv(q.conj().T @ a @ q + b))))


def ineq_trace_product(a, b) -> IneqBound:
    """Bounds on Tr(Q^H A Q B)."""
    la_, lb, aligned, anti = _pair(a, b)
    return IneqBound(float(la_ @ lb[::-1]), float(la_ @ lb), anti, aligned)


def ineq_logdet_sum(a, b) -> IneqBound:
    """Bounds on the determinant |Q^H A Q + B| (not its log): aligned gives the minimum."""
    la_, lb, aligned, anti = _pair(a, b)
    return IneqBound(float(np.prod(la_ + lb)), float(np.prod(la_ + lb[::-1])), aligned, anti)


def ineq_logdet_product_plus_i(a, b) -> IneqBound:
    """Bounds on the determinant |Q^H A Q B + I| (not its log): anti-aligned gives the minimum."""
    la_, lb, aligned, anti = _pair(a, b)
    return IneqBound(float(np.prod(la_ * lb[::-1] + 1.0)), float(np.prod(la_ * lb + 1.0)), anti, aligned)


def ineq_trace_inv_sum(a, b) -> IneqBound:
    """Bounds on Tr[(Q^H A Q + B)^{-1}]: anti-aligned gives the minimum."""
    la_, lb, aligned, anti = _pair(a, b)
    worst = la_ + lb  # smallest entries pair up in the aligned sum
    if worst.min(initial=np.inf) <= 1e-12 * max(worst.max(initial=0.0), 1e-14):
        raise SingularSum("Q^H A Q + B is singular for some alignment")
    return IneqBound(float(np.sum(1.0 / (la_ + lb[::-1]))), float(np.sum(1.0 / worst)), anti, aligned)


INEQUALITIES = {
    "trace_product": (ineq_trace_product, middle_trace_product),
    "det_sum": (ineq_logdet_sum, middle_det_sum),
    "det_product_plus_i": (ineq_logdet_product_plus_i, middle_det_product_plus_i),
    "trace_inv_sum": (ineq_trace_inv_sum, middle_trace_inv_sum),
}


def dft_matrix(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def _gmd_rotation(sv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal Q_g and upper-triangular R with diag(sv) Q_g = P R, diag(R) constant.

    Each step equalizes one diagonal entry with a pair of plane rotations
    chosen so the entry under the diagonal stays zero.
    """
    n = len(sv)
    r = np.diag(sv.astype(float))
    q = np.eye(n)
    target = float(np.exp(np.mean(np.log(sv))))
    for k in range(n - 1):
        # the trailing block is still diagonal with geometric mean `target`,
        # so its max sits above and its min below; move them to k and k+1
        d = np.diag(r)[k:]
        hi = k + int(np.argmax(d))
        lo = k + int(np.argmin(d))
        if hi == lo:
            break
        perm = list(range(k)) + [hi, lo] + [i for i in range(k, n) if i not in (hi, lo)]
        r = r[np.ix_(perm, perm)]
        q = q[:, perm]
        d1, d2 = r[k, k], r[k + 1, k + 1]
        if d1 - d2 <= 1e-15 * d1:
            continue
        c = np.sqrt(np.clip((target ** 2 - d2 ** 2) / (d1 ** 2 - d2 ** 2), 0.0, 1.0))
        s = np.sqrt(1.0 - c ** 2)
        g2 = np.array([[c, -s], [s, c]])
        g1 = np.array([[c * d1, -s * d2], [s * d2, c * d1]]) / target
        idx = [k, k + 1]
        r[:, idx] = r[:, idx] @ g2
        r[idx, :] = g1.T @ r[idx, :]
        r[k + 1, k] = 0.0
        q[:, idx] = q[:, idx] @ g2
    return q, r


def equal_diag_cholesky_rotation(m) -> QSolution:
    """Unitary Q_T such that chol(Q_T^H m Q_T) has all diagonal entries equal.

    The common value is det(m)^{1/(2N)}. Writing m = B^H B with
    B = Lambda^{1/2} U^H, a geometric-mean decomposition B Q_g = P R gives
    Q_T = U Q_g and chol(Q_T^H m Q_T) = R^H.
    """
    e = herm_eig(m, "descending")
    w = e.eigenvalues
    if w[-1] <= 1e-12 * max(abs(w[0]), 1e-14):
        raise NotPD("matrix is not positive definite")
    q_g, _ = _gmd_rotation(np.sqrt(w))
    return QSolution(e.eigenvectors @ q_g, Construction.EQUAL_DIAG_CHOLESKY)


def optimal_q(case: ObjectiveCase, m) -> QSolution:
    """Inner rotation Q minimizing the case objective at T = Q^H m Q."""
    m = hermitian_part(m)
    n = m.shape[0]
    case.check_dim(n)
    u_m = herm_eig(m, "descending").eigenvectors
    num = case.number
    if num in (1, 3, 4):
        u_n_bar = herm_eig(case.n_mat, "ascending").eigenvectors
        return QSolution(u_m @ u_n_bar.conj().T, Construction.EIG_ANTI_ALIGN)
    if num in (2, 6):
        u_a = svd(case.a_mat).U
        return QSolution(u_m @ u_a.conj().T, Construction.EIG_ALIGN)
    if num == 5:
        ana = case.a_mat @ np.linalg.solve(case.n_mat, case.a_mat.conj().T)
        u_ana = herm_eig(0.5 * (ana + ana.conj().T), "descending").eigenvectors
        return QSolution(u_m @ u_ana.conj().T, Construction.EIG_ALIGN)
    if num == 7:
        if case.schur is Schur.ADD_CONCAVE:
            return QSolution(u_m, Construction.EIG_ALIGN)
        return QSolution(u_m @ dft_matrix(n).conj().T, Construction.DFT)
    if num == 8:
        if case.schur is Schur.MUL_CONCAVE:
            return QSolution(u_m, Construction.EIG_ALIGN)
        lam = np.clip(herm_eig(m, "descending").eigenvalues, 0.0, None)
        q_t = equal_diag_cholesky_rotation(np.diag(1.0 / (1.0 + lam))).q
        return QSolution(u_m @ q_t, Construction.EQUAL_DIAG_CHOLESKY)
    raise NotApplicable(f"unsupported case {num}")
