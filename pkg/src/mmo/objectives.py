"""Objective evaluation: matrix forms, eigenvalue forms and the named registry."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cases import ObjectiveCase, Schur
from .core import (
    BoundMode, PrecoderSolution, ProblemSpec, capacity_waterfill, effective_snr_matrix,
    noise_covariance, solve_allocated, waterfill,
)
from .linalg import DimensionMismatch, Singular, hermitian_part, kron, logdet_pd
from .unitary import optimal_q

__all__ = [
    "UnknownObjective", "NamedObjective", "eval_f_inner", "eval_f_matrix",
    "eval_f_vector", "mse_matrix", "named_scalar_objectives", "get_objective",
    "design", "NATS_TO_BITS",
]

NATS_TO_BITS = 1.0 / np.log(2.0)


class UnknownObjective(KeyError):
    pass


def _inv_pd(m: np.ndarray) -> np.ndarray:
    r = np.linalg.inv(m)
    return 0.5 * (r + r.conj().T)


def _diag_mse(t: np.ndarray) -> np.ndarray:
    return np.real(np.diag(_inv_pd(t + np.eye(t.shape[0]))))


def _chol_diag_sq(t: np.ndarray) -> np.ndarray:
    e = _inv_pd(t + np.eye(t.shape[0]))
    return np.real(np.diag(np.linalg.cholesky(e))) ** 2


def eval_f_inner(case: ObjectiveCase, t) -> float:
    """Case objective (minimization sense) at the inner matrix T = Q^H M Q."""
    t = hermitian_part(t)
    n = t.shape[0]
    case.check_dim(n)
    eye = np.eye(n)
    num = case.number
    if num == 1:
        return -logdet_pd(t + case.n_mat)
    if num == 2:
        a = case.a_mat
        return -logdet_pd(a.conj().T @ t @ a + np.eye(a.shape[1]))
    if num == 3:
        return float(np.real(np.trace(_inv_pd(t + case.n_mat))))
    if num == 4:
        big = kron(t, case.m_mat) + kron(case.n_mat, case.m_mat)
        return float(np.real(np.trace(_inv_pd(big))))
    if num == 5:
        a = case.a_mat
        return logdet_pd(a.conj().T @ _inv_pd(t + eye) @ a + case.n_mat)
    if num == 6:
        a = case.a_mat
        return float(np.real(np.trace(a.conj().T @ _inv_pd(t + eye) @ a)))
    if num == 7:
        return float(case.scalar_fn(_diag_mse(t)))
    if num == 8:
        return float(case.scalar_fn(_chol_diag_sq(t)))
    raise ValueError(f"unsupported case {num}")


def eval_f_matrix(case: ObjectiveCase, x, spec: ProblemSpec) -> float:
    """Case objective for the final design X, with K_X built from the spec."""
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != spec.n_t:
        raise DimensionMismatch(f"x must have {spec.n_t} rows")
    k = noise_covariance(x, spec.psi, spec.sigma, spec.noise_var)
    if np.linalg.eigvalsh(k)[0] <= 0:
        raise Singular("K_X is not positive definite")
    return eval_f_inner(case, effective_snr_matrix(x, spec))


def eval_f_vector(case: ObjectiveCase, eigs) -> float:
    """Case objective after the optimal rotation, as a function of lambda(M) only."""
    lam = np.sort(np.clip(np.asarray(eigs, dtype=float), 0.0, None))[::-1]
    n = len(lam)
    case.check_dim(n)
    num = case.number
    if num in (1, 3, 4):
        n_bar = np.linalg.eigvalsh(case.n_mat)  # ascending
        s = lam + n_bar
        if num == 1:
            return float(-np.sum(np.log(s)))
        val = float(np.sum(1.0 / s))
        if num == 4:
            val *= float(np.real(np.trace(_inv_pd(case.m_mat))))
        return val
    if num in (2, 6):
        a_sq = np.linalg.svd(case.a_mat, compute_uv=False) ** 2
        a_sq = np.concatenate([a_sq, np.zeros(n - len(a_sq))])[:n]
        if num == 2:
            return float(-np.sum(np.log(a_sq * lam + 1.0)))
        return float(np.sum(a_sq / (1.0 + lam)))
    if num == 5:
        ana = case.a_mat @ np.linalg.solve(case.n_mat, case.a_mat.conj().T)
        l_ana = np.linalg.eigvalsh(hermitian_part(0.5 * (ana + ana.conj().T)))[::-1]
        return float(logdet_pd(case.n_mat) + np.sum(np.log(l_ana + lam + 1.0))
                     - np.sum(np.log(lam + 1.0)))
    d = 1.0 / (1.0 + lam)
    if num == 7:
        if case.schur is Schur.ADD_CONVEX:
            d = np.full(n, d.mean())
        return float(case.scalar_fn(d))
    if num == 8:
        if case.schur is Schur.MUL_CONVEX:
            d = np.full(n, np.exp(np.mean(np.log(d))))
        return float(case.scalar_fn(d))
    raise ValueError(f"unsupported case {num}")


def mse_matrix(f, q, spec: ProblemSpec, h=None) -> np.ndarray:
    """(Q^H F^H H^H K_F^{-1} H F Q + I)^{-1}."""
    f = np.asarray(f, dtype=complex)
    m = effective_snr_matrix(f, spec, h)
    t = q.conj().T @ m @ q
    return _inv_pd(0.5 * (t + t.conj().T) + np.eye(t.shape[0]))


def _sum_mse_alloc(gains, power):
    return waterfill(gains, np.ones_like(gains), power)[0]


def _capacity_alloc(gains, power):
    return capacity_waterfill(gains, power)[0]


@dataclass(frozen=True)
class NamedObjective:
    name: str
    schur: Schur
    scalar_fn: Callable[[np.ndarray], float]
    allocate: Callable[[np.ndarray, float], np.ndarray]
    description: str

    def case(self) -> ObjectiveCase:
        number = 8 if self.schur.multiplicative else 7
        return ObjectiveCase(number, schur=self.schur, scalar_fn=self.scalar_fn, label=self.name)


def _registry() -> dict[str, NamedObjective]:
    entries = [
        NamedObjective("capacity", Schur.ADD_CONCAVE, lambda d: float(np.sum(np.log(d))),
                       _capacity_alloc, "negative capacity in nats, sum log d"),
        NamedObjective("sum-mse", Schur.ADD_CONCAVE, lambda d: float(np.sum(d)),
                       _sum_mse_alloc, "sum of stream MSEs"),
        NamedObjective("max-mse", Schur.ADD_CONVEX, lambda d: float(np.max(d)),
                       _sum_mse_alloc, "largest stream MSE"),
        NamedObjective("prod-mse", Schur.MUL_CONCAVE, lambda d: float(np.prod(d)),
                       _capacity_alloc, "product of DFE stream MSEs"),
        NamedObjective("dfe-sum-mse", Schur.MUL_CONVEX, lambda d: float(np.sum(d)),
                       _capacity_alloc, "sum of DFE stream MSEs"),
    ]
    return {e.name: e for e in entries}


_REGISTRY = _registry()


def named_scalar_objectives() -> dict[str, NamedObjective]:
    return dict(_REGISTRY)


def get_objective(name: str) -> NamedObjective:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownObjective(f"unknown objective {name!r}; known: {', '.join(_REGISTRY)}") from None


def design(spec: ProblemSpec, objective: str = "sum-mse",
           mode: BoundMode = BoundMode.LOWER) -> PrecoderSolution:
    """Closed-form design for a named objective: structure, allocation and inner rotation."""
    obj = get_objective(objective)
    sol = solve_allocated(spec, mode, obj.allocate)
    m = effective_snr_matrix(sol.f_opt, spec)
    q = optimal_q(obj.case(), m).q
    return dataclasses.replace(sol, q_opt=q)
