"""Multi-variable designs: serial relay chains and parallel carriers.

Serial chain
------------
Hop k carries T_k = K_{F_k}^{-1/2} H_k F_k and its whitened form

    M_k = (T_k T_k^H + I)^{-1/2} T_k,

whose singular values lie in [0, 1). With inner rotations Q_k the chain
product is C = M_K Q_K ... M_1 Q_1 and the destination MSE matrix is
E = I - C^H C. Rotations Q_k = V_{M_k} U_{M_{k-1}}^H (k >= 2) line up the
singular bases so the singular values of C are the products of the
per-hop singular values; Q_1 then shapes E (diagonal, equal diagonal, or
equal Cholesky diagonal) according to the objective's Schur type.

Each hop is designed on its own with the single-hop solver, as the
structure decouples across hops. Dimensions: M_k is N_{R,k} x N_k, and
Q_k is N_k x N_k with N_k = N_{R,k-1} for k >= 2.

Parallel carriers
-----------------
Carriers share one power budget. The eigenmode gains of all carriers are
water-filled jointly with a single level, and each carrier keeps its own
single-hop structure.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cases import Schur
from .core import (
    AllGainsZero, BoundMode, EigenmodeBasis, PrecoderSolution, ProblemSpec, assemble,
    effective_snr_matrix, noise_covariance, reduce_to_mmop, solve, solve_allocated,
)
from .linalg import DimensionMismatch, psd_inv_sqrt, svd
from .objectives import get_objective
from .unitary import dft_matrix, equal_diag_cholesky_rotation, optimal_q

__all__ = [
    "Topology", "MultiHopSpec", "HopSolution", "whitened_composite", "solve_hop",
    "chain_rotations", "chain_product", "chain_mse", "sv_product_check", "solve_serial",
    "evaluate_serial", "ChainMetrics", "solve_parallel",
]


class Topology(enum.Enum):
    SERIAL = "serial"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class MultiHopSpec:
    hops: tuple
    topology: Topology = Topology.SERIAL
    total_power: Optional[float] = None

    def __post_init__(self):
        hops = tuple(self.hops)
        if not hops:
            raise ValueError("at least one hop is required")
        object.__setattr__(self, "hops", hops)
        if self.topology is Topology.SERIAL:
            for k in range(1, len(hops)):
                if hops[k].n_streams != hops[k - 1].n_r:
                    raise DimensionMismatch(
                        f"hop {k + 1} forwards {hops[k].n_streams} streams but hop {k} delivers {hops[k - 1].n_r}")
        else:
            if self.total_power is None or not self.total_power > 0:
                raise ValueError("parallel topology needs a positive total_power")


@dataclass(frozen=True)
class HopSolution:
    f_k: np.ndarray
    q_k: np.ndarray
    eta_fk: float
    basis_k: EigenmodeBasis
    m_k: np.ndarray
    solution: PrecoderSolution


def whitened_composite(f: np.ndarray, spec: ProblemSpec, h: Optional[np.ndarray] = None) -> np.ndarray:
    """M = (T T^H + I)^{-1/2} T with T = K_F^{-1/2} H F."""
    h = spec.h if h is None else h
    k = noise_covariance(f, spec.psi, spec.sigma, spec.noise_var)
    t = psd_inv_sqrt(k) @ h @ f
    return psd_inv_sqrt(t @ t.conj().T + np.eye(t.shape[0])) @ t


def _hop_from(sol: PrecoderSolution, spec: ProblemSpec) -> HopSolution:
    return HopSolution(f_k=sol.f_opt, q_k=sol.q_opt, eta_fk=sol.eta_f, basis_k=sol.basis,
                       m_k=whitened_composite(sol.f_opt, spec), solution=sol)


def solve_hop(hop: ProblemSpec, mode: BoundMode = BoundMode.LOWER, weights=None,
              allocate=None) -> HopSolution:
    """Single-hop structured design; inner rotation left at identity."""
    if allocate is None:
        sol = solve(hop, mode, weights)
    else:
        sol = solve_allocated(hop, mode, allocate)
    return _hop_from(sol, hop)


def chain_rotations(ms: Sequence[np.ndarray], schur: Schur) -> list[np.ndarray]:
    """Rotations Q_1..Q_K for whitened composites M_1..M_K (hop order)."""
    ms = [np.asarray(m, dtype=complex) for m in ms]
    for k in range(1, len(ms)):
        if ms[k].shape[1] != ms[k - 1].shape[0]:
            raise DimensionMismatch(f"M_{k + 1} has {ms[k].shape[1]} columns, M_{k} has {ms[k - 1].shape[0]} rows")
    svds = [svd(m) for m in ms]
    qs = [None] * len(ms)
    for k in range(1, len(ms)):
        qs[k] = svds[k].V @ svds[k - 1].U.conj().T
    v1 = svds[0].V
    n = v1.shape[0]
    if schur in (Schur.ADD_CONVEX,):
        qs[0] = v1 @ dft_matrix(n).conj().T
    elif schur is Schur.MUL_CONVEX:
        s = np.ones(n)
        for d in svds:
            sv = np.zeros(n)
            k = min(n, len(d.singular_values))
            sv[:k] = d.singular_values[:k]
            s *= sv
        qs[0] = v1 @ equal_diag_cholesky_rotation(np.diag(1.0 - s ** 2)).q
    else:
        qs[0] = v1
    return qs


def chain_product(ms: Sequence[np.ndarray], qs: Sequence[np.ndarray]) -> np.ndarray:
    """C = M_K Q_K ... M_1 Q_1."""
    c = ms[0] @ qs[0]
    for m, q in zip(ms[1:], qs[1:]):
        c = m @ q @ c
    return c


def chain_mse(ms: Sequence[np.ndarray], qs: Sequence[np.ndarray]) -> np.ndarray:
    c = chain_product(ms, qs)
    e = np.eye(c.shape[1]) - c.conj().T @ c
    return 0.5 * (e + e.conj().T)


def sv_product_check(mats: Sequence[np.ndarray], rtol: float = 1e-9) -> bool:
    """Leading singular-value products of A_1...A_K never exceed the per-factor products."""
    mats = [np.asarray(a, dtype=complex) for a in mats]
    for i in range(1, len(mats)):
        if mats[i - 1].shape[1] != mats[i].shape[0]:
            raise DimensionMismatch("factors do not conform")
    prod = mats[0]
    for a in mats[1:]:
        prod = prod @ a
    dim = min(min(a.shape) for a in mats)
    lhs = np.cumprod(np.linalg.svd(prod, compute_uv=False)[:dim])
    rhs = np.ones(dim)
    for a in mats:
        rhs = rhs * np.linalg.svd(a, compute_uv=False)[:dim]
    rhs = np.cumprod(rhs)
    return bool(np.all(lhs <= rhs * (1.0 + rtol) + 1e-300))


def solve_serial(spec: MultiHopSpec, objective: str = "capacity",
                 mode: BoundMode = BoundMode.LOWER) -> list[HopSolution]:
    """Per-hop structured designs plus the chain rotations for a named objective."""
    if spec.topology is not Topology.SERIAL:
        raise ValueError("solve_serial needs a serial topology")
    obj = get_objective(objective)
    hops = [solve_hop(h, mode, allocate=obj.allocate) for h in spec.hops]
    qs = chain_rotations([h.m_k for h in hops], obj.schur)
    return [dataclasses.replace(h, q_k=q, solution=dataclasses.replace(h.solution, q_opt=q))
            for h, q in zip(hops, qs)]


@dataclass(frozen=True)
class ChainMetrics:
    capacity_nats: float
    max_mse: float
    sum_mse: float
    mse_matrix: np.ndarray


def evaluate_serial(hops: Sequence[HopSolution], truth: Sequence[ProblemSpec]) -> ChainMetrics:
    """Chain metrics of designed precoders/rotations under the given per-hop statistics."""
    ms = [whitened_composite(h.f_k, t) for h, t in zip(hops, truth)]
    e = chain_mse(ms, [h.q_k for h in hops])
    w = np.linalg.eigvalsh(e)
    return ChainMetrics(
        capacity_nats=float(-np.sum(np.log(np.clip(w, 1e-300, None)))),
        max_mse=float(np.max(np.real(np.diag(e)))),
        sum_mse=float(np.real(np.trace(e))),
        mse_matrix=e,
    )


def solve_parallel(spec: MultiHopSpec, objective: str = "capacity",
                   mode: BoundMode = BoundMode.LOWER, max_rounds: int = 20,
                   tol: float = 1e-10) -> list[HopSolution]:
    """Joint single-level allocation across carriers sharing ``spec.total_power``.

    Each carrier's eigenmode basis depends on the power it ends up with, so
    the split is refined by a fixed-point pass starting from an equal split.
    """
    if spec.topology is not Topology.PARALLEL:
        raise ValueError("solve_parallel needs a parallel topology")
    obj = get_objective(objective)
    carriers = spec.hops
    p_total = float(spec.total_power)
    split = np.full(len(carriers), p_total / len(carriers))
    for _ in range(max_rounds):
        bases = [reduce_to_mmop(dataclasses.replace(c, power=p if p > 0 else p_total / len(carriers)), mode)
                 for c, p in zip(carriers, split)]
        gains = [b.gains[: c.n_modes] for b, c in zip(bases, carriers)]
        flat = np.concatenate(gains)
        if not np.any(flat > 0):
            raise AllGainsZero("every carrier has a zero channel")
        order = np.argsort(-flat, kind="stable")
        f_sorted = np.asarray(obj.allocate(flat[order], p_total), dtype=float)
        f_flat = np.empty_like(flat)
        f_flat[order] = f_sorted
        pieces = np.split(f_flat, np.cumsum([len(g) for g in gains])[:-1])
        new_split = np.array([p.sum() for p in pieces])
        done = np.max(np.abs(new_split - split)) <= tol * p_total
        split = new_split
        if done:
            break
    out = []
    for c, b, f_sq, p in zip(carriers, bases, pieces, split):
        if p > 0:
            cs = dataclasses.replace(c, power=float(p))
            sol = assemble(cs, b, f_sq, mode)
            m = effective_snr_matrix(sol.f_opt, cs)
            sol = dataclasses.replace(sol, q_opt=optimal_q(obj.case(), m).q)
        else:
            cs = c
            sol = assemble(c, b, np.zeros_like(f_sq), mode)
        out.append(_hop_from(sol, cs))
    return out
