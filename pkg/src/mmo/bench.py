"""Reference designs: alternating robust LMMSE descent and the perfect-CSI baseline.

The alternating benchmark minimizes the exact average sum MSE

    MSE(F, G) = Tr[(G^H H F - I)(G^H H F - I)^H] + Tr[G^H K_F G]

with K_F = Tr(F F^H Psi) Sigma + s2 I, by exact coordinate steps:

* receiver:  G = (H F F^H H^H + K_F)^{-1} H F
* precoder:  F = (H^H G G^H H + Tr(G^H Sigma G) Psi + lam I)^{-1} H^H G,
  with lam >= 0 the smallest value meeting Tr(F F^H) <= P.

Each step solves its convex subproblem exactly, so the objective never
increases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BoundMode, PrecoderSolution, ProblemSpec, effective_snr_matrix, noise_covariance
from .linalg import herm_eig

__all__ = [
    "IterConfig", "IterResult", "NotSupported", "iterative_lmmse", "true_sum_mse",
    "non_robust_spec", "non_robust_baseline", "closed_form_op_tally",
]


class NotSupported(ValueError):
    pass


@dataclass(frozen=True)
class IterConfig:
    max_iters: int = 100
    tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class IterResult:
    f: np.ndarray
    g: np.ndarray
    trace: np.ndarray  # sum MSE after initialization and after every iteration
    iterations: int
    converged: bool


def true_sum_mse(f: np.ndarray, spec: ProblemSpec, h: Optional[np.ndarray] = None) -> float:
    """Average sum MSE with the LMMSE receiver: Tr[(I + F^H H^H K_F^{-1} H F)^{-1}]."""
    m = effective_snr_matrix(f, spec, h)
    return float(np.real(np.trace(np.linalg.inv(m + np.eye(m.shape[0])))))


def _receiver(f: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    hf = spec.h @ f
    k = noise_covariance(f, spec.psi, spec.sigma, spec.noise_var)
    return np.linalg.solve(hf @ hf.conj().T + k, hf)


def _precoder(g: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    hg = spec.h.conj().T @ g
    t = np.real(np.trace(g.conj().T @ spec.sigma @ g))
    a = hg @ hg.conj().T + t * spec.psi
    e = herm_eig(0.5 * (a + a.conj().T), "descending")
    d = np.clip(e.eigenvalues, 0.0, None)
    c = e.eigenvectors.conj().T @ hg
    c2 = np.real(np.sum(np.abs(c) ** 2, axis=1))
    p = spec.power

    def power(lam):
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.sum(np.where(c2 > 0, c2 / (d + lam) ** 2, 0.0)))

    floor = 1e-12 * max(d[0], 1e-300)
    if d[-1] > floor and power(0.0) <= p:
        lam = 0.0
    else:
        lo, hi = 0.0, np.sqrt(c2.sum() / p)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if power(mid) > p:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-14 * hi:
                break
        lam = hi
    return e.eigenvectors @ (c / (d + lam)[:, None])


def _random_init(spec: ProblemSpec, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    shape = (spec.n_t, spec.n_streams)
    f = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return f * np.sqrt(spec.power / np.real(np.vdot(f, f)))


def iterative_lmmse(spec: ProblemSpec, cfg: IterConfig = IterConfig(),
                    init: Optional[np.ndarray] = None) -> IterResult:
    """Alternating robust LMMSE descent on the sum MSE.

    Stops once the relative decrease of the objective falls below
    ``cfg.tol`` or after ``cfg.max_iters`` precoder/receiver sweeps.
    """
    if spec.objective not in (None, "sum-mse"):
        raise NotSupported("the alternating benchmark only handles the sum MSE")
    f = _random_init(spec, cfg.seed) if init is None else np.asarray(init, dtype=complex)
    trace = [true_sum_mse(f, spec)]
    g = _receiver(f, spec)
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        f = _precoder(g, spec)
        g = _receiver(f, spec)
        trace.append(true_sum_mse(f, spec))
        if abs(trace[-2] - trace[-1]) <= cfg.tol * abs(trace[-2]):
            converged = True
            break
    return IterResult(f=f, g=g, trace=np.array(trace), iterations=it, converged=converged)


def non_robust_spec(spec: ProblemSpec) -> ProblemSpec:
    """The same instance with the estimate treated as the true channel (Psi = 0, Sigma = I)."""
    return ProblemSpec(h=spec.h, psi=np.zeros_like(spec.psi), sigma=np.eye(spec.n_r),
                       noise_var=spec.noise_var, power=spec.power,
                       objective=spec.objective, n_streams=spec.n_streams)


def non_robust_baseline(spec: ProblemSpec, objective: str = "sum-mse") -> PrecoderSolution:
    """Perfect-CSI design on the estimate; evaluate it under the true error statistics."""
    from .objectives import design
    return design(non_robust_spec(spec), objective, BoundMode.EXACT)


# Matrix operations of the closed-form path (inverse, multiplication,
# decomposition). Water-filling and scalar work are not counted.
_CLOSED_FORM_STEPS = (
    ("decomposition", "eigenvalues of Sigma for alpha"),
    ("decomposition", "largest eigenvalue of Psi"),
    ("decomposition", "inverse square root of alpha P Psi + s2 I"),
    ("decomposition", "inverse square root of K_Psi"),
    ("multiplication", "K_Psi^{-1/2} H"),
    ("multiplication", "(K_Psi^{-1/2} H) (alpha P Psi + s2 I)^{-1/2}"),
    ("decomposition", "SVD of Pi"),
    ("multiplication", "V_Pi Lambda_F"),
    ("multiplication", "whitening times V_Pi Lambda_F"),
    ("multiplication", "whitening squared for eta"),
    ("multiplication", "trace product for eta"),
)


def closed_form_op_tally() -> dict[str, int]:
    """Count of dense matrix operations on the closed-form path, by kind."""
    tally: dict[str, int] = {}
    for kind, _ in _CLOSED_FORM_STEPS:
        tally[kind] = tally.get(kind, 0) + 1
    tally["total"] = len(_CLOSED_FORM_STEPS)
    return tally
