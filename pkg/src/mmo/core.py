"""Single-variable matrix-monotonic precoder design.

The robust design problem

    maximize  F^H H^H K_F^{-1} H F   (Loewner order)
    s.t.      K_F = Tr(F F^H Psi) Sigma + s2 I,   Tr(F F^H) <= P

is reduced to maximizing F~^H Pi^H Pi F~ under Tr(F~ F~^H) = P, where

    K_Psi = (P l_max(Psi) Sigma + s2 I) / (P l_max(Psi) alpha + s2)
    Pi    = K_Psi^{-1/2} H (alpha P Psi + s2 I)^{-1/2}

and alpha is lambda_min(Sigma) (exact when Psi or Sigma is a scaled identity,
a lower bound otherwise) or lambda_max(Sigma) (an upper bound). Every Pareto
optimal precoder then has the form

    F = sqrt(eta) (alpha P Psi + s2 I)^{-1/2} V_Pi Lambda_F
    eta = P / Tr[(alpha P Psi + s2 I)^{-1} V_Pi Lambda_F Lambda_F^H V_Pi^H]

and only the diagonal Lambda_F is left to pick, by water-filling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linalg import hermitian_part, herm_eig, psd_inv_sqrt, svd, DimensionMismatch, NotPSD

__all__ = [
    "BoundMode", "ProblemSpec", "EigenmodeBasis", "PrecoderSolution",
    "ExactModeUnavailable", "WeightOrderViolation", "AllGainsZero",
    "InfeasibleTarget", "TooLarge", "is_scaled_identity", "reduce_to_mmop",
    "waterfill", "capacity_waterfill", "assemble", "solve", "solve_allocated",
    "solve_qos", "effective_snr_matrix", "noise_covariance", "pareto_oracle",
    "non_dominated", "dominated_by",
]

ZERO_GAIN_RTOL = 1e-12


class ExactModeUnavailable(ValueError):
    pass


class WeightOrderViolation(ValueError):
    pass


class AllGainsZero(ValueError):
    pass


class InfeasibleTarget(ValueError):
    pass


class TooLarge(ValueError):
    pass


class BoundMode(enum.Enum):
    EXACT = "exact"
    LOWER = "lower"
    UPPER = "upper"

    @classmethod
    def parse(cls, name: str) -> "BoundMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown bound mode {name!r}; expected exact, lower or upper") from None


def is_scaled_identity(m: np.ndarray, rtol: float = 1e-9) -> bool:
    m = np.asarray(m)
    n = m.shape[0]
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return True
    c = np.trace(m) / n
    return bool(np.linalg.norm(m - c * np.eye(n)) <= rtol * scale)


@dataclass(frozen=True)
class ProblemSpec:
    """One single-hop design instance.

    ``h`` is the channel the transmitter designs for (the estimate H_bar in
    the robust setting), ``psi``/``sigma`` the transmit/receive error
    correlations. ``n_streams`` defaults to min(N_T, N_R).
    """

    h: np.ndarray
    psi: np.ndarray
    sigma: np.ndarray
    noise_var: float
    power: float
    objective: Optional[object] = None
    n_streams: Optional[int] = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.ndim != 2:
            raise DimensionMismatch("h must be a matrix")
        n_r, n_t = h.shape
        psi = hermitian_part(self.psi)
        sigma = hermitian_part(self.sigma)
        if psi.shape != (n_t, n_t):
            raise DimensionMismatch(f"psi must be {n_t}x{n_t}, got {psi.shape}")
        if sigma.shape != (n_r, n_r):
            raise DimensionMismatch(f"sigma must be {n_r}x{n_r}, got {sigma.shape}")
        for name, m in (("psi", psi), ("sigma", sigma)):
            w = np.linalg.eigvalsh(m)
            if w[0] < -1e-8 * max(w[-1], 1e-14):
                raise NotPSD(f"{name} is not positive semi-definite")
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")
        if not self.power > 0:
            raise ValueError("power must be positive")
        n = self.n_streams if self.n_streams is not None else min(n_t, n_r)
        if not 1 <= n <= n_t:
            raise DimensionMismatch(f"n_streams must lie in [1, {n_t}], got {n}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "noise_var", float(self.noise_var))
        object.__setattr__(self, "power", float(self.power))
        object.__setattr__(self, "n_streams", int(n))

    @property
    def n_t(self) -> int:
        return self.h.shape[1]

    @property
    def n_r(self) -> int:
        return self.h.shape[0]

    @property
    def n_modes(self) -> int:
        """Number of eigenmodes power can be placed on."""
        return min(self.n_streams, self.n_t, self.n_r)

    def exact_available(self) -> bool:
        return is_scaled_identity(self.psi) or is_scaled_identity(self.sigma)


@dataclass(frozen=True)
class EigenmodeBasis:
    u_pi: np.ndarray
    lambda_pi: np.ndarray  # descending singular values of Pi
    v_pi: np.ndarray
    k_psi: np.ndarray
    alpha: float
    pi: np.ndarray
    whitening: np.ndarray  # (alpha P Psi + s2 I)^{-1/2}
    power: float
    noise_var: float

    @property
    def gains(self) -> np.ndarray:
        """Squared singular values lambda_Pi,n^2 (descending)."""
        return self.lambda_pi ** 2


@dataclass(frozen=True)
class PrecoderSolution:
    f_opt: np.ndarray
    lambda_f: np.ndarray
    eta_f: float
    q_opt: np.ndarray
    mode: BoundMode
    basis: EigenmodeBasis

    @property
    def f_sq(self) -> np.ndarray:
        return self.lambda_f ** 2

    @property
    def x(self) -> np.ndarray:
        """The final design X = F Q."""
        return self.f_opt @ self.q_opt

    @property
    def bound_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of F~^H Pi^H Pi F~: lambda_Pi,n^2 f_n^2 (non-increasing)."""
        g = self.basis.gains[: len(self.lambda_f)]
        return g * self.f_sq


def noise_covariance(f: np.ndarray, psi: np.ndarray, sigma: np.ndarray, noise_var: float) -> np.ndarray:
    """K_F = Tr(F F^H Psi) Sigma + s2 I."""
    t = np.real(np.trace(f.conj().T @ psi @ f))
    return t * sigma + noise_var * np.eye(sigma.shape[0])


def effective_snr_matrix(f: np.ndarray, spec: ProblemSpec, h: Optional[np.ndarray] = None) -> np.ndarray:
    """F^H H^H K_F^{-1} H F for the spec's error statistics."""
    h = spec.h if h is None else h
    k = noise_covariance(f, spec.psi, spec.sigma, spec.noise_var)
    hf = h @ f
    m = hf.conj().T @ np.linalg.solve(k, hf)
    return 0.5 * (m + m.conj().T)


def reduce_to_mmop(spec: ProblemSpec, mode: BoundMode = BoundMode.LOWER) -> EigenmodeBasis:
    if mode is BoundMode.EXACT and not spec.exact_available():
        raise ExactModeUnavailable("exact mode needs Psi or Sigma proportional to the identity")
    sig_w = np.linalg.eigvalsh(spec.sigma)
    alpha = float(sig_w[-1] if mode is BoundMode.UPPER else sig_w[0])
    alpha = max(alpha, 0.0)
    p, s2 = spec.power, spec.noise_var
    psi_max = max(float(np.linalg.eigvalsh(spec.psi)[-1]), 0.0)
    denom = p * psi_max * alpha + s2
    k_psi = (p * psi_max * spec.sigma + s2 * np.eye(spec.n_r)) / denom
    whitening = psd_inv_sqrt(alpha * p * spec.psi + s2 * np.eye(spec.n_t))
    pi = psd_inv_sqrt(k_psi) @ spec.h @ whitening
    d = svd(pi)
    return EigenmodeBasis(
        u_pi=d.U, lambda_pi=d.singular_values, v_pi=d.V, k_psi=k_psi, alpha=alpha,
        pi=pi, whitening=whitening, power=p, noise_var=s2,
    )


def _active_gains(gains: np.ndarray) -> np.ndarray:
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or len(g) == 0:
        raise ValueError("gains must be a non-empty vector")
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError("gains must be finite and nonnegative")
    if np.any(np.diff(g) > 1e-12 * max(g[0], 1e-300)):
        raise ValueError("gains must be non-increasing")
    if g[0] <= 0:
        raise AllGainsZero("every gain is zero")
    return g > ZERO_GAIN_RTOL * g[0]


def check_weight_order(gains, weights, rtol: float = 1e-12) -> None:
    """Require sqrt(w_n g_n) to be non-increasing."""
    r = np.sqrt(np.asarray(weights, float) * np.asarray(gains, float))
    if np.any(np.diff(r) > rtol * max(r.max(initial=0.0), 1e-300)):
        raise WeightOrderViolation("sqrt(w_n * gain_n) must be non-increasing in n")


def _bisect_level(total: Callable[[float], float], power: float, hi: float) -> float:
    """Find mu with total(mu) == power; total is strictly decreasing where positive."""
    lo = hi
    while total(lo) < power:
        lo *= 0.5
    for _ in range(2000):
        mid = np.sqrt(lo * hi)
        if total(mid) >= power:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 <= 1e-12:
            break
    return np.sqrt(lo * hi)


def waterfill(gains, weights, power: float) -> tuple[np.ndarray, float]:
    """Weighted MSE water-filling.

    Minimizes sum_n w_n / (g_n f_n^2 + 1) subject to sum_n f_n^2 = P, giving
    f_n^2 = (sqrt(w_n / (g_n mu)) - 1/g_n)^+. Returns (f_sq, mu).
    """
    g = np.asarray(gains, dtype=float)
    active = _active_gains(g)
    w = np.asarray(weights, dtype=float)
    if w.shape != g.shape:
        raise DimensionMismatch(f"weights shape {w.shape} != gains shape {g.shape}")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be positive")
    if not power > 0:
        raise ValueError("power must be positive")
    check_weight_order(g, w)
    ga, wa = g[active], w[active]

    def total(mu):
        return np.sum(np.maximum(np.sqrt(wa / (ga * mu)) - 1.0 / ga, 0.0))

    mu = _bisect_level(total, power, float(np.max(wa * ga)))
    # polish: closed form on the active set the bisection identified
    on = wa * ga > mu
    if np.any(on):
        s = (power + np.sum(1.0 / ga[on])) / np.sum(np.sqrt(wa[on] / ga[on]))
        mu = 1.0 / s ** 2
    fa = np.maximum(np.sqrt(wa / (ga * mu)) - 1.0 / ga, 0.0)
    fa *= power / fa.sum()
    f_sq = np.zeros_like(g)
    f_sq[active] = fa
    return f_sq, float(mu)


def capacity_waterfill(gains, power: float) -> tuple[np.ndarray, float]:
    """Classic water-filling f_n^2 = (nu - 1/g_n)^+, maximizing sum log(1 + g f^2).

    Returns (f_sq, nu) with nu the water level.
    """
    g = np.asarray(gains, dtype=float)
    active = _active_gains(g)
    if not power > 0:
        raise ValueError("power must be positive")
    ga = g[active]

    def total(mu):  # mu = 1/nu, so total is decreasing in mu
        return np.sum(np.maximum(1.0 / mu - 1.0 / ga, 0.0))

    mu = _bisect_level(total, power, float(ga.max()))
    on = ga > mu
    if np.any(on):
        nu = (power + np.sum(1.0 / ga[on])) / np.count_nonzero(on)
    else:
        nu = 1.0 / mu
    fa = np.maximum(nu - 1.0 / ga, 0.0)
    fa *= power / fa.sum()
    f_sq = np.zeros_like(g)
    f_sq[active] = fa
    return f_sq, float(nu)


def _structured_precoder(whitening: np.ndarray, v_pi: np.ndarray, f_sq: np.ndarray,
                         n_streams: int, noise_var: float) -> tuple[np.ndarray, float, np.ndarray]:
    n_t = v_pi.shape[0]
    lam_f = np.sqrt(np.maximum(f_sq, 0.0))
    lam_mat = np.zeros((n_t, n_streams))
    k = min(len(lam_f), n_streams, n_t)
    lam_mat[np.arange(k), np.arange(k)] = lam_f[:k]
    f_tilde = v_pi @ lam_mat
    total = float(np.sum(lam_f[:k] ** 2))
    if total == 0.0:
        return np.zeros((n_t, n_streams), dtype=complex), noise_var, lam_f
    denom = np.real(np.trace(whitening @ whitening @ f_tilde @ f_tilde.conj().T))
    eta = total / denom
    return np.sqrt(eta) * whitening @ f_tilde, float(eta), lam_f


def assemble(spec: ProblemSpec, basis: EigenmodeBasis, f_sq, mode: BoundMode) -> PrecoderSolution:
    """Build the structured precoder for a given power allocation over the eigenmodes."""
    f_sq = np.asarray(f_sq, dtype=float)
    f, eta, lam_f = _structured_precoder(basis.whitening, basis.v_pi, f_sq,
                                         spec.n_streams, spec.noise_var)
    return PrecoderSolution(
        f_opt=f, lambda_f=lam_f, eta_f=eta, q_opt=np.eye(spec.n_streams, dtype=complex),
        mode=mode, basis=basis,
    )


def solve_allocated(spec: ProblemSpec, mode: BoundMode,
                    allocate: Callable[[np.ndarray, float], np.ndarray]) -> PrecoderSolution:
    """Design with a caller-chosen allocation rule ``allocate(gains, power) -> f_sq``."""
    basis = reduce_to_mmop(spec, mode)
    gains = basis.gains[: spec.n_modes]
    f_sq = np.asarray(allocate(gains, spec.power), dtype=float)
    return assemble(spec, basis, f_sq, mode)


def solve(spec: ProblemSpec, mode: BoundMode = BoundMode.LOWER, weights=None) -> PrecoderSolution:
    """Pareto-optimal precoder for one weight vector (equal weights by default)."""
    basis = reduce_to_mmop(spec, mode)
    gains = basis.gains[: spec.n_modes]
    w = np.ones_like(gains) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != gains.shape:
        raise DimensionMismatch(f"expected {len(gains)} weights, got {w.shape}")
    f_sq, _ = waterfill(gains, w, spec.power)
    return assemble(spec, basis, f_sq, mode)


def solve_qos(basis: EigenmodeBasis, targets, psi: np.ndarray, noise_var: float,
              alpha: float, n_streams: Optional[int] = None,
              mode: BoundMode = BoundMode.LOWER) -> PrecoderSolution:
    """Minimum-power precoder whose F~^H Pi^H Pi F~ has the target spectrum.

    The allocation is f_n^2 = t_n / lambda_Pi,n^2; the precoder keeps the
    same structure with the whitening rebuilt for the resulting power.
    """
    t = np.asarray(targets, dtype=float)
    if np.any(t < 0) or np.any(np.diff(t) > 0):
        raise ValueError("targets must be nonnegative and non-increasing")
    lam = basis.lambda_pi
    if len(t) > len(lam):
        raise DimensionMismatch("more targets than eigenmodes")
    g = lam[: len(t)] ** 2
    zero = g <= ZERO_GAIN_RTOL * max(g.max(initial=0.0), 1e-300)
    if np.any(zero & (t > 0)):
        raise InfeasibleTarget("positive target on a zero-gain eigenmode")
    f_sq = np.where(zero, 0.0, t / np.where(zero, 1.0, g))
    p_qos = float(f_sq.sum())
    n_t = basis.v_pi.shape[0]
    n_streams = len(t) if n_streams is None else n_streams
    psi = hermitian_part(psi)
    whitening = psd_inv_sqrt(alpha * p_qos * psi + noise_var * np.eye(n_t))
    f, eta, lam_f = _structured_precoder(whitening, basis.v_pi, f_sq, n_streams, noise_var)
    qbasis = EigenmodeBasis(
        u_pi=basis.u_pi, lambda_pi=basis.lambda_pi, v_pi=basis.v_pi, k_psi=basis.k_psi,
        alpha=alpha, pi=basis.pi, whitening=whitening, power=p_qos, noise_var=noise_var,
    )
    return PrecoderSolution(f_opt=f, lambda_f=lam_f, eta_f=eta,
                            q_opt=np.eye(n_streams, dtype=complex), mode=mode, basis=qbasis)


def _simplex_lattice(n: int, grid: int) -> np.ndarray:
    steps = grid - 1
    if n == 1:
        return np.array([[steps]])
    axes = np.meshgrid(*[np.arange(grid)] * n, indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=1)
    return pts[pts.sum(axis=1) <= steps]


def pareto_oracle(spec: ProblemSpec, mode: BoundMode = BoundMode.EXACT,
                  grid: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force enumeration of power allocations over the structured eigenmodes.

    Every lattice point f^2 on {f >= 0, sum f^2 <= P} (``grid`` levels per
    axis) is turned into a precoder with the V_Pi rotation and its true
    eigenvalue vector lambda(F^H H^H K_F^{-1} H F) is computed.

    Returns (allocations, eigenvalues), the latter sorted descending per row.
    """
    n = spec.n_modes
    if n > 3:
        raise TooLarge(f"oracle supports at most 3 modes, instance has {n}")
    if grid < 2 or grid > 200:
        raise TooLarge("grid must lie in [2, 200]")
    basis = reduce_to_mmop(spec, mode)
    p = spec.power
    alloc = _simplex_lattice(n, grid) * (p / (grid - 1))
    alloc = alloc[alloc.sum(axis=1) > 0]
    n_t = spec.n_t
    b = basis.whitening @ basis.v_pi[:, :n]  # N_T x n
    # F_b = c_b * B diag(f_b), c_b fixed by Tr(F F^H) = sum f_b^2
    w2 = np.real(np.einsum("ij,ij->j", b.conj(), b))  # column energies of B
    f = np.sqrt(alloc)
    c2 = alloc.sum(axis=1) / (alloc @ w2)
    fb = np.sqrt(c2)[:, None, None] * b[None, :, :] * f[:, None, :]  # (B, N_T, n)
    t = np.real(np.einsum("bin,ij,bjn->b", fb.conj(), spec.psi, fb))
    k = t[:, None, None] * spec.sigma[None] + spec.noise_var * np.eye(spec.n_r)[None]
    hf = spec.h[None] @ fb
    m = np.conj(np.swapaxes(hf, 1, 2)) @ np.linalg.solve(k, hf)
    m = 0.5 * (m + np.conj(np.swapaxes(m, 1, 2)))
    eig = np.linalg.eigvalsh(m)[:, ::-1]
    assert n_t >= n
    return alloc, eig


def dominated_by(point, candidates, tol: float = 0.0) -> np.ndarray:
    """Mask of candidates exceeding ``point`` by more than ``tol`` in every component."""
    c = np.asarray(candidates, float)
    return np.all(c > np.asarray(point, float)[None, :] + tol, axis=1)


def non_dominated(points, tol: float = 1e-12) -> np.ndarray:
    """Indices of points no other point weakly dominates (>= everywhere, > somewhere)."""
    pts = np.asarray(points, float)
    order = np.lexsort(pts.T[::-1])[::-1]  # descending by first coordinate
    keep: list[int] = []
    frontier = np.empty((0, pts.shape[1]))
    for i in order:
        p = pts[i]
        if len(frontier):
            ge = np.all(frontier >= p - tol, axis=1)
            gt = np.any(frontier > p + tol, axis=1)
            if np.any(ge & gt) or np.any(np.all(np.abs(frontier - p) <= tol, axis=1)):
                continue
        keep.append(i)
        frontier = np.vstack([frontier, p])
    return np.array(sorted(keep), dtype=int)
