"""Kronecker-correlated channel estimates and estimation errors.

Coloring convention: an N_R x N_T matrix with row covariance Sigma
(receive side) and column covariance Psi (transmit side) is drawn as
``Sigma^{1/2} W Psi^{1/2}`` with W i.i.d. CN(0, 1). Then
E{[D]_ij [D]_kl^*} = [Sigma]_ik [Psi]_jl and
E{D A D^H} = Tr(A Psi) Sigma, which is the effective-noise term used by the
designs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import psd_sqrt

__all__ = [
    "ExpCorrModel", "ChannelDraw", "exp_correlation", "build_correlations",
    "sample_channel", "sample_hops", "db_to_linear", "linear_to_db",
]


@dataclass(frozen=True)
class ExpCorrModel:
    alpha_t: float = 0.45
    beta_r: float = 0.45
    sigma_e2: float = 0.001
    n_t: int = 4
    n_r: int = 4

    def __post_init__(self):
        if not 0.0 <= self.alpha_t < 1.0:
            raise ValueError(f"alpha_t must lie in [0, 1), got {self.alpha_t}")
        if not 0.0 <= self.beta_r < 1.0:
            raise ValueError(f"beta_r must lie in [0, 1), got {self.beta_r}")
        if not 0.0 < self.sigma_e2 < 1.0:
            raise ValueError(f"sigma_e2 must lie in (0, 1), got {self.sigma_e2}")
        if self.n_t < 1 or self.n_r < 1:
            raise ValueError("antenna counts must be positive")


@dataclass(frozen=True)
class ChannelDraw:
    h_bar: np.ndarray
    delta_h: np.ndarray
    h: np.ndarray


def exp_correlation(n: int, rho: float, scale: float = 1.0) -> np.ndarray:
    idx = np.arange(n)
    # 0**0 == 1 keeps the diagonal at `scale` when rho == 0
    return scale * np.power(float(rho), np.abs(idx[:, None] - idx[None, :])).astype(complex)


def build_correlations(model: ExpCorrModel) -> tuple[np.ndarray, np.ndarray]:
    """Return (Psi, Sigma): transmit-side error correlation and receive-side correlation."""
    psi = exp_correlation(model.n_t, model.alpha_t, model.sigma_e2)
    sigma = exp_correlation(model.n_r, model.beta_r)
    return psi, sigma


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_channel(model: ExpCorrModel, rng_seed: int) -> ChannelDraw:
    """Draw (H_bar, Delta_H, H) deterministically from ``rng_seed``.

    H_bar and Delta_H come from independent child streams of one
    SeedSequence, so they are independent and reproducible.
    """
    psi, sigma = build_correlations(model)
    r_half = psd_sqrt(sigma)
    t_half = psd_sqrt(psi)
    est_stream, err_stream = (np.random.default_rng(s)
                              for s in np.random.SeedSequence(rng_seed).spawn(2))
    shape = (model.n_r, model.n_t)
    delta_h = r_half @ _cn(err_stream, shape) @ t_half
    scale = np.sqrt((1.0 - model.sigma_e2) / model.sigma_e2)
    h_bar = scale * (r_half @ _cn(est_stream, shape) @ t_half)
    return ChannelDraw(h_bar=h_bar, delta_h=delta_h, h=h_bar + delta_h)


def sample_hops(model: ExpCorrModel, n_hops: int, rng_seed: int) -> list[ChannelDraw]:
    """Independent draws for a chain of hops sharing one correlation model."""
    seeds = np.random.SeedSequence(rng_seed).generate_state(n_hops)
    return [sample_channel(model, int(s)) for s in seeds]


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))
