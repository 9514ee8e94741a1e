"""Objective case descriptors shared by the unitary and objectives layers."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .linalg import hermitian_part, DimensionMismatch

__all__ = ["Schur", "ObjectiveCase", "NotApplicable"]


class NotApplicable(ValueError):
    """Case payload is missing or malformed."""


class Schur(enum.Enum):
    NONE = "none"
    ADD_CONCAVE = "additive-concave"
    ADD_CONVEX = "additive-convex"
    MUL_CONCAVE = "multiplicative-concave"
    MUL_CONVEX = "multiplicative-convex"

    @property
    def convex(self) -> bool:
        return self in (Schur.ADD_CONVEX, Schur.MUL_CONVEX)

    @property
    def multiplicative(self) -> bool:
        return self in (Schur.MUL_CONCAVE, Schur.MUL_CONVEX)


_PAYLOAD = {
    1: ("n_mat",),
    2: ("a_mat",),
    3: ("n_mat",),
    4: ("n_mat", "m_mat"),
    5: ("a_mat", "n_mat"),
    6: ("a_mat",),
    7: (),
    8: (),
}


def _check_pd(name: str, m: np.ndarray, strict: bool) -> np.ndarray:
    m = hermitian_part(m)
    w = np.linalg.eigvalsh(m)
    floor = 1e-12 * max(abs(w[-1]), 1e-14)
    if (strict and w[0] <= floor) or (not strict and w[0] < -1e-8 * max(w[-1], 1e-14)):
        raise NotApplicable(f"{name} must be positive {'definite' if strict else 'semi-definite'}")
    return m


@dataclass(frozen=True)
class ObjectiveCase:
    """One of the eight objective families, with its constant matrices.

    The objective is always written in minimization form as a function of
    the inner matrix T = Q^H M Q, with M = F^H H^H K_F^{-1} H F:

    1. -log|T + N|
    2. -log|A^H T A + I|
    3. Tr[(T + N)^{-1}]
    4. Tr[((T + N) kron M2)^{-1}]
    5. log|A^H (T + I)^{-1} A + N|
    6. Tr[A^H (T + I)^{-1} A]
    7. f(diag[(T + I)^{-1}])  with f additively Schur-concave or -convex
    8. f(diag(L)^2), (T + I)^{-1} = L L^H,  f multiplicatively Schur-concave or -convex
    """

    number: int
    n_mat: Optional[np.ndarray] = None
    a_mat: Optional[np.ndarray] = None
    m_mat: Optional[np.ndarray] = None
    schur: Schur = Schur.NONE
    scalar_fn: Optional[Callable[[np.ndarray], float]] = None
    label: str = ""

    def __post_init__(self):
        if self.number not in _PAYLOAD:
            raise NotApplicable(f"unknown case number {self.number}")
        for key in _PAYLOAD[self.number]:
            if getattr(self, key) is None:
                raise NotApplicable(f"case {self.number} needs {key}")
        if self.n_mat is not None:
            object.__setattr__(self, "n_mat", _check_pd("n_mat", self.n_mat, strict=True))
        if self.m_mat is not None:
            object.__setattr__(self, "m_mat", _check_pd("m_mat", self.m_mat, strict=True))
        if self.a_mat is not None:
            a = np.asarray(self.a_mat, dtype=complex)
            if a.ndim != 2:
                raise NotApplicable("a_mat must be a matrix")
            object.__setattr__(self, "a_mat", a)
        if self.number == 5 and self.a_mat.shape[1] != self.n_mat.shape[0]:
            raise NotApplicable("case 5 needs a_mat columns == n_mat size")
        if self.number == 7 and self.schur not in (Schur.ADD_CONCAVE, Schur.ADD_CONVEX):
            raise NotApplicable("case 7 needs an additive Schur flag")
        if self.number == 8 and self.schur not in (Schur.MUL_CONCAVE, Schur.MUL_CONVEX):
            raise NotApplicable("case 8 needs a multiplicative Schur flag")
        if self.number in (7, 8) and self.scalar_fn is None:
            raise NotApplicable(f"case {self.number} needs scalar_fn")

    @property
    def dim(self) -> Optional[int]:
        """Number of streams N the constant matrices imply, if any."""
        if self.n_mat is not None and self.number in (1, 3, 4):
            return self.n_mat.shape[0]
        if self.a_mat is not None:
            return self.a_mat.shape[0]
        return None

    def check_dim(self, n: int) -> None:
        d = self.dim
        if d is not None and d != n:
            raise DimensionMismatch(f"case {self.number} constants are {d}-dimensional, inner matrix is {n}x{n}")
