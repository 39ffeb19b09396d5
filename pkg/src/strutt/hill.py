"""Truncated Hill matrices and their determinants.

For a(t) = a0 + a1 cos(theta t) the periodic Floquet ansatz
x = e^{gamma t} sum_n Y_n e^{i n theta t} leads to the matrix

    D_nm = delta_nm - (K_nm - a0 delta_nm - a1/2 (delta_{n-1,m} + delta_{n+1,m})) / (i n theta + gamma)^2,

and the antiperiodic ansatz (harmonics (2n+1) theta / 2) to D~ with
(i (2n+1) theta/2 + gamma)^2 in the prefactor. At gamma = 0 the periodic
row n = 0 has a vanishing prefactor and is replaced by

    -K_0m + a0 delta_0m + a1/2 (delta_{-1,m} + delta_{1,m}).

Each row of D is a nonzero multiple of the corresponding row of the "raw"
matrix R = K - diag(p_n) - a0 I - a1/2 (S + S^T) with p_n the squared
frequency term, so det D = prod(row_scales) * det R and both vanish together.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ComplexityGuardError, DegenerateShiftError, DomainError
from .kernels import ANTIPERIODIC, PERIODIC
from .quadrature import FourierBlock, window_indices

__all__ = [
    "HillParams",
    "HillWindow",
    "HillMatrix",
    "frequency_terms",
    "raw_matrix",
    "row_scales",
    "build_D",
    "build_Dtilde",
    "build_hill",
    "det_complex",
    "split_CS",
    "multiindex_expansion",
    "koch_norm",
]

SHIFT_EPS = 1e-9


@dataclass(frozen=True)
class HillParams:
    a0: float
    a1: float
    theta: float
    gamma: complex = 0j

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        object.__setattr__(self, "gamma", complex(self.gamma))

    def with_a1(self, a1: float) -> "HillParams":
        return HillParams(self.a0, a1, self.theta, self.gamma)


@dataclass(frozen=True)
class HillWindow:
    """Periodic: indices -N..N (size 2N+1). Antiperiodic: -N..N-1 (size 2N)."""

    mode: str
    N: int

    def __post_init__(self):
        if self.mode not in (PERIODIC, ANTIPERIODIC):
            raise ValueError(f"unknown mode {self.mode!r}")
        if int(self.N) != self.N or self.N < 0 or (self.mode == ANTIPERIODIC and self.N < 1):
            raise ValueError("window half-width must be a nonnegative integer (>= 1 antiperiodic)")

    @property
    def indices(self) -> np.ndarray:
        return window_indices(self.N, self.mode)

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class HillMatrix:
    window: HillWindow
    params: HillParams
    entries: np.ndarray
    exceptional_row_applied: bool = False

    @property
    def order(self) -> int:
        return self.window.size


def frequency_terms(params: HillParams, window: HillWindow) -> np.ndarray:
    """The complex frequencies i n theta + gamma (or i (2n+1) theta/2 + gamma) per row."""
    idx = window.indices
    shift = 0.5 if window.mode == ANTIPERIODIC else 0.0
    return 1j * (idx + shift) * params.theta + params.gamma


def _exceptional(params: HillParams, window: HillWindow) -> bool:
    return window.mode == PERIODIC and params.gamma == 0


def raw_matrix(params: HillParams, window: HillWindow, coeffs: FourierBlock) -> np.ndarray:
    """R = K - diag((i n theta + gamma)^2) - a0 I - a1/2 (sub + super diagonal)."""
    if coeffs.mode != window.mode:
        raise ValueError("coefficient block mode does not match the window")
    if not np.isclose(coeffs.theta, params.theta, rtol=1e-13, atol=0) or coeffs.gamma != params.gamma:
        raise ValueError("coefficient block was computed at a different (theta, gamma)")
    idx = window.indices
    K = coeffs.sub(idx).astype(complex)
    p = frequency_terms(params, window) ** 2
    n = len(idx)
    R = K - np.diag(p) - params.a0 * np.eye(n)
    off = 0.5 * params.a1 * np.ones(n - 1) if n > 1 else np.zeros(0)
    R = R - np.diag(off, 1) - np.diag(off, -1)
    return R


def row_scales(params: HillParams, window: HillWindow) -> np.ndarray:
    """Per-row factors r_n with D = diag(r) R: -1/p_n, or -1 for the exceptional row."""
    f = frequency_terms(params, window)
    eps = SHIFT_EPS * params.theta
    exc = _exceptional(params, window)
    scales = np.empty(len(f), dtype=complex)
    for a, (n, fn) in enumerate(zip(window.indices, f)):
        if exc and n == 0:
            scales[a] = -1.0
            continue
        if abs(fn) < eps:
            raise DegenerateShiftError(
                f"singular prefactor at row n={n}: |i n theta + gamma| = {abs(fn):.3g} (theta={params.theta:g}, "
                f"gamma={params.gamma})"
            )
        scales[a] = -1.0 / fn**2
    return scales


def build_hill(params: HillParams, window: HillWindow, coeffs: FourierBlock) -> HillMatrix:
    scales = row_scales(params, window)
    entries = scales[:, None] * raw_matrix(params, window, coeffs)
    return HillMatrix(window, params, entries, _exceptional(params, window))


def build_D(params: HillParams, window: HillWindow, coeffs: FourierBlock) -> HillMatrix:
    """Periodic Hill matrix truncated to ``window`` (exceptional row at gamma = 0)."""
    if window.mode != PERIODIC:
        raise ValueError("build_D needs a periodic window")
    return build_hill(params, window, coeffs)


def build_Dtilde(params: HillParams, window: HillWindow, coeffs: FourierBlock) -> HillMatrix:
    """Antiperiodic Hill matrix truncated to ``window``."""
    if window.mode != ANTIPERIODIC:
        raise ValueError("build_Dtilde needs an antiperiodic window")
    return build_hill(params, window, coeffs)


def det_complex(m) -> complex:
    """Determinant by partial-pivoting LU."""
    a = m.entries if isinstance(m, HillMatrix) else np.asarray(m)
    a = np.asarray(a, dtype=complex)
    if a.shape == (0, 0):
        return 1.0 + 0j
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    with warnings.catch_warnings():
        # an exactly singular matrix is a legitimate input here: its determinant is 0
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    sign = (-1) ** int(np.sum(piv != np.arange(len(piv))))
    return complex(sign * np.prod(np.diag(lu)))


def split_CS(m):
    """Split D(theta, i w) = D_C + i D_S into real matrices."""
    if isinstance(m, HillMatrix):
        if m.params.gamma.real != 0:
            raise DomainError("split_CS needs a purely imaginary shift gamma = i w")
        a = m.entries
    else:
        a = np.asarray(m, dtype=complex)
    return a.real.copy(), a.imag.copy()


def multiindex_expansion(D_C, D_S, max_dim: int = 12) -> complex:
    """det(D_C + i D_S) as signed sums of row-mixed real determinants.

    Each multi-index alpha in {0,1}^N picks row k from D_C (alpha_k = 0) or
    D_S (alpha_k = 1); the term carries i^|alpha|, so terms group by |alpha| mod 4.
    """
    D_C = np.asarray(D_C, dtype=float)
    D_S = np.asarray(D_S, dtype=float)
    n = D_C.shape[0]
    if D_C.shape != (n, n) or D_S.shape != (n, n):
        raise ValueError("D_C and D_S must be square and of equal size")
    if n > max_dim:
        raise ComplexityGuardError(f"multi-index expansion of a {n}x{n} matrix needs 2^{n} determinants")
    if n == 0:
        return 1.0 + 0j
    alphas = np.array(list(itertools.product((0, 1), repeat=n)), dtype=bool)
    stack = np.where(alphas[:, :, None], D_S[None, :, :], D_C[None, :, :])
    dets = np.linalg.det(stack)
    weight = alphas.sum(axis=1) % 4
    real = dets[weight == 0].sum() - dets[weight == 2].sum()
    imag = dets[weight == 1].sum() - dets[weight == 3].sum()
    return complex(real, imag)


def koch_norm(m) -> float:
    """sum_n max_m |M_nm - delta_nm|, a finite-window proxy for row-sup summability."""
    a = m.entries if isinstance(m, HillMatrix) else np.asarray(m)
    S = np.asarray(a, dtype=complex) - np.eye(a.shape[0])
    if S.size == 0:
        return 0.0
    return float(np.abs(S).max(axis=1).sum())
