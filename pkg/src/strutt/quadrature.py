"""Numerical kernel coefficients K_nm(theta, gamma) and K~_nm(theta, gamma).

With xi = t - s the coefficient becomes

    K_nm = (1/T) int_0^T int_0^inf K(t, t - xi) exp(i theta (m - n) t - (i theta m + gamma) xi) dxi dt.

The xi integral uses an exponential-weight Gauss rule after the scaling
xi = x / v (so a rule for int_0^inf e^{-x} f(x) dx handles integrands that
decay like e^{-v xi}); the t integral uses composite Simpson. The double sum is

    (1/T) sum_i sum_j u_j e^{x_i} (w_i / v) K(y_j, y_j - x_i/v)
          * exp(i theta (m - n) y_j - (i theta m + gamma) x_i / v),

and the antiperiodic coefficients substitute m + 1/2, n + 1/2 for m, n.
The exponential-weight rule is the Gauss-Laguerre rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DivergenceError
from .kernels import ANTIPERIODIC, PERIODIC, ExpSumKernel, MemoryKernel, knm_exp_closed

__all__ = [
    "QuadratureSpec",
    "FourierBlock",
    "CoefficientSource",
    "laguerre_rule",
    "newton_cotes_rule",
    "knm_quad",
    "fourier_block",
    "window_indices",
]


@dataclass(frozen=True)
class QuadratureSpec:
    N: int = 32
    M: int = 64
    v: Union[float, str] = "auto"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N (exponential-weight nodes) must be an integer >= 1")
        if int(self.M) != self.M or self.M < 2 or self.M % 2:
            raise ValueError("M (Simpson panels) must be an even integer >= 2")
        if self.v != "auto" and not float(self.v) > 0:
            raise ValueError("v must be 'auto' or a positive rate")

    def rate(self, mu: float, gamma: complex) -> float:
        v = mu + complex(gamma).real if self.v == "auto" else float(self.v)
        if not v > 0:
            raise DivergenceError(f"approximation needs v > 0 (got v = {v:g})")
        return v


def _laguerre_values(N, x):
    """L_{N-1}(x), L_N(x), L_{N+1}(x) by the three-term recurrence."""
    L = [np.ones_like(x), 1.0 - x]
    for k in range(1, N + 1):
        L.append(((2 * k + 1 - x) * L[k] - k * L[k - 1]) / (k + 1))
    return L[N - 1], L[N], L[N + 1]


@lru_cache(maxsize=None)
def _laguerre_rule_cached(N):
    # eigenvalues of the Jacobi matrix as starting points, then Newton on L_N
    k = np.arange(N)
    J = np.diag(2.0 * k + 1) + np.diag(k[1:].astype(float), 1) + np.diag(k[1:].astype(float), -1)
    x = np.linalg.eigvalsh(J)
    for _ in range(50):
        lm1, ln, _ = _laguerre_values(N, x)
        dln = N * (ln - lm1) / x
        dx = ln / dln
        x = x - dx
        if np.all(np.abs(dx) <= 1e-15 * np.abs(x)):
            break
    _, _, lp1 = _laguerre_values(N, x)
    w = x / ((N + 1) ** 2 * lp1**2)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def laguerre_rule(N: int):
    """Nodes and weights for int_0^inf e^{-x} f(x) dx ~ sum_i w_i f(x_i)."""
    if int(N) != N or not 1 <= N <= 64:
        raise ValueError("Laguerre rule order must be an integer in 1..64")
    return _laguerre_rule_cached(int(N))


def newton_cotes_rule(M: int, T: float):
    """Composite Simpson rule on [0, T]: M panels, 2M + 1 nodes, h = T / (2M)."""
    if int(M) != M or M < 2 or M % 2:
        raise ValueError("Simpson panel count M must be an even integer >= 2")
    n = 2 * int(M)
    h = T / n
    y = np.linspace(0.0, T, n + 1)
    u = np.full(n + 1, 2.0)
    u[1::2] = 4.0
    u[0] = u[-1] = 1.0
    return y, u * h / 3.0


def window_indices(halfwidth: int, mode: str) -> np.ndarray:
    """Harmonic indices -N..N (periodic) or -N..N-1 (antiperiodic)."""
    if mode == PERIODIC:
        return np.arange(-halfwidth, halfwidth + 1)
    if mode == ANTIPERIODIC:
        return np.arange(-halfwidth, halfwidth)
    raise ValueError(f"mode must be 'periodic' or 'antiperiodic', got {mode!r}")


@dataclass(frozen=True)
class FourierBlock:
    """Table of K_nm (or K~_nm) over a window of harmonic indices."""

    indices: np.ndarray
    mode: str
    theta: float
    gamma: complex
    values: np.ndarray
    backend: str = "quad"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = len(self.indices)
        if self.values.shape != (n, n):
            raise ValueError("values must be a square table over the window")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite kernel coefficient")

    def __getitem__(self, nm):
        n, m = nm
        off = self.indices[0]
        return self.values[n - off, m - off]

    def sub(self, indices) -> np.ndarray:
        off = self.indices[0]
        idx = np.asarray(indices) - off
        if idx.min() < 0 or idx.max() >= len(self.indices):
            raise ValueError("requested window exceeds the block")
        return self.values[np.ix_(idx, idx)]

    @property
    def halfwidth(self) -> int:
        return int(-self.indices[0])

    def rows(self):
        for a, n in enumerate(self.indices):
            for b, m in enumerate(self.indices):
                yield int(n), int(m), self.values[a, b]


def _quad_block(k: MemoryKernel, idx, theta, gamma, spec: QuadratureSpec, mode):
    gamma = complex(gamma)
    v = spec.rate(k.envelope.mu, gamma)
    x, w = laguerre_rule(spec.N)
    y, u = newton_cotes_rule(spec.M, k.T)
    xi = x / v
    # K(y_j, y_j - x_i/v): shape (nodes_t, nodes_xi)
    kv = k.lag(y[:, None], xi[None, :]) * (np.exp(x) * w / v)[None, :]
    shift = 0.5 if mode == ANTIPERIODIC else 0.0
    freq = (idx + shift) * theta
    # inner[j, m] = sum_i kv[j, i] exp(-(i theta m' + gamma) xi_i)
    inner = kv @ np.exp(-np.outer(xi, 1j * freq + gamma))
    # K_nm = (1/T) sum_j u_j exp(i theta (m' - n') y_j) inner[j, m]
    phase_m = np.exp(1j * np.outer(y, freq))  # (j, m)
    phase_n = np.exp(-1j * np.outer(freq, y))  # (n, j)
    vals = phase_n @ (u[:, None] * phase_m * inner) / k.T
    return vals


def fourier_block(
    k: MemoryKernel,
    halfwidth: int,
    theta: float,
    gamma: complex,
    spec: QuadratureSpec | None = None,
    mode: str = PERIODIC,
    backend: str = "quad",
) -> FourierBlock:
    """Coefficient table over the harmonic window of the given half-width.

    The kernel is re-periodized to T = 2 pi / theta first. ``backend='closed'``
    uses the exact exponential-sum formula (ExpSumKernel only).
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    spec = spec or QuadratureSpec()
    idx = window_indices(halfwidth, mode)
    k = k.with_period(2 * math.pi / theta)
    gamma = complex(gamma)
    if backend == "closed":
        if not isinstance(k, ExpSumKernel):
            raise TypeError("closed-form backend needs an ExpSumKernel")
        diag = [knm_exp_closed(k, int(m), int(m), theta, gamma, mode) for m in idx]
        vals = np.diag(np.array(diag, dtype=complex)) if len(idx) else np.zeros((0, 0), complex)
    elif backend == "quad":
        if isinstance(k, ExpSumKernel) and k.terms and not gamma.real + k.mu.min() > 0:
            raise DivergenceError("memory integral diverges for this shift")
        vals = _quad_block(k, idx, theta, gamma, spec, mode)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return FourierBlock(idx, mode, float(theta), gamma, vals, backend, {"spec": spec})


def knm_quad(
    k: MemoryKernel,
    n: int,
    m: int,
    theta: float,
    gamma: complex,
    spec: QuadratureSpec | None = None,
    mode: str = PERIODIC,
) -> complex:
    """Single coefficient by the Laguerre x Simpson double sum."""
    spec = spec or QuadratureSpec()
    k = k.with_period(2 * math.pi / theta)
    gamma = complex(gamma)
    v = spec.rate(k.envelope.mu, gamma)
    x, w = laguerre_rule(spec.N)
    y, u = newton_cotes_rule(spec.M, k.T)
    shift = 0.5 if mode == ANTIPERIODIC else 0.0
    mp, np_ = m + shift, n + shift
    kv = k.lag(y[:, None], (x / v)[None, :])
    terms = (
        u[:, None]
        * (np.exp(x) * w / v)[None, :]
        * kv
        * np.exp(1j * theta * (mp - np_) * y[:, None] - (1j * theta * mp + gamma) * (x / v)[None, :])
    )
    return complex(terms.sum() / k.T)


class CoefficientSource:
    """Callable ``(theta, gamma, mode, halfwidth) -> FourierBlock`` for a kernel.

    Boundary solvers take one of these (or any callable with that signature)
    so they can ask for coefficients at several shifts and frequencies.
    """

    def __init__(self, kernel: MemoryKernel, backend: str = "quad", spec: QuadratureSpec | None = None):
        if backend not in ("quad", "closed"):
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "closed" and not isinstance(kernel, ExpSumKernel):
            raise TypeError("closed-form backend needs an ExpSumKernel")
        self.kernel = kernel
        self.backend = backend
        self.spec = spec or QuadratureSpec()

    def __call__(self, theta, gamma, mode=PERIODIC, halfwidth=1) -> FourierBlock:
        return fourier_block(self.kernel, halfwidth, theta, gamma, self.spec, mode, self.backend)

    def __repr__(self):
        return f"CoefficientSource({self.kernel!r}, backend={self.backend!r})"
