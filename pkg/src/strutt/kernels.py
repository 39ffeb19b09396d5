"""Memory kernels K(t, s) with simultaneous periodicity K(t+T, s+T) = K(t, s).

Every kernel is stored in lag form ``f(t, xi, T)`` with ``xi = t - s >= 0``;
simultaneous periodicity is then just T-periodicity of ``f`` in ``t``.
Passing the period to ``f`` lets one object describe a whole family of
kernels locked to the excitation period, which is what frequency sweeps need
(``with_period`` returns the member with another period).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DivergenceError, DomainError, KernelFormatError

__all__ = [
    "Envelope",
    "MemoryKernel",
    "ExpSumKernel",
    "TableKernel",
    "KernelMoments",
    "eval_kernel",
    "knm_exp_closed",
    "khat",
    "moments",
    "sine_transform",
    "kernel_from_dict",
    "load_kernel",
    "zero_kernel",
]

PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"


@dataclass(frozen=True)
class Envelope:
    """Decay bound |K(t, s)| <= C * exp(-mu * (t - s)**beta)."""

    C: float
    mu: float
    beta: float = 1.0

    def __post_init__(self):
        if self.C < 0:
            raise ValueError("envelope constant C must be nonnegative")
        if not self.mu > 0:
            raise ValueError("envelope decay rate mu must be positive")
        if self.beta < 1:
            raise ValueError("envelope exponent beta must be >= 1")

    def __call__(self, xi):
        return self.C * np.exp(-self.mu * np.asarray(xi, dtype=float) ** self.beta)


class MemoryKernel:
    """General kernel given by a lag-form evaluator ``func(t, xi, T)``.

    ``func`` must accept numpy arrays (broadcasting) and be T-periodic in t.
    """

    def __init__(self, func: Callable, T: float, envelope: Envelope, name: str = "kernel"):
        if not T > 0:
            raise ValueError("period T must be positive")
        self._func = func
        self.T = float(T)
        self.envelope = envelope
        self.name = name

    def lag(self, t, xi):
        """K(t, t - xi), no domain check."""
        t = np.asarray(t, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return self._func(t, xi, self.T)

    def __call__(self, t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        if np.any(s > t + 1e-12 * np.maximum(1.0, np.abs(t))):
            raise DomainError("kernel K(t, s) is only defined for s <= t")
        out = self.lag(t, np.maximum(t - s, 0.0))
        return out if np.ndim(out) else float(out)

    @property
    def theta(self) -> float:
        return 2.0 * math.pi / self.T

    def with_period(self, T: float) -> "MemoryKernel":
        if T == self.T:
            return self
        return MemoryKernel(self._func, T, self.envelope, self.name)

    def is_zero(self) -> bool:
        return self.envelope.C == 0.0

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, T={self.T:g})"


class ExpSumKernel(MemoryKernel):
    """K(t, s) = sum_a c_a exp(-mu_a (t - s)); a convolution kernel, so any T works.

    Signed amplitudes are accepted. Closed forms that require c_a > 0 check
    that themselves.
    """

    def __init__(self, terms: Sequence[tuple[float, float]], T: float = 2 * math.pi, name: str = "expsum"):
        terms = tuple((float(c), float(mu)) for c, mu in terms)
        for _, mu in terms:
            if not mu > 0:
                raise ValueError("all decay rates mu_a must be positive")
        self.terms = terms
        self.c = np.array([c for c, _ in terms], dtype=float)
        self.mu = np.array([mu for _, mu in terms], dtype=float)
        C = float(np.sum(np.abs(self.c)))
        mu_min = float(self.mu.min()) if terms else 1.0
        super().__init__(self._lag, T, Envelope(C, mu_min, 1.0), name)

    def _lag(self, t, xi, T):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(np.broadcast(np.asarray(t), xi).shape)
        for c, mu in self.terms:
            out = out + c * np.exp(-mu * xi)
        return out

    def with_period(self, T: float) -> "ExpSumKernel":
        if T == self.T:
            return self
        return ExpSumKernel(self.terms, T, self.name)

    def is_zero(self) -> bool:
        return not np.any(self.c)

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.c > 0))

    def to_dict(self) -> dict:
        return {"type": "expsum", "T": self.T, "terms": [{"c": c, "mu": mu} for c, mu in self.terms]}

    def __repr__(self):
        return f"ExpSumKernel(terms={list(self.terms)}, T={self.T:g})"


class TableKernel(MemoryKernel):
    """Kernel tabulated on a (t mod T, xi) grid with bilinear interpolation.

    ``t_samples`` lie in [0, T) and wrap periodically. Beyond the last xi
    sample the value decays as ``exp(-mu * (xi**beta - xi_last**beta))`` using
    the declared envelope. Changing the period rescales the t axis, so the
    modulation stays phase locked.
    """

    def __init__(self, T, t_samples, xi_samples, values, envelope: Envelope, name: str = "table"):
        t_samples = np.asarray(t_samples, dtype=float)
        xi_samples = np.asarray(xi_samples, dtype=float)
        values = np.asarray(values, dtype=float)
        if t_samples.ndim != 1 or xi_samples.ndim != 1 or len(t_samples) < 1 or len(xi_samples) < 2:
            raise KernelFormatError("table kernel needs 1-D t_samples (>=1) and xi_samples (>=2)")
        if values.shape != (len(t_samples), len(xi_samples)):
            raise KernelFormatError(
                f"values must have shape {(len(t_samples), len(xi_samples))}, got {values.shape}"
            )
        if np.any(np.diff(t_samples) <= 0) or np.any(np.diff(xi_samples) <= 0):
            raise KernelFormatError("t_samples and xi_samples must be strictly increasing")
        if t_samples[0] < 0 or t_samples[-1] >= T:
            raise KernelFormatError("t_samples must lie in [0, T)")
        if xi_samples[0] < 0:
            raise KernelFormatError("xi_samples must be nonnegative")
        if not np.all(np.isfinite(values)):
            raise KernelFormatError("table values must be finite")
        self.t_samples = t_samples
        self.xi_samples = xi_samples
        self.values = values
        super().__init__(self._lag, T, envelope, name)

    def _lag(self, t, xi, T):
        t, xi = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(xi, dtype=float))
        phase = np.mod(t, T)
        # periodic extension in t: append first row at t0 + T
        ts = np.append(self.t_samples, self.t_samples[0] + T)
        vals = np.vstack([self.values, self.values[:1]])
        phase = np.where(phase < ts[0], phase + T, phase)
        i = np.clip(np.searchsorted(ts, phase, side="right") - 1, 0, len(ts) - 2)
        wt = (phase - ts[i]) / (ts[i + 1] - ts[i])

        xs = self.xi_samples
        xc = np.clip(xi, xs[0], xs[-1])
        j = np.clip(np.searchsorted(xs, xc, side="right") - 1, 0, len(xs) - 2)
        wx = (xc - xs[j]) / (xs[j + 1] - xs[j])

        v = (
            (1 - wt) * (1 - wx) * vals[i, j]
            + wt * (1 - wx) * vals[i + 1, j]
            + (1 - wt) * wx * vals[i, j + 1]
            + wt * wx * vals[i + 1, j + 1]
        )
        env = self.envelope
        tail = np.exp(-env.mu * (np.maximum(xi, xs[-1]) ** env.beta - xs[-1] ** env.beta))
        return np.where(xi > xs[-1], v * tail, v)

    def with_period(self, T: float) -> "TableKernel":
        if T == self.T:
            return self
        return TableKernel(T, self.t_samples * (T / self.T), self.xi_samples, self.values, self.envelope, self.name)

    def to_dict(self) -> dict:
        e = self.envelope
        return {
            "type": "table",
            "T": self.T,
            "t_samples": self.t_samples.tolist(),
            "xi_samples": self.xi_samples.tolist(),
            "values": self.values.tolist(),
            "envelope": {"C": e.C, "mu": e.mu, "beta": e.beta},
        }


def zero_kernel(T: float = 2 * math.pi) -> ExpSumKernel:
    return ExpSumKernel([], T, name="zero")


def eval_kernel(k: MemoryKernel, t, s):
    """K(t, s); raises DomainError when s > t."""
    return k(t, s)


def _check_expsum_convergence(k: ExpSumKernel, gamma: complex):
    if k.terms and not (gamma.real + k.mu.min() > 0):
        raise DivergenceError(
            f"memory integral diverges: Re(gamma) + min(mu) = {gamma.real + k.mu.min():g} <= 0"
        )


def knm_exp_closed(k: ExpSumKernel, n: int, m: int, theta: float, gamma: complex, mode: str = PERIODIC) -> complex:
    """Exact K_nm (periodic) or K~_nm (antiperiodic) for an exponential-sum kernel.

    Off-diagonal entries vanish; on the diagonal the value is
    sum_a c_a / (mu_a + gamma + i*freq) with freq = m*theta or (2m+1)*theta/2.
    """
    if not isinstance(k, ExpSumKernel):
        raise TypeError("closed-form coefficients need an ExpSumKernel")
    gamma = complex(gamma)
    _check_expsum_convergence(k, gamma)
    if n != m:
        return 0j
    freq = m * theta if mode == PERIODIC else (2 * m + 1) * theta / 2
    return complex(np.sum(k.c / (k.mu + gamma + 1j * freq)))


def khat(k: MemoryKernel, xi, panels: int = 64):
    """Period-integrated lag profile  K^(xi) = int_0^T K(eta, eta - xi) d eta."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0):
        raise DomainError("khat is defined for xi >= 0")
    if isinstance(k, ExpSumKernel):
        out = k.T * np.sum(k.c[:, None] * np.exp(-k.mu[:, None] * xi_arr.reshape(1, -1)), axis=0)
        out = out.reshape(xi_arr.shape)
    else:
        from .quadrature import newton_cotes_rule

        y, u = newton_cotes_rule(panels, k.T)
        vals = k.lag(y[:, None], xi_arr.reshape(1, -1))
        out = (u @ vals).reshape(xi_arr.shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class KernelMoments:
    """A_k = (1/(2k+1)!) int_0^inf K^(xi) xi^(2k+1) d xi  for k = 0..k_max."""

    values: tuple

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k):
        return self.values[k]


def moments(k: MemoryKernel, k_max: int = 2) -> KernelMoments:
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if isinstance(k, ExpSumKernel):
        vals = [float(k.T * np.sum(k.c / k.mu ** (2 * j + 2))) for j in range(k_max + 1)]
        return KernelMoments(tuple(vals))
    vals = []
    for j in range(k_max + 1):
        val, err = integrate.quad(
            lambda x, j=j: khat(k, x) * x ** (2 * j + 1), 0, np.inf, limit=400, epsabs=0, epsrel=1e-11
        )
        if not np.isfinite(val):
            raise DivergenceError(f"moment A_{j} does not converge")
        vals.append(val / math.factorial(2 * j + 1))
    return KernelMoments(tuple(vals))


def sine_transform(k: MemoryKernel, omega):
    """S(w) = int_0^inf K^(xi) sin(w xi) d xi; zeros give real quasi-static values."""
    w = np.asarray(omega, dtype=float)
    if isinstance(k, ExpSumKernel):
        out = k.T * np.sum(k.c[:, None] * w.reshape(1, -1) / (k.mu[:, None] ** 2 + w.reshape(1, -1) ** 2), axis=0)
        out = out.reshape(w.shape)
        return out if out.ndim else float(out)
    flat = []
    for wi in w.ravel():
        if wi == 0:
            flat.append(0.0)
            continue
        val, _ = integrate.quad(lambda x: khat(k, x), 0, np.inf, weight="sin", wvar=wi, limit=400)
        flat.append(val)
    out = np.array(flat).reshape(w.shape)
    return out if out.ndim else float(out)


def kernel_from_dict(d: dict) -> MemoryKernel:
    """Build a kernel from the JSON schema documented in the README."""
    if not isinstance(d, dict) or "type" not in d:
        raise KernelFormatError("kernel definition must be an object with a 'type' field")
    try:
        T = float(d.get("T", 2 * math.pi))
        kind = d["type"]
        if kind == "expsum":
            terms = [(float(t["c"]), float(t["mu"])) for t in d.get("terms", [])]
            return ExpSumKernel(terms, T, name=d.get("name", "expsum"))
        if kind == "table":
            e = d["envelope"]
            env = Envelope(float(e["C"]), float(e["mu"]), float(e.get("beta", 1.0)))
            return TableKernel(T, d["t_samples"], d["xi_samples"], d["values"], env, name=d.get("name", "table"))
    except KernelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise KernelFormatError(f"bad kernel definition: {exc}") from exc
    raise KernelFormatError(f"unknown kernel type {d['type']!r}")


def load_kernel(path) -> MemoryKernel:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KernelFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return kernel_from_dict(d)
