"""Time-domain oracle for exponential-sum kernels.

For K(t, s) = sum_a c_a exp(-mu_a (t - s)) the memory terms
z_a(t) = int_{-inf}^t c_a exp(-mu_a (t - s)) x(s) ds obey z_a' = c_a x - mu_a z_a,
so the integro-differential equation becomes the finite linear system

    x' = v,   v' = -(a0 + a1 cos(theta t)) x + sum_a z_a,   z_a' = c_a x - mu_a z_a,

whose monodromy matrix over T = 2 pi / theta is computed by classical RK4.
Integration runs in normalized time tau = t / T so that many parameter cells
can be advanced together.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import UnsupportedKernelError
from .kernels import ExpSumKernel

__all__ = [
    "AugmentedSystem",
    "MonodromyResult",
    "WellPosedness",
    "StabilityChart",
    "embed",
    "integrate_period",
    "integrate_batch",
    "monodromy",
    "multipliers_report",
    "classify_pq",
    "check_wellposedness",
    "scan_chart",
]

STEPS = 4096
STEP_TOL = 1e-10
MAX_STEPS = 2**18
CLASS_TOL = 1e-6
SIMPLE_SEP = 1e-3

STABLE, UNSTABLE, BOUNDARY = "Stable", "Unstable", "Boundary"


@dataclass(frozen=True)
class AugmentedSystem:
    """State (x, x', z_1..z_A) of the embedded equation; period T = 2 pi / theta."""

    a0: float
    a1: float
    theta: float
    c: np.ndarray
    mu: np.ndarray

    @property
    def dim(self) -> int:
        return 2 + len(self.c)

    @property
    def T(self) -> float:
        return 2 * math.pi / self.theta

    def matrix(self, t: float) -> np.ndarray:
        d = self.dim
        A = np.zeros((d, d))
        A[0, 1] = 1.0
        A[1, 0] = -(self.a0 + self.a1 * math.cos(self.theta * t))
        A[1, 2:] = 1.0
        A[2:, 0] = self.c
        A[2:, 2:] = -np.diag(self.mu)
        return A

    @property
    def trace(self) -> float:
        return float(-self.mu.sum())


def embed(k, a0: float, a1: float, theta: float) -> AugmentedSystem:
    if not isinstance(k, ExpSumKernel):
        raise UnsupportedKernelError(
            "the monodromy oracle needs an exponential-sum kernel; use the Hill-determinant routines for others"
        )
    if not theta > 0:
        raise ValueError("theta must be positive")
    return AugmentedSystem(float(a0), float(a1), float(theta), k.c.astype(float).copy(), k.mu.astype(float).copy())


# ---------------------------------------------------------------------------
# batched RK4 over cells sharing the kernel


def _rk4(a0, a1, T, c, mu, steps):
    """Fundamental matrices at tau = 1 for cells with arrays a0, a1, T (all shape (n,))."""
    n = T.shape[0]
    d = 2 + len(c)
    X = np.zeros((d, d, n))
    for i in range(d):
        X[i, i] = 1.0
    h = 1.0 / steps
    c = c[:, None, None]
    mu = mu[:, None, None]

    a0T, a1T = a0 * T, a1 * T

    def f(cos_tau, X):
        dX = np.empty_like(X)
        dX[0] = T * X[1]
        dX[1] = -(a0T + a1T * cos_tau) * X[0]
        if d > 2:
            dX[1] += T * X[2:].sum(axis=0)
            dX[2:] = T * (c * X[0][None] - mu * X[2:])
        return dX

    cosines = np.cos(np.pi * np.arange(2 * steps + 1) / steps)  # cos(2 pi tau) on half steps
    for j in range(steps):
        k1 = f(cosines[2 * j], X)
        k2 = f(cosines[2 * j + 1], X + (h / 2) * k1)
        k3 = f(cosines[2 * j + 1], X + (h / 2) * k2)
        k4 = f(cosines[2 * j + 2], X + h * k3)
        X += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return np.moveaxis(X, -1, 0)  # (n, d, d)


def integrate_batch(k: ExpSumKernel, a0, a1, theta, steps: int = STEPS, tol: float | None = STEP_TOL, max_steps: int = MAX_STEPS):
    """Monodromy matrices for arrays of (a0, a1, theta) sharing one kernel.

    Starts at ``steps`` and halves the step until every entry changes by less
    than ``tol`` (relative to max(1, |M|)). ``tol=None`` disables the check.
    """
    if not isinstance(k, ExpSumKernel):
        raise UnsupportedKernelError("the monodromy oracle needs an exponential-sum kernel")
    a0, a1, theta = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (a0, a1, theta)))
    if np.any(theta <= 0):
        raise ValueError("theta must be positive")
    T = 2 * math.pi / theta
    c, mu = k.c.astype(float), k.mu.astype(float)
    M = _rk4(a0, a1, T, c, mu, steps)
    if tol is None:
        return M, steps
    while True:
        if 2 * steps > max_steps:
            raise ArithmeticError(f"step underflow: no convergence to {tol:g} within {max_steps} steps")
        steps *= 2
        M2 = _rk4(a0, a1, T, c, mu, steps)
        scale = np.maximum(1.0, np.abs(M2).max(axis=(1, 2)))
        change = (np.abs(M2 - M).max(axis=(1, 2)) / scale).max()
        M = M2
        if change < tol:
            return M, steps


def integrate_period(sys: AugmentedSystem, steps: int = STEPS, tol: float | None = STEP_TOL) -> np.ndarray:
    """X(T, 0) with X(0, 0) = I."""
    k = ExpSumKernel(list(zip(sys.c, sys.mu)), T=sys.T)
    M, _ = integrate_batch(k, sys.a0, sys.a1, sys.theta, steps, tol)
    return M[0]


# ---------------------------------------------------------------------------
# multipliers and classification


@dataclass
class MonodromyResult:
    M: np.ndarray
    multipliers: np.ndarray
    p: float
    q: float
    classification: str
    region: str  # label of (p, q) from classify_pq
    spectral_radius: float
    warnings: tuple = ()

    @property
    def label(self) -> str:
        """'Boundary(vertexC)' style label for boundary cases."""
        return f"{BOUNDARY}({self.region})" if self.classification == BOUNDARY else self.classification


def classify_pq(p: float, q: float, tol: float = CLASS_TOL) -> str:
    """Position of (p, q) relative to the triangle |q| < 1, |p| < 1 + q.

    Returns 'stable', 'unstable', 'vertexA', 'vertexB', 'vertexC', 'sideAB'
    (p = 1 + q), 'sideAC' (p = -(1 + q)) or 'sideBC' (q = 1).
    """
    for name, (pv, qv) in (("vertexA", (0.0, -1.0)), ("vertexB", (2.0, 1.0)), ("vertexC", (-2.0, 1.0))):
        if abs(p - pv) <= tol and abs(q - qv) <= tol:
            return name
    inside_q = -1 - tol < q < 1 + tol
    if abs(p - (1 + q)) <= tol and inside_q:
        return "sideAB"
    if abs(p + (1 + q)) <= tol and inside_q:
        return "sideAC"
    if abs(q - 1) <= tol and abs(p) < 2 + tol:
        return "sideBC"
    if abs(q) < 1 and abs(p) < 1 + q:
        return "stable"
    return "unstable"


def _dominant_pair(lam, mu_min, T, tol):
    order = np.argsort(-np.abs(lam), kind="stable")
    lam = lam[order]
    l1, l2 = lam[0], lam[1]
    p = float(-(l1 + l2).real)
    q = float((l1 * l2).real)
    notes = []
    if len(lam) > 2:
        bound = math.exp(-mu_min * T / 2) + tol
        if np.abs(lam[2:]).max() >= bound:
            notes.append(f"memory multipliers are not subdominant (|lambda_3| = {abs(lam[2]):.3g} >= {bound:.3g})")
    return p, q, notes


def multipliers_report(M: np.ndarray, mu_min: float, T: float, tol: float = CLASS_TOL, lam=None) -> MonodromyResult:
    lam = np.linalg.eigvals(M) if lam is None else lam
    rho = float(np.abs(lam).max())
    p, q, notes = _dominant_pair(lam, mu_min, T, tol)
    region = classify_pq(p, q, tol)
    if rho > 1 + tol:
        cls = UNSTABLE
    else:
        on_circle = lam[np.abs(np.abs(lam) - 1) <= tol]
        if len(on_circle) == 0:
            cls = STABLE
        else:
            gaps = np.abs(on_circle[:, None] - on_circle[None, :])
            np.fill_diagonal(gaps, np.inf)
            cls = STABLE if gaps.min() > SIMPLE_SEP else BOUNDARY
    return MonodromyResult(M, lam, p, q, cls, region, rho, tuple(notes))


def monodromy(sys: AugmentedSystem, steps: int = STEPS, tol: float = STEP_TOL, class_tol: float = CLASS_TOL) -> MonodromyResult:
    M = integrate_period(sys, steps, tol)
    mu_min = float(sys.mu.min()) if len(sys.mu) else math.inf
    res = multipliers_report(M, mu_min, sys.T, class_tol)
    for w in res.warnings:
        warnings.warn(w, RuntimeWarning, stacklevel=2)
    return res


# ---------------------------------------------------------------------------
# well-posedness


@dataclass(frozen=True)
class WellPosedness:
    gamma_star: float | None
    g_min: float
    a4_literal: bool

    @property
    def well_posed(self) -> bool:
        return self.gamma_star is not None


def check_wellposedness(C_f: float, C_g: float, mu: float) -> WellPosedness:
    """Contraction check g(gamma) = C_f/gamma + C_g/(gamma (mu - gamma)) < 1 on (0, mu).

    ``a4_literal`` reports 0 < mu - C_f < sqrt(2) C_g as a separate flag; the
    two conditions are not equivalent and are not reconciled here.
    """
    if C_f < 0 or C_g < 0 or not mu > 0:
        raise ValueError("need C_f, C_g >= 0 and mu > 0")

    def g(x):
        return C_f / x + C_g / (x * (mu - x))

    r = optimize.minimize_scalar(g, bounds=(0.0, mu), method="bounded", options={"xatol": 1e-12 * mu})
    gmin = float(r.fun)
    a4 = bool(0 < mu - C_f < math.sqrt(2) * C_g)
    return WellPosedness(float(r.x) if gmin < 1 else None, gmin, a4)


# ---------------------------------------------------------------------------
# charts


@dataclass
class StabilityChart:
    """Classification over a (theta, a1) grid; arrays have shape (n_a1, n_theta)."""

    a0: float
    theta: np.ndarray
    a1: np.ndarray
    p: np.ndarray
    q: np.ndarray
    spectral_radius: np.ndarray
    classes: np.ndarray  # strings Stable / Unstable / Boundary
    polylines: list = field(default_factory=list)  # dicts {"label", "points": (k, 2) array of (theta, a1)}
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return (len(self.a1), len(self.theta))

    def rows(self):
        for i, a in enumerate(self.a1):
            for j, th in enumerate(self.theta):
                yield th, a, self.p[i, j], self.q[i, j], self.spectral_radius[i, j], self.classes[i, j]


def _axis(rng, n):
    if n is None:
        return np.asarray(rng, dtype=float).ravel()
    if int(n) != n or n < 1:
        raise ValueError("resolution must be a positive integer")
    lo, hi = rng
    if hi < lo:
        return np.array([])
    return np.linspace(lo, hi, int(n))


def _margins(p, q):
    return np.abs(p) - (1 + q), np.abs(q) - 1


def _refine(cont, th, a1, phi):
    """Move contour points (fractional grid indices) to the interpolated margin zero on their edge."""
    out = []
    labels = []
    for r, c in cont:
        i0, j0 = int(math.floor(r)), int(math.floor(c))
        if r != i0:
            A, B, t = (i0, j0), (i0 + 1, j0), r - i0
        elif c != j0:
            A, B, t = (i0, j0), (i0, j0 + 1), c - j0
        else:
            out.append((th[j0], a1[i0]))
            labels.append(None)
            continue
        # the margin component with the largest jump carries the sign change
        best, which = None, None
        for kk, ph in enumerate(phi):
            fa, fb = ph[A], ph[B]
            if np.sign(fa) != np.sign(fb) and (best is None or abs(fa - fb) > best):
                best, which = abs(fa - fb), kk
        if which is not None:
            fa, fb = phi[which][A], phi[which][B]
            t = fa / (fa - fb)
        x = (1 - t) * np.array([th[A[1]], a1[A[0]]]) + t * np.array([th[B[1]], a1[B[0]]])
        out.append(tuple(x))
        labels.append(which)
    return np.array(out), labels


def _polylines(th, a1, classes, p, q):
    from skimage import measure

    ind = np.where(classes == UNSTABLE, 1.0, np.where(classes == STABLE, -1.0, 0.0))
    if min(ind.shape) < 2 or ind.min() == ind.max():
        return []
    phi = _margins(p, q)
    lines = []
    for cont in measure.find_contours(ind, 0.0):
        pts, which = _refine(cont, th, a1, phi)
        # side label from the dominant margin and the sign of p along the line
        votes = {}
        for (r, c), w in zip(cont, which):
            if w is None:
                continue
            i, j = int(round(r)), int(round(c))
            lab = "sideBC" if w == 1 else ("sideAB" if p[i, j] > 0 else "sideAC")
            votes[lab] = votes.get(lab, 0) + 1
        label = max(sorted(votes), key=votes.get) if votes else "boundary"
        lines.append({"label": label, "points": pts})
    return lines


def scan_chart(
    k: ExpSumKernel,
    a0: float,
    theta,
    a1,
    resolution=None,
    steps: int = STEPS,
    tol: float | None = STEP_TOL,
    class_tol: float = CLASS_TOL,
) -> StabilityChart:
    """Classify a (theta, a1) grid by monodromy and extract boundary polylines.

    With ``resolution`` (int or (n_theta, n_a1)) ``theta`` and ``a1`` are
    (lo, hi) ranges; without it they are explicit grids. A range with hi < lo
    gives an empty chart.
    """
    if not isinstance(k, ExpSumKernel):
        raise UnsupportedKernelError("chart scans use the monodromy oracle and need an exponential-sum kernel")
    if resolution is None:
        nt = na = None
    elif np.ndim(resolution) == 0:
        nt = na = resolution
    else:
        nt, na = resolution
    th = _axis(theta, nt)
    aa = _axis(a1, na)
    shape = (len(aa), len(th))
    if 0 in shape:
        e = np.zeros(shape)
        return StabilityChart(float(a0), th, aa, e, e.copy(), e.copy(), np.zeros(shape, dtype=object), [], {"steps": 0})
    A1, TH = np.meshgrid(aa, th, indexing="ij")
    M, used = integrate_batch(k, np.full(A1.size, float(a0)), A1.ravel(), TH.ravel(), steps, tol)
    mu_min = float(k.mu.min()) if len(k.mu) else math.inf
    P = np.empty(A1.size)
    Q = np.empty(A1.size)
    R = np.empty(A1.size)
    C = np.empty(A1.size, dtype=object)
    n_warn = 0
    lams = np.linalg.eigvals(M)
    for idx in range(A1.size):
        res = multipliers_report(M[idx], mu_min, 2 * math.pi / TH.flat[idx], class_tol, lams[idx])
        P[idx], Q[idx], R[idx], C[idx] = res.p, res.q, res.spectral_radius, res.classification
        n_warn += bool(res.warnings)
    P, Q, R, C = (x.reshape(shape) for x in (P, Q, R, C))
    lines = _polylines(th, aa, C, P, Q)
    return StabilityChart(float(a0), th, aa, P, Q, R, C, lines, {"steps": used, "subdominance_warnings": n_warn})
