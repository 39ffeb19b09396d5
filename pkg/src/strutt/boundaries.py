"""Stability-boundary equations from low-order Hill truncations.

Conventions
-----------
``coeffs`` is any callable ``coeffs(theta, gamma, mode, halfwidth) -> FourierBlock``
(see :class:`strutt.quadrature.CoefficientSource`).

Periodic 3x3 truncation: with R the raw matrix of :mod:`strutt.hill`
(diagonal K_nn + (n theta + w)^2 - a0 at gamma = i w, off-diagonals K_nm - a1/2
on the first sub/super diagonals), the quadratic is

    C0 + C1 a1 + C2 a1^2 = -det R.

Antiperiodic 2x2 truncation (window -1, 0): the quadratic is monic,
a1^2 + C1 a1 + C0 = -4 det R~.

Real shifts gamma (vertices and the real-multiplier sides) make both
determinants real because the matrices are conjugate-symmetric under index
reversal n -> -n (periodic) or n -> -n-1 (antiperiodic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .kernels import ANTIPERIODIC, PERIODIC, MemoryKernel, moments, sine_transform
from .hill import HillParams, HillWindow, det_complex, raw_matrix

__all__ = [
    "QuadraticComplex",
    "RealRootReport",
    "BoundaryBranch",
    "QuasiStaticFrequency",
    "VertexCResult",
    "ExpPeriodicResult",
    "quasi_static_a0",
    "quasi_static_frequencies",
    "periodic_quadratic",
    "periodic_3x3_coeffs",
    "antiperiodic_quadratic",
    "real_root_test",
    "antiperiodic_2x2_roots",
    "sylvester_resultant",
    "side_real_case_first_order",
    "side_real_case_third_order",
    "antiperiodic_circles",
    "side_antiperiodic_second_order",
    "vertexC_3x3",
    "vertexA_solve",
    "det_poly_a1",
    "truncation_residual",
    "quasistatic_branch",
    "periodic_branch",
    "antiperiodic_branch",
    "vertexB_branch",
    "vertexC_branch",
    "exp_periodic_closed",
    "exp_periodic_asymptotes",
    "alternative_asymptote_formula",
    "exp_antiperiodic_closed",
]

TOL = 1e-8
BRANCH_KINDS = (
    "quasistatic",
    "periodic",
    "antiperiodic",
    "sideAB",
    "sideAC",
    "vertexA",
    "vertexB",
    "vertexC",
)


# ---------------------------------------------------------------------------
# result types


@dataclass(frozen=True)
class QuadraticComplex:
    C0: complex
    C1: complex
    C2: complex

    def __call__(self, a1):
        a1 = np.asarray(a1)
        return self.C0 + self.C1 * a1 + self.C2 * a1**2

    @property
    def coeffs(self) -> np.ndarray:
        """Highest degree first (numpy.polyval order)."""
        return np.array([self.C2, self.C1, self.C0], dtype=complex)

    @property
    def scale(self) -> float:
        return float(max(abs(self.C0), abs(self.C1), abs(self.C2)))

    def real_part(self) -> np.ndarray:
        return self.coeffs.real


@dataclass(frozen=True)
class RealRootReport:
    Q1: float
    Q2: float
    has_real_root: bool
    roots: tuple
    criterion_applied: bool


@dataclass
class BoundaryBranch:
    """Boundary points of one kind; every column has one entry per point."""

    kind: str
    order: int
    theta: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    omega: np.ndarray
    lam: np.ndarray
    residual: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in BRANCH_KINDS:
            raise ValueError(f"unknown branch kind {self.kind!r}")
        cols = [np.asarray(c, dtype=float).ravel() for c in (self.theta, self.a0, self.a1, self.omega, self.lam, self.residual)]
        if len({len(c) for c in cols}) != 1:
            raise ValueError("branch columns must have equal length")
        self.theta, self.a0, self.a1, self.omega, self.lam, self.residual = cols

    @classmethod
    def from_rows(cls, kind, order, rows, meta=None):
        arr = np.array(rows, dtype=float).reshape(-1, 6)
        return cls(kind, order, *arr.T, meta=dict(meta or {}))

    def __len__(self):
        return len(self.theta)

    @property
    def points(self) -> np.ndarray:
        """(theta, a1) pairs, or (theta, a0) for the a0-valued kinds."""
        second = self.a0 if self.meta.get("value") == "a0" else self.a1
        return np.column_stack([self.theta, second])

    def rows(self):
        for i in range(len(self)):
            vals = (self.theta[i], self.a0[i], self.a1[i], self.omega[i], self.lam[i], self.residual[i])
            yield (self.kind, *(float(v) for v in vals), self.order)


@dataclass(frozen=True)
class QuasiStaticFrequency:
    value: float
    method: str  # "series" or "scan"


@dataclass(frozen=True)
class VertexCResult:
    roots: np.ndarray
    degree_change: bool
    leading: float  # coefficient of (a1/2)^2 in det R


@dataclass(frozen=True)
class ExpPeriodicResult:
    a1_sq: float
    admissible: bool
    asymptotes: tuple  # positive theta^2 roots of the denominator


# ---------------------------------------------------------------------------
# helpers


def _scaled_det(R: np.ndarray) -> complex:
    s = np.abs(R).max()
    if s == 0:
        return 0j
    return det_complex(R / s)


def truncation_residual(coeffs, theta, gamma, a0, a1, mode=PERIODIC, halfwidth=1) -> float:
    """|det R| of the truncation at (a0, a1), computed on R / max|R|."""
    block = coeffs(theta, gamma, mode, halfwidth)
    params = HillParams(a0, a1, theta, gamma)
    return abs(_scaled_det(raw_matrix(params, HillWindow(mode, halfwidth), block)))


def _real_roots(c: np.ndarray, tol=1e-7) -> np.ndarray:
    """Real roots of a real polynomial (highest degree first), leading zeros trimmed."""
    c = np.asarray(c, dtype=float)
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0:
        return np.array([])
    c = c / scale
    nz = np.flatnonzero(np.abs(c) > 1e-14)
    c = c[nz[0]:]
    if len(c) < 2:
        return np.array([])
    r = np.roots(c)
    keep = np.abs(r.imag) <= tol * np.maximum(1.0, np.abs(r.real))
    return np.sort(r[keep].real)


def _polish_real_root(c, r):
    """One or two Newton steps on a real polynomial; guards against np.roots noise."""
    dc = np.polyder(c)
    for _ in range(3):
        d = np.polyval(dc, r)
        if d == 0:
            break
        r = r - np.polyval(c, r) / d
    return r


# ---------------------------------------------------------------------------
# quasi-static values and frequencies


def quasi_static_a0(coeffs, theta: float, omega_p: float, tol: float = TOL):
    """a0* = w'^2 + K_00(theta, i w') and whether it is real (admissible)."""
    block = coeffs(theta, 1j * omega_p, PERIODIC, 0)
    val = complex(omega_p**2 + block[0, 0])
    return val, abs(val.imag) <= tol * max(1.0, abs(val))


def quasi_static_frequencies(k: MemoryKernel, omega_max: float | None = None, n_scan: int = 2000):
    """Quasi-static frequencies w' from the moment series and from a root scan.

    The series keeps three moments, A0 - A1 w^2 + A2 w^4 = 0. The scan looks
    for sign changes of the sine transform of K^ on (0, omega_max], with
    omega_max = pi by default.
    """
    out = []
    A = moments(k, 2)
    A0, A1, A2 = A[0], A[1], A[2]
    scale = max(abs(A0), abs(A1), abs(A2))
    if scale > 0:
        if abs(A2) > 1e-14 * scale:
            disc = A1**2 - 4 * A0 * A2
            if disc >= 0:
                for sgn in (1, -1):
                    X = (A1 + sgn * math.sqrt(disc)) / (2 * A2)
                    if X > 0:
                        out.append(QuasiStaticFrequency(math.sqrt(X), "series"))
        elif abs(A1) > 1e-14 * scale:
            X = A0 / A1
            if X > 0:
                out.append(QuasiStaticFrequency(math.sqrt(X), "series"))
    wmax = math.pi if omega_max is None else omega_max
    grid = np.linspace(0, wmax, n_scan + 1)[1:]
    S = np.asarray(sine_transform(k, grid))
    if np.any(S != 0):
        for i in np.flatnonzero(np.sign(S[:-1]) * np.sign(S[1:]) < 0):
            root = optimize.brentq(lambda w: sine_transform(k, w), grid[i], grid[i + 1], xtol=1e-14)
            out.append(QuasiStaticFrequency(float(root), "scan"))
        for i in np.flatnonzero(S == 0):
            out.append(QuasiStaticFrequency(float(grid[i]), "scan"))
    # dedupe by method, sort by value
    seen = set()
    uniq = []
    for q in sorted(out, key=lambda q: (q.method, q.value)):
        key = (q.method, round(q.value, 12))
        if key not in seen:
            seen.add(key)
            uniq.append(q)
    return uniq


# ---------------------------------------------------------------------------
# quadratics in a1


def periodic_quadratic(block, theta: float, gamma: complex, a0: float) -> QuadraticComplex:
    """C0 + C1 a1 + C2 a1^2 = -det R for the 3x3 periodic truncation at shift gamma."""
    K = block.sub([-1, 0, 1])
    p = (1j * np.array([-1, 0, 1]) * theta + complex(gamma)) ** 2
    dm, d0, dp = (K[i, i] - p[i] - a0 for i in range(3))
    km0, kmp = K[0, 1], K[0, 2]
    k0m, k0p = K[1, 0], K[1, 2]
    kpm, kp0 = K[2, 0], K[2, 1]
    C2 = 0.25 * (dm + dp - kpm - kmp)
    C1 = -0.5 * (dm * (kp0 + k0p) + dp * (km0 + k0m) - kpm * (km0 + k0p) - kmp * (kp0 + k0m))
    C0 = -(dm * d0 * dp - dm * k0p * kp0 - dp * km0 * k0m + km0 * k0p * kpm + kmp * k0m * kp0 - d0 * kmp * kpm)
    return QuadraticComplex(complex(C0), complex(C1), complex(C2))


def periodic_3x3_coeffs(coeffs, theta: float, omega_p: float, a0: float) -> QuadraticComplex:
    """Quadratic in a1 from the 3x3 periodic truncation at gamma = i w'."""
    gamma = 1j * omega_p
    return periodic_quadratic(coeffs(theta, gamma, PERIODIC, 1), theta, gamma, a0)


def antiperiodic_quadratic(block, theta: float, gamma: complex, a0: float) -> QuadraticComplex:
    """Monic quadratic a1^2 + C1 a1 + C0 = -4 det R~ for the 2x2 antiperiodic truncation."""
    K = block.sub([-1, 0])
    p = (1j * np.array([-0.5, 0.5]) * theta + complex(gamma)) ** 2
    dm = K[0, 0] - p[0] - a0
    d0 = K[1, 1] - p[1] - a0
    C1 = -2.0 * (K[0, 1] + K[1, 0])
    C0 = 4.0 * (K[0, 1] * K[1, 0] - dm * d0)
    return QuadraticComplex(complex(C0), complex(C1), 1.0 + 0j)


def real_root_test(q: QuadraticComplex, tol: float = TOL) -> RealRootReport:
    """Real roots of a complex quadratic, via the eliminant of its real and imaginary parts.

    Q1 is the resultant of Re P and Im P; Q2 the discriminant of Re P. When
    Re C2 and Im C2 are both nonzero a real root exists iff Q2 >= 0 and Q1 = 0;
    otherwise real roots are extracted directly.
    """
    r0, r1, r2 = q.C0.real, q.C1.real, q.C2.real
    i0, i1, i2 = q.C0.imag, q.C1.imag, q.C2.imag
    Q1 = (r2 * i0 - r0 * i2) ** 2 - (r2 * i1 - r1 * i2) * (r1 * i0 - r0 * i1)
    Q2 = r1**2 - 4 * r0 * r2
    s = q.scale
    if s == 0:
        return RealRootReport(0.0, 0.0, True, (), False)
    atol = tol * s

    def residual(a):
        return abs(q(a)) / (s * max(1.0, abs(a)) ** 2)

    candidates = []
    for poly in (np.array([r2, r1, r0]), np.array([i2, i1, i0])):
        if np.abs(poly).max() > atol:
            candidates.extend(_real_roots(poly))
    criterion = abs(r2) > atol and abs(i2) > atol
    if criterion:
        # the common root, if any, solves i2 Re P - r2 Im P = 0 (linear in a1)
        lin = i2 * r1 - r2 * i1
        if abs(lin) > atol * s:
            candidates.append((r2 * i0 - i2 * r0) / lin)
    roots = []
    for a in sorted(candidates):
        if residual(a) <= tol and not any(abs(a - b) <= 1e-7 * max(1.0, abs(b)) for b in roots):
            roots.append(float(a))
    if criterion:
        has = Q2 >= -atol * s and abs(Q1) <= tol * s**4
        # tolerance edge: keep the report self-consistent
        has = has and bool(roots)
    else:
        has = bool(roots)
    return RealRootReport(float(Q1), float(Q2), has, tuple(roots if has else ()), criterion)


def antiperiodic_2x2_roots(coeffs, theta: float, omega_p: float, a0: float, tol: float = TOL) -> np.ndarray:
    """Real a1 for which the 2x2 antiperiodic truncation at gamma = i w' is singular.

    At w' = 0 uses  a1/2 = Re K~_{0,-1} +- sqrt(|a0 - theta^2/4 - K~_{-1,-1}|^2 - (Im K~_{0,-1})^2);
    an empty array means the square root is imaginary.
    """
    gamma = 1j * omega_p
    block = coeffs(theta, gamma, ANTIPERIODIC, 1)
    if omega_p == 0:
        z = block[0, -1]
        w = a0 - theta**2 / 4 - block[-1, -1]
        disc = abs(w) ** 2 - z.imag**2
        if disc < 0:
            return np.array([])
        r = math.sqrt(disc)
        return np.unique(np.array([2 * (z.real - r), 2 * (z.real + r)]))
    rep = real_root_test(antiperiodic_quadratic(block, theta, gamma, a0), tol)
    return np.array(rep.roots)


# ---------------------------------------------------------------------------
# resultants and common-root scans


def _sylvester_matrix(f, g):
    f = np.asarray(f)
    g = np.asarray(g)
    m, n = len(f) - 1, len(g) - 1
    S = np.zeros((m + n, m + n), dtype=np.result_type(f, g, float))
    for i in range(n):
        S[i, i : i + m + 1] = f
    for i in range(m):
        S[n + i, i : i + n + 1] = g
    return S


def sylvester_resultant(p, q, trim: bool = True) -> float:
    """Res(p, q) = lc(q)^deg(p) * prod p(roots of q), as a Sylvester determinant.

    Coefficients are highest degree first. With ``trim=False`` the nominal
    degrees are kept even if leading coefficients vanish (useful in scans).
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if trim:
        p = np.trim_zeros(p, "f")
        q = np.trim_zeros(q, "f")
    if p.size == 0 or q.size == 0 or not np.any(p) or not np.any(q):
        raise ValueError("resultant of a zero polynomial is undefined")
    if len(p) < 2 or len(q) < 2:
        raise ValueError("resultant needs polynomials of degree >= 1")
    # det Syl(q, p) puts q's rows first, which gives the lc(q)^deg(p) convention
    return float(np.linalg.det(_sylvester_matrix(q, p)))


def _normalized(c):
    c = np.asarray(c, dtype=float)
    s = np.abs(c).max()
    return c / s if s > 0 else c


def _common_root_scan(pair_at, theta_grid, tol=TOL):
    """ϑ-roots of Res(p, q) by sign change + Brent, then common real roots.

    ``pair_at(theta) -> (p, q)`` returns two real coefficient arrays.
    Returns a list of (theta, a1, mismatch) triples.
    """
    theta_grid = np.asarray(theta_grid, dtype=float)

    def res(th):
        p, q = (_normalized(c) for c in pair_at(th))
        if not np.any(p) or not np.any(q):
            return 0.0  # an identically vanishing determinant shares every root
        return sylvester_resultant(p, q, trim=False)

    vals = np.array([res(th) for th in theta_grid])
    found = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0):
        a, b = theta_grid[i], theta_grid[i + 1]
        if vals[i] == 0:
            th = a
        elif vals[i + 1] == 0:
            continue  # picked up as the left end of the next interval
        else:
            th = optimize.brentq(res, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        p, q = (_normalized(c) for c in pair_at(th))
        if not np.any(p):
            p, q = q, p
        for r in _real_roots(p):
            r = _polish_real_root(p, r)
            mismatch = abs(np.polyval(q, r)) / max(1.0, abs(r)) ** (len(q) - 1)
            if mismatch <= 1e3 * tol:
                found.append((float(th), float(r), float(mismatch)))
    return found


def side_real_case_first_order(coeffs, lam: float, theta_grid, tol: float = TOL) -> BoundaryBranch:
    """1x1 truncations at gamma = 0 and gamma = -lambda.

    The pair K_00(theta, 0) - a0 = 0 and K_00(theta, -lambda) - lambda^2 - a0 = 0
    gives theta* from g(theta) = K_00(theta, 0) - K_00(theta, -lambda) + lambda^2
    and a0* = K_00(theta*, 0). If g vanishes on the whole grid the branch is
    marked indeterminate and carries a0* at every grid point.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    theta_grid = np.asarray(theta_grid, dtype=float)

    def g(th):
        k0 = coeffs(th, 0.0, PERIODIC, 0)[0, 0]
        kl = coeffs(th, -lam, PERIODIC, 0)[0, 0]
        return float((k0 - kl).real + lam**2)

    def a0_of(th):
        return float(coeffs(th, 0.0, PERIODIC, 0)[0, 0].real)

    vals = np.array([g(th) for th in theta_grid])
    meta = {"value": "a0", "lambda": lam}
    scale = max(1.0, lam**2)
    if np.all(np.abs(vals) <= tol * scale):
        meta["indeterminate"] = True
        rows = [(th, a0_of(th), np.nan, 0.0, lam, abs(v)) for th, v in zip(theta_grid, vals)]
        return BoundaryBranch.from_rows("sideAC", 1, rows, meta)
    rows = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        th = optimize.brentq(g, theta_grid[i], theta_grid[i + 1], xtol=1e-14)
        rows.append((th, a0_of(th), np.nan, 0.0, lam, abs(g(th))))
    for i in np.flatnonzero(vals == 0):
        rows.append((theta_grid[i], a0_of(theta_grid[i]), np.nan, 0.0, lam, 0.0))
    if not rows:
        meta["diagnostic"] = "no sign change on the theta grid"
    return BoundaryBranch.from_rows("sideAC", 1, sorted(rows), meta)


def _periodic_real_poly(coeffs, theta, gamma, a0):
    q = periodic_quadratic(coeffs(theta, gamma, PERIODIC, 1), theta, gamma, a0)
    return q.real_part()


def _antiperiodic_real_poly(coeffs, theta, gamma, a0):
    q = antiperiodic_quadratic(coeffs(theta, gamma, ANTIPERIODIC, 1), theta, gamma, a0)
    return q.real_part()


def _branch_from_common(kind, order, found, coeffs, a0, lam, checks, meta):
    rows = []
    for th, a1, _ in found:
        res = max(truncation_residual(coeffs, th, g, a0, a1, mode, hw) for g, mode, hw in checks)
        rows.append((th, a0, a1, 0.0, lam, res))
    if not rows:
        meta = dict(meta, diagnostic="no common real root bracketed on the theta grid")
    return BoundaryBranch.from_rows(kind, order, rows, meta)


def side_real_case_third_order(coeffs, a0: float, lam: float, theta_grid, tol: float = TOL) -> BoundaryBranch:
    """Periodic + damped periodic pair: 3x3 truncations at gamma = 0 and gamma = -lambda."""
    if not lam > 0:
        raise ValueError("lambda must be positive")

    def pair(th):
        return _periodic_real_poly(coeffs, th, 0.0, a0), _periodic_real_poly(coeffs, th, -lam, a0)

    found = _common_root_scan(pair, theta_grid, tol)
    checks = [(0.0, PERIODIC, 1), (-lam, PERIODIC, 1)]
    return _branch_from_common("sideAC", 3, found, coeffs, a0, lam, checks, {"lambda": lam})


def _circle(block, theta, gamma, a0):
    z = block[0, -1]
    w = a0 + (complex(gamma) - 0.5j * theta) ** 2 - block[-1, -1]
    return z, abs(w)


def antiperiodic_circles(coeffs, a0: float, lam: float, theta: float, tol: float = 1e-10) -> np.ndarray:
    """Common real-axis crossings a1 of the two circles |a1/2 - z(gamma)| = R(gamma), gamma in {0, -lambda}.

    Circle centre z = K~_{0,-1}(theta, gamma), radius
    R = |a0 + (gamma - i theta/2)^2 - K~_{-1,-1}(theta, gamma)|.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    sets = []
    for gamma in (0.0, -lam):
        z, R = _circle(coeffs(theta, gamma, ANTIPERIODIC, 1), theta, gamma, a0)
        disc = R**2 - z.imag**2
        if disc < 0:
            return np.array([])
        r = math.sqrt(disc)
        sets.append(np.unique([2 * (z.real - r), 2 * (z.real + r)]))
    common = [a for a in sets[0] if np.any(np.abs(sets[1] - a) <= tol * max(1.0, abs(a)))]
    return np.array(common)


def side_antiperiodic_second_order(coeffs, a0: float, lam: float, theta_grid, tol: float = TOL) -> BoundaryBranch:
    """Antiperiodic + damped antiperiodic pair: 2x2 truncations at gamma = 0 and -lambda."""
    if not lam > 0:
        raise ValueError("lambda must be positive")

    def pair(th):
        return _antiperiodic_real_poly(coeffs, th, 0.0, a0), _antiperiodic_real_poly(coeffs, th, -lam, a0)

    found = _common_root_scan(pair, theta_grid, tol)
    checks = [(0.0, ANTIPERIODIC, 1), (-lam, ANTIPERIODIC, 1)]
    return _branch_from_common("sideAB", 2, found, coeffs, a0, lam, checks, {"lambda": lam})


def vertexA_solve(coeffs, a0: float, theta_grid, tol: float = TOL) -> BoundaryBranch:
    """Coexisting periodic (3x3) and antiperiodic (2x2) solutions at gamma = 0."""

    def pair(th):
        return _periodic_real_poly(coeffs, th, 0.0, a0), _antiperiodic_real_poly(coeffs, th, 0.0, a0)

    found = _common_root_scan(pair, theta_grid, tol)
    checks = [(0.0, PERIODIC, 1), (0.0, ANTIPERIODIC, 1)]
    return _branch_from_common("vertexA", 3, found, coeffs, a0, 0.0, checks, {})


def vertexC_3x3(coeffs, theta: float, a0: float, tol: float = TOL) -> VertexCResult:
    """Periodic solutions at gamma = 0 from the 3x3 truncation.

    ``leading`` is the coefficient of (a1/2)^2 in det R,
    2 Re(K_{-1,1} - (K_11 + theta^2 - a0)); when it vanishes the equation drops
    to first degree.
    """
    q = periodic_quadratic(coeffs(theta, 0.0, PERIODIC, 1), theta, 0.0, a0)
    c = q.real_part()
    leading = -4.0 * c[0]
    scale = np.abs(c).max()
    degree_change = scale == 0 or abs(c[0]) <= tol * scale
    if degree_change:
        roots = np.array([-c[2] / c[1]]) if abs(c[1]) > tol * scale else np.array([])
    else:
        roots = np.array([_polish_real_root(c, r) for r in _real_roots(c)])
    return VertexCResult(roots, bool(degree_change), float(leading))


# ---------------------------------------------------------------------------
# generic truncations of any order


def det_poly_a1(coeffs, theta: float, gamma: complex, a0: float, mode: str, halfwidth: int) -> np.ndarray:
    """Coefficients (highest first) of det R as a polynomial in a1, by interpolation.

    Returned real when gamma is real (the determinant is then real).
    """
    block = coeffs(theta, gamma, mode, halfwidth)
    window = HillWindow(mode, halfwidth)
    n = window.size
    R0 = raw_matrix(HillParams(a0, 0.0, theta, gamma), window, block)
    s = max(1.0, float(np.abs(R0).max()))
    # Chebyshev points keep the Vandermonde solve well conditioned
    nodes = s * np.cos(np.pi * (np.arange(n + 1) + 0.5) / (n + 1))
    vals = np.array([det_complex(raw_matrix(HillParams(a0, a, theta, gamma), window, block)) for a in nodes])
    c = np.linalg.solve(np.vander(nodes, n + 1), vals)
    if complex(gamma).imag == 0:
        return c.real
    return c


def _roots_in_a1(coeffs, theta, a0, mode, halfwidth):
    c = det_poly_a1(coeffs, theta, 0.0, a0, mode, halfwidth)
    return np.array([_polish_real_root(c, r) for r in _real_roots(c)])


# ---------------------------------------------------------------------------
# branch sweeps


def quasistatic_branch(coeffs, theta_grid, omega_grid, tol: float = TOL) -> BoundaryBranch:
    rows = []
    for th in np.asarray(theta_grid, dtype=float):
        for w in np.asarray(omega_grid, dtype=float):
            val, ok = quasi_static_a0(coeffs, th, w, tol)
            if ok:
                res = truncation_residual(coeffs, th, 1j * w, val.real, 0.0, PERIODIC, 0)
                rows.append((th, val.real, np.nan, w, 0.0, res))
    return BoundaryBranch.from_rows("quasistatic", 1, rows, {"value": "a0"})


def periodic_branch(coeffs, a0: float, theta_grid, omega_p: float, tol: float = TOL) -> BoundaryBranch:
    """Real a1 from the 3x3 periodic truncation at gamma = i w' along a theta grid."""
    rows = []
    for th in np.asarray(theta_grid, dtype=float):
        rep = real_root_test(periodic_3x3_coeffs(coeffs, th, omega_p, a0), tol)
        for a1 in rep.roots:
            res = truncation_residual(coeffs, th, 1j * omega_p, a0, a1, PERIODIC, 1)
            rows.append((th, a0, a1, omega_p, 0.0, res))
    return BoundaryBranch.from_rows("periodic", 3, rows)


def antiperiodic_branch(coeffs, a0: float, theta_grid, omega_p: float, tol: float = TOL) -> BoundaryBranch:
    """Real a1 from the 2x2 antiperiodic truncation at gamma = i w' along a theta grid."""
    rows = []
    for th in np.asarray(theta_grid, dtype=float):
        for a1 in antiperiodic_2x2_roots(coeffs, th, omega_p, a0, tol):
            res = truncation_residual(coeffs, th, 1j * omega_p, a0, a1, ANTIPERIODIC, 1)
            rows.append((th, a0, a1, omega_p, 0.0, res))
    return BoundaryBranch.from_rows("antiperiodic", 2, rows)


def vertexB_branch(coeffs, a0: float, theta_grid, halfwidth: int = 1) -> BoundaryBranch:
    """Antiperiodic solutions at gamma = 0; truncation order 2 * halfwidth."""
    rows = []
    for th in np.asarray(theta_grid, dtype=float):
        if halfwidth == 1:
            roots = antiperiodic_2x2_roots(coeffs, th, 0.0, a0)
        else:
            roots = _roots_in_a1(coeffs, th, a0, ANTIPERIODIC, halfwidth)
        for a1 in roots:
            res = truncation_residual(coeffs, th, 0.0, a0, a1, ANTIPERIODIC, halfwidth)
            rows.append((th, a0, a1, 0.0, 0.0, res))
    return BoundaryBranch.from_rows("vertexB", 2 * halfwidth, rows)


def vertexC_branch(coeffs, a0: float, theta_grid, halfwidth: int = 1) -> BoundaryBranch:
    """Periodic solutions at gamma = 0; truncation order 2 * halfwidth + 1."""
    rows = []
    degree_changes = []
    for th in np.asarray(theta_grid, dtype=float):
        if halfwidth == 1:
            vc = vertexC_3x3(coeffs, th, a0)
            roots = vc.roots
            if vc.degree_change:
                degree_changes.append(float(th))
        else:
            roots = _roots_in_a1(coeffs, th, a0, PERIODIC, halfwidth)
        for a1 in roots:
            res = truncation_residual(coeffs, th, 0.0, a0, a1, PERIODIC, halfwidth)
            rows.append((th, a0, a1, 0.0, 0.0, res))
    return BoundaryBranch.from_rows("vertexC", 2 * halfwidth + 1, rows, {"degree_change_theta": degree_changes})


# ---------------------------------------------------------------------------
# closed forms for a single exponential term c exp(-mu (t - s))


def _check_single_term(c, mu):
    if c < 0:
        raise ValueError("closed forms for exponential kernels need c >= 0")
    if not mu > 0:
        raise ValueError("closed forms for exponential kernels need mu > 0")


def exp_periodic_asymptotes(c: float, mu: float, a0: float) -> tuple:
    """Positive theta^2 zeros of c mu + (theta^2 - a0)(mu^2 + theta^2)."""
    _check_single_term(c, mu)
    # X^2 + (mu^2 - a0) X + (c mu - a0 mu^2) = 0 with X = theta^2
    b = mu**2 - a0
    cc = c * mu - a0 * mu**2
    disc = b * b - 4 * cc
    if disc < 0:
        return ()
    r = math.sqrt(disc)
    # numerically stable pair
    q = -0.5 * (b + math.copysign(r, b))
    roots = [q] if q == 0 else [q, cc / q]
    return tuple(sorted(x for x in roots if x > 0))


def alternative_asymptote_formula(c: float, mu: float, a0: float) -> tuple:
    """theta^2 = (a0 - mu^2 +- sqrt((a0 - mu^2)^2 - (2 c mu)^2)) / 2.

    Kept only for comparison: these values do not in general zero the
    denominator c mu + (theta^2 - a0)(mu^2 + theta^2); see
    :func:`exp_periodic_asymptotes` for the actual zeros.
    """
    disc = (a0 - mu**2) ** 2 - (2 * c * mu) ** 2
    if disc < 0:
        return ()
    r = math.sqrt(disc)
    return tuple(sorted(x for x in {0.5 * (a0 - mu**2 - r), 0.5 * (a0 - mu**2 + r)} if x > 0))


def exp_periodic_closed(c: float, mu: float, a0: float, theta: float) -> ExpPeriodicResult:
    """a1^2 on the 3x3 periodic (gamma = 0) boundary for K = c exp(-mu (t - s))."""
    _check_single_term(c, mu)
    u = theta**2 - a0
    E = mu**2 + theta**2
    den = c * mu + u * E
    with np.errstate(divide="ignore", invalid="ignore"):
        a1_sq = 2 * (c / mu - a0) * (u + (c * c + c * mu * u) / den) if den != 0 else math.copysign(math.inf, 1.0)
    return ExpPeriodicResult(float(a1_sq), bool(a1_sq >= 0), exp_periodic_asymptotes(c, mu, a0))


def exp_antiperiodic_closed(c: float, mu: float, a0: float, theta: float, order: int = 2) -> np.ndarray:
    """a1^2 on the antiperiodic (gamma = 0) boundary for K = c exp(-mu (t - s)).

    order 2: a single value. order 4: the real roots of
    X^2/16 - (X/4)(|e1|^2 + 2 Re(e1 e2)) + |e1|^2 |e2|^2 = 0, X = a1^2, where
    e1, e2 are the diagonal entries for the harmonics 3 theta/2 and theta/2.
    """
    _check_single_term(c, mu)
    D1 = mu**2 + theta**2 / 4
    if order == 2:
        return np.array([4.0 / D1**2 * (((a0 - theta**2 / 4) * D1 - c * mu) ** 2 + c * c * theta**2 / 4)])
    if order != 4:
        raise ValueError("order must be 2 or 4")
    D9 = mu**2 + 9 * theta**2 / 4
    e1 = complex(a0 - 9 * theta**2 / 4 - c * mu / D9, -1.5 * c * theta / D9)
    e2 = complex(a0 - theta**2 / 4 - c * mu / D1, -0.5 * c * theta / D1)
    P, Q = abs(e1) ** 2, abs(e2) ** 2
    S = P + 2 * (e1 * e2).real
    # X^2 - 4 S X + 16 P Q = 0
    disc = 16 * S * S - 64 * P * Q
    if disc < 0:
        return np.array([])
    r = math.sqrt(disc)
    hi = 0.5 * (4 * S + math.copysign(r, S)) if S != 0 else 0.5 * r
    lo = 16 * P * Q / hi if hi != 0 else 0.0
    return np.sort(np.array([lo, hi]))
