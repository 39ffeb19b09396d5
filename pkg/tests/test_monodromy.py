import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strutt import UnsupportedKernelError
from strutt import monodromy as md
from strutt.kernels import ExpSumKernel, zero_kernel

from conftest import modulated_kernel
from oracles import harmonic_monodromy, ivp_monodromy

TWO_PI = 2 * math.pi


def test_embed_dimension_and_coupling(zero):
    s = md.embed(ExpSumKernel([(0.5, 1.0)]), 1.0, 0.3, 1.0)
    assert s.dim == 3 and s.T == pytest.approx(TWO_PI)
    A = s.matrix(0.0)
    assert A[1].tolist() == pytest.approx([-1.3, 0, 1])
    assert A[2].tolist() == pytest.approx([0.5, 0, -1])
    s0 = md.embed(ExpSumKernel([(0.0, 2.0)]), 1.0, 0.0, 1.0)
    assert s0.matrix(0.3)[2, 0] == 0  # x no longer feeds the memory mode
    assert md.embed(zero, 1.0, 0.0, 1.0).dim == 2


def test_embed_rejects_general_kernels():
    with pytest.raises(UnsupportedKernelError):
        md.embed(modulated_kernel(), 1.0, 0.0, 1.0)
    with pytest.raises(UnsupportedKernelError):
        md.scan_chart(modulated_kernel(), 1.0, [1.0], [0.0])


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(0.3, 3)), min_size=1, max_size=3), st.floats(-2, 3))
@settings(max_examples=25)
def test_frozen_spectrum(terms, a0):
    # eigenvalues s of the frozen system solve s^2 + a0 - sum c/(mu + s) = 0
    s = md.embed(ExpSumKernel(terms), a0, 0.0, 1.0)
    for ev in np.linalg.eigvals(s.matrix(0.0)):
        if not all(abs(mu + ev) > 1e-6 for _, mu in terms):
            continue
        f = ev**2 + a0 - sum(c / (mu + ev) for c, mu in terms)
        scale = abs(ev) ** 2 + abs(a0) + sum(abs(c / (mu + ev)) for c, mu in terms)
        # near-defective matrices (a0 ~ 0, c ~ 0) give eigenvalues only to sqrt(eps); the residual floor is ~eps
        assert abs(f) <= 1e-8 * scale + 1e-12


def test_double_integrator(zero):
    M = md.integrate_period(md.embed(zero, 0.0, 0.0, 1.0))
    assert M == pytest.approx(np.array([[1, TWO_PI], [0, 1]]), abs=1e-10)


@pytest.mark.parametrize("a0, p", [(1.0, -2.0), (0.25, 2.0)])
def test_harmonic_vertices(zero, a0, p):
    r = md.monodromy(md.embed(zero, a0, 0.0, 1.0))
    assert r.M == pytest.approx(harmonic_monodromy(a0, TWO_PI), abs=1e-10)
    assert (r.p, r.q) == pytest.approx((p, 1.0), abs=1e-9)
    assert r.region == ("vertexC" if p < 0 else "vertexB")
    assert r.classification == "Boundary" and r.label.startswith("Boundary(vertex")


def test_hyperbolic_is_unstable(zero):
    r = md.monodromy(md.embed(zero, -1.0, 0.0, 1.0))
    assert r.classification == "Unstable"
    assert sorted(np.abs(r.multipliers)) == pytest.approx([math.exp(-TWO_PI), math.exp(TWO_PI)], rel=1e-8)


def test_damped_memory_is_stable():
    r = md.monodromy(md.embed(ExpSumKernel([(0.5, 1.0)]), 1.0, 0.0, 1.0))
    assert r.classification == "Stable" and r.spectral_radius < 1


def test_rk4_matches_adaptive_integrator():
    s = md.embed(ExpSumKernel([(0.6, 1.3), (-0.2, 2.5)]), 0.9, 0.7, 1.4)
    assert md.integrate_period(s) == pytest.approx(ivp_monodromy(s), abs=1e-9)


@given(
    st.lists(st.tuples(st.floats(-1, 1), st.floats(0.5, 2)), max_size=2),
    st.floats(-1, 2),
    st.floats(-1, 1),
    st.floats(0.8, 3),
)
@settings(max_examples=20)
def test_liouville(terms, a0, a1, theta):
    k = ExpSumKernel(terms)
    s = md.embed(k, a0, a1, theta)
    M = md.integrate_period(s)
    expected = math.exp(-sum(mu for _, mu in terms) * s.T)
    assert np.linalg.det(M) == pytest.approx(expected, rel=1e-8, abs=1e-14)


@given(st.floats(-1, 2), st.floats(-1, 1), st.floats(0.8, 3), st.floats(0.5, 2))
@settings(max_examples=10)
def test_memoryless_q_is_one(a0, a1, theta, mu):
    r = md.monodromy(md.embed(ExpSumKernel([(0.0, mu)]), a0, a1, theta))
    assert abs(np.linalg.det(r.M[:2, :2]) - 1) <= 1e-8
    # the dominant pair is the x-block pair unless the memory multiplier e^{-mu T} outgrows one of them
    x_pair = np.abs(np.linalg.eigvals(r.M[:2, :2]))
    if x_pair.min() > 1.01 * math.exp(-mu * 2 * math.pi / theta):
        assert abs(r.q - 1) <= 1e-8


def test_step_doubling_converges():
    k = ExpSumKernel([(0.5, 1.0)])
    M1, n1 = md.integrate_batch(k, [1.0], [0.4], [2.0], steps=64, tol=1e-10)
    M2, _ = md.integrate_batch(k, [1.0], [0.4], [2.0], steps=8192, tol=None)
    assert n1 > 64 and M1[0] == pytest.approx(M2[0], abs=1e-9)


def test_subdominance_warning():
    # strongly damped oscillation: the third multiplier is comparable to the dominant pair
    s = md.embed(ExpSumKernel([(0.5, 1.0), (0.3, 1.5)]), 1.0, 0.0, 1.0)
    with pytest.warns(RuntimeWarning, match="subdominant"):
        md.monodromy(s)


@pytest.mark.parametrize(
    "pq, label",
    [
        ((0, -1), "vertexA"),
        ((2, 1), "vertexB"),
        ((-2, 1), "vertexC"),
        ((0, 0), "stable"),
        ((3, 0), "unstable"),
        ((1.5, 0.5), "sideAB"),
        ((-1.5, 0.5), "sideAC"),
        ((0.5, 1), "sideBC"),
        ((0, 2), "unstable"),
    ],
)
def test_classify_pq(pq, label):
    assert md.classify_pq(*pq, tol=1e-12) == label


@given(st.fractions(-3, 3, max_denominator=20), st.fractions(-2, 2, max_denominator=20))
def test_classify_pq_rational_points(p, q):
    p, q = float(p), float(q)
    on_edge = abs(abs(p) - (1 + q)) < 1e-9 or abs(abs(q) - 1) < 1e-9
    label = md.classify_pq(p, q, tol=1e-12)
    if not on_edge:
        assert label == ("stable" if abs(q) < 1 and abs(p) < 1 + q else "unstable")


def test_wellposedness_examples():
    w = md.check_wellposedness(0.0, 0.9, 2.0)
    assert w.well_posed and w.gamma_star == pytest.approx(1.0, abs=1e-6) and w.g_min == pytest.approx(0.9)
    w = md.check_wellposedness(0.0, 1.1, 2.0)
    assert not w.well_posed and w.g_min == pytest.approx(1.1)
    assert not md.check_wellposedness(2.5, 0.1, 2.0).well_posed
    assert md.check_wellposedness(1.0, 1.0, 2.0).a4_literal
    assert not md.check_wellposedness(0.5, 1.0, 2.0).a4_literal
    with pytest.raises(ValueError):
        md.check_wellposedness(-1, 0, 1)


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0.1, 5))
def test_wellposedness_against_grid_minimum(Cf, Cg, mu):
    w = md.check_wellposedness(Cf, Cg, mu)
    x = np.linspace(mu * 1e-4, mu * (1 - 1e-4), 20001)
    g = Cf / x + Cg / (x * (mu - x))
    assert w.g_min <= g.min() * (1 + 1e-9) + 1e-12
    if g.min() < 1 - 1e-6:
        assert w.well_posed


# ---------------------------------------------------------------------------
# charts


def test_chart_zero_kernel_harmonic_row():
    a0 = 1.0
    th = np.array([0.5, 0.7, 1.0, 1.3, 2.0, 2.5, 2.9])
    ch = md.scan_chart(zero_kernel(), a0, th, [0.0])
    for t, cls in zip(th, ch.classes[0]):
        resonant = abs(math.sin(math.sqrt(a0) * TWO_PI / t)) < 1e-9
        assert cls == ("Boundary" if resonant else "Stable")


def test_chart_negative_a0_unstable():
    ch = md.scan_chart(zero_kernel(), -0.5, [1.0, 2.0], [0.0])
    assert set(ch.classes.ravel()) == {"Unstable"}


def test_chart_first_tongue_zero_kernel():
    # classical tongue a0 = theta^2/4 -+ a1/2 at a0 = 1: theta = 2 sqrt(1 -+ a1/2)
    # (first-order in a1, so the band is kept small; grid step 0.01 in theta)
    ch = md.scan_chart(zero_kernel(), 1.0, (1.6, 2.4), (0.04, 0.2), resolution=(81, 5))
    for i, a in enumerate(ch.a1):
        unstable = ch.theta[ch.classes[i] == "Unstable"]
        lo, hi = 2 * math.sqrt(1 - a / 2), 2 * math.sqrt(1 + a / 2)
        assert unstable.min() == pytest.approx(lo, abs=0.011)
        assert unstable.max() == pytest.approx(hi, abs=0.011)


def test_chart_polylines_between_differing_cells():
    ch = md.scan_chart(ExpSumKernel([(0.5, 1.0)]), 1.0, (1.5, 2.5), (0.0, 1.0), resolution=24)
    assert ch.polylines
    dt, da = np.diff(ch.theta)[0], np.diff(ch.a1)[0]
    for line in ch.polylines:
        assert line["label"] in ("sideAB", "sideAC", "sideBC", "boundary")
        for th, a in line["points"]:
            j = min(int((th - ch.theta[0]) // dt + 1e-9), len(ch.theta) - 2)
            i = min(int((a - ch.a1[0]) // da + 1e-9), len(ch.a1) - 2)
            jj = [j, j + 1] if abs(th - ch.theta[j]) > 1e-12 else [j]
            ii = [i, i + 1] if abs(a - ch.a1[i]) > 1e-12 else [i]
            cells = {ch.classes[r, c] for r in ii for c in jj}
            assert len(cells) > 1


def test_chart_deterministic_and_shapes():
    args = (ExpSumKernel([(0.5, 1.0)]), 1.0, (1.5, 2.5), (0.0, 1.0))
    a = md.scan_chart(*args, resolution=(7, 5))
    b = md.scan_chart(*args, resolution=(7, 5))
    assert a.shape == (5, 7) and np.array_equal(a.p, b.p) and np.array_equal(a.classes, b.classes)
    assert len(list(a.rows())) == 35


def test_chart_empty_and_invalid():
    k = ExpSumKernel([(0.5, 1.0)])
    e = md.scan_chart(k, 1.0, (2.0, 1.0), (0.0, 1.0), resolution=5)
    assert e.shape == (5, 0) and e.polylines == []
    with pytest.raises(ValueError):
        md.scan_chart(k, 1.0, (1.0, 2.0), (0.0, 1.0), resolution=0)


def test_vertexB_points_are_near_the_unit_circle():
    from strutt.boundaries import vertexB_branch
    from strutt.quadrature import CoefficientSource

    k = ExpSumKernel([(0.5, 1.0)])
    b = vertexB_branch(CoefficientSource(k, "closed"), 1.0, [2.0], 4)
    small = np.abs(b.a1) <= 1
    assert small.sum() == 2
    for th, a1 in zip(b.theta[small], b.a1[small]):
        r = md.monodromy(md.embed(k, 1.0, a1, th))
        assert abs(r.spectral_radius - 1) < 1e-6
