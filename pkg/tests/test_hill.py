import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from strutt import ComplexityGuardError, DegenerateShiftError, DomainError
from strutt.hill import (
    HillParams,
    HillWindow,
    build_D,
    build_Dtilde,
    build_hill,
    det_complex,
    koch_norm,
    multiindex_expansion,
    raw_matrix,
    row_scales,
    split_CS,
)
from strutt.kernels import ANTIPERIODIC, PERIODIC, ExpSumKernel
from strutt.quadrature import CoefficientSource

from conftest import modulated_kernel
from oracles import cofactor_det, permutation_det


def complex_matrix(n, seed):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def test_window_validation():
    assert HillWindow(PERIODIC, 0).size == 1
    assert HillWindow(ANTIPERIODIC, 2).size == 4
    with pytest.raises(ValueError):
        HillWindow(ANTIPERIODIC, 0)
    with pytest.raises(ValueError):
        HillWindow("quasi", 1)
    with pytest.raises(ValueError):
        HillParams(1, 0, 0.0)


def test_zero_kernel_periodic_matrix_with_exceptional_row(zero_src):
    a0, a1, th = 1.3, 0.4, 2.0
    D = build_D(HillParams(a0, a1, th, 0), HillWindow(PERIODIC, 1), zero_src(th, 0, PERIODIC, 1))
    assert D.exceptional_row_applied and D.order == 3
    # exceptional row: -K_0m + a0 delta + a1/2 (delta_{-1,m} + delta_{1,m})
    assert np.allclose(D.entries[1], [a1 / 2, a0, a1 / 2])
    # other rows: delta - (-a0 delta - a1/2 (...)) / (i n theta)^2
    assert np.allclose(D.entries[0], [1 - a0 / th**2, -a1 / (2 * th**2), 0])


def test_zero_kernel_no_modulation_is_diagonal(zero_src):
    th, g = 1.5, 0.2 + 0.1j
    D = build_Dtilde(HillParams(0.0, 0.0, th, g), HillWindow(ANTIPERIODIC, 2), zero_src(th, g, ANTIPERIODIC, 2))
    assert np.allclose(D.entries, np.eye(4))


def test_det_factorization_through_raw_matrix():
    src = CoefficientSource(modulated_kernel(), "quad")
    for mode, g in ((PERIODIC, 0.3j), (PERIODIC, 0.0), (ANTIPERIODIC, -0.2 + 0.4j)):
        p = HillParams(0.9, 0.7, 1.4, g)
        w = HillWindow(mode, 2)
        blk = src(1.4, g, mode, 2)
        lhs = det_complex(build_hill(p, w, blk))
        rhs = np.prod(row_scales(p, w)) * det_complex(raw_matrix(p, w, blk))
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_builders_check_mode_and_parameters(closed11):
    p = HillParams(1, 0, 1.0, 0.0)
    with pytest.raises(ValueError):
        build_D(p, HillWindow(ANTIPERIODIC, 1), closed11(1.0, 0.0, ANTIPERIODIC, 1))
    with pytest.raises(ValueError):
        build_Dtilde(p, HillWindow(PERIODIC, 1), closed11(1.0, 0.0, PERIODIC, 1))
    with pytest.raises(ValueError):
        raw_matrix(p, HillWindow(PERIODIC, 1), closed11(1.5, 0.0, PERIODIC, 1))


def test_degenerate_shift(closed11):
    th = 1.0
    with pytest.raises(DegenerateShiftError):
        build_D(HillParams(1, 0, th, -1j * th), HillWindow(PERIODIC, 1), closed11(th, -1j * th, PERIODIC, 1))
    with pytest.raises(DegenerateShiftError):
        build_Dtilde(HillParams(1, 0, th, 0.5j * th), HillWindow(ANTIPERIODIC, 1), closed11(th, 0.5j * th, ANTIPERIODIC, 1))


@given(st.integers(1, 6), st.integers(0, 10**6))
def test_det_complex_matches_cofactor_expansion(n, seed):
    A = complex_matrix(n, seed)
    ref = cofactor_det(A)
    assert abs(det_complex(A) - ref) <= 1e-11 * max(1.0, abs(ref))


def test_det_complex_small_cases():
    assert det_complex(np.zeros((0, 0))) == 1
    assert det_complex(np.array([[0, 1], [1, 0]])) == -1
    with pytest.raises(ValueError):
        det_complex(np.array([[np.nan]]))


@given(st.integers(1, 7), st.integers(0, 10**6))
def test_multiindex_expansion_equals_determinant(n, seed):
    A = complex_matrix(n, seed)
    ref = det_complex(A)
    assert abs(multiindex_expansion(A.real, A.imag) - ref) <= 1e-12 * max(1.0, abs(ref)) * 10


def test_multiindex_against_permutation_formula():
    A = complex_matrix(4, 7)
    assert np.isclose(multiindex_expansion(A.real, A.imag), permutation_det(A), rtol=1e-12)


def test_multiindex_guard():
    with pytest.raises(ComplexityGuardError):
        multiindex_expansion(np.eye(13), np.zeros((13, 13)))
    with pytest.raises(ValueError):
        multiindex_expansion(np.eye(2), np.eye(3))


def test_split_cs_needs_imaginary_shift(closed11):
    p = HillParams(1, 0.5, 1.0, 0.4j)
    D = build_D(p, HillWindow(PERIODIC, 1), closed11(1.0, 0.4j, PERIODIC, 1))
    DC, DS = split_CS(D)
    assert np.allclose(DC + 1j * DS, D.entries)
    p = HillParams(1, 0.5, 1.0, 0.1 + 0.4j)
    D = build_D(p, HillWindow(PERIODIC, 1), closed11(1.0, p.gamma, PERIODIC, 1))
    with pytest.raises(DomainError):
        split_CS(D)


@given(
    st.lists(st.tuples(st.floats(-1, 1), st.floats(0.5, 3)), min_size=1, max_size=3),
    st.floats(0.5, 3),
    st.floats(0.05, 2),
    st.floats(-1, 2),
    st.floats(-1, 1),
    st.integers(1, 3),
)
def test_conjugate_shift_symmetry(terms, th, w, a0, a1, N):
    # w on a multiple of theta/2 is the singular prefactor, covered by its own error test
    assume(abs(w / (th / 2) - round(w / (th / 2))) > 1e-6)
    src = CoefficientSource(ExpSumKernel(terms), "closed")
    for mode in (PERIODIC, ANTIPERIODIC):
        win = HillWindow(mode, N)
        d1 = det_complex(build_hill(HillParams(a0, a1, th, 1j * w), win, src(th, 1j * w, mode, N)))
        d2 = det_complex(build_hill(HillParams(a0, a1, th, -1j * w), win, src(th, -1j * w, mode, N)))
        assert abs(d2 - np.conj(d1)) <= 1e-10 * max(1.0, abs(d1))


@given(st.floats(0.5, 3), st.floats(-0.5, 0.5), st.floats(-1, 2), st.floats(-1, 1), st.integers(1, 3))
def test_real_shift_gives_real_determinant(th, g, a0, a1, N):
    src = CoefficientSource(modulated_kernel(), "quad")
    for mode in (PERIODIC, ANTIPERIODIC):
        win = HillWindow(mode, N)
        d = det_complex(raw_matrix(HillParams(a0, a1, th, g), win, src(th, g, mode, N)))
        assert abs(d.imag) <= 1e-10 * max(1.0, abs(d))


def test_koch_norm(closed11):
    assert koch_norm(np.eye(3)) == 0
    D = build_D(HillParams(1, 0.5, 2.0, 0.3j), HillWindow(PERIODIC, 4), closed11(2.0, 0.3j, PERIODIC, 4))
    D2 = build_D(HillParams(1, 0.5, 2.0, 0.3j), HillWindow(PERIODIC, 8), closed11(2.0, 0.3j, PERIODIC, 8))
    # rows decay like 1/n^2 so the proxy converges as the window grows
    assert koch_norm(D2) - koch_norm(D) < 0.2
