"""Series algebra tests: truncation identities, norm certification, exp/log,
the rotation-diagonalizing decomposition, and conjugation vs dense grids."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kamlab.errors import LogDomain, NotSl2
from kamlab.fourier import (
    J_MAT,
    M_CHANGE,
    M_CHANGE_INV,
    NormParams,
    TrigPoly,
    adjugate,
    analytic_norm,
    bmr_conversion_check,
    compose_conjugate,
    conj_reflect,
    exp_poly,
    exp_sl2,
    log_poly,
    log_sl2,
    m_decompose,
    m_recompose,
    rot_mat,
    rot_poly,
    truncate,
    poly_to_records,
    poly_from_records,
)


def random_scalar_poly(rng, dim=2, modes=20, radius=4, scale=1.0, real=True):
    coeffs = {}
    for _ in range(modes):
        k = tuple(int(rng.integers(-radius, radius + 1)) for _ in range(dim))
        c = complex(rng.normal(), rng.normal()) * scale
        coeffs[k] = coeffs.get(k, 0) + c
    if real:
        sym = {}
        for k, v in coeffs.items():
            mk = tuple(-x for x in k)
            sym[k] = sym.get(k, 0) + v / 2
            sym[mk] = sym.get(mk, 0) + v.conjugate() / 2
        return TrigPoly(dim, sym, "real-scalar")
    return TrigPoly(dim, coeffs, "complex-scalar")


def random_sl2_poly(rng, dim=2, modes=6, radius=2, scale=0.1):
    a = random_scalar_poly(rng, dim, modes, radius, scale)
    b = random_scalar_poly(rng, dim, modes, radius, scale)
    c = random_scalar_poly(rng, dim, modes, radius, scale)
    return TrigPoly.from_entries(a, b, c, a * -1.0, reality="sl2-real")


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

def test_truncate_single_mode():
    f = TrigPoly.cosine(1, 0)
    assert truncate(f, 2, "low").coeffs == f.coeffs
    assert len(truncate(f, 1, "low")) == 0
    assert truncate(f, 1, "high").coeffs == f.coeffs


def test_truncate_partition_exact():
    rng = np.random.default_rng(7)
    f = random_scalar_poly(rng, dim=2, modes=20)
    for N in (0, 1, 3, 5):
        low, high = truncate(f, N, "low"), truncate(f, N, "high")
        tot = low + high
        assert set(tot.coeffs) == set(f.coeffs)
        for k in f.coeffs:
            assert tot.coeff(k) == f.coeff(k)
        # projections: T T = T, T R = 0
        assert truncate(low, N, "low").coeffs == low.coeffs
        assert len(truncate(high, N, "low")) == 0


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def test_weighted_l1_cosine():
    f = TrigPoly.cosine(1, 0)
    val = analytic_norm(f, NormParams(0.1))
    assert val == pytest.approx(math.exp(0.2 * math.pi))


def test_norm_constant():
    f = TrigPoly.constant(2, -3.5)
    assert analytic_norm(f, NormParams(0.3, 0.2)) == pytest.approx(3.5)
    assert analytic_norm(f, NormParams(0.3, 0.2, "sup-strip")) == pytest.approx(3.5)


def test_weighted_dominates_sup():
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = random_scalar_poly(rng, dim=2, modes=12, radius=3)
        p = NormParams(0.08, 0.05)
        wl1 = analytic_norm(f, p)
        sup = analytic_norm(f, NormParams(0.08, 0.05, "sup-strip"), grid=24)
        assert wl1 >= sup - 1e-12


def test_coefficient_decay_bound():
    rng = np.random.default_rng(11)
    f = random_scalar_poly(rng, dim=1, modes=10, radius=6)
    r = 0.2
    nrm = analytic_norm(f, NormParams(r))
    for k, v in f.coeffs.items():
        assert abs(v) <= nrm * math.exp(-2 * math.pi * abs(k[0]) * r) + 1e-15


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    f = random_scalar_poly(rng, dim=1, modes=6, radius=3)
    g = random_scalar_poly(rng, dim=1, modes=6, radius=3)
    p = NormParams(0.07)
    lhs = analytic_norm(f * g, p)
    rhs = analytic_norm(f, p) * analytic_norm(g, p)
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


def test_bmr_conversion():
    rng = np.random.default_rng(5)
    F = random_sl2_poly(rng, dim=2, modes=5, radius=2, scale=0.3)
    lhs, rhs, ok = bmr_conversion_check(F, r=0.15, r_plus=0.05)
    assert ok


# ---------------------------------------------------------------------------
# constant exp / log
# ---------------------------------------------------------------------------

def _exp_series_oracle(F, terms=30):
    acc = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, terms + 1):
        term = term @ F / k
        acc = acc + term
    return acc


def test_exp_sl2_zero_and_quarter_turn():
    assert np.allclose(exp_sl2(np.zeros((2, 2))), np.eye(2))
    out = exp_sl2((math.pi / 2) * J_MAT)
    assert np.allclose(out, np.array([[0.0, 1.0], [-1.0, 0.0]]), atol=1e-14)


def test_exp_log_roundtrip_random():
    rng = np.random.default_rng(2)
    for _ in range(40):
        F = rng.normal(size=(2, 2))
        F[1, 1] = -F[0, 0]
        F *= 0.38 / max(1.0, np.linalg.norm(F, 2))
        A = exp_sl2(F)
        assert abs(np.linalg.det(A) - 1) < 1e-14
        assert np.allclose(A, _exp_series_oracle(F), atol=1e-13)
        back = log_sl2(np.real(A))
        assert np.max(np.abs(back - F)) < 1e-12


def test_log_domain_guard():
    with pytest.raises(LogDomain):
        log_sl2(np.array([[2.0, 0.0], [0.0, 0.5]]))


def test_exp_sl2_trace_guard():
    with pytest.raises(NotSl2):
        exp_sl2(np.array([[1.0, 0.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# decomposition in the rotation basis
# ---------------------------------------------------------------------------

def test_m_matrix_is_unitary_and_diagonalizes_J():
    assert np.allclose(M_CHANGE @ M_CHANGE_INV, np.eye(2), atol=1e-15)
    D = M_CHANGE @ J_MAT @ M_CHANGE_INV
    assert np.allclose(D, np.diag([1j, -1j]), atol=1e-15)


def test_m_decompose_rotation_direction():
    g = TrigPoly.cosine(2, 0)
    F = TrigPoly.from_entries(g * 0.0, g, g * -1.0, g * 0.0, "sl2-real")  # g*J
    fm, w1, w2 = m_decompose(F)
    assert fm.coeffs == g.coeffs
    assert len(w1) == 0 and len(w2) == 0


def test_m_decompose_symmetric_offdiag():
    c = 0.7
    f = TrigPoly.constant(1, c)
    F = TrigPoly.from_entries(f * 0.0, f, f, f * 0.0, "sl2-real")
    fm, w1, w2 = m_decompose(F)
    assert len(fm) == 0
    assert w1.coeff((0,)) == pytest.approx(-1j * c)
    assert w2.coeff((0,)) == pytest.approx(1j * c)


def test_m_roundtrip_and_matrix_identity():
    rng = np.random.default_rng(9)
    F = random_sl2_poly(rng, dim=2, modes=8)
    fm, w1, w2 = m_decompose(F)
    back = m_recompose(fm, w1, w2)
    assert set(back.coeffs) == set(F.coeffs)
    for k in F.coeffs:
        assert np.allclose(back.coeff(k), F.coeff(k), atol=1e-15)
    # reality coupling: w2(k) = conj(w1(-k))
    for k in w1.coeffs:
        mk = tuple(-x for x in k)
        assert w2.coeff(mk) == pytest.approx(w1.coeff(k).conjugate())
    # explicit change-of-basis identity on a grid
    for phi in np.random.default_rng(1).uniform(size=(5, 2)):
        inner = np.array([[1j * fm.evaluate(phi), w1.evaluate(phi)],
                          [w2.evaluate(phi), -1j * fm.evaluate(phi)]])
        lhs = M_CHANGE_INV @ inner @ M_CHANGE
        assert np.allclose(lhs, F.evaluate(phi), atol=1e-12)


def test_m_decompose_rejects_trace():
    f = TrigPoly.constant(1, 1.0)
    F = TrigPoly.from_entries(f, f * 0.0, f * 0.0, f, "general")
    with pytest.raises(NotSl2):
        m_decompose(F)


# ---------------------------------------------------------------------------
# conjugation
# ---------------------------------------------------------------------------

def test_compose_conjugate_identity():
    rng = np.random.default_rng(4)
    A = exp_poly(random_sl2_poly(rng, dim=2, modes=5, scale=0.2))
    B = TrigPoly.constant(2, np.eye(2, dtype=complex), "SL2-real")
    out = compose_conjugate(B, A, alpha=(0.3, 0.7))
    for k in A.coeffs:
        assert np.allclose(out.coeff(k), A.coeff(k), atol=1e-14)


def test_compose_conjugate_constant_rotations_commute():
    A = TrigPoly.constant(2, rot_mat(0.3).astype(complex), "SL2-real")
    B = TrigPoly.constant(2, rot_mat(0.11).astype(complex), "SL2-real")
    out = compose_conjugate(B, A, alpha=(0.2, 0.5))
    assert np.allclose(out.evaluate((0.0, 0.0)), rot_mat(0.3), atol=1e-14)


def test_compose_conjugate_grid_oracle():
    rng = np.random.default_rng(6)
    alpha = np.array([0.381966, 0.414214])
    A = exp_poly(random_sl2_poly(rng, dim=2, modes=5, scale=0.3))
    B = exp_poly(random_sl2_poly(rng, dim=2, modes=4, scale=0.2))
    out = compose_conjugate(B, A, alpha)
    n = 16
    worst = 0.0
    for i in range(n):
        for j in range(n):
            phi = np.array([i / n, j / n])
            lhs = out.evaluate(phi)
            Bs = B.evaluate(phi + alpha)
            rhs = Bs @ A.evaluate(phi) @ np.linalg.inv(B.evaluate(phi))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    assert worst < 1e-10


def test_adjugate_is_pointwise_inverse():
    rng = np.random.default_rng(8)
    B = exp_poly(random_sl2_poly(rng, dim=1, modes=4, scale=0.3))
    adj = adjugate(B)
    for t in (0.0, 0.17, 0.5):
        prod = B.evaluate([t]) @ adj.evaluate([t])
        assert np.allclose(prod, np.eye(2), atol=1e-12)


# ---------------------------------------------------------------------------
# series exp / log / rotations
# ---------------------------------------------------------------------------

def test_exp_log_poly_roundtrip():
    rng = np.random.default_rng(12)
    F = random_sl2_poly(rng, dim=2, modes=6, scale=0.01)
    E = exp_poly(F)
    back = log_poly(E)
    p = NormParams(0.02)
    diff = analytic_norm(back - F, p)
    assert diff < 1e-12


def test_rot_poly_matches_pointwise():
    g = TrigPoly.cosine(2, 0, 0.4)
    R = rot_poly(g, rho0=0.27)
    for phi in np.random.default_rng(3).uniform(size=(6, 2)):
        gval = g.evaluate(phi).real
        expected = rot_mat(0.27 + gval / (2 * math.pi))
        assert np.allclose(R.evaluate(phi), expected, atol=1e-13)


def test_conj_reflect_is_conjugation_on_real_torus():
    rng = np.random.default_rng(14)
    f = random_scalar_poly(rng, dim=2, modes=8, real=False)
    g = conj_reflect(f)
    for phi in np.random.default_rng(4).uniform(size=(4, 2)):
        assert g.evaluate(phi) == pytest.approx(f.evaluate(phi).conjugate())


def test_records_roundtrip():
    rng = np.random.default_rng(15)
    F = random_sl2_poly(rng, dim=2, modes=5)
    header, rows = poly_to_records(F)
    back = poly_from_records(header, rows)
    assert set(back.coeffs) == set(F.coeffs)
    for k in F.coeffs:
        assert np.allclose(back.coeff(k), F.coeff(k))
