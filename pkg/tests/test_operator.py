from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bslbc.grid import build_sinh_grid, build_uniform_grid
from bslbc.linalg import expm, log_norm_inf, norm_inf
from bslbc.operator import (ModelParams, Scheme, Treatment, assemble,
                            check_stability_condition, coefficients_central_a,
                            coefficients_central_b, coefficients_forward, forward_fraction,
                            mixed_select)

SINH = build_sinh_grid(100.0, 20.0, 400.0, 100)
P = ModelParams(0.1, 0.3, 400.0)
COEFFS = (coefficients_forward, coefficients_central_a, coefficients_central_b)


def test_forward_sigma0():
    p = ModelParams(0.2, 0.0, 400.0)
    j = 10
    s, hp = SINH.s(j), SINH.width(j + 1)
    b, a, g = coefficients_forward(SINH, p, j)
    assert b == 0.0
    assert a == pytest.approx(-0.2 - 0.2 * s / hp)
    assert g == pytest.approx(0.2 * s / hp)


def test_forward_uniform_pure_diffusion():
    g = build_uniform_grid(400.0, 98)
    # r = 0 sits outside ModelParams; the formulas only read r and sigma
    b, a, c = coefficients_forward(g, SimpleNamespace(r=0.0, sigma=0.3), 7)
    d = 0.09 * g.s(7) ** 2
    assert b == pytest.approx(d / (2 * 16.0))
    assert c == pytest.approx(d / (2 * 16.0))
    assert a == pytest.approx(-d / 16.0)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0.0, 0.5), sigma=st.floats(0.0, 1.0), m=st.integers(5, 300),
       frac=st.floats(0.0, 1.0))
def test_row_sums_equal_minus_r(r, sigma, m, frac):
    grid = build_sinh_grid(100.0, 20.0, 400.0, m)
    j = 1 + int(frac * m)
    for f in COEFFS:
        b, a, g = f(grid, SimpleNamespace(r=r, sigma=sigma), j)
        assert abs(b + a + g + r) <= 1e-12 * (abs(a) + abs(b) + abs(g) + r + 1e-300)


def test_central_schemes_agree_on_uniform_grid():
    g = build_uniform_grid(400.0, 60)
    for tr in Treatment:
        A = assemble(g, P, Scheme.CENTRAL_A, tr).dense()
        B = assemble(g, P, Scheme.CENTRAL_B, tr).dense()
        assert np.allclose(A, B, rtol=1e-13, atol=1e-13)


def test_central_b_equals_a_without_advection():
    p = SimpleNamespace(r=0.0, sigma=0.3)
    for j in (1, 40, 101):
        assert np.allclose(coefficients_central_a(SINH, p, j),
                           coefficients_central_b(SINH, p, j))


def test_central_a_downwind_weight_negative_without_diffusion():
    b, _, _ = coefficients_central_a(SINH, ModelParams(0.2, 0.0, 400.0), 30)
    assert b < 0


def test_mixed_is_central_everywhere_for_r01_sigma03():
    for j in range(1, 102):
        assert mixed_select(SINH, P, j, "A") == coefficients_central_a(SINH, P, j), j
        assert mixed_select(SINH, P, j, "B") == coefficients_central_b(SINH, P, j), j


def test_mixed_central_away_from_first_row():
    # at j = 1, s_1 = h_1 so the switch reads r <= sigma^2, false for (0.1, 0.3)
    assert mixed_select(SINH, P, 1, "A") == coefficients_forward(SINH, P, 1)
    for j in range(2, 102):
        assert mixed_select(SINH, P, j, "A") == coefficients_central_a(SINH, P, j)
        assert mixed_select(SINH, P, j, "B") == coefficients_central_b(SINH, P, j)


def test_mixed_is_forward_without_volatility():
    p0 = ModelParams(0.2, 0.0, 400.0)
    for j in range(1, 102):
        assert mixed_select(SINH, p0, j, "A") == coefficients_forward(SINH, p0, j)


def test_mixed_tie_picks_central():
    g = build_uniform_grid(10.0, 8)
    j = 3
    # r = (s_j / h_j) sigma^2 exactly: s_3 = 3, h = 1, sigma^2 = 1/16
    p = ModelParams(3.0 / 16.0, 0.25, 10.0, E=5.0)
    assert mixed_select(g, p, j, "A") == coefficients_central_a(g, p, j)
    assert mixed_select(g, p, j, "B") == coefficients_central_b(g, p, j)


def test_bad_index_and_variant():
    with pytest.raises(IndexError):
        coefficients_forward(SINH, P, 0)
    with pytest.raises(IndexError):
        coefficients_forward(SINH, P, 102)
    with pytest.raises(ValueError):
        mixed_select(SINH, P, 3, "C")


def test_lbc1_boundary_block():
    op = assemble(SINH, P, Scheme.CENTRAL_A, Treatment.LBC1)
    M, m = op.dense(), op.m
    h, s1, S = SINH.h_last, SINH.s(m + 1), 400.0
    row = [-0.1 * S / h, 0.1 * s1 / h]
    assert np.allclose(op.C, [row, row])
    assert M[m, m - 1] == 0.0
    assert np.allclose(op.C @ [s1, S], 0.0, atol=1e-12)
    assert np.allclose(op.C @ [1.0, 1.0], -0.1)


def test_tridiagonal_and_lbc2_rows():
    op = assemble(SINH, P, Scheme.CENTRAL_B, Treatment.LBC2)
    M, m = op.dense(), op.m
    assert np.count_nonzero(np.triu(M, 2)) == 0 and np.count_nonzero(np.tril(M, -2)) == 0
    assert np.allclose(M[m, m - 1:m + 2], coefficients_central_b(SINH, P, m + 1))
    assert op.chosen[m] == "central_b" and op.chosen[m + 1] == "lbc"


@pytest.mark.parametrize("scheme", list(Scheme))
@pytest.mark.parametrize("treatment", list(Treatment))
@pytest.mark.parametrize("grid", [SINH, build_uniform_grid(400.0, 100)], ids=["sinh", "uniform"])
def test_constants_and_linears(scheme, treatment, grid):
    op = assemble(grid, P, scheme, treatment)
    one = np.ones(op.n)
    e1 = np.eye(1, op.n)[0]
    # constants need the Dirichlet coupling at s_0 added back
    assert np.allclose(op.matvec(one) + op.beta1 * e1, -0.1 * one, rtol=0, atol=1e-12)
    s = grid.unknown_nodes
    assert np.max(np.abs(op.matvec(s))) <= 1e-10 * np.max(np.abs(op.dense()) @ s)


def test_source_routes_beta1():
    op = assemble(SINH, P, Scheme.FORWARD, Treatment.LBC1, g0=lambda t: 2.0 + t)
    b = op.source(1.0)
    assert b[0] == pytest.approx(3.0 * op.beta1) and not b[1:].any()
    assert not assemble(SINH, P, Scheme.FORWARD, Treatment.LBC1).source(1.0).any()


def test_assemble_rejects_mismatched_S():
    with pytest.raises(ValueError):
        assemble(SINH, ModelParams(0.1, 0.3, 500.0), "forward", "lbc1")


def test_forward_fraction_values():
    g = build_sinh_grid(100.0, 20.0, 2000.0, 100)
    p = ModelParams(0.3, 0.1, 2000.0)
    assert round(100 * forward_fraction(g, p, "A"), 1) == 57.0
    assert round(100 * forward_fraction(g, p, "B"), 1) == 58.0
    g = build_sinh_grid(100.0, 20.0, 2000.0, 1000)
    assert round(100 * forward_fraction(g, p, "A"), 1) == 2.7


def test_forward_fraction_zero_for_r01_sigma03():
    assert forward_fraction(SINH, P, "A") == 0.0
    assert forward_fraction(SINH, P, "B") == 0.0


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0.01, 0.5), sigma=st.floats(0.0, 0.8), m=st.integers(5, 200),
       uniform=st.booleans())
def test_forward_condition_always_holds(r, sigma, m, uniform):
    g = build_uniform_grid(400.0, m) if uniform else build_sinh_grid(100.0, 20.0, 400.0, m)
    op = assemble(g, ModelParams(r, sigma, 400.0), Scheme.FORWARD, Treatment.LBC1)
    assert check_stability_condition(op).holds


def test_condition_verdicts():
    bad = assemble(SINH, ModelParams(0.2, 0.0, 400.0), Scheme.CENTRAL_A, Treatment.LBC1)
    v = check_stability_condition(bad)
    assert not v.holds and any(x.startswith("log_norm") for x in v.reasons)
    assert str(v).startswith("fails(")
    with pytest.raises(ValueError):
        check_stability_condition(assemble(SINH, P, Scheme.FORWARD, Treatment.LBC2))


def test_central_a_condition_holds_for_r01_sigma03():
    good = assemble(SINH, P, Scheme.CENTRAL_A, Treatment.LBC1)
    assert str(check_stability_condition(good)) == "holds"


@pytest.mark.parametrize("pair", [(0.1, 0.3), (0.3, 0.1), (0.2, 0.0)])
def test_condition_implies_contractive_interior(pair):
    op = assemble(SINH, ModelParams(*pair, 400.0), Scheme.FORWARD, Treatment.LBC1)
    A = op.A
    r = pair[0]
    assert log_norm_inf(A) <= -r + 1e-12
    for t in (0.5, 1.0, 5.0):
        assert norm_inf(expm(t * A)) <= np.exp(-r * t) * (1 + 1e-8)
    beta, alpha, _ = op.interior()
    x = np.linalg.solve(A, np.eye(op.m)[:, -1])
    assert np.max(np.abs(x)) <= 1.0 / (-alpha[-1] - abs(beta[-1])) * (1 + 1e-10)


def test_log_norm_method():
    op = assemble(SINH, P, Scheme.MIXED_A, Treatment.LBC1)
    assert op.log_norm() == pytest.approx(log_norm_inf(op.dense()))


def test_mixed_a_lbc2_collapses_to_forward_lbc1_without_volatility():
    p = ModelParams(0.2, 0.0, 400.0)
    a = assemble(SINH, p, Scheme.MIXED_A, Treatment.LBC2).dense()
    b = assemble(SINH, p, Scheme.FORWARD, Treatment.LBC1).dense()
    assert np.allclose(a, b, rtol=1e-14, atol=0)


def test_operator_csv(tmp_path):
    op = assemble(build_uniform_grid(10.0, 3), ModelParams(0.1, 0.3, 10.0, E=5.0), "mixed_b", "lbc1")
    op.to_csv(tmp_path / "op.csv")
    rows = (tmp_path / "op.csv").read_text().splitlines()
    assert rows[0] == "j,beta_j,alpha_j,gamma_j,chosen_scheme_at_j"
    assert rows[-1].endswith(",0,lbc")
    assert len(rows) == 6
