import math

import numpy as np
import pytest

from slt.errors import NearSingularError, UsageError
from slt.green import (RESOLVENT_SIGN, apply_resolvent, carleman_report, green_eval,
                       green_evaluator, kernel_series)
from slt.grid import StandardGrid, differentiate
from slt.spectral import find_eigenvalues

PI = math.pi
PAIRS = [(x, s) for x in (-2.5, -1.5, -0.5) for s in (0.5, 1.5, 2.5)]


def dirichlet_green_zero(x, s):
    lo, hi = min(x, s), max(x, s)
    return (lo + PI) * (hi - PI) / (2 * PI)


def test_green_closed_form_at_zero(classical, settings):
    g = green_evaluator(classical, 0.0, settings)
    pts = np.linspace(-3.0, 3.0, 5)
    for x in pts:
        for s in pts:
            if x and s:
                assert g(x, s) == pytest.approx(dirichlet_green_zero(x, s), abs=1e-8)
    assert g(-PI / 2, PI / 2) == pytest.approx(-PI / 8, abs=1e-10)


@pytest.mark.parametrize("spec_name,lam", [("classical", 0.5), ("delta", -2.0), ("asymmetric", 3.0)])
def test_green_symmetry(request, settings, spec_name, lam):
    g = green_evaluator(request.getfixturevalue(spec_name), lam, settings)
    x = np.array([-3.0, -1.7, -0.2, 0.4, 1.1, 2.9])
    X, S = np.meshgrid(x, x)
    G = g(X, S)
    assert np.max(np.abs(G - G.T)) < 1e-10


def test_green_broadcasts_and_rejects_interface(classical, settings):
    g = green_evaluator(classical, 0.5, settings)
    assert g(np.array([-1.0, 1.0]), 0.5).shape == (2,)
    with pytest.raises(UsageError):
        green_eval(g, 0.0, 1.0)
    with pytest.raises(UsageError):
        g(4.0, 1.0)


def test_near_eigenvalue_names_the_eigenvalue(classical, settings):
    with pytest.raises(NearSingularError) as exc:
        green_evaluator(classical, 1.0 + 1e-11, settings)
    assert exc.value.nearest == pytest.approx(1.0, abs=1e-9)
    assert "1" in str(exc.value)


def test_green_blows_up_like_inverse_distance(classical, settings):
    # near lambda_n, G ~ phi_n(x) phi_n(s) / (lam - lambda_n)
    a = green_evaluator(classical, 1.0 + 1e-3, settings)(-1.0, 1.5)
    b = green_evaluator(classical, 1.0 + 1e-4, settings)(-1.0, 1.5)
    assert abs(b / a) == pytest.approx(10.0, rel=0.02)


def test_resolvent_closed_form(classical, settings):
    res = apply_resolvent(classical, -1.0, lambda x: np.ones_like(x), settings)
    x = res.output_y.grid.x
    exact = np.cosh(x) / math.cosh(PI) - 1.0
    assert np.max(np.abs(res.output_y.values - exact)) < 1e-6
    assert np.max(np.abs(res.output_dy.values - np.sinh(x) / math.cosh(PI))) < 1e-6
    assert res.residual_norm < 1e-6
    assert max(abs(v) for v in res.condition_residuals) < 1e-6


@pytest.mark.parametrize("spec_name,lam", [("delta", 2.0), ("asymmetric", -1.5), ("asymmetric", 5.3)])
def test_resolvent_solves_problem(request, settings, spec_name, lam):
    spec = request.getfixturevalue(spec_name)
    res = apply_resolvent(spec, lam, lambda x: np.pi ** 2 - x ** 2 + np.sin(3 * x), settings)
    assert res.residual_norm < 1e-6
    assert max(abs(v) for v in res.condition_residuals) < 1e-7


def test_resolvent_sign_minimizes_residual(asymmetric, settings):
    res = apply_resolvent(asymmetric, 2.2, lambda x: 1.0 + x, settings)
    q = res.output_y.grid.sample(lambda x: asymmetric.potential(x))

    def residual(sign):
        y, dy = res.output_y * sign, res.output_dy * sign
        return (differentiate(dy) + (q * -1.0 + 2.2) * y - res.input_f).max_abs()

    assert RESOLVENT_SIGN == 1.0
    assert residual(1.0) < 1e-6
    assert residual(-1.0) > 1.0


def test_resolvent_accepts_grid_function(classical, settings):
    grid = StandardGrid.from_settings(settings)
    f = grid.sample(lambda x: np.cos(x))
    a = apply_resolvent(classical, -0.3, f, settings, grid)
    b = apply_resolvent(classical, -0.3, np.cos, settings, grid)
    assert np.max(np.abs(a.output_y.values - b.output_y.values)) < 1e-9


def test_resolvent_near_eigenvalue(classical, settings):
    with pytest.raises(NearSingularError):
        apply_resolvent(classical, 2.25, np.cos, settings)


@pytest.fixture(scope="module")
def big_spectrum(classical, settings):
    return find_eigenvalues(classical, settings.replace(lambda_max=10100.0, max_eigenvalues=200))


def test_kernel_series_converges(classical, settings, big_spectrum):
    g = green_evaluator(classical, -1.0, settings)
    x, s = np.array(PAIRS).T
    exact = g(x, s)
    e50 = np.abs(kernel_series(big_spectrum, -1.0, 50, x, s) - exact)
    e200 = np.abs(kernel_series(big_spectrum, -1.0, 200, x, s) - exact)
    assert np.all(e200 < 5e-2)
    assert np.all(e200 < e50)


def test_kernel_series_rejects_eigenvalue(big_spectrum):
    with pytest.raises(NearSingularError):
        kernel_series(big_spectrum, 0.25, 5, -1.0, 1.0)


def test_carleman_lhs_and_counting(classical, settings, big_spectrum):
    rep = carleman_report(classical, big_spectrum, -1.0, settings)
    closed = -(2 * PI / math.tanh(2 * PI) - 1) / 2
    assert rep.lhs == pytest.approx(closed, rel=1e-8)
    assert rep.relative_gap < 3e-2
    assert rep.partial_sum(0) == 0.0
    gaps = [abs(rep.partial_sum(n) - rep.lhs) for n in (10, 50, 200)]
    assert gaps == sorted(gaps, reverse=True)
    assert rep.count_at(5.0) == 4 and rep.count_at(16.0) == 8
    assert rep.counting_function[:3] == [(pytest.approx(0.25), 1), (pytest.approx(1.0), 2),
                                         (pytest.approx(2.25), 3)]
    with pytest.raises(UsageError):
        carleman_report(classical, big_spectrum, -1.0, settings, n_terms=201)
