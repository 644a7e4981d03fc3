import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from conftest import dirichlet_eigenvalues
from slt.errors import DegenerateEigenfunctionError
from slt.grid import StandardGrid, weighted_inner_product
from slt.problem import (CONTINUITY, BoundaryAngles, Potential, ProblemSpec, TransmissionMatrix,
                         classical_dirichlet)
from slt.spectral import (boundary_residuals, build_chi, build_phi, char_value, characteristic,
                          find_eigenvalues, normalize, scan_nodes, transfer_left, transfer_right,
                          transmission_residuals)

PI = math.pi


# -- independent oracles ---------------------------------------------------

def delta_roots(n):
    """Roots of sin(pi s)(2 s cos(pi s) + sin(pi s)) in lambda = s^2, q = 0."""
    def h(s):
        return 2 * s * math.cos(PI * s) + math.sin(PI * s)
    roots = [float(k * k) for k in range(1, n + 1)]
    grid = np.linspace(1e-6, n + 1, 4000 * (n + 1))
    vals = [h(s) for s in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa * fb < 0:
            roots.append(brentq(h, a, b, xtol=1e-14) ** 2)
    return sorted(roots)[:n]


def oracle_w(spec, lam):
    """w = rho34 * W(phi, chi; pi) from solve_ivp and a direct solve of the interface rows."""
    def rhs(side):
        return lambda x, u: [u[1], (spec.potential(x, side=side) - lam) * u[0]]
    al, be = spec.angles.alpha, spec.angles.beta
    left = solve_ivp(rhs("left"), (-PI, 0.0), [math.sin(al), -math.cos(al)],
                     method="DOP853", rtol=1e-13, atol=1e-13).y[:, -1]
    a, b = spec.transmission.row_a, spec.transmission.row_b
    ym, dym = left
    y_plus, dy_plus = np.linalg.solve([[a[3], a[2]], [b[3], b[2]]],
                                      [-(a[0] * dym + a[1] * ym), -(b[0] * dym + b[1] * ym)])
    right = solve_ivp(rhs("right"), (0.0, PI), [y_plus, dy_plus],
                      method="DOP853", rtol=1e-13, atol=1e-13).y[:, -1]
    return spec.rho34 * (right[0] * math.cos(be) + right[1] * math.sin(be))


# -- interface transfer ----------------------------------------------------

@pytest.mark.parametrize("rows", [
    ((0, 1, 0, -1), (-1, 0, 1, 0)),
    ((0, 1, 0, -1), (-1, -1, 1, 0)),
    ((0, 2, 0, -1), (-1, 0, 1, 0)),
    ((1.5, 2, 0.3, -1), (-1, 0.7, 2, 0.4)),
])
def test_transfer_satisfies_both_conditions_and_inverts(rows):
    T = TransmissionMatrix(*rows)
    for state in [(1.0, 0.0), (0.0, 1.0), (0.3, -2.1)]:
        plus = transfer_right(T, state)
        assert transmission_residuals(T, state, plus) == pytest.approx((0, 0), abs=1e-14)
        assert transfer_left(T, plus) == pytest.approx(state, abs=1e-14)


def test_delta_interface_jump(delta, settings):
    phi = build_phi(delta, 2.7, settings)
    (y0, d0), (y1, d1) = phi.at_zero_minus, phi.at_zero_plus
    assert y1 == pytest.approx(y0, abs=1e-15)
    assert d1 == pytest.approx(d0 + y0, abs=1e-14)


def test_phi_chi_initial_data(classical, settings):
    phi = build_phi(classical, 1.3, settings)
    chi = build_chi(classical, 1.3, settings)
    assert phi.at_minus_pi == (0.0, -1.0)
    assert chi.at_pi == (0.0, 1.0)
    spec = ProblemSpec(Potential.constant(0), BoundaryAngles(0.0, PI / 2), CONTINUITY)
    assert build_chi(spec, 1.3, settings).at_pi == pytest.approx((-1.0, 0.0), abs=1e-16)


def test_branches_satisfy_all_four_conditions(asymmetric, settings):
    for build in (build_phi, build_chi):
        br = build(asymmetric, 3.3, settings)
        assert transmission_residuals(asymmetric.transmission, br.at_zero_minus,
                                      br.at_zero_plus) == pytest.approx((0, 0), abs=1e-13)
    phi, chi = build_phi(asymmetric, 3.3, settings), build_chi(asymmetric, 3.3, settings)
    assert boundary_residuals(asymmetric, phi.at_minus_pi, chi.at_pi) == pytest.approx((0, 0), abs=1e-15)


# -- characteristic function -----------------------------------------------

@pytest.mark.parametrize("lam,expect", [
    (0.0, -2 * PI),
    (0.5, -math.sin(2 * PI * math.sqrt(0.5)) / math.sqrt(0.5)),
    (-1.0, -math.sinh(2 * PI)),
    (1.0, 0.0),
])
def test_classical_w_closed_form(classical, settings, lam, expect):
    sample = characteristic(classical, lam, settings)
    assert sample.w == pytest.approx(expect, rel=1e-8, abs=1e-8)
    assert sample.w1 == pytest.approx(sample.w2, rel=1e-8, abs=1e-8)


@pytest.mark.parametrize("lam", [-3.0, 0.4, 2.0, 7.7, 31.0])
def test_weighted_wronskians_agree_for_unequal_weights(asymmetric, settings, lam):
    sample = characteristic(asymmetric, lam, settings)
    assert asymmetric.rho12 == 2.0 and asymmetric.rho34 == 1.0
    assert sample.identity_error < 1e-8
    assert 2.0 * sample.w1 == pytest.approx(sample.w2, rel=1e-7, abs=1e-9 * sample.scale)


@pytest.mark.parametrize("lam", [-2.0, 0.7, 5.5, 18.0])
def test_characteristic_matches_independent_oracle(asymmetric, settings, lam):
    assert char_value(asymmetric, lam, settings) == pytest.approx(oracle_w(asymmetric, lam), rel=1e-7)


# -- eigenvalue search -----------------------------------------------------

def test_classical_eigenvalues(classical_spectrum):
    ev = classical_spectrum.eigenvalues
    assert np.max(np.abs(ev[:20] - dirichlet_eigenvalues(20))) < 1e-6
    assert np.all(np.diff(ev) > 0)
    assert classical_spectrum.shift_eta == 0.0


def test_window_restricts_search(classical, settings):
    sp = find_eigenvalues(classical, settings.replace(lambda_min=5.1, lambda_max=8.9))
    assert sp.eigenvalues == pytest.approx([6.25], abs=1e-8)


def test_empty_window(classical, settings):
    sp = find_eigenvalues(classical, settings.replace(lambda_max=0.2))
    assert len(sp) == 0 and sp.matrix(0).shape == (0, StandardGrid.from_settings(settings).size)


def test_delta_spectrum_matches_closed_form(delta_spectrum):
    oracle = delta_roots(12)
    assert oracle[0] == pytest.approx(0.4871, abs=1e-4)
    assert np.max(np.abs(delta_spectrum.eigenvalues - oracle)) < 1e-6
    assert np.min(np.abs(delta_spectrum.eigenvalues - 1.0)) < 1e-8
    assert np.min(np.abs(delta_spectrum.eigenvalues - 4.0)) < 1e-8


def test_asymmetric_spectrum_against_oracle(asymmetric, asymmetric_spectrum):
    for lam in asymmetric_spectrum.eigenvalues[:4]:
        lo, hi = lam - 1e-3, lam + 1e-3
        ref = brentq(lambda v: oracle_w(asymmetric, v), lo, hi, xtol=1e-12)
        assert lam == pytest.approx(ref, abs=1e-7)


def test_neumann_zero_eigenvalue_uses_shift(settings):
    spec = ProblemSpec(Potential.constant(0), BoundaryAngles(PI / 2, PI / 2), CONTINUITY)
    sp = find_eigenvalues(spec, settings.replace(max_eigenvalues=6))
    assert sp.shift_eta != 0.0
    assert sp.eigenvalues == pytest.approx([k * k / 4 for k in range(6)], abs=1e-7)
    assert sp[0].values.left == pytest.approx(np.full(sp.grid.size // 2, 1 / math.sqrt(2 * PI)))


def test_row_scaling_leaves_spectrum_unchanged(delta, delta_spectrum, settings):
    a, b = delta.transmission.row_a, delta.transmission.row_b
    scaled = ProblemSpec(delta.potential, delta.angles,
                         TransmissionMatrix(tuple(3 * v for v in a), b))
    sp = find_eigenvalues(scaled, settings.replace(max_eigenvalues=6))
    assert sp.eigenvalues == pytest.approx(delta_spectrum.eigenvalues[:6], abs=1e-8)


def test_scan_nodes_include_zero_and_end():
    nodes = list(scan_nodes(-1.0, 4.0))
    assert nodes[:5] == [-1.0, -0.75, -0.5, -0.25, 0.0]
    assert nodes[-1] == 4.0 and np.all(np.diff(nodes) > 0)


# -- eigenfunctions --------------------------------------------------------

@pytest.mark.parametrize("name", ["classical_spectrum", "delta_spectrum", "asymmetric_spectrum"])
def test_orthonormality(request, name):
    sp = request.getfixturevalue(name)
    spec = {"classical_spectrum": "classical", "delta_spectrum": "delta",
            "asymmetric_spectrum": "asymmetric"}[name]
    spec = request.getfixturevalue(spec)
    gram = np.array([[weighted_inner_product(p.values, q.values, spec) for q in sp[:10]]
                     for p in sp[:10]])
    assert np.max(np.abs(gram - np.eye(10))) < 1e-6


def test_eigenfunction_sign_and_shape(classical_spectrum):
    p = classical_spectrum[0]
    x = np.array([-2.0, -0.5, 0.5, 2.0])
    assert p(x) == pytest.approx(np.sin((x + PI) / 2) / math.sqrt(PI), abs=1e-8)
    assert p.norm_constant > 0


def test_normalize_idempotent_and_homogeneous(classical, classical_spectrum, settings):
    p = classical_spectrum[2]
    again = normalize(p.eigenfunction, classical, settings, 2)
    assert again.norm_constant == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(again.values.values, p.values.values, atol=1e-14)
    scaled = normalize(p.eigenfunction.scaled(-7.0), classical, settings, 2)
    assert scaled.norm_constant == pytest.approx(7.0)
    assert np.allclose(scaled.values.values, p.values.values, atol=1e-13)


def test_normalize_rejects_zero(classical, classical_spectrum, settings):
    with pytest.raises(DegenerateEigenfunctionError):
        normalize(classical_spectrum[0].eigenfunction.scaled(0.0), classical, settings)


def test_phi_and_chi_proportional_at_eigenvalue(asymmetric, asymmetric_spectrum, settings):
    lam = asymmetric_spectrum.eigenvalues[3]
    grid = StandardGrid.from_settings(settings)
    pv, _ = build_phi(asymmetric, lam, settings, grid).samples()
    cv, _ = build_chi(asymmetric, lam, settings, grid).samples()
    ratio = pv.values[100] / cv.values[100]
    assert np.max(np.abs(pv.values - ratio * cv.values)) < 1e-6 * pv.max_abs()


def test_evaluate_matches_grid_samples(delta, settings):
    grid = StandardGrid.from_settings(settings)
    br = build_phi(delta, 4.4, settings, grid)
    vals, ders = br.samples()
    x = grid.x[::97]
    y, dy = br.evaluate(delta, settings, x)
    assert np.allclose(y, vals.values[::97], atol=1e-12)
    assert np.allclose(dy, ders.values[::97], atol=1e-11)
    y0m, _ = br.evaluate(delta, settings, np.array([-0.0]))
    assert y0m[0] == pytest.approx(br.at_zero_minus.y, abs=1e-9)


def test_classical_helper_defaults():
    assert classical_dirichlet().transmission == CONTINUITY


def test_touching_zero_is_flagged(settings):
    from slt.spectral import _check_dip
    warnings = []
    f = lambda lam: (lam - 1.1) ** 2  # noqa: E731
    _check_dip(f, (0.5, f(0.5)), (1.0, f(1.0)), (1.5, f(1.5)), settings, warnings)
    assert len(warnings) == 1 and "double root" in warnings[0]
    g = lambda lam: (lam - 1.1) ** 2 + 0.1  # noqa: E731
    quiet = []
    _check_dip(g, (0.5, g(0.5)), (1.0, g(1.0)), (1.5, g(1.5)), settings, quiet)
    assert quiet == []
