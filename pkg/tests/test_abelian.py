import numpy as np
import pytest

from nlsmkdv.abelian import (
    SpectralCurve,
    action_I,
    action_J,
    actions_to_json,
    asymptotic_hamiltonians,
    canonical_root,
    F_mkdv_value,
    F_value,
    mean_identity_residual,
    radial_F_check,
)
from nlsmkdv.discriminant import hill_delta, zs_delta
from nlsmkdv.hierarchy import eval_hamiltonian
from nlsmkdv.potentials import GridFunction, Potential, diagonal, make_trig, random_trig


@pytest.fixture(scope="module")
def zero_curve():
    return SpectralCurve.zs(diagonal(GridFunction.zeros()), 2)


@pytest.fixture(scope="module")
def sample_u():
    return make_trig({1: 0.2 - 0.1j, -1: 0.2 + 0.1j, 2: 0.1j, -2: -0.1j}).as_real() + 0.1


@pytest.fixture(scope="module")
def curves(sample_u):
    return SpectralCurve.zs(diagonal(sample_u), 2), SpectralCurve.hill(sample_u, 2)


def test_zero_potential_root_and_F(zero_curve):
    pts = np.array([0.4 + 0.3j, 2.0 - 0.5j, -1.7 + 0.2j, 4.5 + 0.6j])
    root = canonical_root(None, pts, curve=zero_curve)
    assert np.max(np.abs(root + 2j * np.sin(pts))) < 1e-10
    for n, z in ((0, 0.3 + 0.4j), (1, np.pi + 0.5j), (-2, -2 * np.pi - 0.3j)):
        assert abs(F_value(None, z, n, curve=zero_curve) + 1j * z) < 1e-10


def test_zero_potential_actions_vanish(zero_curve):
    for n in (-2, -1, 0, 1, 2):
        assert abs(action_I(None, n, 1, curve=zero_curve).value) < 1e-12
    hill = SpectralCurve.hill(GridFunction.zeros(), 2)
    for k in (0, 1, 2):
        assert abs(action_J(GridFunction.zeros(), 1, k, curve=hill).value) < 1e-12


def test_root_squares_to_gap_function(curves, sample_u):
    zs, _ = curves
    pts = np.array([0.3 + 0.6j, 1.9 - 0.4j, -2.5 + 0.7j])
    root = canonical_root(None, pts, curve=zs)
    for z, r in zip(pts, root):
        d = zs_delta(diagonal(sample_u), z).value
        assert abs(r * r - (d * d - 4)) < 1e-9 * max(1, abs(d * d))


def test_F_inverts_cosh_locally(curves, sample_u):
    zs, hill = curves
    for n, z in ((0, 0.2 + 0.3j), (1, np.pi + 0.4j), (-1, -np.pi - 0.2j)):
        assert abs(2 * np.cosh(F_value(None, z, n, curve=zs)) - zs_delta(diagonal(sample_u), z).value) < 1e-9
    mu = np.pi ** 2 + 2j
    assert abs(2 * np.cosh(F_mkdv_value(None, mu, 1, curve=hill)) - hill_delta(sample_u, mu).value) < 1e-9


def test_F_primitive_along_radial_path(curves):
    zs, _ = curves
    for n in (0, 1, -1):
        assert radial_F_check(zs, n) < 1e-9


def test_action_correspondence(curves, sample_u):
    zs, hill = curves
    phi = diagonal(sample_u)
    for n in (1, 2):
        for k in (0, 1, 2):
            two_j = 2 * action_J(sample_u, n, k, curve=hill).value
            assert abs(two_j - action_I(phi, n, 2 * k - 2, curve=zs).value) < 1e-6


def test_actions_even_and_real_on_diagonal(curves):
    zs, _ = curves
    for n in (1, 2):
        a, b = action_I(None, n, 1, curve=zs), action_I(None, -n, 1, curve=zs)
        assert abs(a.value - b.value) < 1e-7
        assert abs(a.value.imag) < 1e-10 and a.value.real >= -1e-12
        assert a.quad_error < 1e-10


def test_sharp_zero_action_detects_mean():
    centred = make_trig({1: 0.2, -1: 0.2, 3: 0.05j, -3: -0.05j}).as_real()
    assert abs(action_I(diagonal(centred), 0, 1).value) < 1e-8
    assert action_I(diagonal(centred + 0.4), 0, 1).value.real > 1e-8


def test_action_argument_errors(curves, sample_u):
    zs, hill = curves
    with pytest.raises(ValueError):
        action_J(sample_u, 0, 1, curve=hill)
    with pytest.raises(ValueError):
        action_I(None, 0, 0, curve=zs)
    with pytest.raises(ValueError):
        action_I(None, 1, 1, curve=hill)


def test_mean_identity():
    assert mean_identity_residual(GridFunction.zeros()) < 1e-10
    assert mean_identity_residual(GridFunction.constant(0.7)) < 1e-9
    u = random_trig(np.random.default_rng(3), mean_range=0.0) + 0.3
    assert mean_identity_residual(u) < 1e-8


def test_asymptotic_hamiltonians():
    # degree-3 potentials are exact on 16 modes, which keeps the long root tracking cheap
    fit = asymptotic_hamiltonians(diagonal(GridFunction.zeros(16)))
    assert np.max(np.abs(fit.estimates)) < 1e-6
    rng = np.random.default_rng(12)
    v = random_trig(rng, real=False, sup=0.2, n_modes=16)
    phi = Potential(v, v.conj())
    fit = asymptotic_hamiltonians(phi)
    s1 = eval_hamiltonian("S1", phi)
    assert abs(fit.estimates[0] - s1) <= 1e-3 * abs(s1)
    u = random_trig(rng, sup=0.3, n_modes=16)
    fit = asymptotic_hamiltonians(diagonal(u))
    scale = abs(fit.estimates[0])
    assert abs(fit.estimates[1]) < 1e-6 * max(scale, 1) and abs(fit.estimates[3]) < 1e-4 * max(scale, 1)


def test_actions_json(curves):
    zs, _ = curves
    rows = actions_to_json([action_I(None, 1, 1, curve=zs)])
    assert rows[0]["n"] == 1 and rows[0]["kind"] == "I" and len(rows[0]["value"]) == 2
