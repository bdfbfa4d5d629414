import numpy as np
import pytest

from nlsmkdv.potentials import GridFunction, Potential, diagonal, make_trig, miura, random_trig
from nlsmkdv.transfer import (
    ResolutionError,
    convergence_study,
    hill_fundamental,
    hill_monodromy,
    zs_fundamental,
    zs_grid_solution,
    zs_monodromy,
)

import oracles

LAMS = [0.7, 3 + 1j, -2 - 2j, 5.5]


@pytest.fixture(scope="module")
def generic_phi():
    rng = np.random.default_rng(11)
    return Potential(random_trig(rng, real=False, sup=0.8), random_trig(rng, real=False, sup=0.8))


@pytest.mark.parametrize("scheme", ["lawson", "plain"])
def test_zs_matches_ode_oracle(generic_phi, scheme):
    M, _ = zs_monodromy(generic_phi, LAMS, scheme=scheme)
    for lam, m in zip(LAMS, M):
        assert np.max(np.abs(m - oracles.ode_zs_monodromy(generic_phi, lam))) < 1e-9


@pytest.mark.parametrize("scheme", ["lawson", "plain"])
def test_hill_matches_ode_oracle(corpus, scheme):
    q = miura(corpus[0][1])
    mus = [0.5, 9 + 3j, -4 + 1j]
    M, _ = hill_monodromy(q, mus, scheme=scheme)
    for mu, m in zip(mus, M):
        assert np.max(np.abs(m - oracles.ode_hill_monodromy(q, mu))) < 1e-9


def test_constant_potential_closed_form():
    a, b = 0.3 - 0.2j, 0.5j
    phi = Potential(GridFunction.constant(a), GridFunction.constant(b))
    M, _ = zs_monodromy(phi, LAMS)
    for lam, m in zip(LAMS, M):
        assert np.max(np.abs(m - oracles.constant_zs_monodromy(a, b, lam))) < 1e-10
    jet = zs_fundamental(phi, 1 + 1j, x=0.37)
    assert np.max(np.abs(jet.M - oracles.constant_zs_monodromy(a, b, 1 + 1j, 0.37))) < 1e-10


def test_zero_potential_is_exact():
    zero = diagonal(GridFunction.zeros())
    M, dM = zs_monodromy(zero, LAMS, with_jet=True)
    for lam, m, dm in zip(LAMS, M, dM):
        assert np.max(np.abs(m - np.diag([np.exp(-1j * lam), np.exp(1j * lam)]))) < 1e-12
        assert np.max(np.abs(dm - np.diag([-1j * np.exp(-1j * lam), 1j * np.exp(1j * lam)]))) < 1e-11


def test_hill_constant_potential():
    q = GridFunction.constant(0.8)
    for mu in (2.0, -3.0, 4 + 2j):
        jet = hill_fundamental(q, mu)
        assert abs(jet.trace - oracles.constant_hill_delta(0.8, mu)) < 1e-10


def test_determinant_and_start(generic_phi, corpus):
    for lam in LAMS:
        assert abs(zs_fundamental(generic_phi, lam).det - 1) < 1e-9
        start = zs_fundamental(generic_phi, lam, x=0.0)
        assert np.array_equal(start.M, np.eye(2))
    q = miura(corpus[1][1])
    assert abs(hill_fundamental(q, 7 - 2j).det - 1) < 1e-9


def test_jet_matches_finite_difference(generic_phi):
    step = 1e-6
    for lam in LAMS:
        _, dM = zs_monodromy(generic_phi, [lam], with_jet=True)
        plus, _ = zs_monodromy(generic_phi, [lam + step])
        minus, _ = zs_monodromy(generic_phi, [lam - step])
        fd = (plus[0] - minus[0]) / (2 * step)
        assert np.max(np.abs(dM[0] - fd)) < 1e-6 * max(1.0, np.max(np.abs(fd)))


def test_composition_over_subintervals(generic_phi):
    lam = 1.5 - 0.5j
    whole = zs_fundamental(generic_phi, lam).M
    left = zs_fundamental(generic_phi, lam, x=0.4).M
    right = zs_fundamental(generic_phi, lam, x=1.0, x0=0.4).M
    assert np.max(np.abs(whole - right @ left)) < 1e-10


def test_grid_solution_endpoints(generic_phi):
    lam = 2.0 + 0.3j
    Mx, _ = zs_grid_solution(generic_phi, [lam])
    M, _ = zs_monodromy(generic_phi, [lam])
    assert np.array_equal(Mx[0, 0], np.eye(2))
    assert np.max(np.abs(Mx[0, -1] - M[0])) < 1e-12


def test_resolution_error():
    phi = diagonal(make_trig({1: 0.5, -1: 0.5}, 8))
    with pytest.raises(ResolutionError):
        zs_monodromy(phi, [200.0], oversample=1)


def test_bad_arguments(generic_phi):
    with pytest.raises(ValueError):
        zs_fundamental(generic_phi, 1.0, x=0.2, x0=0.5)
    with pytest.raises(ValueError):
        zs_monodromy(generic_phi, [1.0], scheme="euler")


@pytest.mark.parametrize("scheme", ["lawson", "plain"])
def test_fourth_order_convergence(generic_phi, scheme):
    _, errs, orders = convergence_study(generic_phi, [0.5, 3 + 1j, -4 + 2j, 2 - 3j], scheme=scheme)
    assert np.all(errs > 0)
    assert np.all(orders > 3.5) and np.all(orders < 4.5)
