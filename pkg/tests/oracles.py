"""Independent reference computations used by the test-suite.

Nothing here calls the package's integrators: the monodromy oracle uses an
adaptive scipy ODE solver on the trigonometric interpolant, and the closed
forms are worked out by hand for constant potentials.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

ODE_RTOL = 1e-12
ODE_ATOL = 1e-13


def _interpolant(f):
    """Callable ``x -> f(x)`` built from the Fourier coefficients."""
    n = f.values.size
    coeffs = np.fft.fft(f.values) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    # the sampled data are band-limited well below Nyquist, so its split is immaterial

    def value(x):
        return complex(np.sum(coeffs * np.exp(2j * np.pi * k * x)))
    return value


def ode_zs_monodromy(phi, lam, x_end=1.0):
    """``M(x_end, lam)`` of ``M' = [[-i lam, i phi_-], [-i phi_+, i lam]] M`` by DOP853."""
    fm, fp = _interpolant(phi.minus), _interpolant(phi.plus)

    def rhs(x, y):
        M = y.reshape(2, 2)
        A = np.array([[-1j * lam, 1j * fm(x)], [-1j * fp(x), 1j * lam]])
        return (A @ M).ravel()

    sol = solve_ivp(rhs, (0.0, x_end), np.eye(2, dtype=complex).ravel(), method="DOP853",
                    rtol=ODE_RTOL, atol=ODE_ATOL)
    return sol.y[:, -1].reshape(2, 2)


def ode_hill_monodromy(q, mu, x_end=1.0):
    """Fundamental matrix of ``y'' = (q - mu) y`` at ``x_end`` by DOP853."""
    fq = _interpolant(q)

    def rhs(x, y):
        M = y.reshape(2, 2)
        A = np.array([[0.0, 1.0], [fq(x) - mu, 0.0]])
        return (A @ M).ravel()

    sol = solve_ivp(rhs, (0.0, x_end), np.eye(2, dtype=complex).ravel(), method="DOP853",
                    rtol=ODE_RTOL, atol=ODE_ATOL)
    return sol.y[:, -1].reshape(2, 2)


def constant_zs_monodromy(a, b, lam, x=1.0):
    """Exact monodromy for constant ``phi = (a, b)``: a matrix exponential."""
    A = np.array([[-1j * lam, 1j * a], [-1j * b, 1j * lam]])
    return expm(A * x)


def constant_zs_delta(a, b, lam):
    """``2 cos sqrt(lam^2 - a b)`` (even in the root, so the branch is irrelevant)."""
    return 2 * np.cos(np.sqrt(complex(lam) ** 2 - a * b))


def constant_hill_delta(q, mu):
    """``2 cos sqrt(mu - q)`` for the constant Hill potential ``q``."""
    return 2 * np.cos(np.sqrt(complex(mu) - q))


def constant_diagonal_spectrum(c, n):
    """Periodic eigenvalues of ZS at ``phi = (c, c)``: ``+-sqrt(n^2 pi^2 + c^2)`` (``+-c`` at n = 0)."""
    r = np.sqrt((n * np.pi) ** 2 + c * c)
    if n == 0:
        return -abs(c), abs(c)
    return (r, r) if n > 0 else (-r, -r)


def cosine_k2(amplitude):
    """``K2`` of ``a cos(2 pi x)``: ``a^2 pi^2 + 3 a^4 / 16``."""
    return amplitude ** 2 * np.pi ** 2 + 3 * amplitude ** 4 / 16


def central_difference(functional, base, direction, step=1e-6):
    """``(F(base + h d) - F(base - h d)) / 2h``."""
    return (functional(base + direction * step) - functional(base - direction * step)) / (2 * step)


def plane_wave_nls(amplitude, n, t, x):
    """Exact defocusing NLS plane wave ``a e^{2 pi i n x} e^{-i (4 pi^2 n^2 + 2 a^2) t}``."""
    omega = 4 * np.pi ** 2 * n ** 2 + 2 * abs(amplitude) ** 2
    return amplitude * np.exp(2j * np.pi * n * x - 1j * omega * t)


def observed_orders(steps, errors):
    steps, errors = np.asarray(steps, float), np.asarray(errors, float)
    return np.log(errors[:-1] / errors[1:]) / np.log(steps[:-1] / steps[1:])
