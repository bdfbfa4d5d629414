"""Floquet discriminants of the Zakharov-Shabat and Hill problems and the ZS gradient."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .potentials import GridFunction, Potential, antiderivative, derivative, diagonal, miura
from .transfer import (
    DEFAULT_OVERSAMPLE,
    hill_monodromy,
    zs_grid_solution,
    zs_monodromy,
)

__all__ = [
    "DiscriminantSample",
    "GradientField",
    "zs_delta",
    "zs_delta_many",
    "hill_delta",
    "hill_delta_many",
    "hill_delta_q",
    "zs_gap_function",
    "hill_gap_function",
    "conjugation_matrix",
    "conjugation_residual",
    "floquet_multipliers",
    "zs_gradient",
    "xi_function",
    "xi_identity_residual",
    "write_sweep_csv",
]

# below this |m2(1)| the Floquet-vector formula for the gradient is abandoned
M2_DEGENERATE = 1e-8


@dataclass(frozen=True)
class DiscriminantSample:
    lam: complex
    value: complex
    dvalue: complex
    operator_kind: str


@dataclass(frozen=True)
class GradientField:
    """L2 gradient ``(d Delta / d phi_-, d Delta / d phi_+)`` at fixed lam."""

    d_minus: GridFunction
    d_plus: GridFunction
    lam: complex
    method: str

    def pair(self):
        return self.d_minus, self.d_plus

    def pairing(self, delta: Potential) -> complex:
        """``<dDelta, delta> = int (d_- delta_- + d_+ delta_+) dx`` on the grid."""
        return complex(np.mean(self.d_minus.values * delta.minus.values
                               + self.d_plus.values * delta.plus.values))


def zs_delta_many(phi: Potential, lams, oversample=DEFAULT_OVERSAMPLE, with_jet=True):
    """Discriminant ``tr M(1, lam)`` and its lam-derivative for an array of lam."""
    lams = np.asarray(lams, dtype=complex)
    M, dM = zs_monodromy(phi, lams.ravel(), with_jet=with_jet, oversample=oversample)
    val = np.trace(M, axis1=-2, axis2=-1).reshape(lams.shape)
    if dM is None:
        return val, None
    return val, np.trace(dM, axis1=-2, axis2=-1).reshape(lams.shape)


def zs_delta(phi: Potential, lam: complex, oversample=DEFAULT_OVERSAMPLE) -> DiscriminantSample:
    v, dv = zs_delta_many(phi, [lam], oversample)
    return DiscriminantSample(complex(lam), complex(v[0]), complex(dv[0]), "ZS")


def hill_delta_q(q: GridFunction, mus, oversample=DEFAULT_OVERSAMPLE, with_jet=True):
    """Hill discriminant ``y1(1) + y2'(1)`` for a given Hill potential q."""
    mus = np.asarray(mus, dtype=complex)
    M, dM = hill_monodromy(q, mus.ravel(), with_jet=with_jet, oversample=oversample)
    val = np.trace(M, axis1=-2, axis2=-1).reshape(mus.shape)
    if dM is None:
        return val, None
    return val, np.trace(dM, axis1=-2, axis2=-1).reshape(mus.shape)


def hill_delta_many(u: GridFunction, mus, oversample=DEFAULT_OVERSAMPLE, with_jet=True):
    """mKdV discriminant: the Hill discriminant of the Miura potential ``u_x + u^2``."""
    return hill_delta_q(miura(u), mus, oversample, with_jet)


def hill_delta(u: GridFunction, mu: complex, oversample=DEFAULT_OVERSAMPLE) -> DiscriminantSample:
    v, dv = hill_delta_many(u, [mu], oversample)
    return DiscriminantSample(complex(mu), complex(v[0]), complex(dv[0]), "Hill")


def _gap_function(M, dM):
    """``Delta^2 - 4`` written as ``(m1 - m4)^2 + 4 m2 m3`` (uses det M = 1) and its derivative.

    Near a (nearly) closed gap all four terms are small, so this form keeps the
    absolute rounding error proportional to the gap instead of to ``|Delta|``.
    """
    m1, m2, m3, m4 = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1]
    g = (m1 - m4) ** 2 + 4.0 * m2 * m3
    if dM is None:
        return g, None
    d1, d2, d3, d4 = dM[:, 0, 0], dM[:, 0, 1], dM[:, 1, 0], dM[:, 1, 1]
    return g, 2.0 * (m1 - m4) * (d1 - d4) + 4.0 * (d2 * m3 + m2 * d3)


def zs_gap_function(phi: Potential, lams, oversample=DEFAULT_OVERSAMPLE, with_jet=True):
    """``Delta^2(lam) - 4`` from the monodromy entries, and its lam-derivative."""
    lams = np.asarray(lams, dtype=complex)
    M, dM = zs_monodromy(phi, lams.ravel(), with_jet=with_jet, oversample=oversample)
    g, dg = _gap_function(M, dM)
    return g.reshape(lams.shape), None if dg is None else dg.reshape(lams.shape)


def hill_gap_function(q: GridFunction, mus, oversample=DEFAULT_OVERSAMPLE, with_jet=True):
    """``Delta_mKdV^2(mu) - 4`` for the Hill potential q, and its mu-derivative."""
    mus = np.asarray(mus, dtype=complex)
    M, dM = hill_monodromy(q, mus.ravel(), with_jet=with_jet, oversample=oversample)
    g, dg = _gap_function(M, dM)
    return g.reshape(mus.shape), None if dg is None else dg.reshape(mus.shape)


def conjugation_matrix(u: GridFunction, lam: complex) -> np.ndarray:
    """``[[1, i], [u(0) - i lam, i u(0) - lam]]``; its determinant is ``-2 lam``."""
    u0 = complex(u.values[0])
    return np.array([[1.0, 1j], [u0 - 1j * lam, 1j * u0 - lam]], dtype=complex)


def conjugation_residual(u: GridFunction, lam: complex, oversample=DEFAULT_OVERSAMPLE) -> float:
    """Frobenius norm of ``M_hill(1, lam^2) - A M_zs(1, lam) A^{-1}`` for ``phi = (u, u)``."""
    if lam == 0:
        raise ValueError("the conjugating matrix is singular at lam = 0")
    A = conjugation_matrix(u, lam)
    Mz, _ = zs_monodromy(diagonal(u), [lam], oversample=oversample)
    Mh, _ = hill_monodromy(miura(u), [lam * lam], oversample=oversample)
    return float(np.linalg.norm(Mh[0] - A @ Mz[0] @ np.linalg.inv(A)))


def floquet_multipliers(delta: complex):
    """Roots of ``z^2 - delta z + 1``, larger magnitude first, the second via ``z1 z2 = 1``."""
    s = np.sqrt(complex(delta) ** 2 - 4.0)
    a, b = (delta + s) / 2.0, (delta - s) / 2.0
    z1 = a if abs(a) >= abs(b) else b
    return z1, 1.0 / z1


def _gradient_from_solution(Mx, method="auto"):
    """Gradient samples from ``M(x_j)``, ``j = 0..2N`` (last entry is M(1))."""
    Mend = Mx[-1]
    m1, m2, m4 = Mend[0, 0], Mend[0, 1], Mend[1, 1]
    grid = Mx[:-1]
    if method == "floquet" and abs(m2) < M2_DEGENERATE:
        raise ValueError(f"Floquet-vector gradient needs |m2(1)| >= {M2_DEGENERATE:g}, "
                         f"got {abs(m2):.3g}; use method='variational'")
    if method == "floquet" or (method == "auto" and abs(m2) >= M2_DEGENERATE):
        zp, zm = floquet_multipliers(m1 + m4)
        vp = np.array([1.0, (zp - m1) / m2])
        vm = np.array([1.0, (zm - m1) / m2])
        fp = grid @ vp
        fm = grid @ vm
        d_minus = -1j * m2 * fp[:, 1] * fm[:, 1]
        d_plus = -1j * m2 * fp[:, 0] * fm[:, 0]
        return d_minus, d_plus, "floquet"
    # variational formula: dDelta = int tr(M(s) M(1) M(s)^{-1} dA(s)) ds
    a, b, c, d = grid[:, 0, 0], grid[:, 0, 1], grid[:, 1, 0], grid[:, 1, 1]
    det = a * d - b * c
    inv = np.empty_like(grid)
    inv[:, 0, 0], inv[:, 0, 1], inv[:, 1, 0], inv[:, 1, 1] = d, -b, -c, a
    inv /= det[:, None, None]
    W = grid @ Mend @ inv
    return 1j * W[:, 1, 0], -1j * W[:, 0, 1], "variational"


def zs_gradient(phi: Potential, lam: complex, oversample=DEFAULT_OVERSAMPLE,
                method: str = "auto") -> GradientField:
    """L2 gradient of ``Delta(lam, .)`` at ``phi``.

    The Floquet-vector formula ``i dDelta = m2 (f_+ * f_-)`` is used when
    ``|m2(1)| >= 1e-8``; otherwise (or with ``method="variational"``) the
    variation-of-constants integrand is evaluated directly.
    """
    if method not in ("auto", "floquet", "variational"):
        raise ValueError(f"unknown method {method!r}")
    Mx, _ = zs_grid_solution(phi, [lam], oversample=oversample)
    dm, dp, used = _gradient_from_solution(Mx[0], method)
    return GradientField(GridFunction(dm), GridFunction(dp), complex(lam), used)


def xi_function(phi: Potential, lam: complex, grad: GradientField = None,
                oversample=DEFAULT_OVERSAMPLE, monodromy=None) -> GridFunction:
    """``xi(x) = (m1 - m4) - 2i int_0^x (R phi . dDelta) dy``.

    ``R = diag(i, -i)`` and the dot is the bilinear pairing.  The integral term
    carries a minus sign: differentiating ``m2 (J f_+ * f_- + f_+ * J f_-)``
    gives ``-2 m2 (R phi . f_+ * f_-) = -2i (R phi . dDelta)``.
    """
    if grad is None:
        grad = zs_gradient(phi, lam, oversample)
    if monodromy is None:
        monodromy, _ = zs_monodromy(phi, [lam], oversample=oversample)
        monodromy = monodromy[0]
    integrand = GridFunction(1j * phi.minus.values * grad.d_minus.values
                             - 1j * phi.plus.values * grad.d_plus.values)
    xi = (monodromy[0, 0] - monodromy[1, 1]) - 2j * antiderivative(integrand)
    return GridFunction(xi)


def xi_identity_residual(phi: Potential, lam: complex, oversample=DEFAULT_OVERSAMPLE):
    """Return ``(xi, residual)`` for ``d_x dDelta - 2 lam R dDelta = xi J phi``.

    The residual is the grid max-norm of the difference of both sides.
    """
    Mx, _ = zs_grid_solution(phi, [lam], oversample=oversample)
    dm, dp, used = _gradient_from_solution(Mx[0])
    grad = GradientField(GridFunction(dm), GridFunction(dp), complex(lam), used)
    xi = xi_function(phi, lam, grad, monodromy=Mx[0, -1])
    lhs_m = derivative(grad.d_minus).values - 2 * lam * 1j * grad.d_minus.values
    lhs_p = derivative(grad.d_plus).values + 2 * lam * 1j * grad.d_plus.values
    rhs_m = xi.values * phi.plus.values
    rhs_p = -xi.values * phi.minus.values
    res = max(np.max(np.abs(lhs_m - rhs_m)), np.max(np.abs(lhs_p - rhs_p)))
    return xi, float(res)


def write_sweep_csv(path, phi: Potential, lams, oversample=DEFAULT_OVERSAMPLE):
    """CSV rows ``lam_re, lam_im, re Delta, im Delta, re dDelta, im dDelta``."""
    lams = np.asarray(lams, dtype=complex)
    val, dval = zs_delta_many(phi, lams, oversample)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lam_re", "lam_im", "delta_re", "delta_im", "ddelta_re", "ddelta_im"])
        for lam, v, dv in zip(lams, val, dval):
            w.writerow([repr(float(x)) for x in (lam.real, lam.imag, v.real, v.imag,
                                                  dv.real, dv.imag)])
    return val, dval
