"""Closed-form mKdV and NLS hierarchy Hamiltonians, gradients and vector fields.

mKdV side (state ``u``)::

    K1 = 1/2 int u^2                     grad K1 = u
    K2 = 1/2 int (u_x^2 + u^4)           grad K2 = -u_xx + 2 u^3

NLS side (state ``phi = (phi_-, phi_+)``, gradient components ordered the same way)::

    S1 = int phi_- phi_+
    S2 = (i/2) int (phi_+ phi_-' - phi_- phi_+')
    S3 = int (phi_-' phi_+' + phi_-^2 phi_+^2)
    S4 = i int (phi_- phi_+''' - 3 phi_-^2 phi_+ phi_+')

Vector fields are ``Y_G = d/dx grad G`` and ``X_F = -i J dF`` with
``J = [[0, 1], [-1, 0]]``.  All products are formed alias-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Union

import numpy as np

from .potentials import (
    GridFunction,
    Potential,
    antiderivative,
    derivative,
    diagonal,
    integrate,
    multiply,
    transform,
)

__all__ = [
    "HamiltonianId",
    "IdentityResidual",
    "eval_hamiltonian",
    "gradient",
    "vector_field",
    "gardner_bracket",
    "nls_bracket",
    "identity_residuals",
    "apply_J",
    "apply_R",
]

K_RANGE = (1, 2)
S_RANGE = (1, 2, 3, 4)


@dataclass(frozen=True)
class HamiltonianId:
    family: str
    index: int

    def __post_init__(self):
        if self.family not in ("K", "S"):
            raise ValueError(f"unknown family {self.family!r}")
        rng = K_RANGE if self.family == "K" else S_RANGE
        if self.index not in rng:
            raise ValueError(f"{self.family}_{self.index} has no closed form here "
                             f"(supported indices {rng})")

    @classmethod
    def parse(cls, text: str) -> "HamiltonianId":
        t = text.strip().upper().replace("_", "")
        return cls(t[0], int(t[1:]))

    def __str__(self):
        return f"{self.family}{self.index}"


def _as_id(hid) -> HamiltonianId:
    return hid if isinstance(hid, HamiltonianId) else HamiltonianId.parse(str(hid))


def _check_state(hid: HamiltonianId, state):
    if hid.family == "K" and not isinstance(state, GridFunction):
        raise TypeError(f"{hid} acts on a single function u, got {type(state).__name__}")
    if hid.family == "S" and not isinstance(state, Potential):
        raise TypeError(f"{hid} acts on a potential (phi_-, phi_+), got {type(state).__name__}")


def eval_hamiltonian(hid, state) -> complex:
    hid = _as_id(hid)
    _check_state(hid, state)
    if hid.family == "K":
        u = state
        if hid.index == 1:
            return 0.5 * integrate(multiply(u, u))
        ux = derivative(u)
        return 0.5 * (integrate(multiply(ux, ux)) + integrate(multiply(u, u, u, u)))
    m, p = state.minus, state.plus
    if hid.index == 1:
        return integrate(multiply(m, p))
    if hid.index == 2:
        return 0.5j * integrate(multiply(p, derivative(m)) - multiply(m, derivative(p)))
    if hid.index == 3:
        return integrate(multiply(derivative(m), derivative(p)) + multiply(m, m, p, p))
    return 1j * integrate(multiply(m, derivative(p, 3)) - 3 * multiply(m, m, p, derivative(p)))


def gradient(hid, state) -> Union[GridFunction, Potential]:
    """L2 gradient; for the S family a pair ``(d/dphi_-, d/dphi_+)`` packed as a Potential."""
    hid = _as_id(hid)
    _check_state(hid, state)
    if hid.family == "K":
        u = state
        if hid.index == 1:
            return u
        return -derivative(u, 2) + 2 * multiply(u, u, u)
    m, p = state.minus, state.plus
    if hid.index == 1:
        return Potential(p, m)
    if hid.index == 2:
        return Potential(-1j * derivative(p), 1j * derivative(m))
    if hid.index == 3:
        return Potential(-derivative(p, 2) + 2 * multiply(m, p, p),
                         -derivative(m, 2) + 2 * multiply(p, m, m))
    return Potential(1j * (derivative(p, 3) - 6 * multiply(m, p, derivative(p))),
                     1j * (-derivative(m, 3) + 6 * multiply(m, p, derivative(m))))


def apply_J(v: Potential) -> Potential:
    """``J (a, b) = (b, -a)``."""
    return Potential(v.plus, -v.minus)


def apply_R(v: Potential) -> Potential:
    """``R (a, b) = (i a, -i b)``."""
    return Potential(1j * v.minus, -1j * v.plus)


def vector_field(hid, state):
    """``Y_G = d/dx grad G`` for the K family, ``X_F = -i J dF`` for the S family."""
    hid = _as_id(hid)
    g = gradient(hid, state)
    if hid.family == "K":
        return derivative(g)
    return apply_J(g) * (-1j)


def gardner_bracket(F, G, u: GridFunction) -> complex:
    """``{F, G} = int grad F * d/dx grad G``."""
    gf, gg = gradient(F, u), gradient(G, u)
    return integrate(multiply(gf, derivative(gg)))


def nls_bracket(F, G, phi: Potential) -> complex:
    """``{F, G} = -i int (dF_- dG_+ - dF_+ dG_-)``."""
    a, b = gradient(F, phi), gradient(G, phi)
    return -1j * integrate(multiply(a.minus, b.plus) - multiply(a.plus, b.minus))


# -- identity residuals ------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResidual:
    name: str
    m: int
    residual: float
    applicable: bool = True
    note: str = ""


def _pnorm(v: Potential) -> float:
    return v.norm()


def _phase_relation(phi: Potential, tol=1e-10):
    """Return alpha with ``P phi = R_alpha phi`` if one exists, else None."""
    m, p = phi.minus.values, phi.plus.values
    big = np.argmax(np.abs(m))
    if abs(m[big]) < tol:
        return 0.0 if np.max(np.abs(p)) < tol else None
    alpha = np.angle(p[big] / m[big])
    if np.max(np.abs(p - np.exp(1j * alpha) * m)) <= tol and \
            np.max(np.abs(m - np.exp(-1j * alpha) * p)) <= tol:
        return float(alpha)
    return None


def _reflection_sign(phi: Potential, tol=1e-10):
    """``+1`` or ``-1`` if ``T phi = +-phi``, else None."""
    t = transform(phi, "T")
    if t.allclose(phi, tol):
        return 1
    if t.allclose(phi * -1.0, tol):
        return -1
    return None


def reflection_identity_residual(phi: Potential, m: int) -> float:
    """Residual of ``R dS_2m = d/dx dS_{2m-1} + 2i (int_0^x R phi . dS_{2m-1}) J phi``.

    This is the T-symmetric companion of the diagonal identity; the integral
    term enters with the same sign as in the ``xi`` function of the
    discriminant gradient.
    """
    even = gradient(HamiltonianId("S", 2 * m), phi)
    odd = gradient(HamiltonianId("S", 2 * m - 1), phi)
    rphi = apply_R(phi)
    dot = GridFunction(rphi.minus.values * odd.minus.values + rphi.plus.values * odd.plus.values)
    integral = antiderivative(dot)
    jphi = apply_J(phi)
    lhs = apply_R(even)
    rhs_m = derivative(odd.minus).values + 2j * integral * jphi.minus.values
    rhs_p = derivative(odd.plus).values + 2j * integral * jphi.plus.values
    return float(max(np.max(np.abs(lhs.minus.values - rhs_m)),
                     np.max(np.abs(lhs.plus.values - rhs_p))))


def identity_residuals(state, ms=(1, 2)) -> List[IdentityResidual]:
    """Grid-norm residuals of the hierarchy identities.

    ``state`` is a real or complex u (embedded diagonally) or a Potential.
    Identities:

    * ``restriction``: ``X_{S_2m}(u, u) - (Y_{K_m}, Y_{K_m})``
    * ``gradient_shift``: ``-i J dS_2m - R_{-alpha} d/dx dS_{2m-1}`` where
      ``P phi = R_alpha phi`` (the rotation is the identity on diagonal potentials)
    * ``reflection``: ``R dS_2m - d/dx dS_{2m-1} - 2i (int_0^x R phi . dS_{2m-1}) J phi``
      where ``T phi = +-phi``
    * ``hamiltonian_match``: ``K_m - S_{2m-1}(u, u) / 2``
    * ``even_vanishing``: ``S_2m(u, u)``

    Identities whose precondition fails are reported with ``applicable=False``.
    """
    if isinstance(state, GridFunction):
        u, phi = state, diagonal(state)
    else:
        phi = state
        u = phi.minus if phi.is_diagonal else None
    alpha = _phase_relation(phi)
    tsign = _reflection_sign(phi)
    out = []
    for m in ms:
        s_even, s_odd, k_m = (HamiltonianId("S", 2 * m), HamiltonianId("S", 2 * m - 1),
                              HamiltonianId("K", m))
        if u is not None:
            X = vector_field(s_even, phi)
            Y = vector_field(k_m, u)
            r = max((X.minus - Y).norm(), (X.plus - Y).norm())
            out.append(IdentityResidual("restriction", m, r))
            r = abs(eval_hamiltonian(k_m, u) - 0.5 * eval_hamiltonian(s_odd, phi))
            out.append(IdentityResidual("hamiltonian_match", m, float(r)))
            out.append(IdentityResidual("even_vanishing", m, float(abs(eval_hamiltonian(s_even, phi)))))
        else:
            for name in ("restriction", "hamiltonian_match", "even_vanishing"):
                out.append(IdentityResidual(name, m, float("nan"), False,
                                            "needs a diagonal potential (u, u)"))
        if alpha is not None:
            lhs = apply_J(gradient(s_even, phi)) * (-1j)
            rhs = gradient(s_odd, phi)
            rhs = Potential(derivative(rhs.minus), derivative(rhs.plus))
            # with P phi = R_alpha phi the two sides agree after the rotation R_{-alpha}
            rhs = transform(rhs, ("R", -alpha))
            out.append(IdentityResidual("gradient_shift", m, _pnorm(lhs - rhs),
                                        note=f"alpha={alpha:.6g}"))
        else:
            out.append(IdentityResidual("gradient_shift", m, float("nan"), False,
                                        "needs P phi = R_alpha phi"))
        if tsign is not None:
            out.append(IdentityResidual("reflection", m, reflection_identity_residual(phi, m),
                                        note=f"T phi = {'+' if tsign > 0 else '-'}phi"))
        else:
            out.append(IdentityResidual("reflection", m, float("nan"), False,
                                        "needs T phi = +-phi"))
    return out
