"""Fundamental solutions of the Zakharov-Shabat system and of Hill's equation.

Both problems are integrated with the classical fourth-order Runge-Kutta method
on a fixed step ``h = 1 / (2N * oversample)``, by default in the interaction
frame of the constant free part (the free part is propagated exactly, so the
zero potential is integrated without error).  Because the equations are
linear, one step is a matrix ``S_j`` (the step applied to the identity); the
fundamental matrix is the ordered product ``S_{n-1} ... S_0`` which is formed
by pairwise reduction, vectorised over the spectral parameter.

The derivative in the spectral parameter is obtained from the augmented
block system ``[[A, 0], [A_lam, A]]`` (block lower-triangular matrices form a
dual-number algebra, so pushing them through the RK4 step differentiates it),
hence it is the exact derivative of the discrete solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .potentials import GridFunction, Potential, miura

__all__ = [
    "TransferJet",
    "ResolutionError",
    "zs_fundamental",
    "hill_fundamental",
    "zs_monodromy",
    "hill_monodromy",
    "zs_grid_solution",
    "hill_grid_solution",
    "DEFAULT_OVERSAMPLE",
    "DEFAULT_SCHEME",
    "SCHEMES",
]

DEFAULT_OVERSAMPLE = 8
DEFAULT_SCHEME = "lawson"
# largest admissible h * (|lambda| + sup|potential|); RK4 is stable up to ~2.8
MAX_STEP_PRODUCT = 0.5
# complex entries per chunk of step matrices, bounds memory use
_CHUNK_ENTRIES = 1 << 21


class ResolutionError(ValueError):
    """Step size too coarse for the requested spectral parameter."""

    def __init__(self, lam, h, scale):
        self.lam = lam
        super().__init__(
            f"step h={h:.3g} under-resolves the solution at lambda={complex(lam):.6g} "
            f"(h*scale={h * scale:.3g} > {MAX_STEP_PRODUCT}); increase oversample or n_modes")


@dataclass(frozen=True)
class TransferJet:
    """Fundamental matrix ``M(x, lam)`` and optionally ``dM/dlam``."""

    M: np.ndarray
    dM: Optional[np.ndarray]
    x: float
    lam: complex
    operator_kind: str

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.M))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.M))


# -- coefficient matrices ---------------------------------------------------
#
# Default scheme ("lawson"): the constant free part (``-i lam sigma_3`` for ZS,
# ``[[0, 1], [-mu, 0]]`` for Hill) is propagated exactly and RK4 is applied to
# the potential term in the local interaction frame of each step,
# ``B(s) = E(-s) Q(x_j + s) E(s)``, ``S_j = E(h) RK4(B)``.  For the zero
# potential the scheme is exact.  The plain scheme applies RK4 to ``A`` itself.


def _stage_split(v):
    """Samples at 2n+1 stage points -> values at step offsets 0, h/2, h."""
    return v[0:-1:2], v[1::2], v[2::2]


def _zs_plain(minus, plus, h):
    m3, p3 = _stage_split(minus), _stage_split(plus)

    def stages(lam):
        lam = np.asarray(lam, dtype=complex)[:, None]
        out = []
        for m, p in zip(m3, p3):
            A = np.empty((lam.shape[0], m.size, 2, 2), dtype=complex)
            A[..., 0, 0] = -1j * lam
            A[..., 1, 1] = 1j * lam
            A[..., 0, 1] = 1j * m[None, :]
            A[..., 1, 0] = -1j * p[None, :]
            dA = np.zeros_like(A)
            dA[..., 0, 0] = -1j
            dA[..., 1, 1] = 1j
            out.append((A, dA))
        return out, None
    return stages


def _zs_lawson(minus, plus, h):
    m3, p3 = _stage_split(minus), _stage_split(plus)
    offsets = (0.0, 0.5 * h, h)

    def stages(lam):
        lam = np.asarray(lam, dtype=complex)
        out = []
        for m, p, s in zip(m3, p3, offsets):
            ph = np.exp(2j * lam * s)[:, None]
            B = np.zeros((lam.size, m.size, 2, 2), dtype=complex)
            B[..., 0, 1] = 1j * m[None, :] * ph
            B[..., 1, 0] = -1j * p[None, :] / ph
            dB = np.zeros_like(B)
            dB[..., 0, 1] = (2j * s) * B[..., 0, 1]
            dB[..., 1, 0] = (-2j * s) * B[..., 1, 0]
            out.append((B, dB))
        E = np.zeros((lam.size, 2, 2), dtype=complex)
        dE = np.zeros_like(E)
        E[:, 0, 0] = np.exp(-1j * lam * h)
        E[:, 1, 1] = np.exp(1j * lam * h)
        dE[:, 0, 0] = -1j * h * E[:, 0, 0]
        dE[:, 1, 1] = 1j * h * E[:, 1, 1]
        return out, (E, dE)
    return stages


def _hill_plain(q, h):
    q3 = _stage_split(q)

    def stages(mu):
        mu = np.asarray(mu, dtype=complex)[:, None]
        out = []
        for qq in q3:
            A = np.zeros((mu.shape[0], qq.size, 2, 2), dtype=complex)
            A[..., 0, 1] = 1.0
            A[..., 1, 0] = qq[None, :] - mu
            dA = np.zeros_like(A)
            dA[..., 1, 0] = -1.0
            out.append((A, dA))
        return out, None
    return stages


_SERIES_TERMS = 14


def _free_hill(mu, s):
    """``C = cos(k s)``, ``S = sin(k s)/k`` with ``k^2 = mu``, and their mu-derivatives.

    These are entire in mu; a Taylor series in ``z = mu s^2`` is used for small z.
    """
    mu = np.asarray(mu, dtype=complex)
    z = mu * s * s
    C = np.zeros_like(z)
    S = np.zeros_like(z)
    dC = np.zeros_like(z)
    dS = np.zeros_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    pw = np.ones_like(zs)
    pw_prev = np.zeros_like(zs)
    fact_even, fact_odd = 1.0, 1.0  # (2j)!, (2j+1)!
    for j in range(_SERIES_TERMS):
        if j > 0:
            fact_even *= (2 * j - 1) * (2 * j)
            fact_odd *= (2 * j) * (2 * j + 1)
        sign = -1.0 if j % 2 else 1.0
        C[small] += sign * pw / fact_even
        S[small] += sign * pw / fact_odd
        if j > 0:
            dC[small] += sign * j * pw_prev / fact_even
            dS[small] += sign * j * pw_prev / fact_odd
        pw_prev = pw
        pw = pw * zs
    S[small] *= s
    dC[small] *= s * s
    dS[small] *= s ** 3
    big = ~small
    if np.any(big):
        k = np.sqrt(mu[big])
        C[big] = np.cos(k * s)
        S[big] = np.sin(k * s) / k
        dC[big] = -0.5 * s * S[big]
        dS[big] = (s * C[big] - S[big]) / (2 * mu[big])
    return C, S, dC, dS


def _hill_lawson(q, h):
    q3 = _stage_split(q)
    offsets = (0.0, 0.5 * h, h)

    def stages(mu):
        mu = np.asarray(mu, dtype=complex)
        out = []
        for qq, s in zip(q3, offsets):
            C, S, dC, dS = (a[:, None] for a in _free_hill(mu, s))
            qv = qq[None, :]
            B = np.empty((mu.size, qq.size, 2, 2), dtype=complex)
            B[..., 0, 0] = -qv * C * S
            B[..., 0, 1] = -qv * S * S
            B[..., 1, 0] = qv * C * C
            B[..., 1, 1] = qv * C * S
            dCS = dC * S + C * dS
            dB = np.empty_like(B)
            dB[..., 0, 0] = -qv * dCS
            dB[..., 0, 1] = -2 * qv * S * dS
            dB[..., 1, 0] = 2 * qv * C * dC
            dB[..., 1, 1] = qv * dCS
            out.append((B, dB))
        C, S, dC, dS = _free_hill(mu, h)
        E = np.empty((mu.size, 2, 2), dtype=complex)
        E[:, 0, 0] = C
        E[:, 0, 1] = S
        E[:, 1, 0] = -mu * S
        E[:, 1, 1] = C
        dE = np.empty_like(E)
        dE[:, 0, 0] = dC
        dE[:, 0, 1] = dS
        dE[:, 1, 0] = -S - mu * dS
        dE[:, 1, 1] = dC
        return out, (E, dE)
    return stages


def _augment(A, dA):
    """Block lower-triangular [[A, 0], [dA, A]] carrying the parameter derivative."""
    d = A.shape[-1]
    big = np.zeros(A.shape[:-2] + (2 * d, 2 * d), dtype=complex)
    big[..., :d, :d] = A
    big[..., d:, d:] = A
    big[..., d:, :d] = dA
    return big


# -- RK4 machinery ----------------------------------------------------------


def _rk4_step_matrices(A0, A1, A2, h):
    """RK4 applied to the identity with coefficients at offsets 0, h/2, h of each step."""
    eye = np.eye(A0.shape[-1])
    k1 = A0
    k2 = A1 @ (eye + (0.5 * h) * k1)
    k3 = A1 @ (eye + (0.5 * h) * k2)
    k4 = A2 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _ordered_product(S):
    """``S[..., n-1] @ ... @ S[..., 0]`` over axis -3, by pairwise reduction."""
    while S.shape[-3] > 1:
        n = S.shape[-3]
        if n % 2:
            paired = S[..., 1:n - 1:2, :, :] @ S[..., 0:n - 1:2, :, :]
            S = np.concatenate([paired, S[..., n - 1:n, :, :]], axis=-3)
        else:
            S = S[..., 1::2, :, :] @ S[..., 0::2, :, :]
    return S[..., 0, :, :]


def _samples(f: GridFunction, x0: float, x1: float, m: int) -> np.ndarray:
    """Values of f at x0 + j (x1 - x0) / m, j = 0..m (exact for band-limited f)."""
    if x0 == 0.0 and x1 == 1.0 and m >= f.size:
        v = f.resample(m)
        return np.append(v, v[0])
    return f.evaluate(x0 + (x1 - x0) * np.arange(m + 1) / m)


def _n_steps(n_modes, oversample, x0, x1):
    return max(1, int(np.ceil(round((x1 - x0) * 2 * n_modes * oversample, 9))))


def _check_step(lams, h, pot_scale):
    lams = np.atleast_1d(lams)
    if lams.size == 0:
        return
    scale = np.abs(lams) + pot_scale
    worst = int(np.argmax(scale))
    if h * scale[worst] > MAX_STEP_PRODUCT:
        raise ResolutionError(lams[worst], h, scale[worst])


def _integrate(stage_fn, lams, n_steps, h, with_jet, cells=None):
    """Core driver.

    ``stage_fn(lam_chunk)`` returns the coefficient matrices (and their
    parameter derivatives) at the three RK4 offsets of every step, and the exact
    free propagator over one step (None for the plain scheme).  Returns the
    product over all steps or, when ``cells`` is given, the cumulative
    products at the ``cells + 1`` equispaced cell boundaries.
    """
    lams = np.asarray(lams, dtype=complex).ravel()
    d = 4 if with_jet else 2
    per_lam = 3 * n_steps * d * d
    chunk = max(1, _CHUNK_ENTRIES // per_lam)
    outs = []
    for start in range(0, lams.size, chunk):
        lc = lams[start:start + chunk]
        stages, prop = stage_fn(lc)
        if with_jet:
            mats = [_augment(A, dA) for A, dA in stages]
        else:
            mats = [A for A, _ in stages]
        S = _rk4_step_matrices(*mats, h)
        if prop is not None:
            E = _augment(*prop) if with_jet else prop[0]
            S = E[:, None, :, :] @ S
        if cells is None:
            outs.append(_ordered_product(S))
        else:
            per = n_steps // cells
            S = S.reshape(S.shape[0], cells, per, d, d)
            C = _ordered_product(S)  # (n_lam, cells, d, d)
            acc = np.empty((S.shape[0], cells + 1, d, d), dtype=complex)
            acc[:, 0] = np.eye(d)
            for j in range(cells):
                acc[:, j + 1] = C[:, j] @ acc[:, j]
            outs.append(acc)
    out = np.concatenate(outs, axis=0)
    if with_jet:
        return out[..., :2, :2], out[..., 2:, :2]
    return out, None


SCHEMES = ("lawson", "plain")


def _zs_stages(minus, plus, h, scheme):
    if scheme == "lawson":
        return _zs_lawson(minus, plus, h)
    if scheme == "plain":
        return _zs_plain(minus, plus, h)
    raise ValueError(f"unknown scheme {scheme!r}")


def _hill_stages(q, h, scheme):
    if scheme == "lawson":
        return _hill_lawson(q, h)
    if scheme == "plain":
        return _hill_plain(q, h)
    raise ValueError(f"unknown scheme {scheme!r}")


# -- public API -------------------------------------------------------------


def zs_monodromy(phi: Potential, lams, with_jet=False, oversample=DEFAULT_OVERSAMPLE,
                 x0=0.0, x1=1.0, scheme=DEFAULT_SCHEME):
    """Fundamental matrices ``M(x1, lam)`` (started at x0) for an array of lam.

    Returns ``(M, dM)`` with shapes ``(n_lam, 2, 2)``; ``dM`` is None without jet.
    """
    n = _n_steps(phi.n_modes, oversample, x0, x1)
    h = (x1 - x0) / n
    minus = _samples(phi.minus, x0, x1, 2 * n)
    plus = _samples(phi.plus, x0, x1, 2 * n)
    _check_step(lams, h, max(np.max(np.abs(minus)), np.max(np.abs(plus))))
    return _integrate(_zs_stages(minus, plus, h, scheme), lams, n, h, with_jet)


def hill_monodromy(q: GridFunction, mus, with_jet=False, oversample=DEFAULT_OVERSAMPLE,
                   x0=0.0, x1=1.0, scheme=DEFAULT_SCHEME):
    """Fundamental matrices of ``-y'' + q y = mu y`` in first-order form.

    Columns are ``(y1, y1')`` and ``(y2, y2')``.
    """
    n = _n_steps(q.n_modes, oversample, x0, x1)
    h = (x1 - x0) / n
    qv = _samples(q, x0, x1, 2 * n)
    mus = np.asarray(mus, dtype=complex)
    _check_step(np.sqrt(np.abs(mus)), h, np.sqrt(np.max(np.abs(qv))) + 1.0)
    return _integrate(_hill_stages(qv, h, scheme), mus, n, h, with_jet)


def zs_grid_solution(phi: Potential, lams, with_jet=False, oversample=DEFAULT_OVERSAMPLE,
                     scheme=DEFAULT_SCHEME):
    """``M(x_j, lam)`` at every grid point ``x_j = j / 2N``, ``j = 0..2N``.

    Returns arrays of shape ``(n_lam, 2N + 1, 2, 2)``.
    """
    cells = phi.minus.size
    n = cells * oversample
    h = 1.0 / n
    minus = _samples(phi.minus, 0.0, 1.0, 2 * n)
    plus = _samples(phi.plus, 0.0, 1.0, 2 * n)
    _check_step(lams, h, max(np.max(np.abs(minus)), np.max(np.abs(plus))))
    return _integrate(_zs_stages(minus, plus, h, scheme), lams, n, h, with_jet, cells=cells)


def hill_grid_solution(q: GridFunction, mus, with_jet=False, oversample=DEFAULT_OVERSAMPLE,
                       scheme=DEFAULT_SCHEME):
    cells = q.size
    n = cells * oversample
    h = 1.0 / n
    qv = _samples(q, 0.0, 1.0, 2 * n)
    return _integrate(_hill_stages(qv, h, scheme), mus, n, h, with_jet, cells=cells)


def zs_fundamental(phi: Potential, lam: complex, x: float = 1.0, with_jet: bool = False,
                   *, x0: float = 0.0, oversample: int = DEFAULT_OVERSAMPLE,
                   scheme: str = DEFAULT_SCHEME) -> TransferJet:
    """Solution of ``M' = A(x, lam) M``, ``M(x0) = I``, evaluated at ``x``."""
    if not (0.0 <= x0 <= x <= 1.0):
        raise ValueError("need 0 <= x0 <= x <= 1")
    if x == x0:
        eye = np.eye(2, dtype=complex)
        return TransferJet(eye, np.zeros((2, 2), complex) if with_jet else None, x, lam, "ZS")
    M, dM = zs_monodromy(phi, [lam], with_jet, oversample, x0, x, scheme)
    return TransferJet(M[0], None if dM is None else dM[0], x, complex(lam), "ZS")


def hill_fundamental(q: GridFunction, mu: complex, x: float = 1.0, with_jet: bool = False,
                     *, x0: float = 0.0, oversample: int = DEFAULT_OVERSAMPLE,
                     scheme: str = DEFAULT_SCHEME) -> TransferJet:
    """Fundamental matrix of ``y'' = (q - mu) y`` with ``y1 = (1, 0)``, ``y2 = (0, 1)`` at x0."""
    if not (0.0 <= x0 <= x <= 1.0):
        raise ValueError("need 0 <= x0 <= x <= 1")
    if x == x0:
        eye = np.eye(2, dtype=complex)
        return TransferJet(eye, np.zeros((2, 2), complex) if with_jet else None, x, mu, "Hill")
    M, dM = hill_monodromy(q, [mu], with_jet, oversample, x0, x, scheme)
    return TransferJet(M[0], None if dM is None else dM[0], x, complex(mu), "Hill")


def miura_potential(u: GridFunction) -> GridFunction:
    """Hill potential ``B(u) = u_x + u^2`` attached to an mKdV state."""
    return miura(u)


def convergence_study(phi: Potential, lams, n_modes: int = 8, oversamples=(1, 2, 4),
                      reference: int = 64, scheme=DEFAULT_SCHEME):
    """Monodromy errors as the step is halved, against a fine reference.

    The potential is resampled on ``n_modes`` so that the coarse steps sit in
    the asymptotic regime.  Returns ``(oversamples, errors, observed_orders)``;
    both schemes are fourth order.
    """
    coarse = Potential(phi.minus.truncate(n_modes), phi.plus.truncate(n_modes))
    ref, _ = zs_monodromy(coarse, lams, oversample=reference, scheme=scheme)
    errs = []
    for s in oversamples:
        M, _ = zs_monodromy(coarse, lams, oversample=s, scheme=scheme)
        errs.append(float(np.max(np.abs(M - ref))))
    errs = np.array(errs)
    ratios = np.asarray(oversamples[1:], float) / np.asarray(oversamples[:-1], float)
    return np.asarray(oversamples), errs, np.log(errs[:-1] / errs[1:]) / np.log(ratios)
