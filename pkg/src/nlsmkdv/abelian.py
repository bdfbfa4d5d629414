"""Canonical square roots, the Abelian primitive F, and action variables.

A :class:`SpectralCurve` bundles a discriminant (ZS in ``lam`` or Hill in ``mu``)
with its periodic spectrum.  The canonical root of ``Delta^2 - 4`` is fixed on
the band right of gap 0 by ``i sqrt > 0`` and continued by tracking the
principal square root along paths that avoid the real gaps.  The sign on each
further band is found by tracking over an upper semicircle around the gap in
between; no closed-form sign rule is assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .discriminant import hill_delta_many, hill_delta_q, zs_delta_many
from .potentials import GridFunction, Potential, mean, miura
from .spectrum import SPECTRUM_OVERSAMPLE, hill_spectrum, zs_spectrum

__all__ = [
    "BranchTrackingError",
    "Contour",
    "ActionRecord",
    "SpectralCurve",
    "AsymptoticFit",
    "canonical_root",
    "F_value",
    "F_mkdv_value",
    "action_I",
    "action_J",
    "mean_identity_residual",
    "asymptotic_hamiltonians",
    "radial_F_check",
    "actions_to_json",
]

# path spacing for root tracking
TRACK_STEP = 0.02
# off-axis height of tracking paths
TRACK_HEIGHT = 0.5
# the continued branch must be closer than this fraction of the distance to the other one
AMBIGUITY_RATIO = 0.3
REFINE_FACTOR = 16
DEFAULT_NODES = 256
SMALL_RADIUS = 0.05


class BranchTrackingError(RuntimeError):
    """The square-root branch could not be followed unambiguously."""


@dataclass(frozen=True)
class Contour:
    center: float
    radius: float
    n_points: int = DEFAULT_NODES
    encloses_origin: bool = False

    def nodes(self, n_points=None):
        m = self.n_points if n_points is None else n_points
        theta = 2 * np.pi * np.arange(m) / m
        return self.center + self.radius * np.exp(1j * theta)


@dataclass(frozen=True)
class ActionRecord:
    n: int
    k: int
    value: complex
    quad_error: float
    kind: str
    contour: Contour


@dataclass(frozen=True)
class AsymptoticFit:
    estimates: np.ndarray  # S_1 .. S_max_n
    condition: float
    residual: float
    samples: np.ndarray


def _principal_track(values_sq, w0, points, delta_fn, refined=False):
    """Follow ``sqrt(values_sq)`` continuously from ``w0``; refine once on ambiguity."""
    r = np.sqrt(values_sq)
    out = np.empty_like(r)
    out[0] = w0
    w = w0
    for k in range(1, r.size):
        rk = r[k]
        d1, d2 = abs(rk - w), abs(rk + w)
        if min(d1, d2) > AMBIGUITY_RATIO * max(d1, d2):
            if refined:
                raise BranchTrackingError(
                    f"square root branch ambiguous between {points[k - 1]:.6g} and {points[k]:.6g}")
            sub = np.linspace(points[k - 1], points[k], REFINE_FACTOR + 1)
            dsub = delta_fn(sub)
            rsub = _principal_track(dsub * dsub - 4.0, w, sub, delta_fn, refined=True)
            w = rsub[-1]
            # the refined end value selects the sign of rk
            w = rk if abs(rk - w) <= abs(rk + w) else -rk
        else:
            w = rk if d1 <= d2 else -rk
        out[k] = w
    return out


def _segment(a, b, step=TRACK_STEP):
    n = max(1, int(np.ceil(abs(b - a) / step)))
    return a + (b - a) * np.arange(1, n + 1) / n


class SpectralCurve:
    """Discriminant plus spectrum, with cached band signs and contour data.

    ``kind`` is ``"ZS"`` (variable lam) or ``"Hill"`` (variable mu).
    """

    def __init__(self, kind, delta_fn, jet_fn, table, oversample):
        self.kind = kind
        self._delta_fn = delta_fn
        self._jet_fn = jet_fn
        self.table = table
        self.oversample = oversample
        self._band_sign: Dict[int, float] = {0: 1.0}
        self._contours: Dict[tuple, tuple] = {}

    # -- construction ---------------------------------------------------------

    @classmethod
    def zs(cls, phi: Potential, n_spec: int, oversample=SPECTRUM_OVERSAMPLE):
        table = zs_spectrum(phi, n_spec, oversample)

        def delta_fn(lams):
            return zs_delta_many(phi, lams, oversample, with_jet=False)[0]

        def jet_fn(lams):
            return zs_delta_many(phi, lams, oversample)

        curve = cls("ZS", delta_fn, jet_fn, table, oversample)
        curve.potential = phi
        return curve

    @classmethod
    def hill(cls, u: GridFunction, n_spec: int, oversample=SPECTRUM_OVERSAMPLE):
        table = hill_spectrum(u, n_spec, oversample)
        q = miura(u)

        def delta_fn(mus):
            return hill_delta_q(q, mus, oversample, with_jet=False)[0]

        def jet_fn(mus):
            return hill_delta_q(q, mus, oversample)

        curve = cls("Hill", delta_fn, jet_fn, table, oversample)
        curve.potential = u
        return curve

    def delta(self, z):
        return self._delta_fn(np.atleast_1d(np.asarray(z, dtype=complex)))

    def delta_jet(self, z):
        return self._jet_fn(np.atleast_1d(np.asarray(z, dtype=complex)))

    # -- geometry ---------------------------------------------------------------

    def disc(self, n):
        if n not in self.table.discs:
            raise KeyError(f"{self.kind}: no isolating disc for gap {n} "
                           f"(table covers {self.table.indices[0]}..{self.table.indices[-1]})")
        return self.table.discs[n]

    def anchor(self, n):
        """Real point in the band right of gap n (the right edge of its disc)."""
        if self.kind == "Hill" and n == 0:
            mu0 = self.table.entries[0].plus
            nxt = self.table.entries[1].minus
            return mu0 + min(np.pi / 4, 0.45 * (nxt - mu0))
        c, r = self.disc(n)
        return c + r

    def in_gap(self, x):
        for n in self.table.indices:
            e = self.table.entries[n]
            lo = -np.inf if e.minus is None else e.minus
            if lo < x < e.plus:
                return n
        return None

    def contour(self, n, radius=None, n_points=None):
        """Default contour: halfway between the gap and the boundary of its disc."""
        if self.kind == "Hill" and n == 0:
            raise ValueError("the Hill gap G_0 is a half-line; no contour encircles it")
        c, R = self.disc(n)
        e = self.table.entries[n]
        half = 0.5 * e.gap
        if radius is None:
            radius = half + 0.5 * (R - half)
        if not half < radius < R or (half == 0 and radius <= 0):
            raise ValueError(f"radius {radius} does not fit between gap {n} and its disc")
        if n_points is None:
            n_points = 2 * DEFAULT_NODES if radius < SMALL_RADIUS else DEFAULT_NODES
        return Contour(c, radius, n_points, encloses_origin=abs(c) < radius)

    # -- canonical root -------------------------------------------------------

    def band_root(self, x, band, dval=None):
        """Canonical root at a real point of band ``band`` (between gaps band and band+1)."""
        d = self.delta([x])[0] if dval is None else dval
        return self.band_sign(band) * (-1j) * np.sqrt(complex(4.0 - d.real * d.real))

    def band_sign(self, band):
        if band in self._band_sign:
            return self._band_sign[band]
        step = 1 if band > 0 else -1
        b = 0
        while b != band:
            nb = b + step
            if nb not in self._band_sign:
                gap = nb if step > 0 else b  # gap separating bands b and nb
                c, r = self.disc(gap)
                a_pt, b_pt = (c - r, c + r) if step > 0 else (c + r, c - r)
                theta = np.linspace(np.pi, 0.0, 129) if step > 0 else np.linspace(0.0, np.pi, 129)
                path = c + r * np.exp(1j * theta)
                dvals = self.delta(path)
                w0 = self._band_sign[b] * (-1j) * np.sqrt(complex(4.0 - dvals[0].real ** 2))
                w = _principal_track(dvals * dvals - 4.0, w0, path, self.delta)
                ref = (-1j) * np.sqrt(complex(4.0 - dvals[-1].real ** 2))
                s = np.real(w[-1] / ref)
                if abs(abs(s) - 1.0) > 1e-6:
                    raise BranchTrackingError(f"{self.kind}: band sign across gap {gap} is not +-1")
                self._band_sign[nb] = float(np.sign(s))
            b = nb
        return self._band_sign[band]

    def band_of_anchor(self, n):
        return n

    def track(self, path, w0):
        dvals = self.delta(path)
        return _principal_track(dvals * dvals - 4.0, w0, path, self.delta), dvals

    def roots(self, targets, anchor_gap=0):
        """Canonical root (and Delta) at each target, tracked from the anchor of a gap.

        Paths rise from the real anchor to height ``+-0.5`` (or the target's
        height if larger), run horizontally, and descend to each target.
        """
        targets = np.atleast_1d(np.asarray(targets, dtype=complex))
        a = self.anchor(anchor_gap)
        da = self.delta([a])[0]
        wa = self.band_root(a, anchor_gap, da)
        roots = np.empty(targets.size, dtype=complex)
        deltas = np.empty(targets.size, dtype=complex)
        for t in targets:
            if t.imag == 0 and self.in_gap(t.real) is not None:
                raise ValueError(f"{self.kind}: point {t.real:.6g} lies inside gap "
                                 f"{self.in_gap(t.real)}; the canonical root is cut there")
        height = np.where(np.abs(targets.imag) >= TRACK_HEIGHT, targets.imag,
                          np.where(targets.imag >= 0, TRACK_HEIGHT, -TRACK_HEIGHT))
        upper = height > 0
        right = targets.real >= a
        for grp in (upper & right, upper & ~right, ~upper & right, ~upper & ~right):
            idx = np.nonzero(grp)[0]
            if idx.size == 0:
                continue
            order = idx[np.argsort(np.abs(targets.real[idx] - a))]
            pts = [np.array([a], dtype=complex)]
            marks = []
            cur = complex(a, height[order[0]])
            pts.append(_segment(complex(a), cur))
            for j in order:
                h = height[j]
                here = complex(targets[j].real, h)
                if cur.imag != h:
                    nxt = complex(cur.real, h)
                    pts.append(_segment(cur, nxt))
                    cur = nxt
                pts.append(_segment(cur, here))
                pts.append(_segment(here, targets[j]))
                marks.append((j, sum(p.size for p in pts) - 1))
                pts.append(_segment(targets[j], here))
                cur = here
            path = np.concatenate(pts)
            w, dv = self.track(path, wa)
            for j, pos in marks:
                roots[j] = w[pos]
                deltas[j] = dv[pos]
        # exact branch points
        tiny = np.abs(deltas * deltas - 4.0) < 1e-14
        roots[tiny] = 0.0
        return roots, deltas

    # -- F --------------------------------------------------------------------

    def F_local(self, deltas, roots, n):
        z = (-1.0) ** n * (deltas + roots) / 2.0
        return -1j * n * np.pi + np.log(z)

    def F(self, z, near_gap):
        r, d = self.roots(z, near_gap)
        return self.F_local(d, r, near_gap)

    def contour_data(self, contour: Contour, n):
        """Nodes, Delta, canonical root and F on a contour around gap n (cached).

        The root is tracked from the real node ``center + radius`` (in band n)
        counter-clockwise, and the loop must close on the same branch.  F uses
        the local logarithm, continued along the contour from its principal
        value at the starting node.
        """
        key = (n, contour.center, contour.radius, contour.n_points)
        if key in self._contours:
            return self._contours[key]
        nodes = contour.nodes()
        closed = np.append(nodes, nodes[0])
        dvals = self.delta(closed)
        w0 = self.band_root(closed[0].real, n, dvals[0])
        w = _principal_track(dvals * dvals - 4.0, w0, closed, self.delta)
        if abs(w[-1] - w[0]) > 1e-8 * max(1.0, abs(w[0])):
            raise BranchTrackingError(f"{self.kind}: canonical root does not close around gap {n}")
        z = (-1.0) ** n * (dvals[:-1] + w[:-1]) / 2.0
        logs = np.log(np.abs(z)) + 1j * np.unwrap(np.angle(z))
        F = -1j * n * np.pi + logs
        out = (nodes, dvals[:-1], w[:-1], F)
        self._contours[key] = out
        return out


def _circle_integral(contour: Contour, values, nodes, weight):
    """Trapezoidal ``oint weight * values dz`` on the circle, plus the half-node estimate."""
    dz = 1j * (nodes - contour.center)  # d z / d theta
    f = weight * values * dz
    full = 2 * np.pi * np.mean(f)
    half = 2 * np.pi * np.mean(f[::2])
    return full, abs(full - half)


# -- public functions ---------------------------------------------------------


def _zs_curve(phi, n, curve, oversample):
    if curve is not None:
        return curve
    return SpectralCurve.zs(phi, max(abs(n) + 1, 2), oversample)


def _hill_curve(u, n, curve, oversample):
    if curve is not None:
        return curve
    return SpectralCurve.hill(u, max(n + 1, 2), oversample)


def canonical_root(phi: Potential, lam, branch_anchor: int = 0, curve=None,
                   oversample=SPECTRUM_OVERSAMPLE):
    """Canonical root of ``Delta^2(lam) - 4`` by continuation from the band right of a gap."""
    curve = _zs_curve(phi, branch_anchor, curve, oversample)
    r, _ = curve.roots(lam, branch_anchor)
    return r if np.ndim(lam) else complex(r[0])


def F_value(phi: Potential, lam, near_gap: int, curve=None, oversample=SPECTRUM_OVERSAMPLE):
    """``F(lam) = -i n pi + log((-1)^n (Delta + sqrt)/2)`` near gap n (principal log)."""
    curve = _zs_curve(phi, near_gap, curve, oversample)
    out = curve.F(lam, near_gap)
    return out if np.ndim(lam) else complex(out[0])


def F_mkdv_value(u: GridFunction, mu, near_gap: int, curve=None,
                 oversample=SPECTRUM_OVERSAMPLE):
    """Hill analogue of :func:`F_value` in the variable mu."""
    curve = _hill_curve(u, near_gap, curve, oversample)
    out = curve.F(mu, near_gap)
    return out if np.ndim(mu) else complex(out[0])


def action_I(phi: Potential, n: int, k: int = 1, curve=None, radius=None, n_points=None,
             oversample=SPECTRUM_OVERSAMPLE) -> ActionRecord:
    """``I_{n,k} = -(1/pi) oint_{Gamma_n} lam^{k-1} F(lam) dlam`` by the trapezoidal rule."""
    curve = _zs_curve(phi, n, curve, oversample)
    if curve.kind != "ZS":
        raise ValueError("action_I needs a ZS curve")
    contour = curve.contour(n, radius, n_points)
    if k < 1 and contour.encloses_origin:
        raise ValueError(f"contour around gap {n} encloses the origin; level k={k} is singular")
    nodes, _, _, F = curve.contour_data(contour, n)
    val, err = _circle_integral(contour, F, nodes, nodes ** (k - 1))
    return ActionRecord(n, k, -val / np.pi, err / np.pi, "I", contour)


def action_J(u: GridFunction, n: int, k: int = 1, curve=None, radius=None, n_points=None,
             oversample=SPECTRUM_OVERSAMPLE) -> ActionRecord:
    """``J_{n,k} = -(1/4 pi) oint_{Sigma_n} mu^{k-2} F_mKdV(mu) dmu`` for ``n >= 1``."""
    if n < 1:
        raise ValueError("J_{n,k} is defined for n >= 1")
    curve = _hill_curve(u, n, curve, oversample)
    if curve.kind != "Hill":
        raise ValueError("action_J needs a Hill curve")
    contour = curve.contour(n, radius, n_points)
    if contour.encloses_origin:
        raise ValueError(f"contour around mKdV gap {n} must not enclose the origin")
    nodes, _, _, F = curve.contour_data(contour, n)
    val, err = _circle_integral(contour, F, nodes, nodes ** (k - 2))
    return ActionRecord(n, k, -val / (4 * np.pi), err / (4 * np.pi), "J", contour)


def mean_identity_residual(u: GridFunction, oversample=SPECTRUM_OVERSAMPLE) -> float:
    """``|Delta_mKdV(0, u) - 2 cosh([u])|``."""
    d, _ = hill_delta_many(u, [0.0], oversample, with_jet=False)
    return float(abs(d[0] - 2 * np.cosh(mean(u))))


def default_asymptotic_samples(m_lo=2, m_hi=10):
    m = np.arange(m_lo, m_hi + 1)
    pos = (m + 0.5) * np.pi
    return np.concatenate([-pos[::-1], pos])


def asymptotic_hamiltonians(phi: Potential, max_n: int = 4, lam_samples=None,
                            extra_terms: int = 3, curve=None, oversample=32) -> AsymptoticFit:
    """Least-squares fit of ``F(lam) + i lam = i sum_n S_n / (2 lam)^n`` at real band points.

    The default samples are the band centres ``+-(m + 1/2) pi``, ``m = 2..10``,
    arranged symmetrically so that the even and odd parts decouple.  The fit
    carries ``extra_terms`` further coefficients to absorb truncation; only
    ``S_1 .. S_max_n`` are returned.
    """
    lams = default_asymptotic_samples() if lam_samples is None else np.asarray(lam_samples, float)
    if curve is None:
        curve = SpectralCurve.zs(phi, 1, oversample)
    roots, deltas = curve.roots(lams.astype(complex), 0)
    # principal log is valid with n the nearest integer to lam / pi
    near = np.rint(lams / np.pi).astype(int)
    F = np.array([complex(curve.F_local(d, r, int(n))) for d, r, n in zip(deltas, roots, near)])
    y = F + 1j * lams
    K = max_n + extra_terms
    A = 1j * (2 * lams[:, None]) ** (-np.arange(1, K + 1)[None, :])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y)))
    return AsymptoticFit(coef[:max_n], float(np.linalg.cond(A)), resid, lams)


def radial_F_check(curve: SpectralCurve, n: int, theta=np.pi / 3, n_gauss=24):
    """Compare the local logarithm formula with path integration of ``Delta' / sqrt``.

    On the radial segment from the contour radius to the disc radius at angle
    ``theta``, ``F(b) - F(a)`` from the logarithm must equal the Gauss-Legendre
    integral of ``Delta'(z) / sqrt(Delta^2 - 4)``.  Returns the absolute difference.
    """
    c, R = curve.disc(n)
    contour = curve.contour(n)
    a = c + contour.radius * np.exp(1j * theta)
    b = c + 0.95 * R * np.exp(1j * theta)
    x, wts = np.polynomial.legendre.leggauss(n_gauss)
    pts = 0.5 * (a + b) + 0.5 * (b - a) * x
    # track along the contour arc to a, then along the segment through the nodes
    arc = c + contour.radius * np.exp(1j * np.linspace(0.0, theta, 65))
    start = curve.anchor(n)
    lead = np.concatenate([np.array([start], complex), _segment(start, arc[0]), arc[1:]])
    path = np.concatenate([lead, pts, [b]])
    dvals, dd = curve.delta_jet(path)
    w = _principal_track(dvals * dvals - 4.0, curve.band_root(start, n, dvals[0]), path,
                         curve.delta)
    nl = lead.size
    wa, wn, wb = w[nl - 1], w[nl:nl + n_gauss], w[-1]
    integral = 0.5 * (b - a) * np.sum(wts * dd[nl:nl + n_gauss] / wn)
    Fa = curve.F_local(dvals[nl - 1], wa, n)
    Fb = curve.F_local(dvals[-1], wb, n)
    return float(abs((Fb - Fa) - integral))


def actions_to_json(records):
    return [{"n": r.n, "k": r.k, "kind": r.kind, "value": [r.value.real, r.value.imag],
             "quad_error": r.quad_error,
             "contour": {"center": r.contour.center, "radius": r.contour.radius,
                         "n_points": r.contour.n_points}} for r in records]
