"""Periodic spectra of real-type Zakharov-Shabat and Hill potentials.

Eigenvalues are the zeros of ``g = Delta^2 - 4``, evaluated as
``(m1 - m4)^2 + 4 m2 m3`` from the monodromy matrix.  On the real axis ``g`` is
negative on the bands and non-negative on the closed gaps ``[lam_n^-, lam_n^+]``;
each window around ``n pi`` (or ``n^2 pi^2``) holds one gap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .discriminant import hill_gap_function, zs_gap_function
from .potentials import GridFunction, Potential, miura

__all__ = [
    "SpectrumError",
    "SpectrumEntry",
    "SpectrumTable",
    "zs_spectrum",
    "hill_spectrum",
    "isolating_discs",
    "spectrum_to_json",
    "SPECTRUM_OVERSAMPLE",
]

SPECTRUM_OVERSAMPLE = 16
WINDOW_MARGIN = 1e-3
SCAN_POINTS = 64
# |Delta^2 - 4| below this at the critical point counts as a double eigenvalue
DOUBLE_ROOT_TOL = 1e-10
DISC_CAP = np.pi / 4
DISC_FRACTION = 0.45


class SpectrumError(RuntimeError):
    """Root bracketing failed, or the potential is outside the supported class."""


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    minus: Optional[float]  # None for the Hill ground state, whose gap is a half-line
    plus: float
    double: bool

    @property
    def gap(self) -> float:
        if self.minus is None:
            return float("inf")
        return self.plus - self.minus

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.minus + self.plus)


@dataclass
class SpectrumTable:
    kind: str
    entries: Dict[int, SpectrumEntry]
    discs: Dict[int, Tuple[float, float]] = field(default_factory=dict)

    @property
    def indices(self):
        return sorted(self.entries)

    def pair(self, n):
        e = self.entries[n]
        return e.minus, e.plus

    def gaps(self):
        return {n: e.gap for n, e in self.entries.items()}

    def eigenvalues(self):
        """All eigenvalues in increasing order (ground state of Hill listed once)."""
        out = []
        for n in self.indices:
            e = self.entries[n]
            if e.minus is not None:
                out.append(e.minus)
            out.append(e.plus)
        return np.array(out)


# -- root finding -------------------------------------------------------------


def _polish(fun, dfun, x, lo, hi):
    """One guarded Newton step; kept only if it stays in [lo, hi] and lowers |f|."""
    f0 = fun(x)
    d = dfun(x)
    if d == 0 or not np.isfinite(d):
        return x
    y = x - f0 / d
    if lo <= y <= hi and abs(fun(y)) < abs(f0):
        return y
    return x


def _window_roots(n, pts, gvals, g, dg, label):
    """Eigenvalue pair inside one window.

    ``pts`` are the scan abscissae (increasing), ``gvals`` the values of ``g``.
    """
    pos = gvals > 0
    changes = np.nonzero(pos[1:] != pos[:-1])[0]
    if pos[0] or pos[-1]:
        raise SpectrumError(f"{label}: n={n}: window [{pts[0]:.6g}, {pts[-1]:.6g}] "
                            "does not isolate the eigenvalue pair (Delta^2 > 4 at the edge)")
    if len(changes) == 2:
        i, j = changes
        lo = brentq(g, pts[i], pts[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        hi = brentq(g, pts[j], pts[j + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        lo = _polish(g, dg, lo, pts[i], pts[i + 1])
        hi = _polish(g, dg, hi, pts[j], pts[j + 1])
        return lo, hi, False
    if len(changes) != 0:
        raise SpectrumError(f"{label}: n={n}: {len(changes)} sign changes in the window")
    # no sign change: locate the maximum of g through the critical point g' = 0
    k = int(np.argmax(gvals))
    if k == 0 or k == len(pts) - 1:
        raise SpectrumError(f"{label}: n={n}: no interior maximum of Delta^2 - 4 in the window")
    a, b = pts[k - 1], pts[k + 1]
    if dg(a) * dg(b) > 0:
        raise SpectrumError(f"{label}: n={n}: could not bracket the critical point")
    c = brentq(dg, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    gc = g(c)
    if abs(gc) < DOUBLE_ROOT_TOL:
        return c, c, True
    if gc > 0:
        lo = brentq(g, a, c, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        hi = brentq(g, c, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return lo, hi, False
    raise SpectrumError(f"{label}: n={n}: max of Delta^2 - 4 is {gc:.3g} < 0; "
                        "no eigenvalues found in the window")


def _scan_grid(n):
    w = np.pi / 2 - WINDOW_MARGIN
    return n * np.pi + np.linspace(-w, w, SCAN_POINTS)


def zs_spectrum(phi: Potential, n_spec: int, oversample=SPECTRUM_OVERSAMPLE) -> SpectrumTable:
    """Eigenvalue pairs ``lam_n^-, lam_n^+`` for ``|n| <= n_spec`` of a real-type potential."""
    if not phi.is_real_type:
        raise SpectrumError(f"spectrum requires a real-type potential (H_r or E_r), "
                            f"got class {phi.class_tag}")
    ns = list(range(-n_spec, n_spec + 1))
    grids = np.array([_scan_grid(n) for n in ns])
    vals, _ = zs_gap_function(phi, grids.ravel(), oversample, with_jet=False)
    vals = vals.real.reshape(grids.shape)

    def g(x):
        return zs_gap_function(phi, [x], oversample, with_jet=False)[0][0].real

    def dg(x):
        return zs_gap_function(phi, [x], oversample)[1][0].real

    entries = {}
    for row, n in enumerate(ns):
        lo, hi, dbl = _window_roots(n, grids[row], vals[row], g, dg, "ZS spectrum")
        entries[n] = SpectrumEntry(n, float(lo), float(hi), dbl)
    table = SpectrumTable("ZS", entries)
    table.discs = isolating_discs(table)
    return table


def hill_spectrum(u: GridFunction, n_spec: int, oversample=SPECTRUM_OVERSAMPLE) -> SpectrumTable:
    """Periodic and antiperiodic eigenvalues ``mu_0^+, mu_n^-, mu_n^+`` (n <= n_spec) of the
    Hill operator with Miura potential ``u_x + u^2``.

    Scan points for ``n >= 1`` are the squares of the ZS scan points so both
    problems bracket on corresponding abscissae.
    """
    if not u.is_real():
        raise SpectrumError("Hill spectrum requires a real-valued u")
    q = miura(u)
    w = np.pi / 2 - WINDOW_MARGIN
    grids = [np.linspace(-1.0, w * w, SCAN_POINTS)]
    grids += [_scan_grid(n) ** 2 for n in range(1, n_spec + 1)]
    grids = np.array(grids)
    vals, _ = hill_gap_function(q, grids.ravel(), oversample, with_jet=False)
    vals = vals.real.reshape(grids.shape)

    def g(x):
        return hill_gap_function(q, [x], oversample, with_jet=False)[0][0].real

    def dg(x):
        return hill_gap_function(q, [x], oversample)[1][0].real

    entries = {}
    for n in range(0, n_spec + 1):
        pts, gv = grids[n], vals[n]
        if n == 0:
            # ground state: Delta^2 > 4 on the half-line gap below, < 4 on the first band
            pos = gv > 0
            changes = np.nonzero(pos[1:] != pos[:-1])[0]
            if not pos[0] or len(changes) != 1:
                raise SpectrumError(f"Hill spectrum: n=0: could not bracket mu_0^+ in "
                                    f"[{pts[0]:.6g}, {pts[-1]:.6g}]")
            i = changes[0]
            mu = brentq(g, pts[i], pts[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            mu = _polish(g, dg, mu, pts[i], pts[i + 1])
            entries[0] = SpectrumEntry(0, None, float(mu), False)
            continue
        lo, hi, dbl = _window_roots(n, pts, gv, g, dg, "Hill spectrum")
        entries[n] = SpectrumEntry(n, float(lo), float(hi), dbl)
    table = SpectrumTable("Hill", entries)
    table.discs = isolating_discs(table)
    return table


def isolating_discs(table: SpectrumTable) -> Dict[int, Tuple[float, float]]:
    """Pairwise disjoint discs, one per gap, centred at the gap midpoints.

    The radius is ``gap/2 + min(pi/4, 0.45 d)`` with ``d`` the distance from the
    gap to the nearest neighbouring gap, so each disc contains its gap even when
    the gap is wider than ``pi/2``.  Beyond the ends of a ZS table the neighbour
    is taken to be the unperturbed point ``(n +- 1) pi``.  For Hill tables the
    half-line ``G_0`` gets no disc; it is a neighbour of ``G_1`` through ``mu_0^+``.
    """
    idx = table.indices
    ivals = {}
    for n in idx:
        e = table.entries[n]
        ivals[n] = (-np.inf if e.minus is None else e.minus, e.plus)
    for a, b in zip(idx[:-1], idx[1:]):
        if not ivals[a][1] < ivals[b][0]:
            raise SpectrumError(f"{table.kind}: gaps {a} and {b} overlap; "
                                "potential too far from the real-type regime")
    discs = {}
    for n in idx:
        lo, hi = ivals[n]
        if not np.isfinite(lo):
            continue
        left = ivals[n - 1][1] if (n - 1) in ivals else None
        right = ivals[n + 1][0] if (n + 1) in ivals else None
        if table.kind == "ZS":
            if left is None:
                left = (n - 1) * np.pi
            if right is None:
                right = (n + 1) * np.pi
        else:
            if right is None:
                right = ((n + 1) * np.pi) ** 2
        d = min(lo - left, right - hi)
        discs[n] = (0.5 * (lo + hi), 0.5 * (hi - lo) + min(DISC_CAP, DISC_FRACTION * d))
    return discs


def spectrum_to_json(table: SpectrumTable) -> dict:
    entries = []
    for n in table.indices:
        e = table.entries[n]
        entries.append({"n": n, "lam_minus": e.minus, "lam_plus": e.plus,
                        "gap": None if e.minus is None else e.gap, "double": e.double})
    discs = [{"n": n, "center": c, "radius": r} for n, (c, r) in sorted(table.discs.items())]
    return {"kind": table.kind, "entries": entries, "discs": discs}


def dump_spectrum(table: SpectrumTable, path):
    with open(path, "w") as fh:
        json.dump(spectrum_to_json(table), fh, indent=2)
