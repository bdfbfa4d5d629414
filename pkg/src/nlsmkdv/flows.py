"""Pseudo-spectral integrating-factor RK4 for the mKdV, NLS and S4 flows.

Fields (``' = d/dx``, state ``phi = (a, b) = (phi_-, phi_+)``)::

    mkdv_defocusing   u_t = -u''' + 6 u^2 u'
    mkdv_focusing     u_t = -u''' - 6 u^2 u'
    nls_system        i a_t = -a'' + 2 b a^2,   i b_t = b'' - 2 a b^2
    s4_system         a_t = -a''' + 6 a b a',  b_t = -b''' + 6 a b b'

The linear part is integrated exactly in Fourier space; the nonlinear part is
advanced by classical RK4 in the interaction frame.  Nonlinear terms and the
state are truncated by the 2/3 rule every stage.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Union

import numpy as np

from .hierarchy import HamiltonianId, eval_hamiltonian
from .potentials import GridFunction, Potential, diagonal, mean
from .spectrum import zs_spectrum

__all__ = [
    "FIELDS",
    "FlowSpec",
    "Trajectory",
    "FlowBlowUpError",
    "ResolutionWarning",
    "evolve",
    "restriction_check",
    "diagonal_deviation",
    "conservation_report",
    "isospectrality_probe",
    "convergence_study",
    "dump_trajectory_csv",
]

FIELDS = ("mkdv_defocusing", "mkdv_focusing", "nls_system", "s4_system")
BLOWUP_FACTOR = 1e6
# tail = largest normalised Fourier coefficient in the upper half of the retained band
TAIL_START = 1e-10
TAIL_WARN = 1e-6


class FlowBlowUpError(RuntimeError):
    """The sup-norm grew by more than ``BLOWUP_FACTOR`` or became non-finite."""


class ResolutionWarning(RuntimeWarning):
    """Energy reached the upper Fourier modes; the grid no longer resolves the solution."""


@dataclass(frozen=True)
class FlowSpec:
    field: str
    t_end: float
    dt: float
    record_every: int = 100

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"unknown field {self.field!r}; expected one of {FIELDS}")
        if not (self.dt > 0 and self.t_end >= 0):
            raise ValueError("need dt > 0 and t_end >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    field: str
    times: np.ndarray
    states: List[Union[GridFunction, Potential]] = field(default_factory=list)
    max_tail: float = 0.0

    def __len__(self):
        return len(self.states)


# -- spectral machinery ------------------------------------------------------------


def _wavenumbers(n):
    return 2 * np.pi * np.fft.fftfreq(n, 1.0 / n)


def _dealias_mask(n):
    m = np.abs(np.fft.fftfreq(n, 1.0 / n))
    return m < n / 3.0


def _tail(hats, n):
    m = np.abs(np.fft.fftfreq(n, 1.0 / n))
    band = (m >= n / 4.0)
    return max(float(np.max(np.abs(h[band]))) / n for h in hats)


def _linear_symbol(field_name, k):
    if field_name in ("mkdv_defocusing", "mkdv_focusing", "s4_system"):
        sym = 1j * k ** 3          # -d^3/dx^3
        return [sym] if field_name != "s4_system" else [sym, sym]
    return [-1j * k ** 2, 1j * k ** 2]   # a_t = i a'', b_t = -i b''


def _nonlinear(field_name, k, mask):
    ifft, fft = np.fft.ifft, np.fft.fft

    if field_name in ("mkdv_defocusing", "mkdv_focusing"):
        sign = 2.0 if field_name == "mkdv_defocusing" else -2.0

        def N(hats):
            u = ifft(hats[0]).real
            return [mask * (sign * 1j * k) * fft(u ** 3)]
        return N

    if field_name == "nls_system":
        def N(hats):
            a, b = ifft(hats[0]), ifft(hats[1])
            ab = a * b
            return [mask * fft(-2j * ab * a), mask * fft(2j * ab * b)]
        return N

    def N(hats):
        a, b = ifft(hats[0]), ifft(hats[1])
        ax, bx = ifft(1j * k * hats[0]), ifft(1j * k * hats[1])
        ab6 = 6.0 * a * b
        return [mask * fft(ab6 * ax), mask * fft(ab6 * bx)]
    return N


def _unpack(state, field_name):
    if field_name.startswith("mkdv"):
        if not isinstance(state, GridFunction):
            raise TypeError(f"{field_name} evolves a single function u")
        if not state.is_real():
            raise ValueError(f"{field_name} requires real initial data")
        return [state.values.real.astype(complex)]
    if not isinstance(state, Potential):
        raise TypeError(f"{field_name} evolves a potential (phi_-, phi_+)")
    return [state.minus.values, state.plus.values]


def _pack(vals, field_name):
    if field_name.startswith("mkdv"):
        return GridFunction(vals[0].real, real=True)
    return Potential(GridFunction(vals[0]), GridFunction(vals[1]))


def evolve(state, spec: FlowSpec) -> Trajectory:
    """Integrate ``state`` under ``spec.field`` and record every ``record_every`` steps.

    The final time is always recorded.  Raises :class:`FlowBlowUpError` on
    norm growth, :class:`ValueError` if the initial tail exceeds ``1e-10``, and
    emits :class:`ResolutionWarning` once the tail exceeds ``1e-6``.
    """
    vals = _unpack(state, spec.field)
    n = vals[0].size
    k = _wavenumbers(n)
    mask = _dealias_mask(n)
    hats = [mask * np.fft.fft(v) for v in vals]
    tail0 = _tail(hats, n)
    if tail0 > TAIL_START:
        raise ValueError(f"initial data under-resolved: Fourier tail {tail0:.2e} > {TAIL_START:g}; "
                         "increase n_modes")
    symbols = _linear_symbol(spec.field, k)
    dt = spec.dt
    E = [np.exp(0.5 * dt * s) for s in symbols]
    E2 = [e * e for e in E]
    N = _nonlinear(spec.field, k, mask)
    sup0 = max(float(np.max(np.abs(v))) for v in vals)
    limit = BLOWUP_FACTOR * max(sup0, 1.0)

    traj = Trajectory(spec.field, np.zeros(0), [], tail0)
    times = [0.0]
    traj.states.append(_pack([np.fft.ifft(h) for h in hats], spec.field))
    warned = False
    n_steps = spec.n_steps
    for step in range(1, n_steps + 1):
        k1 = N(hats)
        k2 = N([e * (h + 0.5 * dt * a) for e, h, a in zip(E, hats, k1)])
        k3 = N([e * h + 0.5 * dt * b for e, h, b in zip(E, hats, k2)])
        k4 = N([e2 * h + dt * e * c for e2, e, h, c in zip(E2, E, hats, k3)])
        hats = [e2 * h + dt / 6.0 * (e2 * a + 2.0 * e * (b + c) + d)
                for e2, e, h, a, b, c, d in zip(E2, E, hats, k1, k2, k3, k4)]
        if step % spec.record_every == 0 or step == n_steps:
            vals = [np.fft.ifft(h) for h in hats]
            sup = max(float(np.max(np.abs(v))) for v in vals)
            if not np.isfinite(sup) or sup > limit:
                raise FlowBlowUpError(f"{spec.field}: sup-norm {sup:.3g} at t={step * dt:.6g}")
            tail = _tail(hats, n)
            traj.max_tail = max(traj.max_tail, tail)
            if tail > TAIL_WARN and not warned:
                warnings.warn(f"{spec.field}: Fourier tail {tail:.2e} at t={step * dt:.6g}",
                              ResolutionWarning, stacklevel=2)
                warned = True
            times.append(step * dt)
            traj.states.append(_pack(vals, spec.field))
    traj.times = np.array(times)
    return traj


# -- dynamical checks ---------------------------------------------------------------


def restriction_check(u0: GridFunction, t_end: float, dt: float = 1e-5, record_every: int = 100,
                      focusing: bool = False, return_trajectories: bool = False):
    """Max over records of ``|phi_-(t) - u(t)|`` for the S4 flow from the diagonal.

    Defocusing: S4 flow from ``(u0, u0)`` against mKdV from ``u0``.  Focusing:
    S4 flow from ``(i u0, i u0)``, whose first component divided by ``i``
    is compared with focusing mKdV from ``u0``.
    """
    phase = 1j if focusing else 1.0
    phi0 = Potential(u0 * phase, u0 * phase)
    s4 = evolve(phi0, FlowSpec("s4_system", t_end, dt, record_every))
    mk = evolve(u0, FlowSpec("mkdv_focusing" if focusing else "mkdv_defocusing",
                             t_end, dt, record_every))
    err = max(float(np.max(np.abs(p.minus.values / phase - u.values)))
              for p, u in zip(s4.states, mk.states))
    if return_trajectories:
        return err, s4, mk
    return err


def diagonal_deviation(traj: Trajectory) -> float:
    """Max over records of ``|phi_+ - phi_-|`` (sup over the grid)."""
    return max(float(np.max(np.abs(p.plus.values - p.minus.values))) for p in traj.states)


def _quantity(name, state):
    if name == "mean":
        if isinstance(state, GridFunction):
            return mean(state)
        return np.array([mean(state.minus), mean(state.plus)])
    return eval_hamiltonian(name, state)


def conservation_report(traj: Trajectory, which: Iterable) -> Dict[str, float]:
    """``max_t |H(t) - H(0)|`` for each entry of ``which`` (HamiltonianIds or ``"mean"``)."""
    out = {}
    for item in which:
        name = "mean" if str(item).lower() == "mean" else HamiltonianId.parse(str(item))
        vals = [np.atleast_1d(_quantity(name, s)) for s in traj.states]
        out[str(name)] = float(max(np.max(np.abs(v - vals[0])) for v in vals))
    return out


def _as_zs(state):
    if isinstance(state, GridFunction):
        return diagonal(state)
    return state


def isospectrality_probe(traj: Trajectory, n_range: int, max_records: int = None,
                         oversample: int = None) -> float:
    """Max over recorded times and ``|n| <= n_range`` of ``|lam_n^+-(t) - lam_n^+-(0)|``.

    ``max_records`` evenly subsamples the trajectory (first and last kept).
    """
    idx = np.arange(len(traj.states))
    if max_records is not None and len(idx) > max_records:
        idx = np.unique(np.round(np.linspace(0, len(idx) - 1, max_records)).astype(int))
    kw = {} if oversample is None else {"oversample": oversample}
    ref = None
    drift = 0.0
    for i in idx:
        table = zs_spectrum(_as_zs(traj.states[i]), n_range, **kw)
        ev = np.array([[table.entries[n].minus, table.entries[n].plus]
                       for n in range(-n_range, n_range + 1)])
        if ref is None:
            ref = ev
        else:
            drift = max(drift, float(np.max(np.abs(ev - ref))))
    return drift


def convergence_study(state, field_name: str, t_end: float, dt: float, levels: int = 2):
    """Errors at ``dt, dt/2, ..., dt/2^(levels-1)`` against a ``dt / 2^(levels+1)`` reference.

    Returns ``(dts, errors, observed_orders)``; the scheme is fourth order, so
    each halving should reduce the error by about 16.
    """
    def final(h):
        tr = evolve(state, FlowSpec(field_name, t_end, h, record_every=10 ** 9))
        return np.concatenate([np.ravel(c.values) for c in
                               ([tr.states[-1]] if isinstance(tr.states[-1], GridFunction)
                                else tr.states[-1].components())])

    ref = final(dt / 2 ** (levels + 1))
    dts = np.array([dt / 2 ** j for j in range(levels)])
    errs = np.array([np.max(np.abs(final(h) - ref)) for h in dts])
    orders = np.log2(errs[:-1] / errs[1:])
    return dts, errs, orders


def dump_trajectory_csv(traj: Trajectory, path):
    """Rows ``t, re/im of each component sample`` with repr floats."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for t, s in zip(traj.times, traj.states):
            comps = [s] if isinstance(s, GridFunction) else list(s.components())
            row = [repr(float(t))]
            for c in comps:
                for z in c.values:
                    row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(row)


def summary_json(traj: Trajectory, drifts: Dict[str, float]) -> str:
    return json.dumps({"field": traj.field, "t_end": float(traj.times[-1]),
                       "records": len(traj), "max_tail": traj.max_tail, "drift": drifts},
                      indent=2)
