"""Residual suite behind the ``verify`` command.

Each check produces a :class:`CheckResult` naming the identity, the residual
and the tolerance it is held to.  The suite runs over a corpus of real
trigonometric potentials; cheap identities run on every entry, the spectral,
action and flow checks on the first ``heavy`` entries.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Dict, List, Optional

import numpy as np

from . import abelian, discriminant, flows, hierarchy, spectrum
from .potentials import (
    GridFunction,
    Potential,
    diagonal,
    make_trig,
    potential_from_json,
    potential_to_json,
    random_trig,
    transform,
)

__all__ = [
    "CheckResult",
    "DEFAULT_TOLERANCES",
    "IDENTITY_DESCRIPTIONS",
    "MIN_TOLERANCE",
    "load_corpus",
    "generate_corpus",
    "corpus_to_json",
    "run_suite",
    "report_json",
]

MIN_TOLERANCE = 1e-12

DEFAULT_TOLERANCES: Dict[str, float] = {
    "zero_potential_discriminant": 1e-10,
    "discriminant_correspondence": 1e-7,
    "discriminant_evenness": 1e-8,
    "mean_identity": 1e-8,
    "conjugation_identity": 1e-8,
    "gradient_finite_difference": 1e-6,
    "gradient_swap_symmetry": 1e-8,
    "xi_identity": 1e-6,
    "spectrum_squaring": 1e-6,
    "spectrum_symmetry": 1e-8,
    "action_correspondence": 1e-6,
    "action_evenness": 1e-7,
    "hierarchy_restriction": 1e-9,
    "hierarchy_gradient_shift": 1e-9,
    "hierarchy_hamiltonian_match": 1e-9,
    "hierarchy_even_vanishing": 1e-9,
    "hierarchy_reflection": 1e-8,
    "flow_restriction": 1e-6,
    "flow_diagonal_invariance": 1e-7,
}

IDENTITY_DESCRIPTIONS: Dict[str, str] = {
    "zero_potential_discriminant": "Delta(lam, 0) = 2 cos(lam)",
    "discriminant_correspondence": "Delta_mKdV(lam^2, u) = Delta(lam, (u, u))",
    "discriminant_evenness": "Delta(lam, (u, u)) is even in lam",
    "mean_identity": "Delta_mKdV(0, u) = 2 cosh([u])",
    "conjugation_identity": "M_mKdV(1, lam^2) = A M(1, lam) A^-1",
    "gradient_finite_difference": "analytic dDelta matches central differences",
    "gradient_swap_symmetry": "dDelta(lam, phi) = P dDelta(-lam, P phi)",
    "xi_identity": "d/dx dDelta - 2 lam R dDelta = xi J phi",
    "spectrum_squaring": "mu_n^+- = (lam_n^+-)^2",
    "spectrum_symmetry": "lam_-n^-+ = -lam_n^+- on the diagonal",
    "action_correspondence": "2 J_{n,k} = I_{n,2k-2} on the diagonal",
    "action_evenness": "I_-n = I_n on the diagonal",
    "hierarchy_restriction": "X_{S_2m}(u, u) = (Y_{K_m}, Y_{K_m})",
    "hierarchy_gradient_shift": "-i J dS_2m = d/dx dS_{2m-1} when P phi = R_alpha phi",
    "hierarchy_hamiltonian_match": "K_m = S_{2m-1}(u, u) / 2",
    "hierarchy_even_vanishing": "S_2m(u, u) = 0",
    "hierarchy_reflection": "R dS_2m = d/dx dS_{2m-1} + 2i (int R phi . dS_{2m-1}) J phi when T phi = +-phi",
    "flow_restriction": "S4 flow from (u, u) restricts to mKdV",
    "flow_diagonal_invariance": "the diagonal is invariant under the S4 flow",
}


@dataclass
class CheckResult:
    identity: str
    potential: str
    m: Optional[int]
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_json(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        d["description"] = IDENTITY_DESCRIPTIONS.get(self.identity, "")
        return d

    def message(self):
        status = "pass" if self.passed else "FAIL"
        m = "" if self.m is None else f" m={self.m}"
        return (f"[{status}] {self.identity}{m} on {self.potential}: residual {self.residual:.3e} "
                f"(tol {self.tolerance:.1e}) -- {IDENTITY_DESCRIPTIONS.get(self.identity, '')}"
                + (f" [{self.detail}]" if self.detail else ""))


# -- corpus ------------------------------------------------------------------------


def generate_corpus(seed: int = 0, count: int = 20, n_modes: int = 64):
    """``count`` random real trigonometric potentials (degree 3, sup-norm <= 1)."""
    out = []
    for j in range(count):
        rng = np.random.default_rng(seed + j)
        out.append((f"random_{seed + j}", random_trig(rng, n_modes=n_modes)))
    return out


def corpus_to_json(entries) -> dict:
    return {"potentials": [{"name": name, "potential": potential_to_json(diagonal(u))}
                           for name, u in entries]}


def load_corpus(path=None):
    """Entries ``(name, u)`` from a corpus file; the bundled corpus when ``path`` is None."""
    if path is None:
        text = resources.files("nlsmkdv").joinpath("data/corpus.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    data = json.loads(text)
    out = []
    for item in data["potentials"]:
        phi = potential_from_json(item["potential"])
        if not phi.is_diagonal or not phi.minus.is_real():
            raise ValueError(f"corpus entry {item['name']!r} is not a real diagonal potential")
        out.append((item["name"], phi.minus.as_real()))
    return out


# -- checks ------------------------------------------------------------------------


def _grid(points, half_width=6.0):
    s = np.linspace(-half_width, half_width, points)
    return (s[:, None] + 1j * s[None, :]).ravel()


def _random_direction(rng, n_modes, degree=3):
    table = {k: complex(rng.normal(), rng.normal()) for k in range(-degree, degree + 1)}
    return make_trig(table, n_modes)


def _fd_gradient_error(phi, lam, rng, n_dirs, h=1e-6):
    grad = discriminant.zs_gradient(phi, lam)
    worst = 0.0
    for _ in range(n_dirs):
        d = Potential(_random_direction(rng, phi.n_modes), _random_direction(rng, phi.n_modes))
        vp = discriminant.zs_delta(phi + d * h, lam).value
        vm = discriminant.zs_delta(phi - d * h, lam).value
        fd = (vp - vm) / (2 * h)
        an = grad.pairing(d)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    return worst


def _cheap_checks(name, u, grid_points):
    phi = diagonal(u)
    out = []
    lams = _grid(grid_points)
    dz, _ = discriminant.zs_delta_many(phi, lams, with_jet=False)
    dh, _ = discriminant.hill_delta_many(u, lams * lams, with_jet=False)
    dneg, _ = discriminant.zs_delta_many(phi, -lams, with_jet=False)
    out.append(("discriminant_correspondence", None, float(np.max(np.abs(dz - dh))), ""))
    out.append(("discriminant_evenness", None, float(np.max(np.abs(dz - dneg))), ""))
    out.append(("mean_identity", None, abelian.mean_identity_residual(u), ""))
    for r in hierarchy.identity_residuals(u):
        if r.applicable and r.name != "reflection":
            out.append((f"hierarchy_{r.name}", r.m, r.residual, r.note))
    return [(name,) + c for c in out]


def _heavy_checks(name, u, n_spec, rng):
    phi = diagonal(u)
    out = []
    out.append(("conjugation_identity", None,
                discriminant.conjugation_residual(u, 2.0 + 1.0j), "lam=2+i"))
    out.append(("gradient_finite_difference", None, _fd_gradient_error(phi, 1.3 + 0.4j, rng, 2),
                "lam=1.3+0.4i"))
    g = discriminant.zs_gradient(phi, 1.3)
    gp = discriminant.zs_gradient(transform(phi, "P"), -1.3)
    res = max(np.max(np.abs(g.d_minus.values - gp.d_plus.values)),
              np.max(np.abs(g.d_plus.values - gp.d_minus.values)))
    out.append(("gradient_swap_symmetry", None, float(res), "lam=1.3"))
    _, res = discriminant.xi_identity_residual(phi, 1.3)
    out.append(("xi_identity", None, res, "lam=1.3"))

    zs = spectrum.zs_spectrum(phi, n_spec)
    hill = spectrum.hill_spectrum(u, n_spec)
    sq = abs(hill.entries[0].plus - zs.entries[0].plus ** 2)
    sq = max(sq, abs(hill.entries[0].plus - zs.entries[0].minus ** 2))
    sym = 0.0
    for n in range(1, n_spec + 1):
        lo, hi = zs.pair(n)
        mlo, mhi = hill.pair(n)
        sq = max(sq, abs(mlo - lo * lo), abs(mhi - hi * hi))
        nlo, nhi = zs.pair(-n)
        sym = max(sym, abs(nlo + hi), abs(nhi + lo))
    sym = max(sym, abs(zs.entries[0].minus + zs.entries[0].plus))
    out.append(("spectrum_squaring", None, float(sq), f"|n|<={n_spec}"))
    out.append(("spectrum_symmetry", None, float(sym), f"|n|<={n_spec}"))

    zcurve = abelian.SpectralCurve.zs(phi, 2)
    hcurve = abelian.SpectralCurve.hill(u, 2)
    corr = 0.0
    for k in (0, 1, 2):
        two_j = 2 * abelian.action_J(u, 1, k, curve=hcurve).value
        i_val = abelian.action_I(phi, 1, 2 * k - 2, curve=zcurve).value
        corr = max(corr, abs(two_j - i_val))
    out.append(("action_correspondence", None, float(corr), "n=1, k=0,1,2"))
    ev = abs(abelian.action_I(phi, -1, 1, curve=zcurve).value
             - abelian.action_I(phi, 1, 1, curve=zcurve).value)
    out.append(("action_evenness", None, float(ev), "n=1"))
    return [(name,) + c for c in out]


def _reflection_potential(n_modes=64):
    a = make_trig({0: 0.2, 1: 0.3 + 0.1j, -1: 0.3 + 0.1j, 2: 0.1j, -2: 0.1j}, n_modes)
    b = make_trig({0: 0.1j, 1: 0.2, -1: 0.2, 3: 0.05, -3: 0.05}, n_modes)
    return Potential(a, b)


def run_suite(corpus=None, tolerances=None, n_spec: int = 4, heavy: int = 2,
              grid_points: int = 5, flow_t_end: float = 0.01, flow_dt: float = 1e-5,
              seed: int = 0, progress=None) -> List[CheckResult]:
    """Run every identity check; returns results in a fixed order."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        for key, val in tolerances.items():
            if key not in tol:
                raise KeyError(f"unknown tolerance {key!r}")
            if val < MIN_TOLERANCE:
                raise ValueError(f"tolerance {key}={val:g} is below the floor {MIN_TOLERANCE:g}")
            tol[key] = float(val)
    if corpus is None:
        corpus = load_corpus()
    rng = np.random.default_rng(seed)
    rows = []

    lams = _grid(grid_points)
    zero = diagonal(GridFunction.zeros())
    d0, _ = discriminant.zs_delta_many(zero, lams, with_jet=False)
    rows.append(("zero", "zero_potential_discriminant", None,
                 float(np.max(np.abs(d0 - 2 * np.cos(lams)))), ""))

    for i, (name, u) in enumerate(corpus):
        if progress:
            progress(f"checking {name}")
        rows += _cheap_checks(name, u, grid_points)
        if i < heavy:
            rows += _heavy_checks(name, u, n_spec, rng)

    refl = _reflection_potential()
    for r in hierarchy.identity_residuals(refl):
        if r.name == "reflection":
            rows.append(("reflection_symmetric", "hierarchy_reflection", r.m, r.residual, r.note))

    u0 = make_trig({1: 0.25, -1: 0.25})
    err, s4, _ = flows.restriction_check(u0, flow_t_end, flow_dt, return_trajectories=True)
    rows.append(("cos_0.5", "flow_restriction", None, err, f"t_end={flow_t_end:g}, dt={flow_dt:g}"))
    rows.append(("cos_0.5", "flow_diagonal_invariance", None, flows.diagonal_deviation(s4), ""))

    results = []
    for pot, ident, m, res, detail in rows:
        t = tol[ident]
        results.append(CheckResult(ident, pot, m, float(res), t, bool(res <= t), detail))
    return results


def report_json(results: List[CheckResult]) -> str:
    return json.dumps({"all_pass": all(r.passed for r in results),
                       "n_checks": len(results),
                       "results": [r.to_json() for r in results]}, indent=2)
