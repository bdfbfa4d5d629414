"""A short walk through the package on the potential u(x) = 0.5 cos(2 pi x)."""

import numpy as np

from nlsmkdv import abelian, discriminant, flows, hierarchy, spectrum
from nlsmkdv.potentials import diagonal, make_trig

u = make_trig({1: 0.25, -1: 0.25}).as_real()
phi = diagonal(u)

print("discriminants at a few spectral parameters")
for lam in (0.5, 2.0 + 0.5j, 4.0 - 1.0j):
    zs = discriminant.zs_delta(phi, lam).value
    hill = discriminant.hill_delta(u, lam * lam).value
    print(f"  lam = {lam!s:>10}:  Delta = {zs:.12f}   |Delta - Delta_mKdV(lam^2)| = {abs(zs - hill):.1e}")

print("\nperiodic spectrum |n| <= 3 (lam_n^-, lam_n^+, gap)")
table = spectrum.zs_spectrum(phi, 3)
for n in range(-3, 4):
    lo, hi = table.pair(n)
    print(f"  n = {n:+d}:  {lo.real:+.10f}  {hi.real:+.10f}  gap {abs(hi - lo):.2e}")

print("\naction variables I_n (k = 1) and their sum against S1")
curve = abelian.SpectralCurve.zs(phi, 6)
actions = {n: abelian.action_I(phi, n, 1, curve=curve).value for n in range(-6, 7)}
for n in range(0, 4):
    print(f"  I_{n} = {actions[n].real:.3e}")
print(f"  sum = {sum(actions.values()).real:.12f}   S1 = {hierarchy.eval_hamiltonian('S1', phi).real:.12f}")

print("\ndefocusing mKdV up to t = 0.02: drift of conserved quantities")
traj = flows.evolve(u, flows.FlowSpec("mkdv_defocusing", 0.02, 1e-5, record_every=500))
for name, drift in flows.conservation_report(traj, ["mean", "K1", "K2"]).items():
    print(f"  {name}: {drift:.1e}")
print(f"  spectral drift |n| <= 2: {flows.isospectrality_probe(traj, 2, max_records=3):.1e}")
print(f"  sup norm at t_end: {np.max(np.abs(traj.states[-1].values)):.6f}")
