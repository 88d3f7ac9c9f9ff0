"""Harmonic oscillator: one bound state, many trajectories.

The ground state of V = x^2 / 2 is real, so its two exponential branches
carry equal weight and the probability current vanishes. The ratio
C1/C2 of the state at x = 0 fixes one microstate parameter; nu is left
free. The even ground state has C2 = 0 there, so the family is built in
the projective chart, where the free value lands in the sigma slot of
(sigma, nu, mu, gamma). Each choice of nu
gives a different reduced action and a different trajectory time t(x),
while the reconstructed wave functions differ only by a constant factor.

Run from the repository root:

    python demos/02_harmonic_microstates.py
"""
import numpy as np

from qhjlab import Grid, find_eigenvalues, harmonic, microstate_family
from qhjlab.microstates import probability_current
from qhjlab.trajectories import DISTINCTNESS_FLOOR, family_distances, family_wavefunctions

pot = harmonic()

# the eigenvalues need a box wide enough for the tails of the higher states
levels = find_eigenvalues(pot, Grid.from_spacing(-8.0, 8.0, 1e-3), (0.0, 6.0), 6)
print("eigenvalues:")
for n, e in enumerate(levels):
    print(f"  E_{n} = {e:.10f}   (n + 1/2 = {n + 0.5})")

grid = Grid.from_spacing(-4.0, 4.0, 1e-3)
nus = [-2.0, 0.0, 2.0]
family = microstate_family(pot, None, nus, 0.5, grid)

print("\nground-state family at E = 0.5:")
for nu, tr in zip(nus, family):
    d = tr.decomposition
    cur = probability_current(d, tr.action.A, tr.action.dS0)
    m = d.microstate
    print(f"  nu={nu:+.0f}: ({m.sigma:+.2f}, {m.nu:+.2f}, {m.mu:+.2f}, {m.gamma:+.2f}) "
          f"|alpha|={abs(d.alpha):.4f} "
          f"|beta|={abs(d.beta):.4f}  max|j|={np.abs(cur.total).max():.1e}  "
          f"min|S0'|={np.abs(tr.action.dS0).min():.2e}  t(2)={np.interp(2.0, tr.x, tr.t):+.4f}")

dens = [np.abs(p) ** 2 for p in family_wavefunctions(family)]
for nu, d in zip(nus[1:], dens[1:]):
    scale = (d @ dens[0]) / (d @ d)
    dev = np.abs(scale * d - dens[0]).max() / dens[0].max()
    print(f"  |phi|^2 for nu={nu:+.0f} matches nu=-2 after scaling by {scale:.4f} ({dev:.1e})")

dist = family_distances(family)
print("\npairwise sup |t_i - t_j|:")
print(np.array2string(dist, precision=3, suppress_small=True))
print(f"smallest off-diagonal {dist[np.triu_indices(3, 1)].min():.3f} "
      f"(distinctness floor {DISTINCTNESS_FLOOR})")
