"""Free particle: from a plane wave to its reduced action and trajectory.

A right-moving plane wave exp(ix) at E = 1/2 (hbar = m = 1) is written in
the cosine/sine basis, decomposed into microstate parameters, and turned
into a reduced action. For this state the amplitude is flat, the quantum
potential vanishes, and the trajectory time t(x) = dS0/dE is a straight
line: the Floyd and Bohm velocities coincide.

The default decomposition puts exp(ix) entirely on the beta branch, where
the wave is A exp(-i S0) and S0' = -1. The velocities computed from S0
therefore point left while the physical current, carried by the minus
branch, points right. The last block describes the same wave on the alpha
branch (microstate sigma = gamma = 0, mu = nu = 1), where S0 = x and all
signs agree.

Run from the repository root:

    python demos/01_free_particle.py
"""
import numpy as np

from qhjlab import (CoefficientPair, Grid, Microstate, decompose, free, jacobi_time,
                    reduced_action, solve_basis)
from qhjlab.microstates import Decomposition, probability_current, reconstruct_wavefunction

E = 0.5
grid = Grid.from_spacing(-10.0, 10.0, 1e-3)
basis = solve_basis(free(), E, grid)
print(f"basis at E={E}: theta1(0)={basis.theta1[grid.index_of(0.0)]:.1f}, "
      f"W={basis.wronskian:.3f}")

# exp(ix) = cos x + i sin x
coeffs = CoefficientPair(1.0, 1j)
d = decompose(coeffs)
print(f"\ncoefficients {coeffs.C1}, {coeffs.C2} -> {d.classification}")
print(f"  alpha={d.alpha:.6f}  beta={d.beta:.6f}")
print(f"  microstate {d.microstate}")

field = reduced_action(basis, d.microstate)
print(f"\namplitude spread      {np.ptp(field.A):.2e}")
print(f"S0' range             [{field.dS0.min():+.6f}, {field.dS0.max():+.6f}]")
print(f"max |quantum pot.|    {np.abs(field.VB[4:-4]).max():.2e}")
print(f"max equation residual {np.abs(field.residual[2:-2]).max():.2e}")

# the reduced action and the weights rebuild the original wave
phi = reconstruct_wavefunction(d, field)
print(f"max |phi - exp(ix)|   {np.abs(phi - np.exp(1j * grid.x)).max():.2e}")

# which branch carries the current depends on the sign convention of S0'
cur = probability_current(d, field.A, field.dS0)
print(f"current: total {cur.total.mean():+.6f} "
      f"(branches {cur.plus.mean():+.6f}, {cur.minus.mean():+.6f})")

traj = jacobi_time(free(), d.microstate, E, grid, decomposition=d)
slope, icpt = np.polyfit(traj.x, traj.t, 1)
print(f"\nt(x) slope {slope:+.9f}, line-fit residual "
      f"{np.abs(traj.t - slope * traj.x - icpt).max():.1e}")
print(f"Floyd velocity  {np.nanmean(traj.v_floyd):+.9f}")
print(f"Bohm velocity   {np.mean(traj.v_bohm):+.9f}")
print(f"branch velocities v+ {np.nanmean(traj.v_plus):+.6f}, v- {np.nanmean(traj.v_minus):+.6f}")
print(f"v_floyd * dt/dx - 1: {traj.consistency:.1e}")

forward = Microstate(sigma=0.0, nu=1.0, mu=1.0, gamma=0.0)
fd = Decomposition(1.0, 0.0, forward)
ff = reduced_action(basis, forward)
print(f"\nalpha-branch description: max |phi - exp(ix)| "
      f"{np.abs(reconstruct_wavefunction(fd, ff) - np.exp(1j * grid.x)).max():.2e}")
ft = jacobi_time(free(), forward, E, grid, decomposition=fd)
print(f"  S0' = {ff.dS0.mean():+.6f}, t(x) slope {np.polyfit(ft.x, ft.t, 1)[0]:+.9f}, "
      f"v+ {np.nanmean(ft.v_plus):+.6f}")
