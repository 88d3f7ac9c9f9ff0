"""Currents in three dimensions as curls, and the antisymmetric tensor behind them.

A stationary current j with div j = 0 can be written as j = curl B. The
tensor F^{ij} = d_i B^j - d_j B^i then hands back the current through
j_i = (1/2) eps_ijk F^{jk}. The script does this for a plane wave, whose
current hbar A0^2 k is uniform, and for a few random smooth fields, and
writes the plane-wave B to CSV.

Run from the repository root:

    python demos/04_hidden_tensor.py [output_dir]
"""
import sys
from pathlib import Path

import numpy as np

from qhjlab import Grid3
from qhjlab.field3d import (contract_to_current, continuity_check, curl, plane_wave_potential,
                            tensor_from_potential, write_vector_csv)
from qhjlab.verification import random_smooth_field

grid = Grid3.cube(1.0, 32)
k, A0 = np.array([0.3, -1.0, 2.0]), 1.5

B = plane_wave_potential(k, A0, grid)
J = curl(B)
want = A0**2 * k
print(f"plane wave k={k.tolist()}, A0={A0}: expected current {np.round(want, 12).tolist()}")
for i, name in enumerate("xyz"):
    print(f"  j_{name}: mean {J[i].mean():+.12f}, max deviation {np.abs(J[i] - want[i]).max():.1e}")
F = tensor_from_potential(B)
print(f"  F01={F[0, 1].mean():+.6f}  F02={F[0, 2].mean():+.6f}  F12={F[1, 2].mean():+.6f}")
print(f"  contraction vs curl {contract_to_current(F).max_abs_diff(J):.1e}, "
      f"div j {np.abs(continuity_check(J)).max():.1e}")

rng = np.random.default_rng(2024)
print("\nrandom smooth B:")
for n in range(4):
    R = random_smooth_field(rng, grid)
    JR = curl(R)
    print(f"  field {n}: max|j|={max(np.abs(c).max() for c in JR):7.3f}  "
          f"max|div j|={np.abs(continuity_check(JR)).max():.1e}  "
          f"contraction vs curl={contract_to_current(tensor_from_potential(R)).max_abs_diff(JR):.1e}")

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out/demo_field3d")
out.mkdir(parents=True, exist_ok=True)
write_vector_csv(out / "plane_wave_B.csv", B, meta={"k": k.tolist(), "A0": A0})
print(f"\nwrote {out / 'plane_wave_B.csv'}")
