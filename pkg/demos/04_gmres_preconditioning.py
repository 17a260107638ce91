"""Why the implicit scheme costs no more than the explicit one.

Each implicit step solves G w = rhs matrix-free.  Preconditioning with
the constant-coefficient part of G (inverted mode-wise in Fourier
space) collapses the iteration count to a handful, independent of the
mesh, where the raw operator needs ever more iterations as the grid is
refined.
"""

import numpy as np

from kgpml import Field, Pml2Params, Pml2Stepper, ProfileSpec, make_grid, sample_profile

print("singular profile k=2, sigma0=8, delta=0.5, tau=0.02, first implicit step\n")
print(f"{'h':>8} {'precond.':>10} {'plain':>8}")
for h_inv in (128, 256, 512):
    n = 9 * h_inv
    grid = make_grid(4.5, n)
    profile = sample_profile(grid, ProfileSpec("bermudez", 8.0, 0.5, 4.0, bermudez_order=2))
    params = Pml2Params(lam=1.0, profile=profile, tau=0.02)
    u0 = Field(grid, 5.0 * np.exp(-grid.nodes**2))
    v0 = Field(grid, 0.5 / np.cosh(grid.nodes**2))
    stepper = Pml2Stepper(grid, params, gmres_tol=1e-10)
    state = stepper.first_step(u0, v0)
    _, with_pre = stepper.step(state)
    _, without = stepper.step(state, use_preconditioner=False)
    print(f"   1/{h_inv:<4} {with_pre.iterations:>10} {without.iterations:>8}")

print("\nPreconditioned counts stay flat; plain counts track the resolution.")
