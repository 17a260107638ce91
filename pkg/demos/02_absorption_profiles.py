"""The two absorption-profile families and what makes them different.

The polynomial profile is bounded and very smooth at the interface;
the regularized singular family diverges at the outer boundary (its
integral over the layer is infinite, so the stretched coordinate is an
infinite continuation of the domain) while a truncated Taylor
correction buys k continuous derivatives at the interface.
"""

import numpy as np

from kgpml import ProfileSpec, continuity_order_estimate, make_grid, sample_profile
from kgpml.absorption import sigma_bermudez, sigma_polynomial

L, delta = 4.0, 0.5
poly = ProfileSpec("polynomial", strength=8.0, thickness=delta, physical_half_width=L)
print("polynomial profile, sigma0=8, delta=0.5:")
for x in (0.0, 4.0, 4.25, 4.5):
    print(f"  sigma({x}) = {sigma_polynomial(x, poly):.6f}")

print("\nregularized singular profiles, sigma0=3:")
for k in (-1, 0, 2):
    spec = ProfileSpec("bermudez", 3.0, delta, L, bermudez_order=k)
    vals = ", ".join(f"sigma({x})={sigma_bermudez(x, spec):.4g}" for x in (4.0, 4.25, 4.4999))
    print(f"  k={k:+d}: {vals}")

print("\ninterface smoothness (estimated highest matching derivative):")
for label, spec in [
    ("polynomial      ", poly),
    ("bermudez k=-1   ", ProfileSpec("bermudez", 3.0, delta, L, bermudez_order=-1)),
    ("bermudez k=0    ", ProfileSpec("bermudez", 3.0, delta, L, bermudez_order=0)),
    ("bermudez k=2    ", ProfileSpec("bermudez", 3.0, delta, L, bermudez_order=2)),
    ("bermudez k=3    ", ProfileSpec("bermudez", 3.0, delta, L, bermudez_order=3)),
]:
    print(f"  {label}: order {continuity_order_estimate(spec)}")

# the divergent integral is what removes the parameter-tuning problem:
# the wave's round trip through the stretched layer never completes
spec = ProfileSpec("bermudez", 3.0, delta, L, bermudez_order=2)
print("\nlayer integral of the k=2 profile up to L* - eta:")
for eta in (1e-1, 1e-3, 1e-5):
    xs = np.linspace(L, L + delta - eta, 400001)
    val = np.trapezoid(sigma_bermudez(xs, spec), xs)
    print(f"  eta={eta:.0e}: integral = {val:8.3f}")

# sampling on a grid: the pole node carries stretch exactly zero
grid = make_grid(L + delta, 128)
prof = sample_profile(grid, spec)
print(f"\nsampled on N=128: stretch at the boundary node = {prof.stretch[0]}, "
      f"min interior stretch = {np.abs(prof.stretch[1:]).min():.3e}")
