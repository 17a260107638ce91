"""Layers in the small-parameter regime: why the shift must scale.

As eps shrinks, every wavelength travels at speed O(1/eps^2).  With
the polynomial profile and a fixed shift R the layer becomes useless;
scaling R like 1/eps^2 restores a uniform damping strength.  The
singular profile needs no such tuning, at the price of stiffer
resolution demands inside the layer.
"""

import warnings

import numpy as np

from kgpml import SolverConfig, phase_velocity_eps, reference_solve, rel_l2_error, restrict_field
from kgpml.runner import final_field

print("phase velocity of the k=1 mode:")
for eps in (1.0, 0.5, 0.25, 0.1):
    print(f"   eps={eps:4}: v_p = {phase_velocity_eps(1.0, eps):9.3f}")
print()


def layer_error(eps, r_policy):
    h_inv = {1.0: 32, 0.5: 64, 0.25: 128}[eps]
    cfg = SolverConfig(
        formulation="pml2", profile="polynomial", sigma0=3.0, delta=0.5, L=4.0,
        N=9 * h_inv, tau={1.0: 1e-3, 0.5: 5e-4, 0.25: 2e-4}[eps],
        t_final=4.0, lam=0.5, preset="gaussian_sech_eps",
        scaling="classical" if eps == 1.0 else "nonrel", eps=eps,
        r_policy=r_policy, r_value=1.0, snapshot_stride=10**9,
        gmres_tol=1e-12, reference_enlargement=4,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ref = reference_solve(cfg)
    f = final_field(cfg)
    return rel_l2_error(f, restrict_field(ref.fields[-1], f.grid), cfg.L)


print("polynomial layer, t=4 relative L2 error on the window:")
print(f"{'eps':>6} {'R = 1':>12} {'R = 1/eps^2':>14}")
for eps in (1.0, 0.5, 0.25):
    fixed = layer_error(eps, "fixed")
    scaled = layer_error(eps, "inverse_eps2")
    print(f"{eps:>6} {fixed:>12.3e} {scaled:>14.3e}")
print("\nFixed R degrades by orders of magnitude; the scaled shift stays flat.")
