"""Absorption profiles for the damping layer and the complex stretch factor.

Two families of absorption functions sigma(x) are provided, both
vanishing on the physical interval |x| <= L and active only inside the
layer L < |x| <= L* = L + delta (the layer is mirrored about the
origin, so every formula is evaluated in |x|):

* polynomial: sigma0 * [1 - ((|x| - L*)/delta)^2]^8, bounded, zero at
  the interface and equal to sigma0 at the outer boundary;
* regularized singular family of order k >= -1:
  sigma0 * beta_k(|x| - L*) with beta_{-1}(z) = -1/z and, for k >= 0,
  the truncated Taylor expansion of beta_{-1} about z = -delta
  subtracted so that the profile gains k continuous derivatives at the
  interface |x| = L.  The profile diverges at the outer boundary, and
  its integral over the layer is infinite.

The stretch factor S(x) = 1/(1 + R*sigma(x)) is what the second-order
formulation consumes; at nodes where sigma has its pole, S is set to 0
exactly (the limit value) and sigma is stored as a large finite
sentinel that no consumer reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np

from .errors import ConfigurationError
from .spectral import Grid1D

__all__ = [
    "ProfileSpec",
    "AbsorptionProfile",
    "sigma_polynomial",
    "sigma_bermudez",
    "sample_profile",
    "continuity_order_estimate",
    "SIGMA_POLE_SENTINEL",
]

POLYNOMIAL = "polynomial"
BERMUDEZ = "bermudez"

# stored in place of the infinite nodal value at |x| = L+delta; never
# consumed (the stretch factor there is set to 0 exactly)
SIGMA_POLE_SENTINEL = 1e300


@dataclass(frozen=True)
class ProfileSpec:
    """Layer geometry and absorption-function parameters.

    Attributes
    ----------
    kind : str
        ``"polynomial"`` or ``"bermudez"``.
    strength : float
        sigma0 > 0.
    thickness : float
        delta > 0; the layer is [L, L+delta] mirrored about the origin.
    physical_half_width : float
        L > 0.
    shift : complex
        R in the stretch factor 1/(1 + R*sigma).  Must be real positive
        for production use of the second-order formulation; complex
        values are admitted here so the instability demonstration can
        construct them explicitly.
    bermudez_order : int
        k >= -1, only meaningful for the bermudez kind.
    """

    kind: str
    strength: float
    thickness: float
    physical_half_width: float
    shift: complex = 1.0
    bermudez_order: int = 2

    def __post_init__(self):
        if self.kind not in (POLYNOMIAL, BERMUDEZ):
            raise ConfigurationError(f"unknown profile kind {self.kind!r}")
        if self.strength <= 0:
            raise ConfigurationError(f"strength sigma0 must be positive, got {self.strength}")
        if self.thickness <= 0:
            raise ConfigurationError(f"thickness delta must be positive, got {self.thickness}")
        if self.physical_half_width <= 0:
            raise ConfigurationError(f"physical half width L must be positive, got {self.physical_half_width}")
        if self.kind == BERMUDEZ and self.bermudez_order < -1:
            raise ConfigurationError(f"bermudez order k must be >= -1, got {self.bermudez_order}")
        shift = complex(self.shift)
        if shift.imag == 0.0 and shift.real <= 0.0:
            raise ConfigurationError("shift R on the closed negative real axis makes 1 + R*sigma vanish")
        object.__setattr__(self, "shift", shift)

    @property
    def outer_half_width(self) -> float:
        """L* = L + delta."""
        return self.physical_half_width + self.thickness


def sigma_polynomial(x, spec: ProfileSpec):
    """Polynomial absorption value(s) at coordinate(s) ``x``.

    Zero outside the layer, sigma0 at |x| = L+delta.
    """
    if spec.kind != POLYNOMIAL:
        raise ConfigurationError("sigma_polynomial requires a polynomial spec")
    ax = np.abs(np.asarray(x, dtype=float))
    lo, hi = spec.physical_half_width, spec.outer_half_width
    y = (ax - hi) / spec.thickness
    vals = spec.strength * np.where((ax >= lo) & (ax <= hi), (1.0 - y**2) ** 8, 0.0)
    return vals if vals.ndim else float(vals)


def _beta(z: np.ndarray, k: int, delta: float) -> np.ndarray:
    """beta_k(z) for z in [-delta, 0).

    beta_{-1}(z) = -1/z has Taylor coefficients (1/j!) beta_{-1}^(j)
    (-delta) = delta^-(j+1) about z = -delta, so subtracting the
    truncated expansion leaves exactly the geometric tail

        beta_k(z) = sum_{j>k} s^j / delta^(j+1) = (s/delta)^(k+1) / (-z),

    with s = z + delta.  The tail form is used because evaluating the
    difference directly cancels catastrophically near the interface.
    """
    s = z + delta  # = |x| - L
    return (s / delta) ** (k + 1) / (-z)


def sigma_bermudez(x, spec: ProfileSpec):
    """Regularized singular absorption value(s) at coordinate(s) ``x``.

    Returns +inf exactly at |x| = L+delta; sampling replaces the pole
    by a zero stretch factor (see :func:`sample_profile`).
    """
    if spec.kind != BERMUDEZ:
        raise ConfigurationError("sigma_bermudez requires a bermudez spec")
    ax = np.abs(np.asarray(x, dtype=float))
    lo, hi = spec.physical_half_width, spec.outer_half_width
    in_layer = (ax >= lo) & (ax <= hi)
    at_pole = in_layer & (ax == hi)
    z = np.where(in_layer & ~at_pole, ax - hi, -spec.thickness)
    vals = np.where(in_layer, spec.strength * _beta(z, spec.bermudez_order, spec.thickness), 0.0)
    vals = np.where(at_pole, inf, vals)
    return vals if vals.ndim else float(vals)


def sigma_values(x, spec: ProfileSpec):
    """Dispatch on the profile kind."""
    if spec.kind == POLYNOMIAL:
        return sigma_polynomial(x, spec)
    return sigma_bermudez(x, spec)


@dataclass(frozen=True)
class AbsorptionProfile:
    """Profile sampled on a grid together with the stretch factor.

    ``sigma`` holds sigma(x_j) >= 0 (pole nodes carry a large finite
    sentinel); ``stretch`` holds S_j = 1/(1 + R*sigma(x_j)), exactly 0
    at pole nodes.
    """

    spec: ProfileSpec
    grid: Grid1D
    sigma: np.ndarray
    stretch: np.ndarray

    @property
    def is_singular(self) -> bool:
        return self.spec.kind == BERMUDEZ


def sample_profile(g: Grid1D, spec: ProfileSpec) -> AbsorptionProfile:
    """Sample sigma and the stretch factor S = 1/(1 + R*sigma) on ``g``.

    The grid half width must equal L + delta.
    """
    if not np.isclose(g.half_width_total, spec.outer_half_width, rtol=1e-12, atol=1e-12):
        raise ConfigurationError(
            f"grid half width {g.half_width_total} does not equal L + delta = {spec.outer_half_width}"
        )
    sig = np.asarray(sigma_values(g.nodes, spec))
    pole = ~np.isfinite(sig)
    sig_stored = np.where(pole, SIGMA_POLE_SENTINEL, sig)
    with np.errstate(over="ignore"):
        stretch = np.where(pole, 0.0, 1.0 / (1.0 + spec.shift * np.where(pole, 0.0, sig)))
    sig_stored.flags.writeable = False
    stretch.flags.writeable = False
    return AbsorptionProfile(spec, g, sig_stored, stretch)


def continuity_order_estimate(spec: ProfileSpec, max_order: int = 9) -> int:
    """Highest derivative order of sigma that matches across x = L.

    The profile vanishes identically on the physical side, so the m-th
    derivative is continuous at the interface iff the one-sided branch
    decays at least like (x - L)^(m+1).  The leading power p of the
    branch is read off from one-sided samples at decreasing steps
    (halving the step divides sigma(L + step) by 2^p), and every
    derivative of order below p matches; the estimate is p - 1.
    A branch with a nonzero limit at the interface (p = 0) means the
    value itself jumps, giving -1.
    """
    lo = spec.physical_half_width
    jump_scale = spec.strength / spec.thickness
    if abs(float(sigma_values(lo, spec))) > 1e-12 * jump_scale:
        return -1
    steps = spec.thickness / 32.0 / 2.0 ** np.arange(4)
    vals = np.asarray([float(sigma_values(lo + e, spec)) for e in steps])
    if np.all(vals < 1e-280):
        return max_order
    slopes = np.log2(vals[:-1] / vals[1:])
    p = int(round(float(np.median(slopes))))
    return min(p - 1, max_order)
