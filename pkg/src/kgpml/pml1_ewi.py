"""First-order damping-layer formulation and its explicit exponential
wave integrator, in classical and small-parameter scaled forms.

The system evolves (u, v = du/dt) together with two auxiliary fields
(eta1, eta2) that localize the layer equations in time.  One step of
the integrator advances, in order,

  (a) u            by the exact free propagator plus a trapezoidal
                   source term (only the f^n endpoint survives because
                   the sine kernel vanishes at the new time),
  (b) eta1         using d/dx of the new u,
  (c) eta2         using the new u,
  (d) v            by the free propagator plus the trapezoidal source;
                   the new-time source contains -sigma*eps^2*v itself,
                   which is eliminated exactly by a pointwise division
                   by (1 + tau*sigma/2).

All operator trigonometry uses sqrt(1 - eps^2 dxx)/eps^2 realized as a
Fourier multiplier; eps = 1 gives the classical scheme.  The scheme is
explicit and subject to a CFL-type restriction tau < C*h, which
shrinks like eps^2 in the scaled regime.

Only the bounded polynomial absorption profile is admitted: the
singular family diverges at the outer boundary, which is incompatible
with the periodic setup of this first-order system and makes its
right-hand side arbitrarily stiff.  ``profile=None`` selects the free
field (sigma identically zero), which is also how reference solutions
on enlarged domains are produced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .absorption import POLYNOMIAL, AbsorptionProfile
from .errors import BlowUpError, ConfigurationError
from .spectral import (
    Field,
    Grid,
    Grid1D,
    forward_transform,
    inverse_transform,
    op_bracket_eps,
    op_first_derivative,
)

__all__ = ["Pml1Params", "Pml1State", "init_pml1", "ewi_step", "Pml1Stepper", "damping_factor"]


@dataclass(frozen=True)
class Pml1Params:
    """Nonlinearity strength, absorption profile, step size, and scaling."""

    lam: float
    profile: Optional[AbsorptionProfile]
    tau: float
    eps: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError(f"defocusing strength lam must be >= 0, got {self.lam}")
        if self.tau <= 0:
            raise ConfigurationError(f"time step tau must be positive, got {self.tau}")
        if not 0.0 < self.eps <= 1.0:
            raise ConfigurationError(f"eps must lie in (0, 1], got {self.eps}")
        if self.profile is not None and self.profile.spec.kind != POLYNOMIAL:
            raise ConfigurationError(
                "the first-order formulation only supports the polynomial absorption "
                "profile; the singular family is rejected at construction"
            )


@dataclass(frozen=True)
class Pml1State:
    """Fields (u, v, eta1, eta2) at one time level, plus the shift alpha."""

    u: Field
    v: Field
    eta1: Field
    eta2: Field
    time_index: int
    alpha: float


def init_pml1(u0: Field, v0: Field, alpha: float = 0.0) -> Pml1State:
    """Initial state; the auxiliary fields start from zero."""
    if u0.grid != v0.grid:
        raise ValueError("u0 and v0 live on different grids")
    if alpha < 0:
        raise ConfigurationError(f"shift alpha must be >= 0, got {alpha}")
    zero = Field(u0.grid, np.zeros(u0.grid.shape, dtype=np.complex128))
    return Pml1State(u0, v0, zero, zero, 0, float(alpha))


def _cube(values: np.ndarray) -> np.ndarray:
    # |u|^2 u coincides with u^3 for real data; one code path serves both
    return np.abs(values) ** 2 * values


class Pml1Stepper:
    """Precomputed multipliers and layer arrays for repeated stepping.

    With a layer profile the grid must be 1D; ``profile=None`` (free
    field) also works on 2D grids, which is how enlarged-domain
    reference solutions are produced.
    """

    def __init__(self, grid: Grid, params: Pml1Params, alpha: float = 0.0):
        if params.profile is not None:
            if not isinstance(grid, Grid1D):
                raise ConfigurationError("the layered first-order system is one-dimensional")
            if params.profile.grid != grid:
                raise ValueError("absorption profile was sampled on a different grid")
        self.grid = grid
        self.params = params
        self.alpha = float(alpha)
        tau, eps = params.tau, params.eps

        bracket = op_bracket_eps(grid, eps)
        omega = bracket.factors.real
        self._cos = np.cos(omega * tau)
        self._sinc = np.sin(omega * tau) / omega
        self._sin_times = omega * np.sin(omega * tau)
        self._dx = op_first_derivative(grid).factors if isinstance(grid, Grid1D) else None
        self._c_src = tau / (2.0 * eps**2)
        self._mass = eps**2 * alpha**2 + eps**-2  # (alpha^2 + 1) at eps = 1

        if params.profile is None:
            self.sigma = np.zeros(grid.shape)
        else:
            self.sigma = params.profile.sigma
        self.free = bool(np.all(self.sigma == 0.0))
        self._exp_sa = np.exp(-(self.sigma + alpha) * tau)
        self._exp_a = float(np.exp(-alpha * tau))
        self._v_denom = 1.0 + 0.5 * tau * self.sigma

    def _source(self, u, v, eta1, eta2, cube):
        """f = sigma*(eta2 - eps^2 v + eps^2 alpha u) + d/dx(sigma eta1) - lam*|u|^2 u."""
        p, a = self.params, self.alpha
        f = self.sigma * (eta2 - p.eps**2 * v + p.eps**2 * a * u) - p.lam * cube
        f = f + inverse_transform(self._dx * forward_transform(self.sigma * eta1))
        return f

    def step(self, state: Pml1State) -> Pml1State:
        p = self.params
        u, v = state.u.values, state.v.values
        e1, e2 = state.eta1.values, state.eta2.values

        with np.errstate(over="ignore", invalid="ignore"):
            cube = _cube(u)
            u_hat = forward_transform(u)
            v_hat = forward_transform(v)

            if self.free:
                f_hat = forward_transform(-p.lam * cube)
                u_new_hat = self._cos * u_hat + self._sinc * v_hat + self._c_src * self._sinc * f_hat
                u_new = inverse_transform(u_new_hat)
                cube_new = _cube(u_new)
                v_new = inverse_transform(
                    -self._sin_times * u_hat + self._cos * v_hat + self._c_src * self._cos * f_hat
                ) + self._c_src * (-p.lam * cube_new)
                e1_new, e2_new = e1, e2
            else:
                f_n = self._source(u, v, e1, e2, cube)
                f_hat = forward_transform(f_n)
                u_new_hat = self._cos * u_hat + self._sinc * v_hat + self._c_src * self._sinc * f_hat
                u_new = inverse_transform(u_new_hat)

                dxu_old = inverse_transform(self._dx * u_hat)
                dxu_new = inverse_transform(self._dx * u_new_hat)
                e1_new = self._exp_sa * e1 - 0.5 * p.tau * (self._exp_sa * dxu_old + dxu_new)

                cube_new = _cube(u_new)
                e2_new = self._exp_a * e2 - 0.5 * p.tau * (
                    self._exp_a * (self._mass * u + p.lam * cube)
                    + self._mass * u_new
                    + p.lam * cube_new
                )

                # f^{n+1} split as g - sigma*eps^2*v^{n+1}; the implicit part
                # is removed by the exact pointwise division below
                g_new = self.sigma * (e2_new + p.eps**2 * self.alpha * u_new) - p.lam * cube_new
                g_new = g_new + inverse_transform(self._dx * forward_transform(self.sigma * e1_new))
                v_lin = inverse_transform(
                    -self._sin_times * u_hat + self._cos * v_hat + self._c_src * self._cos * f_hat
                )
                v_new = (v_lin + self._c_src * g_new) / self._v_denom

        n = state.time_index + 1
        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
            raise BlowUpError(n)
        g = self.grid
        return Pml1State(
            Field(g, u_new), Field(g, v_new),
            Field(g, e1_new) if e1_new is not e1 else state.eta1,
            Field(g, e2_new) if e2_new is not e2 else state.eta2,
            n, state.alpha,
        )


def ewi_step(state: Pml1State, p: Pml1Params) -> Pml1State:
    """Advance one step of tau.  Builds the operator tables on the fly;
    loops should use :class:`Pml1Stepper` directly."""
    return Pml1Stepper(state.u.grid, p, state.alpha).step(state)


def damping_factor(s: complex, alpha: float = 0.0) -> complex:
    """Modal decay factor g(s) = -sqrt(s^2 + 1)/(s + alpha), Re(s) > 0.

    The principal square root keeps Re(g) < 0 on the whole right half
    plane, which is what makes the layer dissipative for every mode.
    """
    s = complex(s)
    if s.real <= 0:
        raise ValueError(f"damping factor requires Re(s) > 0, got {s}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return -np.sqrt(s * s + 1.0) / (s + alpha)
