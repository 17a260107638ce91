"""Second-order stretched-coordinate formulation and its linearly
implicit finite-difference pseudo-spectral stepper.

The layer enters only through the complex coordinate stretch
d/dx -> S(x) d/dx with S = 1/(1 + R*sigma), so no auxiliary fields are
needed.  Three time levels are coupled by a time-averaged scheme

    (u^{n+1} - 2u^n + u^{n-1})/tau^2 * eps^2
        + (A/2)(u^{n+1} + u^{n-1})
        + (1/(2 eps^2))(u^{n+1} + u^{n-1})
        + lam*|u^n|^2 u^n = 0,

with A = -S d/dx (S d/dx) in 1D and the sum of the per-axis operators
in 2D (classical scaling only there).  The averaging removes any CFL
restriction; each step solves one linear system

    G w = (2 eps^2/tau^2) u^n - lam*|u^n|^2 u^n,
    u^{n+1} = -u^{n-1} + w,

by unrestarted GMRES, left preconditioned with the constant-coefficient
part of G inverted mode-wise in Fourier space.  eps = 1 gives the
classical scheme; the scaled starting step uses filtered data so the
first iterate stays O(1) uniformly in eps.

The shift R must be a positive real number: any nonzero imaginary part
makes some modes grow inside the layer.  A demonstration switch admits
complex R so the instability can be reproduced on purpose
(:func:`stability_probe`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .absorption import AbsorptionProfile, sample_profile
from .errors import BlowUpError, ConfigurationError, GmresDivergenceError
from .krylov import KrylovReport, LinearOperator, gmres_solve
from .spectral import (
    Field,
    FourierMultiplier,
    Grid1D,
    Grid2D,
    apply_multiplier_along_axis,
    forward_transform,
    inverse_transform,
    op_first_derivative,
)

__all__ = [
    "Pml2Params",
    "Pml2State",
    "StretchedLaplacian",
    "first_step_classical",
    "first_step_filtered",
    "fd_step",
    "Pml2Stepper",
    "build_rotating_initial_data",
    "stability_probe",
]


@dataclass(frozen=True)
class Pml2Params:
    """Parameters of the second-order formulation.

    The shift R is read from the profile spec; it must be real positive
    unless ``demo_complex_shift`` is set (stability demonstrations
    only).  ``omega`` is the angular velocity of the rotating 2D model
    and enters only through the initial data.
    """

    lam: float
    profile: AbsorptionProfile
    tau: float
    eps: float = 1.0
    dimension: int = 1
    omega: float = 0.0
    demo_complex_shift: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError(f"defocusing strength lam must be >= 0, got {self.lam}")
        if self.tau <= 0:
            raise ConfigurationError(f"time step tau must be positive, got {self.tau}")
        if not 0.0 < self.eps <= 1.0:
            raise ConfigurationError(f"eps must lie in (0, 1], got {self.eps}")
        if self.dimension not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.dimension == 2 and self.eps != 1.0:
            raise ConfigurationError("the 2D rotating model is solved in classical scaling only")
        r = self.shift
        if not self.demo_complex_shift and (r.imag != 0.0 or r.real <= 0.0):
            raise ConfigurationError(
                f"shift R must be a positive real number for production runs, got {r}; "
                "enable the stability demo mode to admit complex R"
            )

    @property
    def shift(self) -> complex:
        return self.profile.spec.shift


@dataclass(frozen=True)
class Pml2State:
    """Two consecutive field levels (u^{n-1}, u^n)."""

    u_prev: Field
    u_curr: Field
    time_index: int

    def __post_init__(self):
        if self.u_prev.grid != self.u_curr.grid:
            raise ValueError("state levels live on different grids")
        if self.time_index < 1:
            raise ValueError("a two-level state exists from time index 1 on")


def _cube(values: np.ndarray) -> np.ndarray:
    return np.abs(values) ** 2 * values


class StretchedLaplacian:
    """A = -S d/dx (S d/dx) in 1D, or the sum over both axes in 2D.

    Composed from the spectral first derivative and pointwise
    multiplication by the stretch sequence; annihilates constants, and
    reduces to -d2/dx2 where sigma vanishes.
    """

    def __init__(self, grid: Union[Grid1D, Grid2D], profile: AbsorptionProfile):
        self.grid = grid
        if isinstance(grid, Grid1D):
            if profile.grid != grid:
                raise ValueError("profile was sampled on a different grid")
            self._stretch_x = profile.stretch
            self._stretch_y = None
            self._dx = op_first_derivative(grid).factors
            self._dy = None
        else:
            self._stretch_x = sample_profile(grid.x, profile.spec).stretch
            self._stretch_y = sample_profile(grid.y, profile.spec).stretch
            self._dx = op_first_derivative(grid.x).factors
            self._dy = op_first_derivative(grid.y).factors

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        if isinstance(self.grid, Grid1D):
            sx = self._stretch_x
            inner = sx * inverse_transform(self._dx * forward_transform(values))
            return -sx * inverse_transform(self._dx * forward_transform(inner))
        sx = self._stretch_x[:, None]
        sy = self._stretch_y[None, :]
        inner_x = sx * apply_multiplier_along_axis(values, self._dx, axis=0)
        out = -sx * apply_multiplier_along_axis(inner_x, self._dx, axis=0)
        inner_y = sy * apply_multiplier_along_axis(values, self._dy, axis=1)
        return out - sy * apply_multiplier_along_axis(inner_y, self._dy, axis=1)

    def __call__(self, f: Field) -> Field:
        return Field(self.grid, self.apply_values(f.values))

    @property
    def operator(self) -> LinearOperator:
        size = int(np.prod(self.grid.shape))
        return LinearOperator(self.__call__, size)


class Pml2Stepper:
    """Operator tables and linear-solver settings for repeated stepping.

    ``linear_solver='gmres'`` (default) runs the matrix-free
    preconditioned iteration each step.  ``'direct'`` assembles the
    dense step matrix once and precomputes its inverse, trading setup
    and memory for solves that are exact to roundoff; it exists for
    measurements where iterative-solver tolerance noise would mask the
    quantity under study, and is limited to 1D grids.
    """

    def __init__(
        self,
        grid: Union[Grid1D, Grid2D],
        params: Pml2Params,
        gmres_tol: float = 1e-10,
        gmres_max_iter: int | None = None,
        linear_solver: str = "gmres",
    ):
        if isinstance(grid, Grid2D) != (params.dimension == 2):
            raise ConfigurationError("grid dimensionality does not match params.dimension")
        if linear_solver not in ("gmres", "direct"):
            raise ConfigurationError(f"unknown linear solver {linear_solver!r}")
        if linear_solver == "direct" and isinstance(grid, Grid2D):
            raise ConfigurationError("the direct solver is limited to 1D grids")
        self.grid = grid
        self.params = params
        self.gmres_tol = gmres_tol
        self.gmres_max_iter = gmres_max_iter
        self.linear_solver = linear_solver
        self.laplacian = StretchedLaplacian(grid, params.profile)

        tau, eps = params.tau, params.eps
        self._diag = eps**2 / tau**2 + 1.0 / (2.0 * eps**2)

        if isinstance(grid, Grid1D):
            mu2 = grid.wavenumbers**2
        else:
            mu2 = grid.x.wavenumbers[:, None] ** 2 + grid.y.wavenumbers[None, :] ** 2
        self.preconditioner_multiplier = FourierMultiplier(
            grid, 1.0 / (self._diag + 0.5 * mu2)
        )

        size = int(np.prod(grid.shape))
        diag = self._diag

        def apply_g(f: Field) -> Field:
            return Field(grid, diag * f.values + 0.5 * self.laplacian.apply_values(f.values))

        pre_factors = self.preconditioner_multiplier.factors

        def apply_p(f: Field) -> Field:
            return Field(grid, inverse_transform(pre_factors * forward_transform(f.values)))

        self.operator = LinearOperator(apply_g, size)
        self.preconditioner = LinearOperator(apply_p, size)

        self._g_inverse = None
        self._warm_start: Optional[Field] = None
        if linear_solver == "direct":
            n = grid.num_nodes
            g_dense = np.empty((n, n), dtype=np.complex128)
            basis = np.zeros(n, dtype=np.complex128)
            for j in range(n):
                basis[j] = 1.0
                g_dense[:, j] = diag * basis + 0.5 * self.laplacian.apply_values(basis)
                basis[j] = 0.0
            self._g_inverse = np.linalg.inv(g_dense)

    def first_step(self, u0: Field, v0: Field) -> Pml2State:
        if self.params.eps == 1.0:
            return first_step_classical(u0, v0, self.params, laplacian=self.laplacian)
        return first_step_filtered(u0, v0, self.params, laplacian=self.laplacian)

    def step(self, state: Pml2State, use_preconditioner: bool = True) -> tuple[Pml2State, KrylovReport]:
        p = self.params
        u_n = state.u_curr.values
        with np.errstate(over="ignore", invalid="ignore"):
            rhs_values = (2.0 * p.eps**2 / p.tau**2) * u_n - p.lam * _cube(u_n)
        if not np.all(np.isfinite(rhs_values)):
            raise BlowUpError(state.time_index + 1)
        rhs = Field(self.grid, rhs_values)
        if self._g_inverse is not None:
            w = Field(self.grid, self._g_inverse @ rhs_values)
            report = KrylovReport(0, 0.0, True, [])
        else:
            w, report = gmres_solve(
                self.operator,
                self.preconditioner if use_preconditioner else None,
                rhs,
                tol=self.gmres_tol,
                max_iter=self.gmres_max_iter,
                x0=self._warm_start if use_preconditioner else None,
            )
            if not report.converged:
                raise GmresDivergenceError(
                    f"GMRES stalled at time index {state.time_index + 1}: "
                    f"{report.iterations} iterations, residual {report.final_residual:.3e}"
                )
            if use_preconditioner and w.is_finite():
                self._warm_start = w
        u_next = -state.u_prev.values + w.values
        n = state.time_index + 1
        if not np.all(np.isfinite(u_next)):
            raise BlowUpError(n)
        return Pml2State(state.u_curr, Field(self.grid, u_next), n), report


def _resolve_laplacian(u0: Field, p: Pml2Params, laplacian: Optional[StretchedLaplacian]):
    return laplacian if laplacian is not None else StretchedLaplacian(u0.grid, p.profile)


def first_step_classical(
    u0: Field, v0: Field, p: Pml2Params, laplacian: Optional[StretchedLaplacian] = None
) -> Pml2State:
    """Taylor start u^1 = u0 + tau*v0 - tau^2/2 [A u0 + u0 + lam*|u0|^2 u0]."""
    if p.eps != 1.0:
        raise ConfigurationError("classical first step requires eps = 1; use the filtered start")
    lap = _resolve_laplacian(u0, p, laplacian)
    u1 = u0.values + p.tau * v0.values - 0.5 * p.tau**2 * (
        lap.apply_values(u0.values) + u0.values + p.lam * _cube(u0.values)
    )
    return Pml2State(u0, Field(u0.grid, u1), 1)


def first_step_filtered(
    u0: Field, v0: Field, p: Pml2Params, laplacian: Optional[StretchedLaplacian] = None
) -> Pml2State:
    """Filtered start for eps < 1.

    The plain Taylor start carries 1/eps^2 and 1/eps^4 factors that make
    u^1 huge for small eps; replacing them by bounded sine filters keeps
    ||u^1|| = O(1) uniformly:

        u^1 = u0 + tau*v0 - (tau/2) sin(tau/eps^2) [A u0 + lam*|u0|^2 u0]
                        - (tau/2) sin(tau/eps^4) u0.
    """
    if not p.eps < 1.0:
        raise ConfigurationError("filtered first step requires eps < 1")
    lap = _resolve_laplacian(u0, p, laplacian)
    tau, eps = p.tau, p.eps
    u1 = (
        u0.values
        + tau * v0.values
        - 0.5 * tau * np.sin(tau / eps**2) * (lap.apply_values(u0.values) + p.lam * _cube(u0.values))
        - 0.5 * tau * np.sin(tau / eps**4) * u0.values
    )
    return Pml2State(u0, Field(u0.grid, u1), 1)


def fd_step(
    state: Pml2State,
    p: Pml2Params,
    gmres_tol: float = 1e-10,
    gmres_max_iter: int | None = None,
    use_preconditioner: bool = True,
) -> tuple[Pml2State, KrylovReport]:
    """Advance one step of tau.  Builds the operator tables on the fly;
    loops should use :class:`Pml2Stepper` directly."""
    stepper = Pml2Stepper(state.u_curr.grid, p, gmres_tol, gmres_max_iter)
    return stepper.step(state, use_preconditioner=use_preconditioner)


def build_rotating_initial_data(psi0: Field, psi1: Field, omega: float) -> tuple[Field, Field]:
    """Initial data of the rotating model in co-rotating coordinates.

    u0 = psi0 and v0 = omega * grad(psi0) . (y, -x) + psi1, with the
    gradient evaluated pseudo-spectrally.
    """
    grid = psi0.grid
    if not isinstance(grid, Grid2D):
        raise ValueError("rotating initial data requires a 2D grid")
    if psi1.grid != grid:
        raise ValueError("psi0 and psi1 live on different grids")
    dpsi_dx = apply_multiplier_along_axis(psi0.values, op_first_derivative(grid.x).factors, axis=0)
    dpsi_dy = apply_multiplier_along_axis(psi0.values, op_first_derivative(grid.y).factors, axis=1)
    X, Y = grid.meshgrid()
    v0 = omega * (Y * dpsi_dx - X * dpsi_dy) + psi1.values
    return psi0, Field(grid, v0)


def stability_probe(
    u0: Field,
    v0: Field,
    p: Pml2Params,
    t_final: float,
    gmres_tol: float = 1e-10,
    cap_factor: float = 1e6,
) -> tuple[np.ndarray, np.ndarray]:
    """Max-norm time series of a run that may blow up.

    Intended for the complex-shift instability demonstration: blow-up is
    the expected observable, so instead of raising, the series is capped
    at ``cap_factor`` times the initial max norm and the run stops there.
    Returns (times, max_norms), both including t = 0.
    """
    if p.shift.imag != 0.0 and not p.demo_complex_shift:
        raise ConfigurationError("complex shift requires the demo flag")
    stepper = Pml2Stepper(u0.grid, p, gmres_tol)
    initial = max(u0.max_norm(), np.finfo(float).tiny)
    cap = cap_factor * initial
    times = [0.0]
    norms = [initial]
    state = stepper.first_step(u0, v0)
    times.append(p.tau)
    norms.append(min(state.u_curr.max_norm(), cap))
    nsteps = int(round(t_final / p.tau))
    for n in range(1, nsteps):
        try:
            state, _ = stepper.step(state)
            value = state.u_curr.max_norm()
        except (BlowUpError, GmresDivergenceError):
            value = cap
        times.append((n + 1) * p.tau)
        norms.append(min(value, cap))
        if value >= cap:
            break
    return np.asarray(times), np.asarray(norms)
