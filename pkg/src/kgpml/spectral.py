"""Periodic collocation grids and Fourier-multiplier operators.

All spatial operators used by the wave solvers (derivatives, the
square-root operators sqrt(1 - dxx) and sqrt(1 - eps^2 dxx)/eps^2, and
trigonometric functions of them) are realized matrix-free as per-mode
multipliers applied between a forward and an inverse FFT.

Conventions
-----------
* 1D grids cover (-W, W) with nodes x_j = -W + j*h, j = 0..N-1,
  h = 2W/N, N even.  Wavenumbers are mu_l = pi*l/W for l in the
  symmetric index set {-N/2, ..., N/2-1}, stored in the transform's
  natural (FFT) ordering.  The ordering is never assumed by callers:
  the ``wavenumbers`` array is the single source of truth.
* 2D fields are stored as arrays of shape (Nx, Ny); the first axis is
  x, the second is y.  Flattening is row-major (C order).
* Fields hold complex values even for real-valued problems; reality is
  preserved by all symmetric multipliers up to roundoff.
* The Nyquist mode of the first derivative is zeroed (the common
  pseudo-spectral convention; it keeps the multiplier conjugate
  symmetric so real fields stay real).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

try:  # scipy's pocketfft releases the GIL and threads large transforms
    import scipy.fft as _fft_backend

    _FFT_WORKERS = 2

    def _fft1(a, axis=-1):
        return _fft_backend.fft(a, axis=axis, workers=_FFT_WORKERS)

    def _ifft1(a, axis=-1):
        return _fft_backend.ifft(a, axis=axis, workers=_FFT_WORKERS)

    def _fft2(a):
        return _fft_backend.fft2(a, workers=_FFT_WORKERS)

    def _ifft2(a):
        return _fft_backend.ifft2(a, workers=_FFT_WORKERS)

except ImportError:  # pragma: no cover - numpy fallback
    def _fft1(a, axis=-1):
        return np.fft.fft(a, axis=axis)

    def _ifft1(a, axis=-1):
        return np.fft.ifft(a, axis=axis)

    def _fft2(a):
        return np.fft.fft2(a)

    def _ifft2(a):
        return np.fft.ifft2(a)

from .errors import ConfigurationError

__all__ = [
    "Grid1D",
    "Grid2D",
    "Field",
    "FourierMultiplier",
    "make_grid",
    "make_grid_2d",
    "field_from_function",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "apply_multiplier_along_axis",
    "op_first_derivative",
    "op_second_derivative",
    "op_bracket",
    "op_bracket_eps",
    "op_trig",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on (-half_width_total, half_width_total).

    Attributes
    ----------
    half_width_total : float
        Half width W of the computational interval, physical domain
        plus absorbing layer.
    num_nodes : int
        Even number of collocation nodes N.
    mesh : float
        Node spacing h = 2W/N.
    nodes : ndarray, shape (N,)
        x_j = -W + j*h.  Strictly increasing; the left endpoint -W is a
        node, the right endpoint +W is identified with it periodically.
    wavenumbers : ndarray, shape (N,)
        mu_l = pi*l/W in FFT ordering; the zero mode is exactly 0.
    """

    half_width_total: float
    num_nodes: int
    mesh: float
    nodes: np.ndarray
    wavenumbers: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.num_nodes,)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid1D):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.half_width_total == other.half_width_total
        )

    def __hash__(self) -> int:
        return hash((self.half_width_total, self.num_nodes))


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product periodic grid; axes may differ in node count."""

    x: Grid1D
    y: Grid1D

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.x.num_nodes, self.y.num_nodes)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays X, Y of shape (Nx, Ny)."""
        return np.meshgrid(self.x.nodes, self.y.nodes, indexing="ij")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid2D):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self) -> int:
        return hash((self.x, self.y))


Grid = Union[Grid1D, Grid2D]


def make_grid(half_width_total: float, num_nodes: int) -> Grid1D:
    """Build a 1D periodic grid with mesh size h = 2*half_width_total/N.

    Raises
    ------
    ConfigurationError
        If ``num_nodes`` is odd or smaller than 4, or the width is not
        positive.
    """
    if half_width_total <= 0:
        raise ConfigurationError(f"half_width_total must be positive, got {half_width_total}")
    if num_nodes < 4 or num_nodes % 2 != 0:
        raise ConfigurationError(f"num_nodes must be an even integer >= 4, got {num_nodes}")
    w = float(half_width_total)
    n = int(num_nodes)
    h = 2.0 * w / n
    nodes = -w + h * np.arange(n)
    # 2*pi*fftfreq(n, h) == pi*l/W over the symmetric index set in FFT order
    mu = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    return Grid1D(w, n, h, _readonly(nodes), _readonly(mu))


def make_grid_2d(half_width_total: float, num_nodes_x: int, num_nodes_y: int | None = None) -> Grid2D:
    """Square-domain 2D grid; both axes share the half width."""
    ny = num_nodes_x if num_nodes_y is None else num_nodes_y
    return Grid2D(make_grid(half_width_total, num_nodes_x), make_grid(half_width_total, ny))


@dataclass(frozen=True)
class Field:
    """Complex nodal values of a space-dependent function at one time level."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def field_from_function(grid: Grid, fn: Callable) -> Field:
    """Sample ``fn`` at the grid nodes (fn(x) in 1D, fn(X, Y) in 2D)."""
    if isinstance(grid, Grid1D):
        vals = fn(grid.nodes)
    else:
        vals = fn(*grid.meshgrid())
    return Field(grid, np.broadcast_to(np.asarray(vals, dtype=np.complex128), grid.shape).copy())


@dataclass(frozen=True)
class FourierMultiplier:
    """Per-mode multipliers aligned with the grid's wavenumber ordering."""

    grid: Grid
    factors: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.factors, dtype=np.complex128)
        if f.shape != self.grid.shape:
            raise ValueError(f"multiplier shape {f.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "factors", _readonly(f))


def forward_transform(values: np.ndarray) -> np.ndarray:
    """FFT matching the array's dimensionality."""
    return _fft1(values) if values.ndim == 1 else _fft2(values)


def inverse_transform(values: np.ndarray) -> np.ndarray:
    return _ifft1(values) if values.ndim == 1 else _ifft2(values)


def apply_multiplier(f: Field, m: FourierMultiplier) -> Field:
    """inverse-transform(m * forward-transform(f)).

    Exact (to roundoff) on trigonometric polynomials resolvable on the
    grid.  Raises ValueError on grid mismatch.
    """
    if f.grid != m.grid:
        raise ValueError("field and multiplier live on different grids")
    return Field(f.grid, inverse_transform(m.factors * forward_transform(f.values)))


def apply_multiplier_along_axis(values: np.ndarray, factors_1d: np.ndarray, axis: int) -> np.ndarray:
    """Apply a 1D multiplier along one axis of a 2D nodal array."""
    spec = _fft1(values, axis=axis)
    shape = [1, 1]
    shape[axis] = factors_1d.size
    return _ifft1(spec * factors_1d.reshape(shape), axis=axis)


def op_first_derivative(g: Grid1D) -> FourierMultiplier:
    """d/dx as i*mu_l, with the Nyquist mode zeroed."""
    factors = 1j * g.wavenumbers.copy()
    factors[g.num_nodes // 2] = 0.0
    return FourierMultiplier(g, factors)


def op_second_derivative(g: Grid1D) -> FourierMultiplier:
    """d2/dx2 as -mu_l^2."""
    return FourierMultiplier(g, -g.wavenumbers**2)


def _mu_squared(g: Grid) -> np.ndarray:
    if isinstance(g, Grid1D):
        return g.wavenumbers**2
    mx, my = np.meshgrid(g.x.wavenumbers, g.y.wavenumbers, indexing="ij")
    return mx**2 + my**2


def op_bracket(g: Grid) -> FourierMultiplier:
    """sqrt(1 - dxx) (1D) or sqrt(1 - Laplacian) (2D): factors sqrt(1 + |mu|^2)."""
    return FourierMultiplier(g, np.sqrt(1.0 + _mu_squared(g)))


def op_bracket_eps(g: Grid, eps: float) -> FourierMultiplier:
    """sqrt(1 - eps^2 dxx)/eps^2: factors sqrt(1 + eps^2 |mu|^2)/eps^2.

    Strictly positive for all modes, so dividing by the operator is
    well defined mode-wise.  ``eps`` must lie in (0, 1]; eps = 1
    reproduces :func:`op_bracket` exactly.
    """
    if not 0.0 < eps <= 1.0:
        raise ConfigurationError(f"eps must lie in (0, 1], got {eps}")
    return FourierMultiplier(g, np.sqrt(1.0 + eps**2 * _mu_squared(g)) / eps**2)


def op_trig(m: FourierMultiplier, tau: float, kind: str) -> FourierMultiplier:
    """Trigonometric functions of a real-positive (bracket) operator.

    kind = 'cos'       -> cos(omega*tau)
    kind = 'sinc'      -> sin(omega*tau)/omega
    kind = 'sin_times' -> omega*sin(omega*tau)

    Bracket factors are bounded away from 0, so 'sinc' never divides by
    zero.
    """
    omega = m.factors.real
    if np.any(m.factors.imag != 0.0) or np.any(omega <= 0.0):
        raise ValueError("op_trig requires a real, strictly positive multiplier")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if kind == "cos":
        factors = np.cos(omega * tau)
    elif kind == "sinc":
        factors = np.sin(omega * tau) / omega
    elif kind == "sin_times":
        factors = omega * np.sin(omega * tau)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return FourierMultiplier(m.grid, factors)
