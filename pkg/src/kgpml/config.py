"""Run configuration: validation, the key=value file format, presets.

A configuration file is flat ``key = value`` text with ``#`` comments.
An optional ``[sweep]`` section lists comma-separated values per
parameter and defines the grid for parameter sweeps:

    formulation = pml2
    profile = bermudez
    bermudez_k = 2
    sigma0 = 3.0
    delta = 0.5
    r_policy = fixed
    r_value = 1.0
    lambda = 1.0
    L = 4.0
    N = 288
    tau = 0.001
    T_final = 4.0
    preset = gaussian_sech

    [sweep]
    sigma0 = 2, 4, 6, 8

Unknown keys are rejected.  ``serialize`` emits a canonical form whose
parse is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np

from .absorption import ProfileSpec
from .errors import ConfigurationError
from .pml2_fd import build_rotating_initial_data
from .spectral import Field, Grid, Grid1D, Grid2D, field_from_function, make_grid, make_grid_2d

__all__ = ["SolverConfig", "parse_config", "serialize_config", "initial_data", "PRESETS"]

SWEEPABLE = ("sigma0", "delta", "r_value", "eps", "bermudez_k", "alpha")

# file key -> attribute name, where they differ
_KEY_TO_ATTR = {"lambda": "lam", "T_final": "t_final"}
_ATTR_TO_KEY = {v: k for k, v in _KEY_TO_ATTR.items()}


@dataclass(frozen=True)
class SolverConfig:
    """Every tunable of a run, with the validation rules between them."""

    formulation: str = "pml2"          # pml1 | pml2
    dimension: int = 1
    scaling: str = "classical"         # classical | nonrel
    eps: float = 1.0
    profile: str = "polynomial"        # polynomial | bermudez
    bermudez_k: int = 2
    sigma0: float = 8.0
    delta: float = 0.5
    r_policy: str = "fixed"            # fixed | inverse_eps2
    r_value: complex = 1.0
    alpha: float = 0.0
    lam: float = 1.0
    L: float = 4.0
    N: int = 288
    tau: float = 1e-3
    t_final: float = 4.0
    preset: str = "gaussian_sech"      # gaussian_sech | gaussian_sech_eps | vortex4
    c0: float = 1.32
    omega: float = 0.0
    reference_enlargement: int = 4     # 0 disables the reference solve
    gmres_tol: float = 1e-10
    linear_solver: str = "gmres"     # gmres | direct (dense, 1D only)
    snapshot_stride: int = 10
    output: str = "out"
    demo_stability: bool = False
    sweep_workers: int = 1
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.formulation not in ("pml1", "pml2"):
            raise ConfigurationError(f"formulation must be pml1 or pml2, got {self.formulation!r}")
        if self.dimension not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.scaling not in ("classical", "nonrel"):
            raise ConfigurationError(f"scaling must be classical or nonrel, got {self.scaling!r}")
        if self.profile not in ("polynomial", "bermudez"):
            raise ConfigurationError(f"profile must be polynomial or bermudez, got {self.profile!r}")
        if self.r_policy not in ("fixed", "inverse_eps2"):
            raise ConfigurationError(f"r_policy must be fixed or inverse_eps2, got {self.r_policy!r}")
        if self.preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {self.preset!r}")

        if self.formulation == "pml1" and self.profile != "polynomial":
            raise ConfigurationError("rule violated: pml1 requires the polynomial profile")
        if self.scaling == "nonrel" and not 0.0 < self.eps < 1.0:
            raise ConfigurationError("rule violated: nonrel scaling requires eps in (0, 1)")
        if self.scaling == "classical" and self.eps != 1.0:
            raise ConfigurationError("rule violated: classical scaling requires eps = 1")
        r = self.resolved_shift()
        if self.formulation == "pml2" and not self.demo_stability and (r.imag != 0.0 or r.real <= 0.0):
            raise ConfigurationError(
                "rule violated: pml2 production runs require real positive R "
                "(pass demo_stability for the complex-R probe)"
            )
        if self.dimension == 2:
            if self.formulation != "pml2":
                raise ConfigurationError("rule violated: 2D runs use the pml2 formulation")
            if self.scaling != "classical":
                raise ConfigurationError("rule violated: 2D runs use the classical scaling")
        if self.preset == "vortex4" and self.dimension != 2:
            raise ConfigurationError("rule violated: the vortex4 preset is two-dimensional")
        if self.tau <= 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.t_final < 0:
            raise ConfigurationError(f"T_final must be >= 0, got {self.t_final}")
        if self.snapshot_stride < 1:
            raise ConfigurationError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")
        if self.reference_enlargement != 0 and self.reference_enlargement < 2:
            raise ConfigurationError("reference_enlargement must be 0 (off) or >= 2")
        if self.sweep_workers < 1:
            raise ConfigurationError("sweep_workers must be >= 1")
        if self.linear_solver not in ("gmres", "direct"):
            raise ConfigurationError(f"linear_solver must be gmres or direct, got {self.linear_solver!r}")
        if self.linear_solver == "direct" and self.dimension != 1:
            raise ConfigurationError("rule violated: the direct solver is one-dimensional")
        for key in self.sweep:
            if key not in SWEEPABLE:
                raise ConfigurationError(f"parameter {key!r} is not sweepable (allowed: {SWEEPABLE})")
        object.__setattr__(self, "sweep", {k: tuple(v) for k, v in self.sweep.items()})

    # derived quantities ------------------------------------------------

    def resolved_shift(self) -> complex:
        """R under the configured policy: fixed r, or r/eps^2."""
        r = complex(self.r_value)
        if self.r_policy == "inverse_eps2":
            return r / self.eps**2
        return r

    @property
    def half_width_total(self) -> float:
        return self.L + self.delta

    def profile_spec(self) -> ProfileSpec:
        return ProfileSpec(
            self.profile,
            self.sigma0,
            self.delta,
            self.L,
            shift=self.resolved_shift(),
            bermudez_order=self.bermudez_k,
        )

    def make_grid(self) -> Grid:
        if self.dimension == 1:
            return make_grid(self.half_width_total, self.N)
        return make_grid_2d(self.half_width_total, self.N, self.N)

    def initial_data(self, grid: Grid | None = None) -> tuple[Field, Field]:
        return initial_data(self, grid if grid is not None else self.make_grid())

    def with_updates(self, **kwargs) -> "SolverConfig":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# initial-data presets

def _gaussian_sech(cfg: SolverConfig, grid: Grid) -> tuple[Field, Field]:
    u0 = field_from_function(grid, lambda x: 5.0 * np.exp(-(x**2)))
    v0 = field_from_function(grid, lambda x: 0.5 / np.cosh(x**2))
    return u0, v0


def _vortex4(cfg: SolverConfig, grid: Grid) -> tuple[Field, Field]:
    c0 = cfg.c0

    def psi(X, Y):
        return (
            (X - c0 + 1j * Y)
            * (X + c0 + 1j * Y)
            * (X + 1j * (Y - c0))
            * (X + 1j * (Y + c0))
            * np.exp(-(X**2 + Y**2) / 2.0)
        )

    psi0 = field_from_function(grid, psi)
    return build_rotating_initial_data(psi0, psi0, cfg.omega)


# gaussian_sech_eps is the same pulse; the scaled runs differ through
# lambda and eps in the configuration, not through the data
PRESETS: dict[str, Callable] = {
    "gaussian_sech": _gaussian_sech,
    "gaussian_sech_eps": _gaussian_sech,
    "vortex4": _vortex4,
}


def initial_data(cfg: SolverConfig, grid: Grid) -> tuple[Field, Field]:
    maker = PRESETS[cfg.preset]
    if cfg.preset == "vortex4" and not isinstance(grid, Grid2D):
        raise ConfigurationError("the vortex4 preset needs a 2D grid")
    if cfg.preset != "vortex4" and isinstance(grid, Grid2D):
        raise ConfigurationError(f"preset {cfg.preset!r} is one-dimensional")
    return maker(cfg, grid)


# ---------------------------------------------------------------------------
# text format

_BOOL_KEYS = {"demo_stability"}
_INT_KEYS = {"dimension", "bermudez_k", "N", "reference_enlargement", "snapshot_stride", "sweep_workers"}
_STR_KEYS = {"formulation", "scaling", "profile", "r_policy", "preset", "output", "linear_solver"}
_COMPLEX_KEYS = {"r_value"}


def _parse_scalar(key: str, raw: str):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigurationError(f"cannot parse boolean {key} = {raw!r}")
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _COMPLEX_KEYS and "j" in raw:
            return complex(raw.replace(" ", ""))
        return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse {key} = {raw!r}") from exc


def parse_config(text: str, **overrides) -> SolverConfig:
    """Parse the key=value format; unknown keys are errors.

    ``overrides`` are applied on top of the parsed keys before
    validation (the command line uses this for its flags).
    """
    valid_attrs = {f.name for f in fields(SolverConfig)} - {"sweep"}
    kwargs: dict = {}
    sweep: dict[str, tuple] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip().lower()
            if section != "sweep":
                raise ConfigurationError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        attr = _KEY_TO_ATTR.get(key, key)
        if section == "sweep":
            if attr not in SWEEPABLE:
                raise ConfigurationError(f"line {lineno}: parameter {key!r} is not sweepable")
            values = tuple(_parse_scalar(attr, v) for v in raw.split(",") if v.strip())
            if not values:
                raise ConfigurationError(f"line {lineno}: empty sweep list for {key!r}")
            sweep[attr] = values
        else:
            if attr not in valid_attrs:
                raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
            kwargs[attr] = _parse_scalar(attr, raw)
    kwargs.update(overrides)
    return SolverConfig(sweep=sweep, **kwargs)


def _format_scalar(attr: str, value) -> str:
    if attr in _BOOL_KEYS:
        return "true" if value else "false"
    if isinstance(value, complex):
        return repr(value).strip("()") if value.imag != 0.0 else repr(value.real)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: SolverConfig) -> str:
    """Canonical text whose parse reproduces ``cfg`` exactly."""
    lines = []
    for f in fields(SolverConfig):
        if f.name == "sweep":
            continue
        key = _ATTR_TO_KEY.get(f.name, f.name)
        lines.append(f"{key} = {_format_scalar(f.name, getattr(cfg, f.name))}")
    if cfg.sweep:
        lines.append("")
        lines.append("[sweep]")
        for key, values in cfg.sweep.items():
            lines.append(f"{key} = " + ", ".join(_format_scalar(key, v) for v in values))
    return "\n".join(lines) + "\n"
