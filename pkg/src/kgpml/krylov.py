"""Matrix-free GMRES without restart, with optional left preconditioning.

The semi-implicit wave steppers solve one linear system per time step
whose operator is assembled from FFTs and pointwise multiplications,
so only its action on a vector is available.  GMRES is run without
restart; convergence is measured on the left-preconditioned relative
residual ||P(A x - b)|| <= tol * ||P b||.  Orthogonalization is
modified Gram-Schmidt with one reorthogonalization pass whenever the
new basis vector lost most of its norm during projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

import numpy as np

from .spectral import Field

__all__ = ["LinearOperator", "KrylovReport", "gmres_solve"]


@dataclass(frozen=True)
class LinearOperator:
    """Linear map on fields, given by its action only."""

    apply: Callable[[Field], Field]
    dimension: int

    def __call__(self, f: Field) -> Field:
        return self.apply(f)


@dataclass
class KrylovReport:
    """Outcome of one GMRES solve."""

    iterations: int
    final_residual: float
    converged: bool
    residual_history: list = dataclass_field(default_factory=list)


def _vec(f: Field) -> np.ndarray:
    return f.values.ravel()


def _apply(op: LinearOperator, grid, shape, x: np.ndarray) -> np.ndarray:
    return op.apply(Field(grid, x.reshape(shape))).values.ravel()


def gmres_solve(
    op: LinearOperator,
    precond: Optional[LinearOperator],
    rhs: Field,
    tol: float = 1e-10,
    max_iter: int | None = None,
    x0: Optional[Field] = None,
) -> tuple[Field, KrylovReport]:
    """Solve op(x) = rhs by unrestarted GMRES.

    With a preconditioner P the Arnoldi process runs on P*op and the
    stopping test is ||P(op(x) - rhs)|| <= tol * ||P rhs||; without one
    it is the plain relative residual.  The iteration starts from zero
    unless ``x0`` supplies a warm start (time steppers reuse the
    previous step's solution); the stopping test is unchanged since it
    is relative to the right-hand side, not to the initial residual.
    Returns the iterate together with a report; ``converged`` is False
    when ``max_iter`` (default: the operator dimension) was exhausted,
    and the caller decides how to react.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    grid, shape = rhs.grid, rhs.values.shape
    n = rhs.values.size
    if max_iter is None:
        max_iter = n
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    def matvec(x):
        y = _apply(op, grid, shape, x)
        if precond is not None:
            y = _apply(precond, grid, shape, y)
        return y

    b = _vec(rhs).astype(np.complex128)
    pb = _apply(precond, grid, shape, b) if precond is not None else b
    pb_norm = np.linalg.norm(pb)
    if pb_norm == 0.0:
        return Field(grid, np.zeros(shape, dtype=np.complex128)), KrylovReport(0, 0.0, True, [0.0])

    if x0 is not None:
        start = _vec(x0).astype(np.complex128)
        r0 = pb - matvec(start)
    else:
        start = None
        r0 = pb
    beta = np.linalg.norm(r0)
    if beta <= tol * pb_norm:
        x_out = np.zeros(shape, dtype=np.complex128) if start is None else start.reshape(shape)
        rel0 = float(beta / pb_norm)
        return Field(grid, x_out.copy()), KrylovReport(0, rel0, True, [rel0])

    basis = [r0 / beta]
    # Hessenberg columns after Givens, rotation pairs, and the rotated rhs
    h_cols: list[np.ndarray] = []
    rotations: list[tuple[complex, complex]] = []
    g = [beta]
    history = [float(beta / pb_norm)]
    converged = False
    iterations = 0

    for j in range(max_iter):
        w = matvec(basis[j])
        if not np.all(np.isfinite(w)):
            # operator overflowed (e.g. solver mid blow-up): give up cleanly
            break
        norm_before = np.linalg.norm(w)
        h = np.zeros(j + 2, dtype=np.complex128)
        for i in range(j + 1):
            h[i] = np.vdot(basis[i], w)
            w = w - h[i] * basis[i]
        if np.linalg.norm(w) < 0.5 * norm_before:
            # loss of orthogonality: one more Gram-Schmidt sweep
            for i in range(j + 1):
                c = np.vdot(basis[i], w)
                h[i] += c
                w = w - c * basis[i]
        wnorm = float(np.linalg.norm(w))
        h[j + 1] = wnorm

        # apply stored rotations to the new column, then a fresh one
        for i, (ca, sb) in enumerate(rotations):
            h[i], h[i + 1] = ca * h[i] + sb * h[i + 1], -np.conj(sb) * h[i] + np.conj(ca) * h[i + 1]
        denom = np.hypot(abs(h[j]), abs(h[j + 1]))
        if denom == 0.0:
            ca, sb = 1.0 + 0j, 0.0 + 0j
        else:
            ca, sb = np.conj(h[j]) / denom, np.conj(h[j + 1]) / denom
        rotations.append((ca, sb))
        h[j], h[j + 1] = ca * h[j] + sb * h[j + 1], 0.0
        g.append(-np.conj(sb) * g[j])
        g[j] = ca * g[j]

        h_cols.append(h[: j + 1].copy())
        iterations = j + 1
        rel = abs(g[j + 1]) / pb_norm
        history.append(float(rel))
        # exact breakdown (wnorm = 0) drives the rotated residual to zero
        if rel <= tol:
            converged = True
            break
        if wnorm == 0.0:
            break
        if j + 1 < max_iter:
            basis.append(w / wnorm)

    # back substitution on the triangular system R y = g
    k = iterations
    y = np.zeros(k, dtype=np.complex128)
    for i in range(k - 1, -1, -1):
        acc = g[i] - sum(h_cols[m][i] * y[m] for m in range(i + 1, k))
        y[i] = acc / h_cols[i][i] if h_cols[i][i] != 0.0 else 0.0
    x = sum(y[i] * basis[i] for i in range(k))
    if start is not None:
        x = x + start

    rel = float(abs(g[k]) / pb_norm)
    return Field(grid, x.reshape(shape)), KrylovReport(iterations, rel, converged, history)
