"""Linear solvers: matrix-free conjugate gradient for the SPD Dirichlet
systems and an exact cosine-transform solve for the Neumann pressure Poisson
problem (the flux-form Neumann Laplacian on a uniform cell-centered grid is
diagonal in the DCT-II basis)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .errors import SolverError


def conjugate_gradient(
    apply_op,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    rtol: float | None = 1e-10,
    atol_inf: float | None = None,
    max_iter: int = 10000,
    name: str = "cg",
):
    """Solve A x = b for symmetric positive (semi)definite A.

    apply_op maps an array to A @ x with the same shape.  Iteration stops when
    the 2-norm residual drops below rtol * ||b|| or the max-norm residual
    below atol_inf, whichever criteria are given.  Summation order is fixed,
    so repeated runs are bit-identical.

    Returns (x, info) where info carries the final residuals and iteration
    count.  Raises SolverError with the residual history on stagnation.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - apply_op(x)
    b_norm = float(np.linalg.norm(b.ravel()))
    if b_norm == 0.0 and atol_inf is None:
        return np.zeros_like(b), {"iterations": 0, "residual_2": 0.0, "residual_inf": 0.0}

    def converged(r2, rinf):
        ok = True
        if rtol is not None:
            ok = ok and r2 <= rtol * max(b_norm, 1e-300)
        if atol_inf is not None:
            ok = ok and rinf <= atol_inf
        return ok

    r2 = float(np.linalg.norm(r.ravel()))
    rinf = float(np.max(np.abs(r))) if r.size else 0.0
    history = [r2]
    if converged(r2, rinf):
        return x, {"iterations": 0, "residual_2": r2, "residual_inf": rinf}

    p = r.copy()
    rs_old = float(np.vdot(r.ravel(), r.ravel()))
    for k in range(1, max_iter + 1):
        ap = apply_op(p)
        denom = float(np.vdot(p.ravel(), ap.ravel()))
        if denom <= 0.0:
            raise SolverError(
                f"{name}: non-positive curvature at iteration {k}", residual_history=history
            )
        alpha = rs_old / denom
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(np.vdot(r.ravel(), r.ravel()))
        r2 = rs_new**0.5
        rinf = float(np.max(np.abs(r)))
        history.append(r2)
        if converged(r2, rinf):
            return x, {"iterations": k, "residual_2": r2, "residual_inf": rinf}
        p = r + (rs_new / rs_old) * p
        rs_old = rs_new
    raise SolverError(
        f"{name}: no convergence within {max_iter} iterations "
        f"(residual_2={r2:.3e}, residual_inf={rinf:.3e})",
        residual_history=history,
    )


@lru_cache(maxsize=32)
def _neumann_symbol(nx: int, ny: int, hx: float, hy: float) -> np.ndarray:
    """Eigenvalues of the flux-form Neumann Laplacian in the DCT-II basis."""
    kx = np.arange(nx)
    ky = np.arange(ny)
    lx = -4.0 / hx**2 * np.sin(0.5 * np.pi * kx / nx) ** 2
    ly = -4.0 / hy**2 * np.sin(0.5 * np.pi * ky / ny) ** 2
    sym = lx[:, None] + ly[None, :]
    sym[0, 0] = 1.0  # the constant mode is gauged to zero separately
    return sym


def poisson_neumann(rhs: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Solve the cell-centered Neumann Poisson problem lap p = rhs exactly.

    The right-hand side is projected onto mean zero (the compatibility
    condition) and the constant mode of the solution is gauged to zero, so
    the returned field has zero mean.
    """
    nx, ny = rhs.shape
    spec = sfft.dctn(rhs, type=2)
    spec[0, 0] = 0.0
    spec /= _neumann_symbol(nx, ny, hx, hy)
    out = sfft.idctn(spec, type=2)
    return out - out.mean()
