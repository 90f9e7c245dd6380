"""Non-equilibrium steady state: the Dirichlet heat problem and its constants.

The steady velocity vanishes, so the steady state is fully described by the
temperature field solving the discrete Laplace equation with the prescribed
(positive, possibly non-uniform) wall temperature, plus a handful of cached
domain constants that enter decay-rate formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Grid,
    ScalarField,
    WallValues,
    grad_sq_arrays,
    grad_x_faces,
    grad_y_faces,
    laplacian_arrays,
)
from .solvers import conjugate_gradient
from .thermo import Material

# slack for the cached-extrema / maximum-principle checks; the linear solve
# is iterative, so extrema can exceed the wall data by the residual scale
_EXTREMA_SLACK = 1e-8


@dataclass(frozen=True)
class BoundaryProfile:
    """Wall temperature as a function of position on the boundary.

    Presets cover the analytic families used by the experiments; `tabulated`
    accepts raw per-wall-face values.  All profiles must be strictly positive.
    """

    kind: str
    params: dict = field(default_factory=dict)

    PRESETS = ("constant", "linear_x", "sin_arc", "two_wall", "tabulated")

    def __post_init__(self):
        if self.kind not in self.PRESETS:
            raise ValueError(f"unknown boundary preset {self.kind!r}; choose from {self.PRESETS}")

    @classmethod
    def constant(cls, value: float) -> "BoundaryProfile":
        return cls("constant", {"value": float(value)})

    @classmethod
    def linear_x(cls, base: float, delta: float) -> "BoundaryProfile":
        """Trace of base + delta * x / Lx on all four walls."""
        return cls("linear_x", {"base": float(base), "delta": float(delta)})

    @classmethod
    def sin_arc(cls, base: float, amplitude: float, cycles: float = 0.5) -> "BoundaryProfile":
        """base + amplitude * sin(2 pi cycles a), a = normalized arclength."""
        return cls(
            "sin_arc",
            {"base": float(base), "amplitude": float(amplitude), "cycles": float(cycles)},
        )

    @classmethod
    def two_wall(cls, hot: float, cold: float) -> "BoundaryProfile":
        """Hot left wall, cold right wall, step at mid-x on bottom and top."""
        return cls("two_wall", {"hot": float(hot), "cold": float(cold)})

    @classmethod
    def tabulated(cls, left, right, bottom, top) -> "BoundaryProfile":
        return cls(
            "tabulated",
            {
                "left": np.asarray(left, dtype=float),
                "right": np.asarray(right, dtype=float),
                "bottom": np.asarray(bottom, dtype=float),
                "top": np.asarray(top, dtype=float),
            },
        )

    def evaluate(self, grid: Grid) -> WallValues:
        """Wall temperatures at wall-face midpoints."""
        p = self.params
        if self.kind == "constant":
            walls = WallValues.constant(grid, p["value"])
        elif self.kind == "linear_x":
            walls = WallValues.from_function(
                grid, lambda x, y: p["base"] + p["delta"] * x / grid.Lx
            )
        elif self.kind == "sin_arc":
            walls = self._sin_arc_walls(grid)
        elif self.kind == "two_wall":
            hot, cold = p["hot"], p["cold"]
            xc = (np.arange(grid.nx) + 0.5) * grid.hx
            step = np.where(xc < 0.5 * grid.Lx, hot, cold)
            walls = WallValues(
                left=np.full(grid.ny, hot),
                right=np.full(grid.ny, cold),
                bottom=step.copy(),
                top=step.copy(),
            )
        else:
            walls = WallValues(
                left=p["left"].copy(),
                right=p["right"].copy(),
                bottom=p["bottom"].copy(),
                top=p["top"].copy(),
            )
            if (
                walls.left.shape != (grid.ny,)
                or walls.right.shape != (grid.ny,)
                or walls.bottom.shape != (grid.nx,)
                or walls.top.shape != (grid.nx,)
            ):
                raise ValueError("tabulated wall arrays do not match the grid")
        if walls.min() <= 0.0:
            raise ValueError(f"wall temperature must be positive, min is {walls.min()}")
        return walls

    def _sin_arc_walls(self, grid: Grid) -> WallValues:
        p = self.params
        per = 2.0 * (grid.Lx + grid.Ly)

        def theta(arc):
            return p["base"] + p["amplitude"] * np.sin(2.0 * np.pi * p["cycles"] * arc / per)

        xc = (np.arange(grid.nx) + 0.5) * grid.hx
        yc = (np.arange(grid.ny) + 0.5) * grid.hy
        # counterclockwise walk from the origin: bottom, right, top, left
        bottom = theta(xc)
        right = theta(grid.Lx + yc)
        top = theta(grid.Lx + grid.Ly + (grid.Lx - xc))
        left = theta(2.0 * grid.Lx + grid.Ly + (grid.Ly - yc))
        return WallValues(left=left, right=right, bottom=bottom, top=top)


@dataclass(frozen=True)
class SteadyState:
    """Steady temperature field with its cached domain constants.

    The face gradients of the steady temperature are precomputed: they feed
    the coupling term of every time step and every functional sample.
    """

    theta_hat: ScalarField
    walls: WallValues
    theta_hat_min: float
    theta_hat_max: float
    grad_theta_hat_max: float
    poincare_constant: float
    residual: float  # relative residual of the discrete Laplace solve
    gx_hat: np.ndarray = None
    gy_hat: np.ndarray = None

    def __post_init__(self):
        v = self.theta_hat.values
        if self.theta_hat_min <= 0.0:
            raise ValueError("steady temperature must stay positive")
        span = max(self.theta_hat_max - self.theta_hat_min, abs(self.theta_hat_max), 1.0)
        if abs(self.theta_hat_min - float(v.min())) > _EXTREMA_SLACK * span:
            raise ValueError("cached minimum does not match the field")
        if abs(self.theta_hat_max - float(v.max())) > _EXTREMA_SLACK * span:
            raise ValueError("cached maximum does not match the field")
        if self.gx_hat is None:
            object.__setattr__(self, "gx_hat", grad_x_faces(v, self.walls, self.grid))
        if self.gy_hat is None:
            object.__setattr__(self, "gy_hat", grad_y_faces(v, self.walls, self.grid))

    @property
    def grid(self) -> Grid:
        return self.theta_hat.grid


def poincare_constant(grid: Grid) -> float:
    """C_P with the convention ||f||^2 <= C_P ||grad f||^2 on the rectangle.

    This is the reciprocal of the smallest Dirichlet Laplacian eigenvalue,
    pi^2 (1/Lx^2 + 1/Ly^2).
    """
    return 1.0 / (math.pi**2 * (1.0 / grid.Lx**2 + 1.0 / grid.Ly**2))


def _affine_wall_fit(grid: Grid, walls: WallValues) -> np.ndarray:
    """Least-squares affine fit of the wall data, sampled at cell centers.

    Harmonic solutions carry their boundary data's affine part exactly, so
    seeding the solver with it removes the large smooth component before the
    first iteration; for an affine trace the seed already is the discrete
    solution (reproduced to rounding).
    """
    yc = (np.arange(grid.ny) + 0.5) * grid.hy
    xc = (np.arange(grid.nx) + 0.5) * grid.hx
    px = np.concatenate([np.zeros(grid.ny), np.full(grid.ny, grid.Lx), xc, xc])
    py = np.concatenate([yc, yc, np.zeros(grid.nx), np.full(grid.nx, grid.Ly)])
    data = np.concatenate([walls.left, walls.right, walls.bottom, walls.top])
    design = np.column_stack([np.ones_like(px), px - px.mean(), py - py.mean()])
    coeff, *_ = np.linalg.lstsq(design, data, rcond=None)
    x, y = grid.cell_centers()
    return coeff[0] + coeff[1] * (x - px.mean()) + coeff[2] * (y - py.mean())


def solve_steady_heat(
    grid: Grid,
    mat: Material,
    boundary: BoundaryProfile,
    tol: float = 1e-10,
) -> SteadyState:
    """Solve div(kappa grad theta) = 0 with Dirichlet wall data.

    Conjugate gradient on the SPD 5-point system; the constant conductivity
    drops out of the steady problem.  The returned state caches the extrema,
    the face-evaluated maximum gradient magnitude, and the Poincare constant.
    """
    if not (0.0 < tol <= 1e-4):
        raise ValueError(f"steady solve tolerance must lie in (0, 1e-4], got {tol}")
    walls = boundary.evaluate(grid)

    def apply_op(x):
        return -laplacian_arrays(x, None, grid)

    # forcing carried by the ghost convention: ghost = 2 g - interior
    b = np.zeros((grid.nx, grid.ny))
    b[0, :] += 2.0 * walls.left / grid.hx**2
    b[-1, :] += 2.0 * walls.right / grid.hx**2
    b[:, 0] += 2.0 * walls.bottom / grid.hy**2
    b[:, -1] += 2.0 * walls.top / grid.hy**2

    x0 = _affine_wall_fit(grid, walls)
    theta, info = conjugate_gradient(
        apply_op,
        b,
        x0=x0,
        rtol=tol,
        max_iter=10 * grid.nx * grid.ny,
        name="steady heat",
    )

    lap = laplacian_arrays(theta, walls, grid)
    scale = float(np.linalg.norm(b.ravel()))
    residual = float(np.linalg.norm(lap.ravel())) / max(scale, 1e-300)

    gx = grad_x_faces(theta, walls, grid)
    gy = grad_y_faces(theta, walls, grid)
    grad_sq_c = grad_sq_arrays(theta, walls, grid)
    grad_max = max(
        float(np.max(np.abs(gx))),
        float(np.max(np.abs(gy))),
        float(np.sqrt(np.max(grad_sq_c))),
    )

    return SteadyState(
        theta_hat=ScalarField(grid, theta),
        walls=walls,
        theta_hat_min=float(theta.min()),
        theta_hat_max=float(theta.max()),
        grad_theta_hat_max=grad_max,
        poincare_constant=poincare_constant(grid),
        residual=residual,
    )
