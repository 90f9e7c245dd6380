"""MAC staggered grid, field containers, and second-order discrete operators.

Layout conventions (shapes in array index order [i, j] = [x, y]):

* scalars (temperature, pressure, densities) live at cell centers,
  shape ``(nx, ny)``, center (i, j) at ``((i + 1/2) hx, (j + 1/2) hy)``;
* the x velocity component u lives on vertical faces, shape ``(nx+1, ny)``,
  face (i, j) at ``(i hx, (j + 1/2) hy)``;
* the y velocity component v lives on horizontal faces, shape ``(nx, ny+1)``;
* corner quantities (the off-diagonal of the symmetric gradient) have shape
  ``(nx+1, ny+1)``.

Dirichlet boundary data for scalars is prescribed at wall-face midpoints and
enforced through linear-extrapolation ghosts, ``ghost = 2 g - interior``.
Velocity walls are no-slip: normal (boundary-face) values are exactly zero
and tangential ghosts reflect, ``ghost = -interior``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid of nx-by-ny cells on [0, Lx] x [0, Ly]."""

    nx: int
    ny: int
    Lx: float
    Ly: float

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs nx, ny >= 4, got {self.nx}x{self.ny}")
        if not (self.Lx > 0.0 and self.Ly > 0.0):
            raise ValueError(f"domain lengths must be positive, got {self.Lx}, {self.Ly}")

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def volume(self) -> float:
        return self.Lx * self.Ly

    def cell_centers(self):
        """Meshgrid arrays (x, y) of cell-center coordinates, shape (nx, ny)."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="ij")

    def corners(self):
        """Meshgrid arrays of cell-corner coordinates, shape (nx+1, ny+1)."""
        x = np.arange(self.nx + 1) * self.hx
        y = np.arange(self.ny + 1) * self.hy
        return np.meshgrid(x, y, indexing="ij")

    def face_centers_x(self):
        """Coordinates of vertical (u) faces, shape (nx+1, ny)."""
        x = np.arange(self.nx + 1) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="ij")

    def face_centers_y(self):
        """Coordinates of horizontal (v) faces, shape (nx, ny+1)."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = np.arange(self.ny + 1) * self.hy
        return np.meshgrid(x, y, indexing="ij")


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")


@dataclass
class ScalarField:
    """Cell-centered scalar values, shape (nx, ny)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.nx, self.grid.ny)
        if self.values.shape != expected:
            raise ValueError(f"scalar field shape {self.values.shape} != {expected}")
        _check_finite("scalar field", self.values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full((grid.nx, grid.ny), float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        x, y = grid.cell_centers()
        return cls(grid, np.asarray(fn(x, y), dtype=float))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    """Face-staggered velocity components: u (nx+1, ny), v (nx, ny+1)."""

    grid: Grid
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        g = self.grid
        if self.u.shape != (g.nx + 1, g.ny):
            raise ValueError(f"u shape {self.u.shape} != {(g.nx + 1, g.ny)}")
        if self.v.shape != (g.nx, g.ny + 1):
            raise ValueError(f"v shape {self.v.shape} != {(g.nx, g.ny + 1)}")
        _check_finite("vector field", self.u)
        _check_finite("vector field", self.v)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.u.copy(), self.v.copy())

    def max_abs(self) -> float:
        mu = float(np.max(np.abs(self.u))) if self.u.size else 0.0
        mv = float(np.max(np.abs(self.v))) if self.v.size else 0.0
        return max(mu, mv)

    def boundary_faces_zero(self, tol: float = 0.0) -> bool:
        return (
            np.max(np.abs(self.u[0, :])) <= tol
            and np.max(np.abs(self.u[-1, :])) <= tol
            and np.max(np.abs(self.v[:, 0])) <= tol
            and np.max(np.abs(self.v[:, -1])) <= tol
        )


@dataclass
class SymGradField:
    """Symmetric velocity gradient: diagonal at centers, off-diagonal at corners."""

    grid: Grid
    d11: np.ndarray
    d22: np.ndarray
    d12: np.ndarray

    def __post_init__(self):
        g = self.grid
        if self.d11.shape != (g.nx, g.ny) or self.d22.shape != (g.nx, g.ny):
            raise ValueError("diagonal components must be cell centered")
        if self.d12.shape != (g.nx + 1, g.ny + 1):
            raise ValueError("d12 must live at cell corners")


@dataclass(frozen=True)
class WallValues:
    """Dirichlet scalar data at wall-face midpoints (left/right along y, bottom/top along x)."""

    left: np.ndarray
    right: np.ndarray
    bottom: np.ndarray
    top: np.ndarray

    @classmethod
    def zero(cls, grid: Grid) -> "WallValues":
        return cls(np.zeros(grid.ny), np.zeros(grid.ny), np.zeros(grid.nx), np.zeros(grid.nx))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "WallValues":
        v = float(value)
        return cls(
            np.full(grid.ny, v), np.full(grid.ny, v), np.full(grid.nx, v), np.full(grid.nx, v)
        )

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "WallValues":
        """Evaluate fn(x, y) at the wall-face midpoints of all four walls."""
        yc = (np.arange(grid.ny) + 0.5) * grid.hy
        xc = (np.arange(grid.nx) + 0.5) * grid.hx
        return cls(
            left=np.asarray(fn(np.zeros_like(yc), yc), dtype=float),
            right=np.asarray(fn(np.full_like(yc, grid.Lx), yc), dtype=float),
            bottom=np.asarray(fn(xc, np.zeros_like(xc)), dtype=float),
            top=np.asarray(fn(xc, np.full_like(xc, grid.Ly)), dtype=float),
        )

    def min(self) -> float:
        return min(float(a.min()) for a in (self.left, self.right, self.bottom, self.top))

    def max(self) -> float:
        return max(float(a.max()) for a in (self.left, self.right, self.bottom, self.top))


# ---------------------------------------------------------------------------
# raw-array kernels; the public operators wrap these
# ---------------------------------------------------------------------------


def pad_dirichlet(values: np.ndarray, walls: WallValues | None, grid: Grid) -> np.ndarray:
    """Extend a cell-centered array by one ghost layer, ghost = 2 g - interior.

    walls=None means homogeneous Dirichlet data (the common case for
    perturbation quantities, which vanish at the walls).
    """
    nx, ny = grid.nx, grid.ny
    p = np.empty((nx + 2, ny + 2))
    p[1:-1, 1:-1] = values
    if walls is None:
        p[0, 1:-1] = -values[0, :]
        p[-1, 1:-1] = -values[-1, :]
        p[1:-1, 0] = -values[:, 0]
        p[1:-1, -1] = -values[:, -1]
    else:
        p[0, 1:-1] = 2.0 * walls.left - values[0, :]
        p[-1, 1:-1] = 2.0 * walls.right - values[-1, :]
        p[1:-1, 0] = 2.0 * walls.bottom - values[:, 0]
        p[1:-1, -1] = 2.0 * walls.top - values[:, -1]
    # corner ghosts are never read by the 5-point/face stencils; keep finite
    p[0, 0] = p[1, 0]
    p[-1, 0] = p[-2, 0]
    p[0, -1] = p[1, -1]
    p[-1, -1] = p[-2, -1]
    return p


def grad_x_faces(values: np.ndarray, walls: WallValues | None, grid: Grid) -> np.ndarray:
    """d/dx of a cell-centered array on vertical faces, shape (nx+1, ny)."""
    hx = grid.hx
    g = np.empty((grid.nx + 1, grid.ny))
    g[1:-1, :] = (values[1:, :] - values[:-1, :]) / hx
    if walls is None:
        g[0, :] = 2.0 * values[0, :] / hx
        g[-1, :] = -2.0 * values[-1, :] / hx
    else:
        g[0, :] = 2.0 * (values[0, :] - walls.left) / hx
        g[-1, :] = 2.0 * (walls.right - values[-1, :]) / hx
    return g


def grad_y_faces(values: np.ndarray, walls: WallValues | None, grid: Grid) -> np.ndarray:
    """d/dy of a cell-centered array on horizontal faces, shape (nx, ny+1)."""
    hy = grid.hy
    g = np.empty((grid.nx, grid.ny + 1))
    g[:, 1:-1] = (values[:, 1:] - values[:, :-1]) / hy
    if walls is None:
        g[:, 0] = 2.0 * values[:, 0] / hy
        g[:, -1] = -2.0 * values[:, -1] / hy
    else:
        g[:, 0] = 2.0 * (values[:, 0] - walls.bottom) / hy
        g[:, -1] = 2.0 * (walls.top - values[:, -1]) / hy
    return g


def div_arrays(u: np.ndarray, v: np.ndarray, grid: Grid) -> np.ndarray:
    return (u[1:, :] - u[:-1, :]) / grid.hx + (v[:, 1:] - v[:, :-1]) / grid.hy


def laplacian_arrays(values: np.ndarray, walls: WallValues | None, grid: Grid) -> np.ndarray:
    p = pad_dirichlet(values, walls, grid)
    return (p[2:, 1:-1] - 2.0 * values + p[:-2, 1:-1]) / grid.hx**2 + (
        p[1:-1, 2:] - 2.0 * values + p[1:-1, :-2]
    ) / grid.hy**2


def avg_x_faces_to_centers(fx: np.ndarray) -> np.ndarray:
    """Average a vertical-face array (nx+1, ny) to cell centers."""
    return 0.5 * (fx[:-1, :] + fx[1:, :])


def avg_y_faces_to_centers(fy: np.ndarray) -> np.ndarray:
    """Average a horizontal-face array (nx, ny+1) to cell centers."""
    return 0.5 * (fy[:, :-1] + fy[:, 1:])


def grad_sq_arrays(values: np.ndarray, walls: WallValues | None, grid: Grid) -> np.ndarray:
    """|grad f|^2 at cell centers (face gradients squared, then averaged in)."""
    gx = grad_x_faces(values, walls, grid)
    gy = grad_y_faces(values, walls, grid)
    return avg_x_faces_to_centers(gx * gx) + avg_y_faces_to_centers(gy * gy)


def advect_arrays(
    u: np.ndarray, v: np.ndarray, values: np.ndarray, walls: WallValues | None, grid: Grid
) -> np.ndarray:
    """(v . grad) f at cell centers via face products averaged inward."""
    gx = grad_x_faces(values, walls, grid)
    gy = grad_y_faces(values, walls, grid)
    return avg_x_faces_to_centers(u * gx) + avg_y_faces_to_centers(v * gy)


def speed_sq_arrays(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """|v|^2 at cell centers: component squares averaged from faces."""
    return avg_x_faces_to_centers(u * u) + avg_y_faces_to_centers(v * v)


def sym_grad_arrays(u: np.ndarray, v: np.ndarray, grid: Grid):
    """Return (d11, d22, d12) of the symmetric gradient under no-slip walls."""
    nx, ny = grid.nx, grid.ny
    hx, hy = grid.hx, grid.hy
    d11 = (u[1:, :] - u[:-1, :]) / hx
    d22 = (v[:, 1:] - v[:, :-1]) / hy
    # tangential ghosts reflect across the wall so the wall velocity is zero
    upad = np.empty((nx + 1, ny + 2))
    upad[:, 1:-1] = u
    upad[:, 0] = -u[:, 0]
    upad[:, -1] = -u[:, -1]
    vpad = np.empty((nx + 2, ny + 1))
    vpad[1:-1, :] = v
    vpad[0, :] = -v[0, :]
    vpad[-1, :] = -v[-1, :]
    dudy = (upad[:, 1:] - upad[:, :-1]) / hy
    dvdx = (vpad[1:, :] - vpad[:-1, :]) / hx
    d12 = 0.5 * (dudy + dvdx)
    return d11, d22, d12


def double_dot_arrays(d11: np.ndarray, d22: np.ndarray, d12: np.ndarray) -> np.ndarray:
    d12c = 0.25 * (d12[:-1, :-1] + d12[1:, :-1] + d12[:-1, 1:] + d12[1:, 1:])
    return d11 * d11 + d22 * d22 + 2.0 * d12c * d12c


def grad_sq_vector_arrays(u: np.ndarray, v: np.ndarray, grid: Grid) -> np.ndarray:
    """|grad v|^2 (all four entries) at cell centers under no-slip walls."""
    nx, ny = grid.nx, grid.ny
    hx, hy = grid.hx, grid.hy
    dudx = (u[1:, :] - u[:-1, :]) / hx
    dvdy = (v[:, 1:] - v[:, :-1]) / hy
    upad = np.empty((nx + 1, ny + 2))
    upad[:, 1:-1] = u
    upad[:, 0] = -u[:, 0]
    upad[:, -1] = -u[:, -1]
    vpad = np.empty((nx + 2, ny + 1))
    vpad[1:-1, :] = v
    vpad[0, :] = -v[0, :]
    vpad[-1, :] = -v[-1, :]
    dudy = (upad[:, 1:] - upad[:, :-1]) / hy  # corners
    dvdx = (vpad[1:, :] - vpad[:-1, :]) / hx  # corners
    dudy_c = 0.25 * (dudy[:-1, :-1] + dudy[1:, :-1] + dudy[:-1, 1:] + dudy[1:, 1:])
    dvdx_c = 0.25 * (dvdx[:-1, :-1] + dvdx[1:, :-1] + dvdx[:-1, 1:] + dvdx[1:, 1:])
    return dudx * dudx + dvdy * dvdy + dudy_c * dudy_c + dvdx_c * dvdx_c


# ---------------------------------------------------------------------------
# public operators on field objects
# ---------------------------------------------------------------------------


def integrate(f: ScalarField) -> float:
    """Midpoint-rule volume integral over the domain."""
    return float(np.sum(f.values)) * f.grid.cell_area


def gradient(f: ScalarField, walls: WallValues | None = None) -> VectorField:
    """Face-staggered gradient; boundary faces use the Dirichlet ghosts."""
    return VectorField(
        f.grid, grad_x_faces(f.values, walls, f.grid), grad_y_faces(f.values, walls, f.grid)
    )


def divergence(v: VectorField) -> ScalarField:
    """Per-cell net flux difference."""
    return ScalarField(v.grid, div_arrays(v.u, v.v, v.grid))


def sym_grad(v: VectorField) -> SymGradField:
    """Symmetric part of the velocity gradient (no-slip wall ghosts)."""
    d11, d22, d12 = sym_grad_arrays(v.u, v.v, v.grid)
    return SymGradField(v.grid, d11, d22, d12)


def double_dot(d: SymGradField) -> ScalarField:
    """D:D at cell centers; the off-diagonal is corner-averaged first."""
    return ScalarField(d.grid, double_dot_arrays(d.d11, d.d22, d.d12))


def laplacian_dirichlet(f: ScalarField, walls: WallValues | None = None) -> ScalarField:
    """Standard 5-point Laplacian with ghost values 2 g - interior."""
    return ScalarField(f.grid, laplacian_arrays(f.values, walls, f.grid))


def vdot(a: VectorField, b: VectorField) -> float:
    """Face-weighted inner product of two staggered vector fields."""
    s = float(np.sum(a.u * b.u)) + float(np.sum(a.v * b.v))
    return s * a.grid.cell_area


def advect(v: VectorField, f: ScalarField, walls: WallValues | None = None) -> ScalarField:
    """(v . grad) f at cell centers."""
    return ScalarField(f.grid, advect_arrays(v.u, v.v, f.values, walls, f.grid))


def streamfunction_velocity(grid: Grid, psi: np.ndarray) -> VectorField:
    """Discrete curl of a corner streamfunction: exactly divergence free.

    The boundary ring of psi is forced to zero so the wall-normal faces
    vanish identically.
    """
    psi = np.array(psi, dtype=float)
    if psi.shape != (grid.nx + 1, grid.ny + 1):
        raise ValueError("streamfunction must live at cell corners")
    psi[0, :] = 0.0
    psi[-1, :] = 0.0
    psi[:, 0] = 0.0
    psi[:, -1] = 0.0
    u = (psi[:, 1:] - psi[:, :-1]) / grid.hy
    v = -(psi[1:, :] - psi[:-1, :]) / grid.hx
    return VectorField(grid, u, v)
