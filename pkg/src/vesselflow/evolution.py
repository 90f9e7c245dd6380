"""Explicit projection time stepper for the perturbation equations.

The state is the perturbation triple (velocity, temperature, pressure) about
the non-equilibrium steady state.  One step is a Chorin fractional step:
explicit centered advection-diffusion predictor, pressure Poisson solve with
homogeneous Neumann data and mean-zero gauge, divergence-killing correction,
then an explicit temperature update driven by the corrected velocity, the
steady-gradient coupling, and the dissipative heating source.

The steady state is an exact fixed point of the discrete stepper because the
equations are formulated in perturbation variables throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import functionals
from .errors import BlowUpError, SolverError
from .grid import (
    Grid,
    ScalarField,
    VectorField,
    avg_x_faces_to_centers,
    avg_y_faces_to_centers,
    div_arrays,
    double_dot_arrays,
    grad_x_faces,
    grad_y_faces,
    laplacian_arrays,
    speed_sq_arrays,
    streamfunction_velocity,
    sym_grad_arrays,
)
from .solvers import poisson_neumann
from .steady import SteadyState
from .thermo import POSITIVITY_FLOOR, Material, temperature_ratio

try:
    from . import _kernels

    _HAVE_KERNELS = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    _kernels = None
    _HAVE_KERNELS = False


@dataclass(frozen=True)
class StepControl:
    """Time-step safety factors and the projection tolerance."""

    cfl_safety: float = 0.4
    dt_max: float = 1.0
    projection_tol: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.cfl_safety < 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1), got {self.cfl_safety}")
        if not self.dt_max > 0.0:
            raise ValueError("dt_max must be positive")
        if not self.projection_tol > 0.0:
            raise ValueError("projection_tol must be positive")


@dataclass
class PerturbationState:
    """Perturbation fields at one time instant.

    ddot caches D:D of this state's velocity at cell centers so the stepper
    and every functional evaluator share a single discrete definition.
    """

    t: float
    v_tilde: VectorField
    theta_tilde: ScalarField
    p_tilde: ScalarField
    ddot: ScalarField | None = None
    max_abs_div: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.v_tilde.grid

    def with_ddot(self) -> "PerturbationState":
        if self.ddot is None:
            d11, d22, d12 = sym_grad_arrays(self.v_tilde.u, self.v_tilde.v, self.grid)
            self.ddot = ScalarField(self.grid, double_dot_arrays(d11, d22, d12))
        return self


def make_state(
    grid: Grid,
    u: np.ndarray,
    v: np.ndarray,
    theta: np.ndarray,
    p: np.ndarray | None = None,
    t: float = 0.0,
) -> PerturbationState:
    p = np.zeros((grid.nx, grid.ny)) if p is None else p
    state = PerturbationState(
        t=t,
        v_tilde=VectorField(grid, u, v),
        theta_tilde=ScalarField(grid, theta),
        p_tilde=ScalarField(grid, p),
    )
    state.max_abs_div = float(np.max(np.abs(div_arrays(state.v_tilde.u, state.v_tilde.v, grid))))
    return state.with_ddot()


@dataclass(frozen=True)
class InitialPerturbation:
    """Initial data: streamfunction velocity modes plus a temperature field.

    stream_modes hold (k, l, amplitude) with the amplitude in m^2/s; the
    velocity is the discrete curl of the mode sum, hence divergence free to
    machine precision with zero wall-normal faces.  The temperature is either
    a Gaussian bump (center, width, amplitude) or a seeded random smooth
    field; the random generator is PCG64, so traces reproduce everywhere.
    """

    stream_modes: tuple = ()
    bump: tuple | None = None  # (cx, cy, width, amplitude)
    random_theta: tuple | None = None  # (max_mode, amplitude)
    seed: int = 0

    def build(self, grid: Grid, steady: SteadyState) -> PerturbationState:
        xq, yq = grid.corners()
        psi = np.zeros((grid.nx + 1, grid.ny + 1))
        for k, l, amp in self.stream_modes:
            psi += amp * np.sin(k * np.pi * xq / grid.Lx) * np.sin(l * np.pi * yq / grid.Ly)
        vel = streamfunction_velocity(grid, psi)

        xc, yc = grid.cell_centers()
        theta = np.zeros((grid.nx, grid.ny))
        if self.bump is not None:
            cx, cy, width, amp = self.bump
            theta += amp * np.exp(-((xc - cx) ** 2 + (yc - cy) ** 2) / (2.0 * width**2))
        if self.random_theta is not None:
            max_mode, amp = self.random_theta
            rng = np.random.Generator(np.random.PCG64(self.seed))
            raw = np.zeros_like(theta)
            for k in range(1, int(max_mode) + 1):
                for l in range(1, int(max_mode) + 1):
                    c = rng.standard_normal() / (k * k + l * l)
                    raw += c * np.sin(k * np.pi * xc / grid.Lx) * np.sin(l * np.pi * yc / grid.Ly)
            peak = float(np.max(np.abs(raw)))
            if peak > 0.0:
                theta += amp * raw / peak

        ratio_min = float(np.min(1.0 + theta / steady.theta_hat.values))
        if ratio_min < 10.0 * POSITIVITY_FLOOR:
            raise ValueError(
                f"initial temperature perturbation too deep: min ratio {ratio_min:.3e}"
            )
        return make_state(grid, vel.u, vel.v, theta)


def stream_mode_amplitude(grid: Grid, k: int, l: int, peak_speed: float) -> float:
    """Streamfunction amplitude giving the requested peak speed for one mode."""
    return peak_speed / (math.pi * max(k / grid.Lx, l / grid.Ly))


def stable_dt(
    state: PerturbationState, steady: SteadyState, mat: Material, ctrl: StepControl
) -> float:
    """Explicit stability bound: viscous, thermal, advective, and dt_max.

    Besides the grid-scale diffusion limits and the advective CFL, the
    centered-advection/forward-Euler combination needs the advective-
    diffusive bounds dt <= 2 alpha / |v|^2 (temperature) and 2 nu / |v|^2
    (momentum); without them the scheme amplifies grid-scale oscillations
    whenever the cell Peclet number is large.
    """
    g = state.grid
    h = min(g.hx, g.hy)
    visc = h * h * mat.rho / (4.0 * mat.mu)
    therm = h * h * mat.rho * mat.cv_ref / (4.0 * mat.kappa_ref)
    speed = max(state.v_tilde.max_abs(), 1e-30)
    speed_sq = speed * speed
    return ctrl.cfl_safety * min(
        visc,
        therm,
        h / speed,
        2.0 * mat.thermal_diffusivity / speed_sq,
        2.0 * mat.nu / speed_sq,
        ctrl.dt_max,
    )


def _momentum_advection(u, v, grid: Grid):
    """Centered flux-form (v . grad) v on interior u and v faces."""
    adv_u, adv_v, _, _ = _predictor_terms(u, v, grid)
    return adv_u, adv_v


def _velocity_laplacian(u, v, grid: Grid):
    """5-point Laplacian of u and v on interior faces with no-slip ghosts."""
    _, _, lap_u, lap_v = _predictor_terms(u, v, grid)
    return lap_u, lap_v


def _predictor_terms(u, v, grid: Grid):
    """Advection and Laplacian of both velocity components on interior faces,
    sharing the no-slip ghost padding (hot path of the stepper)."""
    nx, ny = grid.nx, grid.ny
    hx, hy = grid.hx, grid.hy
    hx2, hy2 = hx * hx, hy * hy

    upad = np.empty((nx + 1, ny + 2))
    upad[:, 1:-1] = u
    upad[:, 0] = -u[:, 0]
    upad[:, -1] = -u[:, -1]
    vpad = np.empty((nx + 2, ny + 1))
    vpad[1:-1, :] = v
    vpad[0, :] = -v[0, :]
    vpad[-1, :] = -v[-1, :]

    # u momentum: d(uu)/dx from cell-center products, d(vu)/dy from corners
    uc = 0.5 * (u[:-1, :] + u[1:, :])  # (nx, ny)
    uc *= uc
    duu = (uc[1:, :] - uc[:-1, :]) / hx  # interior u faces (nx-1, ny)
    fvu = 0.5 * (v[:-1, :] + v[1:, :])  # corner columns i=1..nx-1
    fvu *= 0.5 * (upad[1:-1, :-1] + upad[1:-1, 1:])
    adv_u = duu + (fvu[:, 1:] - fvu[:, :-1]) / hy

    # v momentum: d(uv)/dx from corners, d(vv)/dy from cell-center products
    vc = 0.5 * (v[:, :-1] + v[:, 1:])  # (nx, ny)
    vc *= vc
    dvv = (vc[:, 1:] - vc[:, :-1]) / hy  # interior v faces (nx, ny-1)
    fuv = 0.5 * (u[:, :-1] + u[:, 1:])  # corner rows j=1..ny-1
    fuv *= 0.5 * (vpad[:-1, 1:-1] + vpad[1:, 1:-1])
    adv_v = (fuv[1:, :] - fuv[:-1, :]) / hx + dvv

    lap_u = (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) / hx2 + (
        upad[1:-1, 2:] - 2.0 * upad[1:-1, 1:-1] + upad[1:-1, :-2]
    ) / hy2
    lap_v = (v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]) / hy2 + (
        vpad[2:, 1:-1] - 2.0 * vpad[1:-1, 1:-1] + vpad[:-2, 1:-1]
    ) / hx2
    return adv_u, adv_v, lap_u, lap_v


def _neumann_laplacian(x, grid: Grid):
    out = np.zeros_like(x)
    fx = (x[1:, :] - x[:-1, :]) / grid.hx**2
    out[:-1, :] += fx
    out[1:, :] -= fx
    fy = (x[:, 1:] - x[:, :-1]) / grid.hy**2
    out[:, :-1] += fy
    out[:, 1:] -= fy
    return out


def step(
    state: PerturbationState,
    steady: SteadyState,
    mat: Material,
    ctrl: StepControl,
    dt: float,
    fast: bool | None = None,
) -> PerturbationState:
    """Advance the perturbation state by one projection step of size dt.

    fast selects the jit-compiled stencil kernels (the default when numba is
    importable); fast=False runs the pure-numpy reference path.  Both paths
    implement the same discrete operators and are kept interchangeable by a
    regression test.
    """
    g = state.grid
    u, v = state.v_tilde.u, state.v_tilde.v
    th = state.theta_tilde.values
    if fast is None:
        fast = _HAVE_KERNELS

    if fast:
        us = u.copy()
        vs = v.copy()
        _kernels.predictor(u, v, g.hx, g.hy, mat.nu, dt, us, vs)
        rhs = (mat.rho / dt) * div_arrays(us, vs, g)
        p = poisson_neumann(rhs, g.hx, g.hy)
        max_div = _kernels.correct_and_div(us, vs, p, g.hx, g.hy, dt / mat.rho)
        un, vn = us, vs
        ddot = np.empty_like(th)
        _kernels.sym_grad_double_dot(un, vn, g.hx, g.hy, ddot)
        thn = np.empty_like(th)
        min_ratio = _kernels.temperature_update(
            th,
            un,
            vn,
            steady.gx_hat,
            steady.gy_hat,
            steady.theta_hat.values,
            ddot,
            g.hx,
            g.hy,
            dt,
            mat.kappa_ref,
            2.0 * mat.mu,
            mat.rho * mat.cv_ref,
            thn,
        )
    else:
        adv_u, adv_v, lap_u, lap_v = _predictor_terms(u, v, g)
        us = u.copy()
        vs = v.copy()
        us[1:-1, :] += dt * (-adv_u + mat.nu * lap_u)
        vs[:, 1:-1] += dt * (-adv_v + mat.nu * lap_v)

        rhs = (mat.rho / dt) * div_arrays(us, vs, g)
        p = poisson_neumann(rhs, g.hx, g.hy)

        un = us
        vn = vs
        un[1:-1, :] -= (dt / mat.rho) * (p[1:, :] - p[:-1, :]) / g.hx
        vn[:, 1:-1] -= (dt / mat.rho) * (p[:, 1:] - p[:, :-1]) / g.hy

        d11, d22, d12 = sym_grad_arrays(un, vn, g)
        ddot = double_dot_arrays(d11, d22, d12)
        heating = 2.0 * mat.mu * ddot
        # (v . grad)(theta_tilde) and (v . grad)(theta_hat) share one face
        # pass; the steady face gradients are cached on the steady state
        gx = grad_x_faces(th, None, g)
        gx += steady.gx_hat
        gy = grad_y_faces(th, None, g)
        gy += steady.gy_hat
        transport = avg_x_faces_to_centers(un * gx) + avg_y_faces_to_centers(vn * gy)
        lap_th = laplacian_arrays(th, None, g)
        thn = th + dt * (
            -transport + (mat.kappa_ref * lap_th + heating) / (mat.rho * mat.cv_ref)
        )
        max_div = float(np.max(np.abs(div_arrays(un, vn, g))))
        min_ratio = float(np.min(1.0 + thn / steady.theta_hat.values))

    if not (
        np.all(np.isfinite(un)) and np.all(np.isfinite(vn)) and np.all(np.isfinite(thn))
    ):
        raise BlowUpError(f"non-finite values after step to t={state.t + dt:.6g}")
    if min_ratio <= POSITIVITY_FLOOR:
        # recompute through the checked path to report the offending location
        temperature_ratio(thn, steady.theta_hat.values)
    if max_div > 10.0 * ctrl.projection_tol:
        raise SolverError(f"projection left divergence {max_div:.3e}")

    new = PerturbationState(
        t=state.t + dt,
        v_tilde=VectorField(g, un, vn),
        theta_tilde=ScalarField(g, thn),
        p_tilde=ScalarField(g, p),
        ddot=ScalarField(g, ddot),
        max_abs_div=max_div,
    )
    return new


def kinetic_energy(state: PerturbationState, mat: Material) -> float:
    """(rho/2) integral of |v|^2, with face-to-center averaged squares."""
    g = state.grid
    sq = speed_sq_arrays(state.v_tilde.u, state.v_tilde.v)
    return 0.5 * mat.rho * float(np.sum(sq)) * g.cell_area


def dissipation(state: PerturbationState, mat: Material) -> float:
    """Integral of 2 mu D:D over the domain."""
    state.with_ddot()
    return 2.0 * mat.mu * float(np.sum(state.ddot.values)) * state.grid.cell_area


def cell_reynolds(state: PerturbationState, mat: Material) -> float:
    g = state.grid
    return state.v_tilde.max_abs() * max(g.hx, g.hy) / mat.nu


def run(
    grid: Grid,
    mat: Material,
    steady: SteadyState,
    state0: PerturbationState,
    ctrl: StepControl,
    pair,
    l_exponents=(3,),
    t_end: float = 1.0,
    sample_interval: float = 0.1,
    fast: bool | None = None,
):
    """Integrate to t_end, sampling every functional each sample_interval.

    Returns (FunctionalTrace, final_state).  Deterministic for a fixed
    initial state; all randomness lives in the initial-data construction.
    The time integrals of the decaying functional and its source are
    accumulated every step (trapezoid at dt resolution) so integral-based
    hypothesis checks do not suffer the sampling resolution.
    """
    if t_end <= 0.0 or sample_interval <= 0.0:
        raise ValueError("t_end and sample_interval must be positive")
    n_samples = int(round(t_end / sample_interval))
    if abs(n_samples * sample_interval - t_end) > 1e-9 * t_end or n_samples < 1:
        raise ValueError("t_end must be an integer multiple of sample_interval")

    re_cell = cell_reynolds(state0, mat)
    if re_cell > 2.0:
        warnings.warn(
            f"cell Reynolds number {re_cell:.2f} exceeds 2; centered advection may "
            "be under-resolved, consider refining the grid",
            RuntimeWarning,
            stacklevel=2,
        )

    state = state0.with_ddot()
    samples = [functionals.sample_state(state, steady, mat, pair, l_exponents)]
    y_prev, h_prev = functionals.y_h_fast(state, steady, mat, pair)
    int_y = 0.0
    int_h = 0.0
    int_y_at_samples = [0.0]
    int_h_at_samples = [0.0]
    for k in range(1, n_samples + 1):
        target = k * sample_interval
        while state.t < target - 1e-12 * target:
            dt = stable_dt(state, steady, mat, ctrl)
            remaining = target - state.t
            if dt >= remaining:
                dt = remaining
            state = step(state, steady, mat, ctrl, dt, fast=fast)
            y_new, h_new = functionals.y_h_fast(state, steady, mat, pair)
            int_y += 0.5 * dt * (y_prev + y_new)
            int_h += 0.5 * dt * (h_prev + h_new)
            y_prev, h_prev = y_new, h_new
        samples.append(functionals.sample_state(state, steady, mat, pair, l_exponents))
        int_y_at_samples.append(int_y)
        int_h_at_samples.append(int_h)

    trace = functionals.FunctionalTrace.from_samples(
        samples,
        pair=pair,
        k_mn=functionals.k_mn(steady, mat, pair),
        extra={"int_y_dt": int_y_at_samples, "int_h_dt": int_h_at_samples},
        metadata={
            "initial_cell_reynolds": re_cell,
            "sample_interval": sample_interval,
            "l_exponents": list(l_exponents),
            "rho_cv": mat.rho * mat.cv_ref,
            "k_mn_convention": (
                "rate against the functional in joules; the theta_hat-weighted "
                "integral convention multiplies by rho*cv_ref"
            ),
        },
    )
    return trace, state
