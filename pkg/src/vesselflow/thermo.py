"""Material constants and thermodynamic potentials of the incompressible fluid.

Two temperature scales appear throughout: the absolute scale theta and the
reparametrized scale vartheta / vartheta_ref = (theta / theta_ref)^(1-m) for
an exponent m in (0, 1).  On the alternative scale the fluid behaves as if it
had temperature-dependent conductivity and specific heat; the corresponding
potentials are implemented here and cross-checked against their defining
identities in the test suite.

Power expressions of the form (1+x)^m - 1 are evaluated as
expm1(m * log1p(x)) so they stay accurate for m near zero and x near zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PositivityError

#: Lower floor on the temperature ratio 1 + theta_tilde / theta_hat.  The
#: continuum theory guarantees positivity; dropping below the floor at run
#: time signals an invalid discretization, never data to repair.
POSITIVITY_FLOOR = 1e-10


@dataclass(frozen=True)
class Material:
    """Constant positive coefficients of the Navier-Stokes-Fourier fluid."""

    rho: float  # density, kg/m^3
    mu: float  # dynamic viscosity, Pa s
    cv_ref: float  # specific heat at constant volume, J/(kg K)
    kappa_ref: float  # thermal conductivity, W/(m K)
    theta_ref: float  # reference temperature, K
    vartheta_ref: float | None = None  # reference for the alternative scale

    def __post_init__(self):
        if self.vartheta_ref is None:
            object.__setattr__(self, "vartheta_ref", self.theta_ref)
        for name in ("rho", "mu", "cv_ref", "kappa_ref", "theta_ref", "vartheta_ref"):
            value = getattr(self, name)
            if not (value > 0.0 and np.isfinite(value)):
                raise ValueError(f"material parameter {name} must be positive, got {value}")

    @property
    def nu(self) -> float:
        """Kinematic viscosity, m^2/s."""
        return self.mu / self.rho

    @property
    def thermal_diffusivity(self) -> float:
        return self.kappa_ref / (self.rho * self.cv_ref)


@dataclass(frozen=True)
class ExponentPair:
    """Exponents (m, n) with 0 < m < n < 1 and m > n/2."""

    m: float
    n: float

    def __post_init__(self):
        m, n = self.m, self.n
        if not (0.0 < m < 1.0 and 0.0 < n < 1.0):
            raise ValueError(f"exponents must lie in (0, 1), got m={m}, n={n}")
        if not n > m:
            raise ValueError(f"n > m violated (m={m}, n={n})")
        if not m > n / 2.0:
            raise ValueError(f"m > n/2 violated (m={m}, n/2={n / 2.0})")


def _require_positive_temperature(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or not np.all(np.isfinite(theta)):
        raise ValueError("temperature must be positive and finite")
    return theta


def _require_m(m):
    if not 0.0 < m < 1.0:
        raise ValueError(f"exponent m must lie in (0, 1), got {m}")
    return float(m)


def helmholtz(theta, mat: Material):
    """Specific Helmholtz free energy, -cv theta (ln(theta/theta_ref) - 1)."""
    theta = _require_positive_temperature(theta)
    return -mat.cv_ref * theta * (np.log(theta / mat.theta_ref) - 1.0)


def entropy(theta, mat: Material):
    """Specific entropy cv ln(theta/theta_ref)."""
    theta = _require_positive_temperature(theta)
    return mat.cv_ref * np.log(theta / mat.theta_ref)


def internal_energy(theta, mat: Material):
    """Specific internal energy cv theta."""
    theta = _require_positive_temperature(theta)
    return mat.cv_ref * theta


def temperature_ratio(theta_tilde, theta_hat, floor: float = POSITIVITY_FLOOR):
    """Return 1 + theta_tilde/theta_hat, raising if it reaches the floor."""
    ratio = 1.0 + np.asarray(theta_tilde, dtype=float) / np.asarray(theta_hat, dtype=float)
    if np.any(ratio <= floor) or not np.all(np.isfinite(ratio)):
        flat = int(np.argmin(ratio))
        idx = np.unravel_index(flat, ratio.shape) if ratio.ndim else ()
        raise PositivityError(
            f"temperature ratio reached {float(np.min(ratio)):.3e} at index {idx}",
            location=idx,
            value=float(np.min(ratio)),
        )
    return ratio


def relative_entropy(theta_tilde, theta_hat, mat: Material, floor: float = POSITIVITY_FLOOR):
    """Entropy difference between the perturbed and steady states per cell.

    s_diff = cv ln(1 + theta_tilde / theta_hat).
    """
    ratio = temperature_ratio(theta_tilde, theta_hat, floor)
    return mat.cv_ref * np.log(ratio)


def alt_scale(theta, m: float, mat: Material):
    """Map absolute temperature to the alternative scale."""
    theta = _require_positive_temperature(theta)
    m = _require_m(m)
    return mat.vartheta_ref * (theta / mat.theta_ref) ** (1.0 - m)


def alt_scale_inverse(vartheta, m: float, mat: Material):
    """Exact inverse of alt_scale."""
    vartheta = _require_positive_temperature(vartheta)
    m = _require_m(m)
    return mat.theta_ref * (vartheta / mat.vartheta_ref) ** (1.0 / (1.0 - m))


def alt_kappa(vartheta, m: float, mat: Material):
    """Effective conductivity on the alternative scale."""
    vartheta = _require_positive_temperature(vartheta)
    m = _require_m(m)
    pref = mat.kappa_ref / (1.0 - m) * (mat.theta_ref / mat.vartheta_ref)
    return pref * (vartheta / mat.vartheta_ref) ** (m / (1.0 - m))


def alt_cv(vartheta, m: float, mat: Material):
    """Effective specific heat on the alternative scale."""
    vartheta = _require_positive_temperature(vartheta)
    m = _require_m(m)
    pref = mat.cv_ref / (1.0 - m) * (mat.theta_ref / mat.vartheta_ref)
    return pref * (vartheta / mat.vartheta_ref) ** (m / (1.0 - m))


def alt_helmholtz(vartheta, m: float, mat: Material):
    """Free energy on the alternative scale.

    The two integration constants are fixed so that the entropy vanishes at
    vartheta_ref and the internal energy equals cv theta on the original
    scale; any other choice shifts the potential without changing observables.
    """
    vartheta = _require_positive_temperature(vartheta)
    m = _require_m(m)
    pref = mat.cv_ref * mat.vartheta_ref * (mat.theta_ref / mat.vartheta_ref) / m
    r = vartheta / mat.vartheta_ref
    return -pref * ((1.0 - m) * r ** (1.0 / (1.0 - m)) - r)


def alt_entropy(vartheta, m: float, mat: Material):
    vartheta = _require_positive_temperature(vartheta)
    m = _require_m(m)
    pref = mat.cv_ref * (mat.theta_ref / mat.vartheta_ref) / m
    return pref * ((vartheta / mat.vartheta_ref) ** (m / (1.0 - m)) - 1.0)


def alt_internal_energy(vartheta, m: float, mat: Material):
    vartheta = _require_positive_temperature(vartheta)
    m = _require_m(m)
    pref = mat.cv_ref * mat.vartheta_ref * (mat.theta_ref / mat.vartheta_ref)
    return pref * (vartheta / mat.vartheta_ref) ** (1.0 / (1.0 - m))


# ---------------------------------------------------------------------------
# stable pointwise building blocks shared by the functional evaluators
# ---------------------------------------------------------------------------


def powm1(x, p):
    """(1 + x)^p - 1, accurate for small p and small x."""
    return np.expm1(p * np.log1p(x))


def d_th(x, m: float):
    """(1 + x)^(m/2) - 1, the gradient variable of the power functionals."""
    return np.expm1(0.5 * m * np.log1p(x))


def v_th_log(x):
    """x - ln(1 + x), the log-functional thermal integrand (nonnegative)."""
    return x - np.log1p(x)


def v_th_power(x, m: float):
    """x - ((1 + x)^m - 1)/m, the power-functional thermal integrand."""
    return x - powm1(x, m) / m


def y_integrand(x, m: float, n: float):
    """(1+x)^n/n - (1+x)^m/m + (n-m)/(mn), written in a cancellation-free form."""
    lx = np.log1p(x)
    return np.expm1(n * lx) / n - np.expm1(m * lx) / m
