"""Scalar analysis toolkit: the auxiliary inequalities behind the decay
theorem and a sampled-trajectory checker for the integrable-decay lemma.

All power expressions are evaluated through expm1/log1p so the functions stay
accurate near the singular end x -> -1 and for exponents near zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverError


def _check_pair_loose(m: float, n: float):
    if not (0.0 < m < 1.0 and 0.0 < n < 1.0 and n > m):
        raise ValueError(f"need 0 < m < n < 1, got m={m}, n={n}")


def _check_pair_strict(m: float, n: float):
    _check_pair_loose(m, n)
    if not m > n / 2.0:
        raise ValueError(f"need m > n/2, got m={m}, n/2={n / 2.0}")


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= -1.0):
        raise ValueError("arguments must satisfy x > -1")
    return x


def f_exp(u, m: float, n: float):
    """exp(n u)/n - exp(m u)/m + (n-m)/(mn), cancellation-free."""
    u = np.asarray(u, dtype=float)
    return np.expm1(n * u) / n - np.expm1(m * u) / m


def f_lemma6(x, m: float, n: float):
    """(1+x)^n/n - (1+x)^m/m + (n-m)/(mn); nonnegative, zero only at x=0."""
    _check_pair_loose(m, n)
    return f_exp(np.log1p(_check_domain(x)), m, n)


def g_lemma7(x, m: float, n: float):
    """Nonpositive comparison function whose sign encodes the pointwise
    inequality between the squared gradient variables and the decaying
    integrand; requires n > m > n/2."""
    _check_pair_strict(m, n)
    lx = np.log1p(_check_domain(x))
    dm = np.expm1(0.5 * m * lx)
    dn = np.expm1(0.5 * n * lx)
    return -(dm * dm + dn * dn) + n * f_exp(lx, m, n)


def _bisect(fn, lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise SolverError(f"bisection bracket [{lo}, {hi}] has no sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0 or (hi - lo) < tol:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def xcrit_eq125() -> float:
    """Positive crossing point of (ln(1+x))^2 = x - ln(1+x).

    Below the root the squared logarithm is dominated by x - ln(1+x); above
    it the inequality fails.  Found by bisection on [1, 10] to 1e-10.
    """
    def fn(x):
        lx = math.log1p(x)
        return lx * lx - (x - lx)

    return _bisect(fn, 1.0, 10.0, 1e-10)


@dataclass(frozen=True)
class Lemma9Result:
    """Polynomial lower-bound constant for the exponential comparison function.

    x_int is the negative intersection of smallest magnitude between the
    polynomial envelope and the comparison function; branch records whether
    the direct series constant applied (x_int <= x_crit) or the envelope had
    to be flattened.  Construction verifies |x|^l / L <= f(x) on a dense
    sample of [x_crit, x_max].
    """

    x_int: float
    inv_L: float
    branch: str
    m: float
    n: float
    l: int
    x_crit: float

    def __post_init__(self):
        if not self.inv_L > 0.0:
            raise ValueError("1/L must be positive")
        if not self.x_int < 0.0:
            raise ValueError("the intersection point must be negative")


def lemma9_constant(
    m: float, n: float, l: int, x_crit: float, x_max: float = 50.0
) -> Lemma9Result:
    """Constant 1/L with |x|^l / L <= exp(nx)/n - exp(mx)/m + (n-m)/(mn) on
    [x_crit, +inf).

    The envelope h(x) = (n^(l-1) - m^(l-1))/l! |x|^l bounds f for x >= 0 by
    the series expansion; scanning from zero toward x_crit locates the first
    negative intersection x_int.  If x_int <= x_crit the series constant is
    already valid; otherwise the envelope is flattened to pass through
    (x_int, f(x_int)) rescaled at x_crit, giving 1/L = f(x_int)/|x_crit|^l.
    """
    _check_pair_strict(m, n)
    if not (isinstance(l, (int, np.integer)) and l >= 3):
        raise ValueError(f"l must be an integer >= 3, got {l}")
    if not x_crit < 0.0:
        raise ValueError(f"x_crit must be negative, got {x_crit}")

    c = (n ** (l - 1) - m ** (l - 1)) / math.factorial(l)

    def diff(x):
        return float(f_exp(x, m, n)) - c * abs(x) ** l

    # f is bounded for x -> -inf while the envelope grows, so the scan range
    # ((f_inf / c)^(1/l) padded) always brackets the intersection
    f_inf = (n - m) / (m * n)
    scan_lo = -1.5 * ((f_inf / c) ** (1.0 / l) + 1.0)
    xs = np.linspace(0.0, scan_lo, 1000)
    values = f_exp(xs, m, n) - c * np.abs(xs) ** l
    sign_change = np.nonzero((values[:-1] > 0.0) & (values[1:] <= 0.0))[0]
    if sign_change.size == 0:
        raise SolverError(
            f"no envelope intersection found scanning [{scan_lo}, 0]",
            residual_history=values[-5:].tolist(),
        )
    i = int(sign_change[0])
    x_int = _bisect(diff, float(xs[i]), float(xs[i + 1]), 1e-13)

    if x_int <= x_crit:
        inv_l = c
        branch = "direct"
    else:
        inv_l = float(f_exp(x_int, m, n)) / abs(x_crit) ** l
        branch = "flattened"

    sample = np.linspace(x_crit, x_max, 10000)
    gap = f_exp(sample, m, n) - inv_l * np.abs(sample) ** l
    worst = float(np.min(gap))
    if worst < -1e-12 * max(1.0, float(np.max(np.abs(gap)))):
        raise SolverError(f"lemma constant failed verification, worst gap {worst:.3e}")

    return Lemma9Result(
        x_int=x_int, inv_L=inv_l, branch=branch, m=m, n=n, l=int(l), x_crit=x_crit
    )


def lemma1_check(
    t,
    y,
    h,
    f,
    plateau_tol: float = 1e-3,
    violation_tol: float = 1e-3,
    int_fy=None,
    int_h=None,
) -> dict:
    """Diagnose the hypotheses and conclusion of the integrable-decay lemma on
    sampled trajectories.

    Checks (a) plateauing of the partial sums of y and h over the final tenth
    of the window, (b) the two-time inequality
    y(t) - y(s) <= int_s^t f(y) + int_s^t h over every ordered sample pair,
    and (c) the tail statistic max y over the final tenth.  Reports only.

    int_fy and int_h optionally supply externally accumulated partial sums of
    f(y) and h at the sample times (e.g. stepped at integrator resolution);
    otherwise trapezoid sums on the sample grid are used, whose quadrature
    error bounds what the pairwise check can certify.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    if t.ndim != 1 or t.shape != y.shape or t.shape != h.shape:
        raise ValueError("t, y, h must be equal-length 1-d arrays")
    if len(t) < 5:
        raise ValueError("need at least five samples")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(dt[0], 1e-300):
        raise ValueError("samples must lie on a uniform time grid")
    if np.any(y < 0.0) or np.any(h < 0.0):
        raise ValueError("y and h must be nonnegative")

    def partial_sums(values):
        out = np.zeros(len(values))
        out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1]) * dt)
        return out

    def tail_growth(sums):
        i = max(1, int(0.9 * (len(sums) - 1)))
        total = sums[-1]
        if total <= 0.0:
            return 0.0
        return float((sums[-1] - sums[i]) / total)

    sy = partial_sums(y)
    sh = partial_sums(h) if int_h is None else np.asarray(int_h, dtype=float)
    growth_y = tail_growth(sy)
    growth_h = tail_growth(sh)

    fy = np.asarray([f(v) for v in y], dtype=float)
    if np.any(fy < 0.0):
        raise ValueError("f must map nonnegative values to nonnegative values")
    sfy = partial_sums(fy) if int_fy is None else np.asarray(int_fy, dtype=float)
    z = y - sfy - sh
    # the pairwise inequality holds iff z is non-increasing
    running_min = np.minimum.accumulate(z)
    violations = z[1:] - running_min[:-1]
    scale = max(float(np.max(y)), 1e-300)
    max_violation = float(np.max(violations)) / scale

    n_tail = max(1, len(y) // 10)
    tail_max = float(np.max(y[-n_tail:]))
    y0 = float(y[0])
    return {
        "integral_y": float(sy[-1]),
        "integral_h": float(sh[-1]),
        "partial_sums_y": sy,
        "partial_sums_h": sh,
        "tail_growth_y": growth_y,
        "tail_growth_h": growth_h,
        "hypothesis_y_integrable": growth_y < plateau_tol,
        "hypothesis_h_integrable": growth_h < plateau_tol,
        "max_violation": max_violation,
        "hypothesis_two_time_inequality": max_violation <= violation_tol,
        "tail_max": tail_max,
        "tail_ratio": tail_max / y0 if y0 > 0.0 else 0.0,
    }
