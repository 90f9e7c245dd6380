"""Run configuration: JSON schema, defaults, and validation.

A config is plain JSON with the sections below; unknown keys anywhere are
rejected so typos fail loudly.  Everything except the grid and boundary
sections has documented defaults (water-like material, the standard exponent
pair, the default initial perturbation).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .evolution import InitialPerturbation, StepControl, stream_mode_amplitude
from .grid import Grid
from .steady import BoundaryProfile
from .thermo import ExponentPair, Material

DEFAULT_MATERIAL = {
    "rho": 1000.0,
    "mu": 1e-3,
    "cv_ref": 4180.0,
    "kappa_ref": 0.6,
    "theta_ref": 300.0,
}


@dataclass
class RunConfig:
    grid: Grid
    material: Material
    boundary: BoundaryProfile
    initial: InitialPerturbation
    pair: ExponentPair
    l_exponents: tuple
    t_end: float
    sample_interval: float
    control: StepControl
    steady_tol: float = 1e-10
    seed: int = 0
    out_dir: str | None = None
    label: str = "run"

    def __post_init__(self):
        if self.t_end <= 0.0 or self.sample_interval <= 0.0:
            raise ConfigError("t_end and sample_interval must be positive")
        n = round(self.t_end / self.sample_interval)
        if n < 2 or abs(n * self.sample_interval - self.t_end) > 1e-9 * self.t_end:
            raise ConfigError("t_end must be a multiple (>= 2) of sample_interval")
        if not (0.0 < self.steady_tol <= 1e-4):
            raise ConfigError("steady_tol must lie in (0, 1e-4]")
        for l in self.l_exponents:
            if int(l) != l or l < 3:
                raise ConfigError(f"relative-entropy exponents must be integers >= 3, got {l}")


def _take(section: dict, allowed: dict, where: str) -> dict:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    merged = dict(allowed)
    merged.update(section)
    missing = [k for k, v in merged.items() if v is _REQUIRED]
    if missing:
        raise ConfigError(f"missing required key(s) {missing} in {where}")
    return merged


_REQUIRED = object()


def _build_boundary(section: dict) -> BoundaryProfile:
    spec = _take(section, {"preset": _REQUIRED, "params": {}}, "boundary")
    preset = spec["preset"]
    params = dict(spec["params"])
    try:
        if preset == "constant":
            return BoundaryProfile.constant(**_take(params, {"value": _REQUIRED}, "boundary.params"))
        if preset == "linear_x":
            return BoundaryProfile.linear_x(
                **_take(params, {"base": _REQUIRED, "delta": _REQUIRED}, "boundary.params")
            )
        if preset == "sin_arc":
            return BoundaryProfile.sin_arc(
                **_take(
                    params,
                    {"base": _REQUIRED, "amplitude": _REQUIRED, "cycles": 0.5},
                    "boundary.params",
                )
            )
        if preset == "two_wall":
            return BoundaryProfile.two_wall(
                **_take(params, {"hot": _REQUIRED, "cold": _REQUIRED}, "boundary.params")
            )
        if preset == "tabulated":
            return BoundaryProfile.tabulated(
                **_take(
                    params,
                    {
                        "left": _REQUIRED,
                        "right": _REQUIRED,
                        "bottom": _REQUIRED,
                        "top": _REQUIRED,
                    },
                    "boundary.params",
                )
            )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid boundary parameters: {exc}") from exc
    raise ConfigError(f"unknown boundary preset {preset!r}")


def _build_initial(section: dict, grid: Grid, seed: int) -> InitialPerturbation:
    spec = _take(
        section,
        {"stream_modes": [], "peak_speed": None, "bump": None, "random_theta": None},
        "initial",
    )
    modes = []
    for entry in spec["stream_modes"]:
        if len(entry) != 3:
            raise ConfigError("stream_modes entries must be [k, l, amplitude]")
        k, l, amp = entry
        modes.append((int(k), int(l), float(amp)))
    if spec["peak_speed"] is not None:
        if len(modes) != 1:
            raise ConfigError("peak_speed rescaling needs exactly one stream mode")
        k, l, _ = modes[0]
        modes = [(k, l, stream_mode_amplitude(grid, k, l, float(spec["peak_speed"])))]
    bump = None
    if spec["bump"] is not None:
        b = _take(
            dict(spec["bump"]),
            {"center": _REQUIRED, "width": _REQUIRED, "amplitude": _REQUIRED},
            "initial.bump",
        )
        cx, cy = b["center"]
        bump = (float(cx), float(cy), float(b["width"]), float(b["amplitude"]))
    random_theta = None
    if spec["random_theta"] is not None:
        r = _take(
            dict(spec["random_theta"]),
            {"max_mode": 6, "amplitude": _REQUIRED},
            "initial.random_theta",
        )
        random_theta = (int(r["max_mode"]), float(r["amplitude"]))
    return InitialPerturbation(
        stream_modes=tuple(modes), bump=bump, random_theta=random_theta, seed=seed
    )


def from_dict(raw: dict) -> RunConfig:
    """Validate a raw JSON document and build the run configuration."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a JSON object")
    top = _take(
        raw,
        {
            "grid": _REQUIRED,
            "material": {},
            "boundary": _REQUIRED,
            "initial": {},
            "exponents": {},
            "l_exponents": [3],
            "t_end": 10.0,
            "sample_interval": 0.5,
            "control": {},
            "steady_tol": 1e-10,
            "seed": 0,
            "label": "run",
        },
        "config",
    )

    g = _take(
        dict(top["grid"]),
        {"nx": _REQUIRED, "ny": _REQUIRED, "Lx": 1.0, "Ly": 1.0},
        "grid",
    )
    try:
        grid = Grid(nx=int(g["nx"]), ny=int(g["ny"]), Lx=float(g["Lx"]), Ly=float(g["Ly"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    mat_spec = _take(dict(top["material"]), {**DEFAULT_MATERIAL, "vartheta_ref": None}, "material")
    try:
        material = Material(**{k: (float(v) if v is not None else None) for k, v in mat_spec.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    boundary = _build_boundary(dict(top["boundary"]))
    try:
        boundary.evaluate(grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    exps = _take(dict(top["exponents"]), {"m": 0.6, "n": 0.9}, "exponents")
    try:
        pair = ExponentPair(m=float(exps["m"]), n=float(exps["n"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    ctrl_spec = _take(
        dict(top["control"]),
        {"cfl_safety": 0.4, "dt_max": 1.0, "projection_tol": 1e-10},
        "control",
    )
    try:
        control = StepControl(
            cfl_safety=float(ctrl_spec["cfl_safety"]),
            dt_max=float(ctrl_spec["dt_max"]),
            projection_tol=float(ctrl_spec["projection_tol"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    seed = int(top["seed"])
    initial = _build_initial(dict(top["initial"]), grid, seed)

    return RunConfig(
        grid=grid,
        material=material,
        boundary=boundary,
        initial=initial,
        pair=pair,
        l_exponents=tuple(int(l) for l in top["l_exponents"]),
        t_end=float(top["t_end"]),
        sample_interval=float(top["sample_interval"]),
        control=control,
        steady_tol=float(top["steady_tol"]),
        seed=seed,
        label=str(top["label"]),
    )


def parse_config(source) -> RunConfig:
    """Load a RunConfig from a path, file object, or JSON string."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        path = Path(source)
        if path.exists():
            text = path.read_text()
        else:
            raise ConfigError(f"config file not found: {source}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return from_dict(raw)


def default_scenario(**overrides) -> RunConfig:
    """The workhorse scenario: unit square, 64x64, water-like material with
    viscosity and conductivity inflated so the decay time scales are desk
    scale, a single circulation mode at 0.05 m/s peak, and a +30 K Gaussian
    bump on a 300..320 K sinusoidal wall profile.

    t_end spans roughly seven e-folds of the decaying functional so every
    trace-based check (decay ratios, integral plateaus) resolves cleanly.
    """
    raw = {
        "grid": {"nx": 64, "ny": 64, "Lx": 1.0, "Ly": 1.0},
        "material": {"mu": 0.1, "kappa_ref": 60.0},
        "boundary": {"preset": "sin_arc", "params": {"base": 300.0, "amplitude": 20.0}},
        "initial": {
            "stream_modes": [[1, 1, 0.0]],
            "peak_speed": 0.05,
            "bump": {"center": [0.5, 0.5], "width": 0.1, "amplitude": 30.0},
        },
        "exponents": {"m": 0.6, "n": 0.9},
        "l_exponents": [3, 4],
        "t_end": 14000.0,
        "sample_interval": 28.0,
        "seed": 20240501,
        "label": "default",
    }
    raw.update(overrides)
    return from_dict(raw)
