"""Run configuration: TOML files layered over built-in defaults.

A configuration is a nested dict. Every leaf has a default in
:data:`DEFAULTS`; user files may only set known keys, so a typo fails
loudly with the list of valid paths. :func:`build` turns a validated
dict into the typed objects the library works with.
"""

import copy
import hashlib
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .constitutive import GelParams, KelvinChainParams, MazarsParams
from .errors import ConfigurationError
from .meshgen import AGGREGATE, GEL, PASTE
from .mesogen import SieveCurve
from .solver import (
    KELVIN,
    BoundaryCondition,
    Materials,
    SolverConfig,
    TemperatureSchedule,
    minimal_restraint,
    symmetry_restraint,
)

AUTO = "auto"

DEFAULTS = {
    "scenario": {
        "name": "asr-free",
        "kind": "free-expansion",     # or "creep"
        "restraint": "free",          # or "minimal" (3-2-1 pins), "symmetry"
        "traction_z": 0.0,            # Pa on the z = max face
        "damage": True,
        "creep": True,
    },
    "geometry": {
        "box": [70.0, 70.0, 140.0],   # mm
        "h": 2.0,                     # mm
        "seed": 1,
        "aggregates": True,           # false: homogeneous paste, no gel
        "clearance": 0.0,             # mm between sphere surfaces
        "max_rejects": 100_000,
        "structure_file": "",
        "sieve": {"d_min": 4.0, "d_max": 20.0, "n_f": 0.5, "v_agg": 0.40},
        "gel": {"ratio": 0.025, "seed": -1},   # -1: reuse geometry.seed
    },
    "materials": {
        "paste": {
            "E": 20e9, "nu": 0.2, "k0": 2e-4, "A_t": 0.65, "B_t": 3100.0,
            "A_c": 1.0, "B_c": 2300.0, "G_f": 60.0, "eps_ult": AUTO,
            "chain": {
                "E0": 20e9,
                "units": [[12e9, 5.0], [8e9, 50.0], [0.7e9, 300.0]],
                "alpha": 0.001,
                "age_offset": 28.0,
            },
        },
        "aggregate": {
            "E": 60e9, "nu": 0.2, "k0": 1.67e-4, "A_t": 0.65, "B_t": 3550.0,
            "A_c": 1.2, "B_c": 1800.0, "G_f": 150.0, "eps_ult": AUTO,
        },
        "gel": {"E_gel": 10e9, "nu_gel": 0.2},
    },
    "kinetics": {
        "K": 2500.0, "C": 50e-5, "E_a": 43500.0, "R": 8.1344,
        "temperature_C": 30.0,
        "temperature_schedule": [],   # [[t_start_days, celsius], ...] overrides temperature_C
    },
    "solver": {
        "T_real": 450.0,              # days
        "n_steps": 8000,
        "T_sim": 0.0,                 # s; used when n_steps == 0
        "dt": AUTO,
        "safety": 0.8,
        "density": {"paste": 2400.0, "aggregate": 2400.0, "gel": 2400.0},
        "damping": AUTO,
        "damping_ratio": 0.25,
        "mass_scaling": 1.0,
        "residual_stiffness": 1e-6,
        "preload_ramp": 0.02,
        "preload_hold": 0.02,
    },
    "output": {
        "dir": "",
        "record_every": 0,            # steps; 0 -> n_steps // 500
        "damage_threshold": 0.05,
        "snapshots": 0,               # VTK files over the timed phase
        "progress_every": 0,          # records between progress lines; 0 = quiet
    },
}


def _leaf_paths(d, prefix=""):
    for k, v in d.items():
        p = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _leaf_paths(v, p + ".")
        else:
            yield p


def valid_paths():
    return sorted(_leaf_paths(DEFAULTS))


def _merge(base, user, prefix=""):
    for k, v in user.items():
        path = f"{prefix}{k}"
        if k not in base:
            raise ConfigurationError(
                f"unknown configuration key {path!r}; valid keys here: "
                f"{', '.join(sorted(base))}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigurationError(f"{path!r} must be a table")
            _merge(base[k], v, path + ".")
        else:
            base[k] = v


def from_dict(user):
    cfg = copy.deepcopy(DEFAULTS)
    _merge(cfg, user)
    return cfg


def load(path):
    """Read a TOML file over the defaults. Parse errors name the file and line."""
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"configuration file not found: {p}")
    try:
        with open(p, "rb") as fh:
            user = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{p}: {exc}") from exc
    try:
        return from_dict(user)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{p}: {exc}") from exc


def preset_names():
    root = resources.files("asrmeso") / "presets"
    return sorted(f.name[:-5] for f in root.iterdir() if f.name.endswith(".toml"))


def preset_path(name):
    root = resources.files("asrmeso") / "presets"
    f = root / f"{name}.toml"
    if not f.is_file():
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return Path(str(f))


def load_preset(name):
    return load(preset_path(name))


def get(cfg, path):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigurationError(
                f"unknown parameter path {path!r}; valid paths: {', '.join(valid_paths())}")
        node = node[part]
    return node


def set_path(cfg, path, value):
    """Return a copy of ``cfg`` with the leaf at dotted ``path`` replaced."""
    get(cfg, path)
    if isinstance(get(cfg, path), dict):
        raise ConfigurationError(f"{path!r} is a table, not a parameter")
    out = copy.deepcopy(cfg)
    node = out
    parts = path.split(".")
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value
    return out


def parse_value(text):
    """Interpret a command-line value as TOML, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


# -- typed views -------------------------------------------------------------

@dataclass
class Resolved:
    """Typed objects built from a configuration dict."""

    cfg: dict
    curve: SieveCurve
    box: tuple
    h: float
    seed: int
    aggregates: bool
    gel_seed: int
    gel_ratio: float
    materials: Materials
    solver: SolverConfig
    bcs: list


def _field(cfg, path, kind=float):
    v = get(cfg, path)
    try:
        if kind is bool:
            if not isinstance(v, bool):
                raise TypeError
            return v
        if kind is int:
            if isinstance(v, bool) or int(v) != v:
                raise TypeError
            return int(v)
        return kind(v)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{path}: expected {kind.__name__}, got {v!r}") from None


def _mazars(cfg, phase):
    base = f"materials.{phase}"
    eps_ult = get(cfg, f"{base}.eps_ult")
    if eps_ult != AUTO:
        eps_ult = _field(cfg, f"{base}.eps_ult")
    try:
        return MazarsParams(
            E=_field(cfg, f"{base}.E"), nu=_field(cfg, f"{base}.nu"), k0=_field(cfg, f"{base}.k0"),
            A_t=_field(cfg, f"{base}.A_t"), B_t=_field(cfg, f"{base}.B_t"),
            A_c=_field(cfg, f"{base}.A_c"), B_c=_field(cfg, f"{base}.B_c"),
            G_f=_field(cfg, f"{base}.G_f"), eps_ult=None if eps_ult == AUTO else eps_ult)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{base}: {exc}") from None


def build(cfg):
    """Validate ``cfg`` and return a :class:`Resolved` bundle."""
    box = get(cfg, "geometry.box")
    if not (isinstance(box, list) and len(box) == 3):
        raise ConfigurationError("geometry.box: expected three lengths in mm")
    box = tuple(float(b) for b in box)
    try:
        curve = SieveCurve.from_target_fraction(
            _field(cfg, "geometry.sieve.d_min"), _field(cfg, "geometry.sieve.d_max"),
            _field(cfg, "geometry.sieve.n_f"), _field(cfg, "geometry.sieve.v_agg"))
    except ConfigurationError as exc:
        raise ConfigurationError(f"geometry.sieve: {exc}") from None
    seed = _field(cfg, "geometry.seed", int)
    gel_seed = _field(cfg, "geometry.gel.seed", int)
    gel_seed = seed if gel_seed < 0 else gel_seed
    gel_ratio = _field(cfg, "geometry.gel.ratio")
    if not 0 <= gel_ratio < 1:
        raise ConfigurationError("geometry.gel.ratio must lie in [0, 1)")

    creep = _field(cfg, "scenario.creep", bool)
    ch = "materials.paste.chain"
    units = get(cfg, f"{ch}.units")
    try:
        chain = KelvinChainParams(
            E0=_field(cfg, f"{ch}.E0"), units=tuple(tuple(u) for u in units),
            alpha=_field(cfg, f"{ch}.alpha"), nu=_field(cfg, "materials.paste.nu"),
            age_offset=_field(cfg, f"{ch}.age_offset"))
    except (ConfigurationError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"{ch}: {exc}") from None
    try:
        gel = GelParams(E_gel=_field(cfg, "materials.gel.E_gel"), nu_gel=_field(cfg, "materials.gel.nu_gel"),
                        K=_field(cfg, "kinetics.K"), C=_field(cfg, "kinetics.C"),
                        E_a=_field(cfg, "kinetics.E_a"), R=_field(cfg, "kinetics.R"))
    except ConfigurationError as exc:
        raise ConfigurationError(f"kinetics/materials.gel: {exc}") from None
    materials = Materials(paste=_mazars(cfg, "paste"), aggregate=_mazars(cfg, "aggregate"),
                          gel=gel, chain=chain if creep else None,
                          damage=_field(cfg, "scenario.damage", bool), creep=creep)
    if creep and abs(chain.E0 - materials.paste.E) > 1e-9 * chain.E0:
        raise ConfigurationError("materials.paste.E must equal materials.paste.chain.E0")

    sched = get(cfg, "kinetics.temperature_schedule")
    if sched:
        temperature = TemperatureSchedule(tuple((float(t), float(T) + KELVIN) for t, T in sched))
    else:
        temperature = TemperatureSchedule.constant_celsius(_field(cfg, "kinetics.temperature_C"))

    dens = get(cfg, "solver.density")
    densities = {PASTE: float(dens["paste"]), AGGREGATE: float(dens["aggregate"]), GEL: float(dens["gel"])}
    n_steps = _field(cfg, "solver.n_steps", int)
    dt = get(cfg, "solver.dt")
    damping = get(cfg, "solver.damping")
    restraint = get(cfg, "scenario.restraint")
    solver = SolverConfig(
        T_real=_field(cfg, "solver.T_real"),
        n_steps=n_steps if n_steps > 0 else None,
        T_sim=_field(cfg, "solver.T_sim") or None,
        dt=dt if dt == AUTO else _field(cfg, "solver.dt"),
        safety=_field(cfg, "solver.safety"),
        densities=densities,
        damping=damping if damping == AUTO else _field(cfg, "solver.damping"),
        damping_ratio=_field(cfg, "solver.damping_ratio"),
        remove_rigid_modes=restraint == "free",
        mass_scaling=_field(cfg, "solver.mass_scaling"),
        temperature=temperature,
        residual_stiffness=_field(cfg, "solver.residual_stiffness"),
        preload_ramp=_field(cfg, "solver.preload_ramp"),
        preload_hold=_field(cfg, "solver.preload_hold"),
        record_every=_field(cfg, "output.record_every", int) or None,
    )

    if restraint == "free":
        bcs = []
    elif restraint == "minimal":
        bcs = minimal_restraint(box)
    elif restraint == "symmetry":
        bcs = symmetry_restraint()
    else:
        raise ConfigurationError("scenario.restraint must be 'free', 'minimal' or 'symmetry'")
    traction = _field(cfg, "scenario.traction_z")
    if traction:
        bcs.append(BoundaryCondition("traction", 2, value=traction, axis=2, side="max"))
    if get(cfg, "scenario.kind") not in ("free-expansion", "creep"):
        raise ConfigurationError("scenario.kind must be 'free-expansion' or 'creep'")

    return Resolved(cfg=cfg, curve=curve, box=box, h=_field(cfg, "geometry.h"), seed=seed,
                    aggregates=_field(cfg, "geometry.aggregates", bool),
                    gel_seed=gel_seed, gel_ratio=gel_ratio, materials=materials,
                    solver=solver, bcs=bcs)
