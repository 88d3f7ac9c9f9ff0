"""Run configuration in TOML.

Example::

    [constants]            # optional; hbar = mass = 1
    hbar = 1.0
    mass = 1.0

    [potential]
    kind = "harmonic"      # free | harmonic | linear | square_well | polynomial | tabulated
    omega = 1.0

    [grid]
    x_min = -4.0
    x_max = 4.0
    h = 1e-3               # or n = <samples>
    x0 = 0.0

    [energy]
    value = 0.5            # or range = [lo, hi] with count = k for `eigen`

    [microstate]           # sigma/nu/mu/gamma/lambda, or from = "coefficients"
    mu = 1.0
    nu = 0.0

    [trajectory]
    dE = 1e-5
    basis_scaling = "wavenumber"

    [family]
    mu = "auto"            # "auto", "projective" or a number
    nu_list = [-2.0, 0.0, 2.0]

    [output]
    directory = "out"

Every table and key is optional unless a subcommand needs it. Unknown keys
are errors.
"""
from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .microstates import CoefficientPair
from .reduced_action import DegenerateMicrostateError, Microstate
from .schrodinger import (Constants, Grid, Potential, free, harmonic, linear,
                          load_potential_csv, polynomial, square_well)
from .trajectories import SCALINGS

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "SCHEMA"]

_NUM = (int, float)

# table -> key -> accepted python types
SCHEMA = {
    "constants": {"hbar": _NUM, "mass": _NUM},
    "potential": {"kind": str, "omega": _NUM, "mass": _NUM, "slope": _NUM, "offset": _NUM,
                  "depth": _NUM, "width": _NUM, "center": _NUM, "coefficients": list,
                  "file": str},
    "grid": {"x_min": _NUM, "x_max": _NUM, "h": _NUM, "n": int, "x0": _NUM},
    "energy": {"value": _NUM, "range": list, "count": int},
    "microstate": {"sigma": _NUM, "nu": _NUM, "mu": _NUM, "gamma": _NUM, "lambda": _NUM,
                   "from": str, "C1": (list, int, float), "C2": (list, int, float),
                   "nu_free": _NUM},
    "trajectory": {"dE": _NUM, "basis_scaling": str},
    "family": {"mu": (str, int, float), "nu_list": list},
    "field3d": {"n": int, "half_width": _NUM, "k": list, "A0": _NUM, "random_fields": int},
    "output": {"directory": str},
    "tolerances": None,  # keys checked against the verification suite
    "verify": {"seed": int},
}

_POTENTIAL_KEYS = {
    "free": set(),
    "harmonic": {"omega", "mass"},
    "linear": {"slope", "offset"},
    "square_well": {"depth", "width", "center"},
    "polynomial": {"coefficients"},
    "tabulated": {"file"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted key path, ``line`` 1-based or None."""

    def __init__(self, message, key=None, line=None):
        self.key, self.line = key, line
        where = ""
        if key:
            where += f" [key {key}"
            where += f", line {line}]" if line else "]"
        super().__init__(message + where)


@dataclass(frozen=True)
class RunConfig:
    constants: Constants = Constants()
    potential: Potential | None = None
    potential_spec: dict = field(default_factory=dict)
    grid: Grid | None = None
    x0: float = 0.0
    energy: float | None = None
    e_range: tuple | None = None
    count: int = 6
    microstate: Microstate | None = None
    coefficients: CoefficientPair | None = None
    nu_free: float = 0.0
    dE: float = 1e-5
    basis_scaling: str = "wavenumber"
    family_mu: float | None = None  # None: from the bound state; inf: projective
    nu_list: tuple = (-2.0, 0.0, 2.0)
    field3d: dict = field(default_factory=lambda: {
        "n": 32, "half_width": 1.0, "k": (0.0, 0.0, 1.0), "A0": 1.0, "random_fields": 10})
    output_dir: Path = Path("out")
    tolerances: dict = field(default_factory=dict)
    seed: int = 20240917
    raw: dict = field(default_factory=dict, repr=False)

    def require(self, what):
        """Raise a ConfigError naming the missing key for a subcommand."""
        keys = {"energy": "energy.value", "e_range": "energy.range",
                "potential": "potential.kind", "grid": "grid.x_min",
                "microstate": "microstate"}
        if getattr(self, what) is None:
            raise ConfigError("missing required key", keys.get(what, what))

    def echo(self):
        """JSON-ready summary for sidecars."""
        return self.raw


def _line_of(text, table, key):
    """1-based line of ``key`` inside ``[table]`` (or the table header)."""
    current = None
    header = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        m = re.match(r"^\[\s*([^\]]+?)\s*\]$", s)
        if m:
            current = m.group(1)
            if current == table:
                header = i
            continue
        if key is not None and current == table and re.match(
                rf'^("?){re.escape(key)}\1\s*=', s):
            return i
    return header


def _check(val, types, path, text, table, key):
    if isinstance(val, bool) or not isinstance(val, types):
        want = types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)
        raise ConfigError(f"expected {want}, got {type(val).__name__}", path,
                          _line_of(text, table, key))
    if isinstance(val, float) and not math.isfinite(val):
        raise ConfigError("value must be finite", path, _line_of(text, table, key))


def _complex(v, path, line):
    if isinstance(v, _NUM) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(u, _NUM) for u in v):
        return complex(v[0], v[1])
    raise ConfigError("expected a number or [re, im]", path, line)


def parse_config(text: str, base_dir=None, valid_tolerances=None) -> RunConfig:
    """Parse TOML ``text`` into a fully resolved RunConfig.

    ``base_dir`` resolves relative file paths (tabulated potentials and the
    output directory). ``valid_tolerances`` lists accepted keys of the
    ``[tolerances]`` table; by default those of the verification suite.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", None, int(m.group(1)) if m else None)
    base = Path(base_dir) if base_dir is not None else Path(".")
    if valid_tolerances is None:
        from .verification import DEFAULT_TOLERANCES
        valid_tolerances = DEFAULT_TOLERANCES

    for table, body in data.items():
        if table not in SCHEMA:
            raise ConfigError("unknown table", table, _line_of(text, table, None))
        if not isinstance(body, dict):
            raise ConfigError("expected a table", table, _line_of(text, table, None))
        allowed = SCHEMA[table]
        for key, val in body.items():
            path = f"{table}.{key}"
            if table == "tolerances":
                if key not in valid_tolerances:
                    raise ConfigError("unknown tolerance", path, _line_of(text, table, key))
                _check(val, _NUM, path, text, table, key)
                if not val > 0:
                    raise ConfigError("tolerance must be positive", path,
                                      _line_of(text, table, key))
                continue
            if key not in allowed:
                raise ConfigError("unknown key", path, _line_of(text, table, key))
            _check(val, allowed[key], path, text, table, key)

    def line(table, key):
        return _line_of(text, table, key)

    def get(table, key, default=None):
        return data.get(table, {}).get(key, default)

    out = {"raw": data}

    # constants
    hbar, mass = float(get("constants", "hbar", 1.0)), float(get("constants", "mass", 1.0))
    if not hbar > 0:
        raise ConfigError("hbar must be positive", "constants.hbar", line("constants", "hbar"))
    if not mass > 0:
        raise ConfigError("mass must be positive", "constants.mass", line("constants", "mass"))
    out["constants"] = Constants(hbar, mass)

    # potential
    if "potential" in data:
        pot = data["potential"]
        if "kind" not in pot:
            raise ConfigError("missing required key", "potential.kind",
                              line("potential", None))
        kind = pot["kind"]
        if kind not in _POTENTIAL_KEYS:
            raise ConfigError(f"unknown potential kind {kind!r}; expected one of "
                              f"{sorted(_POTENTIAL_KEYS)}", "potential.kind",
                              line("potential", "kind"))
        extra = set(pot) - {"kind"} - _POTENTIAL_KEYS[kind]
        if extra:
            k = sorted(extra)[0]
            raise ConfigError(f"key not used by potential kind {kind!r}", f"potential.{k}",
                              line("potential", k))
        out["potential"] = _build_potential(kind, pot, base, line, mass)
        out["potential_spec"] = dict(pot)

    # grid
    if "grid" in data:
        g = data["grid"]
        for k in ("x_min", "x_max"):
            if k not in g:
                raise ConfigError("missing required key", f"grid.{k}", line("grid", None))
        if ("h" in g) == ("n" in g):
            raise ConfigError("give exactly one of h and n", "grid.h", line("grid", None))
        if "h" in g and not g["h"] > 0:
            raise ConfigError("grid spacing must be positive", "grid.h", line("grid", "h"))
        if not g["x_min"] < g["x_max"]:
            raise ConfigError("x_min must be below x_max", "grid.x_max", line("grid", "x_max"))
        try:
            grid = (Grid.from_spacing(g["x_min"], g["x_max"], g["h"]) if "h" in g
                    else Grid(float(g["x_min"]), float(g["x_max"]), g["n"]))
            x0 = float(g.get("x0", 0.0))
            grid.index_of(x0)
        except ValueError as exc:
            raise ConfigError(str(exc), "grid", line("grid", None)) from None
        out["grid"], out["x0"] = grid, float(grid.x[grid.index_of(x0)])

    # energy
    if "energy" in data:
        e = data["energy"]
        if "value" in e:
            out["energy"] = float(e["value"])
        if "range" in e:
            r = e["range"]
            if len(r) != 2 or not all(isinstance(v, _NUM) for v in r) or not r[0] < r[1]:
                raise ConfigError("range must be [lo, hi] with lo < hi", "energy.range",
                                  line("energy", "range"))
            out["e_range"] = (float(r[0]), float(r[1]))
        if "count" in e:
            if e["count"] < 1:
                raise ConfigError("count must be at least 1", "energy.count",
                                  line("energy", "count"))
            out["count"] = e["count"]

    # microstate
    if "microstate" in data:
        m = data["microstate"]
        if m.get("from", "parameters") == "coefficients":
            stray = set(m) - {"from", "C1", "C2", "nu_free"}
            if stray:
                k = sorted(stray)[0]
                raise ConfigError("parameter key given together with from = \"coefficients\"",
                                  f"microstate.{k}", line("microstate", k))
            for k in ("C1", "C2"):
                if k not in m:
                    raise ConfigError("missing required key", f"microstate.{k}",
                                      line("microstate", None))
            try:
                out["coefficients"] = CoefficientPair(
                    _complex(m["C1"], "microstate.C1", line("microstate", "C1")),
                    _complex(m["C2"], "microstate.C2", line("microstate", "C2")))
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(str(exc), "microstate.C1", line("microstate", "C1")) from None
            out["nu_free"] = float(m.get("nu_free", 0.0))
        elif m.get("from", "parameters") == "parameters":
            stray = set(m) & {"C1", "C2", "nu_free"}
            if stray:
                k = sorted(stray)[0]
                raise ConfigError("coefficient key needs from = \"coefficients\"",
                                  f"microstate.{k}", line("microstate", k))
            try:
                out["microstate"] = Microstate(
                    float(m.get("sigma", 1.0)), float(m.get("nu", 0.0)),
                    float(m.get("mu", 0.0)), float(m.get("gamma", 1.0)),
                    float(m.get("lambda", 0.0)))
            except DegenerateMicrostateError:
                raise ConfigError("degenerate microstate: mu*nu equals sigma*gamma",
                                  "microstate", line("microstate", None)) from None
        else:
            raise ConfigError("from must be \"parameters\" or \"coefficients\"",
                              "microstate.from", line("microstate", "from"))

    # trajectory
    if "trajectory" in data:
        t = data["trajectory"]
        if "dE" in t:
            if not t["dE"] > 0:
                raise ConfigError("dE must be positive", "trajectory.dE", line("trajectory", "dE"))
            out["dE"] = float(t["dE"])
        if "basis_scaling" in t:
            if t["basis_scaling"] not in SCALINGS:
                raise ConfigError(f"basis_scaling must be one of {SCALINGS}",
                                  "trajectory.basis_scaling",
                                  line("trajectory", "basis_scaling"))
            out["basis_scaling"] = t["basis_scaling"]

    # family
    if "family" in data:
        f = data["family"]
        mu = f.get("mu", "auto")
        if isinstance(mu, str):
            if mu not in ("auto", "projective"):
                raise ConfigError('mu must be "auto", "projective" or a number',
                                  "family.mu", line("family", "mu"))
            out["family_mu"] = None if mu == "auto" else math.inf
        else:
            out["family_mu"] = float(mu)
        if "nu_list" in f:
            nl = f["nu_list"]
            if not nl or not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in nl):
                raise ConfigError("nu_list must be a non-empty list of numbers",
                                  "family.nu_list", line("family", "nu_list"))
            out["nu_list"] = tuple(float(v) for v in nl)

    # field3d
    if "field3d" in data:
        f3 = dict(RunConfig().field3d)
        f3.update(data["field3d"])
        if f3["n"] < 4:
            raise ConfigError("need at least 4 samples per axis", "field3d.n",
                              line("field3d", "n"))
        if not f3["half_width"] > 0:
            raise ConfigError("half_width must be positive", "field3d.half_width",
                              line("field3d", "half_width"))
        k = f3["k"]
        if len(k) != 3 or not all(isinstance(v, _NUM) for v in k) or not any(k):
            raise ConfigError("k must be a nonzero 3-vector", "field3d.k", line("field3d", "k"))
        f3["k"] = tuple(float(v) for v in k)
        out["field3d"] = f3

    if "output" in data and "directory" in data["output"]:
        d = Path(data["output"]["directory"])
        out["output_dir"] = d if d.is_absolute() else base / d
    else:
        out["output_dir"] = base / "out"
    if "tolerances" in data:
        out["tolerances"] = {k: float(v) for k, v in data["tolerances"].items()}
    if "verify" in data and "seed" in data["verify"]:
        out["seed"] = data["verify"]["seed"]
    return RunConfig(**out)


def _build_potential(kind, pot, base, line, mass=1.0):
    try:
        if kind == "free":
            return free()
        if kind == "harmonic":
            # the oscillator mass defaults to the particle mass
            return harmonic(float(pot.get("omega", 1.0)), float(pot.get("mass", mass)))
        if kind == "linear":
            return linear(float(pot.get("slope", 1.0)), float(pot.get("offset", 0.0)))
        if kind == "square_well":
            for k in ("depth", "width"):
                if k not in pot:
                    raise ConfigError("missing required key", f"potential.{k}",
                                      line("potential", None))
            return square_well(float(pot["depth"]), float(pot["width"]),
                               float(pot.get("center", 0.0)))
        if kind == "polynomial":
            if "coefficients" not in pot:
                raise ConfigError("missing required key", "potential.coefficients",
                                  line("potential", None))
            return polynomial([float(v) for v in pot["coefficients"]])
        if "file" not in pot:
            raise ConfigError("missing required key", "potential.file", line("potential", None))
        path = Path(pot["file"])
        return load_potential_csv(path if path.is_absolute() else base / path)
    except ConfigError:
        raise
    except (ValueError, TypeError, OSError) as exc:
        raise ConfigError(str(exc), "potential", line("potential", None)) from None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, base_dir=path.parent)
