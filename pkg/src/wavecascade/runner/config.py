"""Scenario configuration: flat ``section.key = value`` text with ``#`` comments.

Fixed sections are ``atom``, ``grid``, ``field``, ``pathways``, ``control``,
``collision``, ``detector1``, ``detector2`` and ``scan``. Every label listed
in ``field.components`` opens a component section (``w1.omega = 4.554``) and
every label in ``pathways.list`` opens a pathway section
(``p13.steps = w1 w2``). Angles accept ``pi`` multiples such as ``-pi/2``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..atoms import AtomModel, RadialMatrixElementTable, calcium_model
from ..cascade import DetectorSpec
from ..collision import CollisionGeometry, TargetManifold
from ..errors import ConfigError
from ..field import FieldSpec, FrequencyComponent, Polarization
from ..ionization import EnergyGrid, Pathway

SCAN_VARIABLES = ("relative_phase", "pump_probe_delay", "detector1_theta")
ANALYZERS = ("sigma", "sigma_prime", "unresolved", "x", "y", "z")

_PI_RE = re.compile(r"^(?P<sign>[+-])?(?:(?P<coef>\d+(?:\.\d*)?)\s*\*\s*)?pi(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?$")


def _number(text: str) -> float:
    m = _PI_RE.match(text.strip())
    if m:
        val = math.pi * float(m["coef"] or 1.0) / float(m["den"] or 1.0)
        return -val if m["sign"] == "-" else val
    val = float(text)
    if not math.isfinite(val):
        raise ValueError(f"non-finite number {text!r}")
    return val


def _integer(text: str) -> int:
    if not re.fullmatch(r"[+-]?\d+", text.strip()):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(text)


def _boolean(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _words(text: str) -> list[str]:
    return text.replace(",", " ").split()


def _numbers(text: str) -> list[float]:
    return [_number(w) for w in _words(text)]


def _choice(options):
    def parse(text: str) -> str:
        if text.strip() not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {text.strip()!r}")
        return text.strip()

    return parse


def _text(text: str) -> str:
    return text.strip()


# key -> (parser, default); default None means required
FIXED_KEYS: dict[str, dict[str, tuple]] = {
    "scenario": {"name": (_text, "custom"), "description": (_text, "")},
    "atom": {
        "ionization_potential": (_number, 6.113),
        "continuum_phase": (_numbers, [0.0, 0.0, 0.0, 0.0]),
        "radial_table": (_text, ""),
    },
    "grid": {
        "center": (_number, 15.755),
        "sigma": (_number, 0.0548),
        "span": (_number, 3.0),
        "points": (_integer, 64),
        "lmax": (_integer, 2),
    },
    "field": {"components": (_words, None)},
    "pathways": {"list": (_words, None), "equalize": (_boolean, True)},
    "control": {"component": (_text, "")},
    "collision": {
        "target": (_text, "4d"),
        "distance": (_number, 2.0),
        "direction": (_numbers, [0.0, 0.0, 1.0]),
        "n_theta": (_integer, 32),
        "n_phi": (_integer, 64),
    },
    "detector1": {
        "phi": (_number, math.pi / 2),
        "analyzer": (_choice(ANALYZERS), "sigma_prime"),
        "energy": (_number, 0.661),
    },
    "detector2": {
        "theta": (_number, math.pi / 2),
        "phi": (_number, -math.pi / 2),
        "analyzer": (_choice(ANALYZERS), "z"),
        "energy": (_number, 12.078),
    },
    "scan": {
        "variable": (_choice(SCAN_VARIABLES), None),
        "lo": (_number, 0.0),
        "hi": (_number, 2.0 * math.pi),
        "points": (_integer, 64),
        "endpoint": (_boolean, False),
        "theta_lo": (_number, 0.0),
        "theta_hi": (_number, math.pi),
        "theta_points": (_integer, 37),
    },
}

COMPONENT_KEYS = {
    "omega": (_number, None),
    "polarization": (_choice(tuple(p.value for p in Polarization)), None),
    "amplitude": (_number, 1.0),
    "phase": (_number, 0.0),
    "center_time": (_number, 0.0),
    "fwhm": (_number, 20.0),
}

PATHWAY_KEYS = {
    "steps": (_words, None),
    "intermediate": (_text, ""),
    "weight": (_number, 1.0),
}


@dataclass(frozen=True)
class ScanSpec:
    variable: str
    lo: float
    hi: float
    points: int
    endpoint: bool = False
    theta_lo: float = 0.0
    theta_hi: float = math.pi
    theta_points: int = 37

    def __post_init__(self):
        if self.variable not in SCAN_VARIABLES:
            raise ConfigError(f"scan.variable must be one of {', '.join(SCAN_VARIABLES)}")
        if self.points < 2:
            raise ConfigError("scan.points must be >= 2")
        if not self.lo < self.hi:
            raise ConfigError("scan.lo must be < scan.hi")
        if self.variable != "detector1_theta":
            if self.theta_points < 1:
                raise ConfigError("scan.theta_points must be >= 1")
            if self.theta_points > 1 and not self.theta_lo < self.theta_hi:
                raise ConfigError("scan.theta_lo must be < scan.theta_hi")

    def values(self):
        import numpy as np

        return np.linspace(self.lo, self.hi, self.points, endpoint=self.endpoint)

    def thetas(self):
        import numpy as np

        if self.variable == "detector1_theta":
            return None
        if self.theta_points == 1:
            return np.array([self.theta_lo])
        return np.linspace(self.theta_lo, self.theta_hi, self.theta_points)


@dataclass(frozen=True)
class Scenario:
    """Fully resolved scenario; ``values`` holds every key with defaults applied."""

    values: dict = field(compare=True)

    # -- typed views ------------------------------------------------------
    def get(self, key: str):
        return self.values[key]

    @property
    def name(self) -> str:
        return self.values["scenario.name"]

    @property
    def component_labels(self) -> list[str]:
        return list(self.values["field.components"])

    @property
    def pathway_labels(self) -> list[str]:
        return list(self.values["pathways.list"])

    def atom(self) -> AtomModel:
        table_path = self.values["atom.radial_table"]
        table = None
        if table_path:
            table = RadialMatrixElementTable.from_file(table_path, hydrogenic=False)
            base = calcium_model().radial_table
            for k, v in base.bound.items():
                table.bound.setdefault(k, v)
        return calcium_model(table, tuple(self.values["atom.continuum_phase"]),
                             self.values["atom.ionization_potential"])

    def field_spec(self) -> FieldSpec:
        comps = []
        for lab in self.component_labels:
            comps.append(FrequencyComponent(
                label=lab,
                omega=self.values[f"{lab}.omega"],
                amplitude=self.values[f"{lab}.amplitude"],
                polarization=Polarization(self.values[f"{lab}.polarization"]),
                phase=self.values[f"{lab}.phase"],
                center_time=self.values[f"{lab}.center_time"],
                fwhm=self.values[f"{lab}.fwhm"],
            ))
        return FieldSpec(tuple(comps))

    def pathways(self, field_spec: FieldSpec | None = None) -> list[Pathway]:
        fs = field_spec or self.field_spec()
        atom = self.atom()
        out = []
        for lab in self.pathway_labels:
            steps = tuple(fs[s] for s in self.values[f"{lab}.steps"])
            inter = self.values[f"{lab}.intermediate"]
            out.append(Pathway(lab, steps, atom.intermediate(inter) if inter else None,
                               self.values[f"{lab}.weight"]))
        return out

    def energy_grid(self) -> EnergyGrid:
        v = self.values
        return EnergyGrid.around(v["grid.center"], v["grid.sigma"], v["grid.span"], v["grid.points"])

    def target(self) -> TargetManifold:
        t = self.values["collision.target"]
        return TargetManifold(int(t[0]), "spdf".index(t[1]))

    def geometry(self) -> CollisionGeometry:
        return CollisionGeometry(self.values["collision.distance"], tuple(self.values["collision.direction"]))

    def detectors(self) -> tuple[DetectorSpec, DetectorSpec]:
        v = self.values
        d1 = DetectorSpec(0.0, v["detector1.phi"], v["detector1.analyzer"], v["detector1.energy"])
        d2 = DetectorSpec(v["detector2.theta"], v["detector2.phi"], v["detector2.analyzer"], v["detector2.energy"])
        return d1, d2

    def scan(self) -> ScanSpec:
        v = self.values
        return ScanSpec(v["scan.variable"], v["scan.lo"], v["scan.hi"], v["scan.points"], v["scan.endpoint"],
                        v["scan.theta_lo"], v["scan.theta_hi"], v["scan.theta_points"])

    def with_values(self, **updates) -> "Scenario":
        vals = dict(self.values)
        for k, v in updates.items():
            vals[k.replace("__", ".")] = v
        return validate(vals, {})


# ---------------------------------------------------------------------------
# parsing


def parse_text(text: str) -> tuple[dict[str, str], dict[str, int]]:
    """Raw ``key -> value text`` and ``key -> line number``."""
    raw, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'section.key = value', got {body!r}", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not re.fullmatch(r"[A-Za-z_][\w-]*\.[A-Za-z_]\w*", key):
            raise ConfigError(f"malformed key {key!r} (expected section.key)", lineno)
        if not value:
            raise ConfigError(f"empty value for {key}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key} (first set on line {lines[key]})", lineno)
        raw[key] = value
        lines[key] = lineno
    return raw, lines


def _section_schemas(raw: dict, lines: dict) -> dict[str, dict]:
    schemas = dict(FIXED_KEYS)

    def labels(key):
        if key not in raw:
            return []
        labs = _words(raw[key]) if isinstance(raw[key], str) else list(raw[key])
        for lab in labs:
            if lab in schemas:
                raise ConfigError(f"label {lab!r} in {key} collides with a section name", lines.get(key))
        if len(set(labs)) != len(labs):
            raise ConfigError(f"duplicate labels in {key}", lines.get(key))
        return labs

    for lab in labels("field.components"):
        schemas[lab] = COMPONENT_KEYS
    for lab in labels("pathways.list"):
        if lab in schemas:
            raise ConfigError(f"pathway label {lab!r} collides with a component or section", lines.get("pathways.list"))
        schemas[lab] = PATHWAY_KEYS
    return schemas


def validate(raw: dict, lines: dict) -> Scenario:
    """Resolve defaults and check cross-references.

    ``raw`` values may be strings (from a file) or already-typed values.
    """
    schemas = _section_schemas(raw, lines)
    values = {}
    for key, val in raw.items():
        section, name = key.split(".", 1)
        schema = schemas.get(section)
        if schema is None:
            raise ConfigError(f"unknown section {section!r} in key {key}", lines.get(key))
        if name not in schema:
            raise ConfigError(f"unknown key {key}", lines.get(key))
        parser = schema[name][0]
        if isinstance(val, str):
            try:
                values[key] = parser(val)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}", lines.get(key)) from None
        else:
            values[key] = val

    missing = []
    for section, schema in schemas.items():
        for name, (_, default) in schema.items():
            key = f"{section}.{name}"
            if key in values:
                continue
            if default is None:
                missing.append(key)
            else:
                values[key] = list(default) if isinstance(default, list) else default
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(sorted(missing)))

    _check(values, lines)
    ordered = {k: values[k] for k in _key_order(values)}
    return Scenario(ordered)


def _check(values: dict, lines: dict):
    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", lines.get(key))

    comps = values["field.components"]
    if not comps:
        fail("field.components", "at least one frequency component is required")
    for lab in comps:
        if not values[f"{lab}.omega"] > 0:
            fail(f"{lab}.omega", "must be positive")
        if not values[f"{lab}.fwhm"] > 0:
            fail(f"{lab}.fwhm", "must be positive")
    paths = values["pathways.list"]
    if not paths:
        fail("pathways.list", "at least one pathway is required")
    atom = calcium_model()
    inters = {s.label for s in atom.intermediates}
    for lab in paths:
        steps = values[f"{lab}.steps"]
        if len(steps) not in (1, 2):
            fail(f"{lab}.steps", "pathways have one or two photon steps")
        for s in steps:
            if s not in comps:
                fail(f"{lab}.steps", f"unknown component {s!r}")
        inter = values[f"{lab}.intermediate"]
        if len(steps) == 2 and not inter:
            fail(f"{lab}.intermediate", "two-photon pathways need an intermediate state")
        if inter and inter not in inters:
            fail(f"{lab}.intermediate", f"unknown intermediate {inter!r} (known: {', '.join(sorted(inters))})")
    ctrl = values["control.component"]
    if ctrl and ctrl not in comps:
        fail("control.component", f"unknown component {ctrl!r}")
    if values["scan.variable"] == "relative_phase" and not ctrl:
        fail("control.component", "a relative-phase scan needs the controlled component")
    if values["scan.variable"] == "pump_probe_delay":
        for lab in paths:
            if len(values[f"{lab}.steps"]) != 2:
                fail("scan.variable", f"pump-probe delay needs two-photon pathways ({lab} has one step)")
    if not values["atom.ionization_potential"] > 0:
        fail("atom.ionization_potential", "must be positive")
    if values["grid.points"] < 2:
        fail("grid.points", "must be >= 2")
    if not (values["grid.sigma"] > 0 and values["grid.span"] > 0):
        fail("grid.span", "grid sigma and span must be positive")
    if values["grid.lmax"] < 1:
        fail("grid.lmax", "must be >= 1")
    t = values["collision.target"]
    if not re.fullmatch(r"[1-9][spdf]", t) or "spdf".index(t[1]) >= int(t[0]):
        fail("collision.target", f"expected a hydrogen manifold like 4d, got {t!r}")
    if len(values["collision.direction"]) != 3:
        fail("collision.direction", "expected three components")
    try:
        CollisionGeometry(values["collision.distance"], tuple(values["collision.direction"]))
    except ValueError as exc:
        fail("collision.distance", str(exc))
    for key in ("collision.n_theta", "collision.n_phi"):
        if values[key] < 2:
            fail(key, "must be >= 2")
    try:
        ScanSpec(values["scan.variable"], values["scan.lo"], values["scan.hi"], values["scan.points"],
                 values["scan.endpoint"], values["scan.theta_lo"], values["scan.theta_hi"],
                 values["scan.theta_points"])
    except ConfigError as exc:
        raise ConfigError(str(exc), lines.get("scan.variable")) from None


def _key_order(values: dict) -> list[str]:
    order = []
    for section in ("scenario", "atom", "grid", "field"):
        order += [f"{section}.{k}" for k in FIXED_KEYS[section]]
    for lab in values["field.components"]:
        order += [f"{lab}.{k}" for k in COMPONENT_KEYS]
    order += [f"pathways.{k}" for k in FIXED_KEYS["pathways"]]
    for lab in values["pathways.list"]:
        order += [f"{lab}.{k}" for k in PATHWAY_KEYS]
    for section in ("control", "collision", "detector1", "detector2", "scan"):
        order += [f"{section}.{k}" for k in FIXED_KEYS[section]]
    return order


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_format(v) for v in value)
    return str(value)


def dump(scenario: Scenario) -> str:
    """Canonical text: every resolved key, fixed order, shortest round-trip floats."""
    out = []
    section = None
    for key, val in scenario.values.items():
        sec = key.split(".", 1)[0]
        if sec != section:
            if section is not None:
                out.append("")
            section = sec
        if val == "" or val == []:
            continue
        out.append(f"{key} = {_format(val)}")
    return "\n".join(out) + "\n"


def loads(text: str) -> Scenario:
    raw, lines = parse_text(text)
    return validate(raw, lines)


def load_config(path) -> Scenario:
    """Load a scenario file; ``presets/<name>`` falls back to the built-in preset."""
    p = Path(path)
    if p.is_file():
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {p}: {exc}") from None
        return loads(text)
    name = p.name[:-4] if p.name.endswith(".cfg") else p.name
    if (p.parent.name in ("presets", "") or str(p.parent) == ".") and name in preset_names():
        return load_preset(name)
    raise ConfigError(f"no such config file: {path}")


def preset_names() -> list[str]:
    files = resources.files("wavecascade").joinpath("presets")
    return sorted(f.name[:-4] for f in files.iterdir() if f.name.endswith(".cfg"))


def preset_text(name: str) -> str:
    if name not in preset_names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return resources.files("wavecascade").joinpath("presets").joinpath(f"{name}.cfg").read_text()


def load_preset(name: str) -> Scenario:
    return loads(preset_text(name))


def normalize(text: str) -> str:
    return dump(loads(text))


__all__ = [
    "Scenario",
    "ScanSpec",
    "dump",
    "load_config",
    "load_preset",
    "loads",
    "normalize",
    "parse_text",
    "preset_names",
    "preset_text",
    "validate",
]
