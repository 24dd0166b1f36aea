"""Experiment configuration: sectioned ``key = value`` files with strict validation."""

import configparser
import math
from dataclasses import dataclass

from .errors import ConfigError
from .geometry import CoefficientField, Hypersurface
from .kinds import Kind
from .strengths import FourierStrength, as_strength

SCHEMA = {
    "geometry": ("shape", "R", "a", "b", "n"),
    "coefficients": ("family", "parameters", "m0"),
    "interaction": ("kind", "alpha", "beta"),
    "solver": ("mode_cutoff", "guard_band", "quadrature_tol"),
    "output": ("format", "path"),
}

DEFAULTS = {
    "geometry": {"shape": "circle", "R": "1.0", "a": "", "b": "", "n": ""},
    "coefficients": {"family": "identity", "parameters": "", "m0": "1.0"},
    "interaction": {"kind": "delta_vs_free", "alpha": "", "beta": ""},
    "solver": {"mode_cutoff": "2000", "guard_band": "", "quadrature_tol": "1e-10"},
    "output": {"format": "", "path": ""},
}


def _float(section, key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{section}.{key} must be a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    return value


def _int(section, key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{section}.{key} must be an integer, got {text!r}") from None


def _numbers(section, key, text):
    return tuple(_float(section, key, t.strip()) for t in text.split(",") if t.strip())


@dataclass(frozen=True)
class GeometryConfig:
    shape: str
    R: float
    a: float | None
    b: float | None
    n: int

    def surface(self):
        if self.shape == "circle":
            return Hypersurface.circle(self.R)
        if self.shape == "sphere":
            return Hypersurface.sphere(self.R)
        return Hypersurface.ellipse(self.a, self.b)


@dataclass(frozen=True)
class CoefficientsConfig:
    family: str
    parameters: str
    m0: float

    def field(self, n):
        if self.family == "identity":
            return CoefficientField.identity(n, self.m0)
        if self.family == "constant":
            rows = [_numbers("coefficients", "parameters", row)
                    for row in self.parameters.split(";")]
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ConfigError(f"coefficients.parameters must hold a {n}x{n} matrix "
                                  "as 'a11,a12;a21,a22'")
            return CoefficientField.constant(rows, self.m0)
        key, _, value = self.parameters.partition("=")
        if key.strip() != "eps":
            raise ConfigError("perturbed family needs parameters = eps=<value>")
        return CoefficientField.perturbed(n, _float("coefficients", "parameters", value), self.m0)


@dataclass(frozen=True)
class InteractionConfig:
    kind: Kind
    alpha: tuple | None
    beta: float | None

    @property
    def alpha_strength(self):
        return None if self.alpha is None else as_strength(
            self.alpha[0] if len(self.alpha) == 1 else self.alpha)

    @property
    def alpha_is_constant(self):
        return self.alpha is None or len(self.alpha) == 1 or FourierStrength(self.alpha).is_constant

    @property
    def strength(self):
        """The strength relevant for the kind."""
        if self.kind.uses_alpha:
            return self.alpha_strength
        return self.beta


@dataclass(frozen=True)
class SolverConfig:
    mode_cutoff: int
    guard_band: int | None
    quadrature_tol: float


@dataclass(frozen=True)
class OutputConfig:
    format: str
    path: str


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration together with its resolved text form."""

    geometry: GeometryConfig
    coefficients: CoefficientsConfig
    interaction: InteractionConfig
    solver: SolverConfig
    output: OutputConfig
    resolved: dict

    def surface(self):
        return self.geometry.surface()

    def coefficient_field(self):
        return self.coefficients.field(self.geometry.n)

    def as_lines(self):
        return [f"{sec}.{key}={val}" for sec, keys in self.resolved.items()
                for key, val in keys.items()]


def read_config(path=None, overrides=()):
    """Parse, merge overrides and validate.

    Parameters
    ----------
    path : str, optional
        Config file; defaults apply when omitted.
    overrides : iterable of str
        ``section.key=value`` items applied after the file.

    Raises
    ------
    ConfigError
        On parse errors, unknown sections or keys, or invalid values.
    """
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc.message}") from None
    raw = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for key, value in parser.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {sec}.{key}")
            raw[sec][key] = value.strip()
    for item in overrides:
        target, eq, value = item.partition("=")
        sec, dot, key = target.strip().partition(".")
        if not eq or not dot:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        if sec not in SCHEMA or key not in SCHEMA[sec]:
            raise ConfigError(f"unknown key {sec}.{key}")
        raw[sec][key] = value.strip()
    return validate(raw)


def validate(raw):
    """Turn raw strings into an :class:`ExperimentConfig`."""
    g = raw["geometry"]
    shape = g["shape"]
    if shape not in ("circle", "ellipse", "sphere"):
        raise ConfigError(f"geometry.shape must be circle, ellipse or sphere, got {shape!r}")
    n_expected = 3 if shape == "sphere" else 2
    n = _int("geometry", "n", g["n"]) if g["n"] else n_expected
    if n != n_expected:
        raise ConfigError(f"geometry.n={n} does not match shape {shape}")
    R = _float("geometry", "R", g["R"])
    a = _float("geometry", "a", g["a"]) if g["a"] else None
    b = _float("geometry", "b", g["b"]) if g["b"] else None
    if shape == "ellipse" and (a is None or b is None):
        raise ConfigError("ellipse needs geometry.a and geometry.b")
    for name, v in (("R", R), ("a", a), ("b", b)):
        if v is not None and v <= 0:
            raise ConfigError(f"geometry.{name} must be positive")
    geometry = GeometryConfig(shape, R, a, b, n)

    c = raw["coefficients"]
    if c["family"] not in ("identity", "constant", "perturbed"):
        raise ConfigError("coefficients.family must be identity, constant or perturbed")
    if c["family"] == "identity" and c["parameters"]:
        raise ConfigError("identity coefficients take no parameters")
    m0 = _float("coefficients", "m0", c["m0"])
    if m0 <= 0:
        raise ConfigError("coefficients.m0 must be positive")
    coefficients = CoefficientsConfig(c["family"], c["parameters"], m0)

    i = raw["interaction"]
    try:
        kind = Kind(i["kind"])
    except ValueError:
        raise ConfigError(f"unknown interaction.kind {i['kind']!r}") from None
    alpha = _numbers("interaction", "alpha", i["alpha"]) if i["alpha"] else None
    beta = _float("interaction", "beta", i["beta"]) if i["beta"] else None
    if kind.uses_alpha and alpha is None:
        raise ConfigError("alpha required")
    if kind.uses_beta and not beta:
        raise ConfigError("beta required and non-zero")
    interaction = InteractionConfig(kind, alpha, beta)

    s = raw["solver"]
    cutoff = _int("solver", "mode_cutoff", s["mode_cutoff"])
    if cutoff < 1:
        raise ConfigError("solver.mode_cutoff must be at least 1")
    guard = _int("solver", "guard_band", s["guard_band"]) if s["guard_band"] else None
    if guard is not None and not 0 <= guard < cutoff:
        raise ConfigError("solver.guard_band must satisfy 0 <= guard_band < mode_cutoff")
    tol = _float("solver", "quadrature_tol", s["quadrature_tol"])
    if not 0 < tol <= 1e-2:
        raise ConfigError("solver.quadrature_tol must lie in (0, 1e-2]")
    solver = SolverConfig(cutoff, guard, tol)

    o = raw["output"]
    if o["format"] not in ("", "csv", "json"):
        raise ConfigError("output.format must be csv or json")
    output = OutputConfig(o["format"], o["path"])
    resolved = {sec: {k: raw[sec][k] for k in SCHEMA[sec]} for sec in SCHEMA}
    resolved["geometry"]["n"] = str(n)
    return ExperimentConfig(geometry, coefficients, interaction, solver, output, resolved)
