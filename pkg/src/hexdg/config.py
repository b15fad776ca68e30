"""Run configuration: typed record, text-file parser and defaults printer.

Config files are plain ``key = value`` text, one pair per line, comments
introduced by ``!``. Keys are case-insensitive; unknown keys are errors.
"""

from dataclasses import dataclass, fields

from .equations import CONST_VISCOSITY, SUTHERLAND, GasProperties


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # test case and scheme
    testcase: str = "tgv"            # tgv | mms | sod | freestream
    n: int = 3                       # polynomial degree
    nodetype: str = "LGL"            # GL | LGL
    operator: str = "split"          # standard | split
    riemann: str = "llf"             # llf | hllc
    rkscheme: str = "carpenter-kennedy-5-4"
    cfl: float = 0.9
    cflvisc: float = 0.4

    # shock capturing
    shockcapture: bool = False
    alphamax: float = 0.5
    alphamin: float = 1e-3
    indicator: str = "hennemann"     # hennemann | constant
    alphaconst: float = 0.0

    # gas properties
    gamma: float = 1.4
    rgas: float = 287.058
    prandtl: float = 0.71
    muref: float = 0.0
    tref: float = 273.15
    viscosity: str = "constant"      # constant | sutherland

    # mesh
    meshx: int = 2
    meshy: int = 2
    meshz: int = 2
    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0
    z0: float = 0.0
    z1: float = 1.0
    periodicx: bool = True
    periodicy: bool = True
    periodicz: bool = True
    curveamplitude: float = 0.0
    meshfile: str = ""               # optional HDGM cache to load instead

    # run control
    nranks: int = 1
    tend: float = 1.0
    maxsteps: int = 0                # 0 = until tend
    analyzeinterval: int = 10
    outputdir: str = "out"
    powerperrank: float = 0.0
    priorityscheduling: bool = True

    # test-case parameters
    mach: float = 0.1
    reynolds: float = 1600.0
    tgvversion: int = 2
    mmsamplitude: float = 0.1
    mmsspeed: float = 1.0
    sodinterface: float = 0.5

    # study drivers
    convdegrees: str = "2 3 4 5"
    convmeshes: str = "2 4 8 16"
    scalingranks: str = "1 2 4 8"

    def gas(self) -> GasProperties:
        law = SUTHERLAND if self.viscosity == "sutherland" else CONST_VISCOSITY
        return GasProperties(gamma=self.gamma, R=self.rgas, Pr=self.prandtl,
                             mu_ref=self.muref, T_ref=self.tref, viscosity_law=law)

    def validate(self):
        if self.operator == "split" and self.nodetype != "LGL":
            raise ConfigError(
                "operator = split requires nodetype = LGL (got "
                f"nodetype = {self.nodetype})")
        if self.shockcapture and self.nodetype != "LGL":
            raise ConfigError(
                "shockcapture = T requires nodetype = LGL (got "
                f"nodetype = {self.nodetype})")
        if self.nodetype not in ("GL", "LGL"):
            raise ConfigError(f"nodetype must be GL or LGL, got {self.nodetype}")
        if self.operator not in ("standard", "split"):
            raise ConfigError(f"operator must be standard or split, got {self.operator}")
        if self.testcase not in ("tgv", "mms", "sod", "freestream"):
            raise ConfigError(f"unknown testcase {self.testcase!r}")
        if self.indicator not in ("hennemann", "constant"):
            raise ConfigError(f"unknown indicator {self.indicator!r}")
        if self.viscosity not in ("constant", "sutherland"):
            raise ConfigError(f"unknown viscosity law {self.viscosity!r}")
        if self.riemann not in ("llf", "hllc"):
            raise ConfigError(f"unknown riemann solver {self.riemann!r}")
        if self.nranks < 1:
            raise ConfigError(f"nranks must be >= 1, got {self.nranks}")
        if self.n < 1:
            raise ConfigError(f"polynomial degree must be >= 1, got N = {self.n}")
        nelem = self.meshx * self.meshy * self.meshz
        if not self.meshfile and self.nranks > nelem:
            raise ConfigError(
                f"nranks = {self.nranks} exceeds the {nelem} mesh elements")
        return self


_HELP = {
    "testcase": "tgv | mms | sod | freestream",
    "n": "polynomial degree N",
    "nodetype": "GL | LGL interpolation nodes",
    "operator": "standard (weak form) | split (two-point volume fluxes)",
    "riemann": "interface flux: llf | hllc",
    "rkscheme": "carpenter-kennedy-5-4 | niegemann-14-4",
    "shockcapture": "enable FV subcell blending",
    "indicator": "hennemann (modal energy) | constant (alphaconst everywhere)",
    "meshfile": "optional HDGM mesh cache; overrides the box parameters",
    "maxsteps": "stop after this many steps (0 = run to tend)",
    "analyzeinterval": "steps between analysis rows",
    "powerperrank": "watts per rank, used for energy-per-DOF reporting",
    "priorityscheduling": "prioritize partition-boundary work for overlap",
}


def _parse_value(current, text, key, lineno):
    t = type(current)
    try:
        if t is bool:
            low = text.strip().lower()
            if low in ("t", "true", "1", "yes", "on"):
                return True
            if low in ("f", "false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if t is int:
            return int(text)
        if t is float:
            return float(text)
        return text.strip()
    except ValueError:
        raise ConfigError(
            f"line {lineno}: cannot parse value {text!r} for key {key!r} as {t.__name__}")


def parse_config(path) -> RunConfig:
    """Parse a key = value config file; unknown keys and bad values are errors."""
    cfg = RunConfig()
    known = {f.name: f for f in fields(RunConfig)}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("_", "")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _parse_value(getattr(cfg, key), value, key, lineno))
    return cfg.validate()


def format_config(cfg: RunConfig) -> str:
    """Emit the effective configuration in the parseable text format."""
    out = []
    for f in fields(RunConfig):
        val = getattr(cfg, f.name)
        if isinstance(val, bool):
            val = "T" if val else "F"
        line = f"{f.name} = {val}"
        if f.name in _HELP:
            line = f"{line:<40s} ! {_HELP[f.name]}"
        out.append(line)
    return "\n".join(out) + "\n"
