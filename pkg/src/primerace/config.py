"""Run configuration: a flat ``key = value`` file with CLI-flag override precedence.

Values are stored as their text form, so ``RunConfig.from_text(cfg.to_text())``
reproduces ``cfg`` exactly.  ``threads`` is an execution detail and is kept
out of the reproducible part of a report.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import ValidationError

COMMANDS = ("lpoly", "zeros", "hypothesis", "counts", "race", "density", "fourier-scan", "plotdata")
EXECUTION_KEYS = ("threads", "out")


@dataclass
class RunConfig:
    command: str = "race"
    mode: str = "ff"
    field: str | None = None
    modulus: str | None = None
    classes: str | None = None
    k_max: int = 12
    x_max: int = 10**7
    samples: int = 10**5
    resolution: int = 2048
    height: int = 10**6
    precision: int = 50
    seed: int = 0
    zeros: str | None = None
    omega: int | None = None
    omega_mod2: bool = False
    eps: float = 0.01
    radii: str = "1:100:25"
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, str) and f.type not in ("str", "str | None"):
                setattr(self, f.name, _coerce(f, v))

    # -- validation ---------------------------------------------------------

    def validate(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"command: unknown subcommand {self.command!r}")
        if self.mode not in ("ff", "classical"):
            raise ValidationError(f"mode: expected 'ff' or 'classical', got {self.mode!r}")
        for name in ("k_max", "x_max", "samples", "resolution", "height", "precision", "threads"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name}: must be positive, got {getattr(self, name)}")
        if self.seed < 0:
            raise ValidationError(f"seed: must be nonnegative, got {self.seed}")
        if not 0 < self.eps < 1:
            raise ValidationError(f"eps: must lie in (0, 1), got {self.eps}")
        if self.omega is not None and self.omega < 0:
            raise ValidationError(f"omega: must be nonnegative, got {self.omega}")
        needs_classes = self.command in ("race", "density", "fourier-scan", "plotdata")
        if self.mode == "ff":
            if self.field is None:
                raise ValidationError("field: required in ff mode (e.g. --field 3^1)")
            if self.modulus is None:
                raise ValidationError("modulus: required in ff mode (e.g. --modulus t^2+1)")
        else:
            if self.command == "lpoly":
                raise ValidationError("mode: lpoly is only defined in ff mode")
            if self.zeros is None and self.command not in ("counts", "density"):
                raise ValidationError("zeros: a zero file is required in classical mode")
            if self.omega is not None:
                raise ValidationError("omega: only available in ff mode")
            if self.modulus is not None:
                try:
                    int(self.modulus)
                except ValueError:
                    raise ValidationError(f"modulus: expected an integer in classical mode, "
                                          f"got {self.modulus!r}") from None
        if needs_classes and not self.classes:
            raise ValidationError("classes: required (e.g. --classes 2,1)")
        _parse_radii(self.radii)
        return self

    def class_list(self):
        return [c.strip() for c in (self.classes or "").split(",") if c.strip()]

    def radii_list(self):
        return _parse_radii(self.radii)

    # -- file form ----------------------------------------------------------

    def to_text(self, include_execution=True):
        lines = []
        for f in fields(self):
            if not include_execution and f.name in EXECUTION_KEYS:
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {_fmt(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        return cls(**parse_text(text))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())
        return path

    def merged(self, overrides):
        """A copy with the non-None entries of ``overrides`` applied."""
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**data)

    def reproducible(self):
        """The config as embedded in reports: everything except execution details."""
        return {k: v for k, v in asdict(self).items() if k not in EXECUTION_KEYS}


_NAMES = None


def _field_map():
    global _NAMES
    if _NAMES is None:
        _NAMES = {f.name: f for f in fields(RunConfig)}
    return _NAMES


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(f, text):
    kind = f.type
    try:
        if "bool" in kind:
            low = text.strip().lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if "int" in kind:
            try:
                return int(text)
            except ValueError:
                v = float(text)
                if v != int(v):
                    raise
                return int(v)
        if "float" in kind:
            return float(text)
    except ValueError:
        raise ValidationError(f"{f.name}: cannot parse {text!r} as {kind}") from None
    return text


def parse_text(text):
    """key = value lines; '#' starts a comment; unknown keys are an error."""
    names = _field_map()
    out = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {no}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in names:
            raise ValidationError(f"config line {no}: unknown key {key!r}")
        out[key] = _coerce(names[key], val) if names[key].type not in ("str", "str | None") else val
    return out


def _parse_radii(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ValidationError(f"radii: expected lo:hi:count, got {text!r}") from None
    if not (0 < lo < hi) or n < 2:
        raise ValidationError(f"radii: need 0 < lo < hi and count >= 2, got {text!r}")
    return lo, hi, n

