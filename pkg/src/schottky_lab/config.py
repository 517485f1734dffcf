"""Run configuration: a sectioned ``key = value`` file read with configparser.

Unknown sections or keys, unparsable values and out-of-range tolerances are
rejected with the offending line number.
"""
import configparser
import math
import re
from dataclasses import dataclass, field

from .errors import ConfigError

SCHEMA_VERSION = 1


def _float(text):
    return float(text)


def _int(text):
    return int(text)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text):
    return text.strip()


def _auto_float(text):
    return "auto" if text.strip().lower() == "auto" else float(text)


def _float_list(text):
    """``"1, 2, 3"``, ``"start:stop:count"`` (inclusive, evenly spaced) or
    ``"log:start:stop:count"`` (geometrically spaced)."""
    text = text.strip()
    if text.lower() == "auto":
        return "auto"
    if ":" in text:
        parts = text.split(":")
        geometric = parts[0].strip().lower() == "log"
        start, stop, count = parts[1:] if geometric else parts
        n = int(count)
        lo, hi = float(start), float(stop)
        if n < 2:
            return [lo]
        if geometric:
            if not (lo > 0 and hi > 0):
                raise ValueError("geometric grids need positive ends")
            r = math.log(hi / lo)
            return [lo * math.exp(r * i / (n - 1)) for i in range(n)]
        return [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def _str_list(text):
    return [x.strip() for x in text.split(",") if x.strip()]


# section -> key -> (parser, default, help)
SCHEMA = {
    "profile": {
        "variant": (_str, "lemma22", "pure_log, lemma22 or remark24"),
        "alpha": (_float, 1.5, "ramp height of the lemma22 profile"),
        "kappa": (_auto_float, "auto", "pinching constant; auto = 0.9 (0.15 for remark24)"),
        "epsilon0": (_auto_float, "auto", "ramp rate; auto = calibrated"),
    },
    "model": {
        "s_p": (_float, 1.0, "translation length scale of the parabolic generator"),
        "l_h": (_float, 1.0, "base translation length of the hyperbolic generator"),
        "c": (_float, 0.0, "junction defect"),
        "c_bracket": (_float, 0.0, "second junction defect classified alongside c"),
        "calibrate": (_bool, True, "replace l_h by its smallest calibrated multiple"),
    },
    "solver": {
        "a": (_auto_float, "auto", "cusp depth; auto = critical depth a*"),
        "a_prime": (_auto_float, "auto", "upper depth of the certificate; auto = a* + 0.5"),
        "s": (_float, 0.5, "exponent of series and operators"),
        "level": (_int, 0, "operator fidelity level (0 or 1)"),
        "depth": (_int, 1, "cylinder depth of the level-1 operator"),
        "M": (_int, 10_000, "explicit terms of one-letter and parabolic sums"),
        "M_cyl": (_int, 50, "explicit exponents of level-1 cylinders"),
        "K": (_int, 4, "syllable count of the enumerated group series"),
        "M_words": (_int, 50, "exponent bound of the enumerated group series"),
        "rank": (_int, 1, "rank of the parabolic lattice"),
        "k_max": (_int, 20, "word lengths fitted by the monotonicity certificate"),
        "tol_delta": (_float, 1e-6, "bisection width for the critical exponent"),
        "tol_astar": (_float, 1e-10, "bisection width for the critical depth"),
        "band": (_float, 5e-3, "|delta - 1/2| below which the gap condition fails"),
        "a_max": (_float, 64.0, "largest depth tried when bracketing a*"),
        "a_grid": (_float_list, "auto", "atlas depths; auto = a* - 2 .. a* + 12"),
        "D_grid": (_float_list, "log:1:10000:25", "separations for geodesic-check"),
        "sigma_min": (_float, 1.0, "curvature grid start (ln s)"),
        "sigma_max": (_float, 400.0, "curvature grid end (ln s)"),
        "sigma_points": (_int, 4000, "curvature grid size"),
        "threads": (_int, 1, "worker count; results do not depend on it"),
    },
    "output": {
        "dir": (_str, "out", "directory receiving JSON and CSV artifacts"),
        "formats": (_str_list, "json,csv", "artifact formats"),
        "dump_matrix": (_bool, False, "write operator entries as (row, col, value) CSV"),
    },
}

POSITIVE = {"tol_delta", "tol_astar", "band", "s_p", "l_h", "a_max", "s"}
MINIMA = {"M": 1000, "M_cyl": 2, "depth": 1, "K": 1, "M_words": 1, "rank": 1,
          "k_max": 2, "threads": 1, "sigma_points": 2}


def _line_of(text, section, key=None):
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        m = re.match(r"^\[(.+)\]$", stripped)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return no
            continue
        if key is not None and current == section:
            k = re.split(r"[=:]", stripped, maxsplit=1)[0].strip()
            if k.lower() == key.lower():
                return no
    return 0


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    source: str = "<defaults>"

    @classmethod
    def defaults(cls):
        vals = {sec: {k: (entry[0](entry[1]) if isinstance(entry[1], str) and entry[1] != "auto"
                          else entry[1]) for k, entry in keys.items()}
                for sec, keys in SCHEMA.items()}
        return cls(vals)

    @classmethod
    def from_text(cls, text, source="<string>"):
        cfg = cls.defaults()
        cfg.source = source
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            lineno = getattr(exc, "lineno", 0)
            raise ConfigError(f"{source}:{lineno}: {exc.message.splitlines()[0]}") from exc
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"{source}:{_line_of(text, section)}: "
                                  f"unknown section [{section}]")
            for key, raw in parser.items(section):
                lineno = _line_of(text, section, key)
                try:
                    cfg.set(section, key, raw)
                except ConfigError as exc:
                    raise ConfigError(f"{source}:{lineno}: {exc}") from None
        return cfg

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), str(path))

    def set(self, section, key, raw):
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        parse = SCHEMA[section][key][0]
        try:
            value = parse(raw) if isinstance(raw, str) else raw
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from None
        self._check(key, value)
        self.values[section][key] = value

    @staticmethod
    def _check(key, value):
        if isinstance(value, float) and math.isnan(value):
            raise ConfigError(f"{key} is NaN")
        if key in POSITIVE and not value > 0:
            raise ConfigError(f"{key} must be positive, got {value}")
        if key in MINIMA and value < MINIMA[key]:
            raise ConfigError(f"{key} must be at least {MINIMA[key]}, got {value}")
        if key == "level" and value not in (0, 1):
            raise ConfigError("level must be 0 or 1")
        if key == "variant" and value not in ("pure_log", "lemma22", "remark24"):
            raise ConfigError(f"unknown profile variant {value!r}")
        if key in ("c", "c_bracket") and value < 0:
            raise ConfigError(f"{key} must be nonnegative")

    def get(self, section, key):
        return self.values[section][key]

    def __getitem__(self, section):
        return self.values[section]

    def as_dict(self):
        return {sec: dict(vals) for sec, vals in self.values.items()}


def describe_defaults():
    """Help text listing every key with its default."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key, (_, default, text) in keys.items():
            lines.append(f"  {key} = {default}    # {text}")
    return "\n".join(lines)
