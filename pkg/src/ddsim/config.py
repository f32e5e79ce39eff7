"""
Run-configuration files.

Format: ``[section]`` headers and ``key = value`` lines; ``#`` starts a
comment. Physical quantities must carry a unit:

=========  =====================================
time       s, ms, us, ns
frequency  Hz, kHz, MHz (cyclic; couplings are converted to rad/s)
field      G, mT, T
gyro       kHz/G, MHz/T
=========  =====================================

Nuclei are declared one per section, ``[nucleus <label>]``, with ``a_perp``,
``a_par`` and either a known ``species`` (1H, 13C) or an explicit ``gamma``.
Parsing collects every problem before raising :class:`ConfigError`.
"""

import re
from dataclasses import dataclass, field

__all__ = ["ConfigError", "RunConfig", "COMMANDS", "parse_config", "required_keys"]

COMMANDS = ("fidelity-map", "diff-map", "spectroscopy", "zstats", "unit-check")

_UNITS = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6},
    "field": {"g": 1.0, "mt": 10.0, "t": 1e4},
    # stored as cyclic Hz per gauss
    "gyro": {"khz/g": 1e3, "mhz/t": 1e6 / 1e4},
}

# key -> (type, required, check); type is a unit family, "int", "float", "str", "bool", "floats"
_POSITIVE = lambda v: v > 0  # noqa: E731
_NONNEG = lambda v: v >= 0  # noqa: E731

_SEQUENCE = {
    "unit": ("str", True, lambda v: v.lower() in ("xy8", "yy8", "cp", "custom") or "xy8 | yy8 | cp | custom"),
    "n_pulses": ("int", False, _POSITIVE),
    "phases": ("floats", False, None),
    "presets": ("str", False, None),
    "pulse_duration": ("time", True, _POSITIVE),
}
_PROTOCOL = {
    "kind": ("str", True, lambda v: v in ("standard", "randomized", "correlated") or "standard | randomized | correlated"),
    "elimination_size": ("int", False, lambda v: v > 1 or "must be > 1"),
    "realizations": ("int", False, _POSITIVE),
}
_GRID = {
    "detuning_min": ("float", False, None), "detuning_max": ("float", False, None),
    "detuning_points": ("int", False, _POSITIVE),
    "amplitude_min": ("float", False, lambda v: v > -1 or "must be > -1"),
    "amplitude_max": ("float", False, None),
    "amplitude_points": ("int", False, _POSITIVE),
}
_ERRORS = {
    "detuning": ("float", False, None),
    "amplitude": ("float", False, lambda v: v > -1 or "must be > -1"),
}
_PLOT = {"clip_min": ("float", False, None), "clip_max": ("float", False, None)}
_RUN = {
    "command": ("str", False, lambda v: v in COMMANDS or " | ".join(COMMANDS)),
    "output": ("str", True, None),
    "seed": ("int", False, lambda v: 0 <= v < 2**64 or "must be a 64-bit unsigned integer"),
    "plot": ("bool", False, None),
    "spacing": ("str", False, lambda v: v in ("edge", "center") or "edge | center"),
    "threads": ("int", False, _POSITIVE),
}
_NUCLEUS = {
    "species": ("str", False, None),
    "gamma": ("gyro", False, None),
    "a_perp": ("frequency", True, _NONNEG),
    "a_par": ("frequency", True, None),
}

# tau is accepted as an alias of pulse_spacing
_MAP_SEQUENCE = dict(_SEQUENCE, pulse_spacing=("time", False, _POSITIVE), tau=("time", False, _POSITIVE),
                     repetitions=("int", True, _POSITIVE))

SCHEMAS = {
    "fidelity-map": {"run": _RUN, "sequence": _MAP_SEQUENCE, "protocol": _PROTOCOL, "grid": _GRID, "plot": _PLOT},
    "diff-map": {"run": _RUN, "sequence": _MAP_SEQUENCE, "protocol_a": _PROTOCOL, "protocol_b": _PROTOCOL,
                 "grid": _GRID, "plot": _PLOT},
    "spectroscopy": {
        "run": _RUN,
        "sequence": dict(_SEQUENCE, total_pulses=("int", True, _POSITIVE)),
        "protocol": _PROTOCOL,
        "errors": _ERRORS,
        "system": {"b_field": ("field", True, _NONNEG)},
        "scan": {"f_min": ("frequency", True, _POSITIVE), "f_max": ("frequency", True, _POSITIVE),
                 "f_step": ("frequency", True, _POSITIVE)},
        "nucleus": _NUCLEUS,
        "plot": _PLOT,
    },
    "zstats": {
        "run": _RUN,
        "protocol": _PROTOCOL,
        "zstats": {"repetitions": ("int", True, _POSITIVE), "samples": ("int", True, _POSITIVE),
                   "bins": ("int", False, _POSITIVE)},
    },
    "unit-check": {
        "run": _RUN,
        "sequence": dict(_MAP_SEQUENCE, repetitions=("int", False, _POSITIVE)),
        "errors": _ERRORS,
    },
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class RunConfig:
    """Validated run configuration. Physical values are SI (s, cyclic Hz, G, Hz/G)."""

    command: str
    output: str
    seed: int = 0
    plot: bool = True
    spacing: str = "center"
    threads: int = None
    sections: dict = field(default_factory=dict)
    nuclei: list = field(default_factory=list)
    text: str = ""

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)


def required_keys(command):
    out = []
    for sec, keys in SCHEMAS[command].items():
        if sec == "nucleus":
            continue
        out += [f"{sec}.{k}" for k, (_, req, _) in keys.items() if req]
    if command in ("fidelity-map", "diff-map", "unit-check"):
        out.append("sequence.pulse_spacing")
    return out


def _convert(kind, raw):
    """Return (value, error message or None)."""
    if kind == "str":
        return raw, None
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True, None
        if low in ("false", "no", "off", "0"):
            return False, None
        return None, f"expected a boolean, got {raw!r}"
    if kind == "floats":
        try:
            return [float(x) for x in raw.replace(",", " ").split()], None
        except ValueError:
            return None, f"expected a list of numbers, got {raw!r}"
    m = _NUMBER.match(raw)
    if not m:
        return None, f"expected a number, got {raw!r}"
    number, unit = m.groups()
    if kind == "int":
        if unit:
            return None, f"unexpected unit {unit!r}"
        try:
            return int(number), None
        except ValueError:
            return None, f"expected an integer, got {raw!r}"
    if kind == "float":
        if unit:
            return None, f"unexpected unit {unit!r} (value is dimensionless)"
        return float(number), None
    if not unit:
        return None, "missing unit"
    scale = _UNITS[kind].get(unit.lower() if unit != "µs" else unit)
    if scale is None:
        allowed = ", ".join(_UNITS[kind])
        return None, f"unknown {kind} unit {unit!r} (allowed: {allowed})"
    return float(number) * scale, None


def _tokenize(text):
    """Yield (lineno, section, key, value) and collect syntax errors."""
    entries, errors = [], []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append(f"line {lineno}: malformed section header {raw.strip()!r}")
                continue
            section = " ".join(line[1:-1].split())
            entries.append((lineno, section, None, None))
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if section is None:
            errors.append(f"line {lineno}: key {key!r} outside of any section")
            continue
        entries.append((lineno, section, key, value))
    return entries, errors


def parse_config(text, command=None):
    """
    Parse and validate a configuration.

    ``command`` (e.g. from the command line) takes precedence over
    ``run.command`` in the file; the two must agree when both are present.

    Raises
    ------
    ConfigError
        Listing every problem found, with line numbers where they apply.
    """
    entries, errors = _tokenize(text)

    file_command = None
    for lineno, sec, key, value in entries:
        if sec == "run" and key == "command":
            file_command = (lineno, value)
    if command is None:
        if file_command is None:
            raise ConfigError(errors + ["missing required key run.command"])
        command = file_command[1]
    elif file_command is not None and file_command[1] != command:
        errors.append(f"line {file_command[0]}: run.command is {file_command[1]!r} but {command!r} was requested")
    if command not in SCHEMAS:
        raise ConfigError(errors + [f"unknown command {command!r} (expected one of {', '.join(COMMANDS)})"])
    schema = SCHEMAS[command]

    sections, nuclei, seen = {}, [], set()
    current = None
    for lineno, sec, key, value in entries:
        if key is None:
            base, _, label = sec.partition(" ")
            if base == "nucleus" and "nucleus" in schema:
                if not label:
                    errors.append(f"line {lineno}: nucleus sections need a label, e.g. [nucleus 1H]")
                current = {"label": label, "_line": lineno}
                nuclei.append(current)
            elif sec in schema:
                if sec in seen:
                    errors.append(f"line {lineno}: duplicate section [{sec}]")
                seen.add(sec)
                current = sections.setdefault(sec, {})
            else:
                errors.append(f"line {lineno}: unknown section [{sec}] for {command}")
                current = None
            continue
        if current is None:
            continue
        keys = schema["nucleus"] if "_line" in current else schema[sec]
        if key not in keys:
            errors.append(f"line {lineno}: unknown key {key!r} in [{sec}]")
            continue
        if key in current:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        kind, _, check = keys[key]
        val, msg = _convert(kind, value)
        if msg is None and check is not None:
            ok = check(val)
            if ok is not True:
                msg = f"out of range value {value!r}" + (f" ({ok})" if isinstance(ok, str) else "")
        if msg is not None:
            errors.append(f"line {lineno}: {sec}.{key}: {msg}" if msg != "missing unit"
                          else f"missing unit at line {lineno} ({sec}.{key} = {value})")
            continue
        current[key] = val

    for name in required_keys(command):
        sec, key = name.split(".")
        if name == "sequence.pulse_spacing":
            continue  # checked with its alias below
        if key not in sections.get(sec, {}):
            errors.append(f"missing required key {name}")
    for nuc in nuclei:
        where = f"[nucleus {nuc['label']}] at line {nuc['_line']}"
        for key in ("a_perp", "a_par"):
            if key not in nuc:
                errors.append(f"{where}: missing required key {key}")
        if "gamma" not in nuc and nuc.get("species", nuc["label"]) not in ("1H", "13C"):
            errors.append(f"{where}: give gamma or a known species (1H, 13C)")
    errors += _cross_checks(command, sections)
    if errors:
        raise ConfigError(errors)

    run = sections.get("run", {})
    return RunConfig(
        command=command,
        output=run["output"],
        seed=run.get("seed", 0),
        plot=run.get("plot", True),
        spacing=run.get("spacing", "center"),
        threads=run.get("threads"),
        sections=sections,
        nuclei=nuclei,
        text=text,
    )


def _cross_checks(command, sections):
    errors = []
    seq = sections.get("sequence", {})
    if command in ("fidelity-map", "diff-map", "unit-check"):
        given = [k for k in ("pulse_spacing", "tau") if k in seq]
        if not given:
            errors.append("missing required key sequence.pulse_spacing (or sequence.tau)")
        elif len(given) == 2:
            errors.append("give only one of sequence.pulse_spacing and sequence.tau")
    if seq.get("unit", "").lower() == "custom" and "phases" not in seq:
        errors.append("sequence.phases is required for unit = custom")
    for name in ("protocol", "protocol_a", "protocol_b"):
        p = sections.get(name, {})
        if p.get("kind") == "correlated" and "elimination_size" not in p:
            errors.append(f"{name}.elimination_size is required for kind = correlated")
    scan = sections.get("scan", {})
    if {"f_min", "f_max"} <= scan.keys() and scan["f_max"] < scan["f_min"]:
        errors.append("scan.f_max must not be below scan.f_min")
    grid = sections.get("grid", {})
    for ax in ("detuning", "amplitude"):
        lo, hi = grid.get(f"{ax}_min"), grid.get(f"{ax}_max")
        if lo is not None and hi is not None and hi <= lo:
            errors.append(f"grid.{ax}_max must exceed grid.{ax}_min")
    plot = sections.get("plot", {})
    if {"clip_min", "clip_max"} <= plot.keys() and plot["clip_max"] < plot["clip_min"]:
        errors.append("plot.clip_max must not be below plot.clip_min")
    return errors
