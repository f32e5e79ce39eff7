"""
Command-line front end::

    ddsim <command> --config FILE [--seed N] [--threads N] [--no-plot] [--output PREFIX]

Commands: fidelity-map, diff-map, spectroscopy, zstats, unit-check. Each run
writes ``<prefix>.csv``, ``<prefix>.meta.json`` and, unless plotting is off,
``<prefix>.svg``. A ``.meta.json`` file can be passed as ``--config`` to
reproduce the run it describes.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from .analysis import measured_offdiag, predict_sequence_offdiag, single_pulse_params, unit_error_constant
from .config import COMMANDS, ConfigError, parse_config
from .constants import GYROMAGNETIC, TWO_PI
from .dynamics import ControlError, NuclearSpin, SpinSystem, sequence_propagator
from .phases import PhaseProtocol
from .sequence import assemble, build_unit, center_spacing, load_presets
from .smallmat import unitarity_error
from .svg import render_svg

__all__ = ["main", "run", "write_csv", "format_float", "load_config_file"]

CSV_HEADERS = {
    "fidelity-map": ("detuning_over_omega", "relative_amp_error", "fidelity", "stderr"),
    "diff-map": ("detuning_over_omega", "relative_amp_error", "fidelity_difference", "stderr"),
    "spectroscopy": ("dd_frequency_khz", "signal", "signal_ideal", "stderr"),
    "zstats": ("bin_low", "bin_high", "count"),
    "unit-check": ("quantity", "value"),
}


def format_float(x):
    """Shortest round-trip representation; independent of locale. Integers stay integers."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else format_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_config_file(path):
    """Return (config text, recorded seed or None) from a config or ``.meta.json`` file."""
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        meta = json.loads(text)
        return meta["config_text"], meta.get("seed")
    return text, None


def _protocol(section, seed):
    kind = section["kind"]
    return PhaseProtocol(kind, section.get("elimination_size") if kind == "correlated" else None, seed)


def _map_unit(cfg):
    seq = cfg.sections["sequence"]
    presets = load_presets(seq["presets"]) if "presets" in seq else None
    spacing = seq.get("pulse_spacing", seq.get("tau"))
    tau = center_spacing(spacing, seq["pulse_duration"], cfg.spacing)
    return build_unit(seq["unit"], tau, seq["pulse_duration"], n_pulses=seq.get("n_pulses"),
                      phases=seq.get("phases"), presets=presets)


def _map_spec(cfg, protocol_section, seed):
    grid = cfg.sections.get("grid", {})
    seq = cfg.sections["sequence"]
    det = ex.default_axis(grid.get("detuning_min", -0.3), grid.get("detuning_max", 0.3), grid.get("detuning_points", 61))
    amp = ex.default_axis(grid.get("amplitude_min", -0.3), grid.get("amplitude_max", 0.3), grid.get("amplitude_points", 61))
    proto = cfg.sections[protocol_section]
    return ex.FidelityMapSpec(
        unit=_map_unit(cfg), M=seq["repetitions"], protocol=_protocol(proto, seed),
        detuning_axis=tuple(det), amplitude_axis=tuple(amp),
        realizations=proto.get("realizations", 100),
    )


def _spectroscopy_spec(cfg, seed):
    seq, scan = cfg.sections["sequence"], cfg.sections["scan"]
    nuclei = []
    for nuc in cfg.nuclei:
        gamma = TWO_PI * nuc["gamma"] if "gamma" in nuc else GYROMAGNETIC[nuc.get("species", nuc["label"])]
        nuclei.append(NuclearSpin(TWO_PI * nuc["a_perp"], TWO_PI * nuc["a_par"], gamma, nuc["label"]))
    system = SpinSystem(tuple(nuclei), cfg.sections["system"]["b_field"])
    n = int(round((scan["f_max"] - scan["f_min"]) / scan["f_step"])) + 1
    freqs = scan["f_min"] + scan["f_step"] * np.arange(n)
    proto = cfg.sections["protocol"]
    errors = cfg.sections.get("errors", {})
    return ex.SpectroscopySpec(
        system=system, frequency_axis=tuple(freqs), unit_kind=seq["unit"],
        total_pulses=seq["total_pulses"], pulse_duration=seq["pulse_duration"],
        protocol=_protocol(proto, seed), realizations=proto.get("realizations", 50),
        detuning_fraction=errors.get("detuning", 0.1), amplitude_error=errors.get("amplitude", 0.1),
        n_pulses=seq.get("n_pulses"), custom_phases=tuple(seq["phases"]) if "phases" in seq else None,
        presets=load_presets(seq["presets"]) if "presets" in seq else None, spacing=cfg.spacing,
    )


def _grid_rows(result, columns):
    x, y = result.axes.values()
    for i, xv in enumerate(x):
        for j, yv in enumerate(y):
            yield (xv, yv) + tuple(c[i, j] for c in columns)


def _unit_check(cfg):
    seq = cfg.sections["sequence"]
    errors = cfg.sections.get("errors", {})
    unit = _map_unit(cfg)
    omega = np.pi / seq["pulse_duration"]
    err = ControlError.relative(errors.get("detuning", 0.0), errors.get("amplitude", 0.0), omega)
    params = single_pulse_params(err, omega, seq["pulse_duration"])
    c = unit_error_constant(unit, err, omega)
    M = seq.get("repetitions", 1)
    u = sequence_propagator(SpinSystem(), assemble(unit, M, [0.0] * M), err, omega)
    numeric = measured_offdiag(u)
    predicted = predict_sequence_offdiag(c, c.epsilon, np.zeros(M))
    rel = abs(numeric - predicted) / abs(predicted) if abs(predicted) > 0 else float("nan")
    rows = [
        ("alpha", params.alpha), ("beta", params.beta), ("epsilon", params.epsilon),
        ("residual", params.residual), ("c_real", c.c.real), ("c_imag", c.c.imag), ("c_abs", abs(c.c)),
        ("degenerate", int(c.degenerate)), ("repetitions", int(M)),
        ("offdiag_numeric_abs", abs(numeric)), ("offdiag_predicted_abs", abs(predicted)),
        ("relative_deviation", rel), ("unitarity_error", unitarity_error(u)),
    ]
    provenance = {"experiment": "unit-check", "unit": ex._unit_record(unit), "omega_rad_s": omega,
                  "detuning_fraction": errors.get("detuning", 0.0), "amplitude_error": errors.get("amplitude", 0.0),
                  "package_version": __version__}
    return rows, provenance


def run(cfg, seed=None, threads=None, plot=None, output=None):
    """
    Execute a validated :class:`~ddsim.config.RunConfig` and write its outputs.

    Returns the process exit status (0 on success).
    """
    seed = cfg.seed if seed is None else seed
    plot = cfg.plot if plot is None else plot
    threads = threads if threads is not None else cfg.threads
    prefix = Path(output or cfg.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_name(prefix.name + ".csv")
    header = CSV_HEADERS[cfg.command]
    result = None
    extra_meta = {}

    if cfg.command == "fidelity-map":
        result = ex.run_fidelity_map(_map_spec(cfg, "protocol", seed), threads)
        write_csv(csv_path, header, _grid_rows(result, (result.values, result.stderr)))
    elif cfg.command == "diff-map":
        result = ex.run_difference_map(_map_spec(cfg, "protocol_a", seed), _map_spec(cfg, "protocol_b", seed), threads)
        write_csv(csv_path, header, _grid_rows(result, (result.values, result.stderr)))
    elif cfg.command == "spectroscopy":
        result = ex.run_spectroscopy(_spectroscopy_spec(cfg, seed), threads)
        f = result.axes["dd_frequency_khz"]
        write_csv(csv_path, header, zip(f, result.values, result.extra["signal_ideal"], result.stderr))
    elif cfg.command == "zstats":
        z = cfg.sections["zstats"]
        edges, counts, summary, provenance = ex.run_zstats(
            _protocol(cfg.sections["protocol"], seed), z["repetitions"], z["samples"], z.get("bins", 40))
        write_csv(csv_path, header, zip(edges[:-1], edges[1:], counts))
        write_csv(prefix.with_name(prefix.name + ".summary.csv"),
                  ("M", "samples", "mean_abs_z2", "stderr", "inverse_m"),
                  [tuple(summary[k] for k in ("M", "samples", "mean_abs_z2", "stderr", "inverse_m"))])
        extra_meta["provenance"] = provenance
        print(f"mean |Z|^2 = {summary['mean_abs_z2']:.6g} +/- {summary['stderr']:.2g} (1/M = {summary['inverse_m']:.6g})")
    elif cfg.command == "unit-check":
        rows, provenance = _unit_check(cfg)
        write_csv(csv_path, header, ((k, v) for k, v in rows))
        extra_meta["provenance"] = provenance
        for k, v in rows:
            print(f"{k:>22s} {v:.6g}")

    if result is not None:
        extra_meta["provenance"] = result.provenance
        if plot:
            p = cfg.sections.get("plot", {})
            clip = (p["clip_min"], p["clip_max"]) if {"clip_min", "clip_max"} <= p.keys() else None
            svg = render_svg(result, title=f"{cfg.command} ({prefix.name})", clip=clip)
            if svg is not None:
                prefix.with_name(prefix.name + ".svg").write_text(svg, encoding="utf-8")

    meta = {
        "command": cfg.command,
        "seed": int(seed),
        "spacing_convention": cfg.spacing,
        "package_version": __version__,
        "config_text": cfg.text,
        "csv_sha256": hashlib.sha256(csv_path.read_bytes()).hexdigest(),
        **extra_meta,
    }
    prefix.with_name(prefix.name + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    return 0


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def build_parser():
    parser = argparse.ArgumentParser(prog="ddsim", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="run configuration, or a .meta.json sidecar to reproduce")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${ex.THREADS_ENV} or 1)")
    parser.add_argument("--no-plot", action="store_true")
    parser.add_argument("--output", default=None, help="override the output prefix")
    parser.add_argument("--version", action="version", version=f"ddsim {__version__}")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text, recorded_seed = load_config_file(args.config)
    except (OSError, ValueError, KeyError) as exc:
        print(f"ddsim: cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text, command=args.command)
    except ConfigError as exc:
        print(f"ddsim: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else recorded_seed
    try:
        return run(cfg, seed=seed, threads=args.threads, plot=False if args.no_plot else None, output=args.output)
    except OSError as exc:
        print(f"ddsim: I/O error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ddsim {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
