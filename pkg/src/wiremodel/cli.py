"""``wiremodel`` command line: predict, simulate, fit, validate, export-tables."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from pathlib import Path

from . import __version__, _kernels
from .emodel import (
    PlanningWarning,
    TransmissionParams,
    default_registry_path,
    load_codec_registry,
    save_codec_registry,
)
from .framing import Codec, export_layouts, layout_for
from .linksim.sweep import measure_ppl_sweep, read_sweep_csv, write_sweep_csv
from .planner import fit_sweep, predict, stats_json, validate
from .pplmodel import (
    SYMMETRIC_ANTENNA_SETS,
    AntennaSet,
    CoefficientTable,
    MissingCoefficientRow,
    ModulationScheme,
    WirelessConfig,
    builtin_table,
)

log = logging.getLogger("wiremodel")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _parse_snrs(text: str) -> list[float]:
    """``0:30`` / ``0:30:0.5`` (inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise UsageError(f"bad SNR range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1.0
        if step <= 0 or hi < lo:
            raise UsageError(f"bad SNR range {text!r}")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 10) for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def _parse_antennas(text: str) -> list[AntennaSet]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower().replace("(", "").replace(")", "")
        if not tok:
            continue
        sep = "x" if "x" in tok else ":"
        n, m = tok.split(sep)
        out.append(AntennaSet(int(n), int(m)))
    return out


def _profile_name(codec: str, mode: int) -> str:
    return f"{Codec.parse(codec).label}-{mode}"


def _load_profiles(args):
    path = args.codec_registry or default_registry_path()
    return load_codec_registry(path)


def _load_table(args) -> CoefficientTable:
    src = args.coeff_table or "builtin"
    return builtin_table() if src == "builtin" else CoefficientTable.load(src)


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _manifest(command: str, config: dict, out):
    if out in (None, "-"):
        return
    doc = {"tool": "wiremodel", "version": __version__, "command": command, "config": config}
    Path(str(out) + ".manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _records_to_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(records)
    return buf.getvalue()


def cmd_predict(args) -> int:
    profiles = _load_profiles(args)
    name = args.profile or _profile_name(args.codec, args.mode)
    if name not in profiles:
        raise UsageError(f"codec profile {name!r} not in registry ({', '.join(profiles)})")
    profile = profiles[name]
    table = _load_table(args)
    cfg = WirelessConfig(ModulationScheme.parse(args.modulation), AntennaSet(args.n_tx, args.m_rx), args.snr)
    params = TransmissionParams.default(profile.band, is_=args.is_, id_=args.id_, advantage=args.advantage)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PlanningWarning)
        pred = predict(profile, cfg, table, params, args.burst_r)
    for w in caught:
        log.warning("%s", w.message)
    rec = pred.to_json()
    if args.format == "csv":
        _emit(_records_to_csv([rec]), args.out)
    else:
        _emit(json.dumps(rec, indent=2) + "\n", args.out)
    _manifest("predict", {**_common(args), "profile": name, "modulation": cfg.modulation.value,
                          "n_tx": args.n_tx, "m_rx": args.m_rx, "snr_db": args.snr, "is": args.is_,
                          "id": args.id_, "advantage": args.advantage, "burst_r": args.burst_r}, args.out)
    return EXIT_OK


def _common(args) -> dict:
    return {
        "codec_registry": str(args.codec_registry or default_registry_path()),
        "coeff_table": str(args.coeff_table or "builtin"),
        "format": args.format,
    }


def cmd_simulate(args) -> int:
    layout = layout_for(args.codec, args.mode)
    mods = [ModulationScheme.parse(m) for m in args.modulation.split(",")]
    ants = _parse_antennas(args.antennas)
    snrs = _parse_snrs(args.snr)
    if args.frames < 1:
        raise UsageError("--frames must be >= 1")
    results = measure_ppl_sweep(layout, mods, ants, snrs, args.channel, args.frames, args.seed)
    text = write_sweep_csv(results)
    _emit(text, args.out)
    _manifest("simulate", {"format": "csv",
        "codec": layout.codec.value, "mode": layout.mode, "modulations": [m.value for m in mods],
        "antennas": [[a.n_tx, a.m_rx] for a in ants], "snr_db": snrs, "channel": args.channel,
        "frames": args.frames, "seed": args.seed, "snr_definition": "total tx power / N0 per rx antenna (Es/N0)",
        "crc": "crc8-9b-v1", "kernel_backend": _kernels.backend(),
    }, args.out)
    return EXIT_OK


def _read_sweeps(paths):
    out = []
    for p in paths:
        try:
            out.extend(read_sweep_csv(p))
        except OSError:
            raise
        except ValueError as exc:
            raise UsageError(f"malformed sweep CSV: {exc}") from None
    return out


def cmd_fit(args) -> int:
    measurements = _read_sweeps(args.sweep)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PlanningWarning)
        fits, table = fit_sweep(measurements, args.ppl_limit)
    for w in caught:
        log.warning("%s", w.message)
    report = [f.to_json() for f in fits]
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    table_out = args.table_out
    if table_out is None and args.out not in (None, "-"):
        table_out = str(Path(args.out).with_suffix("")) + ".table.json"
    if table_out:
        table.save(table_out)
    _manifest("fit", {"sweeps": [str(p) for p in args.sweep], "ppl_limit": args.ppl_limit, "format": "json",
                      "table_out": table_out}, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    profiles = _load_profiles(args)
    table = _load_table(args)
    names = [n.strip() for n in args.codecs.split(",")] if args.codecs else list(profiles)
    for n in names:
        if n not in profiles:
            raise UsageError(f"codec profile {n!r} not in registry")
    shared, per = [], {}
    for spec in args.sweep:
        if "=" in spec:
            name, path = spec.split("=", 1)
            per.setdefault(name, []).append(path)
        else:
            shared.append(spec)
    by_codec = {}
    for n in names:
        paths = per.get(n, shared)
        if not paths:
            raise UsageError(f"no sweep given for codec {n}")
        by_codec[n] = _read_sweeps(paths)
    limit = None if args.ppl_limit is not None and args.ppl_limit < 0 else args.ppl_limit
    try:
        per_codec, pooled, points = validate(by_codec, table, profiles, limit)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = {
        "per_codec": {k: stats_json(v) for k, v in per_codec.items()},
        "pooled": stats_json(pooled),
        "ppl_limit": limit,
        "reference": {"note": "published QPSK AMR-WB mode 2 comparison, for orientation only",
                      "pcc": 0.9846, "rmse": 2.6841},
    }
    if args.format == "csv":
        _emit(_records_to_csv(points), args.out)
    else:
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    _manifest("validate", {**_common(args), "sweeps": args.sweep, "codecs": names, "ppl_limit": limit}, args.out)
    return EXIT_OK


def cmd_export_tables(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    builtin_table().save(out / "coefficients.builtin.json")
    export_layouts(out / "layouts.json")
    profiles = _load_profiles(args)
    save_codec_registry(profiles, out / "codecs.json")
    _manifest("export-tables", {"codec_registry": str(args.codec_registry or default_registry_path()),
                                "files": ["coefficients.builtin.json", "layouts.json", "codecs.json"]}, out / "export")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--codec-registry", help="codec profile JSON (default: bundled example, values user-supplied)")
    common.add_argument("--coeff-table", help="coefficient table JSON or 'builtin' (default)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output path ('-' or omitted: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--channel", choices=("identity", "rayleigh"), default="rayleigh")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="wiremodel", description=__doc__)
    p.add_argument("--version", action="version", version=f"wiremodel {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("predict", parents=[common], help="Ppl', Ie,eff, R and MOS from wireless parameters")
    sp.add_argument("--modulation", required=True)
    sp.add_argument("--n-tx", type=int, required=True)
    sp.add_argument("--m-rx", type=int, required=True)
    sp.add_argument("--snr", type=float, required=True, help="SNR in dB")
    sp.add_argument("--codec", default="AMR_WB")
    sp.add_argument("--mode", type=int, default=2)
    sp.add_argument("--profile", help="registry profile name (overrides --codec/--mode)")
    sp.add_argument("--is", dest="is_", type=float, default=0.0)
    sp.add_argument("--id", dest="id_", type=float, default=0.0)
    sp.add_argument("--advantage", type=float, default=0.0)
    sp.add_argument("--burst-r", type=float, default=None)
    sp.set_defaults(func=cmd_predict)

    ss = sub.add_parser("simulate", parents=[common], help="Monte-Carlo Ppl sweep to CSV")
    ss.add_argument("--modulation", default="QPSK", help="comma list")
    ss.add_argument("--antennas", default=",".join(f"{a.n_tx}x{a.m_rx}" for a in SYMMETRIC_ANTENNA_SETS))
    ss.add_argument("--snr", default="0:30", help="lo:hi[:step] in dB (inclusive) or a comma list")
    ss.add_argument("--frames", type=int, default=500, help="frames per grid point")
    ss.add_argument("--codec", default="AMR_WB")
    ss.add_argument("--mode", type=int, default=8)
    ss.set_defaults(func=cmd_simulate)

    sf = sub.add_parser("fit", parents=[common], help="fit power laws to sweep CSVs")
    sf.add_argument("sweep", nargs="+", help="sweep CSV(s); same grid points are pooled")
    sf.add_argument("--table-out", help="where to write the fitted coefficient table")
    sf.add_argument("--ppl-limit", type=float, default=20.0)
    sf.set_defaults(func=cmd_fit)

    sv = sub.add_parser("validate", parents=[common], help="E-model(Ppl) vs E-model(Ppl')")
    sv.add_argument("sweep", nargs="+", help="sweep CSV, or PROFILE=CSV to bind a sweep to one codec")
    sv.add_argument("--codecs", help="comma list of registry profile names (default: all)")
    sv.add_argument("--ppl-limit", type=float, default=20.0, help="drop points above this Ppl; negative keeps all")
    sv.set_defaults(func=cmd_validate)

    se = sub.add_parser("export-tables", parents=[common], help="write builtin coefficient, layout and codec tables")
    se.set_defaults(func=cmd_export_tables)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="wiremodel: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, MissingCoefficientRow, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"wiremodel: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"wiremodel: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AssertionError, ArithmeticError) as exc:
        print(f"wiremodel: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
