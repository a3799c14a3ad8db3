"""Command-line interface.

Exit codes: 0 success, 1 failed check or unexpected error, 2 unstable network,
64 usage / invalid parameters, 70 numerical singularity, 74 I/O failure.

Parameter precedence: built-in defaults < ``--config`` file < explicit flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import closedform as cf
from .analysis import (
    AxisSpec,
    LossTable,
    NoBoundaryError,
    Quantity,
    cross_validate,
    entanglement_region,
    find_boundary,
    reproduce_table,
    sweep,
)
from .model import ConfigError, SystemConfig, build_state_space, load_config, validate_config
from .spectra import SingularResolventError, Spectra, squeezing_spectra
from .stability import StabilityError, stability_report

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNSTABLE = 2
EXIT_USAGE = 64
EXIT_SOFTWARE = 70
EXIT_IO = 74

# flag destination -> SystemConfig field
CONFIG_FLAGS = {
    "x": "x", "y": "y", "alpha": "alpha", "kappa_scale": "kappa_scale", "kappa": "kappa_override",
    "gamma_r": "gamma_r", "theta1": "theta1", "theta2": "theta2", "phi1": "phi1", "phi2": "phi2",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    subcommand: str
    config: SystemConfig
    axes: list[AxisSpec] = field(default_factory=list)
    out: str | None = None
    format: str = "json"
    engine: str = "closed-form"

    def to_json(self) -> str:
        return json.dumps({
            "subcommand": self.subcommand,
            "config": self.config.to_dict(),
            "axes": [a.to_dict() for a in self.axes],
            "out": self.out,
            "format": self.format,
            "engine": self.engine,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        doc = json.loads(text)
        return cls(
            subcommand=doc["subcommand"],
            config=validate_config(doc["config"]),
            axes=[AxisSpec(**a) for a in doc.get("axes", [])],
            out=doc.get("out"),
            format=doc.get("format", "json"),
            engine=doc.get("engine", "closed-form"),
        )


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("network parameters")
    g.add_argument("--config", help="JSON file with SystemConfig fields")
    g.add_argument("--x", type=float, help="pump ratio, epsilon = x * gamma_r")
    g.add_argument("--y", type=float, help="decay divisor, gamma = gamma_r / y")
    g.add_argument("--alpha", type=float, help="channel transmission")
    g.add_argument("--kappa-scale", dest="kappa_scale", type=float, help="kappa per unit x")
    g.add_argument("--kappa", type=float, help="set kappa directly")
    g.add_argument("--gamma-r", dest="gamma_r", type=float, help="reference decay rate")
    for name in ("theta1", "theta2", "phi1", "phi2"):
        g.add_argument(f"--{name}", type=float)
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--manifest", help="also write the resolved run manifest (JSON) here")


def _resolve_config(args: argparse.Namespace) -> SystemConfig:
    raw: dict[str, Any] = {}
    if args.config:
        raw.update(load_config(args.config).to_dict())
    for dest, name in CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            raw[name] = value
    return validate_config(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dualnopa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stability", help="Hurwitz and closed-form stability verdicts")
    _add_config_flags(p)

    p = sub.add_parser("spectra", help="squeezing spectra at one or more frequencies")
    _add_config_flags(p)
    p.add_argument("--omega", action="append", default=None,
                   help="frequency in rad/s; repeat or comma-separate (default 0)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--engine", choices=("state-space", "closed-form", "both"), default="state-space")

    p = sub.add_parser("optimize", help="optimal output phase compensation")
    _add_config_flags(p)

    p = sub.add_parser("boundary", help="roots of V_im(m) = 2 and the entangled region")
    _add_config_flags(p)

    p = sub.add_parser("sweep", help="evaluate a quantity on a parameter grid")
    _add_config_flags(p)
    p.add_argument("--axis", action="append", required=True, metavar="NAME:LO:HI:COUNT")
    p.add_argument("--quantity", choices=[q.value for q in Quantity], default=Quantity.V_PS.value)
    p.add_argument("--db", action="store_true", help="report spectra in dB")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--engine", choices=("closed-form", "state-space", "both"), default="closed-form")

    p = sub.add_parser("tables", help="boundary-root tables for transmission and amplification loss")
    _add_config_flags(p)
    p.add_argument("--which", choices=("transmission", "amplification", "both"), default="both")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("validate", help="closed-form vs state-space cross-check on random configs")
    _add_config_flags(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=True)


def _omegas(values: Sequence[str] | None) -> list[float]:
    if not values:
        return [0.0]
    out = []
    for chunk in values:
        for part in chunk.split(","):
            try:
                out.append(float(part))
            except ValueError:
                raise UsageError(f"bad --omega value {part!r}") from None
    return out


def cmd_stability(args: argparse.Namespace, cfg: SystemConfig) -> int:
    report = stability_report(cfg)
    _emit(_dumps({"stable": report.hurwitz, **report.to_dict()}), args.out)
    return EXIT_OK if report.hurwitz else EXIT_UNSTABLE


def cmd_spectra(args: argparse.Namespace, cfg: SystemConfig) -> int:
    omegas = _omegas(args.omega)
    ph = cfg.phases
    if args.engine != "state-space" and any(w != 0.0 for w in omegas):
        raise UsageError("the closed-form engine is only defined at omega = 0")
    rows = []
    ss = build_state_space(cfg)
    for w in omegas:
        if args.engine == "closed-form":
            v = cf.v_pm(cfg.rates, ph.m, ph.n, ph.phi)
            spec = Spectra(w, v, v)
        else:
            spec = squeezing_spectra(ss, w)
        row = {k: spec.to_dict()[k] for k in ("omega", "v_plus", "v_minus", "v_total", "v_plus_db", "entangled")}
        if args.engine == "both":
            row["v_closed_form"] = cf.v_pm(cfg.rates, ph.m, ph.n, ph.phi)
        rows.append(row)
    if args.format == "json":
        _emit(_dumps(rows), args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_cell(v) for v in row.values()])
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def cmd_optimize(args: argparse.Namespace, cfg: SystemConfig) -> int:
    ph = cfg.phases
    plan = cf.optimal_phi(cfg.rates, ph.m, ph.n)
    doc = {
        "m": ph.m, "n": ph.n, "phi": ph.phi, "canonical": ph.canonical,
        **plan.to_dict(),
        "v_ps": cf.v_ps(cfg.rates, ph.m, ph.n),
        "v_nops": cf.v_nops(cfg.rates),
    }
    _emit(_dumps(doc), args.out)
    return EXIT_OK


def cmd_boundary(args: argparse.Namespace, cfg: SystemConfig) -> int:
    rates = cfg.rates
    try:
        roots = find_boundary(rates)
        doc: dict[str, Any] = roots.to_dict()
    except NoBoundaryError as exc:
        doc = {"boundary": None, "entangled_everywhere": exc.entangled_everywhere, "message": str(exc)}
    doc["region"] = [iv.to_dict() for iv in entanglement_region(rates)]
    _emit(_dumps(doc), args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, cfg: SystemConfig) -> int:
    try:
        axes = [AxisSpec.parse(a) for a in args.axis]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    engine = "closed-form" if args.engine == "both" else args.engine
    try:
        grid = sweep(cfg, args.quantity, axes, db=args.db, engine=engine)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    status = EXIT_OK
    if args.engine == "both":
        check = sweep(cfg, args.quantity, axes, db=args.db, engine="state-space")
        diff = abs(grid.values - check.values) / (1.0 + abs(grid.values))
        worst = float(diff.max()) if diff.count() else 0.0
        print(f"max deviation closed-form vs state-space: {worst:.3g}", file=sys.stderr)
        if worst > 1e-9:
            status = EXIT_FAIL
    _emit(grid.to_json() if args.format == "json" else grid.to_csv(), args.out)
    return status


def cmd_tables(args: argparse.Namespace, cfg: SystemConfig) -> int:
    which = ["transmission", "amplification"] if args.which == "both" else [args.which]
    tables = {w: reproduce_table(LossTable(w), cfg) for w in which}
    ok = all(r.passed for rows in tables.values() for r in rows)
    if args.format == "json":
        _emit(_dumps({w: [r.to_dict() for r in rows] for w, rows in tables.items()}), args.out)
    else:
        lines = []
        for w, rows in tables.items():
            lines.append(f"{w} loss (x=0.4, y=1)")
            lines.append(f"  {'row':<30} {'m1':>10} {'m2':>10} {'ref m1':>10} {'ref m2':>10}  status")
            for r in rows:
                lines.append(f"  {r.label:<30} {r.roots.m1:>10.5f} {r.roots.m2:>10.5f} "
                             f"{r.reference[0]:>10.5f} {r.reference[1]:>10.5f}  {'PASS' if r.passed else 'FAIL'}")
            lines.append("")
        _emit("\n".join(lines), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_validate(args: argparse.Namespace, cfg: SystemConfig) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    result = cross_validate(args.samples, args.seed, base=cfg)
    _emit(_dumps({"seed": args.seed, **result.to_dict()}), args.out)
    return EXIT_OK if result.passed else EXIT_FAIL


COMMANDS = {
    "stability": cmd_stability,
    "spectra": cmd_spectra,
    "optimize": cmd_optimize,
    "boundary": cmd_boundary,
    "sweep": cmd_sweep,
    "tables": cmd_tables,
    "validate": cmd_validate,
}


def _manifest(args: argparse.Namespace, cfg: SystemConfig) -> RunManifest:
    axes = [AxisSpec.parse(a) for a in getattr(args, "axis", None) or []]
    fmt = getattr(args, "format", "json")
    return RunManifest(args.command, cfg, axes, args.out, fmt, getattr(args, "engine", "closed-form"))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.manifest:
            try:
                manifest = _manifest(args, cfg)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            _emit(manifest.to_json(), args.manifest)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"dualnopa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StabilityError as exc:
        print(f"dualnopa: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except SingularResolventError as exc:
        print(f"dualnopa: {exc}", file=sys.stderr)
        return EXIT_SOFTWARE
    except OSError as exc:
        print(f"dualnopa: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"dualnopa: bad JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
