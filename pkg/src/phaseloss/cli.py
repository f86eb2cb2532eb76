"""Command-line front end: ``phaseloss {qfi,tradeoff,optimize,validate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import TOL
from .fisher import (
    commutator_expectation,
    measured_fisher_phase_sld,
    precision_from_information,
    qfi_matrix,
)
from .fock_core import ProbeState, make_probe
from .optimizer import OptimizerSettings, evaluate_weights, optimize
from .probes import library_probe

log = logging.getLogger("phaseloss")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3

OBJECTIVE_FLAGS = {"joint": "joint_delta", "phase": "phase_only"}

DEFAULTS = {
    "n": None,
    "eta": None,
    "eta_grid": None,
    "probe": "noon",
    "probes": ["noon", "hb", "phase_opt", "joint_opt"],
    "objective": "joint",
    "seed": 0,
    "multistart": 16,
    "out": None,
    "format": "csv",
    "n_budget": 8,
    "check": ["all"],
    "loss_information": "measured",
}


class UsageError(Exception):
    pass


class WeightsFileError(ValueError):
    pass


def fmt(v) -> str:
    """Deterministic float text; infinities become the literal ``inf``."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


# -- weights files ------------------------------------------------------------


def read_weights(path) -> tuple[ProbeState, list[str]]:
    warnings = []
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise WeightsFileError(f"{path}: cannot read ({exc})") from exc
    if not lines or [c.strip() for c in lines[0].split(",")] != ["k", "x_k"]:
        raise WeightsFileError(f"{path}:1: expected header 'k,x_k'")
    xs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [c.strip() for c in line.split(",")]
        if len(parts) != 2:
            raise WeightsFileError(f"{path}:{lineno}: expected two columns")
        try:
            k, x = int(parts[0]), float(parts[1])
        except ValueError:
            raise WeightsFileError(f"{path}:{lineno}: cannot parse {line!r}") from None
        if k != len(xs):
            raise WeightsFileError(f"{path}:{lineno}: expected k={len(xs)}, got {k}")
        if not math.isfinite(x) or x < 0:
            raise WeightsFileError(f"{path}:{lineno}: weight must be finite and non-negative")
        xs.append(x)
    if len(xs) < 2:
        raise WeightsFileError(f"{path}: need rows for k = 0..n with n >= 1")
    total = math.fsum(xs)
    if total <= 0:
        raise WeightsFileError(f"{path}: weights sum to zero")
    if abs(total - 1) > 1e-9:
        msg = f"{path}: weights sum to {total!r}; renormalizing"
        log.warning(msg)
        warnings.append(msg)
    return make_probe(xs), warnings


def write_weights(path, x):
    with open(path, "w", newline="") as fh:
        fh.write("k,x_k\n")
        for k, v in enumerate(x):
            fh.write(f"{k},{fmt(v)}\n")


# -- tables -------------------------------------------------------------------


def write_table(path: Path | None, columns, rows, fmt_tag="csv"):
    if fmt_tag == "json":
        text = json.dumps([dict(zip(columns, r)) for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
        text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return [_json_default(v) for v in o.tolist()] if o.ndim else _json_default(o.item())
    if isinstance(o, (np.floating, float)):
        return fmt(o) if not math.isfinite(o) else float(o)
    if isinstance(o, np.integer):
        return int(o)
    raise TypeError(type(o))


def write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def write_manifest(out: Path, command, config, seed, wall, warnings):
    write_json(
        out / f"{command}_manifest.json",
        {
            "command": command,
            "config": config,
            "seed": seed,
            "tolerances": asdict(TOL),
            "wall_time_s": round(wall, 3),
            "warning_count": len(warnings),
            "warnings": warnings,
            "version": __version__,
        },
    )


# -- config resolution -----------------------------------------------------------


def resolve(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if isinstance(cfg["n"], int):
        cfg["n"] = [cfg["n"]]
    return cfg


def eta_values(cfg) -> list[float]:
    if cfg["eta_grid"] is not None:
        start, stop, count = cfg["eta_grid"]
        count = int(count)
        if count < 1:
            raise UsageError("--eta-grid count must be positive")
        etas = [float(e) for e in np.linspace(float(start), float(stop), count)]
    elif cfg["eta"] is not None:
        etas = [float(e) for e in np.atleast_1d(cfg["eta"])]
    else:
        raise UsageError("one of --eta or --eta-grid is required")
    for e in etas:
        if not (0 < e < 1):
            raise UsageError(f"eta={e!r} must lie strictly inside (0, 1)")
    return etas


def settings_from(cfg, objective=None) -> OptimizerSettings:
    obj = objective or OBJECTIVE_FLAGS[cfg["objective"]]
    return OptimizerSettings(
        objective=obj,
        seed=int(cfg["seed"]),
        multistart=int(cfg["multistart"]),
        loss_information=cfg["loss_information"],
    )


def _out_dir(cfg) -> Path | None:
    if cfg["out"] is None:
        return None
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands -------------------------------------------------------------------

QFI_COLUMNS = [
    "probe",
    "n",
    "eta",
    "I_phiphi",
    "I_etaeta",
    "I_phieta",
    "I_etaeta_measured",
    "commutator_abs",
    "delta_phi",
    "delta_eta",
    "delta",
]


def _probes_for(cfg, eta, warnings):
    sel = cfg["probe"]
    if sel.startswith("file:"):
        probe, w = read_weights(sel[5:])
        warnings.extend(w)
        return [(sel, probe)]
    if not cfg["n"]:
        raise UsageError("--n is required for this probe selector")
    out = []
    for n in cfg["n"]:
        if sel == "optimize":
            res = optimize(n, eta, settings_from(cfg))
            if not res.converged:
                warnings.append(f"optimizer did not converge for n={n} eta={eta}")
            out.append((f"optimized_{cfg['objective']}", make_probe(res.x)))
        else:
            out.append((sel, library_probe(sel, n)))
    return out


def cmd_qfi(cfg) -> int:
    warnings = []
    t0 = time.perf_counter()
    rows = []
    for eta in eta_values(cfg):
        for label, probe in _probes_for(cfg, eta, warnings):
            q = qfi_matrix(probe, eta)
            m = measured_fisher_phase_sld(probe, eta)
            prec = precision_from_information(m.phiphi, m.etaeta)
            rows.append(
                [
                    label,
                    probe.n,
                    eta,
                    q.phiphi,
                    q.etaeta,
                    q.phieta,
                    m.etaeta,
                    abs(commutator_expectation(probe, eta)),
                    prec.delta_phi,
                    prec.delta_eta,
                    prec.delta_total,
                ]
            )
    out = _out_dir(cfg)
    ext = "json" if cfg["format"] == "json" else "csv"
    write_table(out / f"qfi.{ext}" if out else None, QFI_COLUMNS, rows, cfg["format"])
    if out:
        write_manifest(out, "qfi", cfg, cfg["seed"], time.perf_counter() - t0, warnings)
    return EXIT_OK


TRADEOFF_COLUMNS = [
    "eta",
    "probe",
    "I_phiphi",
    "I_etaeta_measured",
    "I_etaeta_quantum",
    "delta_phi",
    "delta_eta",
    "delta",
    "converged",
]


def cmd_tradeoff(cfg) -> int:
    warnings = []
    t0 = time.perf_counter()
    if not cfg["n"] or len(cfg["n"]) != 1:
        raise UsageError("tradeoff needs a single --n")
    n = cfg["n"][0]
    etas = eta_values(cfg)
    out = _out_dir(cfg)
    if out is None:
        raise UsageError("tradeoff needs --out")
    ext = "json" if cfg["format"] == "json" else "csv"
    for label in cfg["probes"]:
        rows = []
        for eta in etas:
            converged = True
            if label in ("phase_opt", "joint_opt"):
                obj = "phase_only" if label == "phase_opt" else "joint_delta"
                res = optimize(n, eta, settings_from(cfg, obj))
                converged = res.converged
                if not converged:
                    warnings.append(f"{label}: no convergence at eta={eta}")
                x = res.x
            else:
                x = library_probe(label, n).weights
            r = evaluate_weights(x, eta)
            rows.append(
                [eta, label, r.i_phi, r.i_eta_measured, r.i_eta_quantum, r.delta_phi, r.delta_eta, r.delta, converged]
            )
        write_table(out / f"tradeoff_{label}.{ext}", TRADEOFF_COLUMNS, rows, cfg["format"])
    write_manifest(out, "tradeoff", cfg, cfg["seed"], time.perf_counter() - t0, warnings)
    if warnings:
        log.warning("%d warnings, see manifest", len(warnings))
    return EXIT_OK


def cmd_optimize(cfg) -> int:
    warnings = []
    t0 = time.perf_counter()
    if not cfg["n"]:
        raise UsageError("--n is required")
    out = _out_dir(cfg)
    if out is None:
        raise UsageError("optimize needs --out")
    settings = settings_from(cfg)
    summaries = []
    all_converged = True
    for n in cfg["n"]:
        for eta in eta_values(cfg):
            res = optimize(n, eta, settings)
            all_converged &= res.converged
            stem = f"weights_n{n}_eta{fmt(eta)}_{cfg['objective']}"
            write_weights(out / f"{stem}.csv", res.x)
            summaries.append(
                {
                    "n": n,
                    "eta": eta,
                    "objective_name": res.objective_name,
                    "objective": res.objective,
                    "converged": res.converged,
                    "gradient_norm": res.gradient_norm,
                    "active_set": list(res.active_set),
                    "warm_start": res.best_start,
                    "weights_file": f"{stem}.csv",
                    "starts": [asdict(s) for s in res.starts],
                }
            )
            if not res.converged:
                warnings.append(f"no convergence for n={n} eta={eta}")
    write_json(out / "optimize_summary.json", summaries)
    write_manifest(out, "optimize", cfg, cfg["seed"], time.perf_counter() - t0, warnings)
    return EXIT_OK if all_converged else EXIT_PARTIAL


def cmd_validate(cfg) -> int:
    from .validation import run_checks

    t0 = time.perf_counter()
    results = run_checks(checks=cfg["check"], n_budget=int(cfg["n_budget"]), seed=int(cfg["seed"]))
    report = [asdict(r) for r in results]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: error={r.error:.3e} tol={r.tolerance:.1e}")
    out = _out_dir(cfg)
    if out:
        write_json(out / "validate_report.json", report)
        write_manifest(out, "validate", cfg, cfg["seed"], time.perf_counter() - t0, [])
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


COMMANDS = {"qfi": cmd_qfi, "tradeoff": cmd_tradeoff, "optimize": cmd_optimize, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseloss", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--n", type=int, nargs="+", help="photon number(s)")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--eta", type=float, nargs="+", help="transmissivity value(s)")
        g.add_argument("--eta-grid", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
        p.add_argument("--objective", choices=sorted(OBJECTIVE_FLAGS))
        p.add_argument("--loss-information", choices=["measured", "quantum"])
        p.add_argument("--seed", type=int)
        p.add_argument("--multistart", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=["csv", "json"])

    p = sub.add_parser("qfi", help="Fisher information table for a probe")
    shared(p)
    p.add_argument("--probe", help="noon | hb | fock | uniform | file:PATH | optimize")

    p = sub.add_parser("tradeoff", help="precision trade-off over an eta grid")
    shared(p)
    p.add_argument("--probes", nargs="+", help="subset of noon hb fock uniform phase_opt joint_opt")

    p = sub.add_parser("optimize", help="optimal probe weights")
    shared(p)

    p = sub.add_parser("validate", help="run the cross-check suite")
    shared(p)
    p.add_argument("--n-budget", type=int, help="largest n for the dense oracle checks")
    p.add_argument("--check", nargs="+", help="identity oracle sld gld commutator, or all")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except ValueError as exc:  # weights files, domain errors, bad probe choices
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
