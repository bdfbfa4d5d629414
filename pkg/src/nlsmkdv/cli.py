"""Command-line front end.

    nlsmkdv --command spectrum --input pot.json --output spec.json --n-spec 6
    nlsmkdv verify --output report.json --tol.xi_identity 1e-7

Flags override values from an optional ``--config`` JSON file.  Exit status is
0 on success, 1 on a numerical failure (including a failed identity), 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import abelian, discriminant, flows, hierarchy, spectrum, verify
from .potentials import Potential, potential_from_json

COMMANDS = ("discriminant", "spectrum", "actions", "verify", "flow", "hamiltonians")
EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- serialisation -----------------------------------------------------------------


def _num(x):
    """Complex or real scalar as an ``[re, im]`` pair of 17-significant-digit floats."""
    z = complex(x)
    return [float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")]


def _encode(obj):
    """Recursively turn floats and complex numbers into ``[re, im]`` pairs."""
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, complex, np.floating, np.complexfloating)):
        if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
            return None
        return _num(obj)
    return obj


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=False)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


# -- argument handling -------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="nlsmkdv", description=__doc__.splitlines()[0])
    p.add_argument("command_pos", nargs="?", metavar="COMMAND", help=f"one of {COMMANDS}")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--input", help="potential JSON (or a corpus file for verify)")
    p.add_argument("--output", help="output path (stdout for JSON commands if omitted)")
    p.add_argument("--n-modes", type=int, help="resample the input onto this many modes")
    p.add_argument("--n-spec", type=int, help="spectral index range |n| <= N")
    p.add_argument("--levels", help="comma-separated action levels k")
    p.add_argument("--nodes", type=int, help="contour quadrature nodes")
    p.add_argument("--lam-min", type=float)
    p.add_argument("--lam-max", type=float)
    p.add_argument("--lam-imag", type=float, help="imaginary part of the sweep line")
    p.add_argument("--n-lam", type=int, help="number of sweep points")
    p.add_argument("--field", choices=flows.FIELDS)
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--record-every", type=int)
    p.add_argument("--seed", type=int, help="generate a random corpus with this seed for verify")
    p.add_argument("--heavy", type=int, help="corpus entries that get the spectral checks")
    return p


DEFAULTS = {
    "n_spec": 4, "levels": "1", "nodes": None, "lam_min": -10.0, "lam_max": 10.0,
    "lam_imag": 0.0, "n_lam": 201, "field": "mkdv_defocusing", "t_end": 0.01, "dt": 1e-5,
    "record_every": 100, "seed": None, "heavy": 2, "n_modes": None,
}


def _split_tolerances(argv):
    """Pull ``--tol.<name> value`` / ``--tol.<name>=value`` out of argv."""
    rest, tols = [], {}
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--tol."):
            if "=" in a:
                key, val = a[6:].split("=", 1)
            else:
                if i + 1 >= len(argv):
                    raise UsageError(f"{a} needs a value")
                key, val = a[6:], argv[i + 1]
                i += 1
            try:
                tols[key] = float(val)
            except ValueError:
                raise UsageError(f"--tol.{key}: not a number: {val!r}")
        else:
            rest.append(a)
        i += 1
    return rest, tols


def _read_json(path, what):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path}: malformed JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}")


def build_config(argv):
    """Merge defaults, config file and flags into one dict."""
    argv, tols = _split_tolerances(list(argv))
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:  # --help
            raise
        raise UsageError("invalid arguments") from exc
    cfg = dict(DEFAULTS)
    cfg["tolerances"] = {}
    if ns.config:
        file_cfg = _read_json(ns.config, "config file")
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for k, v in file_cfg.items():
            key = k.replace("-", "_")
            if key == "tolerances":
                cfg["tolerances"].update({str(a): float(b) for a, b in v.items()})
            else:
                cfg[key] = v
    for k, v in vars(ns).items():
        if k in ("command_pos", "config") or v is None:
            continue
        cfg[k] = v
    cfg["tolerances"].update(tols)
    if ns.command_pos and ns.command and ns.command_pos != ns.command:
        raise UsageError(f"conflicting commands {ns.command_pos!r} and {ns.command!r}")
    cfg["command"] = ns.command or ns.command_pos or cfg.get("command")
    if cfg["command"] not in COMMANDS:
        raise UsageError(f"command must be one of {COMMANDS}, got {cfg['command']!r}")
    for key, val in cfg["tolerances"].items():
        if key not in verify.DEFAULT_TOLERANCES:
            raise UsageError(f"unknown tolerance {key!r}")
        if not val >= verify.MIN_TOLERANCE:
            raise UsageError(f"tolerance {key}={val:g} is below the floor {verify.MIN_TOLERANCE:g}")
    if cfg["command"] != "verify" and not cfg.get("input"):
        raise UsageError(f"{cfg['command']} needs --input")
    if cfg["command"] in ("discriminant", "flow") and not cfg.get("output"):
        raise UsageError(f"{cfg['command']} writes a CSV and needs --output")
    if cfg.get("output"):
        parent = Path(cfg["output"]).resolve().parent
        if not parent.is_dir():
            raise UsageError(f"output directory does not exist: {parent}")
    return cfg


def _load_input(cfg) -> Potential:
    data = _read_json(cfg["input"], "input file")
    try:
        phi = potential_from_json(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"input file {cfg['input']}: {exc}")
    if cfg.get("n_modes"):
        n = int(cfg["n_modes"])
        phi = Potential(phi.minus.truncate(n), phi.plus.truncate(n))
    return phi


def _real_u(phi: Potential):
    if not (phi.is_diagonal and phi.minus.is_real()):
        return None
    return phi.minus.as_real()


# -- commands ----------------------------------------------------------------------


def cmd_discriminant(cfg):
    phi = _load_input(cfg)
    lams = np.linspace(cfg["lam_min"], cfg["lam_max"], int(cfg["n_lam"])) + 1j * cfg["lam_imag"]
    discriminant.write_sweep_csv(cfg["output"], phi, lams)
    return EXIT_OK


def cmd_spectrum(cfg):
    phi = _load_input(cfg)
    n_spec = int(cfg["n_spec"])
    out = {"zs": spectrum.spectrum_to_json(spectrum.zs_spectrum(phi, n_spec))}
    u = _real_u(phi)
    if u is not None:
        out["hill"] = spectrum.spectrum_to_json(spectrum.hill_spectrum(u, n_spec))
    _write_json(cfg.get("output"), _encode(out))
    return EXIT_OK


def _levels(cfg):
    try:
        return [int(k) for k in str(cfg["levels"]).split(",") if k.strip()]
    except ValueError:
        raise UsageError(f"--levels: expected comma-separated integers, got {cfg['levels']!r}")


def _action_rows(records):
    return [{"n": r.n, "k": r.k, "kind": r.kind, "value": complex(r.value),
             "quad_error": r.quad_error, "contour": {"center": r.contour.center,
                                                     "radius": r.contour.radius,
                                                     "n_points": r.contour.n_points}}
            for r in records]


def cmd_actions(cfg):
    phi = _load_input(cfg)
    n_spec = int(cfg["n_spec"])
    levels = _levels(cfg)
    nodes = cfg.get("nodes")
    curve = abelian.SpectralCurve.zs(phi, n_spec)
    records = []
    for n in range(-n_spec, n_spec + 1):
        for k in levels:
            try:
                records.append(abelian.action_I(phi, n, k, curve=curve, n_points=nodes))
            except ValueError as exc:
                print(f"skipping I_({n},{k}): {exc}", file=sys.stderr)
    out = {"I": _action_rows(records)}
    u = _real_u(phi)
    if u is not None:
        hcurve = abelian.SpectralCurve.hill(u, n_spec)
        jrec = [abelian.action_J(u, n, k, curve=hcurve, n_points=nodes)
                for n in range(1, n_spec + 1) for k in levels]
        out["J"] = _action_rows(jrec)
    _write_json(cfg.get("output"), _encode(out))
    return EXIT_OK


def cmd_hamiltonians(cfg):
    phi = _load_input(cfg)
    out = {f"S{k}": hierarchy.eval_hamiltonian(f"S{k}", phi) for k in range(1, 5)}
    if phi.is_diagonal:
        u = phi.minus
        out.update({f"K{m}": hierarchy.eval_hamiltonian(f"K{m}", u) for m in (1, 2)})
    _write_json(cfg.get("output"), _encode(out))
    return EXIT_OK


def cmd_flow(cfg):
    phi = _load_input(cfg)
    field = cfg["field"]
    spec = flows.FlowSpec(field, float(cfg["t_end"]), float(cfg["dt"]), int(cfg["record_every"]))
    if field.startswith("mkdv"):
        u = _real_u(phi)
        if u is None:
            raise UsageError(f"{field} needs a real diagonal potential (diagonal_of)")
        traj = flows.evolve(u, spec)
        which = ["mean", "K1", "K2"]
    else:
        traj = flows.evolve(phi, spec)
        which = ["mean", "S1", "S2", "S3", "S4"]
    flows.dump_trajectory_csv(traj, cfg["output"])
    drift = flows.conservation_report(traj, which)
    summary = {"field": field, "t_end": float(traj.times[-1]), "records": len(traj),
               "max_tail": traj.max_tail, "drift": drift}
    _write_json(str(Path(cfg["output"]).with_suffix(".json")), _encode(summary))
    return EXIT_OK


def cmd_verify(cfg):
    if cfg.get("seed") is not None:
        corpus = verify.generate_corpus(int(cfg["seed"]))
    elif cfg.get("input"):
        try:
            corpus = verify.load_corpus(cfg["input"])
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise UsageError(f"corpus {cfg['input']}: {exc}")
    else:
        corpus = verify.load_corpus()
    results = verify.run_suite(corpus, cfg["tolerances"], n_spec=int(cfg["n_spec"]),
                               heavy=int(cfg["heavy"]), flow_t_end=float(cfg["t_end"]),
                               flow_dt=float(cfg["dt"]))
    for r in results:
        if not r.passed:
            print(r.message(), file=sys.stderr)
    report = verify.report_json(results)
    if cfg.get("output"):
        Path(cfg["output"]).write_text(report + "\n")
    else:
        print(report)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} identities pass", file=sys.stderr)
    return EXIT_OK if n_fail == 0 else EXIT_NUMERIC


HANDLERS = {
    "discriminant": cmd_discriminant,
    "spectrum": cmd_spectrum,
    "actions": cmd_actions,
    "verify": cmd_verify,
    "flow": cmd_flow,
    "hamiltonians": cmd_hamiltonians,
}

# exceptions from inner modules, reported with the module that raised them
_NUMERIC_ERRORS = {
    spectrum.SpectrumError: "spectrum",
    abelian.BranchTrackingError: "abelian",
    flows.FlowBlowUpError: "flows",
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = build_config(argv)
        return HANDLERS[cfg["command"]](cfg)
    except UsageError as exc:
        print(f"nlsmkdv: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except tuple(_NUMERIC_ERRORS) as exc:
        module = next(m for cls, m in _NUMERIC_ERRORS.items() if isinstance(exc, cls))
        print(f"nlsmkdv: {module}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, ArithmeticError, RuntimeError) as exc:
        print(f"nlsmkdv: {type(exc).__module__.split('.')[-1]}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
