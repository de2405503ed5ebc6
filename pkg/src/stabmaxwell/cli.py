"""Command-line driver: ``stabmaxwell convergence|solve|verify|cfl``.

Configuration is a flat ``key = value`` file plus ``--key value`` overrides;
the command line wins. Exit codes: 0 success, 1 property failure or I/O
error, 2 configuration error (including a refused CFL check), 3 numerical
blow-up.
"""

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import checks
from .analysis import EnergyMonitor
from .coefficients import CoefficientField
from .mesh import build_structured_mesh
from .study import convergence_study, solve_manufactured
from .timestepper import (BlowUpError, CFLError, SnapshotWriter, build_operators, cfl_max_tau,
                          estimate_stability_threshold, init_state, run)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3

DEFAULTS = {
    "problem": "manufactured",
    "problem.m": 6,
    "mesh.levels": [3, 4, 5, 6],
    "time.T": 0.25,
    "time.tau": 0.0005,
    "time.cfl_C": 2.0,
    "time.cfl_override": False,
    "time.start": "taylor",
    "coeff.sigma_scale": 0.001,
    "coeff.box": [0.25, 0.75, 0.25, 0.75],
    "coeff.homogeneous": False,
    "error.l2": "nodal",
    "output.dir": "out",
    "output.every": 50,
    "seed": 0,
    "verify.samples": 1000,
    "verify.mutation": "none",
    "verify.tau": None,
    "cfl.steps": 200,
}
ALIASES = {"coeff.m": "problem.m", "mesh.level": "mesh.levels",
           "verify.leapfrog_tau": "verify.tau"}


class ConfigError(ValueError):
    pass


def _convert(key, raw):
    default = DEFAULTS.get(key)
    text = str(raw).strip()
    try:
        if isinstance(default, bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float) or key == "verify.tau":
            return None if text.lower() == "none" else float(text)
        if isinstance(default, list):
            items = [s for s in text.strip("[]").replace(",", " ").split() if s]
            conv = int if all(isinstance(v, int) for v in default) else float
            return [conv(s) for s in items]
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return text


def read_config_file(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
    return values


def load_config(path=None, overrides=None):
    """Merge defaults, an optional file and overrides into a typed dict."""
    raw = {}
    if path:
        raw.update(read_config_file(path))
    raw.update(overrides or {})
    cfg = dict(DEFAULTS)
    for key, value in raw.items():
        key = ALIASES.get(key, key)
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = _convert(key, value)
    levels = cfg["mesh.levels"]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ConfigError("mesh.levels must be nonempty and increasing")
    if not all(1 <= lv <= 12 for lv in levels):
        raise ConfigError("mesh levels must lie in 1..12")
    if cfg["time.tau"] <= 0 or cfg["time.T"] <= 0:
        raise ConfigError("time.tau and time.T must be positive")
    if cfg["problem"] not in ("manufactured", "zero"):
        raise ConfigError(f"unknown problem {cfg['problem']!r}")
    if cfg["time.start"] not in ("taylor", "plain"):
        raise ConfigError("time.start must be 'taylor' or 'plain'")
    if cfg["error.l2"] not in ("nodal", "quadrature"):
        raise ConfigError("error.l2 must be 'nodal' or 'quadrature'")
    if cfg["verify.mutation"] not in ("none", "flip_divdiv"):
        raise ConfigError("verify.mutation must be 'none' or 'flip_divdiv'")
    return cfg


def coefficient_field(cfg):
    if cfg["coeff.homogeneous"]:
        return CoefficientField.vacuum()
    return CoefficientField(m=cfg["problem.m"], sigma_scale=cfg["coeff.sigma_scale"],
                            box=tuple(cfg["coeff.box"]))


def _write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def cmd_convergence(cfg):
    m = cfg["problem.m"]
    report = convergence_study(
        m, cfg["mesh.levels"], cfg["time.tau"], cfg["time.T"], start=cfg["time.start"],
        l2=cfg["error.l2"], cfl_C=cfg["time.cfl_C"], cfl_override=cfg["time.cfl_override"],
        field=coefficient_field(cfg))
    out = cfg["output.dir"]
    _write(os.path.join(out, f"table_m{m}.csv"), report.to_csv())
    _write(os.path.join(out, f"table_m{m}.md"), report.to_markdown())
    _write(os.path.join(out, f"table_m{m}.json"), report.to_json())
    print(report.to_markdown(), end="")
    return EXIT_OK


def cmd_solve(cfg):
    if len(cfg["mesh.levels"]) != 1:
        raise ConfigError("solve needs exactly one mesh level (--mesh.level L)")
    level = cfg["mesh.levels"][0]
    field = coefficient_field(cfg)
    tau, T, out = cfg["time.tau"], cfg["time.T"], cfg["output.dir"]
    monitor = EnergyMonitor()
    snaps = SnapshotWriter(out, cfg["output.every"])
    common = dict(observers=[monitor, snaps], cfl_C=cfg["time.cfl_C"],
                  cfl_override=cfg["time.cfl_override"])
    if cfg["problem"] == "manufactured":
        state, ops, _, _ = solve_manufactured(cfg["problem.m"], level, tau, T,
                                              start=cfg["time.start"], field=field, **common)
    else:
        mesh = build_structured_mesh(level)
        ops = build_operators(mesh, field, tau)
        zero = np.zeros(mesh.ndof)
        state, _ = run(mesh, field, None, T, tau, state=init_state(zero, zero, tau), ops=ops,
                       **common)
    if state.k % snaps.every:       # the final level is always written
        snaps.every = 1
        snaps(state, ops)
    _write(os.path.join(out, "energy.csv"), monitor.to_csv())
    print(f"wrote {len(snaps.result)} snapshots and {len(monitor.result)} energy rows to {out}")
    return EXIT_OK


def cmd_verify(cfg):
    stab = -1.0 if cfg["verify.mutation"] == "flip_divdiv" else 1.0
    results = checks.run_all(coercivity_samples=cfg["verify.samples"],
                             leapfrog_tau=cfg["verify.tau"], stab_scale=stab)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(failed))
        return EXIT_FAIL
    return EXIT_OK


def cmd_cfl(cfg):
    field = coefficient_field(cfg)
    C = cfg["time.cfl_C"]
    target_tau = cfg["time.tau"]
    rows = []
    prev = None
    for level in cfg["mesh.levels"]:
        mesh = build_structured_mesh(level)
        bound = cfl_max_tau(mesh, field, C)
        thr = estimate_stability_threshold(mesh, field, n_steps=cfg["cfl.steps"], seed=cfg["seed"])
        rows.append({"level": level, "h": mesh.h, "formula_tau": float(bound),
                     "empirical_tau": float(thr),
                     "ratio_to_previous": None if prev is None else thr / prev,
                     "tau_stable": bool(target_tau <= thr)})
        prev = thr
    path = os.path.join(cfg["output.dir"], "cfl.csv")
    os.makedirs(cfg["output.dir"], exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v)
                             for k, v in row.items()})
    for row in rows:
        ratio = row["ratio_to_previous"]
        print(f"l={row['level']} h={row['h']:g} formula(C={C:g})={row['formula_tau']:.6g} "
              f"empirical={row['empirical_tau']:.6g}"
              + ("" if ratio is None else f" ratio={ratio:.3f}"))
    top = max(cfg["mesh.levels"])
    verdict = "stable" if all(r["tau_stable"] for r in rows) else "NOT stable"
    print(f"tau={target_tau:g} {verdict} at all levels l <= {top}")
    return EXIT_OK


COMMANDS = {"convergence": cmd_convergence, "solve": cmd_solve, "verify": cmd_verify,
            "cfl": cmd_cfl}


def _split_overrides(extra):
    overrides = {}
    it = iter(extra)
    for token in it:
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise ConfigError(f"missing value for --{key}") from None
        overrides[key] = value
    return overrides


def main(argv=None):
    parser = argparse.ArgumentParser(prog="stabmaxwell", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, _split_overrides(extra))
    except (ConfigError, OSError) as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CFLError as exc:
        print(f"cfl: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except OSError as exc:
        print(f"io: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
