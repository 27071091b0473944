"""Command-line front end: ``sweep``, ``verify`` and ``report``.

Exit codes: 0 success (rows at a temperature limit included), 1 a bound or
entropy inequality was violated, 2 bad usage or malformed input.

Outputs never contain the wall-clock duration, so reruns are byte-identical;
the duration goes to stderr and to a ``<out>.run.json`` sidecar.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .campaign import CampaignSpec, ladder_hamiltonian, run_campaign
from .files import InputError, complex_pairs, dumps_csv, load_hamiltonian_file, load_state_file
from .search import SearchConfig, bloch_vector, maximize_extraction, optimal_policy
from .sweep import COLUMNS, sweep_eta
from .thermo import evaluate_bounds

log = logging.getLogger("feedback_bounds")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _manifest(command: str, seed: int, config: dict) -> dict:
    return {"command": command, "seed": seed, "config": config, "version": __version__}


def _emit(text: str, out: str, manifest: dict, started: float) -> None:
    duration = time.perf_counter() - started
    log.info("%s finished in %.2f s", manifest["command"], duration)
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
        Path(out + ".run.json").write_text(json.dumps({**manifest, "duration_s": duration}, indent=2) + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from exc


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def _search_cfg(args) -> SearchConfig:
    return SearchConfig(grid_size=args.grid, multistarts=args.multistarts, seed=args.seed)


def _measurement_json(outcome_basis, measurement) -> dict:
    if measurement.dim == 2:
        return {"bloch": [float(x) for x in bloch_vector(measurement)]}
    return {"basis": [complex_pairs(col) for col in outcome_basis.T]}


def cmd_sweep(args) -> int:
    if not (-1 < args.eta_min < args.eta_max < 1):
        raise UsageError("need -1 < eta-min < eta-max < 1")
    if args.steps < 2:
        raise UsageError("steps must be at least 2")
    started = time.perf_counter()
    grid = [round(float(x), 12) + 0.0 for x in np.linspace(args.eta_min, args.eta_max, args.steps)]
    cfg = _search_cfg(args)
    manifest = _manifest(
        "sweep", args.seed, {"eta_min": args.eta_min, "eta_max": args.eta_max, "steps": args.steps, "search": asdict(cfg)}
    )
    rows = [r.as_dict() for r in sweep_eta(grid, cfg, workers=args.workers)]
    if args.format == "csv":
        text = dumps_csv(rows, COLUMNS, manifest)
    else:
        clean = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in r.items()} for r in rows]
        text = _json({"manifest": manifest, "rows": clean})
    _emit(text, args.out, manifest, started)
    undefined = sum(r["status"] != "ok" for r in rows)
    if undefined:
        log.warning("%d rows at a temperature limit marked undefined", undefined)
    return EXIT_OK


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--dims must be comma-separated integers, got {text!r}") from None
    if len(dims) < 2 or any(d < 2 for d in dims):
        raise UsageError(f"--dims needs at least two subsystems of dimension >= 2, got {text!r}")
    return dims


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise UsageError("trials must be at least 1")
    started = time.perf_counter()
    dims = _parse_dims(args.dims)
    roles = tuple(args.roles) if args.roles else ("S", "A") + ("E",) * (len(dims) - 2)
    if len(roles) != len(dims):
        raise UsageError(f"--roles {args.roles!r} does not match {len(dims)} subsystems")
    try:
        spec = CampaignSpec(
            seed=args.seed, dims=dims, roles=roles, ensemble=args.ensemble,
            measurement=args.measurement, hamiltonian=args.hamiltonian, search=_search_cfg(args),
        )
        spec.layout()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    manifest = _manifest("verify", args.seed, {**spec.echo(), "trials": args.trials})
    if args.trial_index is not None:
        from .campaign import run_trial

        records = [run_trial(spec, args.trial_index)]
    else:
        records = run_campaign(spec, args.trials, workers=args.workers)
    n_bad = sum(bool(r["violations"]) for r in records)
    near = sum(1 for r in records if r["report"]["gap_second"] is not None and r["report"]["gap_second"] < 1e-6)
    summary = {"trials": len(records), "violating_trials": n_bad, "near_equality_trials": near}
    if args.format == "csv":
        cols = ["trial", *records[0]["report"].keys(), "violations"]
        flat = [{"trial": r["trial"], **r["report"], "violations": ";".join(r["violations"])} for r in records]
        flat = [{k: ("" if v is None else v) for k, v in row.items()} for row in flat]
        text = dumps_csv(flat, cols, {**manifest, "summary": summary})
    else:
        text = _json({"manifest": manifest, "summary": summary, "trials": records})
    _emit(text, args.out, manifest, started)
    if n_bad:
        log.error("%d of %d trials violate the bound chain; see 'replay' entries", n_bad, len(records))
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_report(args) -> int:
    started = time.perf_counter()
    try:
        state = load_state_file(args.state, renormalize=args.renormalize)
        h = load_hamiltonian_file(args.hamiltonian) if args.hamiltonian else ladder_hamiltonian(state.layout.dim("S"))
    except InputError as exc:
        raise UsageError(str(exc)) from exc
    if h.dim != state.layout.dim("S"):
        raise UsageError(f"Hamiltonian is {h.dim}-dimensional but S is {state.layout.dim('S')}-dimensional")
    cfg = _search_cfg(args)
    best = maximize_extraction(state, h, cfg)
    policy = optimal_policy(state, best.measurement, h)
    rep = evaluate_bounds(state, h, best.measurement, policy, cfg)
    manifest = _manifest(
        "report", args.seed, {"state": str(args.state), "hamiltonian": args.hamiltonian, "search": asdict(cfg)}
    )
    body = {
        **rep.as_dict(),
        "max_E_ext": best.value,
        "optimal_measurement": _measurement_json(best.basis, best.measurement),
        "eof_measurement": _measurement_json(rep.eof_measurement.refined_basis(), rep.eof_measurement),
        "post_spectra": [list(s) for s in rep.post_spectra],
    }
    if args.format == "csv":
        scalars = {k: ("" if v is None else v) for k, v in body.items() if not isinstance(v, (dict, list))}
        text = dumps_csv([scalars], list(scalars), manifest)
    else:
        text = _json({"manifest": manifest, "report": body})
    _emit(text, args.out, manifest, started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="feedback-bounds", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default, seed_default=0, grid=64, starts=16):
        sp.add_argument("--out", default="-", help="output path, '-' for stdout")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--grid", type=int, default=grid, help="coarse-scan points per search")
        sp.add_argument("--multistarts", type=int, default=starts)

    s = sub.add_parser("sweep", help="bound decomposition and maximal extraction across eta")
    s.add_argument("--eta-min", type=float, default=-0.99)
    s.add_argument("--eta-max", type=float, default=0.99)
    s.add_argument("--steps", type=int, default=199)
    common(s, "csv")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="randomized check of the bound chain")
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--dims", default="2,2,2,2")
    v.add_argument("--roles", default=None, help="one letter per subsystem, e.g. SAEE")
    v.add_argument("--ensemble", choices=("haar", "symmetric"), default="haar")
    v.add_argument("--measurement", choices=("random", "optimal"), default="random")
    v.add_argument("--hamiltonian", choices=("ladder", "random"), default="ladder")
    v.add_argument("--trial-index", type=int, default=None, help="rerun a single trial for replay")
    common(v, "json", seed_default=42, grid=32, starts=4)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="full bound report for one state file")
    r.add_argument("--state", required=True)
    r.add_argument("--hamiltonian", default=None, help="Hamiltonian JSON file (default: level ladder, sigma^z for a qubit)")
    r.add_argument("--renormalize", action="store_true")
    common(r, "json")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"feedback-bounds {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
