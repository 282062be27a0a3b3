"""Command line front end.

Subcommands: simulate | compare | wincheck | sweep-e | ellipsoids | bench.
Scenario files are plain `key = value` text in a fixed key vocabulary;
outputs are CSV and JSON plot data, never figures.  Units: km, km/rad,
rad, km^3/s^2.  Timing uses a monotonic clock and excludes file I/O.

Exit codes: 0 ok, 2 scenario/config error, 3 singular or blown-up
computation, 4 violated wincheck precondition.
"""

import argparse
import csv
import dataclasses
import importlib.resources
import json
import os
import statistics
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .game import GameConfig, propagate_analytical
from .numerical_baseline import NumericalBlowup, integrate_riccati_backward, simulate_numerical
from .orbital_core import ReferenceOrbit
from .riccati import SingularFactor, WeightSet
from .winning import (
    NotHovering,
    SingularBlock,
    TerminalSets,
    attacker_wins,
    classify_outcome,
    ellipsoid_at,
    scan_quadratics,
)

_SCENARIO_KEYS = (
    "mu", "p", "e", "f0", "ff", "h_f",
    "r_a", "r_d", "s_ar", "s_av", "s_dar", "s_dav",
    "xa0", "xda0", "R1", "R2",
)
_VECTOR_KEYS = ("xa0", "xda0")


class ScenarioError(ValueError):
    """Scenario file cannot be parsed or validated."""


class PreconditionError(ValueError):
    """A subcommand precondition (hovering states, admissible Rd0) failed."""


@dataclass(frozen=True)
class ScenarioFile:
    """Parsed scenario in the exact key vocabulary of the file format."""

    mu: float
    p: float
    e: float
    f0: float
    ff: float
    h_f: float
    r_a: float
    r_d: float
    s_ar: float
    s_av: float
    s_dar: float
    s_dav: float
    xa0: np.ndarray
    xda0: np.ndarray
    R1: float
    R2: float

    def to_config(self):
        orbit = ReferenceOrbit(mu=self.mu, p=self.p, e=self.e)
        weights = WeightSet(
            r_a=self.r_a, r_d=self.r_d,
            s_ar=self.s_ar, s_av=self.s_av,
            s_dar=self.s_dar, s_dav=self.s_dav,
        )
        return GameConfig(
            orbit=orbit, weights=weights,
            f0=self.f0, ff=self.ff, h_f=self.h_f,
            r1=self.R1, r2=self.R2,
            x_a0=self.xa0, x_da0=self.xda0,
        )

    def to_sets(self):
        return TerminalSets(r1=self.R1, r2=self.R2)


@dataclass(frozen=True)
class SummaryRecord:
    """One method's run summary, serialized with these exact field names."""

    method: str
    dist_at: float
    dist_da: float
    J: float
    wall_seconds: float
    outcome: str
    f_capture: Optional[float]
    f_intercept: Optional[float]

    def to_dict(self):
        return dataclasses.asdict(self)


def _parse_value(key, raw, line_no):
    parts = [s.strip() for s in raw.split(",")] if key in _VECTOR_KEYS else [raw]
    try:
        values = [float(s) for s in parts]
    except ValueError:
        raise ScenarioError(f"line {line_no}: value for {key} is not numeric: {raw!r}")
    if key in _VECTOR_KEYS:
        if len(values) != 6:
            raise ScenarioError(
                f"line {line_no}: {key} needs 6 comma-separated numbers, got {len(values)}"
            )
        return np.array(values)
    return values[0]


def parse_scenario(path):
    """Parse a `key = value` scenario file; errors carry line numbers."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path!r}: {exc}")
    seen = {}
    for line_no, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ScenarioError(f"line {line_no}: expected 'key = value', got {text!r}")
        key, raw = (s.strip() for s in text.split("=", 1))
        if key not in _SCENARIO_KEYS:
            raise ScenarioError(f"line {line_no}: unknown key {key!r}")
        if key in seen:
            raise ScenarioError(f"line {line_no}: duplicate key {key!r}")
        seen[key] = _parse_value(key, raw, line_no)
    missing = [k for k in _SCENARIO_KEYS if k not in seen]
    if missing:
        raise ScenarioError(f"missing keys: {', '.join(missing)}")
    return ScenarioFile(**seen)


def _resolve_scenario(name):
    """Accept a filesystem path or the bare name of a packaged scenario."""
    if os.path.exists(name):
        return name
    packaged = importlib.resources.files("tadgame") / "scenarios" / f"{name}.cfg"
    if packaged.is_file():
        return str(packaged)
    raise ScenarioError(f"scenario {name!r} not found (no such file or packaged scenario)")


def _load(name):
    scenario = parse_scenario(_resolve_scenario(name))
    try:
        config = scenario.to_config()
    except ValueError as exc:
        raise ScenarioError(str(exc))
    return scenario, config


def _fmt(x):
    return f"{float(x):.15g}"


def write_trajectory_csv(path, traj):
    header = (
        ["f"]
        + [f"xa{i}" for i in range(1, 7)]
        + [f"xda{i}" for i in range(1, 7)]
        + [f"ua{i}" for i in range(1, 4)]
        + [f"ud{i}" for i in range(1, 4)]
        + ["dist_at", "dist_da"]
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(traj.grid.shape[0]):
            row = (
                [traj.grid[k]]
                + list(traj.x_a[k]) + list(traj.x_da[k])
                + list(traj.u_a[k]) + list(traj.u_d[k])
                + [traj.dist_at[k], traj.dist_da[k]]
            )
            writer.writerow([_fmt(v) for v in row])


def read_trajectory_csv(path):
    """Inverse of write_trajectory_csv, for round-trip checks."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows)
    return header, data


def _run_analytical(config):
    t0 = time.perf_counter()
    traj = propagate_analytical(config)
    return traj, time.perf_counter() - t0


def _run_numerical(config):
    t0 = time.perf_counter()
    pgrid = integrate_riccati_backward(config)
    traj = simulate_numerical(config, pgrid)
    return traj, time.perf_counter() - t0


_RUNNERS = {"analytical": _run_analytical, "numerical": _run_numerical}


def _summarize(method, traj, seconds, sets):
    outcome = classify_outcome(traj, sets)
    return SummaryRecord(
        method=method,
        dist_at=float(traj.dist_at[-1]),
        dist_da=float(traj.dist_da[-1]),
        J=float(traj.cost),
        wall_seconds=float(seconds),
        outcome=outcome.tag.value,
        f_capture=outcome.f_capture,
        f_intercept=outcome.f_intercept,
    )


def _emit_json(payload, out_path):
    text = json.dumps(payload, indent=2)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_simulate(args):
    scenario, config = _load(args.scenario)
    traj, seconds = _RUNNERS[args.method](config)
    record = _summarize(args.method, traj, seconds, scenario.to_sets())
    if args.out_traj:
        write_trajectory_csv(args.out_traj, traj)
    _emit_json(record.to_dict(), args.out_summary)
    return 0


def _rel_err(a, b):
    """Relative difference of a against reference b."""
    return abs(a - b) / abs(b)


def cmd_compare(args):
    scenario, config = _load(args.scenario)
    sets = scenario.to_sets()
    ana, t_ana = _run_analytical(config)
    num, t_num = _run_numerical(config)
    rec_a = _summarize("analytical", ana, t_ana, sets)
    rec_n = _summarize("numerical", num, t_num, sets)
    payload = {
        "analytical": rec_a.to_dict(),
        "numerical": rec_n.to_dict(),
        "rel_err_dist_at": _rel_err(rec_a.dist_at, rec_n.dist_at),
        "rel_err_dist_da": _rel_err(rec_a.dist_da, rec_n.dist_da),
        "rel_err_J": _rel_err(rec_a.J, rec_n.J),
        "time_ratio": t_num / t_ana,
    }
    _emit_json(payload, args.out)
    return 0


def cmd_wincheck(args):
    scenario, config = _load(args.scenario)
    if args.rd0 is not None:
        parts = [s.strip() for s in args.rd0.split(",")]
        if len(parts) != 3:
            raise ScenarioError(f"--rd0 needs 3 comma-separated numbers, got {args.rd0!r}")
        try:
            rd0 = [float(s) for s in parts]
        except ValueError:
            raise ScenarioError(f"--rd0 is not numeric: {args.rd0!r}")
        try:
            config = config.with_defender_position(rd0)
        except ValueError as exc:
            raise PreconditionError(str(exc))
    try:
        fs, v1, v2 = scan_quadratics(config)
        wins, f_a = attacker_wins(config)
    except NotHovering as exc:
        raise PreconditionError(str(exc))
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["f", "g1", "g2"])
            for k in range(fs.shape[0]):
                writer.writerow([_fmt(fs[k]), _fmt(v1[k]), _fmt(v2[k])])
    if f_a is None:
        f_an = None
    else:
        idx = int(round((f_a - config.f0) / config.h_f))
        f_an = float(config.grid[idx - 1])
    _emit_json({"attacker_wins": wins, "f_a": f_a, "f_an": f_an}, None)
    return 0


def cmd_sweep_e(args):
    scenario, _ = _load(args.scenario)
    e_values = []
    if args.e_list.strip():
        try:
            e_values = [float(s) for s in args.e_list.split(",")]
        except ValueError:
            raise ScenarioError(f"--e-list is not numeric: {args.e_list!r}")
    rows = []
    for e in e_values:
        row = {"e": _fmt(e), "attacker_wins": "", "f_a": "",
               "min_g1": "", "min_g2": "", "error": ""}
        try:
            config = dataclasses.replace(scenario, e=e).to_config()
            fs, v1, v2 = scan_quadratics(config)
            wins, f_a = attacker_wins(config)
            row["attacker_wins"] = "true" if wins else "false"
            row["f_a"] = _fmt(f_a) if f_a is not None else ""
            row["min_g1"] = _fmt(v1.min())
            row["min_g2"] = _fmt(v2.min())
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    fields = ["e", "attacker_wins", "f_a", "min_g1", "min_g2", "error"]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_ellipsoids(args):
    scenario, config = _load(args.scenario)
    try:
        f_values = [float(s) for s in args.f_list.split(",")] if args.f_list.strip() else []
    except ValueError:
        raise ScenarioError(f"--f-list is not numeric: {args.f_list!r}")
    fields = (
        ["f", "set"]
        + [f"g{i}{j}" for i in range(1, 4) for j in range(1, 4)]
        + ["cx", "cy", "cz", "radius", "error"]
    )
    rows = []
    for f in f_values:
        for which in ("S1", "S2"):
            row = dict.fromkeys(fields, "")
            row["f"], row["set"] = _fmt(f), which
            try:
                ell = ellipsoid_at(config, f, which)
            except NotHovering as exc:
                raise PreconditionError(str(exc))
            except SingularBlock as exc:
                row["error"] = f"SingularBlock: {exc}"
                rows.append(row)
                continue
            for i in range(3):
                for j in range(3):
                    row[f"g{i + 1}{j + 1}"] = _fmt(ell.g[i, j])
            for axis, name in enumerate(("cx", "cy", "cz")):
                row[name] = _fmt(ell.center_offset[axis])
            row["radius"] = _fmt(ell.radius)
            rows.append(row)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_bench(args):
    if args.reps < 3:
        print("bench: --reps must be at least 3", file=sys.stderr)
        return 2
    _, config = _load(args.scenario)
    times = {"analytical": [], "numerical": []}
    for method in ("analytical", "numerical"):
        for _ in range(args.reps):
            _, seconds = _RUNNERS[method](config)
            times[method].append(seconds)
    payload = {}
    for method, values in times.items():
        payload[method] = {
            "median_s": statistics.median(values),
            "min_s": min(values),
            "reps": args.reps,
        }
    payload["speedup_median"] = payload["numerical"]["median_s"] / payload["analytical"]["median_s"]
    payload["speedup_min"] = payload["numerical"]["min_s"] / payload["analytical"]["min_s"]
    _emit_json(payload, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tadgame",
        description=(
            "Analytical pursuit-evasion game solver on elliptic reference orbits. "
            "Scenario files use `key = value` lines with the keys "
            "mu (km^3/s^2), p (km), e, f0/ff/h_f (rad), r_a/r_d/s_ar/s_av/s_dar/s_dav "
            "(weights), xa0/xda0 (6 comma-separated, km and km/rad, tilde frame), "
            "R1/R2 (km). A bare scenario name (e.g. reference) loads a packaged scenario."
        ),
        epilog="Exit codes: 0 ok, 2 scenario/config error, 3 singular/blown-up "
               "computation, 4 violated wincheck precondition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one method and summarize the game")
    sim.add_argument("scenario")
    sim.add_argument("--method", choices=("analytical", "numerical"), default="analytical")
    sim.add_argument("--out-traj", help="trajectory CSV path")
    sim.add_argument("--out-summary", help="summary JSON path")
    sim.set_defaults(func=cmd_simulate)

    comp = sub.add_parser("compare", help="run both methods, report relative errors")
    comp.add_argument("scenario")
    comp.add_argument("--out", help="comparison JSON path")
    comp.set_defaults(func=cmd_compare)

    win = sub.add_parser("wincheck", help="evaluate the winning quadratics g1/g2")
    win.add_argument("scenario")
    win.add_argument("--out", help="g1/g2 CSV path")
    win.add_argument("--rd0", help="override defender initial position, km: x,y,z")
    win.set_defaults(func=cmd_wincheck)

    swp = sub.add_parser("sweep-e", help="rerun the winning check across eccentricities")
    swp.add_argument("scenario")
    swp.add_argument("--e-list", default="0,0.1,0.2,0.3,0.4,0.5")
    swp.add_argument("--out", required=True, help="sweep CSV path")
    swp.set_defaults(func=cmd_sweep_e)

    ell = sub.add_parser("ellipsoids", help="export capture/interception ellipsoids")
    ell.add_argument("scenario")
    ell.add_argument("--f-list", required=True, help="comma-separated anomalies, rad")
    ell.add_argument("--out", required=True, help="ellipsoid CSV path")
    ell.set_defaults(func=cmd_ellipsoids)

    ben = sub.add_parser("bench", help="time both methods (I/O excluded)")
    ben.add_argument("scenario")
    ben.add_argument("--reps", type=int, default=5, help="repetitions, at least 3")
    ben.add_argument("--out", help="benchmark JSON path")
    ben.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"cli.ScenarioError: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"cli.PreconditionError: {exc}", file=sys.stderr)
        return 4
    except NotHovering as exc:
        print(f"winning.NotHovering: {exc}", file=sys.stderr)
        return 4
    except (SingularFactor, NumericalBlowup, SingularBlock) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"{module}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
