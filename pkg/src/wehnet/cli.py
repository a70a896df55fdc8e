"""Command-line front end.

    wehnet analytic --config cfg.json
    wehnet validate --config cfg.json --n 1000 --seed 1 --side 200
    wehnet sweep --sweep sweep.json --mode both
    wehnet optimal --config cfg.json

Exit codes: 0 ok, 1 validation mismatch (|z| > 4), 2 bad input, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import analytic
from .errors import ConfigError, ConvergenceError, DomainError, OptimizationError
from .model import NetworkConfig, Scenario, db_to_linear
from .sim import Window, simulate

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
Z_LIMIT = 4.0
MIN_VALIDATE_N = 100

SWEEP_VARIABLES = ("gamma_star_db", "lambda1", "lambda2", "lambdaR", "psi_db", "mu")
VALIDATE_COLUMNS = ("metric", "analytic", "mc_mean", "mc_std_error", "z_score", "gated")
MC_METRICS = (
    "p_dc1", "p_dc2", "p_dc", "p_cc",
    "peh_dc_source1", "peh_dc_source2", "peh_cc_source1", "peh_cc_source2", "peh_cc_relay",
)
TIMESERIES_COLUMNS = ("time_s", "cp_dc", "cp_cc", "messages_dc", "messages_dc_eh", "messages_cc", "messages_cc_eh")

log = logging.getLogger("wehnet")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    """Shortest round-trip text for numbers; stable across runs."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, float)):
        return repr(float(x))
    return "" if x is None else str(x)


def load_config(path: str | None) -> NetworkConfig:
    if path is None:
        return NetworkConfig()
    try:
        return NetworkConfig.load(path)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}", EXIT_CONFIG) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"config is not valid JSON: {exc}", EXIT_CONFIG) from None
    except (ConfigError, TypeError, ValueError) as exc:
        raise CliError(f"invalid config: {exc}", EXIT_CONFIG) from None


def apply_variable(cfg: NetworkConfig, variable: str, value: float) -> NetworkConfig:
    """Config with one sweep variable set; dB variables become linear here."""
    if variable == "gamma_star_db":
        return cfg.with_(gamma_star=db_to_linear(value))
    if variable == "psi_db":
        return cfg.with_(psi=db_to_linear(value))
    if variable in SWEEP_VARIABLES:
        return cfg.with_(**{variable: float(value)})
    raise ConfigError(f"unknown sweep variable {variable!r}; expected one of {SWEEP_VARIABLES}")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    grid: tuple[float, ...]
    fixed: NetworkConfig
    times: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"unknown sweep variable {self.variable!r}; expected one of {SWEEP_VARIABLES}")
        if not self.grid:
            raise ConfigError("sweep grid must be nonempty")
        if any(not math.isfinite(g) for g in self.grid):
            raise ConfigError("sweep grid values must be finite")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        for g in self.grid:
            apply_variable(self.fixed, self.variable, g)
        if self.times is not None and any(t < 0 for t in self.times):
            raise ConfigError("times must be >= 0")

    def configs(self) -> list[NetworkConfig]:
        return [apply_variable(self.fixed, self.variable, g) for g in self.grid]

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        unknown = set(data) - {"variable", "grid", "fixed", "times"}
        if unknown:
            raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
        try:
            fixed = NetworkConfig.from_dict(data.get("fixed", {}))
            grid = tuple(float(g) for g in data["grid"])
            times = None if data.get("times") is None else tuple(float(t) for t in data["times"])
            return cls(data["variable"], grid, fixed, times)
        except KeyError as exc:
            raise ConfigError(f"sweep file is missing {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid sweep file: {exc}") from None

    @classmethod
    def load(cls, path: str) -> "SweepSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except FileNotFoundError:
            raise CliError(f"sweep file not found: {path}", EXIT_CONFIG) from None
        except json.JSONDecodeError as exc:
            raise CliError(f"sweep file is not valid JSON: {exc}", EXIT_CONFIG) from None
        except ConfigError as exc:
            raise CliError(f"invalid sweep: {exc}", EXIT_CONFIG) from None


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_analytic(cfg: NetworkConfig) -> str:
    report = analytic.analytic_report(cfg)
    return report.to_json() + "\n"


def validation_rows(cfg: NetworkConfig, n: int, seed: int, window: Window, probes: int, workers: int):
    """(metric, analytic, mean, se, z, gated) rows from one CC simulation.

    The cooperative success probability relies on an independence
    approximation, so its row is reported but does not gate the exit code.
    """
    res = simulate(Scenario.CC, cfg, n, seed, window=window, probes=probes, workers=workers)
    rep = analytic.analytic_report(cfg)
    mu, psi = cfg.mu, cfg.psi
    pairs = [
        ("p_dc1", rep.p_dc1, res.estimate("p_dc1"), True),
        ("p_dc2", rep.p_dc2, res.estimate("p_dc2"), True),
        ("p_dc", rep.p_dc, res.estimate("p_dc"), True),
        ("p_cc", rep.p_cc, res.estimate("p_cc"), False),
    ]
    names = {"source1": ("d1", "c1"), "source2": ("d2", "c2"), "relay": (None, "cR")}
    for quantity in ("pdps", "peh"):
        for sc in (Scenario.DC, Scenario.CC):
            for role in analytic.roles_for(sc):
                suffix = names[role][0 if sc is Scenario.DC else 1]
                ref = getattr(rep, f"{quantity}_{suffix}")
                est = res.pdps(role, sc) if quantity == "pdps" else res.peh(role, sc)
                pairs.append((f"{quantity}_{sc.value}_{role}", ref, est, True))
    pairs += [
        ("hc_above_psi", math.exp(-mu * psi), res.estimate("hc_above_psi"), True),
        ("hc_mean_above_psi", (1.0 + psi * mu) / mu, res.estimate("hc_mean_above_psi"), True),
        ("campbell_sum", analytic.campbell_mean(cfg.lambda1, cfg.alpha) / mu, res.estimate("campbell_sum"), True),
    ]
    return [(name, ref, est.mean, est.std_error, est.z_score(ref), gated) for name, ref, est, gated in pairs]


def cmd_validate(cfg, n, seed, window, probes=100, workers=1) -> tuple[str, int]:
    if n < MIN_VALIDATE_N:
        raise CliError(f"--n must be at least {MIN_VALIDATE_N}, got {n}", EXIT_CONFIG)
    rows = validation_rows(cfg, n, seed, window, probes, workers)
    bad = [r[0] for r in rows if r[5] and not abs(r[4]) <= Z_LIMIT]
    if bad:
        log.warning("metrics outside %g standard errors: %s", Z_LIMIT, ", ".join(bad))
    return _write_csv(VALIDATE_COLUMNS, rows), (EXIT_MISMATCH if bad else EXIT_OK)


def sweep_header(spec: SweepSpec, mode: str) -> list[str]:
    cols = [spec.variable, *analytic.AnalyticReport.field_names()]
    if mode in ("simulate", "both"):
        for m in MC_METRICS:
            cols += [f"mc_{m}_mean", f"mc_{m}_se"]
    return cols + ["error"]


def _simulated_values(cfg, n, seed, window, probes, workers) -> list[float]:
    res = simulate(Scenario.CC, cfg, n, seed, window=window, probes=probes, workers=workers)
    out = []
    for m in MC_METRICS:
        if m.startswith("peh_"):
            _, sc, role = m.split("_", 2)
            est = res.peh(role, sc)
        else:
            est = res.estimate(m)
        out += [est.mean, est.std_error]
    return out


def cmd_sweep(spec: SweepSpec, mode: str, n=1000, seed=0, window=None, probes=100, workers=1) -> str:
    if mode == "timeseries":
        return sweep_timeseries(spec)
    if mode not in ("analytic", "simulate", "both"):
        raise CliError(f"unknown mode {mode!r}", EXIT_CONFIG)
    if mode != "analytic" and n < 2:
        raise CliError("--n must be at least 2", EXIT_CONFIG)
    window = Window(200.0) if window is None else window
    n_report = len(analytic.AnalyticReport.field_names())
    n_mc = 2 * len(MC_METRICS)
    rows = []
    for g, cfg in zip(spec.grid, spec.configs()):
        row, error = [g], ""
        try:
            if mode == "simulate":
                row += [None] * n_report
            else:
                row += list(analytic.analytic_report(cfg).to_dict().values())
            if mode != "analytic":
                row += _simulated_values(cfg, n, seed, window, probes, workers)
        except (ConvergenceError, OptimizationError, DomainError, ConfigError, ValueError, ArithmeticError) as exc:
            error = f"{type(exc).__name__}: {exc}"
            row = [g] + [None] * (n_report + (n_mc if mode != "analytic" else 0))
        rows.append(row + [error])
    return _write_csv(sweep_header(spec, mode), rows)


def sweep_timeseries(spec: SweepSpec, points: int = 101) -> str:
    """Cumulative messages per m^2 against time for every grid point."""
    rows = []
    for g, cfg in zip(spec.grid, spec.configs()):
        if spec.times is not None:
            times = list(spec.times)
        else:
            ends = [
                analytic.network_lifetime(sc, eh, cfg) * sc.slots_per_cp * cfg.slot_seconds
                for sc in (Scenario.DC, Scenario.CC)
                for eh in (False, True)
            ]
            horizon = max(e for e in ends if math.isfinite(e)) * 1.1 if any(map(math.isfinite, ends)) else 1.0
            times = [horizon * i / (points - 1) for i in range(points)]
        series = [
            analytic.cumulative_messages(sc, cfg, times, eh)
            for sc in (Scenario.DC, Scenario.CC)
            for eh in (False, True)
        ]
        for k, t in enumerate(times):
            cp_dc = t / (Scenario.DC.slots_per_cp * cfg.slot_seconds)
            cp_cc = t / (Scenario.CC.slots_per_cp * cfg.slot_seconds)
            rows.append([g, t, cp_dc, cp_cc, *(s[k] for s in series)])
    return _write_csv([spec.variable, *TIMESERIES_COLUMNS], rows)


def cmd_optimal(cfg: NetworkConfig) -> str:
    result = analytic.optimal_intensity(cfg)
    data = {k: (v if not isinstance(v, float) or math.isfinite(v) else str(v)) for k, v in result.to_dict().items()}
    return json.dumps(data, indent=2) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def _uint64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wehnet", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sim=False):
        sp.add_argument("--out", help="output file (default stdout)")
        if sim:
            sp.add_argument("--n", type=int, default=1000, help="realizations (default 1000)")
            sp.add_argument("--seed", type=_uint64, default=0, help="master seed (uint64)")
            sp.add_argument("--side", type=_positive_float, default=200.0, help="torus side in metres (default 200)")
            sp.add_argument("--probes", type=int, default=100, help="tracked receivers per type and realization")
            sp.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")

    a = sub.add_parser("analytic", help="closed-form report as JSON")
    a.add_argument("--config", help="network config JSON (defaults if omitted)")
    common(a)

    v = sub.add_parser("validate", help="Monte-Carlo vs analytic table as CSV")
    v.add_argument("--config")
    common(v, sim=True)

    s = sub.add_parser("sweep", help="one CSV row per grid point")
    s.add_argument("--sweep", required=True, help="sweep spec JSON")
    s.add_argument("--mode", default="analytic", choices=("analytic", "simulate", "both", "timeseries"))
    common(s, sim=True)

    o = sub.add_parser("optimal", help="harvest-optimal transmitter intensity as JSON")
    o.add_argument("--config")
    common(o)
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    code = EXIT_OK
    try:
        if args.command == "analytic":
            text = cmd_analytic(load_config(args.config))
        elif args.command == "optimal":
            text = cmd_optimal(load_config(args.config))
        elif args.command == "validate":
            window = Window(args.side)
            text, code = cmd_validate(load_config(args.config), args.n, args.seed, window, args.probes, args.workers)
        else:
            spec = SweepSpec.load(args.sweep)
            text = cmd_sweep(spec, args.mode, args.n, args.seed, Window(args.side), args.probes, args.workers)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, OptimizationError, DomainError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(text, args.out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
