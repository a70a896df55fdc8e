"""Monte-Carlo estimators built on independent, seeded realizations."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .. import analytic
from ..model import NetworkConfig, Scenario
from .engine import realization_streams, run_cp, sample_realization
from .geometry import Window

DEFAULT_PROBES = 100
RECORD_COLUMNS = ("realization_index", "metric", "value")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "McEstimate":
        x = np.asarray(samples, dtype=float)
        x = x[~np.isnan(x)]
        n = x.shape[0]
        if n < 2:
            raise ValueError("an estimate needs at least two samples")
        if np.isinf(x).any():
            finite = bool(np.all(x == x[0]))
            return cls(float(np.mean(x)), 0.0 if finite else math.inf, n)
        return cls(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(n)), n)

    def z_score(self, reference: float) -> float:
        diff = self.mean - reference
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "n": self.n}


def metric_key(name: str, gamma_star: float | None = None) -> str:
    return name if gamma_star is None else f"{name}@{gamma_star:.12g}"


def _fraction(flags: np.ndarray) -> float:
    return float(np.mean(flags)) if flags.size else math.nan


def cp_metrics(outcome, cfg: NetworkConfig, gammas: Iterable[float] | None = None) -> dict[str, float]:
    """Per-realization averages over the tracked nodes of one CP."""
    out: dict[str, float] = {}
    grid = [None] if gammas is None else [None, *gammas]
    cc = outcome.scenario is Scenario.CC
    for g in grid:
        f2 = _fraction(outcome.direct_s2(g))
        f1 = _fraction(outcome.direct_s1(g))
        out[metric_key("p_dc1", g)] = f2
        out[metric_key("p_dc2", g)] = f1
        out[metric_key("p_dc", g)] = f1 * f2
        if cc:
            c2 = _fraction(outcome.success_s2(g))
            c1 = _fraction(outcome.success_s1(g))
            out[metric_key("p_cc1", g)] = c2
            out[metric_key("p_cc2", g)] = c1
            out[metric_key("p_cc", g)] = c1 * c2
    ts = cfg.slot_seconds
    scenarios = (Scenario.DC, Scenario.CC) if cc else (Scenario.DC,)
    for sc in scenarios:
        for role in analytic.roles_for(sc):
            out[f"pdps_{sc.value}_{role}"] = float(np.mean(outcome.energy(role, sc))) / ts

    # nearest-link diagnostics from slot 1 as seen by S2 probes
    s = outcome.slot1
    hc = s.h_c[: outcome.n2]
    above = hc >= cfg.psi
    out["hc_above_psi"] = _fraction(above)
    out["hc_mean_above_psi"] = float(np.mean(hc[above])) if above.any() else math.nan
    out["campbell_sum"] = float(np.mean(s.campbell[: outcome.n2]))
    return out


def run_realization(
    scenario: Scenario | str,
    cfg: NetworkConfig,
    window: Window,
    master_seed: int,
    index: int,
    probes: int | None = DEFAULT_PROBES,
    gammas: Sequence[float] | None = None,
    backend: str | None = None,
) -> dict[str, float]:
    place, fade = realization_streams(master_seed, index)
    real = sample_realization(cfg, window, place, (master_seed, index))
    outcome = run_cp(scenario, real, cfg, fade, probes=probes, backend=backend)
    return cp_metrics(outcome, cfg, gammas)


def _task(args):
    return run_realization(*args)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Per-realization metric values, rows in ascending realization index."""

    scenario: Scenario
    cfg: NetworkConfig
    master_seed: int
    values: dict[str, np.ndarray]

    @property
    def n(self) -> int:
        return next(iter(self.values.values())).shape[0]

    def metrics(self) -> list[str]:
        return list(self.values)

    def estimate(self, name: str, gamma_star: float | None = None) -> McEstimate:
        return McEstimate.from_samples(self.values[metric_key(name, gamma_star)])

    def pdps(self, role: str, scenario: Scenario | str | None = None) -> McEstimate:
        sc = self.scenario if scenario is None else Scenario.parse(scenario)
        return self.estimate(f"pdps_{sc.value}_{role}")

    def peh(self, role: str, scenario: Scenario | str | None = None, conversion: str = "ensemble") -> McEstimate:
        """Harvested DC power for ``role``.

        ``ensemble`` converts the mean RF power (error by the delta method);
        ``per_realization`` converts each realization's mean first.
        """
        sc = self.scenario if scenario is None else Scenario.parse(scenario)
        key = f"pdps_{sc.value}_{role}"
        model = self.cfg.rectenna
        if conversion == "per_realization":
            return McEstimate.from_samples([analytic.peh_from_pdps(p, model) for p in self.values[key]])
        if conversion != "ensemble":
            raise ValueError(f"unknown conversion mode {conversion!r}")
        est = self.estimate(key)
        return McEstimate(analytic.peh_from_pdps(est.mean, model),
                          abs(_slope(lambda p: analytic.peh_from_pdps(p, model), est.mean)) * est.std_error,
                          est.n)

    def write_records(self, target) -> None:
        """Stream rows (realization_index, metric, value) as CSV."""
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                self.write_records(fh)
            return
        w = csv.writer(target, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        names = self.metrics()
        for i in range(self.n):
            for name in names:
                w.writerow((i, name, repr(float(self.values[name][i]))))

    def records_csv(self) -> str:
        buf = io.StringIO()
        self.write_records(buf)
        return buf.getvalue()


def _slope(f, x: float) -> float:
    h = 1e-6 * max(abs(x), 1e-12)
    if x - h <= 0:
        return (f(x + h) - f(x)) / h
    return (f(x + h) - f(x - h)) / (2 * h)


def simulate(
    scenario: Scenario | str,
    cfg: NetworkConfig,
    n_realizations: int,
    master_seed: int,
    window: Window | None = None,
    probes: int | None = DEFAULT_PROBES,
    gammas: Sequence[float] | None = None,
    workers: int = 1,
    backend: str | None = None,
) -> SimulationResult:
    """Run ``n_realizations`` independent deployments; results do not depend on ``workers``."""
    scenario = Scenario.parse(scenario)
    if n_realizations < 2:
        raise ValueError("need at least two realizations")
    window = Window() if window is None else window
    window.check_intensity(cfg.lambda1, "lambda1")
    window.check_intensity(cfg.lambda2, "lambda2")
    if scenario is Scenario.CC:
        window.check_intensity(cfg.lambdaR, "lambdaR")
    gammas = None if gammas is None else [float(g) for g in gammas]
    jobs = [(scenario, cfg, window, master_seed, i, probes, gammas, backend) for i in range(n_realizations)]
    if workers <= 1:
        rows = [_task(j) for j in jobs]
    else:
        chunk = max(1, n_realizations // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, jobs, chunksize=chunk))
    names = list(rows[0])
    values = {k: np.array([r[k] for r in rows], dtype=float) for k in names}
    return SimulationResult(scenario, cfg, int(master_seed), values)


_METRICS = ("p_dc1", "p_dc2", "p_dc", "p_cc1", "p_cc2", "p_cc", "pdps_by_role", "peh_by_role")


def estimate(
    metric: str,
    scenario: Scenario | str,
    cfg: NetworkConfig,
    n_realizations: int,
    master_seed: int,
    conversion: str = "ensemble",
    **kwargs,
):
    """Monte-Carlo estimate of one metric.

    Probability metrics return a McEstimate; ``pdps_by_role`` and
    ``peh_by_role`` return {role: McEstimate}.  Extra keyword arguments go
    to :func:`simulate`.
    """
    if metric not in _METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {_METRICS}")
    scenario = Scenario.parse(scenario)
    if metric.startswith("p_cc") and scenario is not Scenario.CC:
        raise ValueError("cooperative success needs the CC scenario")
    res = simulate(scenario, cfg, n_realizations, master_seed, **kwargs)
    if metric == "pdps_by_role":
        return {r: res.pdps(r) for r in analytic.roles_for(scenario)}
    if metric == "peh_by_role":
        return {r: res.peh(r, conversion=conversion) for r in analytic.roles_for(scenario)}
    return res.estimate(metric)


def _depletion(battery: float, spend: float, harvested: float, ts: float) -> float:
    drain = spend - ts * harvested
    if drain <= 0.0:
        return math.inf
    return float(math.floor(battery / drain))


def lifetime_from_result(
    res: SimulationResult, with_harvesting: bool = True, conversion: str = "ensemble", scenario=None
) -> McEstimate:
    """Network lifetime (CPs until the first role runs dry) from simulated harvest."""
    cfg = res.cfg
    sc = res.scenario if scenario is None else Scenario.parse(scenario)
    roles = analytic.roles_for(sc)
    spend = {r: analytic.energy_per_cp(sc, r, cfg) for r in roles}
    B, ts = cfg.battery_joules, cfg.slot_seconds
    if not with_harvesting:
        return McEstimate(min(_depletion(B, spend[r], 0.0, ts) for r in roles), 0.0, res.n)
    if conversion == "per_realization":
        model = cfg.rectenna
        pd = {r: res.values[f"pdps_{sc.value}_{r}"] for r in roles}
        life = [
            min(_depletion(B, spend[r], analytic.peh_from_pdps(pd[r][i], model), ts) for r in roles)
            for i in range(res.n)
        ]
        return McEstimate.from_samples(life)
    peh = {r: res.peh(r, sc) for r in roles}
    life = {r: _depletion(B, spend[r], peh[r].mean, ts) for r in roles}
    worst = min(roles, key=lambda r: life[r])
    L = life[worst]
    if math.isinf(L):
        return McEstimate(L, 0.0, res.n)
    drain = spend[worst] - ts * peh[worst].mean
    # dL/dP = B ts / drain^2
    return McEstimate(L, B * ts / drain**2 * peh[worst].std_error, res.n)


def simulate_lifetime(
    scenario: Scenario | str,
    with_harvesting: bool,
    cfg: NetworkConfig,
    n_realizations: int,
    master_seed: int,
    conversion: str = "ensemble",
    **kwargs,
) -> McEstimate:
    """Monte-Carlo network lifetime in CPs; +inf if harvesting covers consumption."""
    if not cfg.battery_joules > 0:
        raise ValueError("battery capacity must be positive")
    scenario = Scenario.parse(scenario)
    if not with_harvesting:
        if n_realizations < 2:
            raise ValueError("need at least two realizations")
        ts, B = cfg.slot_seconds, cfg.battery_joules
        L = min(_depletion(B, analytic.energy_per_cp(scenario, r, cfg), 0.0, ts) for r in analytic.roles_for(scenario))
        return McEstimate(L, 0.0, n_realizations)
    res = simulate(scenario, cfg, n_realizations, master_seed, **kwargs)
    return lifetime_from_result(res, True, conversion)
