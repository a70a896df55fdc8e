"""Closed-form and semi-analytical network metrics.

Success probabilities come from the Laplace functional of the PPP
interference, harvested power from Campbell's theorem with a bounded path
loss, lifetimes from linear battery recursions.
"""
from __future__ import annotations

import cmath
import json
import logging
import math
from dataclasses import asdict, dataclass, fields

from . import specfun
from .errors import ConfigError, OptimizationError
from .model import NetworkConfig, RectennaModel, Scenario, conversion_efficiency
from .specfun import DEFAULT_QUADRATURE, QuadratureSpec

log = logging.getLogger(__name__)

# integrands below are bounded by e^{-x}; beyond this they underflow
_X_CUTOFF = 745.0

ROLES = ("source1", "source2", "relay")


def interference_factor(gamma_star: float, alpha: float) -> float:
    """rho(g, a) = g^{2/a} int_{g^{-2/a}}^inf du / (1 + u^{a/2}).

    Evaluated through its hypergeometric form 2g/(a-2) 2F1(1, 1-2/a; 2-2/a; -g).
    """
    b = 1.0 - 2.0 / alpha
    return 2.0 * gamma_star / (alpha - 2.0) * specfun.hyp2f1(1.0, b, 1.0 + b, -gamma_star)


def _noise_ratio(cfg: NetworkConfig) -> float:
    # phi = N / (P_t psi)
    return cfg.noise / (cfg.pt * cfg.psi)


def success_below_psi(lambda_tx: float, cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Pr(SINR > g* | h < psi): no splitting, Rayleigh coverage with noise."""
    a = cfg.alpha
    g = cfg.gamma_star
    rho = interference_factor(g, a)
    noise_coeff = cfg.mu * g * cfg.noise / cfg.pt
    scale = math.pi * lambda_tx

    # x = pi*lambda*r^2
    def integrand(x):
        return math.exp(-x * (1.0 + rho) - noise_coeff * (x / scale) ** (a / 2.0))

    if noise_coeff == 0.0:
        return 1.0 / (1.0 + rho)
    # past either bound the integrand is below e^{-745}
    upper = min(_X_CUTOFF / (1.0 + rho), scale * (_X_CUTOFF / noise_coeff) ** (2.0 / a))
    return specfun.integrate(integrand, 0.0, upper, spec)


def success_above_psi(lambda_tx: float, cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Pr(SINR > g* | h >= psi) through the interference Laplace transform.

    The conditional success probability vanishes where 1 - phi g* r^a <= 0:
    no fade can overcome the noise there.
    """
    a = cfg.alpha
    g = cfg.gamma_star
    phi = _noise_ratio(cfg)
    scale = math.pi * lambda_tx
    b = 1.0 - 2.0 / a

    def integrand(x):
        margin = 1.0 - phi * g * (x / scale) ** (a / 2.0)
        if margin <= 0.0:
            return 0.0
        geff = g / margin
        expo = 2.0 * x * geff * specfun.hyp2f1(1.0, b, 1.0 + b, -geff) / (a - 2.0) + x
        return math.exp(-expo)

    # g_eff >= g, so the integrand is below e^{-x (1 + rho(g))}
    upper = _X_CUTOFF / (1.0 + interference_factor(g, a))
    if phi > 0.0:
        upper = min(upper, scale * (phi * g) ** (-2.0 / a))
    return specfun.integrate(integrand, 0.0, upper, spec)


def p_dc_slot(lambda_tx: float, cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability that a receiver decodes its nearest transmitter in one slot.

    ``lambda_tx`` is the intensity of the transmitting set.
    """
    if not lambda_tx > 0:
        raise ValueError("lambda_tx must be > 0")
    q = math.exp(-cfg.mu * cfg.psi)
    below = success_below_psi(lambda_tx, cfg, spec)
    above = success_above_psi(lambda_tx, cfg, spec)
    return min(1.0, max(0.0, (1.0 - q) * below + q * above))


def p_dc_slot_alpha4(lambda_tx: float, cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Fast path of :func:`p_dc_slot` for alpha = 4.

    The h < psi part is closed form via the Gaussian tail; the h >= psi part
    keeps a single integral with an arctan kernel.
    """
    if cfg.alpha != 4:
        raise ValueError(f"p_dc_slot_alpha4 requires alpha == 4, got {cfg.alpha}")
    if not lambda_tx > 0:
        raise ValueError("lambda_tx must be > 0")
    g = cfg.gamma_star
    q = math.exp(-cfg.mu * cfg.psi)
    chi = chi_alpha4(lambda_tx, g)
    omega = cfg.mu * g * cfg.noise / cfg.pt
    scale = math.pi * lambda_tx
    if omega == 0.0:
        first = scale / chi
    else:
        # sqrt(pi/w) e^{chi^2/4w} Q(chi/sqrt(2w)) = sqrt(pi/w)/2 * erfcx(chi / (2 sqrt(w)))
        first = scale * math.sqrt(math.pi / omega) * 0.5 * specfun.erfcx(chi / (2.0 * math.sqrt(omega)))

    phi = _noise_ratio(cfg)

    def integrand(x):
        margin = 1.0 - phi * g * (x / scale) ** 2
        if margin <= 0.0:
            return 0.0
        zeta = math.sqrt(g / margin)
        return math.exp(-x * (1.0 + zeta * math.atan(zeta)))

    s0 = math.sqrt(g)
    upper = _X_CUTOFF / (1.0 + s0 * math.atan(s0))
    if phi > 0.0:
        upper = min(upper, scale / math.sqrt(phi * g))
    second = specfun.integrate(integrand, 0.0, upper, spec)
    return min(1.0, max(0.0, (1.0 - q) * first + q * second))


def chi_alpha4(lambda_tx: float, gamma_star: float) -> float:
    s = math.sqrt(gamma_star)
    arccot = math.atan(1.0 / s)
    return math.pi * lambda_tx * (1.0 + s * (math.pi / 2.0 - arccot))


def p_dc(cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return p_dc_slot(cfg.lambda1, cfg, spec) * p_dc_slot(cfg.lambda2, cfg, spec)


def p_cc_relay(phi: int, cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Relay path for messages of source type ``phi``: relay decodes S_phi, then the peer decodes the relay."""
    lam = cfg.lambda1 if phi == 1 else cfg.lambda2
    return p_dc_slot(lam, cfg, spec) * p_dc_slot(cfg.lambdaR, cfg, spec)


def combine_cc(p1: float, p2: float, pr1: float, pr2: float) -> float:
    return (p1 + pr1 * (1.0 - p1)) * (p2 + pr2 * (1.0 - p2))


def p_cc(cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    p1 = p_dc_slot(cfg.lambda1, cfg, spec)
    p2 = p_dc_slot(cfg.lambda2, cfg, spec)
    pr = p_dc_slot(cfg.lambdaR, cfg, spec)
    return combine_cc(p1, p2, p1 * pr, p2 * pr)


# ---------------------------------------------------------------------------
# Harvested power


def mean_nearest_pathloss(
    lam: float,
    alpha: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    closed_form: bool = True,
) -> float:
    """E{min(1, r_c^-alpha)} for the distance r_c to the nearest point of a PPP."""
    if lam < 0:
        raise ValueError("intensity must be >= 0")
    if not alpha > 2:
        raise ValueError("alpha must be > 2")
    if lam == 0.0:
        return 0.0
    x = math.pi * lam
    inside = -math.expm1(-x)
    if closed_form and alpha == 3:
        return inside + 2.0 * x * (math.exp(-x) - math.pi * math.sqrt(lam) * specfun.erfc_c(math.sqrt(x)))
    if closed_form and alpha == 4:
        return inside + x * (math.exp(-x) + x * specfun.expint_ei(-x))
    if closed_form and alpha == 5:
        return inside + 2.0 / 3.0 * x * (
            (1.0 - 2.0 * x) * math.exp(-x) + 2.0 * math.pi**2 * lam**1.5 * specfun.erfc_c(math.sqrt(x))
        )

    def integrand(r):
        return r ** (1.0 - alpha) * 2.0 * x * math.exp(-x * r * r)

    return inside + specfun.integrate_semi_infinite(integrand, 1.0, spec)


def campbell_mean(lam: float, alpha: float) -> float:
    """sum_i min(1, r_i^-alpha) averaged over a PPP: pi alpha lambda / (alpha - 2)."""
    return math.pi * alpha * lam / (alpha - 2.0)


def pdps_dc(lambda_other: float, cfg: NetworkConfig) -> float:
    """Mean RF power (W) fed to the harvester while receiving from a PPP of intensity ``lambda_other``.

    Before RF-to-DC conversion.  Harvesting happens only when the nearest
    link fade h_c reaches psi, and then a fraction 1 - psi/h_c of the total
    received power (bounded path loss) is diverted.
    """
    if lambda_other < 0:
        raise ValueError("intensity must be >= 0")
    if lambda_other == 0.0:
        return 0.0
    mu, psi = cfg.mu, cfg.psi
    total = campbell_mean(lambda_other, cfg.alpha)
    nearest = mean_nearest_pathloss(lambda_other, cfg.alpha)
    # E{(1 - psi/h) 1(h > psi)} = e^{-mu psi} + mu psi Ei(-mu psi)
    correction = psi * math.exp(mu * psi) * specfun.expint_ei(-mu * psi)
    return cfg.pt * math.exp(-mu * psi) * (total / mu + correction * (total - nearest))


def peh_from_pdps(pdps: float, model: RectennaModel) -> float:
    """Harvested DC power after the power-dependent rectenna efficiency."""
    if pdps <= 0.0:
        return 0.0
    return pdps * conversion_efficiency(pdps, model)


def pdps_cc(role: str, cfg: NetworkConfig) -> float:
    """Pre-conversion harvested power per CP for a role in the cooperative scenario."""
    if role == "source1":
        return pdps_dc(cfg.lambda2, cfg) + pdps_dc(cfg.lambdaR, cfg)
    if role == "source2":
        return pdps_dc(cfg.lambda1, cfg) + pdps_dc(cfg.lambdaR, cfg)
    if role == "relay":
        return pdps_dc(cfg.lambda1, cfg) + pdps_dc(cfg.lambda2, cfg)
    raise ValueError(f"unknown role {role!r}")


def pdps_role(scenario: Scenario | str, role: str, cfg: NetworkConfig) -> float:
    scenario = Scenario.parse(scenario)
    if scenario is Scenario.CC:
        return pdps_cc(role, cfg)
    if role == "source1":
        return pdps_dc(cfg.lambda2, cfg)
    if role == "source2":
        return pdps_dc(cfg.lambda1, cfg)
    raise ValueError(f"role {role!r} does not exist in the direct scenario")


def peh_role(scenario: Scenario | str, role: str, cfg: NetworkConfig) -> float:
    return peh_from_pdps(pdps_role(scenario, role, cfg), cfg.rectenna)


# ---------------------------------------------------------------------------
# Lifetime, throughput


def roles_for(scenario: Scenario | str) -> tuple[str, ...]:
    return ROLES if Scenario.parse(scenario) is Scenario.CC else ROLES[:2]


def energy_per_cp(scenario: Scenario | str, role: str, cfg: NetworkConfig) -> float:
    """Energy (J) a node spends per CP on transmission and reception."""
    scenario = Scenario.parse(scenario)
    if role not in roles_for(scenario):
        raise ValueError(f"role {role!r} does not exist in scenario {scenario.value}")
    if scenario is Scenario.DC:
        return cfg.slot_seconds * (cfg.pr + cfg.pt)
    relay = 1.0 if role == "relay" else 0.0
    return cfg.slot_seconds * (2.0 * cfg.pr + cfg.pt * (1.0 + relay))


def lifetime_from_power(battery: float, energy_per_cp: float, harvested_power: float, slot_seconds: float) -> float:
    """Battery depletion point in CPs; +inf once harvesting covers consumption."""
    drain = max(energy_per_cp - slot_seconds * harvested_power, 0.0)
    if drain == 0.0:
        return math.inf
    return battery / drain


def lifetime(scenario: Scenario | str, with_harvesting: bool, role: str, cfg: NetworkConfig) -> float:
    """Average lifetime in CPs of one node role."""
    spend = energy_per_cp(scenario, role, cfg)
    harvested = peh_role(scenario, role, cfg) if with_harvesting else 0.0
    return lifetime_from_power(cfg.battery_joules, spend, harvested, cfg.slot_seconds)


def network_lifetime(scenario: Scenario | str, with_harvesting: bool, cfg: NetworkConfig) -> float:
    """Lifetime of the network: the first role to exhaust its battery ends it."""
    return min(lifetime(scenario, with_harvesting, role, cfg) for role in roles_for(scenario))


def exchange_probability(scenario: Scenario | str, cfg: NetworkConfig) -> float:
    return p_cc(cfg) if Scenario.parse(scenario) is Scenario.CC else p_dc(cfg)


def spatial_throughput(scenario: Scenario | str, cfg: NetworkConfig, p: float | None = None) -> float:
    """Successfully exchanged messages per second per m^2."""
    scenario = Scenario.parse(scenario)
    if p is None:
        p = exchange_probability(scenario, cfg)
    return (cfg.lambda1 + cfg.lambda2) * p / (scenario.slots_per_cp * cfg.slot_seconds)


def tme(
    scenario: Scenario | str,
    cfg: NetworkConfig,
    with_harvesting: bool = True,
    p: float | None = None,
) -> float:
    """Total messages exchanged over the network lifetime: S * w * g.

    Note the product carries units of messages/(s m^2) times CPs; with the
    default t_s = 1 s it equals messages per m^2.
    """
    scenario = Scenario.parse(scenario)
    s = spatial_throughput(scenario, cfg, p)
    w = network_lifetime(scenario, with_harvesting, cfg)
    if s == 0.0:
        return 0.0
    return s * w * scenario.slots_per_cp


def cumulative_messages(
    scenario: Scenario | str,
    cfg: NetworkConfig,
    times: "list[float]",
    with_harvesting: bool = True,
) -> list[float]:
    """Messages per m^2 exchanged by time t (seconds); flat after the network dies."""
    scenario = Scenario.parse(scenario)
    s = spatial_throughput(scenario, cfg)
    end = network_lifetime(scenario, with_harvesting, cfg) * scenario.slots_per_cp * cfg.slot_seconds
    return [s * min(t, end) for t in times]


# ---------------------------------------------------------------------------
# Optimal intensity


@dataclass(frozen=True)
class OptimalIntensity:
    numeric: float
    closed_form: float
    relative_gap: float
    warning: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def optimal_intensity_closed_form(cfg: NetworkConfig) -> float:
    """Closed-form optimum of the post-conversion harvested power.

    Keeps only the Campbell term of the harvested power (so P is linear in
    lambda) and solves the stationarity cubic in dBm with Cardano's formula.
    Returns NaN when the cubic's selected root is not real.
    """
    r = cfg.rectenna
    a3, a2, a1, a0 = r.a3, r.a2, r.a1, r.a0
    ln10 = math.log(10.0)
    q = ln10**2 * (a2**2 - 3.0 * a1 * a3) + 900.0 * a3**2
    rho = ln10**3 * (27.0 * a0 * a3**2 - 9.0 * a1 * a2 * a3 + 2.0 * a2**3) + 54000.0 * a3**3
    disc = rho**2 - 4.0 * q**3
    if disc >= 0.0:
        radicand = -rho + math.sqrt(disc)
        f = complex(math.copysign(abs(radicand) ** (1.0 / 3.0), radicand))
    else:
        f = (-rho + cmath.sqrt(disc)) ** (1.0 / 3.0)
    if f == 0:
        return math.nan
    exponent = 2.0 ** (2.0 / 3.0) * f / (60.0 * a3) + q / (2.0 ** (-4.0 / 3.0) * 60.0 * a3 * f)
    if abs(exponent.imag) > 1e-9 * max(1.0, abs(exponent.real)):
        return math.nan
    prefactor = (
        cfg.mu
        * (cfg.alpha - 2.0)
        * 10.0 ** (-a2 / (30.0 * a3))
        / (1e3 * cfg.pt * math.pi * cfg.alpha * math.exp(-cfg.mu * cfg.psi + 1.0))
    )
    return prefactor * math.exp(exponent.real)


def optimal_intensity(
    cfg: NetworkConfig,
    lower: float = 1e-4,
    upper: float = 1e2,
    grid_points: int = 241,
    warn: bool = True,
) -> OptimalIntensity:
    """Transmitter intensity maximizing the post-conversion harvested power.

    The numeric maximizer is authoritative: a log-spaced scan brackets the
    peak, then golden-section search refines it in log-intensity.
    """
    if not cfg.rectenna.a3 < 0:
        raise OptimizationError("rectenna cubic needs a3 < 0 for an interior maximum")

    def objective(log_lam):
        return peh_from_pdps(pdps_dc(math.exp(log_lam), cfg), cfg.rectenna)

    lo, hi = math.log(lower), math.log(upper)
    grid = [lo + (hi - lo) * i / (grid_points - 1) for i in range(grid_points)]
    values = [objective(x) for x in grid]
    best = max(range(grid_points), key=values.__getitem__)
    if best == 0 or best == grid_points - 1 or values[best] <= 0.0:
        raise OptimizationError(
            f"harvested power is monotone on [{lower}, {upper}]; no interior maximum"
        )
    x_opt, _ = specfun.golden_section_maximize(objective, grid[best - 1], grid[best + 1], tol=1e-12)
    numeric = math.exp(x_opt)

    closed = optimal_intensity_closed_form(cfg)
    gap = abs(closed - numeric) / numeric if math.isfinite(closed) else math.inf
    warning = None
    if not gap <= 0.05:
        warning = f"closed-form optimum {closed:.6g} differs from numeric {numeric:.6g} by {gap:.1%}"
        if warn:
            log.warning(warning)
    return OptimalIntensity(numeric=numeric, closed_form=closed, relative_gap=gap, warning=warning)


# ---------------------------------------------------------------------------
# Report


@dataclass(frozen=True)
class AnalyticReport:
    p_dc1: float
    p_dc2: float
    p_dc: float
    p_cc_r1: float
    p_cc_r2: float
    p_cc: float
    pdps_d1: float
    pdps_d2: float
    pdps_c1: float
    pdps_c2: float
    pdps_cR: float
    peh_d1: float
    peh_d2: float
    peh_c1: float
    peh_c2: float
    peh_cR: float
    lifetime_dc: float
    lifetime_dc_eh: float
    lifetime_cc_source: float
    lifetime_cc_relay: float
    lifetime_cc_eh: float
    s_dc: float
    s_cc: float
    tme_dc: float
    tme_cc: float
    lambda_opt: float

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        # infinite lifetimes serialize as the string "inf"
        data = {k: (v if math.isfinite(v) else str(v)) for k, v in self.to_dict().items()}
        return json.dumps(data, indent=2)


def analytic_report(cfg: NetworkConfig, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> AnalyticReport:
    """Evaluate every closed-form metric for one configuration."""
    for name in ("lambda1", "lambda2", "lambdaR"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be > 0 for a full report")
    p1 = p_dc_slot(cfg.lambda1, cfg, spec)
    p2 = p_dc_slot(cfg.lambda2, cfg, spec)
    pr = p_dc_slot(cfg.lambdaR, cfg, spec)
    pdc = p1 * p2
    pcc = combine_cc(p1, p2, p1 * pr, p2 * pr)

    d1, d2, dr = (pdps_dc(lam, cfg) for lam in (cfg.lambda1, cfg.lambda2, cfg.lambdaR))
    pdps_d1, pdps_d2 = d2, d1
    pdps_c1, pdps_c2, pdps_cR = d2 + dr, d1 + dr, d1 + d2
    rect = cfg.rectenna
    try:
        lam_opt = optimal_intensity(cfg, warn=False).numeric
    except OptimizationError:
        lam_opt = math.nan

    return AnalyticReport(
        p_dc1=p1,
        p_dc2=p2,
        p_dc=pdc,
        p_cc_r1=p1 * pr,
        p_cc_r2=p2 * pr,
        p_cc=pcc,
        pdps_d1=pdps_d1,
        pdps_d2=pdps_d2,
        pdps_c1=pdps_c1,
        pdps_c2=pdps_c2,
        pdps_cR=pdps_cR,
        peh_d1=peh_from_pdps(pdps_d1, rect),
        peh_d2=peh_from_pdps(pdps_d2, rect),
        peh_c1=peh_from_pdps(pdps_c1, rect),
        peh_c2=peh_from_pdps(pdps_c2, rect),
        peh_cR=peh_from_pdps(pdps_cR, rect),
        lifetime_dc=network_lifetime(Scenario.DC, False, cfg),
        lifetime_dc_eh=network_lifetime(Scenario.DC, True, cfg),
        lifetime_cc_source=lifetime(Scenario.CC, False, "source1", cfg),
        lifetime_cc_relay=lifetime(Scenario.CC, False, "relay", cfg),
        lifetime_cc_eh=network_lifetime(Scenario.CC, True, cfg),
        s_dc=spatial_throughput(Scenario.DC, cfg, pdc),
        s_cc=spatial_throughput(Scenario.CC, cfg, pcc),
        tme_dc=tme(Scenario.DC, cfg, True, pdc),
        tme_cc=tme(Scenario.CC, cfg, True, pcc),
        lambda_opt=lam_opt,
    )
