"""Analytic metrics against independent quadrature oracles and hand arithmetic.

The scipy oracles integrate in the radial variable r with scipy's own
hypergeometric and exponential-integral routines, so they share neither the
substitution nor the special functions of the package.
"""
import logging
import math

import numpy as np
import pytest
import scipy.special as ss
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate

from wehnet import analytic as an
from wehnet.errors import ConfigError, OptimizationError
from wehnet.model import NetworkConfig, RectennaModel, Scenario, db_to_linear

GAMMA_GRID_DB = (-10, -5, 0, 5, 10)


def quad(f, a, b):
    val, _ = sci_integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=500)
    return val


def rho_oracle(g, a):
    return g ** (2 / a) * quad(lambda u: 1 / (1 + u ** (a / 2)), g ** (-2 / a), np.inf)


def below_oracle(lam, cfg):
    a, g = cfg.alpha, cfg.gamma_star
    rho = rho_oracle(g, a)
    w = cfg.mu * g * cfg.noise / cfg.pt
    return quad(lambda r: 2 * np.pi * lam * r * np.exp(-np.pi * lam * r * r * (1 + rho) - w * r**a), 0, np.inf)


def above_oracle(lam, cfg):
    a, g = cfg.alpha, cfg.gamma_star
    phi = cfg.noise / (cfg.pt * cfg.psi)
    rmax = (phi * g) ** (-1 / a) if phi > 0 else np.inf

    def f(r):
        m = 1 - phi * g * r**a
        if m <= 0:
            return 0.0
        ge = g / m
        rho = 2 * ge / (a - 2) * ss.hyp2f1(1, 1 - 2 / a, 2 - 2 / a, -ge)
        return 2 * np.pi * lam * r * np.exp(-np.pi * lam * r * r * (1 + rho))

    return quad(f, 0, min(rmax, 60 / math.sqrt(lam)))


def nearest_pathloss_oracle(lam, a):
    pdf = lambda r: 2 * np.pi * lam * r * np.exp(-np.pi * lam * r * r)  # noqa: E731
    return quad(pdf, 0, 1) + quad(lambda r: r**-a * pdf(r), 1, np.inf)


def pdps_oracle(lam, cfg):
    """Mean diverted RF power built from its pieces.

    Nearest link:  E[(h - psi) 1(h >= psi)] E[g(r_c)] = e^{-mu psi}/mu E[g(r_c)].
    Other links:  E[(1 - psi/h) 1(h >= psi)] (Campbell - E[g(r_c)]) / mu.
    """
    mu, psi, a = cfg.mu, cfg.psi, cfg.alpha
    eg = nearest_pathloss_oracle(lam, a)
    split = quad(lambda h: (1 - psi / h) * mu * np.exp(-mu * h), psi, np.inf)
    campbell = np.pi * a * lam / (a - 2)
    return cfg.pt * (np.exp(-mu * psi) / mu * eg + split * (campbell - eg) / mu)


# -- success probabilities -------------------------------------------------------


@pytest.mark.parametrize("g", [0.05, 0.5, 1.0, 4.0, 30.0])
@pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0, 5.5])
def test_interference_factor_matches_integral(g, alpha):
    assert an.interference_factor(g, alpha) == pytest.approx(rho_oracle(g, alpha), rel=1e-9)


@pytest.mark.parametrize("noise", [0.0, 1e-6, 1e-4, 1e-3])
@pytest.mark.parametrize("alpha", [3.0, 4.0])
@pytest.mark.parametrize("g", [0.1, 1.0, 10.0])
def test_conditional_terms_match_radial_oracles(noise, alpha, g):
    cfg = NetworkConfig(noise=noise, alpha=alpha, gamma_star=g)
    assert an.success_below_psi(0.1, cfg) == pytest.approx(below_oracle(0.1, cfg), rel=1e-8)
    assert an.success_above_psi(0.1, cfg) == pytest.approx(above_oracle(0.1, cfg), rel=1e-8)


def test_noise_free_below_term_reduces_to_interference_factor():
    cfg = NetworkConfig(noise=0.0)
    rho = rho_oracle(1.0, 4.0)
    q = math.exp(-cfg.mu * cfg.psi)
    assert (1 - q) * an.success_below_psi(0.1, cfg) == pytest.approx((1 - q) / (1 + rho), rel=1e-10)


def test_reference_point_value(cfg):
    p = an.p_dc_slot(0.1, cfg)
    assert 0 < p < 1
    assert an.p_dc_slot(0.1, cfg.with_(gamma_star=2.0)) < p


def test_huge_threshold_kills_success(cfg):
    assert an.p_dc_slot(0.1, cfg.with_(gamma_star=1e6)) < 1e-3


@pytest.mark.parametrize("gdb", GAMMA_GRID_DB)
@pytest.mark.parametrize("noise", [NetworkConfig().noise, 1e-4, 0.0])
def test_alpha4_fast_path_agrees(gdb, noise):
    cfg = NetworkConfig(gamma_star=db_to_linear(gdb), noise=noise)
    for lam in (0.05, 0.1, 0.5):
        assert abs(an.p_dc_slot_alpha4(lam, cfg) - an.p_dc_slot(lam, cfg)) < 1e-9


def test_alpha4_fast_path_requires_alpha4():
    with pytest.raises(ValueError):
        an.p_dc_slot_alpha4(0.1, NetworkConfig(alpha=3.0))


def test_chi_value():
    assert an.chi_alpha4(0.1, 1.0) == pytest.approx(math.pi * 0.1 * (1 + math.pi / 4), rel=1e-14)


@given(g=st.floats(0.01, 100.0), factor=st.floats(1.05, 4.0), lam=st.floats(0.01, 1.0))
def test_success_decreasing_in_threshold(g, factor, lam):
    cfg = NetworkConfig(gamma_star=g)
    a = an.p_dc_slot(lam, cfg)
    b = an.p_dc_slot(lam, cfg.with_(gamma_star=g * factor))
    assert 0.0 <= b < a <= 1.0


def test_noise_free_success_independent_of_psi_and_density():
    base = an.p_dc_slot(0.1, NetworkConfig(noise=0.0))
    for psi in (1e-3, 0.1, 1.0, 5.0):
        for lam in (0.01, 0.1, 2.0):
            assert an.p_dc_slot(lam, NetworkConfig(noise=0.0, psi=psi)) == pytest.approx(base, rel=1e-9)


def test_p_dc_product(cfg):
    assert an.p_dc(cfg) == pytest.approx(an.p_dc_slot(0.1, cfg) * an.p_dc_slot(0.5, cfg), rel=1e-15)


def test_combine_cc_degenerate_cases():
    assert an.combine_cc(1.0, 1.0, 0.3, 0.3) == 1.0
    assert an.combine_cc(0.4, 0.7, 0.0, 0.0) == pytest.approx(0.4 * 0.7)


@pytest.mark.parametrize("gdb", GAMMA_GRID_DB)
def test_cooperation_never_hurts(gdb):
    cfg = NetworkConfig(gamma_star=db_to_linear(gdb))
    assert an.p_cc(cfg) >= an.p_dc(cfg)


@pytest.mark.parametrize("gdb", GAMMA_GRID_DB)
def test_equal_intensities_cooperative_pattern(gdb):
    lam = 0.2
    cfg = NetworkConfig(noise=0.0, gamma_star=db_to_linear(gdb), lambda1=lam, lambda2=lam, lambdaR=lam)
    p = an.p_dc_slot(lam, cfg)
    one_way = p + p * p - p**3
    assert an.p_cc(cfg) == pytest.approx(one_way**2, abs=1e-12)
    assert math.sqrt(an.p_cc(cfg)) == pytest.approx(one_way, abs=1e-3)


def test_relay_path_probability(cfg):
    assert an.p_cc_relay(1, cfg) == pytest.approx(an.p_dc_slot(0.1, cfg) * an.p_dc_slot(0.25, cfg))
    assert an.p_cc_relay(2, cfg) == pytest.approx(an.p_dc_slot(0.5, cfg) * an.p_dc_slot(0.25, cfg))


# -- harvested power ---------------------------------------------------------------


def test_nearest_pathloss_alpha4_expression():
    x = 0.1 * math.pi
    expected = 1 - math.exp(-x) + x * (math.exp(-x) + x * float(ss.expi(-x)))
    assert an.mean_nearest_pathloss(0.1, 4.0) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("alpha", [3.0, 4.0, 5.0])
@pytest.mark.parametrize("lam", [0.01, 0.1, 0.25, 1.0, 3.0])
def test_nearest_pathloss_closed_forms_match_quadrature(alpha, lam):
    closed = an.mean_nearest_pathloss(lam, alpha)
    quadrature = an.mean_nearest_pathloss(lam, alpha, closed_form=False)
    assert abs(closed - quadrature) <= 1e-9 * abs(quadrature)
    assert closed == pytest.approx(nearest_pathloss_oracle(lam, alpha), rel=1e-9)


def test_nearest_pathloss_general_alpha():
    assert an.mean_nearest_pathloss(0.3, 3.7) == pytest.approx(nearest_pathloss_oracle(0.3, 3.7), rel=1e-9)


def test_nearest_pathloss_vanishes_with_density():
    assert an.mean_nearest_pathloss(0.0, 4.0) == 0.0
    assert an.mean_nearest_pathloss(1e-7, 4.0) < 1e-5


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("psi", [0.01, 0.1, 1.0])
@pytest.mark.parametrize("lam", [0.05, 0.25, 1.0])
def test_pdps_matches_component_oracle(mu, psi, lam):
    cfg = NetworkConfig(mu=mu, psi=psi)
    assert an.pdps_dc(lam, cfg) == pytest.approx(pdps_oracle(lam, cfg), rel=1e-9)


def test_pdps_limits(cfg):
    assert an.pdps_dc(0.0, cfg) == 0.0
    assert an.pdps_dc(0.25, cfg.with_(psi=60.0)) < 1e-20
    assert an.pdps_dc(1e-8, cfg) < 1e-8


@given(lam=st.floats(1e-3, 2.0), factor=st.floats(1.01, 3.0))
def test_pdps_increasing_in_density(lam, factor):
    cfg = NetworkConfig()
    assert an.pdps_dc(lam * factor, cfg) > an.pdps_dc(lam, cfg)


def test_peh_examples(cfg):
    assert an.peh_from_pdps(1e-3, cfg.rectenna) == pytest.approx(0.62e-3)
    assert an.peh_from_pdps(1e-2, cfg.rectenna) == pytest.approx(1e-2 * 0.796, rel=1e-12)
    assert an.peh_from_pdps(1e4, cfg.rectenna) == 0.0
    assert an.peh_from_pdps(0.0, cfg.rectenna) == 0.0


def test_cooperative_pdps_composition(cfg):
    tiny = cfg.with_(lambdaR=1e-12)
    assert an.pdps_cc("source1", tiny) == pytest.approx(an.pdps_dc(cfg.lambda2, cfg), rel=1e-9)
    sym = cfg.with_(lambda1=0.3, lambda2=0.3)
    assert an.pdps_cc("relay", sym) == pytest.approx(2 * an.pdps_dc(0.3, sym), rel=1e-15)
    assert an.pdps_cc("source2", cfg) == pytest.approx(an.pdps_dc(0.1, cfg) + an.pdps_dc(0.25, cfg))
    with pytest.raises(ValueError):
        an.pdps_cc("sink", cfg)
    with pytest.raises(ValueError):
        an.pdps_role("dc", "relay", cfg)


# -- lifetime, throughput -------------------------------------------------------------


def test_lifetime_hand_values(cfg):
    assert an.lifetime("dc", False, "source1", cfg) == pytest.approx(1000 / 0.175)
    assert an.lifetime("cc", False, "relay", cfg) == pytest.approx(1000 / (2 * 0.1 + 2 * 0.075))
    assert an.lifetime("cc", False, "source2", cfg) == pytest.approx(1000 / (2 * 0.1 + 0.075))


def test_lifetime_from_power_perpetual():
    assert an.lifetime_from_power(1000.0, 0.175, 0.175, 1.0) == math.inf
    assert an.lifetime_from_power(1000.0, 0.175, 0.5, 1.0) == math.inf
    assert an.lifetime_from_power(1000.0, 0.175, 0.075, 1.0) == pytest.approx(10000.0)


def test_perpetual_network_when_harvest_covers_spend():
    # a low-power node parked at the efficiency peak
    lam = an.optimal_intensity(NetworkConfig(pt=0.01), warn=False).numeric
    cfg = NetworkConfig(pt=0.01, pr=0.0, lambda1=lam, lambda2=lam)
    assert an.network_lifetime("dc", True, cfg) == math.inf


@given(lam1=st.floats(0.01, 1.0), lam2=st.floats(0.01, 1.0), lamr=st.floats(0.01, 1.0), mu=st.floats(0.3, 3.0))
def test_harvesting_never_shortens_lifetime(lam1, lam2, lamr, mu):
    cfg = NetworkConfig(lambda1=lam1, lambda2=lam2, lambdaR=lamr, mu=mu)
    for sc in ("dc", "cc"):
        for role in an.roles_for(sc):
            assert an.lifetime(sc, True, role, cfg) >= an.lifetime(sc, False, role, cfg)


def test_network_lifetime_is_worst_role(cfg):
    roles = {r: an.lifetime("cc", True, r, cfg) for r in an.roles_for("cc")}
    assert an.network_lifetime("cc", True, cfg) == min(roles.values())


def test_throughput_zero_probability(cfg):
    assert an.spatial_throughput("dc", cfg, p=0.0) == 0.0
    assert an.tme("cc", cfg, p=0.0) == 0.0


def test_throughput_ratio_with_equal_probability(cfg):
    assert an.spatial_throughput("dc", cfg, 0.4) / an.spatial_throughput("cc", cfg, 0.4) == pytest.approx(2.0)


def test_tme_is_product(cfg):
    s = an.spatial_throughput("dc", cfg)
    w = an.network_lifetime("dc", True, cfg)
    assert an.tme("dc", cfg) == pytest.approx(s * w * 2)


@pytest.mark.parametrize("lam1", np.round(np.linspace(0.01, 0.5, 8), 3))
def test_direct_beats_cooperative_throughput(lam1):
    cfg = NetworkConfig(lambda1=float(lam1))
    assert an.spatial_throughput("dc", cfg) > an.spatial_throughput("cc", cfg)


def test_cumulative_messages_flat_after_death(cfg):
    end = an.network_lifetime("dc", False, cfg) * 2
    m = an.cumulative_messages("dc", cfg, [0.0, end / 2, end, 2 * end], with_harvesting=False)
    assert m[0] == 0.0 and m[1] < m[2] == m[3]


# -- optimal intensity --------------------------------------------------------------------


@pytest.mark.parametrize("mu,target", [(0.5, 0.25), (1.0, 0.5)])
def test_optimal_intensity_near_reported_values(mu, target):
    res = an.optimal_intensity(NetworkConfig(mu=mu), warn=False)
    assert res.numeric == pytest.approx(target, rel=0.2)
    assert math.isfinite(res.closed_form) and res.closed_form > 0


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
def test_optimum_beats_neighbours(mu):
    cfg = NetworkConfig(mu=mu)
    lam = an.optimal_intensity(cfg, warn=False).numeric
    peh = lambda x: an.peh_from_pdps(an.pdps_dc(x, cfg), cfg.rectenna)  # noqa: E731
    assert peh(lam) >= peh(0.5 * lam) and peh(lam) >= peh(2 * lam)


def test_optimum_scales_inversely_with_power(cfg):
    base = an.optimal_intensity(cfg, warn=False).numeric
    for k in (0.5, 2.0):
        scaled = an.optimal_intensity(cfg.with_(pt=cfg.pt * k), warn=False).numeric
        assert scaled * k == pytest.approx(base, rel=0.1)


def test_closed_form_gap_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="wehnet.analytic"):
        res = an.optimal_intensity(NetworkConfig(mu=1.0))
    assert res.relative_gap > 0.05 and res.warning
    assert any("closed-form" in r.message for r in caplog.records)


def test_monotone_efficiency_has_no_optimum():
    cfg = NetworkConfig(rectenna=RectennaModel(a3=0.0, a2=-7.8e-4, a1=0.03, a0=0.62))
    with pytest.raises(OptimizationError):
        an.optimal_intensity(cfg)


def test_single_interior_peak_of_harvest_curve():
    cfg = NetworkConfig(mu=0.5)
    lams = np.linspace(0.005, 0.5, 200)
    peh = np.array([an.peh_from_pdps(an.pdps_dc(x, cfg), cfg.rectenna) for x in lams])
    k = int(np.argmax(peh))
    assert 0 < k < len(lams) - 1
    assert np.all(np.diff(peh[: k + 1]) > 0) and np.all(np.diff(peh[k:]) < 0)


# -- report --------------------------------------------------------------------------------


def test_report_invariants_and_json(cfg):
    rep = an.analytic_report(cfg)
    d = rep.to_dict()
    assert list(d) == an.AnalyticReport.field_names()
    for k in ("p_dc1", "p_dc2", "p_dc", "p_cc_r1", "p_cc_r2", "p_cc"):
        assert 0 <= d[k] <= 1
    assert rep.p_cc >= rep.p_dc
    assert all(d[k] >= 0 for k in d if k.startswith(("pdps", "peh", "lifetime")))
    assert rep.lifetime_dc == pytest.approx(5714.2857, rel=1e-6)
    assert rep.lambda_opt == pytest.approx(an.optimal_intensity(cfg, warn=False).numeric)
    assert '"p_dc"' in rep.to_json()


def test_report_serializes_infinite_lifetime():
    lam = an.optimal_intensity(NetworkConfig(pt=0.01), warn=False).numeric
    cfg = NetworkConfig(pt=0.01, pr=0.0, lambda1=lam, lambda2=lam)
    assert '"lifetime_dc_eh": "inf"' in an.analytic_report(cfg).to_json()


def test_report_needs_every_intensity(cfg):
    with pytest.raises(ConfigError):
        an.analytic_report(cfg.with_(lambdaR=0.0))


def test_scenario_roles():
    assert an.roles_for(Scenario.DC) == ("source1", "source2")
    assert an.roles_for("cc") == ("source1", "source2", "relay")


@given(g=st.floats(0.01, 300.0), lam=st.floats(0.005, 5.0), noise=st.sampled_from([0.0, 1e-6, 1e-3]))
def test_alpha4_fast_path_agrees_everywhere(g, lam, noise):
    cfg = NetworkConfig(gamma_star=g, noise=noise)
    assert abs(an.p_dc_slot_alpha4(lam, cfg) - an.p_dc_slot(lam, cfg)) < 1e-8


@given(g=st.floats(0.01, 300.0), alpha=st.floats(2.2, 6.0))
def test_noise_free_success_is_rayleigh_coverage(g, alpha):
    cfg = NetworkConfig(gamma_star=g, alpha=alpha, noise=0.0)
    assert an.p_dc_slot(0.1, cfg) == pytest.approx(1.0 / (1.0 + rho_oracle(g, alpha)), rel=1e-8)


@settings(max_examples=30)
@given(
    g=st.floats(0.05, 50.0),
    lam=st.floats(0.005, 3.0),
    alpha=st.sampled_from([3.0, 4.0, 4.5]),
    noise=st.sampled_from([1e-8, 1e-5, 1e-3]),
)
def test_conditional_terms_match_oracles_randomized(g, lam, alpha, noise):
    cfg = NetworkConfig(gamma_star=g, alpha=alpha, noise=noise)
    assert an.success_below_psi(lam, cfg) == pytest.approx(below_oracle(lam, cfg), rel=1e-7, abs=1e-12)
    assert an.success_above_psi(lam, cfg) == pytest.approx(above_oracle(lam, cfg), rel=1e-7, abs=1e-12)
