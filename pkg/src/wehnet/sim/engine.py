"""Slot- and CP-level simulation of the source/relay network on a torus."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import NetworkConfig, Scenario
from .geometry import Window, sample_ppp
from .kernels import get_kernel

UINT64_MAX = 2**64 - 1


def _check_seed(master_seed: int) -> int:
    seed = int(master_seed)
    if seed != master_seed or not 0 <= seed <= UINT64_MAX:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master_seed!r}")
    return seed


def realization_streams(master_seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (placement, fading) generators for realization ``index``."""
    seq = np.random.SeedSequence(_check_seed(master_seed), spawn_key=(int(index),))
    place, fade = seq.spawn(2)
    return np.random.default_rng(place), np.random.default_rng(fade)


@dataclass(frozen=True, eq=False)
class Realization:
    """One deployment of sources of both types and relays."""

    s1_points: np.ndarray
    s2_points: np.ndarray
    relay_points: np.ndarray
    window: Window
    seed_path: tuple[int, int] | None = None

    def count(self, role: str) -> int:
        return {"s1": self.s1_points, "s2": self.s2_points, "relay": self.relay_points}[role].shape[0]


def sample_realization(
    cfg: NetworkConfig, window: Window, rng: np.random.Generator, seed_path: tuple[int, int] | None = None
) -> Realization:
    s1 = sample_ppp(cfg.lambda1, window, rng)
    s2 = sample_ppp(cfg.lambda2, window, rng)
    relays = sample_ppp(cfg.lambdaR, window, rng)
    return Realization(s1, s2, relays, window, seed_path)


@dataclass(frozen=True, eq=False)
class SlotResult:
    """Per-receiver outcome of one time slot.

    ``harvested`` is the RF energy (J, before conversion) routed to the
    harvester; ``campbell`` the fade-weighted bounded path-loss sum at unit
    transmit power, kept for diagnostics.
    """

    nearest_index: np.ndarray
    distance: np.ndarray
    h_c: np.ndarray
    interference: np.ndarray
    sinr: np.ndarray
    harvested: np.ndarray
    campbell: np.ndarray

    def decoded(self, gamma_star: float) -> np.ndarray:
        return self.sinr >= gamma_star

    def __len__(self) -> int:
        return self.sinr.shape[0]


def run_slot(
    transmitters: np.ndarray,
    receivers: np.ndarray,
    cfg: NetworkConfig,
    rng: np.random.Generator,
    window: Window,
    backend: str | None = None,
) -> SlotResult:
    """All ``transmitters`` send at once; every receiver listens to its nearest one."""
    tx = np.ascontiguousarray(transmitters, dtype=np.float64).reshape(-1, 2)
    rx = np.ascontiguousarray(receivers, dtype=np.float64).reshape(-1, 2)
    n_rx, n_tx = rx.shape[0], tx.shape[0]
    if n_tx == 0:
        zeros = np.zeros(n_rx)
        return SlotResult(np.full(n_rx, -1, dtype=np.int64), np.full(n_rx, np.inf),
                          zeros, zeros.copy(), zeros.copy(), zeros.copy(), zeros.copy())
    fades = rng.standard_exponential(size=(n_rx, n_tx))
    if cfg.mu != 1.0:
        fades /= cfg.mu
    idx, dist, hc, interf, harvest = get_kernel(backend)(rx, tx, fades, window.side, cfg.alpha)

    interference = cfg.pt * interf
    above = hc >= cfg.psi
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(above, cfg.psi / hc, 1.0)
        signal = v * cfg.pt * hc * dist ** (-cfg.alpha)
        denom = v * interference + cfg.noise
        sinr = np.where(denom > 0.0, signal / denom, np.inf)
        share = np.where(above, 1.0 - cfg.psi / hc, 0.0)
    harvested = cfg.slot_seconds * share * cfg.pt * harvest
    return SlotResult(idx, dist, hc, interference, sinr, harvested, harvest)


def _choose(n: int, k: int | None, rng: np.random.Generator) -> np.ndarray:
    if k is None or k >= n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=k, replace=False))


@dataclass(frozen=True, eq=False)
class CpOutcome:
    """Everything observed during one communication period.

    Slot 1: S1 -> S2 probes (and, in CC, listening relays); slot 2: S2 -> S1
    probes (and relays); slots 3/4 (CC only): relays -> S1 / S2 probes.
    The first rows of slots 1 and 2 belong to the source probes, the rest
    to ``relay_rx``.
    """

    scenario: Scenario
    gamma_star: float
    slot_seconds: float
    s1_probes: np.ndarray
    s2_probes: np.ndarray
    relay_probes: np.ndarray
    relay_rx: np.ndarray
    slot1: SlotResult
    slot2: SlotResult
    slot3: SlotResult | None = None
    slot4: SlotResult | None = None

    @property
    def n1(self) -> int:
        return self.s1_probes.shape[0]

    @property
    def n2(self) -> int:
        return self.s2_probes.shape[0]

    def _g(self, gamma_star):
        return self.gamma_star if gamma_star is None else gamma_star

    # decoding ------------------------------------------------------------
    def direct_s2(self, gamma_star: float | None = None) -> np.ndarray:
        """S2 probes that decoded their nearest S1 in slot 1."""
        return self.slot1.sinr[: self.n2] >= self._g(gamma_star)

    def direct_s1(self, gamma_star: float | None = None) -> np.ndarray:
        return self.slot2.sinr[: self.n1] >= self._g(gamma_star)

    def relay_holds(self, message: int, gamma_star: float | None = None) -> np.ndarray:
        """Flags over ``relay_rx``: relay decoded a type-``message`` payload."""
        slot = self.slot1 if message == 1 else self.slot2
        start = self.n2 if message == 1 else self.n1
        return slot.sinr[start:] >= self._g(gamma_star)

    def _relay_path(self, slot: SlotResult, message: int, gamma_star) -> np.ndarray:
        g = self._g(gamma_star)
        pos = np.searchsorted(self.relay_rx, slot.nearest_index)
        return (slot.sinr >= g) & self.relay_holds(message, g)[pos]

    def relay_s2(self, gamma_star: float | None = None) -> np.ndarray:
        """S2 probes that got a type-1 payload through their nearest relay."""
        if self.slot4 is None:
            return np.zeros(self.n2, dtype=bool)
        return self._relay_path(self.slot4, 1, gamma_star)

    def relay_s1(self, gamma_star: float | None = None) -> np.ndarray:
        if self.slot3 is None:
            return np.zeros(self.n1, dtype=bool)
        return self._relay_path(self.slot3, 2, gamma_star)

    def success_s2(self, gamma_star: float | None = None) -> np.ndarray:
        return self.direct_s2(gamma_star) | self.relay_s2(gamma_star)

    def success_s1(self, gamma_star: float | None = None) -> np.ndarray:
        return self.direct_s1(gamma_star) | self.relay_s1(gamma_star)

    # energy ----------------------------------------------------------------
    def energy(self, role: str, scenario: Scenario | str | None = None) -> np.ndarray:
        """RF energy (J) harvested per CP by each probe of ``role``.

        ``scenario`` may be DC on a CC outcome to count only slots 1-2.
        """
        scenario = self.scenario if scenario is None else Scenario.parse(scenario)
        cc = scenario is Scenario.CC
        if cc and self.slot3 is None:
            raise ValueError("outcome has no relay slots")
        if role == "source1":
            e = self.slot2.harvested[: self.n1]
            return e + self.slot3.harvested if cc else e.copy()
        if role == "source2":
            e = self.slot1.harvested[: self.n2]
            return e + self.slot4.harvested if cc else e.copy()
        if role == "relay":
            if not cc:
                raise ValueError("relays do not take part in the direct scenario")
            pos = np.searchsorted(self.relay_rx, self.relay_probes)
            return self.slot1.harvested[self.n2 + pos] + self.slot2.harvested[self.n1 + pos]
        raise ValueError(f"unknown role {role!r}")


def run_cp(
    scenario: Scenario | str,
    realization: Realization,
    cfg: NetworkConfig,
    rng: np.random.Generator,
    probes: int | None = None,
    backend: str | None = None,
) -> CpOutcome:
    """Simulate one communication period on a fixed deployment.

    ``probes`` caps the number of receiving nodes of each type that are
    tracked (chosen uniformly at random); None tracks everyone.  Slots are
    independent given the deployment, so the relay slots are drawn first to
    learn which relays must also be tracked while listening in slots 1-2.
    """
    scenario = Scenario.parse(scenario)
    s1, s2, rr = realization.s1_points, realization.s2_points, realization.relay_points
    w = realization.window
    if s1.shape[0] == 0 or s2.shape[0] == 0:
        raise ValueError("both source sets must be nonempty")
    p1 = _choose(s1.shape[0], probes, rng)
    p2 = _choose(s2.shape[0], probes, rng)
    if scenario is Scenario.DC:
        slot1 = run_slot(s1, s2[p2], cfg, rng, w, backend)
        slot2 = run_slot(s2, s1[p1], cfg, rng, w, backend)
        empty = np.zeros(0, dtype=np.int64)
        return CpOutcome(scenario, cfg.gamma_star, cfg.slot_seconds, p1, p2, empty, empty, slot1, slot2)

    if rr.shape[0] == 0:
        raise ValueError("the cooperative scenario needs at least one relay")
    pr = _choose(rr.shape[0], probes, rng)
    slot3 = run_slot(rr, s1[p1], cfg, rng, w, backend)
    slot4 = run_slot(rr, s2[p2], cfg, rng, w, backend)
    relay_rx = np.unique(np.concatenate((pr, slot3.nearest_index, slot4.nearest_index)))
    slot1 = run_slot(s1, np.concatenate((s2[p2], rr[relay_rx])), cfg, rng, w, backend)
    slot2 = run_slot(s2, np.concatenate((s1[p1], rr[relay_rx])), cfg, rng, w, backend)
    return CpOutcome(scenario, cfg.gamma_star, cfg.slot_seconds, p1, p2, pr, relay_rx,
                     slot1, slot2, slot3, slot4)
