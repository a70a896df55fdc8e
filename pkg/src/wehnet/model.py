"""Network configuration and pointwise physical-layer primitives."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .errors import ConfigError, DomainError

MILLIWATT = 1e-3


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return MILLIWATT * 10.0 ** (dbm / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts / MILLIWATT)


@dataclass(frozen=True)
class RectennaModel:
    """Cubic RF-to-DC efficiency fit, evaluated on input power in dBm."""

    a3: float = -4.6e-5
    a2: float = -7.8e-4
    a1: float = 0.03
    a0: float = 0.62

    def polynomial(self, x_dbm: float) -> float:
        return ((self.a3 * x_dbm + self.a2) * x_dbm + self.a1) * x_dbm + self.a0


class Scenario(enum.Enum):
    """Communication scenario; the value is the number of slots per CP."""

    DC = "dc"
    CC = "cc"

    @property
    def slots_per_cp(self) -> int:
        return 2 if self is Scenario.DC else 4

    @classmethod
    def parse(cls, value: "Scenario | str") -> "Scenario":
        if isinstance(value, Scenario):
            return value
        key = str(value).strip().lower()
        aliases = {"dc": cls.DC, "direct": cls.DC, "cc": cls.CC, "cooperative": cls.CC}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown scenario {value!r}") from None


_FIELDS = (
    "lambda1",
    "lambda2",
    "lambdaR",
    "pt",
    "pr",
    "alpha",
    "mu",
    "noise",
    "gamma_star",
    "psi",
    "slot_seconds",
    "battery_joules",
)


@dataclass(frozen=True)
class NetworkConfig:
    """Physical and protocol parameters of the three-PPP network.

    Powers are in watts, intensities in nodes/m^2; ``gamma_star`` and ``psi``
    are linear ratios.  ``mu`` is the rate of the exponential power fade.
    Defaults reproduce the reference evaluation setup (P_t = 75 mW,
    P_r = 100 mW, alpha = 4, mu = 1, N = -124 dBm, gamma* = 0 dB,
    psi = -10 dB, B = 1000 J).
    """

    lambda1: float = 0.1
    lambda2: float = 0.5
    lambdaR: float = 0.25
    pt: float = 0.075
    pr: float = 0.1
    alpha: float = 4.0
    mu: float = 1.0
    noise: float = dbm_to_watts(-124.0)
    gamma_star: float = 1.0
    psi: float = 0.1
    slot_seconds: float = 1.0
    battery_joules: float = 1000.0
    rectenna: RectennaModel = field(default_factory=RectennaModel)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in _FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or math.isnan(value):
                raise ConfigError(f"{name} must be a real number, got {value!r}")
        for name in ("lambda1", "lambda2", "lambdaR"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not (self.lambda1 > 0 or self.lambda2 > 0):
            raise ConfigError("at least one of lambda1, lambda2 must be > 0")
        if not self.alpha > 2:
            raise ConfigError(f"alpha must be > 2, got {self.alpha}")
        for name in ("pt", "mu", "psi", "gamma_star", "slot_seconds", "battery_joules"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        for name in ("pr", "noise"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not isinstance(self.rectenna, RectennaModel):
            raise ConfigError("rectenna must be a RectennaModel")

    def with_(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(data) - set(_FIELDS) - {"rectenna"}
        if unknown:
            raise ConfigError(f"unknown configuration fields: {sorted(unknown)}")
        kwargs = {k: data[k] for k in _FIELDS if k in data}
        if "rectenna" in data:
            rect = data["rectenna"]
            if not isinstance(rect, dict) or set(rect) - {"a3", "a2", "a1", "a0"}:
                raise ConfigError("rectenna must be an object with keys a3, a2, a1, a0")
            kwargs["rectenna"] = RectennaModel(**{k: float(v) for k, v in rect.items()})
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NetworkConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: "str | Path") -> "NetworkConfig":
        return cls.from_json(Path(path).read_text())

    def intensity(self, role: str) -> float:
        return {"s1": self.lambda1, "s2": self.lambda2, "relay": self.lambdaR}[role]


def dps_fraction(h: float, psi: float) -> float:
    """Fraction of received power routed to the information decoder.

    1 when the nearest-link fade is below ``psi``, otherwise psi/h; the
    remaining 1 - v goes to the harvester.
    """
    if h < psi:
        return 1.0
    return psi / h


def pathloss_gain(distance: float, alpha: float, bounded: bool = False) -> float:
    """d^-alpha, or min(1, d^-alpha) in bounded mode."""
    if distance <= 0:
        raise DomainError("path loss is undefined at distance 0")
    if bounded and distance <= 1.0:
        return 1.0
    return distance ** (-alpha)


def sinr(h: float, d: float, interference: float, cfg: NetworkConfig) -> float:
    """SINR of the nearest link after power splitting.

    ``interference`` is the aggregate received interference power in watts;
    the splitting fraction scales both signal and interference but not noise.
    """
    v = dps_fraction(h, cfg.psi)
    signal = v * cfg.pt * h * pathloss_gain(d, cfg.alpha)
    denom = v * interference + cfg.noise
    if denom == 0.0:
        return math.inf
    return signal / denom


def conversion_efficiency(p_in: float, model: RectennaModel) -> float:
    """RF-to-DC efficiency for input power ``p_in`` watts, clamped to [0, 1]."""
    if not p_in > 0:
        raise DomainError(f"input power must be > 0, got {p_in}")
    eff = model.polynomial(watts_to_dbm(p_in))
    return min(1.0, max(0.0, eff))
