"""Scenario configuration: INI-style files and the objects built from them.

A config file has four sections::

    [array]      n_antennas, spacing, carrier_ghz (optional, labels only)
    [ler]        x_min, x_max, y_min, y_max, delta, delta_fine
    [user]       x, y
    [threshold]  threshold_db, sigma_th_rel, seed

All lengths are in wavelengths, powers in dB relative to MRT.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from functools import cached_property
from importlib import resources

import numpy as np

from .field import steering_matrix, steering_vector
from .geometry import ArrayGeometry
from .precoder import ThresholdSpec
from .region import RectRegion, SampledRegion, sample_region
from .subspace import SIGMA_TH_REL, SubspaceBasis, compute_basis

DEFAULT_CONFIG_FILE = "scenario_paper.cfg"


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ScenarioConfig:
    n_antennas: int = 1000
    spacing: float = 0.5
    ler: RectRegion = field(default_factory=lambda: RectRegion(2000.0, 2500.0, 0.0, 500.0))
    delta: float = 5.0
    delta_fine: float = 0.25
    user: tuple[float, float] = (2200.0, -200.0)
    threshold_db: float = -80.0
    sigma_th_rel: float = SIGMA_TH_REL
    carrier_ghz: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.threshold_db < 0:
            raise ConfigError(f"threshold_db must be negative, got {self.threshold_db}")
        if not 0 < self.delta_fine < self.delta:
            raise ConfigError(f"need 0 < delta_fine < delta, got {self.delta_fine}, {self.delta}")
        if not 0 < self.sigma_th_rel < 1:
            raise ConfigError(f"sigma_th_rel must lie in (0, 1), got {self.sigma_th_rel}")
        object.__setattr__(self, "user", (float(self.user[0]), float(self.user[1])))
        if self.ler.contains(self.user)[0]:
            warnings.warn(f"user {self.user} lies inside the LER", stacklevel=3)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ler"] = asdict(self.ler)
        d["user"] = list(self.user)
        return d

    def config_hash(self) -> str:
        """Short SHA-256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_cfg(self) -> str:
        sections = {
            "array": {"n_antennas": self.n_antennas, "spacing": self.spacing},
            "ler": {**asdict(self.ler), "delta": self.delta, "delta_fine": self.delta_fine},
            "user": {"x": self.user[0], "y": self.user[1]},
            "threshold": {"threshold_db": self.threshold_db, "sigma_th_rel": self.sigma_th_rel,
                          "seed": self.seed},
        }
        if self.carrier_ghz is not None:
            sections["array"]["carrier_ghz"] = self.carrier_ghz
        lines = []
        for name, items in sections.items():
            lines.append(f"[{name}]")
            lines += [f"{k} = {v!r}" for k, v in items.items()]
            lines.append("")
        return "\n".join(lines)

    def replace(self, **changes) -> "ScenarioConfig":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(changes)
        return ScenarioConfig(**d)


def _get(cp, section, key, conv, default=None):
    if not cp.has_option(section, key):
        if default is None:
            raise ConfigError(f"missing [{section}] {key}")
        return default
    raw = cp.get(section, key).strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    d = ScenarioConfig.__dataclass_fields__
    known = {
        "array": {"n_antennas", "spacing", "carrier_ghz"},
        "ler": {"x_min", "x_max", "y_min", "y_max", "delta", "delta_fine"},
        "user": {"x", "y"},
        "threshold": {"threshold_db", "sigma_th_rel", "seed"},
    }
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")
        extra = set(cp[sec]) - known[sec]
        if extra:
            raise ConfigError(f"unknown keys in [{sec}]: {sorted(extra)}")
    carrier = _get(cp, "array", "carrier_ghz", str, "")
    try:
        ler = RectRegion(*(_get(cp, "ler", k, float) for k in ("x_min", "x_max", "y_min", "y_max")))
        return ScenarioConfig(
            n_antennas=_get(cp, "array", "n_antennas", int),
            spacing=_get(cp, "array", "spacing", float, d["spacing"].default),
            ler=ler,
            delta=_get(cp, "ler", "delta", float),
            delta_fine=_get(cp, "ler", "delta_fine", float, d["delta_fine"].default),
            user=(_get(cp, "user", "x", float), _get(cp, "user", "y", float)),
            threshold_db=_get(cp, "threshold", "threshold_db", float),
            sigma_th_rel=_get(cp, "threshold", "sigma_th_rel", float, d["sigma_th_rel"].default),
            carrier_ghz=float(carrier) if carrier else None,
            seed=_get(cp, "threshold", "seed", int, d["seed"].default),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def default_config() -> ScenarioConfig:
    """The shipped default scenario (N = 1000, 500 x 500 LER, t = -80 dB)."""
    text = resources.files("lerbeam").joinpath("data", DEFAULT_CONFIG_FILE).read_text(encoding="utf-8")
    return parse_config(text)


def reduced_config(n_antennas: int = 64, samples_per_side: int = 25, **changes) -> ScenarioConfig:
    """Desk-scale version of the default scenario.

    Every length (LER, user position, grid step) is scaled by the aperture
    ratio so the geometry stays similar; ``samples_per_side**2`` grid
    points sample the LER.  The fine step is the integer fraction of the
    grid step closest to lambda/4, so the coarse grid stays a subset of
    the fine one.
    """
    base = ScenarioConfig()
    s = (n_antennas - 1) / (base.n_antennas - 1)
    ler = RectRegion(base.ler.x_min * s, base.ler.x_max * s, base.ler.y_min * s, base.ler.y_max * s)
    delta = (ler.x_max - ler.x_min) / (samples_per_side - 1)
    cfg = ScenarioConfig(
        n_antennas=n_antennas,
        ler=ler,
        delta=delta,
        delta_fine=delta / max(round(delta / base.delta_fine), 2),
        user=(base.user[0] * s, base.user[1] * s),
    )
    return cfg.replace(**changes) if changes else cfg


class Scenario:
    """Geometry, grids and lazily computed matrices for one config.

    The steering matrix and the subspace basis are computed once and then
    shared read-only by every precoder run on this scenario.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.geometry = ArrayGeometry(config.n_antennas, config.spacing)
        self.grid: SampledRegion = sample_region(config.ler, config.delta)
        self.fine_grid: SampledRegion = sample_region(config.ler, config.delta_fine)
        self.threshold = ThresholdSpec(config.threshold_db)
        self.precompute_seconds = 0.0

    @cached_property
    def A(self) -> np.ndarray:
        return steering_matrix(self.geometry, self.grid.points)

    @cached_property
    def a_us(self) -> np.ndarray:
        return steering_vector(self.geometry, self.config.user)

    @cached_property
    def basis(self) -> SubspaceBasis:
        t0 = time.perf_counter()
        b = compute_basis(self.A, self.a_us, self.config.sigma_th_rel)
        self.precompute_seconds = time.perf_counter() - t0
        return b

    def user_vector(self, r) -> np.ndarray:
        return steering_vector(self.geometry, r)
