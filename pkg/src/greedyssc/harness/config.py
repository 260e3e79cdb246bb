"""Experiment configuration: one dataclass per subcommand, loaded from JSON."""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..greedy import ALGORITHMS
from ..guarantees import CONVENTIONS


def _grid(start, stop, step):
    return [round(float(x), 10) for x in np.arange(start, stop + 0.5 * step, step)]


class ConfigError(ValueError):
    pass


@dataclass
class _Base:
    master_seed: int = 0
    out: str = "results"

    def validate(self):
        if int(self.master_seed) < 0:
            raise ConfigError("master_seed must be nonnegative")

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class _SynthMixin:
    n: int = 100
    d: int = 20
    L: int = 3
    N_l: int = 150
    m_max: int = None
    tau_abs: float = 1e-6
    tau_rel: float = 1e-6

    def apply_scale(self, scale):
        if scale is None or scale == 1.0:
            return
        if scale <= 0:
            raise ConfigError("scale must be positive")
        self.d = max(1, int(round(self.d * scale)))
        self.N_l = max(2, int(round(self.N_l * scale)))
        self.n = max(self.d * (self.L + 1), int(round(self.n * scale)))
        if self.m_max is not None:
            self.m_max = max(1, int(round(self.m_max * scale)))

    @property
    def iterations(self):
        return self.d if self.m_max is None else self.m_max

    def check_synth(self):
        if self.L < 2 or self.d < 1 or self.N_l < 2:
            raise ConfigError("need L >= 2, d >= 1 and N_l >= 2")
        if self.n < self.d * (self.L + 1):
            raise ConfigError("synthetic construction needs n >= d (L + 1)")
        if self.iterations < 1:
            raise ConfigError("m_max must be >= 1")


def _check_algorithms(algs):
    for a in algs:
        if a.upper() not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}")


@dataclass
class LemmaValidateConfig(_Base):
    phis: list = None
    epsilons: list = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8])
    trials: int = 5000
    n: int = 5

    def validate(self):
        super().validate()
        if self.trials < 1 or self.n < 2:
            raise ConfigError("need trials >= 1 and n >= 2")
        if self.phis is not None and not all(0 < p < np.pi / 2 for p in self.phis):
            raise ConfigError("phis must lie in (0, pi/2)")
        if any(e < 0 for e in self.epsilons):
            raise ConfigError("epsilons must be nonnegative")


@dataclass
class ExtremalSolveConfig(_Base):
    phis: list = field(default_factory=lambda: _grid(0.05, 1.50, 0.05))
    epsilons: list = field(default_factory=lambda: _grid(0.05, 0.95, 0.1))
    n_grid: int = 1_000_000

    def validate(self):
        super().validate()
        if not all(0 < p <= np.pi / 2 for p in self.phis):
            raise ConfigError("phis must lie in (0, pi/2]")
        if any(e < 0 for e in self.epsilons):
            raise ConfigError("epsilons must be nonnegative")
        if self.n_grid < 100:
            raise ConfigError("n_grid too small")


@dataclass
class TraceConfig(_Base, _SynthMixin):
    rhos: list = field(default_factory=lambda: [0.02, 0.5, 0.86])
    epsilons: list = field(default_factory=lambda: [0.1, 0.4, 0.7])
    algorithms: list = field(default_factory=lambda: ["MP", "OMP"])
    trials: int = 20

    def validate(self):
        super().validate()
        self.check_synth()
        _check_algorithms(self.algorithms)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not all(0 <= r < 1 for r in self.rhos):
            raise ConfigError("rhos must lie in [0, 1)")
        if any(e < 0 for e in self.epsilons):
            raise ConfigError("epsilons must be nonnegative")


@dataclass
class CcrSweepConfig(_Base, _SynthMixin):
    rhos: list = field(default_factory=lambda: [0.02, 0.5, 0.86])
    snrs: list = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0])
    algorithms: list = field(default_factory=lambda: ["MP", "OMP"])
    trials: int = 20

    def validate(self):
        super().validate()
        self.check_synth()
        _check_algorithms(self.algorithms)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not all(0 <= r < 1 for r in self.rhos):
            raise ConfigError("rhos must lie in [0, 1)")


@dataclass
class CertifyConfig(_Base, _SynthMixin):
    n: int = 30
    d: int = 4
    L: int = 3
    N_l: int = 12
    rho: float = 0.1
    epsilon: float = 0.02
    algorithms: list = field(default_factory=lambda: ["MP", "OMP"])
    convention: str = "lemma"
    n_directions: int = 20000

    def validate(self):
        super().validate()
        self.check_synth()
        _check_algorithms(self.algorithms)
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention must be one of {CONVENTIONS}")
        if not 0 <= self.rho < 1 or self.epsilon < 0:
            raise ConfigError("need 0 <= rho < 1 and epsilon >= 0")


@dataclass
class ClusterConfig(_Base):
    data: str = None
    n_clusters: int = None
    algorithm: str = "MP"
    m_max: int = 10
    tau_abs: float = 1e-6
    tau_rel: float = 1e-6
    pca_rank: int = None

    def validate(self):
        super().validate()
        if not self.data:
            raise ConfigError("cluster needs a 'data' path")
        _check_algorithms([self.algorithm])
        if self.n_clusters is not None and self.n_clusters < 2:
            raise ConfigError("n_clusters must be >= 2")
        if self.m_max < 1:
            raise ConfigError("m_max must be >= 1")
        if self.pca_rank is not None and self.pca_rank < 1:
            raise ConfigError("pca_rank must be >= 1")


@dataclass
class GenConfig(_Base, _SynthMixin):
    rho: float = 0.5
    epsilon: float = 0.1

    def validate(self):
        super().validate()
        self.check_synth()
        if not 0 <= self.rho < 1 or self.epsilon < 0:
            raise ConfigError("need 0 <= rho < 1 and epsilon >= 0")


CONFIGS = {
    "lemma-validate": LemmaValidateConfig,
    "extremal-solve": ExtremalSolveConfig,
    "trace": TraceConfig,
    "ccr-sweep": CcrSweepConfig,
    "certify": CertifyConfig,
    "cluster": ClusterConfig,
    "gen": GenConfig,
}


def build_config(command, values=None, seed=None, out=None, scale=None, convention=None):
    """Instantiate and validate the config for ``command``; unknown keys are rejected."""
    cls = CONFIGS[command]
    values = dict(values or {})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
    cfg = cls(**values)
    if seed is not None:
        cfg.master_seed = seed
    if out is not None:
        cfg.out = out
    if scale is not None:
        if not isinstance(cfg, _SynthMixin):
            raise ConfigError(f"--scale does not apply to {command}")
        cfg.apply_scale(scale)
    if convention is not None:
        if not hasattr(cfg, "convention"):
            raise ConfigError(f"--convention does not apply to {command}")
        cfg.convention = {"lemma": "lemma", "printed": "printed"}[convention]
    cfg.validate()
    return cfg


def load_config(command, path=None, **overrides):
    values = {}
    if path is not None:
        with open(path) as fh:
            values = json.load(fh)
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
    return build_config(command, values, **overrides)
