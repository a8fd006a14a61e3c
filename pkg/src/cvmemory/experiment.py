"""Seeded Monte Carlo estimation of the witness and certification verdicts."""
from __future__ import annotations

import configparser
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .bounds import eb_bound, equivalent_sigma
from .channels import classify, photon_loss
from .protocol import (
    GaussianPrior,
    SmoothFlatPrior,
    eb_prior_mean_strategy,
    eb_shrinkage_strategy,
    generic_recalibrated_strategy,
    honest_strategy,
    run_rounds,
    tailored_loss_strategy,
)

STRATEGIES = ("honest", "tailored", "recalibrated", "shrinkage", "prior-mean")
PRIORS = ("gauss", "smoothflat")
CERTIFIED = "CERTIFIED_NON_EB"
NOT_CERTIFIED = "NOT_CERTIFIED"


class ValidationError(ValueError):
    """Bad user-supplied configuration."""


# section each config key is stored under in the INI format
_SECTIONS = {
    "prior": "alice",
    "sigma_a": "alice",
    "sigma_b": "alice",
    "l": "alice",
    "delta": "alice",
    "strategy": "eve",
    "eta": "eve",
    "nu": "eve",
    "rounds": "run",
    "seed": "run",
    "chunk_size": "run",
    "z": "run",
}


@dataclass(frozen=True)
class ExperimentConfig:
    strategy: str = "honest"
    eta: float = 1.0
    nu: float = 1.0
    prior: str = "gauss"
    sigma_a: float = 5.0
    sigma_b: float = 5.0
    l: float = 10.0
    delta: float = 1.0
    rounds: int = 1_000_000
    seed: int = 0
    chunk_size: int = 65_536
    z: float = 5.0

    def validate(self) -> "ExperimentConfig":
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.prior not in PRIORS:
            raise ValidationError(f"prior must be one of {PRIORS}, got {self.prior!r}")
        if self.rounds < 2:
            raise ValidationError(f"rounds must be at least 2, got {self.rounds}")
        if self.chunk_size < 1:
            raise ValidationError(f"chunk_size must be positive, got {self.chunk_size}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.z > 0:
            raise ValidationError(f"z must be positive, got {self.z}")
        try:
            build_priors(self)
            build_strategy(self)
        except ValidationError:
            raise
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for section in ("alice", "eve", "run"):
            cp[section] = {}
        for key, value in self.to_dict().items():
            cp[_SECTIONS[key]][key] = repr(value) if isinstance(value, float) else str(value)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(read_ini(text))

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        for key, raw in values.items():
            if key not in types:
                raise ValidationError(f"unknown config key {key!r}")
            kind = types[key]
            try:
                if kind == "int":
                    kwargs[key] = int(raw)
                elif kind == "float":
                    kwargs[key] = float(raw)
                else:
                    kwargs[key] = str(raw)
            except ValueError:
                raise ValidationError(f"bad value for {key}: {raw!r}") from None
        return cls(**kwargs)


def read_ini(text: str) -> dict:
    """Flatten an ``[alice] / [eve] / [run]`` file into a key -> string mapping."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse config: {exc}") from None
    out = {}
    for section in cp.sections():
        if section not in ("alice", "eve", "run"):
            raise ValidationError(f"unknown config section [{section}]")
        for key, value in cp[section].items():
            if _SECTIONS.get(key) != section:
                raise ValidationError(f"key {key!r} does not belong in [{section}]")
            out[key] = value
    return out


def build_priors(cfg: ExperimentConfig):
    if cfg.prior == "gauss":
        return GaussianPrior(cfg.sigma_a), GaussianPrior(cfg.sigma_b)
    p = SmoothFlatPrior(cfg.l, cfg.delta)
    return p, p


def build_strategy(cfg: ExperimentConfig):
    if cfg.strategy == "honest":
        return honest_strategy()
    if cfg.strategy == "tailored":
        return tailored_loss_strategy(cfg.eta, cfg.nu)
    if cfg.strategy == "recalibrated":
        return generic_recalibrated_strategy(photon_loss(cfg.eta))
    pa, pb = build_priors(cfg)
    if cfg.strategy == "shrinkage":
        # linear shrinkage only needs the prior variance, sigma^2 / 2 for Gaussians
        return eb_shrinkage_strategy(
            math.sqrt(2 * pa.quadrature_variance), math.sqrt(2 * pb.quadrature_variance)
        )
    return eb_prior_mean_strategy(pa, pb)


def prior_bound(cfg: ExperimentConfig) -> float:
    """EB bound at the configured priors (FIM-equivalent width for smooth-flat priors)."""
    if cfg.prior == "gauss":
        return eb_bound(cfg.sigma_a, cfg.sigma_b)
    s = equivalent_sigma(cfg.l, cfg.delta)
    return eb_bound(s, s)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for chunk ``index``; SeedSequence hashes ``(seed, index)`` into PCG64 state."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(frozen=True)
class ChunkStats:
    total: float
    total_sq: float
    count: int


def _run_chunk(cfg: ExperimentConfig, strategy, priors, index: int) -> ChunkStats:
    start = index * cfg.chunk_size
    n = min(cfg.chunk_size, cfg.rounds - start)
    scores = run_rounds(strategy, priors[0], priors[1], n, chunk_rng(cfg.seed, index)).score
    return ChunkStats(math.fsum(scores), math.fsum(scores * scores), n)


@dataclass(frozen=True)
class WitnessResult:
    config: ExperimentConfig
    mean: float
    stderr: float
    n: int
    bound: float
    verdict: str

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def strategy(self) -> str:
        return self.config.strategy

    def to_dict(self, wall_time_ms: float | None = None) -> dict:
        out = {
            "config": self.config.to_dict(),
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
            "bound": self.bound,
            "verdict": self.verdict,
            "wall_time_ms": wall_time_ms,
        }
        if self.config.prior == "smoothflat":
            out["bound_note"] = (
                "bound evaluated at the FIM-equivalent Gaussian width; "
                "no soundness guarantee for smooth-flat priors"
            )
        return out

    def to_json(self, wall_time_ms: float | None = None) -> str:
        return json.dumps(self.to_dict(wall_time_ms), indent=2)


def verdict_for(mean: float, stderr: float, bound: float, z: float) -> str:
    return CERTIFIED if mean + z * stderr < bound else NOT_CERTIFIED


def estimate_witness(cfg: ExperimentConfig, threads: int = 1) -> WitnessResult:
    """Run ``cfg.rounds`` rounds in seeded chunks and compare with the EB bound.

    The result depends only on ``(seed, rounds, chunk_size)`` and the
    strategy/prior parameters: chunk sums are combined with ``math.fsum``,
    which is exactly rounded and hence independent of completion order.
    """
    cfg.validate()
    strategy = build_strategy(cfg)
    priors = build_priors(cfg)
    n_chunks = -(-cfg.rounds // cfg.chunk_size)

    def work(i):
        return _run_chunk(cfg, strategy, priors, i)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(work, range(n_chunks)))
    else:
        stats = [work(i) for i in range(n_chunks)]

    n = sum(s.count for s in stats)
    total = math.fsum(s.total for s in stats)
    total_sq = math.fsum(s.total_sq for s in stats)
    mean = total / n
    var = max(math.fsum([total_sq, -total * mean]) / (n - 1), 0.0)
    stderr = math.sqrt(var / n)
    bound = prior_bound(cfg)
    return WitnessResult(cfg, mean, stderr, n, bound, verdict_for(mean, stderr, bound, cfg.z))


def timed_estimate(cfg: ExperimentConfig, threads: int = 1) -> tuple[WitnessResult, float]:
    t0 = time.perf_counter()
    res = estimate_witness(cfg, threads)
    return res, (time.perf_counter() - t0) * 1e3


SWEEP_HEADER = ("eta", "is_cp", "is_eb", "is_gib", "strategy", "mean", "stderr", "bound", "verdict")


def sweep(etas, base: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Photon-loss regime table: tailored strategy everywhere, recalibration where non-gIB."""
    rows = []
    for eta in etas:
        if not 0.0 < eta <= 1.0:
            raise ValidationError(f"sweep grid must lie in (0, 1], got {eta}")
        cls = classify(photon_loss(eta))
        names = ["tailored"] if cls.is_gib else ["tailored", "recalibrated"]
        for name in names:
            res = estimate_witness(replace(base, strategy=name, eta=eta, nu=1.0), threads)
            rows.append(
                {
                    "eta": eta,
                    "is_cp": cls.is_cp,
                    "is_eb": cls.is_eb,
                    "is_gib": cls.is_gib,
                    "strategy": name,
                    "mean": res.mean,
                    "stderr": res.stderr,
                    "bound": res.bound,
                    "verdict": res.verdict,
                }
            )
    return rows
