"""Rounds of the coherent-state memory test and the adversary strategies.

Alice draws ``alpha`` and ``beta`` from centred priors, sends ``|alpha>``
into Eve's memory and ``|beta>`` afterwards, and Eve answers with
``(xi_x, xi_p)``. The round is scored by

    W = (xi_x - (alpha_x + beta_x))^2 + (xi_p - (alpha_p - beta_p))^2.

Eve only ever touches quantum systems through :class:`QuantumProbe`
handles, which expose channels and measurements but never the underlying
moments, and which are spent by the first measurement.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .bounds import smooth_indicator
from .channels import amplifier, photon_loss, synthesize_recalibration
from .phasespace import (
    GaussianChannel,
    GaussianState,
    apply_channel,
    balanced_beamsplitter,
    coherent_state,
    identity_channel,
    sample_heterodyne,
    sample_homodyne,
    sample_quadratures,
    tensor,
)

SQRT2 = np.sqrt(2.0)


# -- priors -------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianPrior:
    """``P(alpha) = exp(-|alpha|^2 / sigma^2) / (pi sigma^2)``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"Gaussian prior width must be positive, got {self.sigma}")

    @property
    def quadrature_variance(self) -> float:
        return self.sigma**2 / 2.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(0.0, self.sigma / SQRT2, size=(size, 2))


@dataclass(frozen=True)
class SmoothFlatPrior:
    """Product of two smooth indicators of ``[-l/2, l/2]``, normalised by ``1/l^2``."""

    l: float
    delta: float

    def __post_init__(self):
        smooth_indicator(0.0, self.l, self.delta)  # validates (l, delta)

    def density_1d(self, x):
        return smooth_indicator(x, self.l, self.delta) / self.l

    @cached_property
    def quadrature_variance(self) -> float:
        half = (self.l + self.delta) / 2.0
        edges = sorted({-half, -(self.l - self.delta) / 2, (self.l - self.delta) / 2, half})
        return sum(
            integrate.quad(lambda x: x * x * self.density_1d(x), lo, hi, epsabs=1e-12)[0]
            for lo, hi in zip(edges[:-1], edges[1:])
        )

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # rejection from the uniform envelope on the support; acceptance >= 1/2
        half = (self.l + self.delta) / 2.0
        need = 2 * size
        out = np.empty(need)
        filled = 0
        while filled < need:
            m = 2 * (need - filled) + 16
            x = rng.uniform(-half, half, m)
            u = rng.uniform(0.0, 1.0, m)
            acc = x[u < smooth_indicator(x, self.l, self.delta)][: need - filled]
            out[filled : filled + acc.size] = acc
            filled += acc.size
        return out.reshape(size, 2)


Prior = Union[GaussianPrior, SmoothFlatPrior]


# -- quantum systems as seen by Eve ---------------------------------------------


class ConsumedSystemError(RuntimeError):
    """A quantum system was used after being measured or released."""


class EBViolationError(RuntimeError):
    """A one-way LOCC strategy tried to pass quantum data through its record."""


class QuantumProbe:
    """Handle on a quantum system in Eve's lab.

    Supports channels and one measurement. The moments are not exposed, and
    after the measurement (or :meth:`release`) every further use raises
    :class:`ConsumedSystemError`.
    """

    __slots__ = ("_state",)

    def __init__(self, state: GaussianState):
        self._state = state

    def _take(self) -> GaussianState:
        if self._state is None:
            raise ConsumedSystemError("quantum system has already been measured or released")
        return self._state

    def _spend(self) -> GaussianState:
        st = self._take()
        self._state = None
        return st

    @property
    def is_open(self) -> bool:
        return self._state is not None

    @property
    def n_modes(self) -> int:
        return self._take().n_modes

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self._take().batch_shape

    def apply(self, ch: GaussianChannel) -> None:
        self._state = apply_channel(ch, self._take())

    def join(self, other: "QuantumProbe") -> "QuantumProbe":
        """Merge two systems into one (both handles are spent)."""
        return QuantumProbe(tensor(self._spend(), other._spend()))

    def homodyne(self, mode: int, quadrature: str, rng: np.random.Generator) -> np.ndarray:
        return sample_homodyne(self._spend(), mode, quadrature, rng)

    def heterodyne(self, mode: int, rng: np.random.Generator) -> np.ndarray:
        return sample_heterodyne(self._spend(), mode, rng)

    def quadratures(self, indices, rng: np.random.Generator) -> np.ndarray:
        return sample_quadratures(self._spend(), indices, rng)

    def release(self) -> None:
        self._state = None


# -- strategies ---------------------------------------------------------------


@dataclass(frozen=True)
class BeamsplitterHomodyne:
    """Mix memory output and ``beta`` on a 50:50 beamsplitter, read x on port 1 and p on port 2.

    ``beta_channel`` acts on ``|beta>`` before mixing; both readings are
    multiplied by ``gain``.
    """

    beta_channel: GaussianChannel = field(default_factory=identity_channel)
    gain: float = 1.0


@dataclass(frozen=True)
class JointStrategy:
    memory: GaussianChannel
    pre: GaussianChannel = field(default_factory=identity_channel)
    post: GaussianChannel = field(default_factory=identity_channel)
    measurement: BeamsplitterHomodyne = field(default_factory=BeamsplitterHomodyne)
    name: str = "joint"


@dataclass(frozen=True)
class OneWayLOCCStrategy:
    """Measure ``|alpha>``, keep a classical record, then measure ``|beta>``.

    ``measure_alpha(probe, rng)`` returns the record (numeric array with one
    row per round). ``estimate(record, beta_probe, rng)`` returns ``xi`` with
    shape ``(rounds, 2)``. The alpha system is released before ``estimate``
    runs, so no estimator can reach it.
    """

    measure_alpha: Callable[[QuantumProbe, np.random.Generator], np.ndarray]
    estimate: Callable[[np.ndarray, QuantumProbe, np.random.Generator], np.ndarray]
    name: str = "one-way-locc"


EveStrategy = Union[JointStrategy, OneWayLOCCStrategy]


def honest_strategy() -> JointStrategy:
    return JointStrategy(memory=identity_channel(), name="honest")


def tailored_loss_strategy(eta: float, nu: float = 1.0) -> JointStrategy:
    """Lossy memory with amplification ``nu`` on the stored arm and matched loss on ``beta``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if not 1.0 <= nu <= (1.0 / eta) * (1.0 + 1e-12):
        raise ValueError(f"nu must lie in [1, 1/eta] = [1, {1.0 / eta}], got {nu}")
    total = min(eta * nu, 1.0)
    return JointStrategy(
        memory=photon_loss(eta),
        post=amplifier(nu),
        measurement=BeamsplitterHomodyne(photon_loss(total), gain=1.0 / np.sqrt(total)),
        name="tailored",
    )


def generic_recalibrated_strategy(mem: GaussianChannel) -> JointStrategy:
    plan = synthesize_recalibration(mem)
    return JointStrategy(memory=mem, pre=plan.g1, post=plan.g2, name="recalibrated")


def _shrink_factor(sigma: float) -> float:
    return sigma**2 / (1.0 + sigma**2)


def eb_shrinkage_strategy(sigma_a: float, sigma_b: float) -> OneWayLOCCStrategy:
    """Heterodyne each input and shrink toward the prior mean.

    A heterodyne reading divided by ``sqrt2`` estimates ``alpha`` with noise
    variance 1/2 per quadrature; against a prior of variance ``sigma^2 / 2``
    the posterior mean multiplies it by ``sigma^2 / (1 + sigma^2)``.
    """
    ka, kb = _shrink_factor(sigma_a), _shrink_factor(sigma_b)

    def measure_alpha(probe, rng):
        return ka * probe.heterodyne(0, rng) / SQRT2

    def estimate(record, probe, rng):
        b = kb * probe.heterodyne(0, rng) / SQRT2
        return np.stack([record[:, 0] + b[:, 0], record[:, 1] - b[:, 1]], axis=-1)

    return OneWayLOCCStrategy(measure_alpha, estimate, name="shrinkage")


def eb_prior_mean_strategy(prior_a: Prior, prior_b: Prior) -> OneWayLOCCStrategy:
    """Ignore both states and answer with the prior means (zero for centred priors)."""
    del prior_a, prior_b  # centred by construction

    def measure_alpha(probe, rng):
        return np.zeros(probe.batch_shape + (2,))

    def estimate(record, probe, rng):
        return record.copy()

    return OneWayLOCCStrategy(measure_alpha, estimate, name="prior-mean")


# -- rounds -------------------------------------------------------------------


def witness_score(alpha: np.ndarray, beta: np.ndarray, xi: np.ndarray) -> np.ndarray:
    ex = xi[..., 0] - (alpha[..., 0] + beta[..., 0])
    ep = xi[..., 1] - (alpha[..., 1] - beta[..., 1])
    return ex * ex + ep * ep


def _respond_joint(s: JointStrategy, alpha, beta, rng) -> np.ndarray:
    a = QuantumProbe(coherent_state(alpha[:, 0], alpha[:, 1]))
    a.apply(s.pre)
    a.apply(s.memory)
    a.apply(s.post)
    # beta only exists once the memory has produced its output
    b = QuantumProbe(coherent_state(beta[:, 0], beta[:, 1]))
    b.apply(s.measurement.beta_channel)
    joint = a.join(b)
    joint.apply(balanced_beamsplitter())
    return s.measurement.gain * joint.quadratures([0, 3], rng)


def _classical_record(record, n: int) -> np.ndarray:
    if isinstance(record, (QuantumProbe, GaussianState)):
        raise EBViolationError("record must be classical data, got a quantum system")
    try:
        arr = np.array(record, dtype=float)
    except (TypeError, ValueError) as exc:
        raise EBViolationError(f"record must be numeric classical data: {exc}") from None
    if arr.ndim == 0 or arr.shape[0] != n:
        raise EBViolationError(f"record must have one row per round, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _respond_locc(s: OneWayLOCCStrategy, alpha, beta, rng) -> np.ndarray:
    n = alpha.shape[0]
    a = QuantumProbe(coherent_state(alpha[:, 0], alpha[:, 1]))
    record = _classical_record(s.measure_alpha(a, rng), n)
    a.release()
    b = QuantumProbe(coherent_state(beta[:, 0], beta[:, 1]))
    xi = s.estimate(record, b, rng)
    b.release()
    return xi


def respond(strategy: EveStrategy, alpha: np.ndarray, beta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Eve's answers ``xi`` (shape ``(n, 2)``) for a batch of inputs."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1, 2)
    beta = np.asarray(beta, dtype=float).reshape(-1, 2)
    if isinstance(strategy, JointStrategy):
        xi = _respond_joint(strategy, alpha, beta, rng)
    elif isinstance(strategy, OneWayLOCCStrategy):
        xi = _respond_locc(strategy, alpha, beta, rng)
    else:
        raise TypeError(f"unknown strategy type {type(strategy).__name__}")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != alpha.shape:
        raise ValueError(f"strategy returned xi of shape {xi.shape}, expected {alpha.shape}")
    return xi


@dataclass(frozen=True)
class Round:
    alpha: tuple[float, float]
    beta: tuple[float, float]
    xi: tuple[float, float]
    score: float


@dataclass(frozen=True)
class RoundBatch:
    alpha: np.ndarray
    beta: np.ndarray
    xi: np.ndarray
    score: np.ndarray

    def __len__(self) -> int:
        return self.score.shape[0]


def run_rounds(strategy: EveStrategy, prior_a: Prior, prior_b: Prior, n: int, rng: np.random.Generator) -> RoundBatch:
    alpha = prior_a.sample(rng, n)
    beta = prior_b.sample(rng, n)
    xi = respond(strategy, alpha, beta, rng)
    return RoundBatch(alpha, beta, xi, witness_score(alpha, beta, xi))


def run_round(strategy: EveStrategy, prior_a: Prior, prior_b: Prior, rng: np.random.Generator) -> Round:
    b = run_rounds(strategy, prior_a, prior_b, 1, rng)
    return Round(tuple(b.alpha[0]), tuple(b.beta[0]), tuple(b.xi[0]), float(b.score[0]))
