"""Gaussian channel zoo, CP / gIB / EB decisions and the recalibration synthesizer."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phasespace import (
    TOL,
    GaussianChannel,
    apply_channel,
    coherent_state,
    identity_channel,
    min_eig_hermitian,
    symplectic_form,
    williamson_1mode,
)


class ConsistencyError(RuntimeError):
    """An internal invariant that the mathematics guarantees was violated."""


class GIBChannelError(ValueError):
    """Raised when a recalibration plan is requested for a gIB channel."""


def photon_loss(eta: float) -> GaussianChannel:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity eta must lie in [0, 1], got {eta}")
    return GaussianChannel(np.sqrt(eta) * np.eye(2), (1.0 - eta) * np.eye(2))


def amplifier(nu: float) -> GaussianChannel:
    """Quantum-limited phase-insensitive amplifier with gain ``nu >= 1``."""
    if nu < 1.0:
        raise ValueError(f"amplifier gain nu must be >= 1, got {nu}")
    return GaussianChannel(np.sqrt(nu) * np.eye(2), (nu - 1.0) * np.eye(2))


def compose(outer: GaussianChannel, inner: GaussianChannel) -> GaussianChannel:
    """Channel that applies ``inner`` first and then ``outer``."""
    if outer.n_modes != inner.n_modes:
        raise ValueError(f"cannot compose {outer.n_modes}-mode and {inner.n_modes}-mode channels")
    Ko = outer.K
    M = Ko @ inner.M @ Ko.T + outer.M
    return GaussianChannel(Ko @ inner.K, 0.5 * (M + M.T), Ko @ inner.c + outer.c)


@dataclass(frozen=True)
class ChannelClassification:
    """CP / gIB / EB flags with their decision margins.

    For one mode the slacks are ``det M`` minus the respective threshold; for
    more modes they are minimum eigenvalues of the Hermitian test matrices.
    ``is_eb`` is ``None`` when the multi-mode EB question is left undecided.
    """

    is_cp: bool
    is_eb: bool | None
    is_gib: bool
    slack_cp: float
    slack_gib: float
    slack_eb: float | None

    def summary(self) -> str:
        def yn(flag):
            return "undecided" if flag is None else ("yes" if flag else "no")

        return f"CP {yn(self.is_cp)}, EB {yn(self.is_eb)}, gIB {yn(self.is_gib)}"


def classify(ch: GaussianChannel, tol: float = TOL) -> ChannelClassification:
    m_min = float(np.linalg.eigvalsh(ch.M)[0])
    if m_min < -tol:
        raise ValueError(f"M is not positive semidefinite (min eigenvalue {m_min:.3e})")

    if ch.n_modes == 1:
        det_k = float(np.linalg.det(ch.K))
        det_m = float(np.linalg.det(ch.M))
        slack_cp = det_m - (det_k - 1.0) ** 2
        slack_gib = det_m - det_k**2
        slack_eb = det_m - (det_k + 1.0) ** 2
        is_cp = slack_cp >= -tol
        return ChannelClassification(
            is_cp=is_cp,
            is_eb=is_cp and slack_eb >= -tol,
            is_gib=is_cp and slack_gib >= -tol,
            slack_cp=slack_cp,
            slack_gib=slack_gib,
            slack_eb=slack_eb,
        )

    om = symplectic_form(ch.n_modes)
    kok = ch.K @ om @ ch.K.T
    slack_cp = min_eig_hermitian(ch.M + 1j * om - 1j * kok)
    slack_gib = min_eig_hermitian(ch.M - 1j * kok)
    is_cp = slack_cp >= -tol
    is_gib = is_cp and slack_gib >= -tol
    is_eb = None
    slack_eb = None
    if is_cp and not is_gib:
        is_eb = False
    elif is_cp:
        # sufficient split M = 1 + (M - 1): the vacuum-noise term satisfies 1 + i Omega >= 0
        slack_eb = min_eig_hermitian(ch.M - np.eye(2 * ch.n_modes) - 1j * kok)
        if slack_eb >= -tol:
            is_eb = True
        elif np.allclose(ch.K, 0.0, atol=tol):
            slack_eb = min_eig_hermitian(ch.M + 1j * om)
            is_eb = slack_eb >= -tol
    elif not is_cp:
        is_eb = False
    return ChannelClassification(is_cp, is_eb, is_gib, slack_cp, slack_gib, slack_eb)


@dataclass(frozen=True)
class RecalibrationPlan:
    memory: GaussianChannel
    g1: GaussianChannel
    g2: GaussianChannel
    lam: float
    predicted_trace: float
    predicted_witness: float

    @property
    def effective_memory(self) -> GaussianChannel:
        return compose(self.g2, compose(self.memory, self.g1))


# Target for tr(S A S^T) when A is singular but nonzero: a squeezer can push
# that rank-one noise arbitrarily close to zero, so pick a small fixed value.
_SQUEEZE_RESIDUAL = 1e-6


def _squeezer_for_singular(a: np.ndarray) -> np.ndarray:
    """Symplectic S with ``tr(S a S^T) == _SQUEEZE_RESIDUAL`` for rank-one PSD ``a``."""
    w, v = np.linalg.eigh(a)
    weight = w[1]
    eps = np.sqrt(_SQUEEZE_RESIDUAL / weight)
    # v[:, 1] spans the range of a; squeeze it by eps, antisqueeze the kernel
    return v @ np.diag([1.0 / eps, eps]) @ v.T


def synthesize_recalibration(mem: GaussianChannel, tol: float = TOL) -> RecalibrationPlan:
    """Pre/post-processing channels that turn a non-gIB memory into an unbiased one.

    With ``A = K^-1 M K^-T = S^-1 (lam 1) S^-T`` the plan is
    ``g1 = (S^-1, 0, 0)`` and ``g2 = (S K^-1, 1, -S K^-1 c)``. On coherent
    inputs the composed memory ``g2 . mem . g1`` keeps the displacement and
    outputs covariance ``(2 + lam) 1``, so the honest measurement scores
    ``(3 + lam) / 2 < 2``.
    """
    if mem.n_modes != 1:
        raise ValueError("recalibration is only defined for single-mode memories")
    cls = classify(mem, tol)
    if not cls.is_cp:
        raise ValueError("memory channel is not completely positive")
    if cls.is_gib:
        raise GIBChannelError("channel is gIB: no recalibration plan exists")
    det_k = float(np.linalg.det(mem.K))
    if abs(det_k) < tol:
        raise ValueError("memory has a singular K matrix")
    if det_k <= 0.5:
        raise ConsistencyError(f"CP non-gIB channel with det K = {det_k} <= 1/2")

    k_inv = np.linalg.inv(mem.K)
    a = k_inv @ mem.M @ k_inv.T
    a = 0.5 * (a + a.T)
    scale = max(float(np.trace(a)), 0.0)
    if scale <= tol:
        # unitary memory: nothing to squeeze
        s = np.eye(2)
        lam = 0.0
    elif np.linalg.det(a) > 1e-14 * scale**2:
        wf = williamson_1mode(a)
        s = np.linalg.inv(wf.s_inv)
        lam = wf.lam
    else:
        s = _squeezer_for_singular(a)
        lam = float(np.trace(s @ a @ s.T)) / 2.0
    if not lam < 1.0:
        raise ConsistencyError(f"symplectic eigenvalue {lam} >= 1 for a non-gIB memory")

    g1 = GaussianChannel(np.linalg.inv(s), np.zeros((2, 2)))
    k2 = s @ k_inv
    g2 = GaussianChannel(k2, np.eye(2), -k2 @ mem.c)
    for name, g in (("g1", g1), ("g2", g2)):
        if not classify(g, tol).is_cp:
            raise ConsistencyError(f"{name} is not completely positive")

    predicted_trace = 2.0 * (1.0 + lam) + 2.0
    plan = RecalibrationPlan(
        memory=mem,
        g1=g1,
        g2=g2,
        lam=lam,
        predicted_trace=predicted_trace,
        predicted_witness=(predicted_trace + 2.0) / 4.0,
    )
    _verify_plan(plan, tol)
    return plan


def _verify_plan(plan: RecalibrationPlan, tol: float) -> None:
    eff = plan.effective_memory
    scale = max(1.0, float(np.abs(eff.K).max()), float(np.abs(eff.M).max()))
    if not np.allclose(eff.K, np.eye(2), atol=1e3 * tol * scale, rtol=0):
        raise ConsistencyError("recalibrated memory does not preserve displacements")
    probe = coherent_state(0.7, -0.3)
    out = apply_channel(eff, probe)
    if not np.allclose(out.disp, probe.disp, atol=1e3 * tol * scale, rtol=0):
        raise ConsistencyError("recalibrated memory is biased")
    trace = float(np.trace(out.cov))
    if abs(trace - plan.predicted_trace) > 1e3 * tol * scale:
        raise ConsistencyError(f"output trace {trace} != predicted {plan.predicted_trace}")
    if not trace < 6.0:
        raise ConsistencyError(f"output trace {trace} is not below 6")


def random_symplectic_1mode(rng: np.random.Generator, max_squeeze: float = 1.0) -> np.ndarray:
    """Rotation-squeeze-rotation with log-squeezing uniform in ``[-max_squeeze, max_squeeze]``."""

    def rot(t):
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])

    r = rng.uniform(-max_squeeze, max_squeeze)
    return rot(rng.uniform(0, 2 * np.pi)) @ np.diag([np.exp(r), np.exp(-r)]) @ rot(rng.uniform(0, 2 * np.pi))


def _spd_with_det(det: float, rng: np.random.Generator) -> np.ndarray:
    s = random_symplectic_1mode(rng)
    m = np.sqrt(det) * s @ s.T
    return 0.5 * (m + m.T)


def random_non_gib_channel(rng: np.random.Generator) -> GaussianChannel:
    """Random CP, non-gIB single-mode channel.

    ``det K`` is uniform in ``(0.5, 1.5]`` and ``det M`` uniform in
    ``((det K - 1)^2, det K^2)``, which is exactly the CP and non-gIB window.
    """
    det_k = 1.5 - rng.uniform(0.0, 1.0)
    K = np.sqrt(det_k) * random_symplectic_1mode(rng)
    lo, hi = (det_k - 1.0) ** 2, det_k**2
    det_m = hi - (hi - lo) * rng.uniform(0.0, 1.0)
    if det_m >= hi:
        det_m = np.nextafter(hi, 0.0)
    c = rng.normal(size=2)
    return GaussianChannel(K, _spd_with_det(det_m, rng), c)


def random_cp_channel(rng: np.random.Generator) -> GaussianChannel:
    """Random CP single-mode channel; ``det K`` may be negative and ``M`` anywhere above the CP bound."""
    det_k = rng.uniform(-1.5, 1.5)
    K = np.sqrt(abs(det_k)) * random_symplectic_1mode(rng)
    if det_k < 0:
        K = K @ np.diag([1.0, -1.0])
    lo = (det_k - 1.0) ** 2
    det_m = lo + rng.exponential(2.0)
    return GaussianChannel(K, _spd_with_det(det_m, rng), rng.normal(size=2))


__all__ = [
    "ChannelClassification",
    "ConsistencyError",
    "GIBChannelError",
    "RecalibrationPlan",
    "amplifier",
    "classify",
    "compose",
    "identity_channel",
    "photon_loss",
    "random_cp_channel",
    "random_non_gib_channel",
    "synthesize_recalibration",
]
