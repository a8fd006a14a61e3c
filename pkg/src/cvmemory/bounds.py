"""Entanglement-breaking score bound and prior Fisher information."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def eb_bound(sigma_a: float, sigma_b: float) -> float:
    """Smallest mean score reachable by any entanglement-breaking memory.

    ``sigma_a^2 / (1 + sigma_a^2) + sigma_b^2 / (1 + sigma_b^2)`` for
    Gaussian priors ``P(alpha) ~ exp(-|alpha|^2 / sigma^2)``. Infinite widths
    are allowed and give the supremum 2.
    """
    total = 0.0
    for s in (sigma_a, sigma_b):
        if s < 0:
            raise ValueError(f"prior width must be non-negative, got {s}")
        total += 1.0 if np.isinf(s) else s * s / (1.0 + s * s)
    return total


@dataclass(frozen=True)
class FisherMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2) or not np.allclose(m, m.T):
            raise ValueError("Fisher matrix must be a symmetric 2x2 array")
        if np.linalg.eigvalsh(m)[0] < 0:
            raise ValueError("Fisher matrix must be positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def diagonal(self) -> tuple[float, float]:
        return float(self.matrix[0, 0]), float(self.matrix[1, 1])


def fisher_gaussian(sigma: float) -> FisherMatrix:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return FisherMatrix(np.eye(2) * 2.0 / sigma**2)


def _check_flat(l: float, delta: float) -> None:
    if not l > 0:
        raise ValueError(f"l must be positive, got {l}")
    if not 0 < delta <= l:
        raise ValueError(f"delta must lie in (0, l], got delta={delta}, l={l}")


def smooth_indicator(x, l: float, delta: float):
    """Indicator of ``[-l/2, l/2]`` with sinusoidal edges of width ``delta``.

    Vectorised over ``x``; scalar input gives a scalar.
    """
    _check_flat(l, delta)
    x = np.asarray(x, dtype=float)
    h, d = l / 2.0, delta / 2.0
    k = np.pi / delta
    out = np.zeros_like(x)
    rising = (x >= -h - d) & (x <= -h + d)
    falling = (x >= h - d) & (x <= h + d)
    out = np.where(rising, 0.5 + 0.5 * np.sin(k * (x + h)), out)
    out = np.where(falling, 0.5 - 0.5 * np.sin(k * (x - h)), out)
    out = np.where((x > -h + d) & (x < h - d), 1.0, out)
    return out[()] if out.ndim == 0 else out


def fisher_smoothflat(l: float, delta: float) -> FisherMatrix:
    """Prior FIM of the factorised smooth-flat density; diverges as ``delta -> 0``."""
    _check_flat(l, delta)
    return FisherMatrix(np.eye(2) * np.pi**2 / (l * delta))


def equivalent_sigma(l: float, delta: float) -> float:
    """Gaussian width whose prior FIM equals that of the smooth-flat prior.

    Solves ``pi^2 / (l delta) == 2 / sigma^2``.
    """
    _check_flat(l, delta)
    return float(np.sqrt(2.0 * l * delta) / np.pi)
