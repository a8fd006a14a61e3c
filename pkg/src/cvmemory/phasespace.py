"""Phase-space representation of Gaussian states and channels.

Conventions used throughout the package:

* quadratures are ordered ``xxpp``: ``r = (x_1, ..., x_n, p_1, ..., p_n)``;
* ``cov[i, j] = <{dr_i, dr_j}>`` so a coherent state has ``cov = 1`` and a
  homodyne measurement of quadrature ``q`` has variance ``cov[q, q] / 2``;
* a coherent state ``|alpha>`` has ``disp = sqrt(2) * (alpha_x, alpha_p)``.

Displacements may carry leading batch dimensions (``disp.shape == (..., 2n)``)
while sharing one covariance matrix. This is how the protocol simulator runs
many rounds at once: Gaussian channels act on the covariance independently of
the displacement.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL = 1e-9

SQRT2 = np.sqrt(2.0)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return ``Omega = [[0, -1], [1, 0]]`` in xxpp block form for ``n_modes`` modes."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be positive, got {n_modes}")
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, -eye], [eye, zero]])


def min_eig_hermitian(mat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(mat)[0])


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _n_modes_of(dim: int) -> int:
    if dim % 2 or dim == 0:
        raise ValueError(f"phase-space dimension must be even and positive, got {dim}")
    return dim // 2


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Covariance matrix and displacement of an n-mode Gaussian state."""

    cov: np.ndarray
    disp: np.ndarray

    def __post_init__(self):
        cov = _frozen(self.cov)
        disp = _frozen(self.disp)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError(f"cov must be square, got shape {cov.shape}")
        _n_modes_of(cov.shape[0])
        if disp.shape[-1:] != cov.shape[:1]:
            raise ValueError(f"disp shape {disp.shape} does not match cov {cov.shape}")
        if not np.allclose(cov, cov.T, atol=TOL, rtol=0):
            raise ValueError("cov is not symmetric")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "disp", disp)

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.disp.shape[:-1]

    def bona_fide_margin(self) -> float:
        """Minimum eigenvalue of ``cov + i Omega``; non-negative for physical states."""
        return min_eig_hermitian(self.cov + 1j * symplectic_form(self.n_modes))

    def is_bona_fide(self, tol: float = TOL) -> bool:
        return self.bona_fide_margin() >= -tol

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        """Marginal state on the given modes (in the given order)."""
        idx = quadrature_indices(self.n_modes, modes)
        return GaussianState(self.cov[np.ix_(idx, idx)], self.disp[..., idx])


def quadrature_indices(n_modes: int, modes: Sequence[int]) -> list[int]:
    modes = list(modes)
    for m in modes:
        if not 0 <= m < n_modes:
            raise IndexError(f"mode {m} out of range for {n_modes}-mode state")
    return modes + [n_modes + m for m in modes]


def vacuum(n_modes: int = 1) -> GaussianState:
    return GaussianState(np.eye(2 * n_modes), np.zeros(2 * n_modes))


def coherent_state(alpha_x, alpha_p) -> GaussianState:
    """Single-mode coherent state ``|alpha_x + i alpha_p>``.

    Array arguments of equal shape give a batch of coherent states sharing the
    unit covariance.
    """
    ax = np.asarray(alpha_x, dtype=float)
    ap = np.asarray(alpha_p, dtype=float)
    disp = SQRT2 * np.stack(np.broadcast_arrays(ax, ap), axis=-1)
    return GaussianState(np.eye(2), disp)


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Gaussian map ``cov -> K cov K^T + M``, ``disp -> K disp + c``.

    Construction only checks shapes and symmetry of ``M``; use
    :meth:`checked` (or :func:`cvmemory.channels.classify`) to enforce
    complete positivity.
    """

    K: np.ndarray
    M: np.ndarray
    c: np.ndarray | None = None

    def __post_init__(self):
        K = _frozen(self.K)
        M = _frozen(self.M)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"K must be square, got shape {K.shape}")
        _n_modes_of(K.shape[0])
        if M.shape != K.shape:
            raise ValueError(f"M shape {M.shape} does not match K {K.shape}")
        if not np.allclose(M, M.T, atol=TOL, rtol=0):
            raise ValueError("M is not symmetric")
        c = np.zeros(K.shape[0]) if self.c is None else self.c
        c = _frozen(c)
        if c.shape != K.shape[:1]:
            raise ValueError(f"c shape {c.shape} does not match K {K.shape}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "c", c)

    @classmethod
    def checked(cls, K, M, c=None) -> "GaussianChannel":
        ch = cls(K, M, c)
        margin = ch.cp_margin()
        if margin < -TOL:
            raise ValueError(f"channel is not completely positive (margin {margin:.3e})")
        return ch

    @property
    def n_modes(self) -> int:
        return self.K.shape[0] // 2

    def cp_margin(self) -> float:
        """Minimum eigenvalue of ``M + i Omega - i K Omega K^T``."""
        om = symplectic_form(self.n_modes)
        return min_eig_hermitian(self.M + 1j * om - 1j * self.K @ om @ self.K.T)


def identity_channel(n_modes: int = 1) -> GaussianChannel:
    d = 2 * n_modes
    return GaussianChannel(np.eye(d), np.zeros((d, d)))


def apply_channel(ch: GaussianChannel, st: GaussianState) -> GaussianState:
    if ch.n_modes != st.n_modes:
        raise ValueError(f"{ch.n_modes}-mode channel applied to {st.n_modes}-mode state")
    cov = ch.K @ st.cov @ ch.K.T + ch.M
    # symmetrize to keep round-off from tripping the symmetry check downstream
    cov = 0.5 * (cov + cov.T)
    return GaussianState(cov, st.disp @ ch.K.T + ch.c)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Joint state of independent systems ``a`` then ``b``, kept in xxpp order."""
    na, nb = a.n_modes, b.n_modes
    n = na + nb
    # positions of a's and b's quadratures inside the joint xxpp vector
    ia = list(range(na)) + [n + k for k in range(na)]
    ib = [na + k for k in range(nb)] + [n + na + k for k in range(nb)]
    cov = np.zeros((2 * n, 2 * n))
    cov[np.ix_(ia, ia)] = a.cov
    cov[np.ix_(ib, ib)] = b.cov
    batch = np.broadcast_shapes(a.batch_shape, b.batch_shape)
    disp = np.zeros(batch + (2 * n,))
    disp[..., ia] = a.disp
    disp[..., ib] = b.disp
    return GaussianState(cov, disp)


def balanced_beamsplitter() -> GaussianChannel:
    """50:50 beamsplitter on two modes: port 1 gets ``(r1 + r2)/sqrt2``, port 2 ``(r1 - r2)/sqrt2``."""
    b = np.array([[1.0, 1.0], [1.0, -1.0]]) / SQRT2
    zero = np.zeros((2, 2))
    return GaussianChannel(np.block([[b, zero], [zero, b]]), np.zeros((4, 4)))


def sample_quadratures(st: GaussianState, indices: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Jointly sample commuting quadratures ``r[indices]`` of a Gaussian state.

    The caller is responsible for picking mutually commuting quadratures
    (e.g. ``x`` of one mode and ``p`` of another). Returns an array of shape
    ``batch_shape + (len(indices),)``.
    """
    idx = list(indices)
    mean = st.disp[..., idx]
    var = st.cov[np.ix_(idx, idx)] / 2.0
    w, v = np.linalg.eigh(var)
    if w[0] < -TOL:
        raise ValueError("quadrature covariance is not positive semidefinite")
    root = v * np.sqrt(np.clip(w, 0.0, None))
    z = rng.standard_normal(st.batch_shape + (len(idx),))
    return mean + z @ root.T


def sample_homodyne(st: GaussianState, mode: int, quadrature: str, rng: np.random.Generator):
    if quadrature not in ("x", "p"):
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    ix, ip = quadrature_indices(st.n_modes, [mode])
    i = ix if quadrature == "x" else ip
    return sample_quadratures(st, [i], rng)[..., 0]


def sample_heterodyne(st: GaussianState, mode: int, rng: np.random.Generator) -> np.ndarray:
    """Double-homodyne measurement of one mode.

    The mode is mixed with vacuum on a balanced beamsplitter; ``x`` is read on
    port 1 and ``p`` on port 2, and both are rescaled by ``sqrt2``. The result
    (shape ``batch_shape + (2,)``) is an unbiased estimate of ``(D_x, D_p)``
    with variance ``(cov_qq + 1) / 2`` per quadrature.
    """
    mixed = apply_channel(balanced_beamsplitter(), tensor(st.reduced([mode]), vacuum()))
    # xxpp on two modes: x1 -> 0, p2 -> 3
    return SQRT2 * sample_quadratures(mixed, [0, 3], rng)


@dataclass(frozen=True)
class WilliamsonFactors:
    lam: float
    s_inv: np.ndarray


def sqrtm_2x2(a: np.ndarray) -> np.ndarray:
    """Principal square root of a 2x2 symmetric positive-definite matrix."""
    s = np.sqrt(np.linalg.det(a))
    return (a + s * np.eye(2)) / np.sqrt(np.trace(a) + 2.0 * s)


def williamson_1mode(a) -> WilliamsonFactors:
    """Symplectic diagonalisation ``a = S^-1 (lam * 1) S^-T`` of a 2x2 SPD matrix.

    ``lam = sqrt(det a)`` and ``S^-1 = a^(1/2) / sqrt(lam)``, which has unit
    determinant and is therefore symplectic for a single mode.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=TOL, rtol=0):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    det = np.linalg.det(a)
    if det <= 0 or np.trace(a) <= 0:
        raise ValueError("matrix is not positive definite")
    lam = float(np.sqrt(det))
    return WilliamsonFactors(lam=lam, s_inv=sqrtm_2x2(a) / np.sqrt(lam))
