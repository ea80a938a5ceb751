"""Capacity of a fixed effective channel.

SVD precoding turns ``H_eff`` into ``U`` parallel eigen-channels with gains
``lambda_u``; water-filling then splits the normalized power budget
``sum(p) = U`` across them and the rate is

    R = sum_u log2(1 + snr * p_u * lambda_u**2 / U).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .spgm import effective_channel

__all__ = [
    "EigenDecomposition",
    "RateResult",
    "svd_decompose",
    "water_filling",
    "sum_capacity",
    "precoder",
    "logdet_capacity",
    "end_to_end_rate",
    "gram_eigenvalues",
    "batch_sum_rate",
]


@dataclass(frozen=True)
class EigenDecomposition:
    left_basis: np.ndarray
    singular_values: np.ndarray
    right_basis: np.ndarray
    num_streams: int

    def reconstruct(self) -> np.ndarray:
        L, K = self.left_basis.shape[0], self.right_basis.shape[0]
        lam = np.zeros((L, K))
        r = self.singular_values.shape[0]
        lam[np.arange(r), np.arange(r)] = self.singular_values
        return self.left_basis @ lam @ self.right_basis.conj().T


@dataclass(frozen=True)
class RateResult:
    singular_values: np.ndarray
    powers: np.ndarray
    per_stream_rate: np.ndarray
    sum_rate: float
    water_level: float

    @property
    def num_streams(self) -> int:
        return self.powers.shape[0]


def _rank_tol(shape) -> float:
    return max(shape) * np.finfo(float).eps


def svd_decompose(h_eff) -> EigenDecomposition:
    """Full SVD of the effective channel with numerical-rank stream count."""
    h_eff = np.atleast_2d(np.asarray(h_eff, dtype=complex))
    if not np.all(np.isfinite(h_eff)):
        raise ValueError("effective channel has non-finite entries")
    # LinAlgError propagates on non-convergence
    u, s, vh = np.linalg.svd(h_eff, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        num_streams = 0
    else:
        num_streams = int(np.count_nonzero(s > _rank_tol(h_eff.shape) * s[0]))
    return EigenDecomposition(u, s, vh.conj().T, num_streams)


def water_filling(singular_values, snr: float, num_streams: int) -> tuple[np.ndarray, float]:
    """Optimal allocation ``p_u = max(eta - U/(snr*lambda_u**2), 0)`` with sum U.

    Parameters
    ----------
    singular_values : array_like
        Eigen-channel gains in descending order; only the first
        ``num_streams`` are used and they must be positive.
    snr : float
        Linear transmit SNR ``P/sigma^2``.
    num_streams : int
        Number of streams ``U``.

    Returns
    -------
    (powers, water_level) : (ndarray, float)
        Powers of the ``U`` streams and the water level ``eta``.  With
        ``U = 0`` the allocation is empty and the level is 0.
    """
    if not snr > 0:
        raise ValueError(f"snr must be > 0, got {snr!r}")
    U = int(num_streams)
    if U == 0:
        return np.zeros(0), 0.0
    lam = np.asarray(singular_values, dtype=float)[:U]
    if np.any(lam <= 0):
        raise ValueError("active singular values must be positive")
    if np.any(np.diff(lam) > 0):
        raise ValueError("singular values must be sorted in descending order")
    floor = U / (snr * lam**2)  # ascending
    # eta for the top-k active set, k = 1..U
    levels = (U + np.cumsum(floor)) / np.arange(1, U + 1)
    active = levels > floor
    # active is a prefix; take its length
    k = int(np.argmin(active)) if not active.all() else U
    eta = float(levels[k - 1])
    powers = np.maximum(eta - floor, 0.0)
    powers[k:] = 0.0
    return powers, eta


def sum_capacity(decomp: EigenDecomposition, powers, snr: float) -> float:
    U = decomp.num_streams
    powers = np.asarray(powers, dtype=float)
    if powers.shape != (U,):
        raise ValueError(f"expected {U} stream powers, got shape {powers.shape}")
    if U == 0:
        return 0.0
    lam = decomp.singular_values[:U]
    return float(np.sum(np.log2(1.0 + snr * powers * lam**2 / U)))


def precoder(decomp: EigenDecomposition, powers) -> np.ndarray:
    """``T = V diag(sqrt(p))`` restricted to the first ``U`` right vectors."""
    U = decomp.num_streams
    return decomp.right_basis[:, :U] * np.sqrt(np.asarray(powers, dtype=float))


def logdet_capacity(h_eff, precoding: np.ndarray, snr: float) -> float:
    """``log2 det(I_L + snr/U * H T T^H H^H)`` for an arbitrary precoder."""
    h_eff = np.atleast_2d(np.asarray(h_eff, dtype=complex))
    U = precoding.shape[1]
    if U == 0:
        return 0.0
    ht = h_eff @ precoding
    mat = np.eye(h_eff.shape[0]) + (snr / U) * (ht @ ht.conj().T)
    sign, logdet = np.linalg.slogdet(mat)
    return float(logdet / np.log(2.0))


def end_to_end_rate(channels: ChannelSet, theta, snr: float) -> RateResult:
    """Effective channel -> SVD -> water-filling -> sum capacity."""
    decomp = svd_decompose(effective_channel(channels, theta))
    powers, eta = water_filling(decomp.singular_values, snr, decomp.num_streams)
    U = decomp.num_streams
    if U:
        lam = decomp.singular_values[:U]
        per_stream = np.log2(1.0 + snr * powers * lam**2 / U)
    else:
        per_stream = np.zeros(0)
    return RateResult(
        singular_values=decomp.singular_values,
        powers=powers,
        per_stream_rate=per_stream,
        sum_rate=float(per_stream.sum()),
        water_level=eta,
    )


def gram_eigenvalues(h_batch: np.ndarray) -> np.ndarray:
    """Squared singular values of a stack of matrices, descending.

    Works on the smaller Gram matrix; 1x1 and 2x2 Gram matrices use the
    closed form, anything larger goes through ``eigvalsh``.
    """
    h_batch = np.asarray(h_batch)
    L, K = h_batch.shape[-2:]
    if L <= K:
        gram = h_batch @ np.conj(np.swapaxes(h_batch, -1, -2))
    else:
        gram = np.conj(np.swapaxes(h_batch, -1, -2)) @ h_batch
    m = gram.shape[-1]
    if m == 1:
        return gram[..., 0, :].real
    if m == 2:
        a = gram[..., 0, 0].real
        c = gram[..., 1, 1].real
        b2 = np.abs(gram[..., 0, 1]) ** 2
        mid = 0.5 * (a + c)
        rad = np.sqrt(0.25 * (a - c) ** 2 + b2)
        return np.stack([mid + rad, np.maximum(mid - rad, 0.0)], axis=-1)
    ev = np.linalg.eigvalsh(gram)[..., ::-1]
    return np.maximum(ev, 0.0)


def batch_sum_rate(h_batch: np.ndarray, snr: float) -> np.ndarray:
    """Water-filled sum rate of every matrix in a stack of shape (B, L, K).

    Vectorized counterpart of :func:`end_to_end_rate`, for grid search.
    """
    gains = gram_eigenvalues(h_batch)
    shape = h_batch.shape[-2:]
    top = gains[..., :1]
    # same relative rank test as svd_decompose, applied to lambda^2
    alive = gains > (_rank_tol(shape) ** 2) * top
    alive &= top > 0
    U = alive.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        floor = np.where(alive, U / (snr * gains), np.inf)
    m = gains.shape[-1]
    k = np.arange(1, m + 1)
    csum = np.cumsum(np.where(alive, floor, 0.0), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        levels = (U + csum) / k
    active = (levels > floor) & alive
    n_active = active.sum(axis=-1, keepdims=True)
    idx = np.maximum(n_active - 1, 0)
    eta = np.take_along_axis(levels, idx, axis=-1)
    powers = np.where(active, eta - floor, 0.0)
    # snr * p * lambda^2 / U == p / floor on active streams
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(active, powers / floor, 0.0)
    return np.log2(1.0 + ratio).sum(axis=-1)
