"""Sum-path-gain objective, its gradient and the per-element closed form.

The objective is

    psi(theta) = ||F + G diag(exp(j theta)) H||_F^2,

the sum of squared singular values of the effective channel.  For any one
element ``n`` with the others held fixed it is an exact sinusoid in
``theta[n]``,

    psi(theta_n) = 2|w_n| cos(theta_n - angle(w_n)) + C,
    w_n = f_nn + sum_{m != n} exp(j theta_m) g_nm h_mn,

with ``f = diag(G^H F H^H)``, ``g = G^H G`` and ``h = H H^H``.  The maximizer
over ``theta_n`` is therefore ``angle(w_n)`` and the minimizer is that angle
plus pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet

__all__ = [
    "TWO_PI",
    "DEGENERATE_RTOL",
    "wrap_phases",
    "SpgmCache",
    "build_cache",
    "effective_channel",
    "spgm_objective",
    "spgm_gradient",
    "objective_from_cache",
    "gradient_from_cache",
    "coordinate_weight",
    "coordinate_argmax",
    "sinusoid_params",
]

TWO_PI = 2.0 * np.pi

# |w_n| at or below this fraction of the cache scale counts as zero
DEGENERATE_RTOL = 1e-14


def wrap_phases(theta) -> np.ndarray:
    """Map phases to the canonical range [0, 2*pi)."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("phase vector has non-finite entries")
    wrapped = np.mod(theta, TWO_PI)
    # np.mod can round a tiny negative input up to exactly 2*pi
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def _as_theta(channels: ChannelSet, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (channels.N,):
        raise ValueError(
            f"theta has shape {theta.shape} but G/H imply N={channels.N} elements"
        )
    return theta


@dataclass(frozen=True)
class SpgmCache:
    """Per-realization constants of the objective.

    Attributes
    ----------
    f_diag : ndarray, shape (N,)
        ``diag(G^H F H^H)``.
    g_gram : ndarray, shape (N, N)
        ``G^H G``.
    h_gram : ndarray, shape (N, N)
        ``H H^H``.
    coupling : ndarray, shape (N, N)
        ``coupling[n, m] = g_gram[n, m] * h_gram[m, n]``; Hermitian.
    direct_power : float
        ``||F||_F^2``.
    """

    f_diag: np.ndarray
    g_gram: np.ndarray
    h_gram: np.ndarray
    coupling: np.ndarray
    direct_power: float

    @property
    def N(self) -> int:
        return self.f_diag.shape[0]

    @property
    def scale(self) -> float:
        """Largest cache magnitude; reference for the degeneracy test."""
        if self.N == 0:
            return 0.0
        return float(max(np.max(np.abs(self.f_diag)), np.max(np.abs(self.coupling))))


def build_cache(channels: ChannelSet) -> SpgmCache:
    F, G, H = channels.F, channels.G, channels.H
    f_diag = np.einsum("ln,lk,nk->n", G.conj(), F, H.conj())
    g_gram = G.conj().T @ G
    h_gram = H @ H.conj().T
    coupling = g_gram * h_gram.T
    direct_power = float(np.vdot(F, F).real)
    return SpgmCache(f_diag, g_gram, h_gram, coupling, direct_power)


def effective_channel(channels: ChannelSet, theta) -> np.ndarray:
    """Return ``F + G diag(exp(j theta)) H``."""
    theta = _as_theta(channels, theta)
    phi = np.exp(1j * theta)
    return channels.F + (channels.G * phi) @ channels.H


def spgm_objective(channels: ChannelSet, theta) -> float:
    h_eff = effective_channel(channels, theta)
    return float(np.vdot(h_eff, h_eff).real)


def spgm_gradient(channels: ChannelSet, theta) -> np.ndarray:
    """Analytic gradient ``-2 Im{phi_n [H H_eff^H G]_nn}``."""
    theta = _as_theta(channels, theta)
    phi = np.exp(1j * theta)
    h_eff = channels.F + (channels.G * phi) @ channels.H
    diag = np.einsum("nk,lk,ln->n", channels.H, h_eff.conj(), channels.G)
    return -2.0 * np.imag(phi * diag)


def objective_from_cache(cache: SpgmCache, theta) -> float:
    """Evaluate psi from the cache in O(N^2) without forming ``H_eff``."""
    phi = np.exp(1j * np.asarray(theta, dtype=float))
    quad = np.vdot(phi, cache.coupling @ phi).real
    cross = 2.0 * np.real(np.dot(phi, cache.f_diag.conj()))
    return float(cache.direct_power + cross + quad)


def gradient_from_cache(cache: SpgmCache, theta) -> np.ndarray:
    phi = np.exp(1j * np.asarray(theta, dtype=float))
    w = cache.f_diag + cache.coupling @ phi
    return -2.0 * np.imag(phi * w.conj())


def coordinate_weight(cache: SpgmCache, theta, n: int) -> complex:
    """``w_n = f_nn + sum_{m != n} exp(j theta_m) g_nm h_mn``, in O(N)."""
    phi = np.exp(1j * np.asarray(theta, dtype=float))
    row = cache.coupling[n]
    return complex(cache.f_diag[n] + row @ phi - row[n] * phi[n])


def coordinate_argmax(cache: SpgmCache, theta, n: int) -> float:
    """Globally optimal ``theta[n]`` with every other phase held fixed.

    ``theta`` is the working vector of a Gauss-Seidel sweep: entries before
    ``n`` already hold this sweep's values, entries after ``n`` still hold
    the previous sweep's.  ``n`` is zero-based.  When ``w_n`` vanishes the
    objective is flat in ``theta[n]`` and the current value is returned.
    """
    theta = np.asarray(theta, dtype=float)
    if not 0 <= n < cache.N:
        raise IndexError(f"element index {n} out of range for N={cache.N}")
    w = coordinate_weight(cache, theta, n)
    if abs(w) <= DEGENERATE_RTOL * cache.scale:
        return float(theta[n])
    return float(np.mod(np.angle(w), TWO_PI))


def sinusoid_params(channels: ChannelSet, theta, n: int) -> tuple[float, float, float]:
    """Fit of psi along ``theta[n]`` as ``amplitude*cos(theta_n + phase) + offset``.

    Computed from the full matrices (the phase of element ``n`` zeroed out),
    independently of :class:`SpgmCache`.  ``phase`` lies in (-pi, pi].
    """
    theta = _as_theta(channels, theta)
    if not 0 <= n < channels.N:
        raise IndexError(f"element index {n} out of range for N={channels.N}")
    F, G, H = channels.F, channels.G, channels.H
    phi = np.exp(1j * theta)
    phi[n] = 0.0
    rest = F + (G * phi) @ H
    # z = [G^T rest^* H^T]_nn is the conjugate of w_n
    z = np.conj(G[:, n].conj() @ rest @ H[n].conj())
    amplitude = 2.0 * abs(z)
    phase = float(np.angle(z))
    probe = theta.copy()
    probe[n] = -phase
    offset = spgm_objective(channels, probe) - amplitude
    return float(amplitude), phase, float(offset)
