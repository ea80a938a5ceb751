"""Random channel synthesis for the IRS-aided MIMO link.

The direct source-destination channel ``F`` is Rayleigh, while the two IRS
hops ``G`` (IRS -> destination) and ``H`` (source -> IRS) are Rician with a
uniform-linear-array LOS component.  Every channel has unit average power
per entry and the noise power is fixed to one, so ``snr`` is the only power
knob.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemConfig",
    "ChannelSet",
    "ula_steering",
    "gen_rayleigh",
    "gen_rician",
    "gen_channel_set",
    "db_to_linear",
    "trial_seed",
]


def db_to_linear(value_db: float) -> float:
    return float(10.0 ** (value_db / 10.0))


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, IRS size and link parameters.

    Attributes
    ----------
    K, L : int
        Source and destination antenna counts.
    N : int
        Number of IRS reflecting elements.
    snr : float
        Transmit power over noise power, linear.
    rician_beta : float
        Rician factor of ``G`` and ``H``, linear.  Defaults to 10 dB.
    seed : int
        Seed used by :func:`gen_channel_set` when no generator is passed.
    """

    K: int = 16
    L: int = 12
    N: int = 16
    snr: float = 1.0
    rician_beta: float = 10.0
    seed: int = 0

    def __post_init__(self):
        for name in ("K", "L", "N"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not self.snr > 0:
            raise ValueError(f"snr must be > 0, got {self.snr!r}")
        if not self.rician_beta >= 0:
            raise ValueError(f"rician_beta must be >= 0, got {self.rician_beta!r}")


@dataclass(frozen=True)
class ChannelSet:
    """The three channel matrices of one realization.

    ``F`` is L x K, ``G`` is L x N and ``H`` is N x K.
    """

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.F, dtype=complex))
        G = np.atleast_2d(np.asarray(self.G, dtype=complex))
        H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        for name, mat in (("F", F), ("G", G), ("H", H)):
            if mat.ndim != 2:
                raise ValueError(f"{name} must be a matrix, got shape {mat.shape}")
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} has non-finite entries")
        L, K = F.shape
        if G.shape[0] != L:
            raise ValueError(f"G has {G.shape[0]} rows but F has {L}")
        N = G.shape[1]
        if H.shape != (N, K):
            raise ValueError(f"H has shape {H.shape}, expected {(N, K)}")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "H", H)

    @property
    def K(self) -> int:
        return self.F.shape[1]

    @property
    def L(self) -> int:
        return self.F.shape[0]

    @property
    def N(self) -> int:
        return self.G.shape[1]


def ula_steering(num_elements: int, angle: float) -> np.ndarray:
    """Steering vector of a half-wavelength ULA, entry k = exp(j*pi*k*sin(angle))."""
    k = np.arange(num_elements)
    return np.exp(1j * np.pi * k * np.sin(angle))


def gen_rayleigh(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. CN(0, 1) matrix."""
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)


def gen_rician(
    rows: int,
    cols: int,
    beta: float,
    aoa: float,
    aod: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Rician matrix with unit average entry power.

    The LOS part is the outer product ``a_r(aoa) a_t(aod)^H`` of two ULA
    steering vectors; the NLOS part is drawn from :func:`gen_rayleigh`.
    """
    if not beta >= 0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    los = np.outer(ula_steering(rows, aoa), ula_steering(cols, aod).conj())
    nlos = gen_rayleigh(rows, cols, rng)
    if np.isinf(beta):
        return los
    return np.sqrt(beta / (1.0 + beta)) * los + np.sqrt(1.0 / (1.0 + beta)) * nlos


def gen_channel_set(config: SystemConfig, rng: np.random.Generator | None = None) -> ChannelSet:
    """Draw ``F`` (Rayleigh), ``G`` and ``H`` (Rician) for one realization.

    LOS angles of arrival/departure are drawn independently and uniformly
    from [-pi/2, pi/2] for each Rician channel.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    K, L, N, beta = config.K, config.L, config.N, config.rician_beta
    F = gen_rayleigh(L, K, rng)
    aoa_g, aod_g, aoa_h, aod_h = rng.uniform(-np.pi / 2, np.pi / 2, size=4)
    G = gen_rician(L, N, beta, aoa_g, aod_g, rng)
    H = gen_rician(N, K, beta, aoa_h, aod_h, rng)
    return ChannelSet(F, G, H)


def trial_seed(master_seed: int, *keys: int) -> int:
    """Derive a 64-bit sub-seed from a master seed and structured indices.

    The result depends only on the arguments, so any trial can be rerun on
    its own regardless of which other trials were executed.
    """
    entropy = [int(master_seed)] + [int(k) for k in keys]
    if any(e < 0 for e in entropy):
        raise ValueError("seed keys must be non-negative integers")
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])
