"""Single-mode phase-insensitive Gaussian channels and CPF scenarios.

A channel is stored as ``(kind, mu, E)``: ``mu`` is the transmissivity or
gain and ``E`` the number of thermal photons it outputs for a coherent
input, i.e. a vacuum input leaves with covariance ``(2E + 1) I``.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianState


class ChannelKind(str, enum.Enum):
    THERMAL_LOSS = "thermal_loss"
    NOISY_AMPLIFIER = "noisy_amplifier"
    ADDITIVE_NOISE = "additive_noise"
    CONJUGATE_AMPLIFIER = "conjugate_amplifier"


class UnsupportedOperationError(NotImplementedError):
    pass


@dataclass(frozen=True)
class PhaseInsensitiveChannel:
    kind: ChannelKind
    mu: float
    E: float

    def __post_init__(self):
        kind = ChannelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        mu, e = float(self.mu), float(self.E)
        if e < 0:
            raise ValueError("output noise E must be non-negative")
        if kind is ChannelKind.THERMAL_LOSS and not 0.0 <= mu <= 1.0:
            raise ValueError("thermal-loss transmissivity must lie in [0, 1]")
        if kind is ChannelKind.NOISY_AMPLIFIER:
            if mu < 1.0:
                raise ValueError("amplifier gain must be >= 1")
            if mu > 1.0 and e < mu - 1.0:
                raise ValueError("amplifier noise requires E >= mu - 1")
        if kind is ChannelKind.ADDITIVE_NOISE and mu != 1.0:
            raise ValueError("additive-noise channel has mu = 1")
        if kind is ChannelKind.CONJUGATE_AMPLIFIER:
            if mu <= 0:
                raise ValueError("conjugate amplifier needs mu > 0")
            if e < mu:
                raise ValueError("conjugate amplifier needs E >= mu")

    # -- constructors ------------------------------------------------------

    @classmethod
    def thermal_loss(cls, mu, n_env=0.0):
        """Thermal-loss channel with environment occupation ``n_env``."""
        if n_env < 0:
            raise ValueError("environment occupation must be non-negative")
        return cls(ChannelKind.THERMAL_LOSS, mu, (1.0 - mu) * n_env)

    @classmethod
    def noisy_amplifier(cls, mu, n_env=0.0):
        if n_env < 0:
            raise ValueError("environment occupation must be non-negative")
        return cls(ChannelKind.NOISY_AMPLIFIER, mu, (mu - 1.0) * (n_env + 1.0))

    @classmethod
    def additive_noise(cls, omega_add):
        return cls(ChannelKind.ADDITIVE_NOISE, 1.0, omega_add / 2.0)

    @classmethod
    def conjugate_amplifier(cls, mu, E):
        return cls(ChannelKind.CONJUGATE_AMPLIFIER, mu, E)

    # -- derived quantities -------------------------------------------------

    @property
    def n_env(self):
        """Thermal occupation of the environmental mode."""
        mu, e = self.mu, self.E
        if self.kind is ChannelKind.THERMAL_LOSS:
            if mu == 1.0:
                return 0.0
            return e / (1.0 - mu)
        if self.kind is ChannelKind.NOISY_AMPLIFIER:
            if mu == 1.0:
                return 0.0
            return e / (mu - 1.0) - 1.0
        if self.kind is ChannelKind.CONJUGATE_AMPLIFIER:
            return (e - mu) / (mu + 1.0)
        return 0.0

    @property
    def omega(self):
        """Environmental noise variance ``2N + 1``."""
        return 2.0 * self.n_env + 1.0

    @property
    def omega_add(self):
        return 2.0 * self.E if self.kind is ChannelKind.ADDITIVE_NOISE else 0.0


def apply_to_gaussian(ch, state, mode_index=0):
    """Send mode ``mode_index`` of ``state`` through ``ch``."""
    if ch.kind is ChannelKind.CONJUGATE_AMPLIFIER:
        raise UnsupportedOperationError(
            "state evolution through the conjugate amplifier is not supported"
        )
    n = state.n_modes
    if not 0 <= mode_index < n:
        raise IndexError(f"mode {mode_index} out of range for {n} modes")
    scale = np.ones(2 * n)
    scale[2 * mode_index:2 * mode_index + 2] = np.sqrt(ch.mu)
    cov = state.cov * np.outer(scale, scale)
    sl = slice(2 * mode_index, 2 * mode_index + 2)
    cov[sl, sl] += (2.0 * ch.E + 1.0 - ch.mu) * np.eye(2)
    return GaussianState(state.mean * scale, cov)


def coherent_output(ch, alpha):
    """Displaced thermal state produced by ``ch`` from ``|alpha>``."""
    alpha = complex(alpha)
    if ch.kind is ChannelKind.CONJUGATE_AMPLIFIER:
        alpha = alpha.conjugate()
    amp = np.sqrt(ch.mu) * alpha
    return GaussianState([2 * amp.real, 2 * amp.imag], (2.0 * ch.E + 1.0) * np.eye(2))


def reading_channels(r_B, r_T, N_B=0.0):
    """(target, background) memory-cell channels without passive signature.

    Each cell is a thermal-loss channel with reflectivity ``r`` and
    environment ``N_B / (1 - r)``, so both output ``E = N_B``.
    """
    for r in (r_B, r_T):
        if not 0.0 <= r <= 1.0:
            raise ValueError("reflectivities must lie in [0, 1]")
        if r == 1.0 and N_B > 0:
            raise ValueError("unit reflectivity with N_B > 0 has no finite environment")
    if N_B < 0:
        raise ValueError("N_B must be non-negative")
    target = PhaseInsensitiveChannel(ChannelKind.THERMAL_LOSS, r_T, N_B)
    background = PhaseInsensitiveChannel(ChannelKind.THERMAL_LOSS, r_B, N_B)
    return target, background


def target_finding_channels(eta, N_B):
    """(target, background) channels for a sector with and without a target."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if N_B < 0:
        raise ValueError("N_B must be non-negative")
    if eta == 1.0 and N_B > 0:
        raise ValueError("eta = 1 with N_B > 0 has no finite environment")
    target = PhaseInsensitiveChannel(ChannelKind.THERMAL_LOSS, eta, N_B)
    background = PhaseInsensitiveChannel(ChannelKind.THERMAL_LOSS, 0.0, N_B)
    return target, background


@dataclass(frozen=True)
class CPFScenario:
    """One channel-position-finding instance with uniform priors ``1/m``."""

    m: int
    M: float
    N_S: float
    target: PhaseInsensitiveChannel
    background: PhaseInsensitiveChannel

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("m must be an integer >= 2")
        if self.M < 0 or self.N_S < 0:
            raise ValueError("M and N_S must be non-negative")

    @property
    def prior(self):
        return 1.0 / self.m

    @property
    def total_energy(self):
        return self.m * self.M * self.N_S

    @property
    def passive_signature(self):
        return self.target.E != self.background.E
