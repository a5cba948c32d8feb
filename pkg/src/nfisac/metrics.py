"""Communication-side figures of merit: SINR, sum rate, power, energy efficiency."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .units import mw_to_w


@dataclass
class BeamformerSet:
    """Beamformers in fully-digital and (optionally) hybrid form.

    full_digital is n_tx x K; analog is n_tx x n_rf and digital n_rf x K
    when a factorization is attached.  per_user_cov returns the lifted
    rank-one covariances w_k w_k^H.
    """

    full_digital: Optional[np.ndarray] = None
    analog: Optional[np.ndarray] = None
    digital: Optional[np.ndarray] = None
    factorization_residual: float = 0.0

    def __post_init__(self):
        if self.full_digital is None:
            if self.analog is None or self.digital is None:
                raise InvalidArgumentError("need full_digital or (analog, digital)")
            self.full_digital = self.analog @ self.digital

    @property
    def n_users(self):
        return self.full_digital.shape[1]

    def column(self, k):
        return self.full_digital[:, k]

    def per_user_cov(self, k):
        w = self.column(k)
        return np.outer(w, w.conj())


def tx_covariance(beamformers):
    """Transmit sample covariance R_X = W W^H (rank at most min(K, n_rf))."""
    w = beamformers.full_digital
    if w is None or w.size == 0:
        raise InvalidArgumentError("empty beamformer set")
    return w @ w.conj().T


def sinr(channels, beamformers, k, noise_power):
    """Downlink SINR of user k."""
    if noise_power <= 0:
        raise InvalidArgumentError("noise power must be positive")
    h = channels.vectors[k]
    w = beamformers.full_digital
    if h.shape[0] != w.shape[0]:
        raise InvalidArgumentError("channel/beamformer dimension mismatch")
    gains = np.abs(h.conj() @ w) ** 2
    signal = gains[k]
    interference = gains.sum() - signal
    return signal / (interference + noise_power)


def sinr_from_covariances(channels, covs, k, noise_power):
    """SINR in lifted form Tr(H_k W_k) / (sum_{i != k} Tr(H_k W_i) + sigma^2)."""
    if noise_power <= 0:
        raise InvalidArgumentError("noise power must be positive")
    hk = channels.outer(k)
    terms = np.array([np.real(np.trace(hk @ wi)) for wi in covs])
    signal = terms[k]
    interference = terms.sum() - signal
    return signal / (interference + noise_power)


def sum_rate(sinrs):
    sinrs = np.asarray(sinrs, dtype=float)
    if np.any(sinrs < 0):
        raise InvalidArgumentError("SINRs must be nonnegative")
    return float(np.log2(1.0 + sinrs).sum())


def total_power(beamformers, power_model):
    """Linear power model: radiated power scaled by amplifier efficiency plus static draw (mW)."""
    radiated = float(np.sum(np.abs(beamformers.full_digital) ** 2))
    return radiated / power_model.amplifier_eff + power_model.static_power


def energy_efficiency(rate, total_power_mw):
    """Rate (bits/s/Hz) divided by consumed power in watts."""
    if total_power_mw <= 0:
        raise InvalidArgumentError("total power must be positive")
    return rate / mw_to_w(total_power_mw)


@dataclass(frozen=True)
class PowerModel:
    amplifier_eff: float
    static_power: float
    budget: float

    def __post_init__(self):
        if not 0 < self.amplifier_eff <= 1:
            raise InvalidArgumentError("amplifier efficiency must lie in (0, 1]")
        if self.static_power < 0:
            raise InvalidArgumentError("static power must be nonnegative")
        if self.budget <= 0:
            raise InvalidArgumentError("power budget must be positive")
