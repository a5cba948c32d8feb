"""Scenario container: arrays, users, target, and the constraint budgets.

Powers are carried in linear milliwatts; the SINR threshold is linear; the
energy-efficiency threshold is in bits/s/Hz per watt and is converted
exactly once where rate and power meet.
"""

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from . import geometry, metrics
from .errors import InvalidArgumentError
from .units import dbm_to_mw


@dataclass(frozen=True)
class Scenario:
    geom: geometry.ArrayGeometry
    users: tuple
    target: Union[geometry.PointTarget, geometry.ExtendedTarget]
    power_budget: float        # mW
    sinr_threshold: float      # linear, 0 disables
    ee_threshold: float        # bits/s/Hz per W, 0 disables
    amplifier_eff: float
    static_power: float        # mW
    comm_noise: float          # mW, per user
    sensing_noise: float       # mW
    frame_length: int

    def __post_init__(self):
        if not self.users:
            raise InvalidArgumentError("need at least one user")
        if self.power_budget <= 0 or self.comm_noise <= 0 or self.sensing_noise <= 0:
            raise InvalidArgumentError("powers must be positive")
        if self.sinr_threshold < 0 or self.ee_threshold < 0:
            raise InvalidArgumentError("thresholds must be nonnegative")
        if not 0 < self.amplifier_eff <= 1:
            raise InvalidArgumentError("amplifier efficiency must lie in (0, 1]")
        if self.static_power < 0:
            raise InvalidArgumentError("static power must be nonnegative")
        if self.frame_length < len(self.users):
            raise InvalidArgumentError("frame length must be at least the user count")

    @property
    def n_users(self):
        return len(self.users)

    @property
    def power_model(self):
        return metrics.PowerModel(amplifier_eff=self.amplifier_eff,
                                  static_power=self.static_power,
                                  budget=self.power_budget)

    def channels(self):
        return geometry.build_channels(self.geom, self.users)

    def with_target(self, target):
        return replace(self, target=target)


def desk_scenario(target="point", **overrides):
    """Small deterministic scenario used by the test suite and CI sweeps.

    16-antenna arrays at 28 GHz put the near-field boundary at about 1.37 m,
    so the point target sits at 1 m where wavefront curvature is resolvable.
    The communication noise floor is -70 dBm, appropriate for the free-space
    gains of the ~10 m user links.
    """
    geom = geometry.ArrayGeometry(n_tx=16, n_rx=16, n_rf=4, carrier_freq=28e9)
    if target == "point":
        tgt = geometry.PointTarget(distance=1.0, angle=np.deg2rad(15.0), reflection=0.05)
    elif target == "extended":
        tgt = geometry.ExtendedTarget(prior_variance=1.0)
    else:
        raise InvalidArgumentError(f"unknown target kind {target!r}")
    base = dict(
        geom=geom,
        users=(
            geometry.UserSpec(distance=15.0, angle=np.deg2rad(-60.0), id=0),
            geometry.UserSpec(distance=10.0, angle=np.deg2rad(-30.0), id=1),
        ),
        target=tgt,
        power_budget=dbm_to_mw(34.0),
        sinr_threshold=10.0,            # 10 dB
        ee_threshold=4.0,               # bits/s/Hz per W
        amplifier_eff=0.5,
        static_power=dbm_to_mw(15.0),
        comm_noise=dbm_to_mw(-70.0),
        sensing_noise=dbm_to_mw(0.0),
        frame_length=16,
    )
    base.update(overrides)
    return Scenario(**base)


def paper_scenario(target="point", **overrides):
    """Full-size scenario with the published system constants.

    Not exercised by CI; the desk scenario covers the same code paths.
    """
    geom = geometry.ArrayGeometry(n_tx=64, n_rx=64, n_rf=8, carrier_freq=28e9)
    if target == "point":
        tgt = geometry.PointTarget(distance=10.0, angle=np.deg2rad(15.0), reflection=0.05)
    else:
        tgt = geometry.ExtendedTarget(prior_variance=1.0)
    base = dict(
        geom=geom,
        users=(
            geometry.UserSpec(distance=15.0, angle=np.deg2rad(-60.0), id=0),
            geometry.UserSpec(distance=10.0, angle=np.deg2rad(-30.0), id=1),
            geometry.UserSpec(distance=15.0, angle=np.deg2rad(30.0), id=2),
            geometry.UserSpec(distance=10.0, angle=np.deg2rad(60.0), id=3),
        ),
        target=tgt,
        power_budget=dbm_to_mw(34.0),
        sinr_threshold=10.0,
        ee_threshold=4.0,
        amplifier_eff=0.5,
        static_power=dbm_to_mw(15.0),
        comm_noise=dbm_to_mw(-70.0),
        sensing_noise=dbm_to_mw(0.0),
        frame_length=64,
    )
    base.update(overrides)
    return Scenario(**base)
