import numpy as np
import pytest

from nfisac import hybrid
from nfisac.errors import InvalidArgumentError, ZeroDirectionError


def _planted(seed, n_tx=16, n_rf=4, k=2, architecture="fully"):
    """W that factors exactly for the given wiring."""
    rng = np.random.default_rng(seed)
    T_A = np.exp(1j * rng.uniform(0, 2 * np.pi, (n_tx, n_rf)))
    if architecture == "partially":
        T_A = np.where(hybrid.partial_mask(n_tx, n_rf), T_A, 0.0)
    T_D = rng.standard_normal((n_rf, k)) + 1j * rng.standard_normal((n_rf, k))
    return T_A @ T_D


def test_connection_groups_partition():
    groups = hybrid.connection_groups(16, 4)
    assert len(groups) == 16
    for q in range(4):
        assert np.sum(groups == q) == 4
    with pytest.raises(InvalidArgumentError):
        hybrid.connection_groups(16, 5)


def test_partial_mask_one_chain_per_antenna():
    mask = hybrid.partial_mask(12, 3)
    assert mask.sum(axis=1).tolist() == [1] * 12


def test_fully_planted_recovery():
    for seed in range(10):
        W = _planted(seed)
        fac = hybrid.factorize(W, 4, architecture="fully")
        assert fac.residual <= 1e-3
        # analog stage stays exactly on the unit-modulus set
        np.testing.assert_allclose(np.abs(fac.analog), 1.0, atol=1e-12)
        # realized power matches the requested power to near machine level
        p = np.linalg.norm(W) ** 2
        assert abs(np.linalg.norm(fac.analog @ fac.digital) ** 2 - p) <= 1e-8 * p


def test_partially_planted_recovery():
    for seed in range(10):
        W = _planted(seed, architecture="partially")
        fac = hybrid.factorize(W, 4, architecture="partially")
        assert fac.residual <= 1e-6
        mask = hybrid.partial_mask(16, 4)
        np.testing.assert_allclose(np.abs(fac.analog[mask]), 1.0, atol=1e-12)
        np.testing.assert_allclose(fac.analog[~mask], 0.0, atol=0)


def test_residual_trace_nonincreasing():
    for seed in range(10):
        W = _planted(seed)
        fac = hybrid.factorize(W, 4, architecture="fully")
        trace = np.array(fac.trace)
        assert np.all(np.diff(trace) <= 1e-12)


def test_two_phase_construction_is_exact():
    # any K-column beamformer factors exactly when n_rf >= 2K
    rng = np.random.default_rng(11)
    W = rng.standard_normal((16, 2)) + 1j * rng.standard_normal((16, 2))
    fac = hybrid.factorize(W, 4, architecture="fully")
    assert fac.residual <= 1e-10
    assert fac.iterations <= 2


def test_partially_analog_gram_identity():
    W = _planted(3, architecture="partially")
    fac = hybrid.factorize(W, 4, architecture="partially")
    G = fac.analog.conj().T @ fac.analog
    np.testing.assert_allclose(G, 4.0 * np.eye(4), atol=1e-10)


def test_power_target_override():
    W = _planted(5)
    fac = hybrid.factorize(W, 4, power=10.0, architecture="fully")
    assert np.linalg.norm(fac.analog @ fac.digital) ** 2 == pytest.approx(10.0, rel=1e-10)


def test_analog_update_monotone():
    rng = np.random.default_rng(7)
    W = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
    T_A = np.exp(1j * rng.uniform(0, 2 * np.pi, (8, 4)))
    T_D = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    res = np.linalg.norm(W - T_A @ T_D)
    for _ in range(20):
        T_A = hybrid.fully_analog_update(T_A, T_D, W)
        new = np.linalg.norm(W - T_A @ T_D)
        assert new <= res + 1e-10
        res = new


def test_geometry_like_n_rf_argument():
    class G:
        n_rf = 4
    W = _planted(9)
    fac = hybrid.factorize(W, G(), architecture="fully")
    assert fac.analog.shape == (16, 4)


def test_invalid_inputs():
    W = _planted(1)
    with pytest.raises(InvalidArgumentError):
        hybrid.factorize(W, 4, architecture="diagonal")
    with pytest.raises(InvalidArgumentError):
        hybrid.factorize(W, 0)
    with pytest.raises(InvalidArgumentError):
        hybrid.factorize(W, 4, power=-1.0)
    with pytest.raises(ZeroDirectionError):
        hybrid.factorize(np.zeros((8, 2), dtype=complex), 4)
    with pytest.raises(InvalidArgumentError):
        hybrid.factorize(np.zeros((0, 2)), 4)
