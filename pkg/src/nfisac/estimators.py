"""Echo simulation and estimator baselines for validating the bounds.

Point target: concentrated grid maximum likelihood and 2D MUSIC over a
(distance, angle) search grid with local quadratic refinement.  Extended
target: linear MMSE estimate of the target response matrix, computed
through the Kronecker identity so only n_tx-sized solves occur.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class EchoBatch:
    """One sensing frame: echo Y = B X + N with probing signal X."""

    Y: np.ndarray
    X: np.ndarray
    noise_power: float
    seed: object = None

    def __post_init__(self):
        if self.Y.shape[1] != self.X.shape[1]:
            raise InvalidArgumentError("echo and probing signal frame lengths differ")


@dataclass(frozen=True)
class EstimationRecord:
    truth: tuple
    estimate: tuple
    squared_error: float
    trial: int

    def __post_init__(self):
        if self.squared_error < 0:
            raise InvalidArgumentError("squared error must be nonnegative")


def trial_rng(seed, trial):
    """Independent per-trial stream derived from (seed, trial index)."""
    return np.random.default_rng([int(seed), int(trial)])


def simulate_echo(B, beamformers, L, noise_power, rng, symbols="gaussian"):
    """Simulate Y = B X + N over a frame of L symbols.

    beamformers may be a matrix W (n_tx x K) or an object with a
    full_digital attribute.  Symbols are unit-variance circular Gaussian by
    default, or unit-modulus random-phase with symbols="psk".
    """
    W = np.asarray(getattr(beamformers, "full_digital", beamformers), dtype=complex)
    K = W.shape[1]
    if L < K:
        raise InvalidArgumentError("frame length must be at least the stream count")
    if noise_power < 0:
        raise InvalidArgumentError("noise power must be nonnegative")
    if symbols == "gaussian":
        S = (rng.standard_normal((K, L)) + 1j * rng.standard_normal((K, L))) / np.sqrt(2.0)
    elif symbols == "psk":
        S = np.exp(2j * np.pi * rng.random((K, L)))
    else:
        raise InvalidArgumentError(f"unknown symbol mode {symbols!r}")
    X = W @ S
    Y = B @ X
    if noise_power > 0:
        n_rx = B.shape[0]
        N = (rng.standard_normal((n_rx, L)) + 1j * rng.standard_normal((n_rx, L)))
        Y = Y + np.sqrt(noise_power / 2.0) * N
    return EchoBatch(Y=Y, X=X, noise_power=float(noise_power))


# ---------------------------------------------------------------------------
# search grid


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced distances and uniform angles for the 2D search."""

    r_min: float
    r_max: float
    n_r: int
    n_phi: int

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max or self.n_r < 3 or self.n_phi < 3:
            raise InvalidArgumentError("degenerate search grid")

    def distances(self):
        return np.geomspace(self.r_min, self.r_max, self.n_r)

    def angles(self):
        return np.linspace(-np.pi / 2, np.pi / 2, self.n_phi + 2)[1:-1]


def default_grid(geom):
    r_max = 1.5 * geometry.rayleigh_distance(geom)
    return GridSpec(r_min=min(0.5, 0.25 * r_max), r_max=r_max,
                    n_r=200, n_phi=361)


_GRID_CACHE = {}


def _grid_steering(geom, grid, side):
    """(n, n_r * n_phi) matrix of steering vectors over the flattened grid."""
    key = (geom.n_tx, geom.n_rx, geom.carrier_freq, grid, side)
    if key in _GRID_CACHE:
        return _GRID_CACHE[key]
    rs = grid.distances()
    phis = grid.angles()
    deltas = geom.tx_offsets if side == "tx" else geom.rx_offsets
    d = geom.spacing
    # path-length difference, broadcast over (element, r, phi)
    rr = rs[None, :, None]
    pp = phis[None, None, :]
    dd = deltas[:, None, None] * d
    path = np.sqrt(rr**2 + dd**2 - 2.0 * rr * dd * np.sin(pp)) - rr
    B = np.exp(-2j * np.pi / geom.wavelength * path).reshape(len(deltas), -1)
    _GRID_CACHE[key] = B
    return B


def _refine(score, ir, ip, rs, phis):
    """Quadratic vertex fit on the 3x3 neighborhood of the grid argmax.

    Distances are refined in log space to match their geometric spacing.
    """
    n_r, n_phi = len(rs), len(phis)

    def offset(fm, f0, fp):
        den = fm - 2.0 * f0 + fp
        if den >= -1e-300:  # not a strict local max along this axis
            return 0.0
        return float(np.clip(0.5 * (fm - fp) / den, -0.5, 0.5))

    dr = 0.0
    if 0 < ir < n_r - 1:
        dr = offset(score[ir - 1, ip], score[ir, ip], score[ir + 1, ip])
    dp = 0.0
    if 0 < ip < n_phi - 1:
        dp = offset(score[ir, ip - 1], score[ir, ip], score[ir, ip + 1])
    log_step = np.log(rs[1] / rs[0])
    r_hat = float(np.exp(np.log(rs[ir]) + dr * log_step))
    phi_hat = float(phis[ip] + dp * (phis[1] - phis[0]))
    return r_hat, phi_hat


def mle_point(echo, geom, grid=None):
    """Concentrated maximum likelihood estimate (r, phi, mu) of a point target.

    For each grid point the reflection coefficient has the closed form
    mu(r, phi) = Tr(A^H Y X^H) / ||A X||_F^2 with A = b_r b_t^H, so the
    residual ||Y - mu A X||_F^2 is minimized by maximizing
    |b_r^H Y X^H b_t|^2 / (n_rx b_t^H X X^H b_t).
    """
    if grid is None:
        grid = default_grid(geom)
    Y, X = echo.Y, echo.X
    M = Y @ X.conj().T
    G = X @ X.conj().T
    Bt = _grid_steering(geom, grid, "tx")
    Br = _grid_steering(geom, grid, "rx")
    num = np.abs(np.einsum("ig,ig->g", Br.conj(), M @ Bt)) ** 2
    den = geom.n_rx * np.real(np.einsum("ig,ig->g", Bt.conj(), G @ Bt))
    score = (num / np.maximum(den, 1e-300)).reshape(grid.n_r, grid.n_phi)
    rs, phis = grid.distances(), grid.angles()
    ir, ip = np.unravel_index(np.argmax(score), score.shape)

    def point_score(r, phi):
        bt = geometry.steering_vector(geom, r, phi, side="tx")
        br = geometry.steering_vector(geom, r, phi, side="rx")
        return np.abs(br.conj() @ M @ bt) ** 2 / max(
            geom.n_rx * np.real(bt.conj() @ G @ bt), 1e-300)

    r_hat, phi_hat = _refine(score, ir, ip, rs, phis)
    # keep the refinement only when it actually improves the likelihood,
    # so exact on-grid truths are returned untouched
    if point_score(r_hat, phi_hat) < score[ir, ip]:
        r_hat, phi_hat = float(rs[ir]), float(phis[ip])
    bt = geometry.steering_vector(geom, r_hat, phi_hat, side="tx")
    br = geometry.steering_vector(geom, r_hat, phi_hat, side="rx")
    mu_hat = (br.conj() @ M @ bt) / max(geom.n_rx * np.real(bt.conj() @ G @ bt), 1e-300)
    return r_hat, phi_hat, complex(mu_hat)


def music_2d(echo, geom, grid=None):
    """2D MUSIC location estimate from the echo sample covariance.

    Single-target variant: the signal subspace is the dominant eigenvector
    of (1/L) Y Y^H and the pseudo-spectrum is the inverse squared noise
    subspace projection of the receive steering vector.
    """
    if geom.n_rx < 2:
        raise InvalidArgumentError("subspace method needs at least two receive elements")
    if echo.Y.shape[1] < 2:
        raise InvalidArgumentError("need more than one snapshot")
    if grid is None:
        grid = default_grid(geom)
    L = echo.Y.shape[1]
    R = echo.Y @ echo.Y.conj().T / L
    _, vecs = np.linalg.eigh(R)
    En = vecs[:, :-1]  # all but the largest-eigenvalue direction
    Br = _grid_steering(geom, grid, "rx")
    proj = np.sum(np.abs(En.conj().T @ Br) ** 2, axis=0)
    score = (1.0 / np.maximum(proj, 1e-300)).reshape(grid.n_r, grid.n_phi)
    rs, phis = grid.distances(), grid.angles()
    ir, ip = np.unravel_index(np.argmax(score), score.shape)
    r_hat, phi_hat = _refine(score, ir, ip, rs, phis)
    br = geometry.steering_vector(geom, r_hat, phi_hat, side="rx")
    refined = 1.0 / max(np.sum(np.abs(En.conj().T @ br) ** 2), 1e-300)
    if refined < score[ir, ip]:
        r_hat, phi_hat = float(rs[ir]), float(phis[ip])
    return r_hat, phi_hat


def lmmse_trm(echo, prior_variance, noise_power=None):
    """Linear MMSE estimate of the extended-target response matrix.

    The vectorized estimator contracts through the Kronecker identity to
    B_hat = sigma_beta^2 Y X^H (sigma_beta^2 X X^H + sigma^2 I)^{-1},
    so only an n_tx x n_tx system is solved.
    """
    if prior_variance <= 0:
        raise InvalidArgumentError("prior variance must be positive")
    if noise_power is None:
        noise_power = echo.noise_power
    X, Y = echo.X, echo.Y
    n_tx = X.shape[0]
    A = prior_variance * (X @ X.conj().T) + noise_power * np.eye(n_tx)
    if noise_power == 0:
        # noiseless limit: pseudo-inverse of the probing Gram matrix
        return prior_variance * Y @ X.conj().T @ np.linalg.pinv(A, rcond=1e-12, hermitian=True)
    return prior_variance * np.linalg.solve(A.conj().T, (Y @ X.conj().T).conj().T).conj().T
