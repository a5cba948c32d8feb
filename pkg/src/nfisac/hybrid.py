"""Factorization of a digital beamformer into analog and digital stages.

The analog stage T_A is a phase-shifter matrix (unit-modulus entries; in the
partially-connected wiring each RF chain drives a disjoint group of
antennas), the digital stage T_D is unconstrained.  Alternating updates
minimize || W - T_A T_D ||_F: the digital step is a least-squares
(fully-connected) or matched-scaling (partially-connected) update, the
analog step is a majorize-minimize phase rotation.  The realized power
|| T_A T_D ||_F^2 is pinned to the target by a final normalization; in the
partially-connected wiring the block structure makes the realized power
independent of the phases, so every digital update is normalized and the
alternation never leaves the power-equality set.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ZeroDirectionError

#: ridge added to the analog Gram matrix when it is numerically singular
GRAM_RIDGE = 1e-10


@dataclass(frozen=True)
class HybridFactors:
    """Result of an analog/digital factorization.

    residual is || W - analog @ digital ||_F / || W ||_F; trace holds the
    per-sweep residuals of the returned run.  regularized marks that the
    analog Gram matrix needed a ridge at least once.
    """

    analog: np.ndarray
    digital: np.ndarray
    architecture: str
    residual: float
    iterations: int
    trace: tuple = ()
    regularized: bool = False


def connection_groups(n_tx, n_rf):
    """Antenna-to-RF-chain assignment of the partially-connected wiring."""
    if n_tx % n_rf != 0:
        raise InvalidArgumentError("partially-connected wiring needs n_rf | n_tx")
    return np.repeat(np.arange(n_rf), n_tx // n_rf)


def partial_mask(n_tx, n_rf):
    groups = connection_groups(n_tx, n_rf)
    mask = np.zeros((n_tx, n_rf), dtype=bool)
    mask[np.arange(n_tx), groups] = True
    return mask


def _unit_phases(F):
    """exp(j * arg(F)) with the zero-argument convention arg(0) = 0."""
    return np.exp(1j * np.angle(F))


def _gram_solve(T_A, rhs):
    """Solve (T_A^H T_A) X = rhs, adding a small ridge if the Gram is singular."""
    G = T_A.conj().T @ T_A
    evals = np.linalg.eigvalsh(G)
    regularized = evals[0] < 1e-12 * max(evals[-1], 1.0)
    if regularized:
        G = G + GRAM_RIDGE * np.eye(G.shape[0])
    return np.linalg.solve(G, rhs), regularized


def fully_digital_update(T_A, W, power=None):
    """Least-squares digital stage; rescaled to ||T_A T_D||_F^2 = power if given."""
    T_D, _ = _gram_solve(T_A, T_A.conj().T @ W)
    if power is None:
        return T_D
    realized = np.linalg.norm(T_A @ T_D)
    if realized == 0:
        raise ZeroDirectionError("digital stage vanished; cannot normalize power")
    return T_D * (np.sqrt(power) / realized)


def fully_analog_update(T_A_prev, T_D, W):
    """One majorize-minimize phase update of the fully-connected analog stage.

    The quadratic coupling through T_D T_D^H is majorized at its largest
    eigenvalue (with a small positive shift so T_D = 0 leaves the phases
    untouched), which decouples the entries into independent rotations and
    never increases || W - T_A T_D ||_F for the fixed digital stage.
    """
    M_D = T_D @ T_D.conj().T
    lam = float(np.linalg.eigvalsh(M_D).max()) if M_D.size else 0.0
    lam = lam + 1e-12 + 1e-9 * lam
    F = W @ T_D.conj().T - T_A_prev @ (M_D - lam * np.eye(M_D.shape[0]))
    return _unit_phases(F)


def partially_digital_update(T_A, W, power):
    """Matched digital stage for the partially-connected wiring.

    Each RF chain feeds n_tx / n_rf antennas, so T_A^H T_A = (n_tx/n_rf) I
    and the power normalization is one scalar on the matched filter T_A^H W,
    giving ||T_D||_F^2 = power * n_rf / n_tx exactly.
    """
    n_tx, n_rf = T_A.shape
    group_size = n_tx // n_rf
    T_D = T_A.conj().T @ W
    norm = np.linalg.norm(T_D)
    if norm == 0:
        raise ZeroDirectionError("digital stage vanished; cannot normalize power")
    return T_D * (np.sqrt(power / group_size) / norm)


def partially_analog_update(T_D, W):
    """Optimal per-entry phases of the block-diagonal analog stage.

    Entry (p, q) exists only when antenna p belongs to group q; its phase
    aligns row p of W with row q of T_D, and a vanishing inner product
    leaves the phase at zero.
    """
    n_rf = T_D.shape[0]
    n_tx = W.shape[0]
    groups = connection_groups(n_tx, n_rf)
    inner = (W @ T_D.conj().T)[np.arange(n_tx), groups]
    T_A = np.zeros((n_tx, n_rf), dtype=complex)
    T_A[np.arange(n_tx), groups] = _unit_phases(inner)
    return T_A


def _two_phase_analog(W, n_rf):
    """Exact fully-connected analog stage for n_rf >= 2 * n_streams.

    Every entry of a column w splits as c (e^{ja} + e^{jb}) with
    c = max_i |w_i| / 2, so two phase-shifter columns reproduce the column
    exactly; leftover RF chains get unit phases and zero digital rows from
    the least-squares digital step.
    """
    n_tx, n_streams = W.shape
    T_A = np.ones((n_tx, n_rf), dtype=complex)
    for k in range(n_streams):
        w = W[:, k]
        c = np.abs(w).max() / 2.0
        if c == 0:
            continue
        phase = np.angle(w)
        half = np.arccos(np.clip(np.abs(w) / (2.0 * c), 0.0, 1.0))
        T_A[:, 2 * k] = np.exp(1j * (phase + half))
        T_A[:, 2 * k + 1] = np.exp(1j * (phase - half))
    return T_A


def _init_analog(W, n_rf, architecture, rng=None):
    """Phase init from the beamformer columns, or seeded random phases."""
    n_tx, n_streams = W.shape
    if rng is None:
        if architecture == "fully" and 2 * n_streams <= n_rf:
            return _two_phase_analog(W, n_rf)
        cols = [W[:, k % n_streams] for k in range(n_rf)]
        T_A = _unit_phases(np.stack(cols, axis=1))
    else:
        T_A = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (n_tx, n_rf)))
    if architecture == "partially":
        T_A = np.where(partial_mask(n_tx, n_rf), T_A, 0.0)
    return T_A


def _run_fully(W, T_A, power, tol, max_iter, analog_steps):
    """Alternating sweeps with the raw least-squares digital stage.

    Power normalization is deferred to the exit update: applying the
    >= 1 rescaling inside the loop breaks the joint descent of the
    alternation, while at the fixed point both variants agree to first
    order in the residual.
    """
    norm_w = np.linalg.norm(W)
    trace = []
    prev = np.inf
    regularized = False
    for it in range(1, max_iter + 1):
        T_D, reg = _gram_solve(T_A, T_A.conj().T @ W)
        regularized = regularized or reg
        for _ in range(analog_steps):
            T_A = fully_analog_update(T_A, T_D, W)
        T_D, reg = _gram_solve(T_A, T_A.conj().T @ W)
        regularized = regularized or reg
        res = float(np.linalg.norm(W - T_A @ T_D) / norm_w)
        trace.append(res)
        if abs(prev - res) < tol:
            break
        prev = res
    T_D = fully_digital_update(T_A, W, power)
    res = float(np.linalg.norm(W - T_A @ T_D) / norm_w)
    return T_A, T_D, res, it, trace, regularized


def _run_partially(W, T_A, power, tol, max_iter):
    norm_w = np.linalg.norm(W)
    trace = []
    prev = np.inf
    for it in range(1, max_iter + 1):
        T_D = partially_digital_update(T_A, W, power)
        T_A = partially_analog_update(T_D, W)
        T_D = partially_digital_update(T_A, W, power)
        res = float(np.linalg.norm(W - T_A @ T_D) / norm_w)
        trace.append(res)
        if abs(prev - res) < tol:
            break
        prev = res
    return T_A, T_D, res, it, trace, False


def factorize(W, n_rf, power=None, architecture="fully", tol=1e-6, max_iter=200,
              analog_steps=30, restarts=5):
    """Factor W ~ T_A T_D under a realized-power target.

    n_rf may be an integer or any object with an n_rf attribute.  power
    defaults to ||W||_F^2, so a feasible W keeps its radiated power.  The
    first run starts from the phases of W; if its residual stays above
    1e-4, up to `restarts` deterministic random-phase starts are tried and
    the best run is returned.
    """
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.size == 0:
        raise InvalidArgumentError("W must be a nonempty matrix")
    if architecture not in ("fully", "partially"):
        raise InvalidArgumentError(f"unknown architecture {architecture!r}")
    n_rf = int(getattr(n_rf, "n_rf", n_rf))
    if not 1 <= n_rf <= W.shape[0]:
        raise InvalidArgumentError("need 1 <= n_rf <= n_tx")
    norm_w = np.linalg.norm(W)
    if norm_w == 0:
        raise ZeroDirectionError("cannot factorize the zero beamformer")
    if power is None:
        power = float(norm_w**2)
    if power <= 0:
        raise InvalidArgumentError("power target must be positive")

    def run(T_A0):
        if architecture == "fully":
            return _run_fully(W, T_A0, power, tol, max_iter, analog_steps)
        return _run_partially(W, T_A0, power, tol, max_iter)

    best = run(_init_analog(W, n_rf, architecture))
    rng = np.random.default_rng(0x5EED)
    tries = 0
    while best[2] > 1e-4 and tries < restarts:
        cand = run(_init_analog(W, n_rf, architecture, rng))
        if cand[2] < best[2]:
            best = cand
        tries += 1
    T_A, T_D, res, it, trace, regularized = best
    return HybridFactors(analog=T_A, digital=T_D, architecture=architecture,
                         residual=res, iterations=it, trace=tuple(trace),
                         regularized=regularized)
