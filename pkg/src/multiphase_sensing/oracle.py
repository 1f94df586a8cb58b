"""Brute-force checks of the closed forms.

* A truncated Fock-space simulation of the single-MZI (M = 1) sensor gives
  the QFI through the spectral SLD sum.
* Monte-Carlo homodyne records with per-batch maximum-likelihood estimates
  give an empirical Fisher information for the receiver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm, logm
from scipy.special import comb, gammaln

from .circuit import PhaseModel, SensorConfig, build_probe_circuit, output_moments_with_derivatives
from .errors import EstimationError, InvalidArgumentError, NumericalError, TruncationError

TRUNCATION_LIMIT = 1e-4
SLD_PRUNE = 1e-12


@dataclass(frozen=True)
class FockState:
    """Two-mode density matrix in the truncated product basis |n1, n2>."""

    cutoff: int
    rho: np.ndarray
    trunc_error: float

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class McEstimate:
    n_samples: int
    seed: int
    empirical_fisher: float
    empirical_mse: float
    n_repeats: int = 1
    mean_estimate: float = math.nan


# --- single-mode building blocks ------------------------------------------


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1)


def squeezed_vacuum_ket(r: float, cutoff: int) -> np.ndarray:
    """Squeezed vacuum with <q^2> = e^{2r}/2 (anti-squeezed along q)."""
    ket = np.zeros(cutoff)
    t = math.tanh(r)
    for k in range(0, (cutoff + 1) // 2):
        n = 2 * k
        if n >= cutoff:
            break
        # sqrt((2k)!) / (2^k k!) via log-gamma
        log_c = 0.5 * gammaln(n + 1) - k * math.log(2) - gammaln(k + 1)
        ket[n] = (t**k if k else 1.0) * math.exp(log_c)
    return ket / math.sqrt(math.cosh(r))


def coherent_ket(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    alpha = complex(alpha)
    if alpha == 0:
        ket = np.zeros(cutoff, dtype=complex)
        ket[0] = 1.0
        return ket
    log_mag = n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1) - abs(alpha) ** 2 / 2
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def loss_kraus(tau: float, cutoff: int) -> list[np.ndarray]:
    """Kraus operators of the pure-loss channel, truncated at ``cutoff``.

    K_k |n> = sqrt(C(n, k) tau^(n-k) (1-tau)^k) |n-k>.
    """
    ops = []
    for k in range(cutoff):
        m = np.arange(k, cutoff)
        coef = np.sqrt(comb(m, k) * tau ** (m - k) * (1 - tau) ** k)
        K = np.zeros((cutoff, cutoff))
        K[m - k, m] = coef
        ops.append(K)
    return ops


def apply_loss(rho: np.ndarray, tau: float) -> np.ndarray:
    cutoff = rho.shape[0]
    return sum(K @ rho @ K.T for K in loss_kraus(tau, cutoff))


@lru_cache(maxsize=8)
def _two_mode_operators(cutoff: int):
    a = annihilation(cutoff)
    eye = np.eye(cutoff)
    return np.kron(a, eye), np.kron(eye, a)


def passive_fock_unitary(U: np.ndarray, cutoff: int) -> np.ndarray:
    """Fock-space representation W of a two-mode passive unitary with
    W^dag a_i W = sum_j U_ij a_j, built as exp(sum_ij K_ij a_i^dag a_j), K = log U."""
    K = logm(np.asarray(U, dtype=complex))
    K = (K - K.conj().T) / 2
    ops = _two_mode_operators(cutoff)
    G = sum(K[i, j] * ops[i].conj().T @ ops[j] for i in range(2) for j in range(2))
    return expm(G)


@lru_cache(maxsize=8)
def _probe_unitary(cutoff: int) -> np.ndarray:
    return passive_fock_unitary(build_probe_circuit(1).U, cutoff)


def _mode1_number(cutoff: int) -> np.ndarray:
    return np.kron(np.arange(cutoff), np.ones(cutoff))


def _require_single_mzi(cfg: SensorConfig, model: PhaseModel, x: float):
    if cfg.M != 1:
        raise InvalidArgumentError(f"the Fock oracle supports M = 1 only, got M = {cfg.M}")
    if model.n_phases(x) != 1:
        raise InvalidArgumentError("phase model must produce a single phase")


def _check_truncation(deficit: float, cutoff: int):
    if deficit >= TRUNCATION_LIMIT:
        raise TruncationError(
            f"cutoff {cutoff} loses {deficit:.2e} of the probability; increase the cutoff",
            deficit,
        )


# --- state construction ---------------------------------------------------


def fock_final_state(cfg: SensorConfig, model: PhaseModel, x: float, cutoff: int = 30) -> FockState:
    """Density matrix just after phase modulation for the M = 1 sensor.

    Loss acts on the product input (it commutes with the passive circuit),
    then the balanced beamsplitter, then exp(i theta(x) n_1).
    """
    _require_single_mzi(cfg, model, x)
    if cutoff < 2:
        raise InvalidArgumentError("cutoff must be >= 2")
    sq = squeezed_vacuum_ket(cfg.r, cutoff)
    coh = coherent_ket(cfg.alpha, cutoff)
    deficit = max(0.0, 1.0 - float(np.vdot(sq, sq).real * np.vdot(coh, coh).real))
    _check_truncation(deficit, cutoff)
    rho1 = apply_loss(np.outer(sq, sq.conj()), cfg.tau)
    rho2 = apply_loss(np.outer(coh, coh.conj()), cfg.tau)
    rho = np.kron(rho1, rho2)
    W = _probe_unitary(cutoff)
    rho = W @ rho @ W.conj().T
    phase = np.exp(1j * model.phases(x)[0] * _mode1_number(cutoff))
    rho = phase[:, None] * rho * phase.conj()[None, :]
    rho = (rho + rho.conj().T) / 2
    return FockState(cutoff, rho, deficit)


def fock_state_derivative(state: FockState, model: PhaseModel, x: float) -> np.ndarray:
    """d rho / dx = i theta'(x) [n_1, rho]."""
    n1 = _mode1_number(state.cutoff)
    dth = model.derivatives(x)[0]
    return 1j * dth * (n1[:, None] * state.rho - state.rho * n1[None, :])


def sld_qfi(rho: FockState | np.ndarray, drho: np.ndarray) -> float:
    """QFI = 2 sum_ij |<i|d rho|j>|^2 / (p_i + p_j) over the eigenbasis of rho."""
    rho = rho.rho if isinstance(rho, FockState) else np.asarray(rho)
    try:
        p, vecs = np.linalg.eigh(rho)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    D = vecs.conj().T @ drho @ vecs
    denom = p[:, None] + p[None, :]
    mask = denom > SLD_PRUNE
    return float(2 * np.sum(np.abs(D[mask]) ** 2 / denom[mask]))


def fock_qfi(cfg: SensorConfig, model: PhaseModel, x: float | None = None, cutoff: int = 30) -> float:
    x = cfg.x0 if x is None else x
    state = fock_final_state(cfg, model, x, cutoff)
    return sld_qfi(state, fock_state_derivative(state, model, x))


def pure_state_qfi(cfg: SensorConfig, model: PhaseModel, x: float | None = None, cutoff: int = 30) -> float:
    """4 (<d psi|d psi> - |<psi|d psi>|^2) for the lossless pure state."""
    x = cfg.x0 if x is None else x
    _require_single_mzi(cfg, model, x)
    if cfg.tau != 1.0:
        raise InvalidArgumentError("pure-state QFI needs tau = 1")
    psi = np.kron(squeezed_vacuum_ket(cfg.r, cutoff), coherent_ket(cfg.alpha, cutoff))
    _check_truncation(1.0 - float(np.vdot(psi, psi).real), cutoff)
    n1 = _mode1_number(cutoff)
    psi = np.exp(1j * model.phases(x)[0] * n1) * (_probe_unitary(cutoff) @ psi)
    dpsi = 1j * model.derivatives(x)[0] * n1 * psi
    return float(4 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2))


# --- Monte-Carlo homodyne estimation --------------------------------------


def _moments_many(cfg, model, xs):
    out = np.array([output_moments_with_derivatives(cfg, model, float(x)) for x in xs])
    return out[:, 0], out[:, 1], out[:, 2], out[:, 3]


def sample_sufficient_statistics(mean: float, var: float, n: int, n_repeats: int,
                                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw (sum y, sum (y - ybar)^2) for ``n_repeats`` records of n Gaussian shots.

    The pair is exactly distributed as for explicit samples:
    sum y ~ N(n mean, n var) and the scatter ~ var * chi2(n - 1), independent.
    """
    total = rng.normal(n * mean, math.sqrt(n * var), size=n_repeats)
    scatter = var * rng.chisquare(n - 1, size=n_repeats) if n > 1 else np.zeros(n_repeats)
    return total, scatter


def mle_from_statistics(cfg: SensorConfig, model: PhaseModel, n: int, total: np.ndarray,
                        scatter: np.ndarray, max_iter: int = 100, tol: float = 1e-12) -> np.ndarray:
    """MLE of x for each record of n Gaussian homodyne shots, started at x0.

    Newton iterations on the log-likelihood with the expected information
    as curvature (scoring).
    """
    total = np.atleast_1d(np.asarray(total, dtype=float))
    scatter = np.atleast_1d(np.asarray(scatter, dtype=float))
    ybar = total / n
    x = np.full(total.size, float(cfg.x0))
    active = np.ones(total.size, dtype=bool)
    for it in range(max_iter):
        idx = np.flatnonzero(active)
        mu, var, dmu, dvar = _moments_many(cfg, model, x[idx])
        dev = ybar[idx] - mu
        sum_res = n * dev
        sum_res_sq = scatter[idx] + n * dev**2
        score = sum_res * dmu / var + (sum_res_sq - n * var) * dvar / (2 * var**2)
        info = n * (dmu**2 / var + dvar**2 / (2 * var**2))
        if np.any(info <= 0):
            raise EstimationError(
                "zero Fisher information: the likelihood does not depend on x",
                {"iteration": it, "x": x[idx][info <= 0][:5].tolist()},
            )
        step = score / info
        x[idx] += step
        if not np.all(np.isfinite(x)):
            raise EstimationError("MLE diverged", {"iteration": it})
        active[idx] = np.abs(step) > tol * (1 + np.abs(x[idx]))
        if not active.any():
            return x
    raise EstimationError(
        f"MLE did not converge after {max_iter} iterations",
        {"unconverged": int(active.sum()), "x_sample": x[active][:5].tolist()},
    )


def mle_samples(cfg: SensorConfig, model: PhaseModel, samples: np.ndarray, **kw) -> np.ndarray:
    """Per-row MLE for explicit homodyne samples (rows are independent records)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = samples.shape[1]
    ybar = samples.mean(axis=1)
    scatter = ((samples - ybar[:, None]) ** 2).sum(axis=1)
    return mle_from_statistics(cfg, model, n, n * ybar, scatter, **kw)


def mc_homodyne(cfg: SensorConfig, model: PhaseModel, x_true: float | None = None,
                n_samples: int = 100_000, seed: int = 0, n_repeats: int = 20_000) -> McEstimate:
    """Empirical Fisher information of the homodyne receiver.

    Each of ``n_repeats`` simulated experiments records ``n_samples`` shots
    at ``x_true`` and yields one maximum-likelihood estimate; the empirical
    per-shot Fisher information is 1 / (n_samples * MSE).
    """
    if n_samples < 1 or n_repeats < 2:
        raise InvalidArgumentError("need n_samples >= 1 and n_repeats >= 2")
    x_true = cfg.x0 if x_true is None else float(x_true)
    mu, var, dmu, dvar = output_moments_with_derivatives(cfg, model, x_true)
    if dmu == 0.0 and dvar == 0.0:
        raise EstimationError("zero Fisher information at x_true; the estimate is ill-posed",
                              {"x_true": x_true})
    rng = np.random.default_rng(seed)
    total, scatter = sample_sufficient_statistics(mu, var, n_samples, n_repeats, rng)
    est = mle_from_statistics(cfg, model, n_samples, total, scatter)
    mse = float(np.mean((est - x_true) ** 2))
    return McEstimate(
        n_samples=n_samples,
        seed=seed,
        empirical_fisher=1.0 / (mse * n_samples),
        empirical_mse=mse,
        n_repeats=n_repeats,
        mean_estimate=float(np.mean(est)),
    )
