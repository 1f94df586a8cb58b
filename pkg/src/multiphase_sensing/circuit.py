"""The distributed-MZI sensor: probe preparation, phase modulation, receiver.

Mode layout for M phases: modes 1..M are the upper (phase-carrying) arms,
modes M+1..2M the lower reference arms.  The squeezed vacuum enters mode 1
and the coherent state mode M+1.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError
from .phase_space import (
    LossChannel,
    PassiveUnitary,
    apply_symplectic,
    apply_uniform_loss,
    homodyne_q_distribution,
    probe_state,
    symplectic_from_unitary,
)


@dataclass(frozen=True)
class SensorConfig:
    M: int
    r: float
    alpha: complex = 0.0
    tau: float = 1.0
    phi_H: float = np.pi / 2
    x0: float = 0.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidArgumentError(f"M must be a positive integer, got {self.M}")
        if not self.r >= 0 or not np.isfinite(self.r):
            raise InvalidArgumentError(f"r must be finite and >= 0, got {self.r}")
        if not 0.0 <= self.tau <= 1.0:
            raise InvalidArgumentError(f"tau must lie in [0, 1], got {self.tau}")
        if not np.isfinite(complex(self.alpha)):
            raise InvalidArgumentError(f"alpha must be finite, got {self.alpha}")
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def from_energy(cls, M: int, N: float, eta: float, **kw) -> SensorConfig:
        """Split total photon number N: a fraction eta goes to the squeezed vacuum."""
        if N < 0 or not 0.0 <= eta <= 1.0:
            raise InvalidArgumentError(f"need N >= 0 and eta in [0, 1], got {N}, {eta}")
        n_s = eta * N
        return cls(M, float(np.arcsinh(np.sqrt(n_s))), float(np.sqrt(N - n_s)), **kw)

    @property
    def N_s(self) -> float:
        return float(np.sinh(self.r) ** 2)

    @property
    def N_v(self) -> float:
        return float(abs(complex(self.alpha)) ** 2)

    @property
    def N(self) -> float:
        return self.N_s + self.N_v

    @property
    def alpha_is_real(self) -> bool:
        return complex(self.alpha).imag == 0.0

    def replace(self, **changes) -> SensorConfig:
        return dataclasses.replace(self, **changes)


def fd_step(x: float) -> float:
    return max(1e-6, 1e-6 * abs(x))


@dataclass(frozen=True)
class PhaseModel:
    """Map from the scalar parameter x to the M modulated phases.

    ``dtheta`` is optional; without it derivatives come from a central
    difference with step ``max(1e-6, 1e-6 |x|)``.
    """

    theta: Callable[[float], np.ndarray]
    dtheta: Optional[Callable[[float], np.ndarray]] = None

    def phases(self, x: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.theta(x), dtype=float))

    def derivatives(self, x: float) -> np.ndarray:
        if self.dtheta is not None:
            return np.atleast_1d(np.asarray(self.dtheta(x), dtype=float))
        h = fd_step(x)
        return (self.phases(x + h) - self.phases(x - h)) / (2 * h)

    def n_phases(self, x: float = 0.0) -> int:
        return self.phases(x).size

    @classmethod
    def linear(cls, coefficients) -> PhaseModel:
        """theta_m(x) = c_m x."""
        c = np.array(coefficients, dtype=float)
        c.setflags(write=False)
        return cls(lambda x: c * x, lambda x: c.copy())

    @classmethod
    def equal(cls, M: int) -> PhaseModel:
        """Every phase equals x."""
        return cls.linear(np.ones(M))


def fourier_matrix(M: int) -> np.ndarray:
    j = np.arange(M)
    return np.exp(2j * np.pi * np.outer(j, j) / M) / np.sqrt(M)


def build_probe_circuit(M: int, fourier: Optional[np.ndarray] = None) -> PassiveUnitary:
    """U_I = (1/sqrt 2) [[F, F], [F, -F]] on 2M modes.

    ``fourier`` replaces the DFT by any M x M balanced unitary.
    """
    if M < 1:
        raise InvalidArgumentError(f"M must be >= 1, got {M}")
    F = fourier_matrix(M) if fourier is None else np.asarray(fourier, dtype=complex)
    if F.shape != (M, M):
        raise InvalidArgumentError(f"mixing matrix must be {M}x{M}, got {F.shape}")
    return PassiveUnitary(np.block([[F, F], [F, -F]]) / np.sqrt(2))


def build_modulation(thetas) -> PassiveUnitary:
    """diag(e^{i theta_1}, ..., e^{i theta_M}, 1, ..., 1)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phases = np.concatenate([np.exp(1j * thetas), np.ones(thetas.size)])
    return PassiveUnitary(np.diag(phases))


def homodyne_rotation(M: int, phi_H: float) -> PassiveUnitary:
    phases = np.ones(2 * M, dtype=complex)
    phases[0] = np.exp(1j * phi_H)
    return PassiveUnitary(np.diag(phases))


def _check_model(cfg: SensorConfig, model: PhaseModel, x: float) -> None:
    m = model.n_phases(x)
    if m != cfg.M:
        raise InvalidArgumentError(f"phase model has {m} phases but M = {cfg.M}")


def system_unitary(
    cfg: SensorConfig, model: PhaseModel, x: float, fourier: Optional[np.ndarray] = None
) -> PassiveUnitary:
    """U(x) = U_H U_I^dag U_{x0}^dag U_x U_I as a dense 2M x 2M matrix."""
    _check_model(cfg, model, x)
    U_I = build_probe_circuit(cfg.M, fourier)
    U_x = build_modulation(model.phases(x))
    U_x0 = build_modulation(model.phases(cfg.x0))
    return homodyne_rotation(cfg.M, cfg.phi_H) @ U_I.H @ U_x0.H @ U_x @ U_I


def receiver_elements(cfg: SensorConfig, model: PhaseModel, x: float) -> tuple[complex, complex]:
    """Closed-form (1, 1) and (1, M+1) entries of U(x)."""
    _check_model(cfg, model, x)
    mean_phasor = np.mean(np.exp(1j * (model.phases(x) - model.phases(cfg.x0))))
    pre = np.exp(1j * cfg.phi_H) / 2
    return complex(pre * (mean_phasor + 1)), complex(pre * (mean_phasor - 1))


def _receiver_element_derivatives(cfg, model, x):
    dphi = model.phases(x) - model.phases(cfg.x0)
    d_mean_phasor = np.mean(1j * model.derivatives(x) * np.exp(1j * dphi))
    return complex(np.exp(1j * cfg.phi_H) / 2 * d_mean_phasor)


def _closed_moments(cfg, U11, U1M1):
    q0 = np.sqrt(2) * complex(cfg.alpha).real
    tau, r = cfg.tau, cfg.r
    mean = np.sqrt(tau) * U1M1.real * q0
    var = 0.5 * (
        1 + tau * U11.real**2 * np.expm1(2 * r) + tau * U11.imag**2 * np.expm1(-2 * r)
    )
    return float(mean), float(var)


def output_moments_dense(
    cfg: SensorConfig,
    model: PhaseModel,
    x: float,
    loss_at: str = "input",
    fourier: Optional[np.ndarray] = None,
) -> tuple[float, float]:
    """Propagate the full 4M-dimensional moments and read off the measured mode.

    ``loss_at`` places the pure-loss channel before U_I ("input") or just
    before the homodyne detector ("output").
    """
    state = probe_state(cfg.M, cfg.r, cfg.alpha)
    S = symplectic_from_unitary(system_unitary(cfg, model, x, fourier))
    loss = LossChannel(cfg.tau)
    if loss_at == "input":
        state = apply_symplectic(apply_uniform_loss(state, loss), S)
    elif loss_at == "output":
        state = apply_uniform_loss(apply_symplectic(state, S), loss)
    else:
        raise InvalidArgumentError(f"loss_at must be 'input' or 'output', got {loss_at!r}")
    return homodyne_q_distribution(state, 1)


def output_moments(
    cfg: SensorConfig, model: PhaseModel, x: float, method: str = "auto"
) -> tuple[float, float]:
    """Mean and variance of the homodyne outcome on output mode 1.

    The closed form assumes a real coherent amplitude; "auto" falls back to
    dense propagation when alpha is complex.
    """
    if method == "auto":
        method = "closed" if cfg.alpha_is_real else "dense"
    if method == "dense":
        return output_moments_dense(cfg, model, x)
    if method != "closed":
        raise InvalidArgumentError(f"unknown method {method!r}")
    if not cfg.alpha_is_real:
        raise InvalidArgumentError("closed-form moments require a real alpha")
    return _closed_moments(cfg, *receiver_elements(cfg, model, x))


def output_moments_with_derivatives(cfg: SensorConfig, model: PhaseModel, x: float):
    """(mean, variance, d mean/dx, d variance/dx), analytic in the phase derivatives."""
    if not cfg.alpha_is_real:
        raise InvalidArgumentError("closed-form moments require a real alpha")
    U11, U1M1 = receiver_elements(cfg, model, x)
    dU = _receiver_element_derivatives(cfg, model, x)  # same for both elements
    mean, var = _closed_moments(cfg, U11, U1M1)
    q0 = np.sqrt(2) * complex(cfg.alpha).real
    tau, r = cfg.tau, cfg.r
    dmean = np.sqrt(tau) * dU.real * q0
    dvar = tau * (U11.real * dU.real * np.expm1(2 * r) + U11.imag * dU.imag * np.expm1(-2 * r))
    return mean, var, float(dmean), float(dvar)
