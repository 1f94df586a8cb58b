"""Gaussian-state phase-space core.

Conventions: quadratures are ordered (q_1..q_n, p_1..p_n), hbar = 1, so the
vacuum covariance matrix is I/2.  A passive mode transformation a -> U a has
the real phase-space representation S = [[Re U, -Im U], [Im U, Re U]].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
UNITARITY_TOL = 1e-10


def symplectic_form(n: int) -> np.ndarray:
    """Return the 2n x 2n symplectic form [[0, I], [-I, 0]] in (q, p) order."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, sorted ascending.

    The values are the moduli of the eigenvalues of ``i Omega V``, each of
    which appears twice; one copy of each pair is returned.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
        raise InvalidArgumentError(f"covariance must be 2n x 2n, got {V.shape}")
    try:
        np.linalg.cholesky((V + V.T) / 2)
    except np.linalg.LinAlgError:
        raise InvalidArgumentError("covariance matrix is not positive definite") from None
    n = V.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ V))
    return np.sort(ev)[::2]


@dataclass(frozen=True)
class GaussianState:
    """First moments ``d`` and covariance matrix ``V`` of an n-mode Gaussian state."""

    d: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        V = np.array(self.V, dtype=float)
        if d.ndim != 1 or d.size % 2 or V.shape != (d.size, d.size):
            raise InvalidArgumentError(
                f"inconsistent moment shapes: d {d.shape}, V {V.shape}"
            )
        if np.max(np.abs(V - V.T), initial=0.0) > SYMMETRY_TOL:
            raise InvalidArgumentError("covariance matrix is not symmetric")
        nu = symplectic_eigenvalues(V)
        if nu[0] < 0.5 - PHYSICALITY_TOL:
            raise InvalidArgumentError(
                f"unphysical state: smallest symplectic eigenvalue {nu[0]:.3e} < 1/2"
            )
        d.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "V", V)

    @property
    def n_modes(self) -> int:
        return self.d.size // 2

    @classmethod
    def vacuum(cls, n_modes: int) -> GaussianState:
        return cls(np.zeros(2 * n_modes), np.eye(2 * n_modes) / 2)

    def purity(self) -> float:
        """Tr(rho^2) = 1 / sqrt(det 2V)."""
        return 1.0 / np.sqrt(np.linalg.det(2 * self.V))


@dataclass(frozen=True)
class PassiveUnitary:
    """Complex n x n mode-mixing matrix."""

    U: np.ndarray

    def __post_init__(self):
        U = np.array(self.U, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise InvalidArgumentError(f"unitary must be square, got {U.shape}")
        defect = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
        if defect > UNITARITY_TOL:
            raise InvalidArgumentError(f"matrix is not unitary (defect {defect:.2e})")
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    @property
    def n_modes(self) -> int:
        return self.U.shape[0]

    def __matmul__(self, other: PassiveUnitary) -> PassiveUnitary:
        return PassiveUnitary(self.U @ other.U)

    @property
    def H(self) -> PassiveUnitary:
        return PassiveUnitary(self.U.conj().T)


@dataclass(frozen=True)
class Symplectic:
    """Real 2n x 2n phase-space map."""

    S: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2


@dataclass(frozen=True)
class LossChannel:
    """Identical pure-loss channel of transmissivity ``tau`` on every mode."""

    tau: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise InvalidArgumentError(f"tau must lie in [0, 1], got {self.tau}")


def symplectic_from_unitary(U: PassiveUnitary | np.ndarray) -> Symplectic:
    """Phase-space representation of a passive unitary.

    S = I_2 (x) Re U - Omega (x) Im U with Omega = antidiag(1, -1), i.e. the
    block matrix [[Re U, -Im U], [Im U, Re U]].
    """
    if not isinstance(U, PassiveUnitary):
        U = PassiveUnitary(U)
    omega = np.array([[0.0, 1.0], [-1.0, 0.0]])
    S = np.kron(np.eye(2), U.U.real) - np.kron(omega, U.U.imag)
    return Symplectic(S)


def apply_symplectic(state: GaussianState, S: Symplectic | np.ndarray) -> GaussianState:
    S = S.S if isinstance(S, Symplectic) else np.asarray(S, dtype=float)
    if S.shape != state.V.shape:
        raise InvalidArgumentError(
            f"symplectic {S.shape} does not match a {state.n_modes}-mode state"
        )
    V = S @ state.V @ S.T
    return GaussianState(S @ state.d, (V + V.T) / 2)


def apply_uniform_loss(state: GaussianState, ch: LossChannel | float) -> GaussianState:
    tau = ch.tau if isinstance(ch, LossChannel) else LossChannel(float(ch)).tau
    eye = np.eye(state.d.size)
    return GaussianState(np.sqrt(tau) * state.d, tau * state.V + (1 - tau) / 2 * eye)


def probe_state(M: int, r: float, alpha: complex) -> GaussianState:
    """Squeezed vacuum on mode 1 and a coherent state on mode M+1; 2M modes total.

    Mode 1 is anti-squeezed in q (variance e^{2r}/2).
    """
    if int(M) != M or M < 1:
        raise InvalidArgumentError(f"M must be a positive integer, got {M}")
    if r < 0:
        raise InvalidArgumentError(f"squeezing r must be >= 0, got {r}")
    M = int(M)
    n = 2 * M
    alpha = complex(alpha)
    d = np.zeros(2 * n)
    d[M] = np.sqrt(2) * alpha.real
    d[n + M] = np.sqrt(2) * alpha.imag
    v = np.ones(2 * n)
    v[0] = np.exp(2 * r)
    v[n] = np.exp(-2 * r)
    return GaussianState(d, np.diag(v) / 2)


def homodyne_q_distribution(state: GaussianState, mode: int) -> tuple[float, float]:
    """Mean and variance of the q-quadrature of ``mode`` (1-based)."""
    if not 1 <= mode <= state.n_modes:
        raise InvalidArgumentError(
            f"mode {mode} out of range for a {state.n_modes}-mode state"
        )
    i = mode - 1
    return float(state.d[i]), float(state.V[i, i])
