"""Phase models for concrete sensors: RF phased array, beam displacement,
fiber temperature gradiometry."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import PhaseModel
from .errors import InvalidArgumentError
from .fisher import Prefactors

SPEED_OF_LIGHT = 3e8


@dataclass(frozen=True)
class RfArrayModel:
    """M RF-photonic modulators at positions m*b, m = 1..M.

    ``Omega_rf`` enters the phase as sin(Omega_rf * (...)), i.e. it is an
    angular frequency in rad/s.
    """

    A: float
    Omega_rf: float
    b: float
    M: int
    t: float = 0.0
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.A <= 0 or self.Omega_rf <= 0 or self.b <= 0:
            raise InvalidArgumentError("A, Omega_rf and b must be positive")
        if int(self.M) != self.M or self.M < 1:
            raise InvalidArgumentError(f"M must be a positive integer, got {self.M}")

    @classmethod
    def reference_array(cls, M: int) -> RfArrayModel:
        """A = 0.1, Omega = 3e4 rad/s, b = 10 m, t = 0."""
        return cls(A=0.1, Omega_rf=3e4, b=10.0, M=M)


def rf_phase_model(m: RfArrayModel) -> PhaseModel:
    """theta_m(phi) = A sin(Omega (t + m b sin(phi) / c)), phi the angle of incidence."""
    pos = np.arange(1, m.M + 1) * m.b / m.c

    def theta(phi):
        return m.A * np.sin(m.Omega_rf * (m.t + pos * np.sin(phi)))

    def dtheta(phi):
        return m.A * np.cos(m.Omega_rf * (m.t + pos * np.sin(phi))) * m.Omega_rf * pos * np.cos(phi)

    return PhaseModel(theta, dtheta)


@dataclass(frozen=True)
class BeamDisplacementModel:
    """Mode-crosstalk coefficients lambda_m; the phases are 2 lambda_m delta."""

    lambdas: tuple = field(default=())

    def __post_init__(self):
        lam = tuple(float(v) for v in np.atleast_1d(self.lambdas))
        if not lam:
            raise InvalidArgumentError("need at least one crosstalk coefficient")
        if not np.all(np.isfinite(lam)):
            raise InvalidArgumentError("crosstalk coefficients must be finite")
        object.__setattr__(self, "lambdas", lam)

    @property
    def M(self) -> int:
        return len(self.lambdas)


def beam_displacement_phase_model(m: BeamDisplacementModel) -> PhaseModel:
    return PhaseModel.linear(2 * np.asarray(m.lambdas))


def beam_displacement_prefactor(m: BeamDisplacementModel) -> Prefactors:
    """<d theta> and <d theta^2> at delta0 = 0 for theta_m = 2 lambda_m delta."""
    return Prefactors.from_derivatives(2 * np.asarray(m.lambdas))


@dataclass(frozen=True)
class GradiometryModel:
    """Fiber MZI embedded at y0 on a rod relaxing from a point heat pulse.

    The rod temperature follows the infinite-line heat kernel with
    diffusivity D = k / (rho_density c_p); the fiber phase is beta * u.
    Temporal modes are read out at t_m = m / W, m = 1..M.
    """

    rho_density: float
    c_p: float
    y0: float
    W: float
    beta: float
    Q: float
    M: int

    def __post_init__(self):
        if min(self.rho_density, self.c_p, self.W, self.Q) <= 0:
            raise InvalidArgumentError("rho_density, c_p, W and Q must be positive")
        if self.beta < 0:
            raise InvalidArgumentError("beta must be >= 0")
        if int(self.M) != self.M or self.M < 1:
            raise InvalidArgumentError(f"M must be a positive integer, got {self.M}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(1, self.M + 1) / self.W

    def temperature(self, k: float) -> np.ndarray:
        if k <= 0:
            raise InvalidArgumentError(f"thermal conductivity must be positive, got {k}")
        D = k / (self.rho_density * self.c_p)
        t = self.times
        return self.Q / np.sqrt(4 * np.pi * D * t) * np.exp(-self.y0**2 / (4 * D * t))

    def dtemperature_dk(self, k: float) -> np.ndarray:
        """Analytic d u / d k, used to cross-check the numeric derivative."""
        D = k / (self.rho_density * self.c_p)
        u = self.temperature(k)
        return u * (-1 / (2 * k) + self.y0**2 / (4 * D * k * self.times))


def gradiometry_phase_model(m: GradiometryModel) -> PhaseModel:
    """theta_m(k) = beta u(y0, m / W); derivatives by central difference."""
    return PhaseModel(lambda k: m.beta * m.temperature(k))
