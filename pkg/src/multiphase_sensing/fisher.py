"""Closed-form quantum and classical Fisher information for the parameter x.

CFI closed forms are defined at the reference point x = x0, where the
receiver is matched to the phases.  The homodyne-phase variable
``sigma = sin^2(phi_H)`` is kept distinct from the reduced squeezing ``s_red``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .circuit import PhaseModel, SensorConfig, output_moments, output_moments_with_derivatives
from .errors import DegenerateRegimeError, InvalidArgumentError, NumericalError

R_MIN = 1e-8  # below this csch(2r) in sigma_opt is numerically meaningless


@dataclass(frozen=True)
class LossyQfiIntermediates:
    N1bar: float
    s_red: float
    h: Optional[float] = None


@dataclass(frozen=True)
class Prefactors:
    """Array averages <d theta> and <d theta^2> of the phase derivatives."""

    mean_dtheta: float
    mean_dtheta_sq: float

    @classmethod
    def from_derivatives(cls, dtheta) -> Prefactors:
        dtheta = np.atleast_1d(np.asarray(dtheta, dtype=float))
        if dtheta.size == 0:
            raise InvalidArgumentError("need at least one phase derivative")
        return cls(float(np.mean(dtheta)), float(np.mean(dtheta**2)))


@dataclass(frozen=True)
class FisherReport:
    qfi: float
    cfi_d: float
    cfi_v: float
    cfi_mode1: float
    cfi_mode2: float
    cfi_mode3: float
    sigma_opt: float
    intermediates: LossyQfiIntermediates
    prefactors: Prefactors
    degenerate: bool = False

    @property
    def cfi(self) -> float:
        return self.cfi_d + self.cfi_v


def prefactors(model: PhaseModel, x: float) -> Prefactors:
    return Prefactors.from_derivatives(model.derivatives(x))


def _check_r_tau(r, tau):
    if r < 0:
        raise InvalidArgumentError(f"r must be >= 0, got {r}")
    if not 0.0 <= tau <= 1.0:
        raise InvalidArgumentError(f"tau must lie in [0, 1], got {tau}")


def _real_alpha(alpha) -> float:
    alpha = complex(alpha)
    if alpha.imag != 0.0:
        raise InvalidArgumentError("closed-form Fisher information requires a real alpha")
    return alpha.real


# --- quantum Fisher information -------------------------------------------


def qfi_intermediates(r: float, tau: float) -> LossyQfiIntermediates:
    """Thermal occupation and reduced squeezing of the lossy squeezed mode."""
    _check_r_tau(r, tau)
    n1 = math.sqrt(tau * (1 - tau) * math.sinh(r) ** 2 + 0.25) - 0.5
    s_red = 0.25 * math.log((1 + math.expm1(2 * r) * tau) / (1 + math.expm1(-2 * r) * tau))
    return LossyQfiIntermediates(n1, s_red)


def h_term(r: float, alpha: float, tau: float) -> float:
    """Coefficient of <d theta>^2 in the lossy QFI (real alpha)."""
    a = _real_alpha(alpha)
    im = qfi_intermediates(r, tau)
    n, s = im.N1bar, im.s_red
    k = 2 * n * (n + 1) + 1
    num = (
        8 * tau * a**2 * k * (math.sinh(s) ** 2 - n)
        + 2 * (2 * a**2) * k * tau * math.sinh(2 * s)
        + (2 * n + 1) ** 3 * math.cosh(4 * s)
        - 2 * k * (2 * n + 1) ** 2 * math.cosh(2 * s)
        + 2 * n
        + 1
    )
    return num / (4 * (4 * n**3 + 6 * n**2 + 4 * n + 1))


def qfi_from_prefactors(r: float, alpha: float, tau: float, pf: Prefactors) -> float:
    a = _real_alpha(alpha)
    im = qfi_intermediates(r, tau)
    diag = 2 * (math.sinh(im.s_red) ** 2 + tau * a**2 + im.N1bar * math.cosh(2 * im.s_red))
    return diag * pf.mean_dtheta_sq + h_term(r, a, tau) * pf.mean_dtheta**2


def qfi_lossless(N_s: float, N_v: float, pf: Prefactors, p0: float = 0.0) -> float:
    """Lossless QFI written in terms of the photon numbers of the two inputs."""
    root = math.sqrt(N_s * (N_s + 1))
    N = N_s + N_v
    bracket = (
        N_v * (math.sqrt(N_s) + math.sqrt(N_s + 1)) ** 2
        + 2 * N_s * (N_s + 1)
        - N
        - 4 * p0**2 * root
    )
    return pf.mean_dtheta**2 * bracket + 2 * pf.mean_dtheta_sq * N


def qfi(cfg: SensorConfig, model: PhaseModel, x: Optional[float] = None) -> float:
    """QFI for x via the chain rule over the M phases, evaluated at x (default x0)."""
    x = cfg.x0 if x is None else x
    return qfi_from_prefactors(cfg.r, cfg.alpha, cfg.tau, prefactors(model, x))


# --- classical Fisher information of the homodyne receiver ----------------


def _homodyne_denominator(sigma, r, tau):
    return 1 - tau + tau * ((1 - sigma) * math.exp(2 * r) + sigma * math.exp(-2 * r))


def cfi_at_sigma(sigma: float, r: float, alpha: float, tau: float, mean_dtheta: float):
    """(I_d, I_V) at x0 as a function of sigma = sin^2(phi_H)."""
    a2 = _real_alpha(alpha) ** 2
    den = _homodyne_denominator(sigma, r, tau)
    g1 = mean_dtheta**2
    i_d = tau * g1 * sigma * a2 / den
    i_v = tau**2 * g1 * 4 * sigma * (1 - sigma) * math.sinh(2 * r) ** 2 / (2 * den**2)
    return i_d, i_v


def cfi_components_from_prefactors(r, alpha, tau, phi_H, pf: Prefactors):
    a2 = _real_alpha(alpha) ** 2
    g1 = pf.mean_dtheta**2
    c2, s2 = math.cos(phi_H) ** 2, math.sin(phi_H) ** 2
    den = 1 - tau + tau * (c2 * math.exp(2 * r) + s2 * math.exp(-2 * r))
    i_d = tau * g1 * s2 * a2 / den
    i_v = tau**2 * g1 * math.sin(2 * phi_H) ** 2 * math.sinh(2 * r) ** 2 / (2 * den**2)
    return i_d, i_v


def cfi_components(cfg: SensorConfig, model: PhaseModel) -> tuple[float, float]:
    """Displacement and variance contributions to the homodyne CFI at x0."""
    _check_r_tau(cfg.r, cfg.tau)
    return cfi_components_from_prefactors(
        cfg.r, cfg.alpha, cfg.tau, cfg.phi_H, prefactors(model, cfg.x0)
    )


def _mode1(r, alpha, tau, g1):
    return tau * g1 * _real_alpha(alpha) ** 2 / (tau * math.exp(-2 * r) + 1 - tau)


def cfi_mode1_from_prefactors(r, alpha, tau, pf: Prefactors) -> float:
    return _mode1(r, alpha, tau, pf.mean_dtheta**2)


def cfi_mode1(cfg: SensorConfig, model: PhaseModel) -> float:
    """CFI with phi_H = pi/2 (displacement-sensitive homodyne)."""
    _check_r_tau(cfg.r, cfg.tau)
    return cfi_mode1_from_prefactors(cfg.r, cfg.alpha, cfg.tau, prefactors(model, cfg.x0))


def mode2_phase(r: float, tau: float) -> float:
    """Homodyne phase maximizing the variance term of the CFI."""
    return 0.5 * math.acos(-tau * math.sinh(2 * r) / (1 + 2 * tau * math.sinh(r) ** 2))


def cfi_mode2_components(r, alpha, tau, pf: Prefactors) -> tuple[float, float]:
    g1 = pf.mean_dtheta**2
    i_d = 0.5 * _mode1(r, alpha, tau, g1)
    i_v = 0.5 * tau**2 * g1 * math.sinh(2 * r) ** 2 / (1 + 4 * tau * (1 - tau) * math.sinh(r) ** 2)
    return i_d, i_v


def cfi_mode2_from_prefactors(r, alpha, tau, pf: Prefactors) -> float:
    return sum(cfi_mode2_components(r, alpha, tau, pf))


def cfi_mode2(cfg: SensorConfig, model: PhaseModel) -> float:
    """CFI at the variance-optimal homodyne phase.

    For r = 0 the phase is pi/4 and only the displacement term survives.
    """
    _check_r_tau(cfg.r, cfg.tau)
    return cfi_mode2_from_prefactors(cfg.r, cfg.alpha, cfg.tau, prefactors(model, cfg.x0))


def is_degenerate(r: float, tau: float) -> bool:
    return r <= R_MIN or tau == 0.0


def sigma_opt_value(r: float, alpha: float, tau: float) -> float:
    if is_degenerate(r, tau):
        raise DegenerateRegimeError(f"sigma_opt undefined for r={r}, tau={tau}")
    a2 = _real_alpha(alpha) ** 2
    sh2 = math.sinh(2 * r)
    g = 0.5 * a2 * (1 / sh2 + tau * math.tanh(r) + tau)
    return (1 + tau * math.expm1(2 * r)) * (tau * sh2 + g) / (
        2 * tau * sh2 * (1 - tau + tau * math.cosh(2 * r) + g)
    )


def sigma_opt(cfg: SensorConfig) -> float:
    """Optimal sin^2(phi_H); values >= 1 mean phi_H = pi/2 is optimal."""
    return sigma_opt_value(cfg.r, cfg.alpha, cfg.tau)


def cfi_mode3_components(r, alpha, tau, pf: Prefactors) -> tuple[float, float]:
    """Displacement and variance terms of the CFI at sigma = sigma_opt (any sigma_opt)."""
    if is_degenerate(r, tau):
        raise DegenerateRegimeError(f"mode 3 undefined for r={r}, tau={tau}")
    a2 = _real_alpha(alpha) ** 2
    g1 = pf.mean_dtheta**2
    sh2_sq = math.sinh(2 * r) ** 2
    plus = 1 - (1 - math.exp(2 * r)) * tau
    minus = 1 - (1 - math.exp(-2 * r)) * tau
    i_d = g1 / (4 * sh2_sq * minus) * (2 * a2 * tau * sh2_sq + a2**2 * plus)
    i_v = g1 / (8 * (1 + 4 * tau * (1 - tau) * math.sinh(r) ** 2)) * (
        4 * tau**2 * sh2_sq - a2**2 * plus**2 / sh2_sq
    )
    return i_d, i_v


def cfi_mode3_from_prefactors(r, alpha, tau, pf: Prefactors) -> float:
    if is_degenerate(r, tau):
        return cfi_mode1_from_prefactors(r, alpha, tau, pf)
    if sigma_opt_value(r, alpha, tau) < 1:
        return sum(cfi_mode3_components(r, alpha, tau, pf))
    return cfi_mode1_from_prefactors(r, alpha, tau, pf)


def cfi_mode3(cfg: SensorConfig, model: PhaseModel) -> float:
    """CFI at the fully optimized homodyne phase."""
    _check_r_tau(cfg.r, cfg.tau)
    return cfi_mode3_from_prefactors(cfg.r, cfg.alpha, cfg.tau, prefactors(model, cfg.x0))


def cfi_numeric(cfg: SensorConfig, model: PhaseModel, x: Optional[float] = None) -> float:
    """Homodyne CFI at arbitrary x from central differences of the output moments."""
    x = cfg.x0 if x is None else x
    scale = np.max(np.abs(model.derivatives(x)))
    if scale == 0.0:
        return 0.0
    h = 1e-5 / scale  # phase increments of ~1e-5 rad
    m_p, v_p = output_moments(cfg, model, x + h)
    m_m, v_m = output_moments(cfg, model, x - h)
    _, var = output_moments(cfg, model, x)
    if var <= 0:
        raise NumericalError(f"non-positive homodyne variance {var}")
    dm = (m_p - m_m) / (2 * h)
    dv = (v_p - v_m) / (2 * h)
    return dm**2 / var + 0.5 * (dv / var) ** 2


def cfi_at(cfg: SensorConfig, model: PhaseModel, x: Optional[float] = None) -> float:
    """Homodyne CFI at arbitrary x from analytic derivatives of the output moments."""
    x = cfg.x0 if x is None else x
    _, var, dm, dv = output_moments_with_derivatives(cfg, model, x)
    return dm**2 / var + 0.5 * (dv / var) ** 2


def fisher_report(cfg: SensorConfig, model: PhaseModel) -> FisherReport:
    _check_r_tau(cfg.r, cfg.tau)
    pf = prefactors(model, cfg.x0)
    r, a, tau = cfg.r, _real_alpha(cfg.alpha), cfg.tau
    im = qfi_intermediates(r, tau)
    i_d, i_v = cfi_components_from_prefactors(r, a, tau, cfg.phi_H, pf)
    degenerate = is_degenerate(r, tau)
    return FisherReport(
        qfi=qfi_from_prefactors(r, a, tau, pf),
        cfi_d=i_d,
        cfi_v=i_v,
        cfi_mode1=cfi_mode1_from_prefactors(r, a, tau, pf),
        cfi_mode2=cfi_mode2_from_prefactors(r, a, tau, pf),
        cfi_mode3=cfi_mode3_from_prefactors(r, a, tau, pf),
        sigma_opt=math.nan if degenerate else sigma_opt_value(r, a, tau),
        intermediates=LossyQfiIntermediates(im.N1bar, im.s_red, h_term(r, a, tau)),
        prefactors=pf,
        degenerate=degenerate,
    )


# --- energy allocation ----------------------------------------------------

OBJECTIVES = ("qfi", "cfi_mode3")


def allocation_objective(eta: float, N: float, tau: float, pf: Prefactors, objective: str) -> float:
    n_s = eta * N
    r = math.asinh(math.sqrt(n_s))
    alpha = math.sqrt(max(N - n_s, 0.0))
    if objective == "qfi":
        return qfi_from_prefactors(r, alpha, tau, pf)
    if objective == "cfi_mode3":
        return cfi_mode3_from_prefactors(r, alpha, tau, pf)
    raise InvalidArgumentError(f"objective must be one of {OBJECTIVES}, got {objective!r}")


def optimize_energy_allocation(
    N: float,
    tau: float,
    model: PhaseModel | Prefactors,
    objective: str = "cfi_mode3",
    x0: float = 0.0,
    grid_points: int = 101,
) -> tuple[float, float]:
    """Fraction eta of the photon budget N given to the squeezed vacuum that
    maximizes ``objective``; returns (eta_star, objective value).

    A uniform grid locates the best cell, then a bounded scalar search
    refines eta to 1e-6.  Ties go to the smallest eta.
    """
    if not N > 0:
        raise InvalidArgumentError(f"N must be > 0, got {N}")
    _check_r_tau(0.0, tau)
    pf = model if isinstance(model, Prefactors) else prefactors(model, x0)

    def f(eta):
        return allocation_objective(eta, N, tau, pf, objective)

    grid = np.linspace(0.0, 1.0, grid_points)
    values = np.array([f(e) for e in grid])
    k = int(np.argmax(values))  # first maximum -> smallest eta on ties
    best_eta, best_val = float(grid[k]), float(values[k])
    if np.all(values == values[0]):
        return best_eta, best_val
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]
    res = minimize_scalar(lambda e: -f(e), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6})
    if res.success and -res.fun > best_val:
        best_eta, best_val = float(res.x), float(-res.fun)
    return best_eta, best_val
