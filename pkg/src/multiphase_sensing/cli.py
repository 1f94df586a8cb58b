"""Command-line front end.

    multiphase-sensing {report,sweep,oracle,montecarlo} --config cfg.json
        [--out PATH] [--format csv|json] [--seed INT] [--set key=value ...]

The config file is one flat JSON object; ``--set`` and the dedicated flags
override file values.  Exit codes: 0 success, 2 bad configuration,
3 numerical or oracle failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import fisher, oracle
from .applications import (
    BeamDisplacementModel,
    GradiometryModel,
    RfArrayModel,
    beam_displacement_phase_model,
    gradiometry_phase_model,
    rf_phase_model,
)
from .circuit import PhaseModel, SensorConfig
from .errors import (
    DegenerateRegimeError,
    EstimationError,
    InvalidArgumentError,
    NumericalError,
    TruncationError,
)

log = logging.getLogger(__name__)

COMMANDS = ("report", "sweep", "oracle", "montecarlo")
MODELS = ("equal-phases", "rf", "beam", "gradiometry", "custom-table")
AXES = ("M", "tau", "eta", "N", "phiH")
FORMATS = ("csv", "json")

SWEEP_COLUMNS = [
    "axis_value", "M", "tau", "N", "eta_star", "r", "alpha",
    "qfi", "cfi_mode1", "cfi_mode2", "cfi_mode3", "sigma_opt",
    "qfi_classical", "cfi_classical", "cfi_phiH",
]

DEFAULTS: dict[str, Any] = {
    "M": 1,
    "r": 0.0,
    "alpha": 0.0,
    "tau": 1.0,
    "phi_H": math.pi / 2,
    "x0": 0.0,
    "model": "equal-phases",
    "objective": "cfi_mode3",
    "format": "json",
    "seed": 0,
    "cutoff": 30,
    "n_samples": 100_000,
    "n_repeats": 20_000,
    "points": 11,
    # rf
    "A": 0.1,
    "Omega_rf": 3e4,
    "b": 10.0,
    "t": 0.0,
}


class ConfigError(Exception):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("command", f"must be one of {COMMANDS}")
        p = {**DEFAULTS, **self.params}
        if p["model"] not in MODELS:
            raise ConfigError("model", f"must be one of {MODELS}, got {p['model']!r}")
        if p["format"] not in FORMATS:
            raise ConfigError("format", f"must be one of {FORMATS}, got {p['format']!r}")
        if self.command == "sweep":
            if p.get("axis") not in AXES:
                raise ConfigError("axis", f"must be one of {AXES}, got {p.get('axis')!r}")
            if "values" not in p:
                for key in ("start", "stop"):
                    if key not in p:
                        raise ConfigError(key, "required for a sweep without 'values'")
                if int(p["points"]) < 1:
                    raise ConfigError("points", "must be >= 1")
        self.params = p

    def get(self, key, default=None):
        return self.params.get(key, default)

    def number(self, key) -> float:
        try:
            return float(self.params[key])
        except KeyError:
            raise ConfigError(key, "missing") from None
        except (TypeError, ValueError):
            raise ConfigError(key, f"not a number: {self.params[key]!r}") from None

    def integer(self, key) -> int:
        value = self.number(key)
        if value != int(value):
            raise ConfigError(key, f"must be an integer, got {self.params[key]!r}")
        return int(value)

    def axis_values(self) -> list[float]:
        if "values" in self.params:
            vals = [float(v) for v in self.params["values"]]
        else:
            vals = np.linspace(self.number("start"), self.number("stop"),
                               self.integer("points")).tolist()
        if not vals:
            raise ConfigError("values", "sweep range is empty")
        if self.params["axis"] == "M":
            vals = [float(v) for v in sorted({int(round(v)) for v in vals})]
        return sorted(vals)


# --- config -> library objects ---------------------------------------------


def build_model(rc: RunConfig, M: int) -> PhaseModel:
    kind = rc.get("model")
    if kind == "equal-phases":
        return PhaseModel.equal(M)
    if kind == "rf":
        return rf_phase_model(RfArrayModel(rc.number("A"), rc.number("Omega_rf"),
                                           rc.number("b"), M, rc.number("t")))
    if kind == "beam":
        lam = rc.get("lambdas")
        if not isinstance(lam, list) or len(lam) != M:
            raise ConfigError("lambdas", f"need a list of {M} crosstalk coefficients")
        return beam_displacement_phase_model(BeamDisplacementModel(tuple(lam)))
    if kind == "gradiometry":
        keys = ("rho_density", "c_p", "y0", "W", "beta", "Q")
        return gradiometry_phase_model(GradiometryModel(*(rc.number(k) for k in keys), M=M))
    table = rc.get("dtheta")
    if not isinstance(table, list) or len(table) != M:
        raise ConfigError("dtheta", f"need a list of {M} phase slopes")
    return PhaseModel.linear(table)


def _parse_alpha(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(value)
    except (TypeError, ValueError):
        raise ConfigError("alpha", f"not a number: {value!r}") from None


def total_energy(rc: RunConfig, M: int) -> float | None:
    if "N" in rc.params:
        return rc.number("N")
    if "N_per_mode" in rc.params:
        return M * rc.number("N_per_mode")
    return None


def resolve_point(rc: RunConfig, M: int, tau: float, N: float | None, eta, phi_H: float,
                  model: PhaseModel) -> tuple[SensorConfig, float | None]:
    """Sensor configuration for one evaluation point; returns (cfg, eta used)."""
    x0 = rc.number("x0")
    if N is None:
        cfg = SensorConfig(M, rc.number("r"), _parse_alpha(rc.get("alpha")), tau, phi_H, x0)
        return cfg, None
    if N <= 0:
        raise ConfigError("N", f"must be > 0, got {N}")
    if eta is None or eta == "opt":
        objective = rc.get("objective")
        if objective not in fisher.OBJECTIVES:
            raise ConfigError("objective", f"must be one of {fisher.OBJECTIVES}")
        eta, _ = fisher.optimize_energy_allocation(N, tau, model, objective, x0=x0)
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ConfigError("eta", f"must lie in [0, 1], got {eta}")
    return SensorConfig.from_energy(M, N, eta, tau=tau, phi_H=phi_H, x0=x0), eta


def _finite_or_none(v: float):
    return None if isinstance(v, float) and math.isnan(v) else v


# --- commands ---------------------------------------------------------------


def run_report(rc: RunConfig) -> list[dict]:
    M = rc.integer("M")
    model = build_model(rc, M)
    cfg, eta = resolve_point(rc, M, rc.number("tau"), total_energy(rc, M), rc.get("eta"),
                             rc.number("phi_H"), model)
    rep = fisher.fisher_report(cfg, model)
    return [{
        "model": rc.get("model"),
        "M": cfg.M,
        "r": cfg.r,
        "alpha": complex(cfg.alpha).real,
        "tau": cfg.tau,
        "phi_H": cfg.phi_H,
        "x0": cfg.x0,
        "N": cfg.N,
        "eta_star": eta,
        "qfi": rep.qfi,
        "cfi_d": rep.cfi_d,
        "cfi_v": rep.cfi_v,
        "cfi": rep.cfi,
        "cfi_mode1": rep.cfi_mode1,
        "cfi_mode2": rep.cfi_mode2,
        "cfi_mode3": rep.cfi_mode3,
        "sigma_opt": _finite_or_none(rep.sigma_opt),
        "degenerate": rep.degenerate,
        "N1bar": rep.intermediates.N1bar,
        "s_red": rep.intermediates.s_red,
        "h": rep.intermediates.h,
        "mean_dtheta": rep.prefactors.mean_dtheta,
        "mean_dtheta_sq": rep.prefactors.mean_dtheta_sq,
    }]


def _sweep_point(rc: RunConfig, axis: str, value: float) -> dict:
    M = int(value) if axis == "M" else rc.integer("M")
    tau = value if axis == "tau" else rc.number("tau")
    phi_H = value if axis == "phiH" else rc.number("phi_H")
    model = build_model(rc, M)
    N = value if axis == "N" else total_energy(rc, M)
    eta = value if axis == "eta" else rc.get("eta")
    if axis == "eta" and N is None:
        raise ConfigError("N", "an eta sweep needs a total photon number N or N_per_mode")
    cfg, eta_used = resolve_point(rc, M, tau, N, eta, phi_H, model)
    pf = fisher.prefactors(model, cfg.x0)
    r, a = cfg.r, complex(cfg.alpha).real
    sigma = math.nan if fisher.is_degenerate(r, tau) else fisher.sigma_opt_value(r, a, tau)
    a_cl = math.sqrt(cfg.N)
    return {
        "axis_value": value,
        "M": M,
        "tau": tau,
        "N": cfg.N,
        "eta_star": eta_used,
        "r": r,
        "alpha": a,
        "qfi": fisher.qfi_from_prefactors(r, a, tau, pf),
        "cfi_mode1": fisher.cfi_mode1_from_prefactors(r, a, tau, pf),
        "cfi_mode2": fisher.cfi_mode2_from_prefactors(r, a, tau, pf),
        "cfi_mode3": fisher.cfi_mode3_from_prefactors(r, a, tau, pf),
        "sigma_opt": _finite_or_none(sigma),
        "qfi_classical": fisher.qfi_from_prefactors(0.0, a_cl, tau, pf),
        "cfi_classical": fisher.cfi_mode3_from_prefactors(0.0, a_cl, tau, pf),
        "cfi_phiH": sum(fisher.cfi_components_from_prefactors(r, a, tau, phi_H, pf)),
    }


def run_sweep(rc: RunConfig) -> list[dict]:
    axis = rc.get("axis")
    return [_sweep_point(rc, axis, v) for v in rc.axis_values()]


class OracleFailure(Exception):
    def __init__(self, record):
        super().__init__("oracle comparison failed")
        self.record = record


def _comparison(closed, observed, threshold, **extra) -> dict:
    rel = abs(observed - closed) / abs(closed)
    return {"closed_form": closed, "oracle_value": observed, "relative_error": rel,
            "threshold": threshold, "pass": bool(rel < threshold), **extra}


def run_oracle(rc: RunConfig) -> list[dict]:
    M = rc.integer("M")
    if M != 1:
        raise ConfigError("M", "the Fock oracle supports M = 1 only")
    model = build_model(rc, M)
    cfg, _ = resolve_point(rc, M, rc.number("tau"), total_energy(rc, M), rc.get("eta"),
                           rc.number("phi_H"), model)
    closed = fisher.qfi(cfg, model)
    if closed == 0.0:
        raise ConfigError("r/alpha", "zero-information configuration (no probe energy); "
                                     "relative error is undefined")
    cutoff = rc.integer("cutoff")
    state = oracle.fock_final_state(cfg, model, cfg.x0, cutoff)
    observed = oracle.sld_qfi(state, oracle.fock_state_derivative(state, model, cfg.x0))
    rec = _comparison(closed, observed, float(rc.get("threshold", 1e-3)),
                      cutoff=cutoff, truncation_error=state.trunc_error,
                      r=cfg.r, alpha=complex(cfg.alpha).real, tau=cfg.tau)
    if not rec["pass"]:
        raise OracleFailure(rec)
    return [rec]


def run_montecarlo(rc: RunConfig) -> list[dict]:
    M = rc.integer("M")
    model = build_model(rc, M)
    cfg, _ = resolve_point(rc, M, rc.number("tau"), total_energy(rc, M), rc.get("eta"),
                           rc.number("phi_H"), model)
    x_true = float(rc.get("x_true", cfg.x0))
    n = rc.integer("n_samples")
    est = oracle.mc_homodyne(cfg, model, x_true, n_samples=n, seed=rc.integer("seed"),
                             n_repeats=rc.integer("n_repeats"))
    closed = fisher.cfi_at(cfg, model, x_true)
    if closed == 0.0:
        raise EstimationError("zero Fisher information; the estimate is ill-posed")
    rec = _comparison(closed, est.empirical_fisher, float(rc.get("threshold", 0.03)),
                      empirical_mse=est.empirical_mse, crb=1.0 / (n * closed),
                      crb_respected=bool(est.empirical_mse * n * closed >= 0.95),
                      n_samples=n, n_repeats=est.n_repeats, seed=est.seed, x_true=x_true)
    if not rec["pass"]:
        raise OracleFailure(rec)
    return [rec]


RUNNERS = {"report": run_report, "sweep": run_sweep, "oracle": run_oracle,
           "montecarlo": run_montecarlo}


# --- output -----------------------------------------------------------------


def render(records: list[dict], fmt: str, columns: list[str] | None = None) -> str:
    if fmt == "json":
        payload = records[0] if len(records) == 1 and columns is None else records
        return json.dumps(payload, indent=2) + "\n"
    columns = columns or list(records[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow(["" if rec[c] is None else repr(rec[c]) if isinstance(rec[c], float)
                         else rec[c] for c in columns])
    return buf.getvalue()


def _parse_set(items: list[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(item, "--set expects key=value")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def load_config(command: str, path: str | None, args) -> RunConfig:
    params: dict = {}
    if path:
        try:
            with open(path) as fh:
                params = json.load(fh)
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON: {exc}") from None
        if not isinstance(params, dict):
            raise ConfigError("--config", "top level must be a JSON object")
    params.update(_parse_set(args.set or []))
    for key in ("format", "seed", "out"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    return RunConfig(command, params)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiphase-sensing", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--seed", type=int)
        p.add_argument("--set", action="append", metavar="KEY=VALUE", default=[])
    return parser


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        rc = load_config(args.command, args.config, args)
        records = RUNNERS[args.command](rc)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except (InvalidArgumentError, TypeError) as exc:
        log.error("invalid configuration: %s", exc)
        return 2
    except OracleFailure as exc:
        _emit(render([exc.record], rc.get("format")), rc.get("out"))
        log.error("oracle comparison failed: relative error %.3e >= %.3e",
                  exc.record["relative_error"], exc.record["threshold"])
        return 3
    except (TruncationError, EstimationError, NumericalError, DegenerateRegimeError) as exc:
        log.error("numerical failure: %s", exc)
        return 3
    columns = SWEEP_COLUMNS if args.command == "sweep" else None
    _emit(render(records, rc.get("format"), columns), rc.get("out"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
