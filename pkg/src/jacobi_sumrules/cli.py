"""Command-line front end: config ingestion, scan orchestration, reports.

The configuration format is a flat, diff-friendly key-value text document
with one nesting level for the ``[matrix]`` and ``[weight]`` blocks:

    command = sumrule
    horizons = 128, 256, 512
    tol_quad = 1e-10

    [matrix]
    b = 1.5, -0.25
    a = 1.0, 0.9

Every field has a default, so parsing is total; ``emit_config`` writes the
normalized document back out and is idempotent after one pass.  Reports are
a JSON summary (scalars, flags, config echo, version) plus CSV trend tables
with numeric fields formatted to 17 significant digits (round-half-even).
Identical configs produce byte-identical outputs except for the labeled
timestamp field.
"""

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .coefficients import CoefficientFamily, JacobiCoefficients
from .errors import (ConfigError, DomainError, HypothesisViolationError,
                     ToolkitError)
from .measure import DensityEvaluator, free_density, z_w_result
from .spectrum import eigenvalues_outside, f_w, lieb_thirring_sum
from .sumrules import (DiagnoseThresholds, convergence_study, diagnose,
                       full_rule, step_rule_terms)
from .summation import exact_sum
from .weights import TrigWeight, named_weight

COMMANDS = ("spectrum", "measure", "sumrule", "stepwise", "diagnose",
            "convergence")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTATION = 3
EXIT_HYPOTHESIS = 4

_DEFAULT_HORIZONS = (64, 128, 256, 512, 1024)


@dataclass(frozen=True)
class MatrixSpec:
    """Either explicit coefficient arrays or a named decay family."""

    kind: str = "explicit"           # explicit | power | oscillatory
    a: tuple = ()
    b: tuple = ()
    alpha_a: float = 0.0
    gamma_a: float = 1.0
    alpha_b: float = 0.0
    gamma_b: float = 1.0
    mu: float = 1.0

    def family(self):
        if self.kind == "explicit":
            return CoefficientFamily.explicit(
                JacobiCoefficients(np.array(self.a), np.array(self.b)))
        return CoefficientFamily(
            kind=self.kind, alpha_a=self.alpha_a, gamma_a=self.gamma_a,
            alpha_b=self.alpha_b, gamma_b=self.gamma_b,
            mu=self.mu if self.kind == "oscillatory" else None)

    def coefficients(self, horizon):
        return self.family().materialize(
            self.kind == "explicit" and max(len(self.a), len(self.b)) or horizon)


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "sumrule"
    matrix: MatrixSpec = field(default_factory=MatrixSpec)
    weight_name: str = "eq211"       # empty string when explicit coefficients
    weight_coefficients: tuple = ()
    horizons: tuple = _DEFAULT_HORIZONS
    tol_quad: float = 1e-10
    tol_eig: float = 1e-12
    variant: str = "i"
    steps: tuple = ()                # stepwise depths; () derives a default
    grid_points: int = 201
    grid_lo: float = -1.9
    grid_hi: float = 1.9
    ratio_threshold: float = 1e3
    slope_threshold: float = 0.05

    def weight(self):
        if self.weight_coefficients:
            return TrigWeight(self.weight_coefficients)
        return named_weight(self.weight_name)


def _parse_scalar(text):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_value(text):
    if "," in text:
        return tuple(_parse_scalar(p) for p in text.split(",") if p.strip())
    return _parse_scalar(text)


_TOP_FIELDS = {"command", "weight", "horizons", "tol_quad", "tol_eig",
               "variant", "steps", "grid_points", "grid_lo", "grid_hi",
               "ratio_threshold", "slope_threshold"}
_MATRIX_FIELDS = {"kind", "a", "b", "alpha_a", "gamma_a", "alpha_b",
                  "gamma_b", "mu"}
_WEIGHT_FIELDS = {"name", "coefficients"}


def parse_config(text):
    """Parse a configuration document; raises ConfigError with line context."""
    section = None
    top, matrix, weight = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("matrix", "weight"):
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        parsed = _parse_value(value)
        if section is None:
            if key not in _TOP_FIELDS:
                raise ConfigError("unknown key", line=lineno, field=key)
            top[key] = parsed
        elif section == "matrix":
            if key not in _MATRIX_FIELDS:
                raise ConfigError("unknown matrix key", line=lineno, field=key)
            matrix[key] = parsed
        else:
            if key not in _WEIGHT_FIELDS:
                raise ConfigError("unknown weight key", line=lineno, field=key)
            weight[key] = parsed
    return _build_config(top, matrix, weight)


def _as_tuple(v):
    return tuple(v) if isinstance(v, tuple) else (v,)


def _build_config(top, matrix, weight):
    cfg = ExperimentConfig()
    try:
        if "kind" in matrix and matrix["kind"] != "explicit":
            spec = MatrixSpec(
                kind=str(matrix["kind"]),
                alpha_a=float(matrix.get("alpha_a", 0.0)),
                gamma_a=float(matrix.get("gamma_a", 1.0)),
                alpha_b=float(matrix.get("alpha_b", 0.0)),
                gamma_b=float(matrix.get("gamma_b", 1.0)),
                mu=float(matrix.get("mu", 1.0)))
            if spec.kind not in ("power", "oscillatory"):
                raise ConfigError("matrix kind must be explicit, power or "
                                  "oscillatory", field="kind")
        else:
            b = tuple(float(x) for x in _as_tuple(matrix.get("b", ())))
            a = tuple(float(x) for x in _as_tuple(matrix.get("a", ())))
            spec = MatrixSpec(kind="explicit", a=a, b=b)
        kwargs = {"matrix": spec}
        if "command" in top:
            if top["command"] not in COMMANDS:
                raise ConfigError(f"command must be one of {COMMANDS}",
                                  field="command")
            kwargs["command"] = top["command"]
        weight_value = weight.get("coefficients", top.get("weight"))
        if isinstance(weight_value, tuple):
            kwargs["weight_coefficients"] = tuple(float(x) for x in weight_value)
            kwargs["weight_name"] = ""
        elif isinstance(weight_value, str):
            kwargs["weight_name"] = weight_value
        elif "name" in weight:
            kwargs["weight_name"] = str(weight["name"])
        if "horizons" in top:
            kwargs["horizons"] = tuple(int(h) for h in _as_tuple(top["horizons"]))
        if "steps" in top:
            kwargs["steps"] = tuple(int(s) for s in _as_tuple(top["steps"]))
        for key in ("tol_quad", "tol_eig", "grid_lo", "grid_hi",
                    "ratio_threshold", "slope_threshold"):
            if key in top:
                kwargs[key] = float(top[key])
        if "grid_points" in top:
            kwargs["grid_points"] = int(top["grid_points"])
        if "variant" in top:
            kwargs["variant"] = str(top["variant"])
        cfg = replace(cfg, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    _validate_config(cfg)
    return cfg


def _validate_config(cfg):
    if cfg.tol_quad <= 0 or cfg.tol_eig <= 0:
        raise ConfigError("tolerances must be positive")
    if any(h < 1 for h in cfg.horizons):
        raise ConfigError("horizons must be positive", field="horizons")
    if cfg.variant not in ("i", "ii_plus", "ii_minus", "iii"):
        raise ConfigError("variant must be i, ii_plus, ii_minus or iii",
                          field="variant")
    cfg.weight()   # force weight validation now
    cfg.matrix.family()


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def emit_config(cfg):
    """Normalized config document; emit(parse(emit(c))) == emit(c)."""
    lines = [f"command = {cfg.command}"]
    if cfg.weight_coefficients:
        lines.append("weight = " + ", ".join(_fmt(float(c))
                                             for c in cfg.weight_coefficients))
    else:
        lines.append(f"weight = {cfg.weight_name}")
    lines.append("horizons = " + ", ".join(str(h) for h in cfg.horizons))
    if cfg.steps:
        lines.append("steps = " + ", ".join(str(s) for s in cfg.steps))
    lines.append(f"tol_quad = {_fmt(cfg.tol_quad)}")
    lines.append(f"tol_eig = {_fmt(cfg.tol_eig)}")
    lines.append(f"variant = {cfg.variant}")
    lines.append(f"grid_points = {cfg.grid_points}")
    lines.append(f"grid_lo = {_fmt(cfg.grid_lo)}")
    lines.append(f"grid_hi = {_fmt(cfg.grid_hi)}")
    lines.append(f"ratio_threshold = {_fmt(cfg.ratio_threshold)}")
    lines.append(f"slope_threshold = {_fmt(cfg.slope_threshold)}")
    lines.append("")
    lines.append("[matrix]")
    m = cfg.matrix
    lines.append(f"kind = {m.kind}")
    if m.kind == "explicit":
        lines.append("a = " + ", ".join(_fmt(float(x)) for x in m.a))
        lines.append("b = " + ", ".join(_fmt(float(x)) for x in m.b))
    else:
        for key in ("alpha_a", "gamma_a", "alpha_b", "gamma_b", "mu"):
            lines.append(f"{key} = {_fmt(getattr(m, key))}")
    return "\n".join(lines) + "\n"


def _config_dict(cfg):
    m = cfg.matrix
    matrix = {"kind": m.kind}
    if m.kind == "explicit":
        matrix.update(a=list(m.a), b=list(m.b))
    else:
        matrix.update(alpha_a=m.alpha_a, gamma_a=m.gamma_a,
                      alpha_b=m.alpha_b, gamma_b=m.gamma_b, mu=m.mu)
    return {
        "command": cfg.command,
        "weight": (list(cfg.weight_coefficients) if cfg.weight_coefficients
                   else cfg.weight_name),
        "horizons": list(cfg.horizons),
        "steps": list(cfg.steps),
        "tol_quad": cfg.tol_quad,
        "tol_eig": cfg.tol_eig,
        "variant": cfg.variant,
        "grid_points": cfg.grid_points,
        "grid_lo": cfg.grid_lo,
        "grid_hi": cfg.grid_hi,
        "ratio_threshold": cfg.ratio_threshold,
        "slope_threshold": cfg.slope_threshold,
        "matrix": matrix,
    }


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def emit_density_profile(coeffs, grid):
    """Rows (x, mu'(x), ln(mu'/mu_0')) over a strictly interior grid."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) >= 2.0):
        raise DomainError("density grid must stay strictly inside (-2, 2)")
    evaluator = DensityEvaluator(coeffs)
    mu = np.atleast_1d(evaluator(grid))
    mu0 = np.atleast_1d(free_density(grid))
    return [(float(x), float(m), float(math.log(m / m0)))
            for x, m, m0 in zip(np.atleast_1d(grid), mu, mu0)]


def _spectrum_results(cfg, out):
    coeffs = cfg.matrix.coefficients(max(cfg.horizons))
    spec = eigenvalues_outside(coeffs)
    rows = []
    for side, eigs in (("-", spec.below), ("+", spec.above)):
        for rank, e in enumerate(eigs, start=1):
            rows.append((side, rank, e.energy, e.beta, e.residual,
                         int(e.near_edge)))
    _write_csv(out / "eigenvalues.csv",
               ["side", "rank", "energy", "beta", "residual", "near_edge"],
               rows)
    w = cfg.weight()
    return {
        "count_below": len(spec.below),
        "count_above": len(spec.above),
        "energies_below": [e.energy for e in spec.below],
        "energies_above": [e.energy for e in spec.above],
        "betas_below": [e.beta for e in spec.below],
        "betas_above": [e.beta for e in spec.above],
        "lieb_thirring_5_2": lieb_thirring_sum(spec, 2.5),
        "lieb_thirring_1_2": lieb_thirring_sum(spec, 0.5),
        "sum_f_w": exact_sum(f_w(w, e.beta) for e in spec.below + spec.above),
        "certification": spec.certification,
        "resonance": spec.any_near_edge,
    }


def _measure_results(cfg, out):
    coeffs = cfg.matrix.coefficients(max(cfg.horizons))
    grid = np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    rows = emit_density_profile(coeffs, grid)
    _write_csv(out / "density_profile.csv",
               ["x", "mu_prime", "ln_ratio_to_free"], rows)
    zw = z_w_result(coeffs, cfg.weight(), cfg.tol_quad)
    return {
        "z_w": zw.value,
        "z_w_error_estimate": zw.error_estimate,
        "grid_points": cfg.grid_points,
        "density_min": min(r[1] for r in rows),
        "density_max": max(r[1] for r in rows),
    }


def _sumrule_results(cfg, out):
    coeffs = cfg.matrix.coefficients(max(cfg.horizons))
    report = full_rule(coeffs, cfg.weight(), cfg.variant,
                       tol_quad=cfg.tol_quad)
    _write_csv(out / "sumrule.csv",
               ["variant", "z_w", "trace_pw", "fw_plus", "fw_minus",
                "residual"],
               [(report.variant, report.z_w, report.trace_pw, report.fw_plus,
                 report.fw_minus, report.residual())])
    return {
        "variant": report.variant,
        "z_w": report.z_w,
        "z_w_error_estimate": report.z_w_error,
        "trace_pw": report.trace_pw,
        "fw_plus": report.fw_plus,
        "fw_minus": report.fw_minus,
        "residual": report.residual(),
        "flags": {k: v for k, v in report.flags.items()
                  if k in ("resonance", "quadrature_error_estimate",
                           "eigenvalue_count_above", "eigenvalue_count_below")},
    }


def _stepwise_results(cfg, out):
    coeffs = cfg.matrix.coefficients(max(cfg.horizons))
    n_sup = coeffs.support
    steps = cfg.steps or tuple(sorted({1, 2, max(n_sup, 1), n_sup + 3}))
    zf = z_w_result(coeffs, cfg.weight(), cfg.tol_quad)
    spec_full = eigenvalues_outside(coeffs)
    rows = []
    results = []
    for n in steps:
        from .coefficients import strip as _strip
        spec_strip = eigenvalues_outside(_strip(coeffs, n))
        terms = step_rule_terms(coeffs, cfg.weight(), n,
                                tol_quad=cfg.tol_quad,
                                spectra=(spec_full, spec_strip), z_full=zf)
        rows.append((n, terms.z_full, terms.xi_sum, terms.x_sum,
                     terms.z_stripped, terms.residual))
        results.append({"n": n, "xi_sum": terms.xi_sum, "x_sum": terms.x_sum,
                        "z_stripped": terms.z_stripped,
                        "residual": terms.residual})
    _write_csv(out / "stepwise.csv",
               ["n", "z_w", "xi_sum", "x_sum", "z_w_stripped", "residual"],
               rows)
    return {"z_w": zf.value, "steps": results,
            "max_abs_residual": max(abs(r["residual"]) for r in results)}


def _diagnose_results(cfg, out):
    thresholds = DiagnoseThresholds(ratio=cfg.ratio_threshold,
                                    slope=cfg.slope_threshold)
    verdict = diagnose(cfg.matrix.family(), cfg.weight(), cfg.horizons,
                       thresholds=thresholds, tol_quad=max(cfg.tol_quad, 1e-8))
    series = verdict.evidence["series"]
    corr = verdict.evidence["corroboration"]
    names = sorted(series)
    header = ["horizon"] + names + ["sum_fw", "z_w", "trace_pw",
                                    "identity_residual"]
    rows = []
    for i, h in enumerate(corr["horizon"]):
        row = [h] + [series[k][i] for k in names]
        row += [corr["sum_fw"][i], corr["z_w"][i], corr["trace_pw"][i],
                corr["identity_residual"][i]]
        rows.append(tuple(row))
    _write_csv(out / "evidence.csv", header, rows)
    return {
        "verdict": verdict.verdict,
        "hypotheses": [{"name": h.name, "fired": h.fired,
                        "conclusion": h.conclusion, "detail": h.detail}
                       for h in verdict.hypotheses],
        "trends": {k: {"kind": t.kind, "slope": t.slope, "ratio": t.ratio}
                   for k, t in verdict.trends.items()},
        "flags": {"t9_eigenvalue": verdict.flags["t9_eigenvalue"],
                  "resonance": verdict.flags["resonance"],
                  "both_conclusions": verdict.flags["both_conclusions"]},
    }


def _convergence_results(cfg, out):
    study = convergence_study(cfg.matrix.family(), cfg.weight(), cfg.horizons,
                              tol_quad=max(cfg.tol_quad, 1e-8))
    header = list(study.rows[0].keys())
    _write_csv(out / "convergence.csv", header,
               [tuple(r[k] for k in header) for r in study.rows])
    return {"reference": study.reference, "rows": study.rows}


_RUNNERS = {
    "spectrum": _spectrum_results,
    "measure": _measure_results,
    "sumrule": _sumrule_results,
    "stepwise": _stepwise_results,
    "diagnose": _diagnose_results,
    "convergence": _convergence_results,
}


def run(cfg, out_dir):
    """Execute the configured command; writes report.json plus CSV tables.

    Returns the report dictionary.  Computation errors are embedded in the
    JSON with machine-readable codes and re-raised for exit-code handling.
    """
    from pathlib import Path
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "toolkit": {"name": "jacobi-sumrules", "version": __version__},
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "command": cfg.command,
        "config": _config_dict(cfg),
        "results": None,
        "error": None,
    }
    try:
        report["results"] = _RUNNERS[cfg.command](cfg, out)
    except ToolkitError as exc:
        report["error"] = {"code": type(exc).__name__, "message": str(exc)}
        _write_report(out, report)
        raise
    _write_report(out, report)
    return report


def _write_report(out, report):
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, DiagnoseThresholds):
        return {"ratio": obj.ratio, "slope": obj.slope}
    return str(obj)


def _apply_overrides(cfg, args):
    kwargs = {}
    if args.command:
        kwargs["command"] = args.command
    if args.tol_quad is not None:
        kwargs["tol_quad"] = args.tol_quad
    if args.tol_eig is not None:
        kwargs["tol_eig"] = args.tol_eig
    if args.horizons:
        try:
            kwargs["horizons"] = tuple(int(h) for h in args.horizons.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --horizons: {exc}") from exc
    cfg = replace(cfg, **kwargs) if kwargs else cfg
    _validate_config(cfg)
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="jacobi-sumrules",
        description="Sum rules and divergence diagnostics for eventually-free "
                    "Jacobi matrices")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="command to run (defaults to the config's)")
    parser.add_argument("--config", help="path to a config document")
    parser.add_argument("--out", default="reports", help="output directory")
    parser.add_argument("--tol-quad", type=float, dest="tol_quad")
    parser.add_argument("--tol-eig", type=float, dest="tol_eig")
    parser.add_argument("--horizons", help="comma-separated horizon list")
    args = parser.parse_args(argv)
    try:
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
        else:
            cfg = ExperimentConfig()
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run(cfg, args.out)
    except HypothesisViolationError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ToolkitError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
