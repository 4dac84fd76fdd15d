"""Assembly of the sum-rule identities and the divergence diagnostics.

Everything here combines the three independent pipelines: quadrature of
the spectral density (measure), the banded trace calculus (bandmatrix) and
the shooting eigensolver (spectrum).  For an eventually-free matrix each
identity is exact, so the reported residuals measure nothing but the
numerical quality of the pipelines.

Horizon scans are embarrassingly parallel; set the environment variable
``JACOBI_SUMRULES_MAX_THREADS`` to allow a thread pool (results are merged
in horizon order either way, so output is deterministic).
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bandmatrix import trace_p_w, xi_weighted
from .coefficients import CoefficientFamily, strip, truncate_to_free
from .errors import HypothesisNotMetError, HypothesisViolationError
from .measure import z_w_result
from .spectrum import eigenvalues_outside, f_w, x_weighted
from .summation import exact_sum
from .weights import eq211

_EDGE_NEIGHBORHOOD = 0.05
_EDGE_GRID = 512
_THREAD_ENV = "JACOBI_SUMRULES_MAX_THREADS"

VARIANTS = ("i", "ii_plus", "ii_minus", "iii")


def _horizon_map(fn, horizons):
    """Apply ``fn`` over horizons, optionally threaded, merged in order."""
    cap = int(os.environ.get(_THREAD_ENV, "1") or "1")
    if cap <= 1 or len(horizons) <= 1:
        return [fn(h) for h in horizons]
    with ThreadPoolExecutor(max_workers=min(cap, len(horizons))) as pool:
        return list(pool.map(fn, horizons))


def sign_hypotheses(weight):
    """Numerical sign pattern of f_w on both band-edge neighborhoods.

    Checks f_w on ``[1, 1 + eps]`` and ``[-1 - eps, -1]`` with eps = 0.05 on
    a 512-point grid.  This is a guard, not a proof: f_w is a fixed smooth
    function, so a sign violation at this resolution is decisive.
    """
    grid = np.linspace(1.0, 1.0 + _EDGE_NEIGHBORHOOD, _EDGE_GRID)
    slack = 1e-12 * max(1.0, sum(abs(c) for c in weight.c))
    fp = f_w(weight, grid)
    fm = f_w(weight, -grid)
    return {
        "plus_nonneg": bool(np.min(fp) >= -slack),
        "plus_nonpos": bool(np.max(fp) <= slack),
        "minus_nonneg": bool(np.min(fm) >= -slack),
        "minus_nonpos": bool(np.max(fm) <= slack),
    }


def _variant_holds(pattern, variant):
    if variant == "i":
        return pattern["plus_nonneg"] and pattern["minus_nonneg"]
    if variant == "ii_plus":
        return pattern["plus_nonneg"] and pattern["minus_nonpos"]
    if variant == "ii_minus":
        return pattern["plus_nonpos"] and pattern["minus_nonneg"]
    if variant == "iii":
        return pattern["plus_nonpos"] and pattern["minus_nonpos"]
    raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")


@dataclass(frozen=True)
class SumRuleReport:
    """The four sum-rule quantities and the residuals of the identities.

    For a finite-support matrix all variants share the same numerical
    identity ``z_w = trace_pw + fw_plus + fw_minus``; a residual field is
    populated only when the corresponding variant's sign hypotheses hold.
    """

    variant: str
    z_w: float
    z_w_error: float
    trace_pw: float
    fw_plus: float
    fw_minus: float
    residual_i: float = None
    residual_ii_plus: float = None
    residual_ii_minus: float = None
    residual_iii: float = None
    flags: dict = field(default_factory=dict, compare=False)

    def residual(self):
        """The residual of the requested variant."""
        return getattr(self, f"residual_{self.variant}")


def full_rule(coeffs, weight, variant="i", *, tol_quad=1e-10, spectrum=None):
    """Evaluate one final-form sum rule and report all terms and residuals.

    Raises ``HypothesisViolationError`` if the requested variant's sign
    hypotheses on f_w near the band edges fail; hypotheses are verified
    numerically, never assumed.
    """
    pattern = sign_hypotheses(weight)
    if not _variant_holds(pattern, variant):
        raise HypothesisViolationError(
            f"f_w sign hypotheses for variant {variant!r} fail near the band "
            f"edges: {pattern}")
    spec = spectrum if spectrum is not None else eigenvalues_outside(coeffs)
    zw = z_w_result(coeffs, weight, tol_quad)
    trace = trace_p_w(coeffs, weight).total
    fw_plus = exact_sum(f_w(weight, e.beta) for e in spec.above)
    fw_minus = exact_sum(f_w(weight, e.beta) for e in spec.below)
    ident = zw.value - trace - fw_plus - fw_minus
    residuals = {f"residual_{v}": (ident if _variant_holds(pattern, v) else None)
                 for v in VARIANTS}
    flags = {
        "resonance": spec.any_near_edge,
        "quadrature_error_estimate": zw.error_estimate,
        "quadrature_evaluations": zw.evaluations,
        "eigenvalue_count_above": len(spec.above),
        "eigenvalue_count_below": len(spec.below),
        "certification": spec.certification,
        "sign_pattern": pattern,
    }
    return SumRuleReport(variant=variant, z_w=zw.value,
                         z_w_error=zw.error_estimate, trace_pw=trace,
                         fw_plus=fw_plus, fw_minus=fw_minus,
                         flags=flags, **residuals)


@dataclass(frozen=True)
class StepRuleTerms:
    """All terms of the step-by-step rule at one stripping depth."""

    n: int
    z_full: float
    xi_sum: float
    x_sum: float
    z_stripped: float
    residual: float
    quadrature_error: float


def step_rule_terms(coeffs, weight, n, *, tol_quad=1e-10, spectra=None,
                    z_full=None):
    """Terms of ``Z_w(J) = sum c_l xi_l^(n) + sum c_l X_l^(n) + Z_w(J^(n))``.

    ``spectra`` may carry precomputed ``(spectrum(J), spectrum(strip(J, n)))``
    and ``z_full`` a precomputed Z_w(J) result, so scans over n do not
    repeat work.
    """
    if n < 1:
        raise ValueError("strip index n must be positive")
    stripped = strip(coeffs, n)
    if spectra is None:
        spectra = (eigenvalues_outside(coeffs), eigenvalues_outside(stripped))
    zf = z_full if z_full is not None else z_w_result(coeffs, weight, tol_quad)
    zs = z_w_result(stripped, weight, tol_quad)
    xi = xi_weighted(coeffs, weight, n)
    x = x_weighted(coeffs, weight, n, "both", spectra=spectra)
    residual = zf.value - xi - x - zs.value
    return StepRuleTerms(n=n, z_full=zf.value, xi_sum=xi, x_sum=x,
                         z_stripped=zs.value, residual=residual,
                         quadrature_error=zf.error_estimate + zs.error_estimate)


def step_rule_residual(coeffs, weight, n, *, tol_quad=1e-10, spectra=None):
    """Residual of the step-by-step rule; exactly zero in exact arithmetic."""
    return step_rule_terms(coeffs, weight, n, tol_quad=tol_quad,
                           spectra=spectra).residual


@dataclass(frozen=True)
class ConvergenceStudy:
    """Horizon table for inspecting the stripping/truncation limits."""

    rows: list
    reference: dict


def convergence_study(family, weight, horizons, *, tol_quad=1e-8,
                      reference_factor=2):
    """Numerical convergence study of the stripping and truncation limits.

    A reference operator is materialized at ``reference_factor * max(n)``;
    each row reports ``Z_w`` of the stripped and truncated matrices and the
    weighted interlaced sums on both sides, whose limits are the bare
    eigenvalue sums of the reference operator.
    """
    horizons = sorted(int(h) for h in horizons)
    if not horizons or horizons[0] < 1:
        raise ValueError("horizons must be positive integers")
    if isinstance(family, CoefficientFamily):
        ref_h = min(reference_factor * horizons[-1], family.horizon_max)
        j_ref = family.materialize(ref_h)
    else:
        j_ref = family
        ref_h = j_ref.support
    spec_ref = eigenvalues_outside(j_ref)
    fw_plus_ref = exact_sum(f_w(weight, e.beta) for e in spec_ref.above)
    fw_minus_ref = exact_sum(f_w(weight, e.beta) for e in spec_ref.below)

    def one(n):
        stripped = strip(j_ref, n)
        spec_stripped = eigenvalues_outside(stripped)
        z_stripped = z_w_result(stripped, weight, tol_quad)
        truncated = truncate_to_free(j_ref, n)
        spec_trunc = eigenvalues_outside(truncated)
        z_trunc = z_w_result(truncated, weight, tol_quad)
        x_plus = x_weighted(j_ref, weight, n, "+",
                            spectra=(spec_ref, spec_stripped))
        x_minus = x_weighted(j_ref, weight, n, "-",
                             spectra=(spec_ref, spec_stripped))
        xt_plus = exact_sum(f_w(weight, e.beta) for e in spec_trunc.above)
        xt_minus = exact_sum(f_w(weight, e.beta) for e in spec_trunc.below)
        return {
            "horizon": n,
            "z_w_stripped": z_stripped.value,
            "z_w_truncated": z_trunc.value,
            "x_weighted_plus": x_plus,
            "x_weighted_minus": x_minus,
            "x_weighted_plus_truncated": xt_plus,
            "x_weighted_minus_truncated": xt_minus,
            "gap_plus": fw_plus_ref - x_plus,
            "gap_minus": fw_minus_ref - x_minus,
        }

    rows = _horizon_map(one, horizons)
    return ConvergenceStudy(rows=rows, reference={
        "horizon": ref_h,
        "fw_plus": fw_plus_ref,
        "fw_minus": fw_minus_ref,
    })


@dataclass(frozen=True)
class DiagnoseThresholds:
    """Heuristic constants of the finite-horizon divergence classifier.

    A partial-sum series counts as divergent when its fitted log-log slope
    over the last horizons exceeds ``slope`` or its magnitude has grown by
    the factor ``ratio``.  Both are configuration, not theorems: any
    finite-horizon classifier of an asymptotic statement is heuristic.
    """

    ratio: float = 1e3
    slope: float = 0.05


@dataclass(frozen=True)
class SeriesTrend:
    name: str
    values: tuple
    slope: float
    ratio: float
    kind: str   # convergent | divergent_up | divergent_down | oscillating


def _classify_series(name, values, horizons, thresholds):
    vals = np.asarray(values, dtype=float)
    absvals = np.abs(vals)
    tiny = 1e-12 * max(1.0, float(absvals.max(initial=0.0)))
    if absvals.max(initial=0.0) <= 1e-300:
        return SeriesTrend(name, tuple(vals), 0.0, 1.0, "convergent")
    incr = np.diff(vals)
    # oscillation: increments keep changing sign and their amplitude is not
    # clearly dying out (decaying wiggles are just slow convergence)
    sign_changes = int(np.sum(np.sign(incr[:-1]) * np.sign(incr[1:]) < 0))
    half = max(len(incr) // 2, 1)
    early_amp = float(np.max(np.abs(incr[:half]), initial=0.0))
    late_amp = float(np.max(np.abs(incr[half:]), initial=0.0))
    osc = (sign_changes >= 2 and len(incr) >= 3
           and late_amp >= 0.5 * early_amp
           and late_amp > 1e-9 * max(1.0, float(absvals.max())))
    last = np.log(np.maximum(absvals[-3:], tiny))
    ln_h = np.log(np.asarray(horizons[-3:], dtype=float))
    slope = float(np.polyfit(ln_h, last, 1)[0]) if len(last) >= 2 else 0.0
    ratio = float(absvals[-1] / max(absvals[0], tiny))
    diverges = slope > thresholds.slope or ratio > thresholds.ratio
    if osc and not diverges:
        kind = "oscillating"
    elif diverges:
        kind = "divergent_up" if vals[-1] > 0 else "divergent_down"
    else:
        kind = "convergent"
    return SeriesTrend(name, tuple(vals), slope, ratio, kind)


@dataclass(frozen=True)
class Hypothesis:
    name: str
    fired: bool
    conclusion: str   # "LT" | "SZ" | "eigenvalue"
    detail: str


@dataclass(frozen=True)
class DivergenceVerdict:
    verdict: str
    hypotheses: tuple
    trends: dict
    evidence: dict
    flags: dict


def _family_arrays(family, upto):
    j = family.materialize(min(upto, family.horizon_max))
    return j.a_padded(upto), j.b_padded(upto)


def _partial_at(series_cumsum, horizons):
    return tuple(float(series_cumsum[h - 1]) for h in horizons)


def diagnose(family, weight, horizons, *, thresholds=None, tol_quad=1e-6,
             compute_zw=True):
    """Divergence diagnostics at desk scale.

    Computes the evidence partial sums behind each divergence criterion,
    classifies their trends, and corroborates the verdict through the sum
    rule itself: ``sum f_w`` and ``Z_w`` are evaluated at every horizon, and
    the identity ``Z_w = Tr P_w + sum f_w`` is checked per horizon (each
    truncation is an eventually-free matrix).  ``inconclusive`` is a valid
    outcome; divergence is never asserted, only evidenced.
    """
    horizons = sorted(int(h) for h in horizons)
    if len(horizons) < 3:
        raise ValueError("diagnose needs at least 3 strictly increasing horizons")
    if any(h2 <= h1 for h1, h2 in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be strictly increasing")
    thresholds = thresholds or DiagnoseThresholds()
    top = horizons[-1]
    a, b = _family_arrays(family, top + 1)
    da = np.diff(a)
    db = np.diff(b)
    an = a[:top]
    bn = b[:top]
    log_a = np.log(an)
    cums = {
        "sum_r": np.cumsum(bn**4 - 2 * db[:top]**2 - 8 * da[:top]**2
                           + 4 * (an**2 - 1) * (bn**2 + bn * b[1:top + 1]
                                                + b[1:top + 1]**2)),
        "sum_da2": np.cumsum(da[:top]**2),
        "sum_db2": np.cumsum(db[:top]**2),
        "sum_b4": np.cumsum(bn**4),
        "sum_abs_b3": np.cumsum(np.abs(bn)**3),
        "sum_abs_a1_3": np.cumsum(np.abs(an - 1)**3),
        "sum_a1_2": np.cumsum((an - 1)**2),
        "sum_a1_neg_2": np.cumsum(np.minimum(an - 1, 0.0)**2),
        "sum_a1_pos_2": np.cumsum(np.maximum(an - 1, 0.0)**2),
        "sum_log_a": np.cumsum(log_a),
        "t8_plus": np.cumsum(log_a + bn / 2.0),
        "t8_minus": np.cumsum(log_a - bn / 2.0),
    }
    series = {k: _partial_at(v, horizons) for k, v in cums.items()}
    d2 = cums["sum_da2"] + cums["sum_db2"]
    l3 = cums["sum_abs_a1_3"] + cums["sum_abs_b3"]
    series["c7_ratio"] = tuple(
        float(d2[h - 1] / l3[h - 1]) if l3[h - 1] > 0 else math.inf
        for h in horizons)

    trends = {k: _classify_series(k, v, horizons, thresholds)
              for k, v in series.items()}

    def conv(key):
        return trends[key].kind == "convergent"

    def div(key):
        return trends[key].kind in ("divergent_up", "divergent_down")

    def div_up(key):
        return trends[key].kind == "divergent_up"

    def div_down(key):
        return trends[key].kind == "divergent_down"

    def osc(key):
        return trends[key].kind == "oscillating"

    hypotheses = []

    def add(name, fired, conclusion, detail):
        hypotheses.append(Hypothesis(name, bool(fired), conclusion, detail))

    a1_l3 = conv("sum_abs_a1_3")
    add("T.1(i)", a1_l3 and (div_up("sum_r") or osc("sum_r")), "LT",
        "sum r_n grows without bound (or oscillates) while a-1 stays cubically summable")
    add("T.1(ii)", a1_l3 and (div_down("sum_r") or osc("sum_r")), "SZ",
        "sum r_n falls without bound (or oscillates) while a-1 stays cubically summable")
    a1_l2 = conv("sum_a1_2")
    add("C.1a(i)", a1_l2 and div_up("sum_b4") and conv("sum_db2"), "LT",
        "b leaves l^4 while db stays square-summable")
    add("C.1a(ii)", a1_l2 and conv("sum_b4") and div("sum_db2"), "SZ",
        "db leaves l^2 while b stays in l^4")
    add("C.6(i)",
        conv("sum_a1_neg_2") and conv("sum_da2") and conv("sum_db2")
        and (div("sum_abs_a1_3") or div_up("sum_b4")), "LT",
        "negative part of a-1 and both difference series stay summable while "
        "|a-1|^3 or b^4 diverges")
    add("C.6(ii)",
        conv("sum_a1_pos_2") and conv("sum_b4")
        and (div("sum_abs_a1_3") or div("sum_da2") or div("sum_db2")), "SZ",
        "positive part of a-1 and b^4 stay summable while |a-1|^3, da^2 or "
        "db^2 diverges")
    c7_vals = series["c7_ratio"]
    c7_grows = (all(x < y for x, y in zip(c7_vals[-3:], c7_vals[-2:]))
                and c7_vals[-1] > 10.0 * max(c7_vals[0], 1e-300))
    add("C.7", c7_grows or math.isinf(c7_vals[-1]), "SZ",
        "quadratic difference sums outrun the cubic size sums")
    add("T.8(+)", div_up("t8_plus") or osc("t8_plus"), "LT",
        "sum [ln a_n + b_n/2] is unbounded above; the positive-side "
        "half-power moment diverges")
    add("T.8(-)", div_up("t8_minus") or osc("t8_minus"), "LT",
        "sum [ln a_n - b_n/2] is unbounded above; the negative-side "
        "half-power moment diverges")

    t9_flag = {}
    for sign, key in (("+", "t8_plus"), ("-", "t8_minus")):
        final = series[key][-1]
        t9_flag[sign] = bool(final > 0.5 + 1e-9 or osc(key))

    corroboration = {"horizon": list(horizons), "sum_fw": [], "z_w": [],
                     "trace_pw": [], "identity_residual": []}

    def one(h):
        j = family.materialize(h)
        spec = eigenvalues_outside(j)
        fw = exact_sum(f_w(weight, e.beta)
                       for e in spec.below + spec.above)
        trace = trace_p_w(j, weight).total
        if compute_zw:
            zw = z_w_result(j, weight, tol_quad)
            return fw, zw.value, trace, zw.value - trace - fw, spec.any_near_edge
        return fw, math.nan, trace, math.nan, spec.any_near_edge

    any_resonance = False
    for fw, zw_val, trace, resid, res_flag in _horizon_map(one, horizons):
        corroboration["sum_fw"].append(fw)
        corroboration["z_w"].append(zw_val)
        corroboration["trace_pw"].append(trace)
        corroboration["identity_residual"].append(resid)
        any_resonance = any_resonance or res_flag

    lt_fired = [h for h in hypotheses if h.fired and h.conclusion == "LT"]
    sz_fired = [h for h in hypotheses if h.fired and h.conclusion == "SZ"]
    all_convergent = all(t.kind == "convergent" for t in trends.values()
                         if t.name != "c7_ratio")
    if lt_fired:
        verdict = "LT_sum_infinite"
    elif sz_fired:
        verdict = "szego_integral_minus_infinite"
    elif all_convergent:
        verdict = "both_finite_consistent"
    else:
        verdict = "inconclusive"

    return DivergenceVerdict(
        verdict=verdict,
        hypotheses=tuple(hypotheses),
        trends=trends,
        evidence={"series": series, "corroboration": corroboration,
                  "thresholds": thresholds},
        flags={"t9_eigenvalue": t9_flag, "resonance": any_resonance,
               "both_conclusions": bool(lt_fired and sz_fired)},
    )


@dataclass(frozen=True)
class T1bReport:
    rows: list
    difference_side: str      # classification of sum (da^2 + db^2)
    integral_side: str        # classification of the Z_w trend
    consistent: bool
    l3_trend: SeriesTrend


def t1b_equivalence(family, horizons, *, weight=None, tol_quad=1e-6,
                    thresholds=None):
    """Finite/infinite agreement check for the cubic-regime equivalence.

    Under cubic summability of (a-1, b) the square-summability of the
    coefficient differences is equivalent to finiteness of the Szego-type
    integral.  Both sides are reported as trends over the horizons; raises
    ``HypothesisNotMetError`` when the cubic sums themselves diverge.
    """
    weight = weight or eq211()
    thresholds = thresholds or DiagnoseThresholds()
    horizons = sorted(int(h) for h in horizons)
    if len(horizons) < 3:
        raise ValueError("t1b_equivalence needs at least 3 horizons")
    if not isinstance(family, CoefficientFamily):
        family = CoefficientFamily.explicit(family)
    top = horizons[-1]
    a, b = _family_arrays(family, top + 1)
    l3 = np.cumsum(np.abs(a[:top] - 1)**3 + np.abs(b[:top])**3)
    l3_trend = _classify_series("l3_sum", _partial_at(l3, horizons),
                                horizons, thresholds)
    if l3_trend.kind != "convergent":
        raise HypothesisNotMetError(
            "cubic partial sums of (a-1, b) are themselves diverging; the "
            "equivalence hypothesis is not met")
    d2 = np.cumsum(np.diff(a)[:top]**2 + np.diff(b)[:top]**2)
    d2_at = _partial_at(d2, horizons)

    def one(h):
        j = family.materialize(h)
        return z_w_result(j, weight, tol_quad).value

    zw_at = _horizon_map(one, horizons)
    rows = [{"horizon": h, "difference_square_sum": d, "z_w": z}
            for h, d, z in zip(horizons, d2_at, zw_at)]
    d2_trend = _classify_series("difference_square_sum", d2_at, horizons,
                                thresholds)
    zw_trend = _classify_series("z_w", tuple(zw_at), horizons, thresholds)
    d_div = d2_trend.kind != "convergent"
    z_div = zw_trend.kind != "convergent"
    return T1bReport(rows=rows,
                     difference_side=d2_trend.kind,
                     integral_side=zw_trend.kind,
                     consistent=(d_div == z_div),
                     l3_trend=l3_trend)
