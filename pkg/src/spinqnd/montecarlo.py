"""Monte Carlo sampling of complete measurement records and the variance
estimators built on them.

Each shot runs the full protocol on its own Gaussian state and draws the two
polarimeter readings from the exact marginals of the linearized model.  Every
shot owns an independent Philox stream derived from (seed, run, shot), so
results never depend on execution order.  The generator is unbiased by
construction; there is no detector-drift model and hence no zero-bias
compensation stage.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import gaussian
from .model import (
    ExperimentConfig,
    GaussianState,
    MeasurementRecord,
    S1_Y,
    S2_Y,
    VarianceReport,
    validate,
)

GOLDEN_RATIO_CONJ = (math.sqrt(5.0) - 1.0) / 2.0


def shot_stream(seed: int, run_index: int, shot_index: int) -> np.random.Generator:
    """Independent counter-based stream for one shot of one run."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed, run_index, shot_index)))
    )


def _sample_marginal(state: GaussianState, coord: int, rng: np.random.Generator) -> float:
    var = gaussian.marginal_variance(state, coord)
    return float(state.mean[coord] + math.sqrt(var) * rng.standard_normal())


def run_shot(
    config: ExperimentConfig,
    phi: float,
    rng: np.random.Generator,
    first_pulse: bool = True,
) -> MeasurementRecord:
    """Simulate one shot of the two-pulse protocol at rotation angle phi.

    Sequence: Faraday pass of pulse 1, measure s1, condition the state on it,
    optional spin loss, rotation by phi, optional spin loss, Faraday pass of
    pulse 2, measure s2.  With ``first_pulse=False`` (coherent control) the
    first Faraday pass and the conditioning are skipped; s1 is then plain
    shot noise.  Assumes a valid config.
    """
    eps = config.loss_epsilon
    state = GaussianState.fresh()
    if first_pulse:
        state = gaussian.apply_faraday(state, 1, config.kappa)
        s1 = _sample_marginal(state, S1_Y, rng)
        state = gaussian.condition_on(state, S1_Y, s1)
    else:
        s1 = _sample_marginal(state, S1_Y, rng)
    if eps:
        state = gaussian.apply_loss(state, eps)
    state = gaussian.apply_rotation(state, phi)
    if eps:
        state = gaussian.apply_loss(state, eps)
    state = gaussian.apply_faraday(state, 2, config.kappa)
    s2 = _sample_marginal(state, S2_Y, rng)
    return MeasurementRecord(phi=phi, s1=s1, s2=s2)


def estimate(records: list[MeasurementRecord], g: float | None, control: bool = False) -> VarianceReport:
    """Unbiased sample variances of one angle's records, with error bars.

    Estimates V(s1), V(s2), V((s1 +/- s2)/sqrt(2)) and, when a gain g is
    given, V(s2 - g s1 cos phi).  Each error bar is sqrt(2/N_m) times the
    corresponding variance.
    """
    if len(records) < 2:
        raise ValueError("estimate needs at least 2 records")
    phis = {r.phi for r in records}
    if len(phis) != 1:
        raise ValueError(f"records mix angles: {sorted(phis)}")
    phi = records[0].phi
    s1 = np.array([r.s1 for r in records])
    s2 = np.array([r.s2 for r in records])
    n = len(records)
    err = math.sqrt(2.0 / n)

    v1 = float(np.var(s1, ddof=1))
    v2 = float(np.var(s2, ddof=1))
    v_plus = float(np.var((s1 + s2) / math.sqrt(2.0), ddof=1))
    v_minus = float(np.var((s1 - s2) / math.sqrt(2.0), ddof=1))
    v_cond = None
    if g is not None:
        v_cond = float(np.var(s2 - g * s1 * math.cos(phi), ddof=1))
    return VarianceReport(
        phi=phi,
        v1=v1,
        v2=v2,
        v_plus=v_plus,
        v_minus=v_minus,
        v_cond=v_cond,
        g_used=g,
        dv1=err * v1,
        dv2=err * v2,
        dv_plus=err * v_plus,
        dv_minus=err * v_minus,
        shots=n,
        control=control,
    )


def golden_section_minimize(f, lo: float, hi: float, tol: float = 1e-6) -> float:
    """Golden-section search for the minimum of a unimodal f on [lo, hi]."""
    a, b = float(lo), float(hi)
    x1 = b - GOLDEN_RATIO_CONJ * (b - a)
    x2 = a + GOLDEN_RATIO_CONJ * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN_RATIO_CONJ * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN_RATIO_CONJ * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def fit_global_g(records: list[MeasurementRecord]) -> float:
    """Gain minimizing the summed conditional variance over all angles,

        sum_phi V(s2 - g s1 cos phi),

    by golden-section search on g in [-1, 2] to 1e-6.  Signals a flat
    objective (every angle has cos phi = 0) with ValueError.
    """
    if len(records) < 2:
        raise ValueError("fit_global_g needs at least 2 records")
    groups: dict[float, list[MeasurementRecord]] = {}
    for r in records:
        groups.setdefault(r.phi, []).append(r)

    # Sufficient statistics per angle; the objective is quadratic in g.
    stats = []
    curvature = 0.0
    for phi, recs in sorted(groups.items()):
        if len(recs) < 2:
            raise ValueError(f"angle {phi} has fewer than 2 records")
        s1 = np.array([r.s1 for r in recs])
        s2 = np.array([r.s2 for r in recs])
        c = math.cos(phi)
        var1 = float(np.var(s1, ddof=1))
        var2 = float(np.var(s2, ddof=1))
        cov = float(np.cov(s1, s2, ddof=1)[0, 1])
        stats.append((c, var1, var2, cov))
        curvature += c * c * var1
    if curvature <= 1e-12:
        raise ValueError("flat objective: cos(phi) vanishes at every angle")

    def objective(g: float) -> float:
        return sum(v2 + g * g * c * c * v1 - 2.0 * g * c * cov for c, v1, v2, cov in stats)

    return golden_section_minimize(objective, -1.0, 2.0, tol=1e-6)


@dataclass(frozen=True)
class SweepResult:
    """All artifacts of one campaign: per-angle reports (squeezed runs first,
    then the coherent controls), the raw records of both, and the fitted g."""

    reports: list[VarianceReport]
    records: list[MeasurementRecord]
    control_records: list[MeasurementRecord]
    g_global: float | None


def _run_angle(config, phi, run_index, first_pulse, n_threads):
    def one(j):
        return run_shot(config, phi, shot_stream(config.seed, run_index, j), first_pulse)

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            return list(pool.map(one, range(config.shots)))
    return [one(j) for j in range(config.shots)]


def sweep(config: ExperimentConfig, first_pulse: bool = True, n_threads: int = 1) -> SweepResult:
    """Run the full campaign: every angle with the two-pulse protocol, fit
    the global gain across angles, then rerun every angle as a coherent
    control without the first pulse.

    With ``first_pulse=False`` only the control runs are performed (no gain
    fit, conditional variances not applicable).  Run index r of angle i is
    i for the squeezed runs and len(angles)+i for the controls, so the two
    phases draw from disjoint streams.
    """
    bad = validate(config)
    if bad:
        raise ValueError("invalid config: " + "; ".join(bad))

    records: list[MeasurementRecord] = []
    reports: list[VarianceReport] = []
    g_global = None

    if first_pulse:
        per_angle = []
        for i, phi in enumerate(config.angles):
            recs = _run_angle(config, phi, i, True, n_threads)
            per_angle.append(recs)
            records.extend(recs)
        g_global = fit_global_g(records)
        for recs in per_angle:
            reports.append(estimate(recs, g_global))

    control_records: list[MeasurementRecord] = []
    offset = len(config.angles) if first_pulse else 0
    for i, phi in enumerate(config.angles):
        recs = _run_angle(config, phi, offset + i, False, n_threads)
        control_records.extend(recs)
        reports.append(estimate(recs, None, control=True))

    return SweepResult(
        reports=reports,
        records=records,
        control_records=control_records,
        g_global=g_global,
    )


def records_csv(records: list[MeasurementRecord]) -> str:
    """Records as CSV with header phi,s1,s2; floats in shortest round-trip
    decimal so identical runs produce identical bytes."""
    lines = ["phi,s1,s2"]
    lines.extend(f"{r.phi!r},{r.s1!r},{r.s2!r}" for r in records)
    return "\n".join(lines) + "\n"


def _json_value(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format(value, ".17g"))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, dict):
        out.append("{")
        for i, (k, v) in enumerate(value.items()):
            if i:
                out.append(", ")
            out.append(f'"{k}": ')
            _json_value(v, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, v in enumerate(value):
            if i:
                out.append(", ")
            _json_value(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps_json(value) -> str:
    """JSON with floats at 17 significant digits (exact round-trip)."""
    out: list[str] = []
    _json_value(value, out)
    return "".join(out)


def reports_json(reports: list[VarianceReport]) -> str:
    """Reports as a JSON array, one object per VarianceReport."""
    return dumps_json([r.as_dict() for r in reports]) + "\n"
