"""Closed forms for every published variance of the two-pulse protocol.

These are the references the Gaussian engine and the Monte Carlo estimates
are tested against.  kappa enters squared everywhere, so its sign is
irrelevant here.
"""

from __future__ import annotations

import math

import numpy as np

from . import gaussian
from .model import GaussianState, S1_Y, S2_Y

SHOT_NOISE = 0.5


def v1(kappa: float) -> float:
    """Variance of the first pulse readout: (1 + kappa^2)/2."""
    return (1.0 + kappa**2) / 2.0


def v2(kappa: float, phi: float) -> float:
    """Variance of the second (verifying) pulse readout.

    (1 + kappa^2 + kappa^4 sin^2 phi)/2: the sin^2 term is the first pulse's
    back-action on Jy rotated into the readout quadrature.
    """
    return (1.0 + kappa**2 + kappa**4 * math.sin(phi) ** 2) / 2.0


def v_pm(kappa: float, phi: float, sign: int) -> float:
    """Variance of (s1 +/- s2)/sqrt(2); sign is +1 or -1.

    (2 + kappa^2 (2 +/- 2 cos phi) + kappa^4 sin^2 phi)/4
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    k2 = kappa**2
    return (2.0 + k2 * (2.0 + sign * 2.0 * math.cos(phi)) + k2 * k2 * math.sin(phi) ** 2) / 4.0


def g_opt(kappa: float) -> float:
    """Gain minimizing V(s2 - g s1 cos phi): kappa^2 / (1 + kappa^2)."""
    k2 = kappa**2
    return k2 / (1.0 + k2)


def v_cond(kappa: float, phi: float) -> float:
    """Conditional variance min_g V(s2 - g s1 cos phi) at the optimal gain.

    (1 + kappa^2 + kappa^4 sin^2 phi - kappa^4 cos^2 phi / (1 + kappa^2))/2
    """
    k2 = kappa**2
    return (
        1.0
        + k2
        + k2 * k2 * math.sin(phi) ** 2
        - k2 * k2 * math.cos(phi) ** 2 / (1.0 + k2)
    ) / 2.0


def v_coh(kappa: float) -> float:
    """Second-pulse variance for the coherent control (no first pulse)."""
    return (1.0 + kappa**2) / 2.0


def conditional_variance_engine(kappa: float, phi: float, loss_epsilon: float = 0.0) -> float:
    """V_cond from the Gaussian engine: condition on the first readout, then
    rotate and probe again, with one loss pass per probe pulse.

    The posterior covariance is outcome-independent, so conditioning on
    outcome 0 loses no generality.  Without loss this reproduces the closed
    form exactly.
    """
    st = GaussianState.fresh()
    st = gaussian.apply_faraday(st, 1, kappa)
    st = gaussian.condition_on(st, S1_Y, 0.0)
    if loss_epsilon:
        st = gaussian.apply_loss(st, loss_epsilon)
    st = gaussian.apply_rotation(st, phi)
    if loss_epsilon:
        st = gaussian.apply_loss(st, loss_epsilon)
    st = gaussian.apply_faraday(st, 2, kappa)
    return gaussian.marginal_variance(st, S2_Y)


def coherent_variance_engine(kappa: float, phi: float, loss_epsilon: float = 0.0) -> float:
    """V_coh from the engine: same pipeline without the first probe pulse."""
    st = GaussianState.fresh()
    if loss_epsilon:
        st = gaussian.apply_loss(st, loss_epsilon)
    st = gaussian.apply_rotation(st, phi)
    if loss_epsilon:
        st = gaussian.apply_loss(st, loss_epsilon)
    st = gaussian.apply_faraday(st, 2, kappa)
    return gaussian.marginal_variance(st, S2_Y)


def protocol_variances(kappa: float, phi: float, loss_epsilon: float = 0.0) -> dict[str, float]:
    """All six published variances at one angle, as a name -> value dict.

    Lossless values come from the closed forms.  With loss they come from
    the engine: one attenuation pass per probe pulse, inserted after the
    first probe and after the rotation.  V1 is insensitive to loss (the
    attenuation happens after the first readout).
    """
    if not loss_epsilon:
        return {
            "v1": v1(kappa),
            "v2": v2(kappa, phi),
            "v_plus": v_pm(kappa, phi, +1),
            "v_minus": v_pm(kappa, phi, -1),
            "v_cond": v_cond(kappa, phi),
            "v_coh": v_coh(kappa),
        }
    st = GaussianState.fresh()
    st = gaussian.apply_faraday(st, 1, kappa)
    st = gaussian.apply_loss(st, loss_epsilon)
    st = gaussian.apply_rotation(st, phi)
    st = gaussian.apply_loss(st, loss_epsilon)
    st = gaussian.apply_faraday(st, 2, kappa)
    w_plus = np.zeros(6)
    w_plus[[S1_Y, S2_Y]] = 1.0 / math.sqrt(2.0)
    w_minus = np.zeros(6)
    w_minus[S1_Y] = 1.0 / math.sqrt(2.0)
    w_minus[S2_Y] = -1.0 / math.sqrt(2.0)
    return {
        "v1": gaussian.marginal_variance(st, S1_Y),
        "v2": gaussian.marginal_variance(st, S2_Y),
        "v_plus": gaussian.linear_combination_variance(st, w_plus),
        "v_minus": gaussian.linear_combination_variance(st, w_minus),
        "v_cond": conditional_variance_engine(kappa, phi, loss_epsilon),
        "v_coh": coherent_variance_engine(kappa, phi, loss_epsilon),
    }


def squeezing_db(kappa: float, phi: float, loss_epsilon: float = 0.0) -> float:
    """Atomic-noise reduction of the conditioned state, in dB below the
    coherent spin state:

        -10 log10[ (V_cond - 1/2) / (V_coh - 1/2) ]

    Both variances are measured against the 1/2 shot-noise floor.  With
    loss enabled they are taken from the engine including the attenuation
    passes.  Undefined at kappa = 0, where the atomic contribution to both
    vanishes.
    """
    if kappa == 0.0:
        raise ValueError("squeezing is undefined at kappa = 0")
    if loss_epsilon:
        cond = conditional_variance_engine(kappa, phi, loss_epsilon)
        coh = coherent_variance_engine(kappa, phi, loss_epsilon)
    else:
        cond = v_cond(kappa, phi)
        coh = v_coh(kappa)
    return -10.0 * math.log10((cond - SHOT_NOISE) / (coh - SHOT_NOISE))
