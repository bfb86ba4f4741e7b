"""Linearized Gaussian engine for the two-pulse protocol.

The state is six jointly Gaussian quadratures (see :mod:`spinqnd.model` for
the ordering).  Four maps cover the whole protocol: the Faraday interaction
of one probe pulse, the spin rotation about x, conditioning on a measured
Stokes component, and a phenomenological attenuation of the spin toward
vacuum noise.  Every map is a pure function returning a new state.
"""

from __future__ import annotations

import numpy as np

from .model import GaussianState, J_Y, J_Z, N_COORDS, S1_Y, S1_Z, S2_Y, S2_Z

MIN_CONDITION_VARIANCE = 1e-14

_PULSE_COORDS = {1: (S1_Y, S1_Z), 2: (S2_Y, S2_Z)}


def _transformed(state: GaussianState, m: np.ndarray) -> GaussianState:
    mean = m @ state.mean
    cov = m @ state.cov @ m.T
    return GaussianState._adopt(mean, 0.5 * (cov + cov.T))


def faraday_matrix(pulse: int, kappa: float) -> np.ndarray:
    """Linear map of one probe pass: Sk_y += kappa*Jz, Jy += kappa*Sk_z."""
    sy, sz = _PULSE_COORDS[pulse]
    m = np.eye(N_COORDS)
    m[sy, J_Z] = kappa
    m[J_Y, sz] = kappa
    return m


def apply_faraday(state: GaussianState, pulse: int, kappa: float) -> GaussianState:
    """Faraday interaction of probe pulse 1 or 2 with the spin.

    Jz commutes with the interaction, so its moments and its covariances
    with the Stokes z components are untouched (QND condition).
    """
    if pulse not in _PULSE_COORDS:
        raise ValueError(f"pulse must be 1 or 2, got {pulse!r}")
    return _transformed(state, faraday_matrix(pulse, kappa))


def apply_rotation(state: GaussianState, phi: float) -> GaussianState:
    """Rotate the spin quadratures about x: Jy' = Jy cos(phi) - Jz sin(phi),
    Jz' = Jz cos(phi) + Jy sin(phi).  Stokes coordinates are untouched."""
    c, s = np.cos(phi), np.sin(phi)
    m = np.eye(N_COORDS)
    m[J_Y, J_Y] = c
    m[J_Y, J_Z] = -s
    m[J_Z, J_Y] = s
    m[J_Z, J_Z] = c
    return _transformed(state, m)


def condition_on(state: GaussianState, coord_index: int, outcome: float) -> GaussianState:
    """Gaussian conditional update after measuring one coordinate.

    Standard Schur complement: mean' = mean + cov[:,c] (outcome - mean_c) / cov_cc,
    cov' = cov - cov[:,c] cov[c,:] / cov_cc.  The measured coordinate is
    consumed: its variance is pinned to 0 and its mean to the outcome, so the
    6x6 layout stays index-stable for the rest of the protocol.
    """
    c = int(coord_index)
    var_c = state.cov[c, c]
    if var_c <= MIN_CONDITION_VARIANCE:
        raise ValueError(
            f"cannot condition on coordinate {c}: variance {var_c:.3e} is (near-)zero"
        )
    col = state.cov[:, c]
    mean = state.mean + col * ((outcome - state.mean[c]) / var_c)
    cov = state.cov - np.outer(col, col) / var_c
    mean[c] = outcome
    cov[c, :] = 0.0
    cov[:, c] = 0.0
    return GaussianState._adopt(mean, 0.5 * (cov + cov.T))


def apply_loss(state: GaussianState, epsilon: float) -> GaussianState:
    """Attenuate the spin toward vacuum noise 1/2 (beam-splitter channel).

    Spin means scale by sqrt(1-eps), the spin covariance block relaxes as
    (1-eps)*block + (eps/2)*I, and spin-Stokes cross covariances scale by
    sqrt(1-eps).  eps=0 is the identity; the fresh state is a fixed point.
    """
    if not (0.0 <= epsilon < 1.0):
        raise ValueError(f"epsilon out of [0,1): {epsilon!r}")
    t = np.sqrt(1.0 - epsilon)
    mean = state.mean.copy()
    cov = state.cov.copy()
    mean[:2] *= t
    cov[:2, :2] = (1.0 - epsilon) * cov[:2, :2] + (epsilon / 2.0) * np.eye(2)
    cov[:2, 2:] *= t
    cov[2:, :2] *= t
    return GaussianState._adopt(mean, 0.5 * (cov + cov.T))


def marginal_variance(state: GaussianState, coord_index: int) -> float:
    """Variance of a single coordinate."""
    return float(state.cov[coord_index, coord_index])


def linear_combination_variance(state: GaussianState, weights) -> float:
    """Variance w^T cov w of the linear combination w . x."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (N_COORDS,):
        raise ValueError(f"weights must have length {N_COORDS}")
    return float(w @ state.cov @ w)
