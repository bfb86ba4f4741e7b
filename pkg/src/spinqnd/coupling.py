"""Interaction strength and rotation-angle bookkeeping.

``kappa_from_physics`` evaluates the dimensionless Faraday coupling from the
probe constants; ``rotation_angle`` maps a fictitious-field pulse to its spin
rotation angle.  Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math

from .model import PhysicalParams, RotationPulse, validate_params

TWO_PI = 2.0 * math.pi


def two_pi_mhz(value_mhz: float) -> float:
    """Angular frequency (rad/s) for a value quoted as '2 pi x value MHz'."""
    return TWO_PI * value_mhz * 1e6


# Probe-interface constants of the ytterbium-171 ensemble used throughout:
# 399 nm probe locked at the midpoint of the two excited-state hyperfine
# components, 1e6 atoms, 2.6e6 photons per pulse, 6.7% atomic loss per pass.
YB171 = PhysicalParams(
    gamma=two_pi_mhz(29.0),
    sigma0=7.6e-14,
    w0=61e-6,
    delta=-two_pi_mhz(160.0),
    delta0=two_pi_mhz(320.0),
    n_atoms=1.0e6,
    n_photons=2.6e6,
    epsilon_A=6.7e-2,
)

PRESETS = {"yb171": YB171}

# Spin rotation rate of the fictitious-field beam (rad/s); measured value for
# the 556 nm beam at ~30 mW, not derived from first principles.
DEFAULT_ROTATION_RATE = 0.4e6

# 556 nm rotation-beam transition constants, for reference only: they justify
# the regime linewidth << detuning << hyperfine splitting in which the beam
# acts as a pure rotation, and enter no computation here.
ROTATION_BEAM_LINEWIDTH = TWO_PI * 182e3
ROTATION_BEAM_SPLITTING = TWO_PI * 5.9e9


def lorentzian_dispersion(delta: float, gamma: float) -> float:
    """Dispersive weight delta / (delta^2 + (gamma/2)^2) of one resonance."""
    denom = delta * delta + (gamma / 2.0) ** 2
    if denom == 0.0:
        raise ValueError("Lorentzian denominator vanished (gamma and delta both zero)")
    return delta / denom


def kappa_from_physics(p: PhysicalParams) -> float:
    """Signed coupling strength of one probe pulse.

    kappa = Gamma sigma0 sqrt(S J) / (3 pi w0^2)
            * [ delta/(delta^2+(Gamma/2)^2)
                - (delta+delta0)/((delta+delta0)^2+(Gamma/2)^2) ]

    with S = N_L/2 and J = N_A/2.  The result is negative for red detuning
    from the lower hyperfine component; all published variances depend on
    kappa^2 only.
    """
    bad = validate_params(p)
    if bad:
        raise ValueError("invalid PhysicalParams: " + "; ".join(bad))
    bracket = lorentzian_dispersion(p.delta, p.gamma) - lorentzian_dispersion(
        p.delta + p.delta0, p.gamma
    )
    prefactor = p.gamma * p.sigma0 * math.sqrt(p.s * p.j) / (3.0 * math.pi * p.w0**2)
    return prefactor * bracket


def rotation_angle(pulse: RotationPulse) -> float:
    """Rotation angle (rad) of a fictitious-field pulse: rate * width."""
    bad = pulse.violations()
    if bad:
        raise ValueError("invalid RotationPulse: " + "; ".join(bad))
    return pulse.angle()
