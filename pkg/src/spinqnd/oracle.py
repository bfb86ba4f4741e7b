"""Exact finite-dimensional simulation of the protocol at small atom and
photon numbers.

The collective spin lives in its symmetric (Dicke) basis of dimension
N_A + 1; each probe pulse is restricted to the symmetric two-mode sector of
fixed total photon number N_L, indexed by half the circular-mode population
difference, so one pulse is itself a spin of length S = N_L/2.  The full
state is the (N_A+1) x (N_L+1) x (N_L+1) amplitude tensor
(atoms x pulse 1 x pulse 2), and the probe interaction is diagonal in it.

Basis indices everywhere run over m = -j .. +j ascending (index i = m + j).
Polarimeter convention: the measured quadrature's eigenstates are obtained
from the population basis by a +pi/2 rotation about the pulse's polarization
axis; any consistent phase choice gives the same outcome statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import analytics

MAX_AMPLITUDES = 10**7
ORTHOGONALITY_TOL = 1e-10

_QUARTER_TURNS = np.array([1.0, 1.0j, -1.0, -1.0j])


@dataclass(frozen=True)
class ExactSystem:
    """Exact-model sizes and the bare coupling per photon-atom pair.

    alpha_t is chosen so that alpha_t * sqrt(J S) hits a target coupling;
    use :meth:`for_kappa`.
    """

    n_atoms: int
    n_photons: int
    alpha_t: float

    def __post_init__(self):
        if self.n_atoms < 1 or self.n_photons < 1:
            raise ValueError("need at least one atom and one photon")
        if self.amplitudes > MAX_AMPLITUDES:
            raise ValueError(
                f"state of {self.amplitudes} amplitudes exceeds the "
                f"{MAX_AMPLITUDES} guard"
            )

    @classmethod
    def for_kappa(cls, n_atoms: int, n_photons: int, kappa_target: float) -> "ExactSystem":
        if n_atoms < 1 or n_photons < 1:
            raise ValueError("need at least one atom and one photon")
        j = n_atoms / 2.0
        s = n_photons / 2.0
        return cls(n_atoms, n_photons, kappa_target / math.sqrt(j * s))

    @property
    def j(self) -> float:
        return self.n_atoms / 2.0

    @property
    def s(self) -> float:
        return self.n_photons / 2.0

    @property
    def amplitudes(self) -> int:
        return (self.n_atoms + 1) * (self.n_photons + 1) ** 2

    @property
    def kappa(self) -> float:
        return self.alpha_t * math.sqrt(self.j * self.s)

    def m_atoms(self) -> np.ndarray:
        return np.arange(self.n_atoms + 1) - self.j

    def m_light(self) -> np.ndarray:
        return np.arange(self.n_photons + 1) - self.s


def spin_operators(two_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective spin matrices (Jx, Jy, Jz) in the ascending m basis."""
    j = two_j / 2.0
    m = np.arange(two_j + 1) - j
    ladder = np.sqrt((j - m[:-1]) * (j + m[:-1] + 1.0))
    jp = np.zeros((two_j + 1, two_j + 1))
    jp[np.arange(1, two_j + 1), np.arange(two_j)] = ladder
    jx = (jp + jp.T) / 2.0
    jy = (jp - jp.T) / 2.0j
    jz = np.diag(m)
    return jx, jy, jz


def atom_expectation(state: np.ndarray, op: np.ndarray) -> float:
    """Expectation of an atomic operator on the joint state tensor."""
    acted = np.tensordot(op, state, axes=(1, 0))
    return float(np.real(np.sum(state.conj() * acted)))


def coherent_x_amplitudes(n: int) -> np.ndarray:
    """Amplitudes of n two-level systems all polarized along +x, in the
    ascending m basis: sqrt(C(n, k)) / 2^(n/2).  Computed in log space so
    large n cannot overflow."""
    k = np.arange(n + 1)
    log_binom = (
        math.lgamma(n + 1)
        - np.array([math.lgamma(v + 1) for v in k])
        - np.array([math.lgamma(n - v + 1) for v in k])
    )
    return np.exp(0.5 * log_binom - 0.5 * n * math.log(2.0))


def prepare_x_polarized(system: ExactSystem) -> np.ndarray:
    """Initial joint state: x-polarized atoms and two x-polarized pulses."""
    atoms = coherent_x_amplitudes(system.n_atoms)
    light = coherent_x_amplitudes(system.n_photons)
    psi = atoms[:, None, None] * light[None, :, None] * light[None, None, :]
    return psi.astype(complex)


def wigner_d_matrix(two_j: int, beta: float) -> np.ndarray:
    """Rotation matrix d^j(beta) = exp(-i beta Jy) in the ascending m basis.

    Built by coupling one spin-1/2 at a time: d^j is assembled from
    d^(j-1/2) and d^(1/2) with Clebsch-Gordan weights sqrt((j +/- m)/(2j)),
    which keeps every intermediate bounded (no factorials).  The result is
    checked to be orthogonal to 1e-10.
    """
    if two_j < 0:
        raise ValueError("two_j must be >= 0")
    half = beta / 2.0
    c, s = math.cos(half), math.sin(half)
    d = np.array([[1.0]])
    for step in range(1, two_j + 1):
        n = step + 1
        idx = np.arange(n)
        cp = np.sqrt(idx / step)          # sqrt((j+m)/(2j)), zero at m=-j
        cm = np.sqrt((step - idx) / step)  # sqrt((j-m)/(2j)), zero at m=+j
        new = np.zeros((n, n))
        new[1:, 1:] += c * np.outer(cp[1:], cp[1:]) * d
        new[1:, :-1] += -s * np.outer(cp[1:], cm[:-1]) * d
        new[:-1, 1:] += s * np.outer(cm[:-1], cp[1:]) * d
        new[:-1, :-1] += c * np.outer(cm[:-1], cm[:-1]) * d
        d = new
    err = np.abs(d @ d.T - np.eye(two_j + 1)).max()
    if err > ORTHOGONALITY_TOL:
        raise RuntimeError(f"Wigner-d orthogonality check failed: {err:.3e}")
    return d


def rotation_about_x(two_j: int, phi: float) -> np.ndarray:
    """Unitary exp(-i phi Jx) in the ascending m basis: i^(m'-m) d^j(phi)."""
    n = two_j + 1
    turns = np.subtract.outer(np.arange(n), np.arange(n)) % 4
    return _QUARTER_TURNS[turns] * wigner_d_matrix(two_j, phi)


def evolve_faraday(state: np.ndarray, system: ExactSystem, pulse: int) -> np.ndarray:
    """Probe interaction: each joint amplitude picks up the diagonal phase
    exp(-i alpha_t m_S m_J).  Commutes with Jz, so all Jz moments survive."""
    if pulse not in (1, 2):
        raise ValueError(f"pulse must be 1 or 2, got {pulse!r}")
    phase = np.exp(-1j * system.alpha_t * np.outer(system.m_atoms(), system.m_light()))
    if pulse == 1:
        return state * phase[:, :, None]
    return state * phase[:, None, :]


def rotate_spin(state: np.ndarray, system: ExactSystem, phi: float) -> np.ndarray:
    """Rotate the atomic spin about x by phi."""
    u = rotation_about_x(system.n_atoms, phi)
    return np.tensordot(u, state, axes=(1, 0))


class SyMeasurement(NamedTuple):
    values: np.ndarray    # normalized outcomes m_S / sqrt(S), ascending
    probs: np.ndarray     # Born probabilities, same order
    branches: np.ndarray  # normalized post-measurement states, measured axis consumed


def measure_sy_distribution(state: np.ndarray, system: ExactSystem, pulse: int) -> SyMeasurement:
    """Projective measurement of one pulse's polarization quadrature.

    Rotates the pulse index into the quadrature eigenbasis, then applies the
    Born rule.  branches[k] is the joint state of the remaining subsystems
    given outcome k (zero where the outcome has no support).
    """
    if pulse not in (1, 2):
        raise ValueError(f"pulse must be 1 or 2, got {pulse!r}")
    u = rotation_about_x(system.n_photons, math.pi / 2.0)
    # state axes: (atoms, pulse 1, pulse 2); tensordot puts the measured
    # index first and keeps the remaining axes in order
    rotated = np.tensordot(u, state, axes=(1, pulse))
    probs = np.sum(np.abs(rotated) ** 2, axis=tuple(range(1, rotated.ndim)))
    branches = np.zeros_like(rotated)
    for k, p in enumerate(probs):
        if p > 1e-300:
            branches[k] = rotated[k] / math.sqrt(p)
    values = system.m_light() / math.sqrt(system.s)
    return SyMeasurement(values=values, probs=probs, branches=branches)


def exact_protocol_stats(system: ExactSystem, phi: float) -> dict[str, float]:
    """Exact V1, V2, V+, V-, V_cond of the two-pulse protocol at angle phi.

    The joint outcome distribution is exact: once pulse 1's index is rotated
    into its measurement basis, none of the later operations touch it, so
    enumerating collapse branches and evolving each is equivalent to evolving
    the full tensor once and reading the joint Born probabilities.
    """
    uy = rotation_about_x(system.n_photons, math.pi / 2.0)

    psi = prepare_x_polarized(system)
    psi = evolve_faraday(psi, system, 1)
    psi = np.tensordot(uy, psi, axes=(1, 1)).transpose(1, 0, 2)  # pulse 1 -> y basis
    psi = rotate_spin(psi, system, phi)
    psi = evolve_faraday(psi, system, 2)
    psi = np.tensordot(uy, psi, axes=(1, 2)).transpose(1, 2, 0)  # pulse 2 -> y basis

    joint = np.sum(np.abs(psi) ** 2, axis=0)  # P(m1, m2)
    total = joint.sum()
    if abs(total - 1.0) > 1e-10:
        raise RuntimeError(f"joint distribution sums to {total!r}")

    s_vals = system.m_light() / math.sqrt(system.s)
    p1 = joint.sum(axis=1)
    p2 = joint.sum(axis=0)
    e1 = float(p1 @ s_vals)
    e2 = float(p2 @ s_vals)
    v1 = float(p1 @ s_vals**2) - e1**2
    v2 = float(p2 @ s_vals**2) - e2**2
    e12 = float(s_vals @ joint @ s_vals)
    cov = e12 - e1 * e2

    v_plus = (v1 + v2 + 2.0 * cov) / 2.0
    v_minus = (v1 + v2 - 2.0 * cov) / 2.0
    v_cond = v2 - cov**2 / v1
    return {"v1": v1, "v2": v2, "v_plus": v_plus, "v_minus": v_minus, "v_cond": v_cond}


def gaussian_reference(kappa: float, phi: float) -> dict[str, float]:
    """Linearized-model values for the same five statistics."""
    return {
        "v1": analytics.v1(kappa),
        "v2": analytics.v2(kappa, phi),
        "v_plus": analytics.v_pm(kappa, phi, +1),
        "v_minus": analytics.v_pm(kappa, phi, -1),
        "v_cond": analytics.v_cond(kappa, phi),
    }


COMPARED_KEYS = ("v1", "v2", "v_plus", "v_minus")


def deviation_report(n_atoms: int, n_photons: int, kappa_target: float, phi: float) -> dict:
    """Exact-vs-linearized comparison for one system size and angle."""
    system = ExactSystem.for_kappa(n_atoms, n_photons, kappa_target)
    exact = exact_protocol_stats(system, phi)
    gauss = gaussian_reference(kappa_target, phi)
    deviations = {k: abs(exact[k] - gauss[k]) / abs(gauss[k]) for k in exact}
    return {
        "n_atoms": n_atoms,
        "n_photons": n_photons,
        "kappa_target": kappa_target,
        "phi": phi,
        "exact": exact,
        "gaussian": gauss,
        "deviations": deviations,
    }


def max_deviation(report: dict, keys=COMPARED_KEYS) -> float:
    """Largest relative deviation among the published-formula statistics."""
    return max(report["deviations"][k] for k in keys)
