"""Domain types shared by every module: physical parameters, the Gaussian
state of the spin/light quadratures, experiment configuration, and result
records.

Quadrature ordering is fixed once and for all as

    (Jy, Jz, S1y, S1z, S2y, S2z)

so that the linear maps and the conditioning step can use stable indices.
All types are immutable values after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

# Canonical coordinate indices into GaussianState.mean / .cov
J_Y, J_Z, S1_Y, S1_Z, S2_Y, S2_Z = range(6)
N_COORDS = 6
COORD_NAMES = ("Jy", "Jz", "S1y", "S1z", "S2y", "S2z")

SYMMETRY_ATOL = 1e-12
PSD_EIGV_FLOOR = -1e-10


@dataclass(frozen=True)
class PhysicalParams:
    """Atomic and optical constants of the probe interface.

    All frequencies (gamma, delta, delta0) are angular, in rad/s.  Use
    :func:`spinqnd.coupling.two_pi_mhz` to build them from MHz values.
    """

    gamma: float        # natural full linewidth (rad/s)
    sigma0: float       # photon-absorption cross section (m^2)
    w0: float           # probe beam waist (m)
    delta: float        # probe detuning (rad/s), may be negative
    delta0: float       # excited-state hyperfine splitting (rad/s)
    n_atoms: float      # mean atom number per run
    n_photons: float    # mean photon number per probe pulse
    epsilon_A: float = 0.0  # atomic loss per probe pass, in [0, 1/2)

    @property
    def j(self) -> float:
        """Collective spin length J = N_A / 2."""
        return self.n_atoms / 2.0

    @property
    def s(self) -> float:
        """Stokes length S = N_L / 2 of one probe pulse."""
        return self.n_photons / 2.0


def validate_params(p: PhysicalParams) -> list[str]:
    """Return all invariant violations of a PhysicalParams (empty if valid)."""
    out = []
    if not p.gamma > 0:
        out.append("gamma must be > 0")
    if not p.sigma0 > 0:
        out.append("sigma0 must be > 0")
    if not p.w0 > 0:
        out.append("w0 must be > 0")
    if not p.n_atoms >= 1:
        out.append("n_atoms must be >= 1")
    if not p.n_photons >= 1:
        out.append("n_photons must be >= 1")
    if not (0.0 <= p.epsilon_A < 0.5):
        out.append("epsilon_A out of [0, 1/2)")
    for name in ("gamma", "sigma0", "w0", "delta", "delta0"):
        if not math.isfinite(getattr(p, name)):
            out.append(f"{name} must be finite")
    return out


@dataclass(frozen=True)
class RotationPulse:
    """Fictitious-magnetic-field pulse: spin rotation rate and duration."""

    rate: float   # rad/s
    width: float  # s

    def angle(self) -> float:
        """Total rotation angle rate * width, in rad."""
        return self.rate * self.width

    def violations(self) -> list[str]:
        out = []
        if not self.rate >= 0:
            out.append("rate must be >= 0")
        if not self.width >= 0:
            out.append("width must be >= 0")
        return out


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of the six normalized quadratures.

    Arrays are copied on construction and frozen, so states can be shared
    freely; every engine operation returns a new state.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.shape != (N_COORDS,) or cov.shape != (N_COORDS, N_COORDS):
            raise ValueError(
                f"expected mean shape ({N_COORDS},) and cov shape "
                f"({N_COORDS}, {N_COORDS}), got {mean.shape} and {cov.shape}"
            )
        if np.abs(cov - cov.T).max() > SYMMETRY_ATOL:
            raise ValueError("covariance matrix is not symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def fresh(cls) -> "GaussianState":
        """Initial x-polarized coherent state: zero mean, cov = I/2."""
        return cls(np.zeros(N_COORDS), 0.5 * np.eye(N_COORDS))

    @classmethod
    def _adopt(cls, mean: np.ndarray, cov: np.ndarray) -> "GaussianState":
        """Wrap freshly allocated, already-symmetrized arrays without the
        copy and symmetry check.  Engine-internal hot path only."""
        mean.setflags(write=False)
        cov.setflags(write=False)
        state = object.__new__(cls)
        object.__setattr__(state, "mean", mean)
        object.__setattr__(state, "cov", cov)
        return state

    def check_positive(self) -> None:
        """Raise if the covariance has an eigenvalue below the PSD floor."""
        lo = np.linalg.eigvalsh(self.cov).min()
        if lo < PSD_EIGV_FLOOR:
            raise ValueError(f"covariance not positive semidefinite (min eig {lo:.3e})")


_CONFIG_FIELDS = ("kappa", "angles", "shots", "loss_epsilon", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo campaign: coupling, rotation angles, shots per angle."""

    kappa: float
    angles: tuple[float, ...]
    shots: int
    loss_epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))

    def to_json(self) -> str:
        return json.dumps(
            {
                "kappa": self.kappa,
                "angles": list(self.angles),
                "shots": self.shots,
                "loss_epsilon": self.loss_epsilon,
                "seed": self.seed,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("config document must be a JSON object")
        unknown = sorted(set(doc) - set(_CONFIG_FIELDS))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        missing = sorted(set(_CONFIG_FIELDS) - set(doc))
        if missing:
            raise ValueError(f"missing config keys: {', '.join(missing)}")
        return cls(
            kappa=float(doc["kappa"]),
            angles=tuple(float(a) for a in doc["angles"]),
            shots=int(doc["shots"]),
            loss_epsilon=float(doc["loss_epsilon"]),
            seed=int(doc["seed"]),
        )


def validate(config: ExperimentConfig) -> list[str]:
    """Return every invariant violation of an ExperimentConfig.

    Never raises: an empty list means the config is valid.
    """
    out = []
    if not math.isfinite(config.kappa):
        out.append("kappa must be finite")
    if len(config.angles) == 0:
        out.append("angles must be nonempty")
    if any(not math.isfinite(a) for a in config.angles):
        out.append("angles must be finite")
    if config.shots < 2:
        out.append("shots must be >= 2")
    if not (0.0 <= config.loss_epsilon < 1.0):
        out.append("loss_epsilon out of [0,1)")
    if not (0 <= config.seed < 2**64):
        out.append("seed must be a 64-bit unsigned integer")
    return out


@dataclass(frozen=True)
class MeasurementRecord:
    """One protocol shot: rotation angle and the two measured Stokes values."""

    phi: float
    s1: float
    s2: float


@dataclass(frozen=True)
class VarianceReport:
    """Estimated variances for one rotation angle, with statistical errors.

    Error bars follow Delta V = sqrt(2/N_m) * V.  ``v_cond`` and ``g_used``
    are None for coherent-control runs, where the conditional variance has
    no meaning (``control`` is then True).
    """

    phi: float
    v1: float
    v2: float
    v_plus: float
    v_minus: float
    v_cond: float | None
    g_used: float | None
    dv1: float
    dv2: float
    dv_plus: float
    dv_minus: float
    shots: int
    control: bool = False

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
