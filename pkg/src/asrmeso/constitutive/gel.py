"""Elastic ASR gel with an Arrhenius-driven, saturating eigen-strain."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from .elasticity import VOIGT_IDENTITY, stiffness_matrix

# value used in the reference calibration; the textbook constant is 8.314
GAS_CONSTANT_REFERENCE = 8.1344


@dataclass(frozen=True)
class GelParams:
    E_gel: float = 10e9
    nu_gel: float = 0.2
    K: float = 2500.0          # 1/day
    C: float = 50e-5           # day
    E_a: float = 43500.0       # J/mol
    R: float = GAS_CONSTANT_REFERENCE

    def __post_init__(self):
        for name in ("E_gel", "K", "C", "E_a", "R"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"gel: {name} must be positive")
        if not -1.0 < self.nu_gel < 0.5:
            raise ConfigurationError("gel: Poisson ratio out of range")

    def arrhenius(self, T):
        """exp(-E_a / (R T)), T in kelvin."""
        return math.exp(-self.E_a / (self.R * T))

    @property
    def plateau(self):
        return 0.5 * self.K * self.C


def gel_strain_step(params, state, T, dt_real):
    """Explicit Euler step of the saturating expansion law; returns ``state.eps_gel``."""
    if not T > 0 or not dt_real > 0:
        raise ConfigurationError("gel step needs T > 0 and dt_real > 0")
    rate = params.arrhenius(T)
    state.s_acc += rate * dt_real
    remaining = max((params.C - state.s_acc) / params.C, 0.0)
    state.eps_gel += params.K * remaining * rate * dt_real
    return state.eps_gel


def gel_strain_closed_form(params, s):
    """Exact gel strain as a function of the reaction integral ``s``."""
    s = np.minimum(np.asarray(s, dtype=float), params.C)
    return params.K * (s - s * s / (2.0 * params.C))


def gel_stress(params, eps_total, eps_gel):
    """E_gel D_nu (eps_total - eps_gel I). Gel neither damages nor creeps."""
    e = np.asarray(eps_total, dtype=float) - eps_gel * VOIGT_IDENTITY
    return params.E_gel * (stiffness_matrix(params.nu_gel) @ e)


def eigen_strain(eps_gel):
    return eps_gel * VOIGT_IDENTITY
