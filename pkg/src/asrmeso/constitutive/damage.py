"""Mazars scalar damage with a crack-band ultimate-strain cap."""

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import CalibrationError, ConfigurationError
from . import _kernels as K
from .elasticity import stiffness_matrix


@dataclass(frozen=True)
class MazarsParams:
    """Mazars parameters of one phase.

    ``eps_ult`` is the strain beyond which the element is fully broken.
    Leave it ``None`` and call :meth:`calibrated` to derive it from the
    fracture energy ``G_f`` (N/m) for a given element size.
    """

    E: float
    nu: float
    k0: float
    A_t: float
    B_t: float
    A_c: float
    B_c: float
    G_f: float | None = None
    eps_ult: float | None = None

    def __post_init__(self):
        if self.E <= 0 or self.k0 <= 0:
            raise ConfigurationError("Mazars: E and k0 must be positive")
        if not -1.0 < self.nu < 0.5:
            raise ConfigurationError(f"Mazars: Poisson ratio {self.nu} out of range")
        if self.B_t <= 0 or self.B_c <= 0:
            raise ConfigurationError("Mazars: B_t and B_c must be positive")
        if 1.0 / self.B_t <= self.k0:
            raise ConfigurationError(
                f"Mazars: peak strain 1/B_t={1.0 / self.B_t:g} must exceed k0={self.k0:g}")
        if self.G_f is not None and self.G_f <= 0:
            raise ConfigurationError("Mazars: G_f must be positive")
        if self.eps_ult is not None and self.eps_ult <= self.k0:
            raise ConfigurationError(
                f"Mazars: eps_ult={self.eps_ult:g} must exceed k0={self.k0:g}")

    def calibrated(self, h_mm):
        """Copy with ``eps_ult`` set by the crack-band rule for element size ``h_mm``."""
        if self.G_f is None:
            raise ConfigurationError("Mazars: crack-band calibration needs G_f")
        return replace(self, eps_ult=crack_band_eps_ult(self.G_f, h_mm, self))

    @property
    def cap(self):
        return math.inf if self.eps_ult is None else self.eps_ult


def damage_weights(eps, nu):
    """(alpha_t, alpha_c) for a Voigt elastic strain.

    Both are zero when no principal strain is positive; otherwise they
    sum to one. ``nu`` enters through the principal-stress split.
    """
    l1, l2, l3 = K.principal_values(np.asarray(eps, dtype=float))
    if max(l1, 0.0) ** 2 + max(l2, 0.0) ** 2 + max(l3, 0.0) ** 2 == 0.0:
        return 0.0, 0.0
    a = K.tension_weight(l1, l2, l3, nu)
    return a, 1.0 - a


def effective_strain(eps):
    """sqrt of the sum of squared positive principal strains."""
    l = K.principal_values(np.asarray(eps, dtype=float))
    return math.sqrt(sum(max(x, 0.0) ** 2 for x in l))


def mazars_update(params, state, eps_elastic, E_n):
    """Advance the damage history of ``state`` and return ``(D, stress)``.

    ``state.D`` and ``state.kappa`` are updated in place. Damage never
    decreases, and is set to exactly 1 once ``kappa`` reaches ``eps_ult``.
    """
    e = np.ascontiguousarray(eps_elastic, dtype=float)
    d, kappa, _, _ = K.mazars_point(
        e, params.nu, params.k0, params.A_t, params.B_t, params.A_c,
        params.B_c, params.cap, state.D, state.kappa)
    state.D = d
    state.kappa = kappa
    stress = (1.0 - d) * E_n * (stiffness_matrix(params.nu) @ e)
    return d, stress


def uniaxial_stress(params, eps):
    """Uniaxial tension curve (1 - D_t) E eps, ignoring the ``eps_ult`` cap."""
    return K.uniaxial_tension_stress(float(eps), params.E, params.k0, params.A_t, params.B_t)


def peak_tensile_stress(params):
    """Closed-form maximum of the uniaxial tension curve, reached at eps = 1/B_t."""
    E, k0, a, b = params.E, params.k0, params.A_t, params.B_t
    return E * (k0 * (1.0 - a) + (a / b) * math.exp(-(1.0 - b * k0)))


def tension_energy_density(params, eps):
    """Closed-form integral of the uniaxial tension curve from 0 to ``eps`` (J/m^3)."""
    E, k0, a, b = params.E, params.k0, params.A_t, params.B_t
    if eps <= k0:
        return 0.5 * E * eps * eps
    tail = (k0 / b + 1.0 / b**2) - (eps / b + 1.0 / b**2) * math.exp(-b * (eps - k0))
    return 0.5 * E * k0 * k0 + E * k0 * (1.0 - a) * (eps - k0) + E * a * tail


def _energy_asymptote(params):
    if params.A_t < 1.0:
        return math.inf
    if params.A_t == 1.0:
        return 0.5 * params.E * params.k0**2 + params.E * (params.k0 / params.B_t + 1.0 / params.B_t**2)
    # stress changes sign past the peak; energy peaks there
    lo, hi = 1.0 / params.B_t, 2.0 / params.B_t
    while uniaxial_stress(params, hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if uniaxial_stress(params, mid) > 0:
            lo = mid
        else:
            hi = mid
    return tension_energy_density(params, lo)


def crack_band_eps_ult(G_f, h, params, rtol=1e-12):
    """Ultimate strain such that ``h * integral(sigma) == G_f``.

    ``G_f`` in N/m, ``h`` in mm. Bracket by doubling, then bisect.
    """
    if G_f <= 0 or h <= 0:
        raise ConfigurationError("crack band: G_f and h must be positive")
    target = G_f / (h * 1e-3)
    limit = _energy_asymptote(params)
    if target >= limit:
        raise CalibrationError(
            f"crack band: G_f/h = {target:g} J/m^3 exceeds the curve's "
            f"energy asymptote {limit:g} J/m^3")
    lo = 0.0
    hi = max(params.k0, 1.0 / params.B_t)
    while tension_energy_density(params, hi) < target:
        lo = hi
        hi *= 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if tension_energy_density(params, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
