"""Solidifying Kelvin chain integrated with the exponential algorithm.

Times are physical days. Unit moduli scale with the solidified volume
v(t) = 1 / (alpha + sqrt(lambda0 / t)), evaluated at the step midpoint;
``age_offset`` is added to the simulation clock before evaluating v.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, StepError
from .elasticity import compliance_matrix, stiffness_matrix


@dataclass(frozen=True)
class KelvinChainParams:
    E0: float
    units: tuple  # ((E_mu_inf [Pa], tau_mu [days]), ...)
    alpha: float
    nu: float = 0.2
    lambda0: float = 1.0
    age_offset: float = 28.0

    def __post_init__(self):
        object.__setattr__(self, "units", tuple((float(e), float(t)) for e, t in self.units))
        if self.E0 <= 0:
            raise ConfigurationError("Kelvin chain: E0 must be positive")
        if self.alpha <= 0:
            raise ConfigurationError("Kelvin chain: alpha must be positive")
        if any(e <= 0 for e, _ in self.units):
            raise ConfigurationError("Kelvin chain: unit moduli must be positive")
        taus = [t for _, t in self.units]
        if any(t <= 0 for t in taus) or any(b <= a for a, b in zip(taus, taus[1:])):
            raise ConfigurationError("Kelvin chain: retardation times must be positive and strictly increasing")
        if self.age_offset < 0:
            raise ConfigurationError("Kelvin chain: age offset must be non-negative")

    @property
    def moduli(self):
        return np.array([e for e, _ in self.units])

    @property
    def taus(self):
        return np.array([t for _, t in self.units])

    def solidified_volume(self, t):
        """v(t) at simulation time ``t`` (days)."""
        age = t + self.age_offset
        if age <= 0:
            return 0.0
        return 1.0 / (self.alpha + math.sqrt(self.lambda0 / age))


@dataclass(frozen=True)
class ChainFactors:
    """Per-step constants of the exponential algorithm."""

    beta: np.ndarray
    lam: np.ndarray
    v_mid: float
    E_n: float
    # (1 - beta_mu) / (E_mu_inf v_mid), multiplies sigma_mu in the creep increment
    creep_coef: np.ndarray

    @classmethod
    def instantaneous(cls, params):
        """dt -> 0 limit: no creep, unit stresses pick up the full increment."""
        n = len(params.units)
        return cls(beta=np.ones(n), lam=np.ones(n), v_mid=math.nan,
                   E_n=params.E0, creep_coef=np.zeros(n))


def chain_factors(params, t_real, dt_real):
    """Exponential-algorithm constants for the step [t_real, t_real + dt_real]."""
    if not dt_real > 0:
        raise StepError(f"viscoelastic step needs dt_real > 0, got {dt_real}")
    tau = params.taus
    Einf = params.moduli
    beta = np.exp(-dt_real / tau)
    lam = (1.0 - beta) * tau / dt_real
    v_mid = params.solidified_volume(t_real + 0.5 * dt_real)
    E_n = 1.0 / (1.0 / params.E0 + np.sum((1.0 - lam) / Einf) / v_mid)
    return ChainFactors(beta=beta, lam=lam, v_mid=v_mid, E_n=E_n,
                        creep_coef=(1.0 - beta) / (Einf * v_mid))


def viscoelastic_step(params, state, d_eps, t_real, dt_real, factors=None):
    """One exponential-algorithm step for a paste element.

    Returns ``(E_n, d_eps_creep)``. ``state.sigma_mu`` and
    ``state.eps_creep`` are advanced in place using the stress increment
    E_n D_nu (d_eps - d_eps_creep).
    """
    f = factors if factors is not None else chain_factors(params, t_real, dt_real)
    d_eps = np.asarray(d_eps, dtype=float)
    if state.sigma_mu.shape != (len(params.units), 6):
        state.sigma_mu = np.zeros((len(params.units), 6))
    drive = f.creep_coef @ state.sigma_mu
    d_cr = compliance_matrix(params.nu) @ drive
    d_sigma = f.E_n * (stiffness_matrix(params.nu) @ (d_eps - d_cr))
    state.sigma_mu = f.lam[:, None] * d_sigma[None, :] + f.beta[:, None] * state.sigma_mu
    state.eps_creep = state.eps_creep + d_cr
    return f.E_n, d_cr


def creep_history(params, stress, t_end, dt_real, times=None):
    """Stress-controlled creep of one element loaded instantaneously at t = 0.

    Returns ``(t, eps)`` where ``eps`` has shape (n, 6): total strain at
    each step end (t = 0 included). If ``times`` is given, the strain is
    linearly interpolated onto those times instead.
    """
    from .state import ElementState

    stress = np.asarray(stress, dtype=float)
    n = int(round(t_end / dt_real))
    if n < 1 or not math.isclose(n * dt_real, t_end, rel_tol=1e-9):
        raise StepError("creep_history: t_end must be a positive multiple of dt_real")
    st = ElementState.initial(k0=0.0, n_units=len(params.units))
    eps0 = compliance_matrix(params.nu) @ stress / params.E0
    st.sigma_mu[:] = stress  # dt -> 0 loading step
    t = np.arange(n + 1) * dt_real
    eps = np.empty((n + 1, 6))
    eps[0] = eps0
    C = compliance_matrix(params.nu)
    for k in range(n):
        f = chain_factors(params, t[k], dt_real)
        d_cr = C @ (f.creep_coef @ st.sigma_mu)
        # stress held constant: the elastic increment vanishes
        viscoelastic_step(params, st, d_cr, t[k], dt_real, factors=f)
        eps[k + 1] = eps[k] + d_cr
    if times is None:
        return t, eps
    times = np.asarray(times, dtype=float)
    return times, np.column_stack([np.interp(times, t, eps[:, j]) for j in range(6)])
