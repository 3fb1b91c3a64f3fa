"""Per-element material laws: aging creep, Mazars damage, gel expansion."""

from .damage import (
    MazarsParams,
    crack_band_eps_ult,
    damage_weights,
    effective_strain,
    mazars_update,
    peak_tensile_stress,
    tension_energy_density,
    uniaxial_stress,
)
from .elasticity import compliance_matrix, constrained_modulus, stiffness_matrix
from .gel import GelParams, eigen_strain, gel_strain_closed_form, gel_strain_step, gel_stress
from .state import ElementState
from .viscoelastic import (
    ChainFactors,
    KelvinChainParams,
    chain_factors,
    creep_history,
    viscoelastic_step,
)

__all__ = [
    "ChainFactors",
    "ElementState",
    "GelParams",
    "KelvinChainParams",
    "MazarsParams",
    "chain_factors",
    "compliance_matrix",
    "constrained_modulus",
    "crack_band_eps_ult",
    "creep_history",
    "damage_weights",
    "effective_strain",
    "eigen_strain",
    "gel_strain_closed_form",
    "gel_strain_step",
    "gel_stress",
    "mazars_update",
    "peak_tensile_stress",
    "stiffness_matrix",
    "tension_energy_density",
    "uniaxial_stress",
    "viscoelastic_step",
]
