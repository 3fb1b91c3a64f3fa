from dataclasses import dataclass, field

import numpy as np


@dataclass
class ElementState:
    """History variables of one element.

    ``kappa`` starts at the damage threshold ``k0`` of the element's
    material; ``sigma_mu`` holds one Voigt stress per Kelvin unit.
    """

    kappa: float
    D: float = 0.0
    sigma_mu: np.ndarray = field(default_factory=lambda: np.zeros((0, 6)))
    eps_creep: np.ndarray = field(default_factory=lambda: np.zeros(6))
    eps_gel: float = 0.0
    s_acc: float = 0.0

    @classmethod
    def initial(cls, k0, n_units=0):
        return cls(kappa=float(k0), sigma_mu=np.zeros((n_units, 6)))
