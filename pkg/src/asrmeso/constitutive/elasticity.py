"""Isotropic unit-modulus operators in Voigt notation.

Order is (xx, yy, zz, yz, xz, xy); shear strains are engineering strains,
so ``compliance_matrix(nu) @ stiffness_matrix(nu) == I``.
"""

import numpy as np

VOIGT_IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


def compliance_matrix(nu):
    c = np.zeros((6, 6))
    c[:3, :3] = -nu
    np.fill_diagonal(c[:3, :3], 1.0)
    c[3:, 3:] = np.eye(3) * 2.0 * (1.0 + nu)
    return c


def stiffness_matrix(nu):
    lam = nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = 0.5 / (1.0 + nu)
    d = np.zeros((6, 6))
    d[:3, :3] = lam
    d[:3, :3] += np.eye(3) * 2.0 * mu
    d[3:, 3:] = np.eye(3) * mu
    return d


def constrained_modulus(E, nu):
    """P-wave modulus E(1 - nu) / ((1 + nu)(1 - 2 nu))."""
    return E * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu))


def to_tensor(v):
    """Voigt strain (engineering shear) -> symmetric 3x3 tensor."""
    xx, yy, zz, yz, xz, xy = v
    return np.array([[xx, 0.5 * xy, 0.5 * xz],
                     [0.5 * xy, yy, 0.5 * yz],
                     [0.5 * xz, 0.5 * yz, zz]])


def from_tensor(t):
    """Symmetric 3x3 strain tensor -> Voigt with engineering shear."""
    t = np.asarray(t, dtype=float)
    return np.array([t[0, 0], t[1, 1], t[2, 2],
                     2.0 * t[1, 2], 2.0 * t[0, 2], 2.0 * t[0, 1]])


def stress_to_tensor(s):
    xx, yy, zz, yz, xz, xy = s
    return np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])
