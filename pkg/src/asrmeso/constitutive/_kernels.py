"""Scalar material-point kernels shared by the Python API and the solver.

Voigt order is (xx, yy, zz, yz, xz, xy) with engineering shear strains.
Everything here is compiled with numba and works on unit-modulus
operators; callers scale by the relevant Young's modulus.
"""

import math

import numpy as np
from numba import njit

# relative cut below which a principal stress is treated as zero when
# splitting into tensile/compressive parts
STRESS_SPLIT_TOL = 1e-12


@njit(cache=True)
def apply_unit_stiffness(nu, e, out):
    """out = D_nu @ e for unit Young's modulus."""
    lam = nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = 0.5 / (1.0 + nu)
    tr = e[0] + e[1] + e[2]
    out[0] = lam * tr + 2.0 * mu * e[0]
    out[1] = lam * tr + 2.0 * mu * e[1]
    out[2] = lam * tr + 2.0 * mu * e[2]
    out[3] = mu * e[3]
    out[4] = mu * e[4]
    out[5] = mu * e[5]


@njit(cache=True)
def apply_unit_compliance(nu, s, out):
    """out = C_nu @ s for unit Young's modulus."""
    tr = s[0] + s[1] + s[2]
    out[0] = (1.0 + nu) * s[0] - nu * tr
    out[1] = (1.0 + nu) * s[1] - nu * tr
    out[2] = (1.0 + nu) * s[2] - nu * tr
    out[3] = 2.0 * (1.0 + nu) * s[3]
    out[4] = 2.0 * (1.0 + nu) * s[4]
    out[5] = 2.0 * (1.0 + nu) * s[5]


@njit(cache=True)
def principal_values(e):
    """Eigenvalues of the symmetric tensor behind a Voigt strain, descending."""
    a11 = e[0]
    a22 = e[1]
    a33 = e[2]
    a23 = 0.5 * e[3]
    a13 = 0.5 * e[4]
    a12 = 0.5 * e[5]
    p1 = a12 * a12 + a13 * a13 + a23 * a23
    q = (a11 + a22 + a33) / 3.0
    b11 = a11 - q
    b22 = a22 - q
    b33 = a33 - q
    p2 = b11 * b11 + b22 * b22 + b33 * b33 + 2.0 * p1
    scale = max(abs(a11), abs(a22), abs(a33), math.sqrt(p1))
    if p1 <= (1e-15 * scale) ** 2:
        # diagonal to working precision; sort descending
        l1, l2, l3 = a11, a22, a33
        if l1 < l2:
            l1, l2 = l2, l1
        if l2 < l3:
            l2, l3 = l3, l2
        if l1 < l2:
            l1, l2 = l2, l1
        return l1, l2, l3
    p = math.sqrt(p2 / 6.0)
    c11 = b11 / p
    c22 = b22 / p
    c33 = b33 / p
    c12 = a12 / p
    c13 = a13 / p
    c23 = a23 / p
    det = (c11 * (c22 * c33 - c23 * c23)
           - c12 * (c12 * c33 - c23 * c13)
           + c13 * (c12 * c23 - c22 * c13))
    r = 0.5 * det
    if r <= -1.0:
        phi = math.pi / 3.0
    elif r >= 1.0:
        phi = 0.0
    else:
        phi = math.acos(r) / 3.0
    l1 = q + 2.0 * p * math.cos(phi)
    l3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    l2 = 3.0 * q - l1 - l3
    return l1, l2, l3


@njit(cache=True)
def tension_weight(l1, l2, l3, nu):
    """alpha_t from principal elastic strains (split via principal stresses).

    Returns 0 when no principal strain is positive.
    """
    p1 = max(l1, 0.0)
    p2 = max(l2, 0.0)
    p3 = max(l3, 0.0)
    et2 = p1 * p1 + p2 * p2 + p3 * p3
    if et2 == 0.0:
        return 0.0
    lam = nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu2 = 1.0 / (1.0 + nu)
    tr = l1 + l2 + l3
    s1 = lam * tr + mu2 * l1
    s2 = lam * tr + mu2 * l2
    s3 = lam * tr + mu2 * l3
    smax = max(abs(s1), abs(s2), abs(s3))
    cut = STRESS_SPLIT_TOL * smax
    t1 = s1 if s1 > cut else 0.0
    t2 = s2 if s2 > cut else 0.0
    t3 = s3 if s3 > cut else 0.0
    ttr = t1 + t2 + t3
    et1 = (1.0 + nu) * t1 - nu * ttr
    et2_ = (1.0 + nu) * t2 - nu * ttr
    et3 = (1.0 + nu) * t3 - nu * ttr
    a = (et1 * p1 + et2_ * p2 + et3 * p3) / et2
    if a < 0.0:
        a = 0.0
    elif a > 1.0:
        a = 1.0
    return a


@njit(cache=True)
def branch_damage(kappa, k0, a, b):
    """Mazars tensile/compressive damage branch evaluated at kappa."""
    if kappa <= k0:
        return 0.0
    d = 1.0 - k0 * (1.0 - a) / kappa - a * math.exp(-b * (kappa - k0))
    if d < 0.0:
        return 0.0
    if d > 1.0:
        return 1.0
    return d


@njit(cache=True)
def mazars_point(e, nu, k0, at, bt, ac, bc, eps_ult, d_old, kappa_old):
    """Irreversible Mazars update at one material point.

    Returns (D, kappa, alpha_t, loading). ``loading`` is True when the
    effective strain exceeded the stored threshold and kappa moved.
    """
    # Frobenius norm bounds the effective strain from above
    frob2 = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]
             + 0.5 * (e[3] * e[3] + e[4] * e[4] + e[5] * e[5]))
    if frob2 <= kappa_old * kappa_old:
        return d_old, kappa_old, -1.0, False
    l1, l2, l3 = principal_values(e)
    p1 = max(l1, 0.0)
    p2 = max(l2, 0.0)
    p3 = max(l3, 0.0)
    et = math.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
    if et <= kappa_old:
        return d_old, kappa_old, -1.0, False
    kappa = et
    alpha_t = tension_weight(l1, l2, l3, nu)
    if kappa >= eps_ult:
        return 1.0, kappa, alpha_t, True
    dt_ = branch_damage(kappa, k0, at, bt)
    dc_ = branch_damage(kappa, k0, ac, bc)
    d = alpha_t * dt_ + (1.0 - alpha_t) * dc_
    if d < d_old:
        d = d_old
    return d, kappa, alpha_t, True


@njit(cache=True)
def uniaxial_tension_stress(eps, E, k0, at, bt):
    """Uniaxial tensile stress (1 - D_t(eps)) E eps of the softening curve."""
    if eps <= k0:
        return E * eps
    return E * (k0 * (1.0 - at) + at * eps * math.exp(-bt * (eps - k0)))


def principal_values_py(e):
    return np.array(principal_values(np.asarray(e, dtype=np.float64)))
