"""Element-level force kernels for the explicit solver.

Phase ids follow :mod:`asrmeso.meshgen` (0 paste, 1 aggregate, 2 gel).
Material tables are length-3 arrays indexed by phase id. Per-element
results go to per-element rows, and nodal sums are gathered node by node
in a fixed order. The result is therefore bit-identical for any thread
count.
"""

import numpy as np
from numba import njit, prange

from .constitutive._kernels import mazars_point

PASTE, AGGREGATE, GEL = 0, 1, 2


def shape_gradients(nodes, elements):
    """Gradients of the four linear shape functions, shape (n_el, 4, 3)."""
    x = nodes[elements]
    A = np.stack([x[:, 1] - x[:, 0], x[:, 2] - x[:, 0], x[:, 3] - x[:, 0]], axis=1)
    G = np.linalg.inv(np.transpose(A, (0, 2, 1)))
    grads = np.empty((len(elements), 4, 3))
    grads[:, 1:] = G
    grads[:, 0] = -G.sum(axis=1)
    return grads


def node_element_map(elements, n_nodes):
    """CSR map node -> (element, local index), sorted by element id."""
    flat = elements.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=n_nodes)
    ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    elem = (order // 4).astype(np.int64)
    local = (order % 4).astype(np.int64)
    return ptr, elem, local


@njit(cache=True)
def _strain(u, conn, g, e, out):
    for k in range(6):
        out[k] = 0.0
    for a in range(4):
        n = conn[e, a]
        ux = u[n, 0]
        uy = u[n, 1]
        uz = u[n, 2]
        gx = g[e, a, 0]
        gy = g[e, a, 1]
        gz = g[e, a, 2]
        out[0] += ux * gx
        out[1] += uy * gy
        out[2] += uz * gz
        out[3] += uy * gz + uz * gy
        out[4] += ux * gz + uz * gx
        out[5] += ux * gy + uy * gx


@njit(parallel=True, cache=True)
def element_strains(u, conn, grads):
    out = np.empty((conn.shape[0], 6))
    for e in prange(conn.shape[0]):
        _strain(u, conn, grads, e, out[e])
    return out


@njit(parallel=True, cache=True)
def element_forces(u, conn, grads, vol, phase,
                   mod, nu, k0, at, bt, ac, bc, eps_ult, damage_on,
                   E_n, beta, lam, creep_coef, eps_gel,
                   D, kappa, eps_prev, eps_cr, sig_mu,
                   residual, work, fel):
    """Constitutive update and internal force of every element.

    ``mod`` holds the Young's modulus per phase; the paste entry is
    replaced by the incremental modulus ``E_n`` of the current step.
    ``work`` is (n_el, 12) scratch. Results go to ``fel`` (n_el, 4, 3).
    """
    n_units = beta.shape[0]
    for e in prange(conn.shape[0]):
        eps = work[e, 0:6]
        sel = work[e, 6:12]
        _strain(u, conn, grads, e, eps)
        ph = phase[e]
        if ph == GEL:
            for k in range(6):
                sel[k] = eps[k]
            sel[0] -= eps_gel
            sel[1] -= eps_gel
            sel[2] -= eps_gel
            M = mod[GEL]
        elif ph == AGGREGATE:
            for k in range(6):
                sel[k] = eps[k]
            M = mod[AGGREGATE]
        else:
            M = E_n
            v = nu[PASTE]
            # creep increment driven by the unit stresses at step start
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            s3 = 0.0
            s4 = 0.0
            s5 = 0.0
            for m in range(n_units):
                c = creep_coef[m]
                s0 += c * sig_mu[e, m, 0]
                s1 += c * sig_mu[e, m, 1]
                s2 += c * sig_mu[e, m, 2]
                s3 += c * sig_mu[e, m, 3]
                s4 += c * sig_mu[e, m, 4]
                s5 += c * sig_mu[e, m, 5]
            tr = s0 + s1 + s2
            dc0 = (1.0 + v) * s0 - v * tr
            dc1 = (1.0 + v) * s1 - v * tr
            dc2 = (1.0 + v) * s2 - v * tr
            dc3 = 2.0 * (1.0 + v) * s3
            dc4 = 2.0 * (1.0 + v) * s4
            dc5 = 2.0 * (1.0 + v) * s5
            # elastic strain increment -> effective stress increment
            d0 = eps[0] - eps_prev[e, 0] - dc0
            d1 = eps[1] - eps_prev[e, 1] - dc1
            d2 = eps[2] - eps_prev[e, 2] - dc2
            d3 = eps[3] - eps_prev[e, 3] - dc3
            d4 = eps[4] - eps_prev[e, 4] - dc4
            d5 = eps[5] - eps_prev[e, 5] - dc5
            lf = v / ((1.0 + v) * (1.0 - 2.0 * v))
            mf = 0.5 / (1.0 + v)
            dtr = d0 + d1 + d2
            ds0 = E_n * (lf * dtr + 2.0 * mf * d0)
            ds1 = E_n * (lf * dtr + 2.0 * mf * d1)
            ds2 = E_n * (lf * dtr + 2.0 * mf * d2)
            ds3 = E_n * mf * d3
            ds4 = E_n * mf * d4
            ds5 = E_n * mf * d5
            for m in range(n_units):
                b = beta[m]
                l = lam[m]
                sig_mu[e, m, 0] = l * ds0 + b * sig_mu[e, m, 0]
                sig_mu[e, m, 1] = l * ds1 + b * sig_mu[e, m, 1]
                sig_mu[e, m, 2] = l * ds2 + b * sig_mu[e, m, 2]
                sig_mu[e, m, 3] = l * ds3 + b * sig_mu[e, m, 3]
                sig_mu[e, m, 4] = l * ds4 + b * sig_mu[e, m, 4]
                sig_mu[e, m, 5] = l * ds5 + b * sig_mu[e, m, 5]
            eps_cr[e, 0] += dc0
            eps_cr[e, 1] += dc1
            eps_cr[e, 2] += dc2
            eps_cr[e, 3] += dc3
            eps_cr[e, 4] += dc4
            eps_cr[e, 5] += dc5
            for k in range(6):
                eps_prev[e, k] = eps[k]
                sel[k] = eps[k] - eps_cr[e, k]

        if damage_on[ph]:
            d, kap, _, _ = mazars_point(sel, nu[ph], k0[ph], at[ph], bt[ph], ac[ph],
                                        bc[ph], eps_ult[ph], D[e], kappa[e])
            D[e] = d
            kappa[e] = kap
            dm = min(d, 1.0 - residual)
        else:
            dm = 0.0

        v = nu[ph]
        lf = v / ((1.0 + v) * (1.0 - 2.0 * v))
        mf = 0.5 / (1.0 + v)
        scale = (1.0 - dm) * M
        tr = sel[0] + sel[1] + sel[2]
        sxx = scale * (lf * tr + 2.0 * mf * sel[0])
        syy = scale * (lf * tr + 2.0 * mf * sel[1])
        szz = scale * (lf * tr + 2.0 * mf * sel[2])
        syz = scale * mf * sel[3]
        sxz = scale * mf * sel[4]
        sxy = scale * mf * sel[5]
        V = vol[e]
        for a in range(4):
            gx = grads[e, a, 0]
            gy = grads[e, a, 1]
            gz = grads[e, a, 2]
            fel[e, a, 0] = V * (sxx * gx + sxy * gy + sxz * gz)
            fel[e, a, 1] = V * (sxy * gx + syy * gy + syz * gz)
            fel[e, a, 2] = V * (sxz * gx + syz * gy + szz * gz)


@njit(parallel=True, cache=True)
def gather(fel, ptr, elem, local, out):
    """out[n] = sum of element contributions to node n, in element order."""
    for n in prange(ptr.shape[0] - 1):
        fx = 0.0
        fy = 0.0
        fz = 0.0
        for j in range(ptr[n], ptr[n + 1]):
            e = elem[j]
            a = local[j]
            fx += fel[e, a, 0]
            fy += fel[e, a, 1]
            fz += fel[e, a, 2]
        out[n, 0] = fx
        out[n, 1] = fy
        out[n, 2] = fz
