"""Explicit central-difference dynamics driven quasi-statically.

Internally everything is SI: node coordinates are converted from mm to
m, stresses are Pa, masses kg, simulation time s. Physical (material)
time is in days and is tied to simulation time by a linear mapping, so
the explicit step count is decoupled from the 100-day material clocks.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _assembly as A
from .constitutive import ChainFactors, GelParams, KelvinChainParams, MazarsParams, chain_factors
from .constitutive.elasticity import constrained_modulus, stiffness_matrix
from .errors import ConfigurationError, NumericalFailure
from .meshgen import AGGREGATE, GEL, PASTE, boundary_facets

log = logging.getLogger(__name__)

MM = 1e-3
KELVIN = 273.15


def map_time(n, dt, T_sim, T_real):
    """Physical step and physical time at the end of simulation step ``n``."""
    if not (dt > 0 and T_sim > 0 and T_real > 0):
        raise ConfigurationError("map_time: dt, T_sim and T_real must be positive")
    dt_real = dt * T_real / T_sim
    return (n + 1) * dt_real, dt_real


def lumped_mass(mesh, densities, mass_scaling=1.0):
    """Nodal masses (kg): each element gives rho V / 4 to its four nodes.

    ``densities`` maps phase id -> kg/m^3.
    """
    rho = np.empty(mesh.n_elements)
    for ph in np.unique(mesh.phase):
        d = densities[int(ph)]
        if not d > 0:
            raise ConfigurationError(f"density of phase {ph} must be positive")
        rho[mesh.phase == ph] = d
    m_el = rho * mesh.element_volume * MM**3 * mass_scaling
    return np.bincount(mesh.elements.ravel(), weights=np.repeat(0.25 * m_el, 4),
                       minlength=mesh.n_nodes)


def wave_speed(E, nu, rho):
    """Dilatational wave speed sqrt(M / rho) with M the constrained modulus."""
    return math.sqrt(constrained_modulus(E, nu) / rho)


def critical_dt(length, E, nu, rho, safety=0.8):
    """safety * length / c for a length in metres."""
    return safety * length / wave_speed(E, nu, rho)


def stable_dt(mesh, materials, densities, mass_scaling=1.0, safety=0.8):
    """CFL step over the phases present, using the smallest element altitude."""
    h_min = mesh.min_altitude() * MM
    speeds = []
    for ph, (E, nu) in materials.elastic_constants().items():
        if np.any(mesh.phase == ph):
            speeds.append(wave_speed(E, nu, densities[ph] * mass_scaling))
    return safety * h_min / max(speeds)


@dataclass(frozen=True)
class TemperatureSchedule:
    """Piecewise-constant ambient temperature; ``steps`` = ((t_start_days, T_kelvin), ...)."""

    steps: tuple = ((0.0, 303.15),)

    def __post_init__(self):
        s = tuple((float(t), float(T)) for t, T in self.steps)
        if not s or s[0][0] > 0 or any(T <= 0 for _, T in s):
            raise ConfigurationError("temperature schedule must start at t <= 0 with positive kelvin values")
        if any(b[0] <= a[0] for a, b in zip(s, s[1:])):
            raise ConfigurationError("temperature schedule times must increase")
        object.__setattr__(self, "steps", s)

    @classmethod
    def constant_celsius(cls, T_c):
        return cls(((0.0, T_c + KELVIN),))

    def __call__(self, t):
        T = self.steps[0][1]
        for t0, Tk in self.steps:
            if t >= t0:
                T = Tk
        return T


@dataclass
class Materials:
    paste: MazarsParams
    aggregate: MazarsParams
    gel: GelParams
    chain: KelvinChainParams | None = None
    damage: bool = True
    creep: bool = True

    def __post_init__(self):
        if self.creep and self.chain is None:
            raise ConfigurationError("creep enabled but no Kelvin chain given")

    def elastic_constants(self):
        E_paste = self.chain.E0 if (self.creep and self.chain) else self.paste.E
        return {PASTE: (E_paste, self.paste.nu), AGGREGATE: (self.aggregate.E, self.aggregate.nu),
                GEL: (self.gel.E_gel, self.gel.nu_gel)}

    def calibrated(self, h_mm):
        """Fill any missing ``eps_ult`` by the crack-band rule."""
        paste = self.paste if self.paste.eps_ult is not None else self.paste.calibrated(h_mm)
        agg = self.aggregate if self.aggregate.eps_ult is not None else self.aggregate.calibrated(h_mm)
        return Materials(paste=paste, aggregate=agg, gel=self.gel, chain=self.chain,
                         damage=self.damage, creep=self.creep)


@dataclass(frozen=True)
class BoundaryCondition:
    """``kind`` is ``"fixed"`` or ``"traction"``.

    Regions: a plane ``axis`` + ``side`` ("min"/"max"), or a single node
    nearest to ``point`` (mm). ``component`` is the constrained / loaded
    direction; ``value`` is a displacement (m) or a traction (Pa).
    """

    kind: str
    component: int
    value: float = 0.0
    axis: int | None = None
    side: str = "min"
    point: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "traction"):
            raise ConfigurationError(f"boundary condition kind {self.kind!r} unknown")
        if self.component not in (0, 1, 2):
            raise ConfigurationError("boundary condition component must be 0, 1 or 2")
        if (self.axis is None) == (self.point is None):
            raise ConfigurationError("boundary condition needs exactly one of axis/point")
        if self.kind == "traction" and self.point is not None:
            raise ConfigurationError("tractions act on planes, not points")
        if self.side not in ("min", "max"):
            raise ConfigurationError("side must be 'min' or 'max'")

    def plane_coordinate(self, mesh):
        return 0.0 if self.side == "min" else mesh.box[self.axis]

    def nodes(self, mesh):
        if self.point is not None:
            d = np.linalg.norm(mesh.nodes - np.asarray(self.point, dtype=float), axis=1)
            return np.array([int(np.argmin(d))])
        x = self.plane_coordinate(mesh)
        ids = np.flatnonzero(np.abs(mesh.nodes[:, self.axis] - x) <= 1e-9 * max(1.0, abs(x)))
        if ids.size == 0:
            raise ConfigurationError(f"boundary region {self} selects no nodes")
        return ids


def minimal_restraint(box):
    """Six single-node constraints that remove rigid-body motion only."""
    lx, ly, _ = box
    bcs = [BoundaryCondition("fixed", c, point=(0.0, 0.0, 0.0)) for c in range(3)]
    bcs += [BoundaryCondition("fixed", c, point=(lx, 0.0, 0.0)) for c in (1, 2)]
    bcs.append(BoundaryCondition("fixed", 2, point=(0.0, ly, 0.0)))
    return bcs


def symmetry_restraint():
    """Rollers on the three coordinate planes through the origin."""
    return [BoundaryCondition("fixed", a, axis=a, side="min") for a in range(3)]


@dataclass
class SolverConfig:
    T_real: float = 450.0                 # days
    n_steps: int | None = 20000
    T_sim: float | None = None            # s; used when n_steps is None
    dt: float | str = "auto"
    safety: float = 0.8
    densities: dict = field(default_factory=lambda: {PASTE: 2400.0, AGGREGATE: 2400.0, GEL: 2400.0})
    damping: float | str = "auto"         # 1/s, mass proportional
    damping_ratio: float = 0.25           # used by "auto"
    remove_rigid_modes: bool = False      # project rigid-body motion out of u and v each step
    mass_scaling: float = 1.0
    temperature: TemperatureSchedule = field(default_factory=TemperatureSchedule)
    residual_stiffness: float = 1e-6
    preload_ramp: float = 0.02            # fraction of n_steps
    preload_hold: float = 0.02
    record_every: int | None = None       # steps; default n_steps // 500

    def __post_init__(self):
        if not self.T_real > 0:
            raise ConfigurationError("T_real must be positive")
        if self.n_steps is None and not (self.T_sim and self.T_sim > 0):
            raise ConfigurationError("give n_steps or a positive T_sim")
        if self.n_steps is not None and self.n_steps < 1:
            raise ConfigurationError("n_steps must be >= 1")
        if not self.mass_scaling > 0:
            raise ConfigurationError("mass_scaling must be positive")
        if not 0 <= self.residual_stiffness < 1:
            raise ConfigurationError("residual_stiffness must lie in [0, 1)")


class ExplicitSolver:
    """Central-difference integration of the meso-scale specimen.

    State arrays are public: ``u`` and ``v`` (n_nodes, 3) in m and m/s,
    ``D`` and ``kappa`` per element, ``eps_gel`` and ``s_acc`` scalars
    shared by all gel elements.
    """

    def __init__(self, mesh, materials, config, bcs=()):
        self.mesh = mesh
        self.config = config
        self.materials = materials.calibrated(mesh.h)
        self.bcs = list(bcs)
        self._setup_geometry()
        self._setup_materials()
        self._setup_bcs()
        self._setup_time()
        self.reset()

    # -- setup -------------------------------------------------------------
    def _setup_geometry(self):
        m = self.mesh
        self.x0 = m.nodes * MM
        self.conn = np.ascontiguousarray(m.elements, dtype=np.int64)
        self.grads = A.shape_gradients(self.x0, self.conn)
        self.vol = m.element_volume * MM**3
        self.phase = np.ascontiguousarray(m.phase, dtype=np.int64)
        self.ptr, self.n2e, self.n2l = A.node_element_map(self.conn, m.n_nodes)

    def _setup_materials(self):
        mat = self.materials
        p, a = mat.paste, mat.aggregate
        self.mod = np.array([p.E, a.E, mat.gel.E_gel])
        self.nu = np.array([p.nu, a.nu, mat.gel.nu_gel])
        self.k0 = np.array([p.k0, a.k0, 1.0])
        self.at = np.array([p.A_t, a.A_t, 0.0])
        self.bt = np.array([p.B_t, a.B_t, 1.0])
        self.ac = np.array([p.A_c, a.A_c, 0.0])
        self.bc_ = np.array([p.B_c, a.B_c, 1.0])
        self.eps_ult = np.array([p.cap, a.cap, math.inf])
        self.damage_on = np.array([mat.damage, mat.damage, False])
        if mat.creep:
            if not math.isclose(mat.chain.nu, p.nu):
                raise ConfigurationError("paste Poisson ratio differs between chain and damage blocks")
            self.n_units = len(mat.chain.units)
        else:
            self.n_units = 0
        self._elastic_paste = ChainFactors(beta=np.ones(self.n_units), lam=np.ones(self.n_units),
                                           v_mid=math.nan, E_n=p.E if not mat.creep else mat.chain.E0,
                                           creep_coef=np.zeros(self.n_units))

    def _setup_bcs(self):
        m = self.mesh
        self.fixed = np.zeros((m.n_nodes, 3), dtype=bool)
        self.fixed_value = np.zeros((m.n_nodes, 3))
        self.f_traction = np.zeros((m.n_nodes, 3))
        for bc in self.bcs:
            if bc.kind == "fixed":
                ids = bc.nodes(m)
                self.fixed[ids, bc.component] = True
                self.fixed_value[ids, bc.component] = bc.value
            else:
                tri = boundary_facets(m, bc.axis, bc.plane_coordinate(m))
                if len(tri) == 0:
                    raise ConfigurationError(f"traction region {bc} has no facets")
                x = self.x0[tri]
                area = 0.5 * np.linalg.norm(np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]), axis=1)
                np.add.at(self.f_traction[:, bc.component], tri.ravel(),
                          np.repeat(bc.value * area / 3.0, 3))
        self.has_traction = bool(np.any(self.f_traction))

    def _setup_time(self):
        cfg = self.config
        self.mass = lumped_mass(self.mesh, cfg.densities, cfg.mass_scaling)
        if np.any(self.mass <= 0):
            raise ConfigurationError("mesh has nodes without mass")
        self.dt_stable = stable_dt(self.mesh, self.materials, cfg.densities, cfg.mass_scaling, cfg.safety)
        self.dt = self.dt_stable if cfg.dt == "auto" else float(cfg.dt)
        if self.dt > self.dt_stable / cfg.safety:
            log.warning("dt=%g exceeds the CFL limit %g", self.dt, self.dt_stable / cfg.safety)
        if cfg.n_steps is not None:
            self.n_steps = int(cfg.n_steps)
        else:
            self.n_steps = int(math.ceil(cfg.T_sim / self.dt))
        self.T_sim = self.n_steps * self.dt
        _, self.dt_real = map_time(0, self.dt, self.T_sim, cfg.T_real)
        self.damping = self.auto_damping() if cfg.damping == "auto" else float(cfg.damping)
        self._rigid = self._rigid_modes() if cfg.remove_rigid_modes else None
        self.record_every = cfg.record_every or max(1, self.n_steps // 500)

    def auto_damping(self):
        """2 zeta omega_1 for the lowest axial mode of the longest specimen side."""
        return 2.0 * self.config.damping_ratio * self.axial_omega()

    def axial_omega(self):
        """Lowest axial circular frequency, estimated as a fixed-free bar.

        omega_1 = pi c / (2 L) with c from the volume-averaged constrained
        modulus and density.
        """
        m = self.mesh
        Ms, rhos = 0.0, 0.0
        vt = m.element_volume.sum()
        for ph, (E, nu) in self.materials.elastic_constants().items():
            w = m.phase_volume(ph) / vt
            Ms += w * constrained_modulus(E, nu)
            rhos += w * self.config.densities[ph] * self.config.mass_scaling
        c = math.sqrt(Ms / rhos)
        return math.pi * c / (2.0 * max(m.box) * MM)

    def _rigid_modes(self):
        """Mass-orthonormal rigid-body modes (6, n_nodes, 3) and their mass products.

        Used by the support-free restraint: removing ``P u`` and ``P v``
        (``P`` the mass-orthogonal projector on these modes) fixes the six
        rigid-body coordinates without any reaction force.
        """
        m = self.mass[:, None]
        xc = self.x0 - (m * self.x0).sum(axis=0) / m.sum()
        modes = []
        for k in range(3):
            t = np.zeros_like(self.x0)
            t[:, k] = 1.0
            modes.append(t)
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1.0
            modes.append(np.cross(e, xc))
        B = np.array(modes)
        G = np.einsum("aij,bij->ab", B * m, B)
        L = np.linalg.cholesky(G)
        phi = np.einsum("ab,bij->aij", np.linalg.inv(L), B)
        return phi, phi * m

    def _rigid_part(self, w):
        phi, mphi = self._rigid
        return np.einsum("a,aij->ij", np.einsum("aij,ij->a", mphi, w), phi)

    def reset(self):
        n_el = self.mesh.n_elements
        self.u = np.zeros((self.mesh.n_nodes, 3))
        self.u[self.fixed] = self.fixed_value[self.fixed]
        self.v = np.zeros_like(self.u)
        self.f_int = np.zeros_like(self.u)
        self.D = np.zeros(n_el)
        self.kappa = self.k0[self.phase].copy()
        self.eps_prev = np.zeros((n_el, 6))
        self.eps_cr = np.zeros((n_el, 6))
        self.sig_mu = np.zeros((n_el, max(self.n_units, 1), 6))
        self._work = np.empty((n_el, 12))
        self._fel = np.empty((n_el, 4, 3))
        self.eps_gel = 0.0
        self.s_acc = 0.0
        self.step_count = 0      # timed steps done
        self.t_real = 0.0
        self.load_factor = 0.0
        self._update_forces(self._elastic_paste)

    # -- kernels -----------------------------------------------------------
    def _update_forces(self, factors):
        n = self.n_units
        beta = factors.beta if n else np.ones(1)
        lam = factors.lam if n else np.ones(1)
        coef = factors.creep_coef if n else np.zeros(1)
        A.element_forces(self.u, self.conn, self.grads, self.vol, self.phase,
                         self.mod, self.nu, self.k0, self.at, self.bt, self.ac, self.bc_,
                         self.eps_ult, self.damage_on,
                         factors.E_n, beta, lam, coef, self.eps_gel,
                         self.D, self.kappa, self.eps_prev, self.eps_cr, self.sig_mu,
                         self.config.residual_stiffness, self._work, self._fel)
        A.gather(self._fel, self.ptr, self.n2e, self.n2l, self.f_int)

    def internal_forces(self, u=None):
        """Internal nodal forces for ``u`` without advancing any history."""
        saved = (self.u, self.D.copy(), self.kappa.copy(), self.eps_prev.copy(),
                 self.eps_cr.copy(), self.sig_mu.copy(), self.f_int.copy())
        if u is not None:
            self.u = np.asarray(u, dtype=float)
        self._update_forces(self._elastic_paste)
        out = self.f_int.copy()
        self.u, self.D, self.kappa, self.eps_prev, self.eps_cr, self.sig_mu, self.f_int = saved
        return out

    def _advance(self, f_ext, factors):
        # damping force from the mean of the old and new half-step
        # velocities: stable for any damping * dt
        cd = 0.5 * self.damping * self.dt
        a = (f_ext - self.f_int) / self.mass[:, None]
        self.v *= (1.0 - cd) / (1.0 + cd)
        self.v += (self.dt / (1.0 + cd)) * a
        self.v[self.fixed] = 0.0
        if self._rigid is not None:
            self.v -= self._rigid_part(self.v)
        self.u += self.dt * self.v
        self.u[self.fixed] = self.fixed_value[self.fixed]
        if self._rigid is not None:
            self.u -= self._rigid_part(self.u)
        self._update_forces(factors)

    def step(self):
        """One timed step: kinematics, gel kinetics, creep, damage, forces."""
        cfg = self.config
        t0 = self.step_count * self.dt_real
        if self.materials.creep:
            factors = chain_factors(self.materials.chain, t0, self.dt_real)
        else:
            factors = self._elastic_paste
        gel = self.materials.gel
        rate = gel.arrhenius(cfg.temperature(t0))
        self.s_acc += rate * self.dt_real
        self.eps_gel += gel.K * max((gel.C - self.s_acc) / gel.C, 0.0) * rate * self.dt_real
        self._advance(self.f_traction * self.load_factor, factors)
        self.step_count += 1
        self.t_real, _ = map_time(self.step_count - 1, self.dt, self.T_sim, cfg.T_real)

    def preload(self):
        """Ramp the tractions then hold, with the material clock frozen."""
        if not self.has_traction:
            self.load_factor = 1.0
            return
        n_ramp = max(1, int(math.ceil(self.config.preload_ramp * self.n_steps)))
        n_hold = int(math.ceil(self.config.preload_hold * self.n_steps))
        # never shorter than two slowest periods of ramp and a 1e-3 decay of the
        # transient (mass damping decays every mode at rate damping / 2)
        period = 2.0 * math.pi / self.axial_omega()
        n_ramp = max(n_ramp, int(math.ceil(2.0 * period / self.dt)))
        if self.damping > 0:
            n_hold = max(n_hold, int(math.ceil(2.0 * math.log(1e3) / self.damping / self.dt)))
        for k in range(n_ramp + n_hold):
            self.load_factor = min(1.0, (k + 1) / n_ramp)
            self._advance(self.f_traction * self.load_factor, self._elastic_paste)
        self.load_factor = 1.0
        self.check_finite()

    # -- diagnostics -------------------------------------------------------
    def kinetic_energy(self, v=None):
        v = self.v if v is None else v
        return 0.5 * float(np.sum(self.mass[:, None] * v * v))

    def strain_energy(self):
        """Elastic stored energy, valid while undamaged and creep-free."""
        eps = A.element_strains(self.u, self.conn, self.grads)
        sel = eps.copy()
        g = self.phase == GEL
        sel[g, :3] -= self.eps_gel
        total = 0.0
        for ph in (PASTE, AGGREGATE, GEL):
            mask = self.phase == ph
            if not np.any(mask):
                continue
            M = self.mod[ph] if ph != PASTE else self._elastic_paste.E_n
            s = sel[mask] @ (M * stiffness_matrix(self.nu[ph])).T
            total += 0.5 * float(np.sum(self.vol[mask] * np.einsum("ij,ij->i", sel[mask], s)))
        return total

    def element_strains(self):
        return A.element_strains(self.u, self.conn, self.grads)

    def check_finite(self):
        span = min(self.mesh.box) * MM
        umax = float(np.max(np.abs(self.u))) if self.u.size else 0.0
        if not np.all(np.isfinite(self.u)) or umax > 0.5 * span:
            ke = self.kinetic_energy()
            raise NumericalFailure(
                f"solver diverged at step {self.step_count} (t_real={self.t_real:.4g} d): "
                f"max|u|={umax:.3g} m, kinetic energy={ke:.3g} J, dt={self.dt:.3g} s")

    @property
    def displacement_mm(self):
        return self.u / MM
