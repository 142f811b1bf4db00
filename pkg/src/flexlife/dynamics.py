"""Dynamics of the 3-DOF articulated arm with two elastic links.

Topology: vertical base joint (q1), shoulder (q2) and elbow (q3) with
parallel horizontal axes, an elastic link between shoulder and elbow and a
second elastic link carrying a point payload. Every joint has an elastic
gearbox: the motor coordinate (output side, after the gear ratio) couples
to the link coordinate through a torsional spring-damper, so the
generalized coordinates are q = (q_M, q_L, q_e1, q_e2).

The mass matrix is assembled from per-link inertia integrals of the Ritz
shape functions (precomputed once per design) combined with the joint
rotation matrices; the elastic coordinates are frozen at zero in the
inertia terms (small-deflection linearization) while the potential keeps
the full elastic coupling, so the model is an exact Lagrangian system and
conserves energy without dissipation. Velocity forces are derived from
the configuration gradient of the mass matrix via complex-step
differentiation, which is exact to machine precision.

Everything is assembled in the frame co-rotating with the base joint; the
mass matrix is independent of q1 (cyclic coordinate) and gravity points
along the rotation axis, so nothing is lost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh

from .beam import BeamSpec, Material, RitzBasis, quadrature, section_properties, shape_basis
from .beam import curvature_map, stiffness_matrix
from .trajectory import TrajectoryPlan

_CS_STEP = 1e-200  # complex-step size; derivatives are exact at this scale
_EX = np.array([1.0, 0.0, 0.0])

GRAVITY_DEFAULT = (0.0, 0.0, -9.81)


class SimulationError(RuntimeError):
    """Raised when the integrator fails or produces non-finite states."""

    def __init__(self, message: str, t_failure: float | None = None):
        super().__init__(message)
        self.t_failure = t_failure


@dataclass(frozen=True)
class DriveParams:
    """One joint drive: rotor, gear ratio and gear spring-damper.

    Stiffness, damping and the torque limit refer to the gear output side;
    the rotor inertia is motor-side and gets reflected by the squared
    ratio.
    """

    rotor_inertia: float
    gear_ratio: float
    stiffness: float
    damping: float = 0.0
    torque_limit: float = math.inf

    def __post_init__(self):
        if min(self.rotor_inertia, self.gear_ratio, self.stiffness) <= 0.0:
            raise ValueError("rotor inertia, gear ratio and stiffness must be positive")
        if self.damping < 0.0 or self.torque_limit <= 0.0:
            raise ValueError("damping must be >= 0 and torque limit positive")

    @property
    def reflected_inertia(self) -> float:
        return self.rotor_inertia * self.gear_ratio**2


@dataclass(frozen=True)
class LinkParams:
    """Geometry and discretization of one elastic link.

    damping_beta is the stiffness-proportional structural damping time
    constant (force -beta K qd_e); zero keeps the beam conservative.
    """

    length: float
    wall_thickness: float
    n_v: int = 2
    n_w: int = 2
    n_theta: int = 1
    xi_crit: float = 0.0
    damping_beta: float = 0.0
    stress_y: float | None = None  # default: top-face mid-wall point
    stress_z: float | None = None


@dataclass(frozen=True)
class RobotDesign:
    """Full parameter set of one candidate: fixed part plus the variable
    wall thicknesses living inside ``links``."""

    material: Material
    edge_length: float
    links: tuple[LinkParams, LinkParams]
    drives: tuple[DriveParams, DriveParams, DriveParams]
    hub1_inertia: float
    hub2_mass: float
    hub2_inertia: float
    payload_mass: float
    gravity: tuple[float, float, float] = GRAVITY_DEFAULT

    def __post_init__(self):
        if len(self.links) != 2 or len(self.drives) != 3:
            raise ValueError("the arm has exactly two elastic links and three drives")
        if min(self.hub1_inertia, self.hub2_mass, self.hub2_inertia, self.payload_mass) < 0.0:
            raise ValueError("masses and inertias must be non-negative")

    def beam_spec(self, index: int) -> BeamSpec:
        link = self.links[index]
        return BeamSpec(
            L=link.length,
            section=section_properties(self.edge_length, link.wall_thickness),
            material=self.material,
            n_v=link.n_v,
            n_w=link.n_w,
            n_theta=link.n_theta,
        )

    def with_thicknesses(self, t1: float, t2: float) -> "RobotDesign":
        return replace(
            self,
            links=(
                replace(self.links[0], wall_thickness=t1),
                replace(self.links[1], wall_thickness=t2),
            ),
        )

    @property
    def n_elastic(self) -> int:
        return self.beam_spec(0).n_elastic + self.beam_spec(1).n_elastic

    @property
    def n_coords(self) -> int:
        return 6 + self.n_elastic


@dataclass
class GeneralizedState:
    """Generalized coordinates (q_M, q_L, q_e) and their rates."""

    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.qd = np.asarray(self.qd, dtype=float)
        if self.q.shape != self.qd.shape or self.q.ndim != 1:
            raise ValueError("q and qd must be 1-d arrays of equal length")


def _roty(q: np.ndarray) -> np.ndarray:
    """Batched rotation about the local y axis; shape (..., 3, 3)."""
    q = np.asarray(q)
    c, s = np.cos(q), np.sin(q)
    R = np.zeros(q.shape + (3, 3), dtype=c.dtype)
    R[..., 0, 0] = c
    R[..., 0, 2] = s
    R[..., 1, 1] = 1.0
    R[..., 2, 0] = -s
    R[..., 2, 2] = c
    return R


def _droty(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q)
    c, s = np.cos(q), np.sin(q)
    R = np.zeros(q.shape + (3, 3), dtype=c.dtype)
    R[..., 0, 0] = -s
    R[..., 0, 2] = c
    R[..., 2, 0] = -c
    R[..., 2, 2] = -s
    return R


def _skew(v: np.ndarray) -> np.ndarray:
    """Batched cross-product matrix; shape (..., 3, 3)."""
    v = np.asarray(v)
    S = np.zeros(v.shape[:-1] + (3, 3), dtype=v.dtype)
    S[..., 0, 1] = -v[..., 2]
    S[..., 0, 2] = v[..., 1]
    S[..., 1, 0] = v[..., 2]
    S[..., 1, 2] = -v[..., 0]
    S[..., 2, 0] = -v[..., 1]
    S[..., 2, 1] = v[..., 0]
    return S


def _t(A: np.ndarray) -> np.ndarray:
    return np.swapaxes(A, -1, -2)


class _BeamData:
    """Per-link shape-function integrals used by the assembly.

    Translational map Phi(xi) (rows x, y, z over the elastic coordinates
    (theta, v, w)) and the small-rotation map Psi(xi) with rows
    (theta, -w', v').
    """

    def __init__(self, spec: BeamSpec, basis: RitzBasis):
        xi, wts = quadrature(spec.L, max(spec.n_v, spec.n_w, spec.n_theta))
        rho = spec.material.rho
        rhoA = rho * spec.section.A_B
        m = spec.n_elastic
        i0, i1 = spec.n_theta, spec.n_theta + spec.n_v

        V = basis.v(xi, 0)
        W = basis.w(xi, 0)
        Vp = basis.v(xi, 1)
        Wp = basis.w(xi, 1)
        Th = basis.theta(xi, 0)

        self.spec = spec
        self.m = m
        self.L = spec.L
        self.mb = rhoA * spec.L
        self.s1 = rhoA * spec.L**2 / 2.0
        self.s2 = rhoA * spec.L**3 / 3.0

        rw = np.sqrt(wts)  # sqrt-weighted products keep Gram blocks symmetric
        P0 = np.zeros((3, m))
        P0[1, i0:i1] = rhoA * (V @ wts)
        P0[2, i1:] = rhoA * (W @ wts)
        P1 = np.zeros((3, m))
        P1[1, i0:i1] = rhoA * ((xi * V) @ wts)
        P1[2, i1:] = rhoA * ((xi * W) @ wts)
        PP = np.zeros((m, m))
        PP[i0:i1, i0:i1] = rhoA * (V * rw) @ (V * rw).T
        PP[i1:, i1:] = rhoA * (W * rw) @ (W * rw).T
        self.P0, self.P1, self.PP = P0, P1, 0.5 * (PP + PP.T)

        D = np.diag([rho * spec.section.I_D, rho * spec.section.I_y, rho * spec.section.I_z])
        self.D = D
        self.DL = D * spec.L
        SPsi = np.zeros((3, m))
        SPsi[0, :i0] = Th @ wts
        SPsi[1, i1:] = -basis.w(spec.L, 0)  # int of -w' = -w(L)
        SPsi[2, i0:i1] = basis.v(spec.L, 0)
        self.DSPsi = D @ SPsi
        RPsi = np.zeros((m, m))
        RPsi[:i0, :i0] = D[0, 0] * (Th * rw) @ (Th * rw).T
        RPsi[i0:i1, i0:i1] = D[2, 2] * (Vp * rw) @ (Vp * rw).T
        RPsi[i1:, i1:] = D[1, 1] * (Wp * rw) @ (Wp * rw).T
        self.RPsi = 0.5 * (RPsi + RPsi.T)

        PhiL = np.zeros((3, m))
        PhiL[1, i0:i1] = basis.v(spec.L, 0)
        PhiL[2, i1:] = basis.w(spec.L, 0)
        PsiL = np.zeros((3, m))
        PsiL[0, :i0] = basis.theta(spec.L, 0)
        PsiL[1, i1:] = -basis.w(spec.L, 1)
        PsiL[2, i0:i1] = basis.v(spec.L, 1)
        self.PhiL, self.PsiL = PhiL, PsiL

        self.K = stiffness_matrix(spec, basis)


class RobotModel:
    """Precomputed assembly data and kinematics for one design."""

    def __init__(self, design: RobotDesign):
        self.design = design
        spec1, spec2 = design.beam_spec(0), design.beam_spec(1)
        self.beam1 = _BeamData(spec1, shape_basis(spec1))
        self.beam2 = _BeamData(spec2, shape_basis(spec2))
        self.m1, self.m2 = self.beam1.m, self.beam2.m
        self.n = 6 + self.m1 + self.m2
        self.sl1 = slice(6, 6 + self.m1)
        self.sl2 = slice(6 + self.m1, self.n)
        self.B = np.array([d.reflected_inertia for d in design.drives])
        self.k_gear = np.array([d.stiffness for d in design.drives])
        self.d_gear = np.array([d.damping for d in design.drives])
        self.tau_limit = np.array([d.torque_limit for d in design.drives])
        self.gravity = np.asarray(design.gravity, dtype=float)
        self.curv1 = curvature_map(spec1, design.links[0].xi_crit)
        self.curv2 = curvature_map(spec2, design.links[1].xi_crit)
        # gravity weight on the link-1 tip path (hub, second beam, payload)
        self._m_tip = design.hub2_mass + self.beam2.mb + design.payload_mass

    # ----- mass matrix -------------------------------------------------

    def _add_beam(self, M, bd: _BeamData, Jp0, Jw, R, sl: slice) -> None:
        axis = R[..., :, 0]
        At = _skew(axis)
        AJ = At @ Jw
        M += bd.mb * _t(Jp0) @ Jp0
        T1 = _t(Jp0) @ AJ
        M -= bd.s1 * (T1 + _t(T1))
        M += bd.s2 * _t(AJ) @ AJ
        B1 = _t(Jp0) @ (R @ bd.P0)
        G2 = _t(Jw) @ (At @ (R @ bd.P1))
        G3 = _t(Jw) @ (R @ bd.DSPsi)
        cross = B1 + G2 + G3
        M[..., :, sl] += cross
        M[..., sl, :] += _t(cross)
        M[..., sl, sl] += bd.PP + bd.RPsi
        M += _t(Jw) @ (R @ bd.DL @ _t(R)) @ Jw

    def mass_matrix_batch(self, q2, q3) -> np.ndarray:
        """Mass matrices for batched shoulder/elbow angles; (..., n, n)."""
        q2 = np.asarray(q2)
        q3 = np.asarray(q3)
        dtype = np.result_type(q2.dtype, q3.dtype, float)
        shape = np.broadcast_shapes(q2.shape, q3.shape)
        q2 = np.broadcast_to(q2, shape)
        q3 = np.broadcast_to(q3, shape)
        n = self.n
        R2 = _roty(q2)
        R23 = R2 @ _roty(q3)

        M = np.zeros(shape + (n, n), dtype=dtype)
        idx = np.arange(3)
        M[..., idx, idx] += self.B
        M[..., 3, 3] += self.design.hub1_inertia

        Jw1 = np.zeros(shape + (3, n), dtype=dtype)
        Jw1[..., 2, 3] = 1.0  # base joint axis e_z
        Jw1[..., 1, 4] = 1.0  # shoulder axis e_y
        Jp0_1 = np.zeros(shape + (3, n), dtype=dtype)
        self._add_beam(M, self.beam1, Jp0_1, Jw1, R2, self.sl1)

        p_t1 = self.beam1.L * R2[..., :, 0]
        Jp_t1 = -_skew(p_t1) @ Jw1
        Jp_t1[..., :, self.sl1] += R2 @ self.beam1.PhiL
        Jw_t1 = Jw1.copy()
        Jw_t1[..., :, self.sl1] += R2 @ self.beam1.PsiL
        a3 = R2[..., :, 1]
        Jw2 = Jw_t1.copy()
        Jw2[..., :, 5] += a3

        self._add_beam(M, self.beam2, Jp_t1, Jw2, R23, self.sl2)

        M += self.design.hub2_mass * _t(Jp_t1) @ Jp_t1
        spin = (a3[..., None, :] @ Jw_t1)[..., 0, :]
        M += self.design.hub2_inertia * spin[..., :, None] * spin[..., None, :]

        r_pl = self.beam2.L * R23[..., :, 0]
        J_pl = Jp_t1 - _skew(r_pl) @ Jw2
        J_pl[..., :, self.sl2] += R23 @ self.beam2.PhiL
        M += self.design.payload_mass * _t(J_pl) @ J_pl
        return M

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        return self.mass_matrix_batch(q[4], q[5])

    def mass_gradients(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(M, dM/dq2, dM/dq3) via one batched complex-step evaluation."""
        h = _CS_STEP
        q2 = np.array([q[4], q[4] + 1j * h, q[4]])
        q3 = np.array([q[5], q[5], q[5] + 1j * h])
        out = self.mass_matrix_batch(q2, q3)
        return out[0].real, out[1].imag / h, out[2].imag / h

    # ----- potential energy and its gradient ---------------------------

    def _tip_frames(self, q2, q3, qe1):
        """(R2, A2, tip_local, R3u-independent pieces) with deformation."""
        R2 = _roty(q2)
        R3 = _roty(q3)
        tip_local = self.beam1.L * _EX + self.beam1.PhiL @ qe1
        S1 = np.eye(3) + _skew(self.beam1.PsiL @ qe1)
        A2 = R2 @ S1 @ R3
        return R2, R3, S1, A2, tip_local

    def potential(self, q: np.ndarray) -> float:
        """Gravity + beam strain + gear spring energy (zero at the
        horizontal undeformed rest pose)."""
        qM, qL = q[:3], q[3:6]
        qe1, qe2 = q[self.sl1], q[self.sl2]
        R2, R3, S1, A2, tip_local = self._tip_frames(qL[1], qL[2], qe1)
        c = -self.gravity
        h1 = self.beam1.s1 * _EX + self.beam1.P0 @ qe1
        u2 = (
            self.beam2.s1 * _EX
            + self.beam2.P0 @ qe2
            + self.design.payload_mass * (self.beam2.L * _EX + self.beam2.PhiL @ qe2)
        )
        weighted = R2 @ (h1 + self._m_tip * tip_local) + A2 @ u2
        v_grav = c @ weighted
        v_elastic = 0.5 * (qe1 @ self.beam1.K @ qe1 + qe2 @ self.beam2.K @ qe2)
        dq_gear = qM - qL
        v_gear = 0.5 * float(self.k_gear @ dq_gear**2)
        return float(v_grav) + v_elastic + v_gear

    def potential_grad(self, q: np.ndarray) -> np.ndarray:
        """Analytic gradient of :meth:`potential` (the vector g)."""
        qM, qL = q[:3], q[3:6]
        qe1, qe2 = q[self.sl1], q[self.sl2]
        R2, R3, S1, A2, tip_local = self._tip_frames(qL[1], qL[2], qe1)
        c = -self.gravity
        h1 = self.beam1.s1 * _EX + self.beam1.P0 @ qe1
        u2 = (
            self.beam2.s1 * _EX
            + self.beam2.P0 @ qe2
            + self.design.payload_mass * (self.beam2.L * _EX + self.beam2.PhiL @ qe2)
        )
        g = np.zeros(self.n)
        # shoulder / elbow gravity torques
        local = h1 + self._m_tip * tip_local + S1 @ (R3 @ u2)
        g[4] = c @ (_droty(qL[1]) @ local)
        g[5] = c @ (R2 @ S1 @ _droty(qL[2]) @ u2)
        # elastic gravity coupling
        cR2 = R2.T @ c
        w = R3 @ u2
        g[self.sl1] = (
            self.beam1.P0.T @ cR2
            + self._m_tip * (self.beam1.PhiL.T @ cR2)
            + self.beam1.PsiL.T @ np.cross(w, cR2)
        )
        g[self.sl2] = (self.beam2.P0 + self.design.payload_mass * self.beam2.PhiL).T @ (A2.T @ c)
        # elastic restoring (enters g; the reaction force is -K q_e)
        g[self.sl1] += self.beam1.K @ qe1
        g[self.sl2] += self.beam2.K @ qe2
        # gear springs
        tau_g = self.k_gear * (qM - qL)
        g[:3] += tau_g
        g[3:6] -= tau_g
        return g

    # ----- kinematics of the end effector ------------------------------

    def end_effector(self, q: np.ndarray, elastic: bool = True) -> np.ndarray:
        """End-effector position(s) in the base-joint frame; q (..., n)."""
        q = np.asarray(q, dtype=float)
        q2, q3 = q[..., 4], q[..., 5]
        R2 = _roty(q2)
        R3 = _roty(q3)
        if elastic:
            qe1 = q[..., self.sl1]
            qe2 = q[..., self.sl2]
            tip_local = self.beam1.L * _EX + qe1 @ self.beam1.PhiL.T
            S1 = np.eye(3) + _skew(qe1 @ self.beam1.PsiL.T)
            r2_local = self.beam2.L * _EX + qe2 @ self.beam2.PhiL.T
            A2 = R2 @ S1 @ R3
            return (R2 @ tip_local[..., None])[..., 0] + (A2 @ r2_local[..., None])[..., 0]
        tip = self.beam1.L * R2[..., :, 0]
        return tip + self.beam2.L * (R2 @ R3)[..., :, 0]

    def ee_deviation(self, q: np.ndarray) -> np.ndarray:
        """Elastic minus rigid forward kinematics, rotated to the inertial
        frame with the base angle q_L1."""
        dr = self.end_effector(q, elastic=True) - self.end_effector(q, elastic=False)
        q1 = np.asarray(q, dtype=float)[..., 3]
        c, s = np.cos(q1), np.sin(q1)
        out = np.empty_like(dr)
        out[..., 0] = c * dr[..., 0] - s * dr[..., 1]
        out[..., 1] = s * dr[..., 0] + c * dr[..., 1]
        out[..., 2] = dr[..., 2]
        return out


# ---------------------------------------------------------------------------
# public EOM / energy API


def assemble_eom(
    design: RobotDesign | RobotModel, state: GeneralizedState
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mass matrix, velocity-force vector G(q, qd) qd and potential
    gradient g(q) for one generalized state."""
    model = design if isinstance(design, RobotModel) else RobotModel(design)
    q, qd = state.q, state.qd
    if q.shape != (model.n,):
        raise ValueError(f"state dimension {q.shape} does not match model ({model.n},)")
    M, dM2, dM3 = model.mass_gradients(q)
    try:
        cho_factor(M)
    except LinAlgError as exc:
        raise ValueError("singular mass matrix (inconsistent inertia data)") from exc
    Mdot = dM2 * qd[4] + dM3 * qd[5]
    gyro = Mdot @ qd
    gyro[4] -= 0.5 * qd @ dM2 @ qd
    gyro[5] -= 0.5 * qd @ dM3 @ qd
    return M, gyro, model.potential_grad(q)


def energy(design: RobotDesign | RobotModel, state: GeneralizedState) -> tuple[float, float]:
    """(kinetic, potential) energy of a state."""
    model = design if isinstance(design, RobotModel) else RobotModel(design)
    M = model.mass_matrix(state.q)
    return float(0.5 * state.qd @ M @ state.qd), model.potential(state.q)


# ---------------------------------------------------------------------------
# controller


@dataclass(frozen=True)
class ControllerGains:
    """Cascaded position/velocity loop gains, one value per joint."""

    kp_pos: tuple[float, float, float]  # 1/s
    kp_vel: tuple[float, float, float]  # N m s/rad
    ki_vel: tuple[float, float, float]  # N m/rad
    feedforward: bool = True

    def __post_init__(self):
        for name in ("kp_pos", "kp_vel", "ki_vel"):
            vals = np.asarray(getattr(self, name), dtype=float)
            if vals.shape != (3,):
                raise ValueError(f"{name} needs exactly three entries")
            if np.any(vals < 0.0) or (name != "ki_vel" and np.any(vals == 0.0)):
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, tuple(vals))


def controller(
    gains: ControllerGains,
    q_motor: np.ndarray,
    qd_motor: np.ndarray,
    q_des: np.ndarray,
    qd_des: np.ndarray,
    integrator: np.ndarray,
    tau_ff: np.ndarray | None = None,
    tau_limit: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Cascaded P position / PI velocity law on the motor coordinates.

    Returns the (saturated) motor torque and the integrator rate, which is
    the inner-loop velocity error.
    """
    kp = np.asarray(gains.kp_pos)
    kv = np.asarray(gains.kp_vel)
    ki = np.asarray(gains.ki_vel)
    v_cmd = qd_des + kp * (q_des - q_motor)
    e_v = v_cmd - qd_motor
    tau = kv * e_v + ki * integrator
    if tau_ff is not None:
        tau = tau + tau_ff
    if tau_limit is not None:
        tau = np.clip(tau, -tau_limit, tau_limit)
    return tau, e_v


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimSettings:
    """Integrator and sampling configuration for one load-case run."""

    rtol: float = 1e-6
    atol: float = 1e-9
    t_settle: float | None = None  # None: twice the slowest linearized period
    sample_rate: float = 1000.0
    method: str = "BDF"  # ode15s-style multistep; "Radau"/"LSODA" also work
    initial_elastic: str = "static"  # or "zero"
    gains: ControllerGains | None = None
    torque_override: object = None  # callable t -> (3,) motor torque, test hook

    def __post_init__(self):
        if self.rtol <= 0.0 or self.atol <= 0.0 or self.sample_rate <= 0.0:
            raise ValueError("tolerances and sample rate must be positive")
        if self.initial_elastic not in ("static", "zero"):
            raise ValueError("initial_elastic must be 'static' or 'zero'")


@dataclass
class SimulationResult:
    """Uniformly resampled state and output histories of one run."""

    times: np.ndarray  # (T,)
    q: np.ndarray  # (T, n)
    qd: np.ndarray  # (T, n)
    kappa1: np.ndarray  # (T, 3) curvature at xi_crit of link 1
    kappa2: np.ndarray  # (T, 3)
    dr_ee: np.ndarray  # (T, 3) elastic-vs-rigid end-effector deviation
    tau: np.ndarray  # (T, 3) motor torques
    t_task: float
    t_settle: float

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("time grid must be strictly increasing")
        if not np.all(np.isfinite(self.dr_ee)):
            raise ValueError("end-effector deviation contains non-finite values")


def static_equilibrium(model: RobotModel, q_motor: np.ndarray) -> np.ndarray:
    """Full coordinate vector with (q_L, q_e) in static equilibrium while
    the motors hold q_motor (gear springs carry the gravity load)."""
    n_free = model.n - 3
    q = np.zeros(model.n)
    q[:3] = q_motor
    q[3:6] = q_motor

    def residual(x):
        q[3:] = x
        return model.potential_grad(q)[3:]

    x = q[3:].copy()
    for _ in range(50):
        r = residual(x)
        if np.linalg.norm(r) < 1e-9:
            break
        jac = np.empty((n_free, n_free))
        h = 1e-7
        for k in range(n_free):
            xp = x.copy()
            xp[k] += h
            jac[:, k] = (residual(xp) - r) / h
        x = x - np.linalg.solve(jac, r)
    q[3:] = x
    return q


def linearized_periods(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Vibration periods of the (q_L, q_e) subsystem with motors held,
    from the generalized eigenproblem of the potential Hessian."""
    n_free = model.n - 3
    h = 1e-6

    def grad_free(x):
        qq = q.copy()
        qq[3:] = x
        return model.potential_grad(qq)[3:]

    x0 = q[3:].copy()
    g0 = grad_free(x0)
    K = np.empty((n_free, n_free))
    for k in range(n_free):
        xp = x0.copy()
        xp[k] += h
        K[:, k] = (grad_free(xp) - g0) / h
    K = 0.5 * (K + K.T)
    M = model.mass_matrix(q)[3:, 3:]
    w2 = eigh(K, M, eigvals_only=True)
    w2 = w2[w2 > 1e-9]
    return 2.0 * math.pi / np.sqrt(w2)


def _feedforward_table(
    model: RobotModel, plan: TrajectoryPlan, t_end: float, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """Rigid-body inverse-dynamics torque tabulated over the run.

    The rigid reduction locks the gears (q_M = q_L = q_d, q_e = 0); its
    3x3 dynamics follow from the full mass matrix through the selector
    S = [I, I, 0]^T.
    """
    ts = np.arange(0.0, t_end + dt, dt)
    qdes, qddes, qdddes = plan.sample_grid(ts)
    h = _CS_STEP
    q2 = np.stack([qdes[:, 1], qdes[:, 1] + 1j * h, qdes[:, 1]], axis=0)
    q3 = np.stack([qdes[:, 2], qdes[:, 2], qdes[:, 2] + 1j * h], axis=0)
    out = model.mass_matrix_batch(q2, q3)
    M = out[0].real
    dM2 = out[1].imag / h
    dM3 = out[2].imag / h

    n = model.n
    S = np.zeros((n, 3))
    S[:3] = np.eye(3)
    S[3:6] = np.eye(3)
    tau = np.empty((ts.size, 3))
    for k in range(ts.size):
        qd_full = S @ qddes[k]
        qdd_full = S @ qdddes[k]
        Mk = M[k]
        Mdot = dM2[k] * qddes[k, 1] + dM3[k] * qddes[k, 2]
        gyro = Mdot @ qd_full
        gyro[4] -= 0.5 * qd_full @ dM2[k] @ qd_full
        gyro[5] -= 0.5 * qd_full @ dM3[k] @ qd_full
        q_full = np.zeros(n)
        q_full[:3] = qdes[k]
        q_full[3:6] = qdes[k]
        g = model.potential_grad(q_full)
        tau[k] = S.T @ (Mk @ qdd_full + gyro + g)
    return ts, tau


def simulate(
    design: RobotDesign, plan: TrajectoryPlan, settings: SimSettings | None = None
) -> SimulationResult:
    """Integrate the closed-loop (or free) dynamics over the task plus a
    settling window and resample everything on a uniform grid."""
    settings = settings or SimSettings()
    model = RobotModel(design)
    n = model.n
    q_pick = plan.q_pick
    if q_pick.size != 3:
        raise ValueError("the arm expects three joint coordinates")

    controlled = settings.gains is not None
    if settings.initial_elastic == "static" and np.any(model.gravity != 0.0):
        q0 = static_equilibrium(model, q_pick)
    else:
        q0 = np.zeros(n)
        q0[:3] = q_pick
        q0[3:6] = q_pick

    t_settle = settings.t_settle
    if t_settle is None:
        t_settle = 2.0 * float(np.max(linearized_periods(model, q0)))
    t_end = plan.t_task + t_settle

    n_int = 3 if controlled else 0
    y0 = np.zeros(2 * n + n_int)
    y0[:n] = q0

    tau_ff_t = tau_ff_v = None
    if controlled:
        gains = settings.gains
        if gains.feedforward:
            tau_ff_t, tau_ff_v = _feedforward_table(model, plan, t_end, 2e-3)
        # preload the velocity integrator with the gravity-holding torque so
        # the run starts without a droop transient
        ki = np.asarray(gains.ki_vel)
        hold = model.k_gear * (q0[:3] - q0[3:6])
        if tau_ff_v is not None:
            hold = hold - tau_ff_v[0]
        x0 = np.zeros(3)
        mask = ki > 0.0
        x0[mask] = hold[mask] / ki[mask]
        y0[2 * n :] = x0

    override = settings.torque_override

    def rhs(t, y):
        q = y[:n]
        qd = y[n : 2 * n]
        M, dM2, dM3 = model.mass_gradients(q)
        Mdot = dM2 * qd[4] + dM3 * qd[5]
        gyro = Mdot @ qd
        gyro[4] -= 0.5 * qd @ dM2 @ qd
        gyro[5] -= 0.5 * qd @ dM3 @ qd
        g = model.potential_grad(q)
        Q = np.zeros(n)
        damp = model.d_gear * (qd[:3] - qd[3:6])
        Q[:3] -= damp
        Q[3:6] += damp
        beta1, beta2 = design.links[0].damping_beta, design.links[1].damping_beta
        if beta1:
            Q[model.sl1] -= beta1 * (model.beam1.K @ qd[model.sl1])
        if beta2:
            Q[model.sl2] -= beta2 * (model.beam2.K @ qd[model.sl2])
        dint = None
        if controlled:
            q_des, qd_des, _ = plan.sample(t)
            ff = None
            if tau_ff_t is not None:
                ff = np.array([np.interp(t, tau_ff_t, tau_ff_v[:, i]) for i in range(3)])
            tau, e_v = controller(
                settings.gains, q[:3], qd[:3], q_des, qd_des, y[2 * n :], ff, model.tau_limit
            )
            Q[:3] += tau
            dint = e_v
        elif override is not None:
            Q[:3] += override(t)
        try:
            qdd = cho_solve(cho_factor(M), Q - gyro - g)
        except LinAlgError as exc:
            raise SimulationError(f"mass matrix not positive definite at t={t:.6f}", t) from exc
        out = np.empty_like(y)
        out[:n] = qd
        out[n : 2 * n] = qdd
        if n_int:
            out[2 * n :] = dint
        return out

    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        y0,
        method=settings.method,
        rtol=settings.rtol,
        atol=settings.atol,
        dense_output=True,
    )
    if not sol.success:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise SimulationError(f"integration failed at t={t_fail:.6f}: {sol.message}", t_fail)

    dt = 1.0 / settings.sample_rate
    ts = np.arange(0.0, t_end + 0.5 * dt, dt)
    ts[-1] = min(ts[-1], t_end)
    Y = sol.sol(ts).T
    if not np.all(np.isfinite(Y)):
        raise SimulationError("non-finite state in the resampled solution")

    q_hist = Y[:, :n]
    qd_hist = Y[:, n : 2 * n]
    kappa1 = q_hist[:, model.sl1] @ model.curv1.T
    kappa2 = q_hist[:, model.sl2] @ model.curv2.T
    dr_ee = model.ee_deviation(q_hist)

    tau_hist = np.zeros((ts.size, 3))
    if controlled:
        q_des, qd_des, _ = plan.sample_grid(ts)
        ints = Y[:, 2 * n :]
        ff = None
        for k in range(ts.size):
            if tau_ff_t is not None:
                ff = np.array([np.interp(ts[k], tau_ff_t, tau_ff_v[:, i]) for i in range(3)])
            tau_hist[k], _ = controller(
                settings.gains,
                q_hist[k, :3],
                qd_hist[k, :3],
                q_des[k],
                qd_des[k],
                ints[k],
                ff,
                model.tau_limit,
            )
    elif override is not None:
        for k in range(ts.size):
            tau_hist[k] = override(ts[k])

    return SimulationResult(
        times=ts,
        q=q_hist,
        qd=qd_hist,
        kappa1=kappa1,
        kappa2=kappa2,
        dr_ee=dr_ee,
        tau=tau_hist,
        t_task=plan.t_task,
        t_settle=t_settle,
    )
