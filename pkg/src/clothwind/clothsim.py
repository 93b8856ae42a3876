"""Mass-spring cloth simulator for wind-excited flags and hanging cloth.

Forces: piecewise-linear anisotropic bending over shared triangle edges,
Hooke springs (structural + shear) with damping, gravity from the fabric
area weight, and a linear Stokes-type wind drag applied per point mass.
Time integration is substepped semi-implicit Euler; each call is
deterministic and operates on value-semantic state, so independent
simulations can safely run in parallel threads.

Axes: z is up, gravity acts along -z. Flags stream along the wind
(default +x) with the hoist pinned at x = 0; the off-plane flutter
direction is y. Hanging cloth starts flat in the horizontal plane and
swings down about the rod pinned along its first row.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ClothParams",
    "ClothTopology",
    "SimState",
    "SceneConfig",
    "MeshSpec",
    "SceneSpec",
    "SimulationError",
    "DEFAULT_BEND_GRID",
    "DEFAULT_ALPHA_NODES",
    "build_flag_mesh",
    "build_hanging_mesh",
    "bending_stiffness",
    "bending_forces",
    "stretch_shear_forces",
    "external_forces",
    "internal_forces",
    "step",
    "simulate",
    "relax_to_equilibrium",
    "kinetic_energy",
    "elastic_energy",
    "export_obj",
    "default_flag_scene",
    "default_hanging_scene",
    "scene_from_dict",
    "scene_to_dict",
    "load_scene",
    "save_scene",
]

# Base bending grid (3 material directions x 5 curvature samples) and the
# curvature sample nodes. The base material's published coefficients are
# not reproduced here; this flat default is configuration, not ground
# truth. Node spacing brackets the curvature range of the default flag
# discretization.
DEFAULT_BEND_GRID = np.full((3, 5), 1e-5)
DEFAULT_ALPHA_NODES = np.array([0.0, 25.0, 50.0, 75.0, 100.0])

_DEGENERATE_NORMAL = 1e-12   # m^2; thinner triangles exert no bending force
_DEGENERATE_SPRING = 1e-12   # m; shorter springs have no defined direction


class SimulationError(RuntimeError):
    """Raised when the integrator produces a non-finite state."""


@dataclass(frozen=True)
class ClothParams:
    """The 17 physical parameters: 15 bending stiffnesses, area weight, wind.

    ``bend[d, s]`` is the stiffness for material direction d (warp 0deg,
    bias 45deg, weft 90deg) at curvature sample s.
    """

    bend: np.ndarray
    area_weight: float
    wind_speed: float

    def __post_init__(self):
        bend = np.asarray(self.bend, dtype=np.float64)
        if bend.shape != (3, 5):
            raise ValueError(f"bend grid must be 3x5, got {bend.shape}")
        if not np.all(np.isfinite(bend)) or np.any(bend <= 0):
            raise ValueError("bend stiffness values must be finite and positive")
        object.__setattr__(self, "bend", bend)
        if not (math.isfinite(self.area_weight) and self.area_weight > 0):
            raise ValueError(f"area weight must be positive, got {self.area_weight}")
        if not (math.isfinite(self.wind_speed) and self.wind_speed >= 0):
            raise ValueError(f"wind speed must be >= 0, got {self.wind_speed}")

    def as_vector(self) -> np.ndarray:
        """Flatten to the canonical 17-vector (bend row-major, rho_A, v_w)."""
        return np.concatenate([self.bend.ravel(),
                               [self.area_weight, self.wind_speed]])

    @classmethod
    def from_vector(cls, vec) -> "ClothParams":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (17,):
            raise ValueError(f"expected 17 values, got shape {vec.shape}")
        return cls(bend=vec[:15].reshape(3, 5),
                   area_weight=float(vec[15]), wind_speed=float(vec[16]))


@dataclass(frozen=True)
class ClothTopology:
    """Fixed connectivity and material-space geometry of one cloth mesh."""

    rest_uv: np.ndarray            # (n, 2) material coordinates, m
    triangles: np.ndarray          # (m, 3) vertex indices
    struct_ij: np.ndarray          # (s, 2) structural spring endpoints
    struct_rest: np.ndarray        # (s,) rest lengths, m
    shear_ij: np.ndarray           # (q, 2) shear spring endpoints
    shear_rest: np.ndarray         # (q,)
    bend_idx: np.ndarray           # (b, 4) [x1, x2, x3, x4]; (x3, x4) shared edge
    bend_rest_angle: np.ndarray    # (b,) rest dihedral, rad
    bend_edge_angle: np.ndarray    # (b,) material-space edge angle in [0, pi/2]
    pinned: np.ndarray             # (p,) vertex indices
    vertex_area: np.ndarray        # (n,) lumped areas, m^2

    @property
    def n_vertices(self) -> int:
        return len(self.rest_uv)

    @property
    def total_area(self) -> float:
        return float(self.vertex_area.sum())


@dataclass
class SimState:
    """Positions and velocities of every vertex at one instant."""

    positions: np.ndarray   # (n, 3) m
    velocities: np.ndarray  # (n, 3) m/s
    time: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.velocities = np.asarray(self.velocities, dtype=np.float64)
        if self.positions.shape != self.velocities.shape or self.positions.ndim != 2:
            raise ValueError("positions and velocities must both be (n, 3)")
        if not (np.all(np.isfinite(self.positions))
                and np.all(np.isfinite(self.velocities))):
            raise ValueError("state must be finite")

    def copy(self) -> "SimState":
        return SimState(self.positions.copy(), self.velocities.copy(), self.time)


@dataclass(frozen=True)
class SceneConfig:
    """Scene-level constants: external field directions, solver settings."""

    scene: str = "flag"
    wind_dir: tuple = (1.0, 0.0, 0.0)
    gravity: tuple = (0.0, 0.0, -9.81)
    drag_coeff: float = 0.6          # kg/(m^2 s), per-area Stokes coefficient
    k_struct: float = 40.0           # N/m
    k_shear: float = 10.0            # N/m
    # kg/s along the spring axis; capped so the lightest (corner) vertices
    # stay inside the explicit integrator's stability region at dt = 1e-3
    spring_damping: float = 0.05
    velocity_damping: float = 0.3    # 1/s global decay
    dt: float = 1e-3                 # substep, s
    frame_dt: float = 0.04           # mesh output step, s
    frames: int = 60
    alpha_nodes: tuple = tuple(DEFAULT_ALPHA_NODES)

    def __post_init__(self):
        if self.scene not in ("flag", "hanging"):
            raise ValueError(f"unknown scene kind {self.scene!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        n = round(self.frame_dt / self.dt)
        if n < 1 or abs(n * self.dt - self.frame_dt) > 1e-9:
            raise ValueError(f"dt={self.dt} does not divide frame_dt={self.frame_dt}")
        w = np.asarray(self.wind_dir, dtype=np.float64)
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ValueError("wind direction must be unit length (within 1e-12)")
        if self.frames < 1:
            raise ValueError("need at least one frame")

    @property
    def substeps_per_frame(self) -> int:
        return round(self.frame_dt / self.dt)

    @property
    def wind_vec(self) -> np.ndarray:
        return np.asarray(self.wind_dir, dtype=np.float64)

    @property
    def gravity_vec(self) -> np.ndarray:
        return np.asarray(self.gravity, dtype=np.float64)


# ---------------------------------------------------------------------------
# mesh construction

def _fold_edge_angle(du: float, dv: float) -> float:
    """Material edge direction folded into [0, pi/2] by symmetry."""
    a = math.atan2(dv, du) % math.pi
    return math.pi - a if a > math.pi / 2 else a


def _build_grid(nx: int, ny: int, width: float, height: float):
    """Regular grid with alternating diagonals; returns geometry arrays."""
    if nx < 2 or ny < 2:
        raise ValueError(f"grid must be at least 2x2, got {nx}x{ny}")
    if width <= 0 or height <= 0:
        raise ValueError(f"cloth dimensions must be positive, got {width}x{height}")
    du, dv = width / (nx - 1), height / (ny - 1)
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny))
    rest_uv = np.column_stack([(ix * du).ravel(), (iy * dv).ravel()])

    tris = []
    for cy in range(ny - 1):
        for cx in range(nx - 1):
            a = cy * nx + cx
            b, c, d = a + 1, a + nx, a + nx + 1
            if (cx + cy) % 2 == 0:
                tris += [(a, b, d), (a, d, c)]
            else:
                tris += [(a, b, c), (b, d, c)]
    triangles = np.asarray(tris, dtype=np.intp)

    struct = []
    for gy in range(ny):
        for gx in range(nx):
            v = gy * nx + gx
            if gx < nx - 1:
                struct.append((v, v + 1))
            if gy < ny - 1:
                struct.append((v, v + nx))
    struct_ij = np.asarray(struct, dtype=np.intp)

    shear = []
    for cy in range(ny - 1):
        for cx in range(nx - 1):
            a = cy * nx + cx
            shear += [(a, a + nx + 1), (a + 1, a + nx)]
    shear_ij = np.asarray(shear, dtype=np.intp)

    def rest_lengths(ij):
        d = rest_uv[ij[:, 1]] - rest_uv[ij[:, 0]]
        return np.linalg.norm(d, axis=1)

    # bend elements over edges shared by exactly two triangles
    edge_tris: dict = {}
    for t, (i, j, k) in enumerate(triangles):
        for e in ((i, j), (j, k), (k, i)):
            edge_tris.setdefault((min(e), max(e)), []).append(t)
    bend_idx, bend_edge_angle = [], []
    for (e0, e1), owners in sorted(edge_tris.items()):
        if len(owners) != 2:
            continue
        wings = []
        for t in owners:
            wings.append([v for v in triangles[t] if v != e0 and v != e1][0])
        bend_idx.append((wings[0], wings[1], e0, e1))
        duv = rest_uv[e1] - rest_uv[e0]
        bend_edge_angle.append(_fold_edge_angle(duv[0], duv[1]))
    bend_idx = np.asarray(bend_idx, dtype=np.intp)
    bend_edge_angle = np.asarray(bend_edge_angle, dtype=np.float64)

    # lumped vertex areas: one third of each incident triangle
    p = rest_uv[triangles]
    tri_area = 0.5 * np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    vertex_area = np.zeros(nx * ny)
    np.add.at(vertex_area, triangles.ravel(), np.repeat(tri_area / 3.0, 3))

    return dict(
        rest_uv=rest_uv,
        triangles=triangles,
        struct_ij=struct_ij,
        struct_rest=rest_lengths(struct_ij),
        shear_ij=shear_ij,
        shear_rest=rest_lengths(shear_ij),
        bend_idx=bend_idx,
        bend_rest_angle=np.zeros(len(bend_idx)),   # flat-rest fabric
        bend_edge_angle=bend_edge_angle,
        vertex_area=vertex_area,
    )


def build_flag_mesh(nx: int, ny: int, width: float, height: float,
                    base_height: float = 4.6):
    """Flag pinned along its hoist (the x = 0 column).

    The initial state lies in the x-z plane, streaming along +x from
    ``base_height``, with a deterministic 1 mm off-plane perturbation to
    break the symmetric equilibrium so flutter can develop.
    """
    geo = _build_grid(nx, ny, width, height)
    pinned = np.arange(0, nx * ny, nx, dtype=np.intp)   # ix == 0 column
    topo = ClothTopology(pinned=pinned, **geo)
    u, v = geo["rest_uv"][:, 0], geo["rest_uv"][:, 1]
    positions = np.column_stack([
        u,
        1e-3 * np.sin(1.5 * np.pi * u / width) * np.cos(np.pi * v / height),
        base_height + v,
    ])
    return topo, SimState(positions, np.zeros_like(positions))


def build_hanging_mesh(nx: int, ny: int, width: float, height: float,
                       rod_height: float = 2.0):
    """Cloth pinned along a horizontal rod (the first grid row).

    The initial state lies flat in the horizontal plane at ``rod_height``;
    under gravity the free part swings down below the rod.
    """
    geo = _build_grid(nx, ny, width, height)
    pinned = np.arange(nx, dtype=np.intp)               # iy == 0 row
    topo = ClothTopology(pinned=pinned, **geo)
    u, v = geo["rest_uv"][:, 0], geo["rest_uv"][:, 1]
    positions = np.column_stack([u, v, np.full_like(u, rod_height)])
    return topo, SimState(positions, np.zeros_like(positions))


# ---------------------------------------------------------------------------
# forces

def bending_stiffness(alpha, edge_angle, params: ClothParams,
                      alpha_nodes=None):
    """Anisotropic piecewise-linear bending stiffness.

    Interpolates over the five curvature samples (clamped at the ends)
    within each material direction, then blends linearly between the two
    directions nearest to ``edge_angle`` folded into [0, pi/2]:
    0..45deg mixes warp with bias, 45..90deg mixes bias with weft.
    """
    nodes = DEFAULT_ALPHA_NODES if alpha_nodes is None else np.asarray(alpha_nodes)
    alpha = np.asarray(alpha, dtype=np.float64)
    angle = np.asarray(edge_angle, dtype=np.float64)
    scalar = alpha.ndim == 0 and angle.ndim == 0
    alpha, angle = np.atleast_1d(alpha), np.atleast_1d(angle)

    per_dir = [np.interp(alpha, nodes, params.bend[d]) for d in range(3)]
    a = np.abs(angle) % np.pi
    a = np.where(a > np.pi / 2, np.pi - a, a)
    quarter = np.pi / 4
    t_low = np.clip(a / quarter, 0.0, 1.0)
    t_high = np.clip((a - quarter) / quarter, 0.0, 1.0)
    k = np.where(a <= quarter,
                 (1.0 - t_low) * per_dir[0] + t_low * per_dir[1],
                 (1.0 - t_high) * per_dir[1] + t_high * per_dir[2])
    return float(k[0]) if scalar else k


def bending_forces(positions: np.ndarray, topology: ClothTopology,
                   params: ClothParams, alpha_nodes=None) -> np.ndarray:
    """Per-vertex bending forces of every four-vertex hinge element.

    Element geometry follows the standard four-vertex bending modes over
    the shared edge (x3, x4) with wing vertices x1 and x2; degenerate
    triangles contribute nothing.
    """
    idx = topology.bend_idx
    forces = np.zeros_like(positions)
    if len(idx) == 0:
        return forces
    x1, x2 = positions[idx[:, 0]], positions[idx[:, 1]]
    x3, x4 = positions[idx[:, 2]], positions[idx[:, 3]]

    n1 = np.cross(x1 - x3, x1 - x4)
    n2 = np.cross(x2 - x4, x2 - x3)
    e = x4 - x3
    n1len = np.linalg.norm(n1, axis=1)
    n2len = np.linalg.norm(n2, axis=1)
    elen = np.linalg.norm(e, axis=1)
    ok = (n1len > _DEGENERATE_NORMAL) & (n2len > _DEGENERATE_NORMAL) \
        & (elen > _DEGENERATE_SPRING)
    n1len = np.where(ok, n1len, 1.0)
    n2len = np.where(ok, n2len, 1.0)
    elen = np.where(ok, elen, 1.0)

    n1_hat = n1 / n1len[:, None]
    n2_hat = n2 / n2len[:, None]
    e_hat = e / elen[:, None]
    cos_phi = np.clip(np.einsum("ij,ij->i", n1_hat, n2_hat), -1.0, 1.0)
    sign = np.sign(np.einsum("ij,ij->i", np.cross(n1_hat, n2_hat), e_hat))
    sin_half = sign * np.sqrt(np.maximum(0.0, 0.5 * (1.0 - cos_phi)))
    cos_half = np.sqrt(np.maximum(0.0, 0.5 * (1.0 + cos_phi)))

    nsum = n1len + n2len
    alpha = sin_half / nsum
    k_e = bending_stiffness(alpha, topology.bend_edge_angle, params, alpha_nodes)
    half_rest = 0.5 * topology.bend_rest_angle
    # sin(phi/2 - rest/2) expanded so only the half-angle terms are needed
    sin_dev = sin_half * np.cos(half_rest) - cos_half * np.sin(half_rest)
    factor = np.where(ok, k_e * elen**2 / nsum * sin_dev, 0.0)

    m1 = n1 / (n1len**2)[:, None]
    m2 = n2 / (n2len**2)[:, None]
    u1 = elen[:, None] * m1
    u2 = elen[:, None] * m2
    d14 = np.einsum("ij,ij->i", x1 - x4, e_hat)[:, None]
    d24 = np.einsum("ij,ij->i", x2 - x4, e_hat)[:, None]
    d13 = np.einsum("ij,ij->i", x1 - x3, e_hat)[:, None]
    d23 = np.einsum("ij,ij->i", x2 - x3, e_hat)[:, None]
    u3 = d14 * m1 + d24 * m2
    u4 = -(d13 * m1 + d23 * m2)

    f = factor[:, None]
    np.add.at(forces, idx[:, 0], f * u1)
    np.add.at(forces, idx[:, 1], f * u2)
    np.add.at(forces, idx[:, 2], f * u3)
    np.add.at(forces, idx[:, 3], f * u4)
    return forces


def stretch_shear_forces(positions: np.ndarray, velocities: np.ndarray,
                         topology: ClothTopology, config: SceneConfig) -> np.ndarray:
    """Damped Hooke forces of the structural and shear springs."""
    ij = np.concatenate([topology.struct_ij, topology.shear_ij])
    rest = np.concatenate([topology.struct_rest, topology.shear_rest])
    k = np.concatenate([
        np.full(len(topology.struct_ij), config.k_struct),
        np.full(len(topology.shear_ij), config.k_shear),
    ])
    d = positions[ij[:, 1]] - positions[ij[:, 0]]
    length = np.linalg.norm(d, axis=1)
    ok = length > _DEGENERATE_SPRING
    safe = np.where(ok, length, 1.0)
    d_hat = d / safe[:, None]
    rel_v = np.einsum("ij,ij->i",
                      velocities[ij[:, 1]] - velocities[ij[:, 0]], d_hat)
    magnitude = np.where(ok, k * (length - rest) + config.spring_damping * rel_v, 0.0)
    f = magnitude[:, None] * d_hat
    forces = np.zeros_like(positions)
    np.add.at(forces, ij[:, 0], f)
    np.add.at(forces, ij[:, 1], -f)
    return forces


def external_forces(positions: np.ndarray, velocities: np.ndarray,
                    topology: ClothTopology, params: ClothParams,
                    config: SceneConfig) -> np.ndarray:
    """Gravity plus relative-velocity Stokes wind drag, per point mass."""
    area = topology.vertex_area[:, None]
    gravity = params.area_weight * area * config.gravity_vec[None, :]
    wind = params.wind_speed * config.wind_vec
    drag = config.drag_coeff * area * (wind[None, :] - velocities)
    return gravity + drag


def internal_forces(positions, velocities, topology, params, config) -> np.ndarray:
    """Stretch + shear + bending; sums to zero over all vertices."""
    return (stretch_shear_forces(positions, velocities, topology, config)
            + bending_forces(positions, topology, params, config.alpha_nodes))


def _check_finite(x, v, substep):
    bad = ~(np.isfinite(x).all(axis=1) & np.isfinite(v).all(axis=1))
    if bad.any():
        vertex = int(np.argmax(bad))
        raise SimulationError(
            f"non-finite state at substep {substep}, vertex {vertex}")


def step(state: SimState, topology: ClothTopology, params: ClothParams,
         config: SceneConfig) -> SimState:
    """Advance one output frame with substepped semi-implicit Euler."""
    x = state.positions.copy()
    v = state.velocities.copy()
    pinned = topology.pinned
    x_pin = x[pinned].copy()
    mass = (params.area_weight * topology.vertex_area)[:, None]
    decay = 1.0 - config.velocity_damping * config.dt
    for sub in range(config.substeps_per_frame):
        f = internal_forces(x, v, topology, params, config) \
            + external_forces(x, v, topology, params, config)
        v = (v + config.dt * f / mass) * decay
        x = x + config.dt * v
        x[pinned] = x_pin
        v[pinned] = 0.0
        if not np.isfinite(x.sum()) or not np.isfinite(v.sum()):
            _check_finite(x, v, sub)
    return SimState(x, v, state.time + config.frame_dt)


def simulate(params: ClothParams, topology: ClothTopology,
             initial_state: SimState, config: SceneConfig) -> np.ndarray:
    """Run the full clip; returns frame positions shaped (frames, n, 3).

    Frame t holds the positions at time ``t * frame_dt``; frame 0 is the
    initial state. Deterministic for identical inputs.
    """
    frames = np.empty((config.frames, topology.n_vertices, 3))
    frames[0] = initial_state.positions
    state = initial_state
    for t in range(1, config.frames):
        try:
            state = step(state, topology, params, config)
        except SimulationError as err:
            raise SimulationError(f"frame {t}: {err}") from err
        frames[t] = state.positions
    return frames


def relax_to_equilibrium(topology: ClothTopology, state: SimState,
                         params: ClothParams, config: SceneConfig,
                         max_time: float = 30.0, damping: float = 6.0,
                         quench_dt: float = 0.5, tol: float = 2e-7) -> SimState:
    """Settle the cloth to a static equilibrium of the configured forces.

    Quenched descent: simulate with elevated velocity damping and zero
    all velocities every ``quench_dt`` of simulated time, which kills the
    slow fold oscillations plain damping cannot. Stops when a quench
    moves no vertex by more than ``tol`` or after ``max_time``. Use with
    ``wind_speed = 0`` to produce the hanging-at-rest start for flags.
    """
    relax_cfg = replace(config, velocity_damping=damping)
    frames_per_quench = max(1, round(quench_dt / config.frame_dt))
    cur = state.copy()
    prev = cur.positions.copy()
    for _ in range(int(max_time / (frames_per_quench * config.frame_dt))):
        for _ in range(frames_per_quench):
            cur = step(cur, topology, params, relax_cfg)
        cur = SimState(cur.positions.copy(), np.zeros_like(cur.velocities), cur.time)
        if np.abs(cur.positions - prev).max() < tol:
            break
        prev = cur.positions.copy()
    return SimState(cur.positions.copy(), np.zeros_like(cur.velocities), 0.0)


def kinetic_energy(state: SimState, topology: ClothTopology,
                   params: ClothParams) -> float:
    mass = params.area_weight * topology.vertex_area
    return float(0.5 * np.sum(mass * np.sum(state.velocities**2, axis=1)))


def elastic_energy(positions: np.ndarray, topology: ClothTopology,
                   config: SceneConfig) -> float:
    """Stretch + shear spring energy 0.5 * k * (L - L0)^2."""
    total = 0.0
    for ij, rest, k in ((topology.struct_ij, topology.struct_rest, config.k_struct),
                        (topology.shear_ij, topology.shear_rest, config.k_shear)):
        length = np.linalg.norm(positions[ij[:, 1]] - positions[ij[:, 0]], axis=1)
        total += 0.5 * k * np.sum((length - rest) ** 2)
    return float(total)


def export_obj(positions: np.ndarray, triangles: np.ndarray, path) -> None:
    """Write one frame as an ASCII OBJ (1-based face indices)."""
    with open(path, "w") as fh:
        for p in positions:
            fh.write(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")
        for t in triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


# ---------------------------------------------------------------------------
# scene description and JSON config files

@dataclass(frozen=True)
class MeshSpec:
    """Grid resolution and physical dimensions of the cloth rectangle."""

    nx: int = 13
    ny: int = 9
    width: float = 1.5
    height: float = 1.0
    base_height: float = 4.6

    def build(self, scene: str):
        if scene == "flag":
            return build_flag_mesh(self.nx, self.ny, self.width, self.height,
                                   self.base_height)
        return build_hanging_mesh(self.nx, self.ny, self.width, self.height,
                                  self.base_height)


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to run one simulation: mesh, material, scene."""

    params: ClothParams
    config: SceneConfig
    mesh: MeshSpec

    def build(self):
        return self.mesh.build(self.config.scene)


def default_flag_scene(wind_speed: float = 5.0) -> SceneSpec:
    return SceneSpec(
        params=ClothParams(bend=DEFAULT_BEND_GRID.copy(), area_weight=0.12,
                           wind_speed=wind_speed),
        config=SceneConfig(scene="flag", wind_dir=(1.0, 0.0, 0.0)),
        mesh=MeshSpec(nx=13, ny=9, width=1.5, height=1.0, base_height=4.6),
    )


def default_hanging_scene(wind_speed: float = 2.0) -> SceneSpec:
    return SceneSpec(
        params=ClothParams(bend=DEFAULT_BEND_GRID.copy(), area_weight=0.12,
                           wind_speed=wind_speed),
        config=SceneConfig(scene="hanging", wind_dir=(0.0, 1.0, 0.0)),
        mesh=MeshSpec(nx=9, ny=9, width=1.0, height=1.0, base_height=2.0),
    )


def scene_to_dict(spec: SceneSpec) -> dict:
    return {
        "scene": spec.config.scene,
        "mesh": {"nx": spec.mesh.nx, "ny": spec.mesh.ny,
                 "width": spec.mesh.width, "height": spec.mesh.height,
                 "base_height": spec.mesh.base_height},
        "wind": {"speed": spec.params.wind_speed,
                 "direction": list(spec.config.wind_dir)},
        "material": {"area_weight": spec.params.area_weight,
                     "bending": spec.params.bend.tolist(),
                     "alpha_nodes": list(spec.config.alpha_nodes)},
        "springs": {"structural": spec.config.k_struct,
                    "shear": spec.config.k_shear,
                    "damping": spec.config.spring_damping},
        "simulation": {"dt": spec.config.dt, "frame_dt": spec.config.frame_dt,
                       "frames": spec.config.frames},
        "drag_coefficient": spec.config.drag_coeff,
        "velocity_damping": spec.config.velocity_damping,
    }


def scene_from_dict(data: dict) -> SceneSpec:
    base = default_flag_scene() if data.get("scene", "flag") == "flag" \
        else default_hanging_scene()
    mesh_d = {**scene_to_dict(base)["mesh"], **data.get("mesh", {})}
    wind_d = {**scene_to_dict(base)["wind"], **data.get("wind", {})}
    mat_d = {**scene_to_dict(base)["material"], **data.get("material", {})}
    spr_d = {**scene_to_dict(base)["springs"], **data.get("springs", {})}
    sim_d = {**scene_to_dict(base)["simulation"], **data.get("simulation", {})}
    params = ClothParams(bend=np.asarray(mat_d["bending"], dtype=np.float64),
                         area_weight=float(mat_d["area_weight"]),
                         wind_speed=float(wind_d["speed"]))
    config = SceneConfig(
        scene=data.get("scene", "flag"),
        wind_dir=tuple(float(x) for x in wind_d["direction"]),
        drag_coeff=float(data.get("drag_coefficient", base.config.drag_coeff)),
        k_struct=float(spr_d["structural"]),
        k_shear=float(spr_d["shear"]),
        spring_damping=float(spr_d["damping"]),
        velocity_damping=float(data.get("velocity_damping",
                                        base.config.velocity_damping)),
        dt=float(sim_d["dt"]),
        frame_dt=float(sim_d["frame_dt"]),
        frames=int(sim_d["frames"]),
        alpha_nodes=tuple(float(x) for x in mat_d["alpha_nodes"]),
    )
    mesh = MeshSpec(nx=int(mesh_d["nx"]), ny=int(mesh_d["ny"]),
                    width=float(mesh_d["width"]), height=float(mesh_d["height"]),
                    base_height=float(mesh_d["base_height"]))
    return SceneSpec(params=params, config=config, mesh=mesh)


def save_scene(spec: SceneSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(scene_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scene(path) -> SceneSpec:
    with open(path) as fh:
        return scene_from_dict(json.load(fh))
