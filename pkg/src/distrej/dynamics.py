"""Rigid-body dynamics of fixed-base serial chains with revolute joints.

The arm is described link by link. Link ``i`` is reached from link ``i-1``
(or the base) by translating ``offset`` in the parent frame and then rotating
by ``q[i]`` about ``axis``. ``com`` and ``inertia`` are expressed in the link
frame; ``inertia`` is about the centre of mass.

All operations are pure functions of their arguments::

    tau = inverse_dynamics(model, JointState(q, qd, qdd))
        = mass_matrix(model, q) @ qdd + coriolis_matrix(model, q, qd) @ qd + gravity_vector(model, q)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from . import _backend
from .errors import ConfigurationError, InvalidStateError, SingularDynamicsError

ARM_SCHEMA_VERSION = 1
SINGULAR_CONDITION = 1e12
DEFAULT_GRAVITY = (0.0, 0.0, -9.81)


@dataclass(frozen=True, eq=False)
class Link:
    mass: float
    com: np.ndarray
    inertia: np.ndarray
    axis: np.ndarray
    offset: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "com", _as3(self.com, "com"))
        object.__setattr__(self, "axis", _as3(self.axis, "axis"))
        object.__setattr__(self, "offset", _as3(self.offset, "offset"))
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape == (6,):
            inertia = inertia_from_tuple(inertia)
        if inertia.shape != (3, 3):
            raise ConfigurationError(f"link {self.name!r}: inertia must be 3x3 or a 6-tuple")
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "mass", float(self.mass))
        if not (np.isfinite(self.mass) and self.mass > 0.0):
            raise ConfigurationError(f"link {self.name!r}: mass must be > 0, got {self.mass}")
        if not np.all(np.isfinite(inertia)) or not np.allclose(inertia, inertia.T, rtol=0, atol=1e-12):
            raise ConfigurationError(f"link {self.name!r}: inertia must be finite and symmetric")
        if np.linalg.eigvalsh(inertia).min() <= 0.0:
            raise ConfigurationError(f"link {self.name!r}: inertia must be positive definite")
        if abs(np.linalg.norm(self.axis) - 1.0) > 1e-12:
            raise ConfigurationError(f"link {self.name!r}: joint axis must be a unit vector")


@dataclass(frozen=True, eq=False)
class ArmModel:
    """Kinematic and inertial description of an n-DOF serial chain."""

    links: tuple[Link, ...]
    gravity: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_GRAVITY))
    tip: np.ndarray = field(default_factory=lambda: np.zeros(3))
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "gravity", _as3(self.gravity, "gravity"))
        object.__setattr__(self, "tip", _as3(self.tip, "tip"))
        if len(self.links) < 1:
            raise ConfigurationError("an arm needs at least one link")

    @property
    def n_dof(self) -> int:
        return len(self.links)

    @cached_property
    def arrays(self):
        return (
            np.array([lk.axis for lk in self.links]),
            np.array([lk.offset for lk in self.links]),
            np.array([lk.mass for lk in self.links]),
            np.array([lk.com for lk in self.links]),
            np.array([lk.inertia for lk in self.links]),
            self.gravity.copy(),
        )

    @cached_property
    def chain(self):
        return _backend.kernels.Chain(*self.arrays)

    def chain_for(self, kernels):
        """Kernel chain for an explicit backend module (used by benchmarks and backend tests)."""
        if kernels is _backend.kernels:
            return self.chain
        return kernels.Chain(*self.arrays)

    def link_end(self, index: int) -> np.ndarray:
        """Distal end of link ``index`` in its own frame (next joint origin, or ``tip``)."""
        if index + 1 < self.n_dof:
            return self.links[index + 1].offset.copy()
        return self.tip.copy()

    def with_gravity(self, gravity) -> "ArmModel":
        return replace(self, gravity=np.asarray(gravity, dtype=float))

    def scaled(self, fraction: float) -> "ArmModel":
        """Copy with every link mass and inertia multiplied by ``1 + fraction``."""
        if fraction <= -1.0:
            raise ConfigurationError("mass perturbation must keep masses positive")
        k = 1.0 + fraction
        links = [replace(lk, mass=lk.mass * k, inertia=lk.inertia * k) for lk in self.links]
        return replace(self, links=tuple(links))

    def with_point_mass(self, index: int, mass: float, point=None) -> "ArmModel":
        """Copy with a point mass rigidly attached to link ``index`` at ``point`` (link frame).

        ``point`` defaults to the link's distal end.
        """
        if mass == 0.0:
            return self
        if mass < 0.0:
            raise ConfigurationError("payload mass must be >= 0")
        if not 0 <= index < self.n_dof:
            raise ConfigurationError(f"payload link index {index} out of range")
        point = self.link_end(index) if point is None else _as3(point, "point")
        lk = self.links[index]
        total = lk.mass + mass
        com = (lk.mass * lk.com + mass * point) / total
        inertia = _shift_inertia(lk.inertia, lk.mass, lk.com - com) + _shift_inertia(
            np.zeros((3, 3)), mass, point - com)
        links = list(self.links)
        links[index] = replace(lk, mass=total, com=com, inertia=0.5 * (inertia + inertia.T))
        return replace(self, links=tuple(links))

    def to_dict(self) -> dict:
        return {
            "schema_version": ARM_SCHEMA_VERSION,
            "name": self.name,
            "gravity": self.gravity.tolist(),
            "tip": self.tip.tolist(),
            "links": [
                {
                    "name": lk.name,
                    "axis": lk.axis.tolist(),
                    "offset": lk.offset.tolist(),
                    "mass": lk.mass,
                    "com": lk.com.tolist(),
                    "inertia": inertia_to_tuple(lk.inertia),
                }
                for lk in self.links
            ],
        }


@dataclass
class JointState:
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.qd = np.asarray(self.qd, dtype=float)
        self.qdd = np.asarray(self.qdd, dtype=float)


def inertia_from_tuple(values) -> np.ndarray:
    """[Ixx, Iyy, Izz, Ixy, Ixz, Iyz] -> symmetric 3x3."""
    ixx, iyy, izz, ixy, ixz, iyz = (float(v) for v in values)
    return np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])


def inertia_to_tuple(inertia) -> list[float]:
    i = np.asarray(inertia, dtype=float)
    return [i[0, 0], i[1, 1], i[2, 2], i[0, 1], i[0, 2], i[1, 2]]


def arm_from_dict(data: dict) -> ArmModel:
    version = data.get("schema_version", ARM_SCHEMA_VERSION)
    if version != ARM_SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported arm schema_version {version}")
    try:
        links = [
            Link(
                mass=entry["mass"],
                com=entry.get("com", [0.0, 0.0, 0.0]),
                inertia=entry["inertia"],
                axis=entry["axis"],
                offset=entry.get("offset", [0.0, 0.0, 0.0]),
                name=str(entry.get("name", f"link{i + 1}")),
            )
            for i, entry in enumerate(data["links"])
        ]
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed arm description: {exc}") from exc
    return ArmModel(
        links=tuple(links),
        gravity=data.get("gravity", DEFAULT_GRAVITY),
        tip=data.get("tip", [0.0, 0.0, 0.0]),
        name=str(data.get("name", "")),
    )


def load_arm(path) -> ArmModel:
    """Parse an arm description file (YAML, see ``docs`` in the README)."""
    path = Path(path)
    if not path.is_file():
        bundled = Path(__file__).parent / "data" / "arms" / path.name
        if path.parent == Path(".") and bundled.is_file():
            path = bundled
        else:
            raise ConfigurationError(f"arm file not found: {path}")
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a mapping at top level")
    return arm_from_dict(data)


def bundled_arm(name: str) -> ArmModel:
    return load_arm(Path(__file__).parent / "data" / "arms" / f"{name}.yaml")


# ---------------------------------------------------------------- operations


def mass_matrix(model: ArmModel, q) -> np.ndarray:
    q = _state_vec(q, model.n_dof, "q")
    return model.chain.mass_matrix(q)


def coriolis_matrix(model: ArmModel, q, qd) -> np.ndarray:
    """Christoffel-symbol Coriolis matrix: ``C @ qd`` is the Coriolis/centripetal torque
    and ``dM/dt - 2 C`` is skew-symmetric."""
    n = model.n_dof
    return model.chain.coriolis_matrix(_state_vec(q, n, "q"), _state_vec(qd, n, "qd"))


def gravity_vector(model: ArmModel, q) -> np.ndarray:
    return model.chain.gravity_vector(_state_vec(q, model.n_dof, "q"))


def inverse_dynamics(model: ArmModel, state: JointState) -> np.ndarray:
    """Joint torques M(q) qdd + C(q, qd) qd + G(q), by recursive Newton-Euler."""
    n = model.n_dof
    return model.chain.rnea(
        _state_vec(state.q, n, "q"), _state_vec(state.qd, n, "qd"), _state_vec(state.qdd, n, "qdd"))


def forward_dynamics(model: ArmModel, q, qd, tau) -> np.ndarray:
    """Joint accelerations M^-1 (tau - C qd - G).

    Raises SingularDynamicsError when cond(M) exceeds 1e12.
    """
    n = model.n_dof
    q = _state_vec(q, n, "q")
    qd = _state_vec(qd, n, "qd")
    tau = _state_vec(tau, n, "tau")
    eig = np.linalg.eigvalsh(model.chain.mass_matrix(q))
    if eig[0] <= 0.0 or eig[-1] / eig[0] > SINGULAR_CONDITION:
        raise SingularDynamicsError(f"mass matrix condition number {eig[-1] / max(eig[0], 1e-300):.3g}")
    return model.chain.forward_dynamics(q, qd, tau)


def kinetic_energy(model: ArmModel, q, qd) -> float:
    qd = _state_vec(qd, model.n_dof, "qd")
    return 0.5 * float(qd @ mass_matrix(model, q) @ qd)


def potential_energy(model: ArmModel, q) -> float:
    """Gravitational potential energy, zero at the base origin."""
    _, _, coms, _, _ = model.chain.fk(_state_vec(q, model.n_dof, "q"))
    masses = model.arrays[2]
    return -float(np.sum(masses * (coms @ model.gravity)))


def point_jacobian(model: ArmModel, q, index: int, point) -> np.ndarray:
    """3 x n linear-velocity Jacobian of ``point`` (link ``index`` frame)."""
    q = _state_vec(q, model.n_dof, "q")
    z, p, _, _, rots = model.chain.fk(q)
    world = p[index] + rots[index] @ _as3(point, "point")
    jac = np.zeros((3, model.n_dof))
    for j in range(index + 1):
        jac[:, j] = np.cross(z[j], world - p[j])
    return jac


# ------------------------------------------------------------------- helpers


def _as3(v, name):
    arr = np.array(v, dtype=float).reshape(-1)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be a finite 3-vector")
    return arr


def _shift_inertia(inertia, mass, d):
    return inertia + mass * (float(d @ d) * np.eye(3) - np.outer(d, d))


def _state_vec(v, n, name):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise InvalidStateError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError(f"{name} contains non-finite entries")
    return arr
