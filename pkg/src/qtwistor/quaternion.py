"""Quaternion arithmetic in the ordered basis (1, i, j, k).

Components are always stored and serialised as ``(w, x, y, z)``.  Besides the
immutable :class:`Quaternion` value type the module provides vectorised
helpers (``qmul``, ``lmat``, ...) acting on float arrays whose trailing axis
has length 4; the linear-algebra modules are built on those.

Rotations of ``Im H = R^3`` use the column convention ``R @ v``.
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from numbers import Real

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import DivisionByZero

UNIT_EPS = 1e-12
RENORMALIZE_WINDOW = 1e-6
SIGN_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-9
    abs: float = 1e-12


_tolerance: ContextVar[Tolerance] = ContextVar("qtwistor_tolerance", default=Tolerance())


def current_tolerance() -> Tolerance:
    return _tolerance.get()


@contextmanager
def tolerance(rel: float | None = None, abs: float | None = None):
    """Temporarily override the comparison tolerance used by ``isclose``."""
    old = _tolerance.get()
    token = _tolerance.set(
        Tolerance(old.rel if rel is None else rel, old.abs if abs is None else abs)
    )
    try:
        yield _tolerance.get()
    finally:
        _tolerance.reset(token)


# --------------------------------------------------------------------------
# array kernels
# --------------------------------------------------------------------------

def qmul(p, q) -> np.ndarray:
    """Hamilton product of quaternion arrays, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qconj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def qinv(q) -> np.ndarray:
    n2 = qnorm2(q)
    if np.any(n2 == 0.0):
        raise DivisionByZero("inverse of the zero quaternion")
    return qconj(q) / n2[..., None]


def lmat(p) -> np.ndarray:
    """Matrix of ``q -> p q`` acting on column vectors of components."""
    w, x, y, z = np.moveaxis(np.asarray(p, dtype=float), -1, 0)
    return np.stack(
        [
            np.stack([w, -x, -y, -z], -1),
            np.stack([x, w, -z, y], -1),
            np.stack([y, z, w, -x], -1),
            np.stack([z, -y, x, w], -1),
        ],
        axis=-2,
    )


def rmat(q) -> np.ndarray:
    """Matrix of ``p -> p q`` acting on column vectors of components."""
    w, x, y, z = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack(
        [
            np.stack([w, -x, -y, -z], -1),
            np.stack([x, w, z, -y], -1),
            np.stack([y, -z, w, x], -1),
            np.stack([z, y, -x, w], -1),
        ],
        axis=-2,
    )


# --------------------------------------------------------------------------
# value types
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Quaternion:
    w: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        w, x, y, z = (float(c) for c in np.asarray(a, dtype=float).reshape(4))
        return cls(w, x, y, z)

    @classmethod
    def from_json(cls, obj) -> "Quaternion":
        if len(obj) != 4:
            raise ValueError(f"a quaternion needs 4 components, got {len(obj)}")
        return cls.from_array(obj)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def vector(self) -> np.ndarray:
        """Imaginary part as a 3-vector."""
        return np.array([self.x, self.y, self.z])

    def to_json(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]

    def norm2(self) -> float:
        return self.w**2 + self.x**2 + self.y**2 + self.z**2

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def inv(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0.0:
            raise DivisionByZero("inverse of the zero quaternion")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    def isclose(self, other: "Quaternion") -> bool:
        tol = current_tolerance()
        return bool(np.allclose(self.array, _as_array(other), rtol=tol.rel, atol=tol.abs))

    def __add__(self, other):
        return Quaternion.from_array(self.array + _as_array(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Quaternion.from_array(self.array - _as_array(other))

    def __rsub__(self, other):
        return Quaternion.from_array(_as_array(other) - self.array)

    def __neg__(self):
        return type(self)(-self.w, -self.x, -self.y, -self.z)

    def __eq__(self, other):
        if not isinstance(other, Quaternion):
            return NotImplemented
        return (self.w, self.x, self.y, self.z) == (other.w, other.x, other.y, other.z)

    def __hash__(self):
        return hash((self.w, self.x, self.y, self.z))

    def __mul__(self, other):
        if isinstance(other, Real):
            return Quaternion.from_array(self.array * float(other))
        return Quaternion.from_array(qmul(self.array, _as_array(other)))

    def __rmul__(self, other):
        if isinstance(other, Real):
            return Quaternion.from_array(self.array * float(other))
        return Quaternion.from_array(qmul(_as_array(other), self.array))

    def __truediv__(self, other):
        if isinstance(other, Real):
            if other == 0:
                raise DivisionByZero("division by zero")
            return Quaternion.from_array(self.array / float(other))
        return self * Quaternion.from_array(_as_array(other)).inv()

    def __repr__(self) -> str:
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def _as_array(q) -> np.ndarray:
    if isinstance(q, Quaternion):
        return q.array
    if isinstance(q, Real):
        return np.array([float(q), 0.0, 0.0, 0.0])
    return np.asarray(q, dtype=float)


@dataclass(frozen=True, eq=False, repr=False)
class UnitQuaternion(Quaternion):
    """Element of Sp(1).  Inputs within 1e-6 of unit norm are renormalised."""

    def __post_init__(self):
        n = self.norm()
        if abs(n - 1.0) > RENORMALIZE_WINDOW:
            raise ValueError(f"not a unit quaternion (norm {n!r})")
        for name in ("w", "x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)) / n)

    def inv(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def __repr__(self) -> str:
        return f"UnitQuaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


@dataclass(frozen=True, eq=False, repr=False)
class ImaginaryUnit(Quaternion):
    """Unit imaginary quaternion, i.e. a point of S^2 in Im H (q^2 = -1)."""

    def __post_init__(self):
        if abs(self.w) > RENORMALIZE_WINDOW:
            raise ValueError(f"not imaginary (real part {self.w!r})")
        n = float(np.sqrt(self.x**2 + self.y**2 + self.z**2))
        if abs(n - 1.0) > RENORMALIZE_WINDOW:
            raise ValueError(f"not of unit norm (norm {n!r})")
        object.__setattr__(self, "w", 0.0)
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)) / n)

    @classmethod
    def from_vector(cls, v) -> "ImaginaryUnit":
        v = np.asarray(v, dtype=float)
        return cls(0.0, v[0], v[1], v[2])

    def __repr__(self) -> str:
        return f"ImaginaryUnit({self.x!r}, {self.y!r}, {self.z!r})"


ONE = Quaternion(1.0)
I = ImaginaryUnit(0.0, 1.0, 0.0, 0.0)
J = ImaginaryUnit(0.0, 0.0, 1.0, 0.0)
K = ImaginaryUnit(0.0, 0.0, 0.0, 1.0)
BASIS = (ONE, I, J, K)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return p * q


def conj(q: Quaternion) -> Quaternion:
    return q.conj()


def inv(q: Quaternion) -> Quaternion:
    return q.inv()


def norm(q: Quaternion) -> float:
    return q.norm()


def conjugation_action(a: UnitQuaternion, q: ImaginaryUnit) -> ImaginaryUnit:
    """Return ``a q a^{-1}``, the interior automorphism of H applied to q."""
    r = qmul(qmul(a.array, q.array), qconj(a.array))
    return ImaginaryUnit.from_vector(r[1:])


def rotation_of(a: Quaternion) -> np.ndarray:
    """SO(3) matrix of ``v -> a v a^{-1}`` on Im H, in the basis (i, j, k)."""
    w, x, y, z = np.asarray(_as_array(a)) / np.sqrt(qnorm2(_as_array(a)))
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def canonical_sign(q, threshold: float = SIGN_THRESHOLD):
    """Pick the representative of ``{q, -q}`` whose first significant component is positive.

    Works on a Quaternion or on any real array (flattened in C order), which
    is how matrices are sign-normalised elsewhere.
    """
    if isinstance(q, Quaternion):
        flat = q.array
    else:
        flat = np.asarray(q, dtype=float).reshape(-1)
    for c in flat:
        if abs(c) > threshold:
            if c < 0:
                return -q if isinstance(q, Quaternion) else -np.asarray(q, dtype=float)
            break
    return q


def from_rotation(R) -> UnitQuaternion:
    """Unit quaternion a (sign-canonical) with ``rotation_of(a) == R``."""
    x, y, z, w = Rotation.from_matrix(np.asarray(R, dtype=float)).as_quat()
    return canonical_sign(UnitQuaternion(w, x, y, z))


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def random_quaternion(rng: np.random.Generator) -> Quaternion:
    return Quaternion.from_array(rng.standard_normal(4))


def random_unit(rng: np.random.Generator) -> UnitQuaternion:
    v = rng.standard_normal(4)
    return UnitQuaternion(*(v / np.linalg.norm(v)))


def random_imaginary_unit(rng: np.random.Generator) -> ImaginaryUnit:
    v = rng.standard_normal(3)
    return ImaginaryUnit.from_vector(v / np.linalg.norm(v))


def random_oriented_triple(rng: np.random.Generator) -> tuple[ImaginaryUnit, ImaginaryUnit, ImaginaryUnit]:
    """Image of (i, j, k) under a random interior automorphism."""
    a = random_unit(rng)
    return tuple(conjugation_action(a, e) for e in (I, J, K))


def satisfies_quaternionic_identities(triple, atol: float = 1e-12) -> bool:
    """Check ``I^2 = J^2 = K^2 = IJK = -1`` for a triple of quaternions."""
    Iq, Jq, Kq = (_as_array(e) for e in triple)
    minus_one = np.array([-1.0, 0.0, 0.0, 0.0])
    products = [qmul(Iq, Iq), qmul(Jq, Jq), qmul(Kq, Kq), qmul(qmul(Iq, Jq), Kq)]
    return all(np.allclose(p, minus_one, rtol=0.0, atol=atol) for p in products)
