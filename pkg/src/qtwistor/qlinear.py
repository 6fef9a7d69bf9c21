"""Quaternionic linear maps H^m -> H^n.

A real-linear ``t`` is quaternionic with respect to a sphere map ``T`` when
``t o L_q = L_{T(q)} o t`` for every unit imaginary ``q``.  Every such map
factors as ``t(X) = a X A`` with ``a`` a unit quaternion and ``A`` a
quaternion matrix; ``T`` is then conjugation by ``a``.

The module also carries the Hermitian projector ``b`` on symmetric 2-tensors
and the eigenspace / contraction helpers needed to exercise it on the
complexification.  Complexified vectors are numpy complex arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotQuaternionic, ZeroMap
from .hlinear import (
    HMatrix,
    HVector,
    RealLinearMap,
    embed,
    extract_hmatrix,
    left_mult_operator,
)
from .quaternion import (
    I,
    J,
    K,
    ImaginaryUnit,
    Quaternion,
    UnitQuaternion,
    _as_array,
    canonical_sign,
    from_rotation,
    random_imaginary_unit,
    rotation_of,
)

DEFAULT_TOL = 1e-9
ZERO_MAP_SCALE = 1e-8
SPOT_CHECK_DIRECTIONS = 16


@dataclass(frozen=True, eq=False)
class SphereMap:
    """Orientation-preserving isometry of S^2 in Im H, as a rotation R (R @ v)."""

    rotation: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if not is_rotation(R, 1e-8):
            raise ValueError("matrix is not in SO(3)")
        R.setflags(write=False)
        object.__setattr__(self, "rotation", R)

    @classmethod
    def identity(cls) -> "SphereMap":
        return cls(np.eye(3))

    @classmethod
    def conjugation_by(cls, a: Quaternion) -> "SphereMap":
        return cls(rotation_of(a))

    def __call__(self, q) -> ImaginaryUnit:
        v = q.vector if isinstance(q, Quaternion) else np.asarray(q, dtype=float)
        return ImaginaryUnit.from_vector(self.rotation @ v)

    def __matmul__(self, inner: "SphereMap") -> "SphereMap":
        return SphereMap(self.rotation @ inner.rotation)

    def inverse(self) -> "SphereMap":
        return SphereMap(self.rotation.T)

    def unit(self) -> UnitQuaternion:
        """Sign-canonical a with T(q) = a q a^{-1}."""
        return from_rotation(self.rotation)

    def allclose(self, other: "SphereMap", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.rotation, other.rotation, rtol=0.0, atol=atol))

    def to_json(self) -> list[float]:
        return self.rotation.reshape(-1).tolist()

    @classmethod
    def from_json(cls, obj) -> "SphereMap":
        return cls(np.asarray(obj, dtype=float).reshape(3, 3))


def is_rotation(R, tol: float) -> bool:
    R = np.asarray(R, dtype=float)
    return bool(
        np.abs(R.T @ R - np.eye(3)).max() <= tol and abs(np.linalg.det(R) - 1.0) <= tol
    )


@dataclass(frozen=True)
class QuaternionicCheck:
    """Outcome of :func:`check_quaternionic`; ``reason`` is None when it holds."""

    sphere_map: SphereMap | None
    reason: str | None
    residual: float

    @property
    def holds(self) -> bool:
        return self.sphere_map is not None


def _is_zero(t: RealLinearMap) -> bool:
    return t.norm() < ZERO_MAP_SCALE * 4 * max(t.m, t.n)


def _solve_direction(t: RealLinearMap, q) -> tuple[np.ndarray, float]:
    """Best imaginary p with ``L_p o t = t o L_q``; returns (p, relative residual)."""
    target = (t @ left_mult_operator(q, t.m)).matrix.reshape(-1)
    cols = np.stack(
        [(left_mult_operator(e, t.n) @ t).matrix.reshape(-1) for e in (I, J, K)], axis=1
    )
    p, *_ = np.linalg.lstsq(cols, target, rcond=None)
    resid = np.linalg.norm(cols @ p - target) / t.norm()
    return p, float(resid)


def recover_sphere_map(t: RealLinearMap, tol: float = DEFAULT_TOL) -> SphereMap:
    """The unique T with ``t o J = T(J) o t``, solved on (i, j, k) by least squares."""
    if _is_zero(t):
        raise ZeroMap("the zero map is quaternionic with respect to every sphere map")
    columns = []
    for q in (I, J, K):
        p, resid = _solve_direction(t, q)
        if resid > tol:
            raise NotQuaternionic(f"no p with L_p o t = t o L_q for q={q!r} (residual {resid:.3e})")
        columns.append(p)
    R = np.stack(columns, axis=1)
    if not is_rotation(R, max(100 * tol, 1e-8)):
        raise NotQuaternionic("recovered sphere map is not an orientation-preserving isometry")
    # remove the rounding drift before wrapping
    u, _, vt = np.linalg.svd(R)
    return SphereMap(u @ vt)


def quaternionic_residual(t: RealLinearMap, T: SphereMap, q) -> float:
    """Relative size of ``t o L_q - L_{T(q)} o t``."""
    lhs = t @ left_mult_operator(q, t.m)
    rhs = left_mult_operator(T(q), t.n) @ t
    return (lhs - rhs).norm() / max(t.norm(), 1e-300)


def check_quaternionic(
    t: RealLinearMap,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    directions: int = SPOT_CHECK_DIRECTIONS,
) -> QuaternionicCheck:
    """Decide quaternionic linearity.  Never raises."""
    try:
        T = recover_sphere_map(t, tol)
    except ZeroMap:
        return QuaternionicCheck(None, ZeroMap.reason, 0.0)
    except NotQuaternionic:
        resid = max(_solve_direction(t, q)[1] for q in (I, J, K))
        return QuaternionicCheck(None, NotQuaternionic.reason, resid)
    rng = np.random.default_rng(seed)
    resid = max(quaternionic_residual(t, T, q) for q in (I, J, K))
    for _ in range(directions):
        resid = max(resid, quaternionic_residual(t, T, random_imaginary_unit(rng)))
    if resid > tol:
        return QuaternionicCheck(None, NotQuaternionic.reason, resid)
    return QuaternionicCheck(T, None, resid)


def is_quaternionic(t: RealLinearMap, tol: float = DEFAULT_TOL, seed: int = 0) -> SphereMap | None:
    return check_quaternionic(t, tol, seed).sphere_map


@dataclass(frozen=True)
class Decomposition:
    """``t = L_a o embed(A)``, i.e. ``t(X) = a X A``."""

    a: UnitQuaternion
    A: HMatrix
    sphere_map: SphereMap
    residual: float

    def reconstruct(self) -> RealLinearMap:
        return left_mult_operator(self.a, self.A.shape[1]) @ embed(self.A)

    def to_json(self) -> dict:
        return {
            "a": self.a.to_json(),
            "A": self.A.to_json(),
            "T": self.sphere_map.to_json(),
            "residual": self.residual,
        }


def decompose(t: RealLinearMap, tol: float = DEFAULT_TOL) -> Decomposition:
    T = recover_sphere_map(t, tol)
    a = canonical_sign(T.unit())
    rest = left_mult_operator(a.inv(), t.n) @ t
    A = extract_hmatrix(rest, tol * max(rest.row_sum_norm(), 1.0))
    d = Decomposition(a, A, T, 0.0)
    residual = (d.reconstruct() - t).norm() / t.norm()
    return Decomposition(a, A, T, float(residual))


def is_sp1_glmh(g: RealLinearMap, tol: float = DEFAULT_TOL) -> bool:
    """Membership in Sp(1).GL(m, H), the quaternionic linear automorphisms of H^m."""
    if g.m != g.n:
        return False
    if np.linalg.cond(g.matrix) >= 1.0 / tol:
        return False
    return is_quaternionic(g, tol) is not None


# --------------------------------------------------------------------------
# Hermitian projector on V (x) V
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """The admissible complex structure L_q on H^m, q a unit imaginary quaternion."""

    q: ImaginaryUnit
    m: int

    @property
    def operator(self) -> RealLinearMap:
        return left_mult_operator(self.q, self.m)

    def apply(self, v) -> np.ndarray:
        return np.asarray(v) @ self.operator.matrix

    def eigenspace(self, sign: int) -> np.ndarray:
        return eigenspace_basis(self, sign)


@dataclass(frozen=True, eq=False)
class SymTensor2:
    """Symmetric 2-tensor on R^{4m} (possibly complexified), packed upper triangle.

    ``matrix[a, b]`` is the coefficient of ``e_a (x) e_b``.
    """

    coefficients: np.ndarray
    dim: int

    def __post_init__(self):
        c = np.array(self.coefficients)
        if c.shape != (self.dim * (self.dim + 1) // 2,):
            raise ValueError(f"expected {self.dim * (self.dim + 1) // 2} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_matrix(cls, S, atol: float = 1e-12) -> "SymTensor2":
        S = np.asarray(S)
        if S.shape[0] != S.shape[1] or not np.allclose(S, S.T, rtol=0.0, atol=atol):
            raise ValueError("matrix is not symmetric")
        iu = np.triu_indices(S.shape[0])
        return cls(S[iu], S.shape[0])

    @property
    def matrix(self) -> np.ndarray:
        S = np.zeros((self.dim, self.dim), dtype=self.coefficients.dtype)
        iu = np.triu_indices(self.dim)
        S[iu] = self.coefficients
        S.T[iu] = self.coefficients
        return S

    def __add__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.coefficients + other.coefficients, self.dim)

    def __sub__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.coefficients - other.coefficients, self.dim)

    def transform(self, E) -> "SymTensor2":
        """Push forward by ``E (x) E`` where E acts on row vectors (``v @ E``)."""
        E = E.matrix if isinstance(E, RealLinearMap) else np.asarray(E)
        return SymTensor2.from_matrix(E.T @ self.matrix @ E, atol=1e-9)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def structure_endomorphisms(m: int, triple=(I, J, K)) -> list[np.ndarray]:
    """Row-form matrices of E_0 = Id and E_r = L_{triple[r-1]} on H^m."""
    return [np.eye(4 * m)] + [left_mult_operator(q, m).matrix for q in triple]


def _as_coords(X) -> np.ndarray:
    return X.real if isinstance(X, HVector) else np.asarray(X)


def projector_beta(X, Y, triple=(I, J, K)) -> np.ndarray:
    """``beta(X (x) Y) = sum_i E_i X (x) E_i Y`` as a (non-symmetric) coefficient matrix."""
    x, y = _as_coords(X), _as_coords(Y)
    if x.shape != y.shape:
        raise ValueError("X and Y must have the same dimension")
    E = structure_endomorphisms(x.shape[0] // 4, triple)
    return sum(np.outer(x @ Ei, y @ Ei) for Ei in E)


def projector_b(X, Y, triple=(I, J, K)) -> SymTensor2:
    """Hermitian projector b(X, Y) = 1/2 sum_i (E_i X (x) E_i Y + E_i Y (x) E_i X).

    X and Y may be HVectors, real coordinate vectors, or complex vectors of
    the complexification (b is extended complex-bilinearly).
    """
    B = projector_beta(X, Y, triple)
    return SymTensor2.from_matrix(0.5 * (B + B.T))


def sym_product(v, w) -> SymTensor2:
    """``v (.) w = v (x) w + w (x) v``, so that contraction gives a(v) w + a(w) v."""
    v, w = np.asarray(v), np.asarray(w)
    return SymTensor2.from_matrix(np.outer(v, w) + np.outer(w, v))


def contract(alpha, S: SymTensor2) -> np.ndarray:
    """Interior product of a covector into one slot of a symmetric tensor."""
    alpha = np.asarray(alpha)
    if alpha.shape != (S.dim,):
        raise ValueError(f"covector has shape {alpha.shape}, tensor dimension is {S.dim}")
    return alpha @ S.matrix


def eigenspace_basis(J_: ComplexStructure, sign: int) -> np.ndarray:
    """Orthonormal basis (rows) of the +i (sign=+1) or -i (sign=-1) eigenspace of J.

    Vectors v satisfy ``v @ J.operator.matrix == sign * 1j * v``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    M = J_.operator.matrix
    basis = scipy.linalg.null_space(M.T - sign * 1j * np.eye(M.shape[0]))
    return basis.T


def random_complex_structure(rng: np.random.Generator, m: int) -> ComplexStructure:
    return ComplexStructure(random_imaginary_unit(rng), m)


def orthogonal_structure(J_: ComplexStructure, rng: np.random.Generator) -> ComplexStructure:
    """A random K in Z_V orthogonal to J."""
    j = J_.q.vector
    v = rng.standard_normal(3)
    v -= (v @ j) * j
    return ComplexStructure(ImaginaryUnit.from_vector(v / np.linalg.norm(v)), J_.m)


def quaternionic_map(a, A: HMatrix) -> RealLinearMap:
    """``X -> a X A`` as a real map."""
    return left_mult_operator(_as_array(a), A.shape[1]) @ embed(A)
