"""Left H-modules H^m, quaternion matrices and their real embeddings.

Conventions (enforced by the test suite):

* vectors of H^m are *row* vectors and a quaternion matrix acts on the right,
  ``t(X) = X A``;
* H acts on H^m from the left, ``L_q(X) = q X``;
* real coordinates are interleaved per entry, ``(w1, x1, y1, z1, w2, ...)``;
* a :class:`RealLinearMap` from H^m to H^n is a 4m x 4n real matrix ``M``
  applied as ``x @ M``.  Composition ``f @ g`` means ``f o g``, whose matrix
  is therefore ``g.matrix @ f.matrix``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from numbers import Real

import numpy as np

from .errors import NotHLinear
from .quaternion import I, J, K, Quaternion, _as_array, lmat, qmul, rmat

STRUCTURE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class HVector:
    """Row vector of H^m stored as an (m, 4) array."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim == 1 and e.size % 4 == 0:
            e = e.reshape(-1, 4)
        if e.ndim != 2 or e.shape[1] != 4 or e.shape[0] < 1:
            raise ValueError(f"HVector needs shape (m, 4) with m >= 1, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def of(cls, *qs) -> "HVector":
        return cls(np.array([_as_array(q) for q in qs]))

    @classmethod
    def from_real(cls, x) -> "HVector":
        return cls(np.asarray(x, dtype=float).reshape(-1, 4))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def real(self) -> np.ndarray:
        return self.entries.reshape(-1)

    def __getitem__(self, i) -> Quaternion:
        return Quaternion.from_array(self.entries[i])

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def left_mul(self, q) -> "HVector":
        return HVector(qmul(_as_array(q), self.entries))

    def __matmul__(self, A: "HMatrix") -> "HVector":
        return HVector(qmul(self.entries[:, None, :], A.entries).sum(axis=0))

    def to_json(self) -> list[list[float]]:
        return self.entries.tolist()


@dataclass(frozen=True, eq=False)
class HMatrix:
    """m x n quaternion matrix stored as an (m, n, 4) array, acting by X -> XA."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 3 or e.shape[2] != 4 or min(e.shape[:2]) < 1:
            raise ValueError(f"HMatrix needs shape (m, n, 4) with m, n >= 1, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def identity(cls, m: int) -> "HMatrix":
        e = np.zeros((m, m, 4))
        e[np.arange(m), np.arange(m), 0] = 1.0
        return cls(e)

    @classmethod
    def zeros(cls, m: int, n: int) -> "HMatrix":
        return cls(np.zeros((m, n, 4)))

    @classmethod
    def random(cls, rng: np.random.Generator, m: int, n: int) -> "HMatrix":
        return cls(rng.standard_normal((m, n, 4)))

    @classmethod
    def scalar(cls, q, m: int = 1) -> "HMatrix":
        e = np.zeros((m, m, 4))
        e[np.arange(m), np.arange(m)] = _as_array(q)
        return cls(e)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape[0], self.entries.shape[1]

    def __getitem__(self, idx) -> Quaternion:
        return Quaternion.from_array(self.entries[idx])

    def __matmul__(self, other: "HMatrix") -> "HMatrix":
        return HMatrix(qmul(self.entries[:, :, None, :], other.entries[None, :, :, :]).sum(axis=1))

    def __add__(self, other: "HMatrix") -> "HMatrix":
        return HMatrix(self.entries + other.entries)

    def __sub__(self, other: "HMatrix") -> "HMatrix":
        return HMatrix(self.entries - other.entries)

    def __neg__(self) -> "HMatrix":
        return HMatrix(-self.entries)

    def __mul__(self, c: float) -> "HMatrix":
        return HMatrix(self.entries * float(c))

    __rmul__ = __mul__

    def left_mul(self, q) -> "HMatrix":
        return HMatrix(qmul(_as_array(q), self.entries))

    def right_mul(self, q) -> "HMatrix":
        return HMatrix(qmul(self.entries, _as_array(q)))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))

    def allclose(self, other: "HMatrix", atol: float = 1e-12) -> bool:
        return self.shape == other.shape and bool(
            np.allclose(self.entries, other.entries, rtol=0.0, atol=atol)
        )

    def to_json(self) -> dict:
        m, n = self.shape
        return {"rows": m, "cols": n, "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "HMatrix":
        e = np.asarray(obj["entries"], dtype=float)
        if e.shape != (int(obj["rows"]), int(obj["cols"]), 4):
            raise ValueError(
                f"HMatrix entries have shape {e.shape}, header says "
                f"({obj['rows']}, {obj['cols']}, 4)"
            )
        return cls(e)


@dataclass(frozen=True, eq=False)
class RealLinearMap:
    """Real-linear map H^m -> H^n as a 4m x 4n matrix acting on row vectors."""

    matrix: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.shape != (4 * self.m, 4 * self.n):
            raise ValueError(
                f"matrix shape {M.shape} does not match dims (4*{self.m}, 4*{self.n})"
            )
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_matrix(cls, M) -> "RealLinearMap":
        M = np.asarray(M, dtype=float)
        r, c = M.shape
        if r % 4 or c % 4:
            raise ValueError(f"matrix shape {M.shape} is not a multiple of 4")
        return cls(M, r // 4, c // 4)

    @classmethod
    def identity(cls, m: int) -> "RealLinearMap":
        return cls(np.eye(4 * m), m, m)

    @classmethod
    def zeros(cls, m: int, n: int) -> "RealLinearMap":
        return cls(np.zeros((4 * m, 4 * n)), m, n)

    def __call__(self, x):
        """Apply to an HVector, or to real row vector(s) of length 4m."""
        if isinstance(x, HVector):
            return HVector.from_real(x.real @ self.matrix)
        return np.asarray(x) @ self.matrix

    def __matmul__(self, inner: "RealLinearMap") -> "RealLinearMap":
        if inner.n != self.m:
            raise ValueError(f"cannot compose H^{inner.m}->H^{inner.n} with H^{self.m}->H^{self.n}")
        return RealLinearMap(inner.matrix @ self.matrix, inner.m, self.n)

    def __add__(self, other: "RealLinearMap") -> "RealLinearMap":
        return RealLinearMap(self.matrix + other.matrix, self.m, self.n)

    def __sub__(self, other: "RealLinearMap") -> "RealLinearMap":
        return RealLinearMap(self.matrix - other.matrix, self.m, self.n)

    def __neg__(self) -> "RealLinearMap":
        return RealLinearMap(-self.matrix, self.m, self.n)

    def __mul__(self, c) -> "RealLinearMap":
        if not isinstance(c, Real):
            return NotImplemented
        return RealLinearMap(self.matrix * float(c), self.m, self.n)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def row_sum_norm(self) -> float:
        return float(np.abs(self.matrix).sum(axis=1).max())

    def allclose(self, other: "RealLinearMap", atol: float = 1e-10) -> bool:
        return (self.m, self.n) == (other.m, other.n) and bool(
            np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol)
        )

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "data": self.matrix.reshape(-1).tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "RealLinearMap":
        m, n = int(obj["m"]), int(obj["n"])
        data = np.asarray(obj["data"], dtype=float)
        if data.size != 16 * m * n:
            raise ValueError(f"expected {16 * m * n} doubles for a {m}x{n} map, got {data.size}")
        return cls(data.reshape(4 * m, 4 * n), m, n)


@lru_cache(maxsize=4096)
def _left_mult_cached(q: tuple, m: int) -> RealLinearMap:
    return RealLinearMap(np.kron(np.eye(m), lmat(np.array(q)).T), m, m)


def left_mult_operator(q, m: int) -> RealLinearMap:
    """L_q : X -> qX on H^m."""
    if m < 1:
        raise ValueError("dimension must be >= 1")
    # results are immutable, so equal quaternions can share one operator
    return _left_mult_cached(tuple(float(c) for c in _as_array(q)), int(m))


def embed(A: HMatrix) -> RealLinearMap:
    """Real form of X -> XA."""
    m, n = A.shape
    # block (alpha, beta) is the row-form matrix of p -> p A[alpha, beta]
    blocks = np.swapaxes(rmat(A.entries), -1, -2)
    return RealLinearMap(blocks.transpose(0, 2, 1, 3).reshape(4 * m, 4 * n), m, n)


def default_tol(t: RealLinearMap) -> float:
    return STRUCTURE_RTOL * t.row_sum_norm()


def commutator_norms(t: RealLinearMap) -> list[float]:
    """Row-sum norms of ``t o L_q - L_q o t`` for q = i, j, k."""
    out = []
    for q in (I, J, K):
        c = t @ left_mult_operator(q, t.m) - left_mult_operator(q, t.n) @ t
        out.append(c.row_sum_norm())
    return out


def is_hlinear(t: RealLinearMap, tol: float | None = None) -> bool:
    tol = default_tol(t) if tol is None else tol
    return max(commutator_norms(t)) <= tol


def extract_hmatrix(t: RealLinearMap, tol: float | None = None) -> HMatrix:
    """Quaternion matrix A with ``embed(A) == t``; raises NotHLinear otherwise."""
    tol = default_tol(t) if tol is None else tol
    worst = max(commutator_norms(t))
    if worst > tol:
        raise NotHLinear(f"commutator with left multiplication has norm {worst:.3e} > {tol:.3e}")
    # A[alpha] is the image of the alpha-th basis vector, i.e. row 4*alpha
    return HMatrix(t.matrix[0::4].reshape(t.m, t.n, 4))
