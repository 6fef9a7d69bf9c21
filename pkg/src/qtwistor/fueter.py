"""Quaternionic / Fueter splitting of Hom_R(H^m, H^n).

For a sphere map T the operator

    C_T(t) = T(I) o t o I + T(J) o t o J + T(K) o t o K

satisfies C_T^2 + 2 C_T - 3 = 0.  Its -3 eigenspace is the space of maps
quaternionic with respect to T, its +1 eigenspace the linear
Fueter-quaternionic maps.  The spectral projectors are

    P_Q = (Id - C_T) / 4,    P_F = (3 Id + C_T) / 4.

C_T is materialised as a dense 16mn x 16mn matrix acting on the row-major
flattening of the 4m x 4n real matrix of t.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .hlinear import HMatrix, RealLinearMap, embed, left_mult_operator
from .quaternion import I, J, K, ImaginaryUnit, random_imaginary_unit, random_unit
from .qlinear import SphereMap

FUETER_TOL = 1e-9
RANK_TOL = 1e-8

# lines d in Q_V used to certify that the Q_{T o S_d} span F_T
DEFAULT_LINES = (
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (1.0, 1.0, 0.0),
    (0.0, 1.0, 1.0),
    (1.0, 0.0, 1.0),
)


@dataclass(frozen=True, eq=False)
class COperator:
    matrix: np.ndarray
    m: int
    n: int

    def __call__(self, t: RealLinearMap) -> RealLinearMap:
        out = self.matrix @ t.matrix.reshape(-1)
        return RealLinearMap(out.reshape(4 * self.m, 4 * self.n), self.m, self.n)

    @property
    def q_projector(self) -> np.ndarray:
        return (np.eye(self.matrix.shape[0]) - self.matrix) / 4.0

    @property
    def f_projector(self) -> np.ndarray:
        return (3.0 * np.eye(self.matrix.shape[0]) + self.matrix) / 4.0

    def minpoly_residual(self) -> float:
        """``||C^2 + 2C - 3|| / ||C||^2`` (Frobenius)."""
        C = self.matrix
        R = C @ C + 2.0 * C - 3.0 * np.eye(C.shape[0])
        return float(np.linalg.norm(R) / np.linalg.norm(C) ** 2)


def c_operator(T: SphereMap, m: int, n: int, triple=(I, J, K)) -> COperator:
    """Matrix of C_T on Hom_R(H^m, H^n), computed from an oriented orthonormal triple."""
    C = np.zeros((16 * m * n, 16 * m * n))
    for e in triple:
        src = left_mult_operator(e, m).matrix
        tgt = left_mult_operator(T(e), n).matrix
        # T(e) o t o e has matrix src @ t @ tgt
        C += np.kron(src, tgt.T)
    return COperator(C, m, n)


def fueter_split(t: RealLinearMap, T: SphereMap) -> tuple[RealLinearMap, RealLinearMap]:
    """Split t into its quaternionic (w.r.t. T) and Fueter parts."""
    C = c_operator(T, t.m, t.n)
    ct = C(t)
    q_part = RealLinearMap((t.matrix - ct.matrix) / 4.0, t.m, t.n)
    f_part = RealLinearMap((3.0 * t.matrix + ct.matrix) / 4.0, t.m, t.n)
    return q_part, f_part


def is_fueter(t: RealLinearMap, T: SphereMap, tol: float = FUETER_TOL) -> bool:
    """True iff ``||C_T(t) - t|| <= tol * ||t||``; the zero map is Fueter."""
    C = c_operator(T, t.m, t.n)
    return (C(t) - t).norm() <= tol * t.norm()


def symmetry_s_d(d) -> SphereMap:
    """Rotation by pi about the line d: q -> 2<q, d> d - q."""
    v = d.vector if isinstance(d, ImaginaryUnit) else np.asarray(d, dtype=float)
    v = v / np.linalg.norm(v)
    return SphereMap(2.0 * np.outer(v, v) - np.eye(3))


def quaternionic_basis(T: SphereMap, m: int, n: int) -> list[RealLinearMap]:
    """Real basis of Q_T: the maps X -> a X E with rotation_of(a) = T, E elementary."""
    a = T.unit()
    La = left_mult_operator(a, n)
    basis = []
    for r in range(4):
        for alpha in range(m):
            for beta in range(n):
                e = np.zeros((m, n, 4))
                e[alpha, beta, r] = 1.0
                basis.append(La @ embed(HMatrix(e)))
    return basis


def _rank(vectors: np.ndarray) -> int:
    s = np.linalg.svd(vectors, compute_uv=False)
    return int(np.sum(s > RANK_TOL * max(s[0], 1.0)))


@dataclass(frozen=True)
class SpanCertificate:
    span_dim: int
    target_dim: int
    inclusion_residual: float
    lines: tuple

    @property
    def holds(self) -> bool:
        return self.span_dim == self.target_dim and self.inclusion_residual <= FUETER_TOL


def fueter_span(T: SphereMap, m: int, n: int, lines=DEFAULT_LINES) -> SpanCertificate:
    """Span of the union of Q_{T o S_d} over the given lines, and how well F_T contains it."""
    PF = c_operator(T, m, n).f_projector
    vecs = []
    worst = 0.0
    for d in lines:
        for t in quaternionic_basis(T @ symmetry_s_d(d), m, n):
            v = t.matrix.reshape(-1)
            worst = max(worst, float(np.linalg.norm(PF @ v - v) / np.linalg.norm(v)))
            vecs.append(v)
    return SpanCertificate(_rank(np.array(vecs)), 12 * m * n, worst, tuple(map(tuple, lines)))


def fueter_span_check(T: SphereMap, m: int, n: int, lines=DEFAULT_LINES) -> bool:
    return fueter_span(T, m, n, lines).holds


@dataclass(frozen=True)
class ObstructionReport:
    trials: int
    failures: int  # nonzero compositions that were (wrongly) Fueter
    factor_failures: int  # factors that were not Fueter w.r.t. T' / T''
    zero_composition_fueter: bool

    @property
    def holds(self) -> bool:
        return self.failures == 0 and self.factor_failures == 0 and self.zero_composition_fueter


def composition_obstruction_check(
    T1: SphereMap,
    T2: SphereMap,
    d,
    trials: int = 256,
    seed: int = 0,
    dims: tuple[int, int, int] = (1, 1, 1),
) -> ObstructionReport:
    """Compose t' (quaternionic w.r.t. S_d o T') with t'' (w.r.t. T'' o S_d).

    Both factors are Fueter with respect to T' and T''; the composite is
    quaternionic with respect to T'' o T' and so is Fueter only when zero.
    ``dims`` = (dim U, dim V, dim W) over H.
    """
    rng = np.random.default_rng(seed)
    l, m, n = dims
    S = symmetry_s_d(d)
    a1 = (S @ T1).unit()
    a2 = (T2 @ S).unit()
    T21 = T2 @ T1
    failures = factor_failures = done = 0
    while done < trials:
        t1 = left_mult_operator(a1, m) @ embed(HMatrix.random(rng, l, m))
        t2 = left_mult_operator(a2, n) @ embed(HMatrix.random(rng, m, n))
        if not (is_fueter(t1, T1) and is_fueter(t2, T2)):
            factor_failures += 1
        comp = t2 @ t1
        if comp.norm() < 1e-10:
            continue
        done += 1
        if is_fueter(comp, T21):
            failures += 1
    zero = RealLinearMap.zeros(l, m)
    t2 = left_mult_operator(a2, n) @ embed(HMatrix.random(rng, m, n))
    zero_ok = is_fueter(t2 @ zero, T21)
    return ObstructionReport(trials, failures, factor_failures, zero_ok)


@dataclass(frozen=True)
class FueterReport:
    minpoly_residual: float
    dim_Q: int
    dim_F: int
    span_dim: int
    trials: int
    failures: int

    def to_json(self) -> dict:
        return asdict(self)

    def holds(self, m: int, n: int) -> bool:
        return (
            self.minpoly_residual <= FUETER_TOL
            and self.dim_Q == 4 * m * n
            and self.dim_F == 12 * m * n
            and self.span_dim == 12 * m * n
            and self.failures == 0
        )


def random_sphere_map(rng: np.random.Generator) -> SphereMap:
    return SphereMap.conjugation_by(random_unit(rng))


def fueter_suite(
    m: int,
    n: int,
    T: SphereMap | None = None,
    trials: int = 256,
    seed: int = 0,
    lines=DEFAULT_LINES,
) -> FueterReport:
    """Run the minimal-polynomial, dimension, span and obstruction checks together."""
    rng = np.random.default_rng(seed)
    T = random_sphere_map(rng) if T is None else T
    C = c_operator(T, m, n)
    span = fueter_span(T, m, n, lines)
    T2 = random_sphere_map(rng)
    d = random_imaginary_unit(rng)
    obstruction = composition_obstruction_check(
        T, T2, d, trials=trials, seed=int(rng.integers(2**31)), dims=(m, m, n)
    )
    return FueterReport(
        minpoly_residual=C.minpoly_residual(),
        dim_Q=_rank(C.q_projector),
        dim_F=_rank(C.f_projector),
        span_dim=span.span_dim,
        trials=obstruction.trials,
        failures=obstruction.failures + obstruction.factor_failures,
    )
