"""Quaternionic projective space HP^m, its twistor space CP^{2m+1}, and the
maps induced on them by a quaternion matrix.

Points of HP^m are left lines ``H X`` of row vectors X in H^{m+1}.  The
identification ``H^{m+1} = C^{2m+2}`` splits each quaternion as

    q = (w + x i) + (y + z i) j,

with C acting by left multiplication through ``w + x i``.  Right
multiplication by a quaternion matrix is then C-linear and induces the
holomorphic map between twistor spaces.

The affine chart used throughout is ``[1 : x_1 : ... : x_m]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousRecovery,
    ChartError,
    InconsistentSamples,
    InsufficientSamples,
    KernelPoint,
    PoleError,
    RankTooLow,
    ZeroVector,
)
from .hlinear import HMatrix, HVector, RealLinearMap, embed
from .quaternion import canonical_sign, lmat, qinv, qmul, qnorm2, random_unit, rmat
from .qlinear import check_quaternionic

CANONICAL_THRESHOLD = 1e-8
KERNEL_TOL = 1e-10
POLE_TOL = 1e-12
AMBIGUITY_THRESHOLD = 1e-6
RECOVERY_TOL = 1e-8
LINES_TOL = 1e-9


def _entries(x) -> np.ndarray:
    if isinstance(x, HVector):
        return x.entries
    e = np.asarray(x, dtype=float)
    return e.reshape(-1, 4) if e.ndim == 1 else e


# --------------------------------------------------------------------------
# points
# --------------------------------------------------------------------------

def canonical_rep(entries: np.ndarray) -> np.ndarray:
    """Left-divide by the first entry whose norm exceeds 1e-8 * ||rep||."""
    e = np.asarray(entries, dtype=float)
    total = np.linalg.norm(e)
    if total == 0.0:
        raise ZeroVector("the zero vector does not define a point")
    norms = np.sqrt(qnorm2(e))
    lead = int(np.argmax(norms > CANONICAL_THRESHOLD * total))
    return qmul(qinv(e[lead]), e)


@dataclass(frozen=True, eq=False)
class HPPoint:
    """Point of HP^m, stored as its canonical homogeneous representative."""

    rep: np.ndarray

    def __post_init__(self):
        rep = canonical_rep(_entries(self.rep))
        if rep.shape[0] < 2:
            raise ValueError("HP^m needs representatives of length m+1 >= 2")
        rep.setflags(write=False)
        object.__setattr__(self, "rep", rep)

    @classmethod
    def from_chart(cls, x) -> "HPPoint":
        e = _entries(x)
        return cls(np.vstack([[1.0, 0.0, 0.0, 0.0], e]))

    @property
    def dim(self) -> int:
        return self.rep.shape[0] - 1

    def chart(self) -> np.ndarray:
        """Affine coordinates ``x_j = X_0^{-1} X_j``; raises ChartError off the chart."""
        if np.sqrt(qnorm2(self.rep[0])) <= CANONICAL_THRESHOLD * np.linalg.norm(self.rep):
            raise ChartError("point lies on the hyperplane at infinity X_0 = 0")
        return qmul(qinv(self.rep[0]), self.rep[1:])

    def distance(self, other: "HPPoint") -> float:
        """Sine of the angle between the two quaternionic lines (0 iff equal)."""
        P = _line_projector(self.rep)
        x = embedded_unit(other.rep)
        return float(np.sqrt(max(0.0, 1.0 - x @ P @ x)))

    def isclose(self, other: "HPPoint", atol: float = 1e-9) -> bool:
        return self.dim == other.dim and bool(
            np.allclose(self.rep, other.rep, rtol=0.0, atol=atol)
        )

    def to_json(self) -> list[list[float]]:
        return self.rep.tolist()


def embedded_unit(rep) -> np.ndarray:
    x = np.asarray(rep, dtype=float).reshape(-1)
    return x / np.linalg.norm(x)


def _line_projector(rep) -> np.ndarray:
    """Orthogonal projector (real coordinates) onto the left line H rep."""
    basis = np.stack([qmul(e, rep).reshape(-1) for e in np.eye(4)])
    q, _ = np.linalg.qr(basis.T)
    return q @ q.T


def hvec_to_complex(x) -> np.ndarray:
    e = _entries(x)
    z = np.empty(2 * e.shape[0], dtype=complex)
    z[0::2] = e[:, 0] + 1j * e[:, 1]
    z[1::2] = e[:, 2] + 1j * e[:, 3]
    return z


def complex_to_hvec(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.stack([z[0::2].real, z[0::2].imag, z[1::2].real, z[1::2].imag], axis=-1)


def j_twist(z) -> np.ndarray:
    """Complex coordinates of ``j X`` given those of X."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    out[0::2] = -np.conj(z[1::2])
    out[1::2] = np.conj(z[0::2])
    return out


@dataclass(frozen=True, eq=False)
class CPPoint:
    """Point of CP^{2m+1}; canonical representative has first significant entry 1."""

    rep: np.ndarray

    def __post_init__(self):
        z = np.array(self.rep, dtype=complex).reshape(-1)
        if z.size < 4 or z.size % 2:
            raise ValueError("CP^{2m+1} needs representatives of even length >= 4")
        total = np.linalg.norm(z)
        if total == 0.0:
            raise ZeroVector("the zero vector does not define a point")
        lead = int(np.argmax(np.abs(z) > CANONICAL_THRESHOLD * total))
        z = z / z[lead]
        z.setflags(write=False)
        object.__setattr__(self, "rep", z)

    @property
    def dim(self) -> int:
        return self.rep.size // 2 - 1

    def isclose(self, other: "CPPoint", atol: float = 1e-9) -> bool:
        return self.rep.shape == other.rep.shape and bool(
            np.allclose(self.rep, other.rep, rtol=0.0, atol=atol)
        )


def twistor_project(z: CPPoint) -> HPPoint:
    """The twistor fibration CP^{2m+1} -> HP^m."""
    return HPPoint(complex_to_hvec(z.rep))


def hopf(x) -> HPPoint:
    """Hopf fibration H^{m+1} minus 0 -> HP^m."""
    e = _entries(x)
    if np.linalg.norm(e) == 0.0:
        raise ZeroVector("the Hopf map is undefined at 0")
    return HPPoint(e)


# --------------------------------------------------------------------------
# induced maps
# --------------------------------------------------------------------------

def phi_A(A: HMatrix, x: HPPoint, tol: float = KERNEL_TOL) -> HPPoint:
    """``[X] -> [XA]``."""
    X = x.rep
    XA = qmul(X[:, None, :], A.entries).sum(axis=0)
    if np.linalg.norm(XA) < tol * np.linalg.norm(X) * A.frobenius():
        raise KernelPoint("point lies in the projectivised kernel of A")
    return HPPoint(XA)


def complex_form(A: HMatrix) -> np.ndarray:
    """C-linear matrix of right multiplication by A on rows of C^{2(m+1)}.

    For a = a1 + a2 j the 2x2 block is [[a1, a2], [-conj(a2), conj(a1)]].
    """
    a1 = A.entries[..., 0] + 1j * A.entries[..., 1]
    a2 = A.entries[..., 2] + 1j * A.entries[..., 3]
    m, n = A.shape
    out = np.empty((2 * m, 2 * n), dtype=complex)
    out[0::2, 0::2] = a1
    out[0::2, 1::2] = a2
    out[1::2, 0::2] = -np.conj(a2)
    out[1::2, 1::2] = np.conj(a1)
    return out


def real_form(Ac: np.ndarray) -> RealLinearMap:
    """Real 4m x 4n matrix of a complex matrix acting on complex rows."""
    Ac = np.asarray(Ac, dtype=complex)
    rows = []
    for k in range(Ac.shape[0]):
        for unit in (1.0, 1j):
            e = np.zeros(Ac.shape[0], dtype=complex)
            e[k] = unit
            rows.append(complex_to_hvec(e @ Ac).reshape(-1))
    # rows are ordered (Re z_k, Im z_k) per complex coordinate, matching (w, x) / (y, z)
    return RealLinearMap.from_matrix(np.array(rows))


def big_phi_A(A: HMatrix, z: CPPoint, tol: float = KERNEL_TOL) -> CPPoint:
    """Holomorphic map CP^{2m+1} -> CP^{2n+1} induced by A."""
    Ac = complex_form(A)
    w = z.rep @ Ac
    if np.linalg.norm(w) < tol * np.linalg.norm(z.rep) * np.linalg.norm(Ac):
        raise KernelPoint("point lies in the projectivised complex kernel of A")
    return CPPoint(w)


def affine_eval(A: HMatrix, x, tol: float = POLE_TOL) -> np.ndarray:
    """``y_a = (x_j A[j,0] + A[0,0])^{-1} (x_j A[j,a] + A[0,a])`` in affine charts."""
    x = _entries(x)
    m1, n1 = A.shape
    if x.shape[0] != m1 - 1:
        raise ValueError(f"affine point has {x.shape[0]} coordinates, matrix expects {m1 - 1}")
    num = A.entries[0] + qmul(x[:, None, :], A.entries[1:]).sum(axis=0)
    den = num[0]
    if np.sqrt(qnorm2(den)) < tol * max(A.frobenius(), 1.0):
        raise PoleError("denominator vanishes: image is at infinity")
    return qmul(qinv(den), num[1:])


# --------------------------------------------------------------------------
# recovery of A from samples
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectiveSample:
    pairs: tuple

    def __post_init__(self):
        pairs = tuple((p if isinstance(p, HPPoint) else HPPoint(p), q if isinstance(q, HPPoint) else HPPoint(q))
                      for p, q in self.pairs)
        if not pairs:
            raise InsufficientSamples("empty sample set")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @classmethod
    def from_json(cls, obj) -> "ProjectiveSample":
        return cls(tuple((np.asarray(s["x"], dtype=float), np.asarray(s["y"], dtype=float)) for s in obj))

    def to_json(self) -> list[dict]:
        return [{"x": x.to_json(), "y": y.to_json()} for x, y in self.pairs]


@dataclass(frozen=True)
class Recovery:
    A: HMatrix
    residual: float
    second_singular_value: float

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(),
            "residual": self.residual,
            "second_singular_value": self.second_singular_value,
        }


def _linear_system(samples: ProjectiveSample, m: int, n: int) -> np.ndarray:
    """Real matrix of A -> [(x_j a^j_0 + a^0_0) y_a - (x_j a^j_a + a^0_a)]_{samples, a}.

    Unknowns are the entries of A flattened C-order over (row, col, component).
    """
    m1, n1 = m + 1, n + 1
    blocks = []
    for x, y in samples.pairs:
        X = np.vstack([[1.0, 0.0, 0.0, 0.0], x.chart()])
        Y = y.chart()
        LX = lmat(X)  # (m1, 4, 4): a -> X_j a
        for alpha in range(1, n1):
            row = np.zeros((4, m1, n1, 4))
            Ry = rmat(Y[alpha - 1])
            for j in range(m1):
                row[:, j, 0, :] += Ry @ LX[j]
                row[:, j, alpha, :] -= LX[j]
            blocks.append(row.reshape(4, -1))
    return np.vstack(blocks)


def chart_residual(A: HMatrix, samples: ProjectiveSample) -> float:
    """Max over samples of ``|phi^A(x) - y| / (1 + |y|)`` in affine coordinates."""
    worst = 0.0
    for x, y in samples.pairs:
        try:
            pred = affine_eval(A, x.chart())
        except PoleError:
            return float("inf")
        yc = y.chart()
        worst = max(worst, float(np.linalg.norm(pred - yc) / (1.0 + np.linalg.norm(yc))))
    return worst


def recover_matrix(samples: ProjectiveSample, m: int, n: int, tol: float = RECOVERY_TOL) -> Recovery:
    """Recover A (up to real scale) with phi^A(x) = y on every sample pair.

    Homogeneous least squares: the right singular vector of the stacked real
    system for its smallest singular value.  Output has Frobenius norm 1 and a
    positive first significant component.
    """
    unknowns = 4 * (m + 1) * (n + 1)
    if len(samples) < (m + 1) * (n + 1):
        raise InsufficientSamples(
            f"need at least {(m + 1) * (n + 1)} samples for HP^{m} -> HP^{n}, got {len(samples)}"
        )
    for x, y in samples.pairs:
        if x.dim != m or y.dim != n:
            raise ValueError(f"sample dimensions ({x.dim}, {y.dim}) do not match ({m}, {n})")
    M = _linear_system(samples, m, n)
    if M.shape[0] < unknowns - 1:
        raise InsufficientSamples("linear system is underdetermined")
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    s_full = np.zeros(unknowns)
    s_full[: s.size] = s
    second = float(s_full[-2] / s_full[0])
    A = HMatrix(canonical_sign(vt[-1]).reshape(m + 1, n + 1, 4))
    residual = chart_residual(A, samples)
    if second < AMBIGUITY_THRESHOLD:
        raise AmbiguousRecovery(
            f"second-smallest relative singular value {second:.3e} < {AMBIGUITY_THRESHOLD:g}"
        )
    if residual > tol:
        raise InconsistentSamples(
            f"best-fit matrix leaves chart residual {residual:.3e} > {tol:.3e}; "
            "the sampled map is not induced by any quaternion matrix"
        )
    return Recovery(A, residual, second)


def sample_map(A: HMatrix, points, rng=None) -> ProjectiveSample:
    """Pairs (x, phi^A(x)) with random left rescaling of the representatives."""
    pairs = []
    for p in points:
        x = p if isinstance(p, HPPoint) else HPPoint.from_chart(p)
        y = phi_A(A, x)
        if rng is None:
            pairs.append((x, y))
        else:
            # the same points, given by other representatives of their lines
            pairs.append((qmul(rng.standard_normal(4), x.rep), qmul(rng.standard_normal(4), y.rep)))
    return ProjectiveSample(tuple(pairs))


def cosine_similarity(A: HMatrix, B: HMatrix) -> float:
    a, b = A.entries.reshape(-1), B.entries.reshape(-1)
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


# --------------------------------------------------------------------------
# kernels and the global-definition check
# --------------------------------------------------------------------------

def quaternionic_kernel(A: HMatrix, tol: float = 1e-9) -> np.ndarray:
    """Real orthonormal basis (rows) of ``{X : XA = 0}``, an H-submodule of H^{m+1}."""
    M = embed(A).matrix
    u, s, _ = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol * max(s[0], 1e-300)))
    return u[:, rank:].T


def h_singular_values(A: HMatrix) -> np.ndarray:
    """Singular values of A over H (each real singular value of embed(A) has multiplicity 4)."""
    s = np.linalg.svd(embed(A).matrix, compute_uv=False)
    return s[0::4]


def _span_basis(reps, tol: float = 1e-9) -> np.ndarray:
    """Real orthonormal basis (columns) of the left H-span of the representatives."""
    vecs = [qmul(e, r).reshape(-1) for r in reps for e in np.eye(4)]
    u, s, _ = np.linalg.svd(np.array(vecs).T, full_matrices=False)
    return u[:, s > tol * s[0]]


@dataclass(frozen=True)
class GlobalDefinitionReport:
    consistent: bool
    reason: str | None
    kernel_dim: int  # over H
    kernel_in_hull: bool
    min_h_singular_value: float

    @property
    def globally_defined(self) -> bool:
        return self.consistent and self.kernel_dim == 0


def global_definition_check(samples: ProjectiveSample, m: int, n: int) -> GlobalDefinitionReport:
    """Recover A and decide whether phi^A can be defined on all of HP^m.

    The sample hull is the left H-span of the source representatives; a
    kernel inside it is a point of HP^m covered by the samples where the
    recovered map is undefined.
    """
    try:
        rec = recover_matrix(samples, m, n)
    except (InconsistentSamples, AmbiguousRecovery) as exc:
        return GlobalDefinitionReport(False, exc.reason, 0, False, 0.0)
    ker = quaternionic_kernel(rec.A)
    kernel_dim = ker.shape[0] // 4
    in_hull = False
    if kernel_dim:
        span = _span_basis([x.rep for x, _ in samples.pairs])
        # cosines of the principal angles between ker A and the span
        cosines = np.linalg.svd(ker @ span, compute_uv=False)
        in_hull = bool(cosines.size and cosines.max() > 1.0 - 1e-6)
    return GlobalDefinitionReport(True, None, kernel_dim, in_hull, float(h_singular_values(rec.A).min()))


# --------------------------------------------------------------------------
# quaternionic lines under complex-linear maps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LinesReport:
    trials: int
    failures: int
    worst_residual: float
    real_form_quaternionic: bool | None

    @property
    def holds(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "failures": self.failures,
            "worst_residual": self.worst_residual,
            "holds": self.holds,
            "real_form_quaternionic": self.real_form_quaternionic,
        }


def complex_rank(Ac, tol: float = 1e-9) -> int:
    s = np.linalg.svd(np.asarray(Ac, dtype=complex), compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def maps_quaternionic_lines(
    Ac, trials: int = 256, tol: float = LINES_TOL, seed: int = 0
) -> LinesReport:
    """Randomised check that ``A(qX)`` lies in the quaternionic line ``H A(X)``.

    When every trial passes, the real form of A is also run through the
    quaternionic-linearity decision procedure.
    """
    Ac = np.asarray(Ac, dtype=complex)
    if Ac.shape[0] % 2 or Ac.shape[1] % 2:
        raise ValueError("complex map must act between even-dimensional spaces C^{2m+2}")
    rank = complex_rank(Ac)
    if rank < 4:
        raise RankTooLow(f"complex rank {rank} < 4")
    rng = np.random.default_rng(seed)
    k = Ac.shape[0] // 2
    failures = 0
    worst = 0.0
    for _ in range(trials):
        X = rng.standard_normal((k, 4))
        q = random_unit(rng).array
        w = hvec_to_complex(X) @ Ac
        if np.linalg.norm(w) < 1e-12:
            continue
        line = np.stack([w, j_twist(w)], axis=1)
        target = hvec_to_complex(qmul(q, X)) @ Ac
        coef, *_ = np.linalg.lstsq(line, target, rcond=None)
        resid = float(np.linalg.norm(line @ coef - target) / max(np.linalg.norm(target), 1e-300))
        worst = max(worst, resid)
        if resid > tol:
            failures += 1
    cross = None
    if failures == 0:
        cross = check_quaternionic(real_form(Ac), tol=max(tol, 1e-9)).holds
    return LinesReport(trials, failures, worst, cross)
