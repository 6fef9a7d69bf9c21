"""Twistoriality checks for smooth maps between open sets of H^m and H^n.

On these flat models the quaternionic connections are trivial, so the second
fundamental form of a map is its Euclidean Hessian.  Everything is
estimated by central finite differences.  With ``J = L_q`` on the source and
``J' = L_{T(q)}`` on the target (T the pointwise sphere map of the
differential):

* tau residual: the T^{1,0;J'} part of Hess(u, v) for u, v in V^{0,1;J};
* tau' residual: the same for u in V^{1,0;J}, v in V^{0,1;J};

both relative to the operator norm of the Hessian.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivisionByZero, DomainEscape, NotQuaternionicAt
from .hlinear import HMatrix, RealLinearMap, left_mult_operator
from .quaternion import ImaginaryUnit, qconj, qinv, qmul, random_imaginary_unit
from .qlinear import ComplexStructure, QuaternionicCheck, SphereMap, check_quaternionic, eigenspace_basis, quaternionic_map

DEFAULT_STEP = 1e-4
POINTWISE_TOL = 1e-6
ZERO_DIFFERENTIAL = 1e-8
# finite-difference Hessians below this many ulps of |phi| / h^2 are noise
NOISE_ULPS = 1e3
HESSIAN_FLOOR = 1e-12

_s3 = 1.0 / np.sqrt(3.0)
FIXED_DIRECTIONS = (
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (-1.0, 0.0, 0.0),
    (0.0, -1.0, 0.0),
    (0.0, 0.0, -1.0),
    (_s3, _s3, _s3),
    (_s3, -_s3, -_s3),
)


@dataclass(frozen=True)
class SmoothMap:
    """A map R^{4m} -> R^{4n} given by a re-entrant evaluator."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    m: int
    n: int
    h: float = DEFAULT_STEP
    domain: Callable[[np.ndarray], bool] | None = None
    name: str = "map"

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.domain is not None and not self.domain(x):
            raise DomainEscape(f"{self.name}: point {x!r} is outside the domain")
        try:
            return np.asarray(self.evaluator(x), dtype=float)
        except (DivisionByZero, ZeroDivisionError) as exc:
            raise DomainEscape(f"{self.name}: evaluation failed at {x!r}") from exc

    def with_step(self, h: float) -> "SmoothMap":
        return SmoothMap(self.evaluator, self.m, self.n, h, self.domain, self.name)


def _step(phi: SmoothMap, x) -> float:
    return phi.h * max(1.0, float(np.linalg.norm(x)))


def _require_interior(phi: SmoothMap, x) -> None:
    # the stencil points are checked as they are evaluated; the centre is checked here
    phi(x)


# --------------------------------------------------------------------------
# built-in maps
# --------------------------------------------------------------------------

def affine_map(a, A: HMatrix, b=None) -> SmoothMap:
    """X -> a X A + b."""
    t = quaternionic_map(a, A)
    m, n = A.shape
    b = np.zeros(4 * n) if b is None else np.asarray(b, dtype=float).reshape(-1)
    return SmoothMap(lambda x: x @ t.matrix + b, m, n, name="affine")


def _invert(x):
    return qinv(x.reshape(4))


def inversion() -> SmoothMap:
    """x -> x^{-1} on H minus 0."""
    return SmoothMap(_invert, 1, 1, domain=lambda x: float(np.linalg.norm(x)) > 1e-6, name="inversion")


def conj_control(m: int = 1) -> SmoothMap:
    """Entrywise quaternionic conjugation (not quaternionic)."""
    return SmoothMap(lambda x: qconj(x.reshape(m, 4)).reshape(-1), m, m, name="conj-control")


def quadratic_control(eps: float = 0.5) -> SmoothMap:
    """x -> x + eps * conj(x)^2: differential is the identity at 0 only."""
    def f(x):
        c = qconj(x.reshape(4))
        return x + eps * qmul(c, c)

    return SmoothMap(f, 1, 1, name="quadratic-control")


def constant_map(value, m: int = 1) -> SmoothMap:
    value = np.asarray(value, dtype=float).reshape(-1)
    return SmoothMap(lambda x: value.copy(), m, value.size // 4, name="constant")


# --------------------------------------------------------------------------
# finite differences
# --------------------------------------------------------------------------

def differential_fd(phi: SmoothMap, x) -> RealLinearMap:
    """Central-difference Jacobian; row k is the derivative along e_k."""
    x = np.asarray(x, dtype=float)
    _require_interior(phi, x)
    h = _step(phi, x)
    E = np.eye(4 * phi.m)
    rows = [(phi(x + h * e) - phi(x - h * e)) / (2 * h) for e in E]
    return RealLinearMap(np.array(rows), phi.m, phi.n)


def _second_difference(phi: SmoothMap, x, u, v, h) -> np.ndarray:
    return (phi(x + h * (u + v)) - phi(x + h * (u - v)) - phi(x - h * (u - v)) + phi(x - h * (u + v))) / (4 * h * h)


def _hess_real(phi: SmoothMap, x, u, v, h) -> np.ndarray:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return np.zeros(4 * phi.n)
    return nu * nv * _second_difference(phi, x, u / nu, v / nv, h)


def hessian_fd(phi: SmoothMap, x, u, v) -> np.ndarray:
    """Second derivative of phi at x along (u, v); complex directions extend bilinearly."""
    x = np.asarray(x, dtype=float)
    _require_interior(phi, x)
    h = _step(phi, x)
    u, v = np.asarray(u), np.asarray(v)
    if not (np.iscomplexobj(u) or np.iscomplexobj(v)):
        return _hess_real(phi, x, u.astype(float), v.astype(float), h)
    ur, ui = u.real.astype(float), np.imag(u).astype(float)
    vr, vi = v.real.astype(float), np.imag(v).astype(float)
    H = lambda a, b: _hess_real(phi, x, a, b, h)  # noqa: E731
    return (H(ur, vr) - H(ui, vi)) + 1j * (H(ur, vi) + H(ui, vr))


def hessian_tensor(phi: SmoothMap, x) -> np.ndarray:
    """Array H[a, b, k] = d^2 phi_k / dx_a dx_b, symmetric in (a, b)."""
    x = np.asarray(x, dtype=float)
    _require_interior(phi, x)
    h = _step(phi, x)
    d = 4 * phi.m
    E = np.eye(d)
    H = np.zeros((d, d, 4 * phi.n))
    for a in range(d):
        for b in range(a, d):
            H[a, b] = H[b, a] = _second_difference(phi, x, E[a], E[b], h)
    return H


def hessian_operator_norm(H: np.ndarray, iterations: int = 50) -> float:
    """max over unit u of |H(u, u)|, i.e. the norm of the symmetric bilinear map.

    Alternating maximisation started from every coordinate direction; this is
    a lower bound that is exact whenever some start lies in the right basin.
    """
    d = H.shape[0]
    best = 0.0
    for start in range(d):
        u = np.zeros(d)
        u[start] = 1.0
        for _ in range(iterations):
            w = np.einsum("a,b,abk->k", u, u, H)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            S = np.einsum("abk,k->ab", H, w / nw)
            vals, vecs = np.linalg.eigh(S)
            u_new = vecs[:, np.argmax(np.abs(vals))]
            if abs(abs(u_new @ u) - 1.0) < 1e-15:
                u = u_new
                break
            u = u_new
        best = max(best, float(np.linalg.norm(np.einsum("a,b,abk->k", u, u, H))))
    return best


def _noise_floor(phi: SmoothMap, x) -> float:
    h = _step(phi, x)
    scale = float(np.abs(phi(x)).max()) + 1.0
    return max(HESSIAN_FLOOR, NOISE_ULPS * np.finfo(float).eps * scale / (h * h))


# --------------------------------------------------------------------------
# pointwise conditions
# --------------------------------------------------------------------------

def fd_tolerance(phi: SmoothMap, x) -> float:
    """Quaternionicity tolerance matched to the O(h^2) error of the Jacobian."""
    return max(POINTWISE_TOL, 10.0 * _step(phi, x) ** 2)


def pointwise_check(phi: SmoothMap, x, tol: float | None = None) -> QuaternionicCheck:
    tol = fd_tolerance(phi, x) if tol is None else tol
    return check_quaternionic(differential_fd(phi, x), tol)


def pointwise_quaternionic(phi: SmoothMap, x, tol: float | None = None) -> SphereMap | None:
    """Value at x of the sphere map of dphi, or None if dphi is not quaternionic there."""
    return pointwise_check(phi, x, tol).sphere_map


def _structure(J_, m: int) -> ComplexStructure:
    if isinstance(J_, ComplexStructure):
        return J_
    q = J_ if isinstance(J_, ImaginaryUnit) else ImaginaryUnit.from_vector(J_)
    return ComplexStructure(q, m)


@dataclass
class _PointData:
    sphere_map: SphereMap | None
    check: QuaternionicCheck
    hessian: np.ndarray
    hessian_norm: float
    noise_floor: float


def _point_data(phi: SmoothMap, x, tol: float | None) -> _PointData:
    check = pointwise_check(phi, x, tol)
    H = hessian_tensor(phi, x)
    return _PointData(check.sphere_map, check, H, hessian_operator_norm(H), _noise_floor(phi, x))


def _target_structure(data: _PointData, J_: ComplexStructure, x, n: int) -> np.ndarray:
    if data.sphere_map is None:
        if data.check.reason == "ZeroMap":
            # zero differential: no sphere map, residual reported against T = id
            return left_mult_operator(J_.q, n).matrix
        raise NotQuaternionicAt(x)
    return left_mult_operator(data.sphere_map(J_.q), n).matrix


def _type_residual(data: _PointData, J_: ComplexStructure, x, n: int, first_sign: int) -> float:
    Jt = _target_structure(data, J_, x, n)
    if data.hessian_norm <= data.noise_floor:
        return 0.0
    left = eigenspace_basis(J_, first_sign)
    right = eigenspace_basis(J_, -1)
    worst = 0.0
    for u in left:
        for v in right:
            hv = np.einsum("a,b,abk->k", u, v, data.hessian)
            # component of hv in the +i eigenspace of J'
            hv10 = 0.5 * (hv - 1j * (hv @ Jt))
            worst = max(worst, float(np.linalg.norm(hv10)))
    return worst / max(data.hessian_norm, HESSIAN_FLOOR)


def tau_residual(phi: SmoothMap, x, J_, tol: float | None = None) -> float:
    """Failure of Hess(V^{0,1;J}, V^{0,1;J}) to lie in W^{0,1;J'}."""
    x = np.asarray(x, dtype=float)
    return _type_residual(_point_data(phi, x, tol), _structure(J_, phi.m), x, phi.n, -1)


def tau_prime_residual(phi: SmoothMap, x, J_, tol: float | None = None) -> float:
    """Failure of Hess(V^{1,0;J}, V^{0,1;J}) to lie in W^{0,1;J'}."""
    x = np.asarray(x, dtype=float)
    return _type_residual(_point_data(phi, x, tol), _structure(J_, phi.m), x, phi.n, +1)


def totally_geodesic_residual(phi: SmoothMap, x) -> float:
    """Operator norm of the Hessian at x (zero iff phi is totally geodesic there)."""
    return hessian_operator_norm(hessian_tensor(phi, np.asarray(x, dtype=float)))


# --------------------------------------------------------------------------
# grid reports
# --------------------------------------------------------------------------

def default_directions(seed: int = 0, random_count: int = 8) -> list[ImaginaryUnit]:
    rng = np.random.default_rng(seed)
    fixed = [ImaginaryUnit.from_vector(v) for v in FIXED_DIRECTIONS]
    return fixed + [random_imaginary_unit(rng) for _ in range(random_count)]


@dataclass
class TwistorReport:
    map_name: str
    h: float
    tol: float
    rows: list[dict] = field(default_factory=list)

    def _values(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows if r.get(key) is not None], dtype=float)

    def summary(self) -> dict:
        out = {}
        for key in ("tau", "tau_prime", "hessian_norm", "quaternionic_residual"):
            v = self._values(key)
            if v.size:
                q = np.quantile(v, [0.0, 0.5, 0.9, 1.0])
                out[key] = {"min": q[0], "median": q[1], "p90": q[2], "max": q[3]}
            else:
                out[key] = None
        flags = [r["flag"] for r in self.rows]
        out["rows"] = len(self.rows)
        out["not_quaternionic"] = flags.count("NotQuaternionic")
        out["zero_differential"] = flags.count("ZeroDifferential")
        out["tau_twistorial"] = self.tau_twistorial
        out["tau_prime_twistorial"] = self.tau_prime_twistorial
        return out

    @property
    def tau_twistorial(self) -> bool:
        """Quaternionic at every point with tau residual within tolerance."""
        checked = [r for r in self.rows if r["flag"] is None]
        return (
            bool(checked)
            and all(r["flag"] != "NotQuaternionic" for r in self.rows)
            and all(r["tau"] <= self.tol for r in checked)
        )

    @property
    def tau_prime_twistorial(self) -> bool:
        checked = [r for r in self.rows if r["flag"] is None]
        return self.tau_twistorial and all(r["tau_prime"] <= self.tol for r in checked)

    def to_json(self) -> dict:
        return {
            "map": self.map_name,
            "h": self.h,
            "tol": self.tol,
            "rows": self.rows,
            "summary": self.summary(),
        }


def twistor_report(
    phi: SmoothMap,
    points,
    directions=None,
    tol: float = 1e-4,
    quaternionic_tol: float | None = None,
) -> TwistorReport:
    """Evaluate both twistoriality residuals over points x directions.

    Rows at critical points carry the ZeroDifferential flag and at
    non-quaternionic points the NotQuaternionic flag; neither counts towards
    the residual checks.
    """
    directions = default_directions() if directions is None else directions
    report = TwistorReport(phi.name, phi.h, tol)
    for x in points:
        x = np.asarray(x, dtype=float)
        data = _point_data(phi, x, quaternionic_tol)
        zero = data.check.reason == "ZeroMap"
        for q in directions:
            J_ = _structure(q, phi.m)
            row = {
                "point": x.tolist(),
                "J": J_.q.vector.tolist(),
                "hessian_norm": data.hessian_norm,
                "quaternionic_residual": data.check.residual,
                "flag": None,
                "tau": None,
                "tau_prime": None,
                "Phi_J": None,
            }
            if data.sphere_map is None and not zero:
                row["flag"] = "NotQuaternionic"
            else:
                row["tau"] = _type_residual(data, J_, x, phi.n, -1)
                row["tau_prime"] = _type_residual(data, J_, x, phi.n, +1)
                if zero:
                    row["flag"] = "ZeroDifferential"
                else:
                    row["Phi_J"] = data.sphere_map(J_.q).vector.tolist()
            report.rows.append(row)
    return report
