"""Command-line front door: ``qtwistor <subcommand> [input] [flags]``.

Every subcommand reads JSON (a path, or ``-`` for stdin), writes one JSON
object with sorted keys to ``--out`` or stdout, and exits with

* 0 when the property holds or the computation succeeded,
* 1 when the property fails (the output carries a ``reason``),
* 2 on input errors, with a diagnostic object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

import numpy as np

from .errors import (
    AmbiguousRecovery,
    ChartError,
    DomainEscape,
    InconsistentSamples,
    InsufficientSamples,
    KernelPoint,
    NotHLinear,
    NotQuaternionic,
    QTwistorError,
    RankTooLow,
    ZeroMap,
)
from .flat import (
    SmoothMap,
    affine_map,
    conj_control,
    default_directions,
    inversion,
    quadratic_control,
    twistor_report,
)
from .fueter import fueter_split, fueter_suite, is_fueter
from .hlinear import HMatrix, RealLinearMap, commutator_norms, default_tol, extract_hmatrix
from .projective import (
    HPPoint,
    ProjectiveSample,
    complex_form,
    maps_quaternionic_lines,
    phi_A,
    recover_matrix,
)
from .qlinear import SphereMap, check_quaternionic, decompose
from .quaternion import random_unit

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# errors that mean "the input was unusable" rather than "the property fails"
INPUT_ERRORS = (
    OSError,
    json.JSONDecodeError,
    KeyError,
    IndexError,
    TypeError,
    ValueError,
    InsufficientSamples,
    ChartError,
    RankTooLow,
    DomainEscape,
)


class InputError(Exception):
    pass


def _load(path: str | None):
    if path is None:
        raise InputError("this subcommand needs an input file")
    if path == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(obj, sort_keys=True, default=_jsonable, separators=(",", ": "), indent=1)


def _rlm(obj) -> RealLinearMap:
    return RealLinearMap.from_json(obj)


# --------------------------------------------------------------------------
# subcommands: each returns (payload, exit code)
# --------------------------------------------------------------------------

def cmd_check_hlinear(args) -> tuple[dict, int]:
    t = _rlm(_load(args.input))
    tol = default_tol(t) if args.tol is None else args.tol
    norms = commutator_norms(t)
    try:
        A = extract_hmatrix(t, tol)
    except NotHLinear as exc:
        return {"hlinear": False, "reason": exc.reason, "commutator_norms": norms, "tol": tol}, EXIT_FAIL
    return {"hlinear": True, "reason": None, "commutator_norms": norms, "tol": tol, "A": A.to_json()}, EXIT_OK


def cmd_check_quaternionic(args) -> tuple[dict, int]:
    t = _rlm(_load(args.input))
    check = check_quaternionic(t, args.tol or 1e-9, seed=args.seed)
    out = {
        "quaternionic": check.holds,
        "reason": check.reason,
        "residual": check.residual,
        "T": check.sphere_map.to_json() if check.holds else None,
    }
    return out, EXIT_OK if check.holds else EXIT_FAIL


def cmd_decompose(args) -> tuple[dict, int]:
    t = _rlm(_load(args.input))
    try:
        d = decompose(t, args.tol or 1e-9)
    except (NotQuaternionic, ZeroMap, NotHLinear) as exc:
        return {"reason": exc.reason, "message": str(exc)}, EXIT_FAIL
    return d.to_json(), EXIT_OK


def cmd_fueter_split(args) -> tuple[dict, int]:
    obj = _load(args.input)
    t = _rlm(obj["t"])
    T = SphereMap.from_json(obj["T"])
    q_part, f_part = fueter_split(t, T)
    tol = args.tol or 1e-9
    return {
        "quaternionic": q_part.to_json(),
        "fueter": f_part.to_json(),
        "is_fueter": is_fueter(t, T, tol),
        "is_quaternionic": q_part.allclose(t, atol=tol * max(t.norm(), 1.0)),
    }, EXIT_OK


def cmd_fueter_suite(args) -> tuple[dict, int]:
    T = None
    if args.input is not None:
        T = SphereMap.from_json(_load(args.input)["T"])
    report = fueter_suite(args.m, args.n, T=T, trials=args.trials, seed=args.seed)
    out = report.to_json()
    holds = report.holds(args.m, args.n)
    out["holds"] = holds
    return out, EXIT_OK if holds else EXIT_FAIL


def cmd_projective_eval(args) -> tuple[dict, int]:
    obj = _load(args.input)
    A = HMatrix.from_json(obj["A"])
    images, reasons = [], []
    for p in obj["points"]:
        x = HPPoint(np.asarray(p, dtype=float))
        try:
            images.append(phi_A(A, x).to_json())
            reasons.append(None)
        except KernelPoint as exc:
            images.append(None)
            reasons.append(exc.reason)
    code = EXIT_OK if all(r is None for r in reasons) else EXIT_FAIL
    return {"images": images, "reasons": reasons}, code


def cmd_projective_recover(args) -> tuple[dict, int]:
    samples = ProjectiveSample.from_json(_load(args.input))
    x0, y0 = samples.pairs[0]
    m = x0.dim if args.m is None else args.m
    n = y0.dim if args.n is None else args.n
    try:
        rec = recover_matrix(samples, m, n, args.tol or 1e-8)
    except (InconsistentSamples, AmbiguousRecovery) as exc:
        return {"reason": exc.reason, "message": str(exc)}, EXIT_FAIL
    return rec.to_json(), EXIT_OK


def _complex_matrix(obj) -> np.ndarray:
    if "entries" in obj:
        return complex_form(HMatrix.from_json(obj))
    re = np.asarray(obj["real"], dtype=float)
    im = np.asarray(obj["imag"], dtype=float)
    if re.shape != im.shape or re.shape != (int(obj["rows"]), int(obj["cols"])):
        raise ValueError("complex matrix needs real and imag arrays of shape (rows, cols)")
    return re + 1j * im


def cmd_lines_check(args) -> tuple[dict, int]:
    Ac = _complex_matrix(_load(args.input))
    report = maps_quaternionic_lines(Ac, trials=args.trials, tol=args.tol or 1e-9, seed=args.seed)
    out = report.to_json()
    ok = report.holds and bool(report.real_form_quaternionic)
    out["reason"] = None if ok else "NotQuaternionicLines"
    return out, EXIT_OK if ok else EXIT_FAIL


def _builtin_map(args, rng: np.random.Generator) -> SmoothMap:
    params = _load(args.input) if args.input is not None else {}
    if args.map == "affine":
        if "A" in params:
            A = HMatrix.from_json(params["A"])
            a = np.asarray(params.get("a", [1.0, 0.0, 0.0, 0.0]), dtype=float)
            b = params.get("b")
        else:
            A, a, b = HMatrix.random(rng, 1, 1), random_unit(rng), rng.standard_normal(4)
        return affine_map(a, A, b)
    if args.map == "inversion":
        return inversion()
    if args.map == "conj-control":
        return conj_control(int(params.get("m", 1)))
    if args.map == "quadratic-control":
        return quadratic_control(float(params.get("eps", args.eps)))
    raise ValueError(f"unknown map {args.map!r}")


def grid_points(rng: np.random.Generator, count: int, dim: int, radius=(0.5, 2.0)) -> list[np.ndarray]:
    """Seeded points with norms uniform in ``radius``, away from the origin."""
    pts = rng.standard_normal((count, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return list(pts * rng.uniform(*radius, size=(count, 1)))


def cmd_twistor_check(args) -> tuple[dict, int]:
    rng = np.random.default_rng(args.seed)
    phi = _builtin_map(args, rng)
    if args.h is not None:
        phi = phi.with_step(args.h)
    points = grid_points(rng, args.points, 4 * phi.m)
    report = twistor_report(phi, points, default_directions(args.seed), tol=args.tol or 1e-4)
    out = report.to_json()
    ok = report.tau_twistorial
    out["reason"] = None if ok else ("NotQuaternionic" if out["summary"]["not_quaternionic"] else "TauResidual")
    return out, EXIT_OK if ok else EXIT_FAIL


COMMANDS: dict[str, tuple[Callable, str]] = {
    "check-hlinear": (cmd_check_hlinear, "is a real-linear map H-linear (RealLinearMap JSON)"),
    "check-quaternionic": (cmd_check_quaternionic, "is a real-linear map quaternionic (RealLinearMap JSON)"),
    "decompose": (cmd_decompose, "write a quaternionic map as X -> aXA (RealLinearMap JSON)"),
    "fueter-split": (cmd_fueter_split, "quaternionic / Fueter parts of t ({t, T} JSON)"),
    "fueter-suite": (cmd_fueter_suite, "randomised checks of the C_T splitting"),
    "projective-eval": (cmd_projective_eval, "evaluate [X] -> [XA] ({A, points} JSON)"),
    "projective-recover": (cmd_projective_recover, "recover A from sample pairs"),
    "lines-check": (cmd_lines_check, "does a complex map send quaternionic lines to lines"),
    "twistor-check": (cmd_twistor_check, "twistoriality residuals of a built-in map on a grid"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtwistor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", nargs="?", help="input JSON path, or - for stdin")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=256)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--h", type=float, default=None, help="finite-difference step")
        if name in ("fueter-suite", "projective-recover"):
            p.add_argument("--m", type=int, default=1 if name == "fueter-suite" else None)
            p.add_argument("--n", type=int, default=1 if name == "fueter-suite" else None)
        if name == "twistor-check":
            p.add_argument(
                "--map",
                required=True,
                choices=["affine", "inversion", "conj-control", "quadratic-control"],
            )
            p.add_argument("--points", type=int, default=100)
            p.add_argument("--eps", type=float, default=0.5)
    return parser


def _diagnose(exc: BaseException, command: str | None) -> int:
    reason = getattr(exc, "reason", type(exc).__name__)
    sys.stderr.write(dumps({"error": reason, "message": str(exc), "command": command}) + "\n")
    return EXIT_INPUT


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    handler = COMMANDS[args.command][0]
    try:
        payload, code = handler(args)
    except (InputError, *INPUT_ERRORS) as exc:
        return _diagnose(exc, args.command)
    except QTwistorError as exc:
        payload, code = {"reason": exc.reason, "message": str(exc)}, EXIT_FAIL
    text = dumps(payload) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            return _diagnose(exc, args.command)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
