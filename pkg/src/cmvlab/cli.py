"""Command-line front end.

Exit codes: 0 ok, 2 validation error, 3 numerical error (or a failed
verification), 4 I/O or parse error.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from . import asymptotics as asy
from . import io
from .brackets import (
    det_phase_observable,
    entry_re,
    exposed_entries,
    exposed_flow_closed_form,
    hamiltonian_field,
    jacobi_residual,
    jacobian_check,
    linear_observable,
    log_ratio_bracket,
    mass_brackets,
    poincare_residual,
    psi_qrs,
    shift_kernel,
    shift_kernel_derivative,
    theta_mu_brackets,
    verify_bracket_equality,
)
from .cmv import CMVMatrix, VerblunskyCoefficients, build_cmv, check_cmv_shape
from .errors import FormatError, NotCyclicError, NumericalError, ValidationError
from .flows import FLOWS, HierarchyHamiltonian, flow_trajectory
from .reduction import cmvify, cmvify_split
from .spectral import cmv_of_measure, measure_of, verblunsky_of_measure

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

# identity -> default tolerance for `verify`
VERIFY_TOLS = {
    "bracket_equality": 1e-6,
    "theta_log_ratio_canonical": 1e-5,
    "theta_theta_commute": 1e-6,
    "mass_bracket_cotangent": 1e-4,
    "log_ratio_psi": 1e-4,
    "exposed_entry_flow": 1e-9,
    "casimir_det_phase": 1e-8,
    "jacobi_identity": 1e-5,
    "jacobian_relative": 1e-5,
    "integrator_agreement": 1e-7,
    "shift_kernel_identity": 1e-8,
    "poincare_curl": 1e-6,
}


def parse_complex(s: str) -> complex:
    """``"1.5"``, ``"2i"``, ``"-i"``, ``"0.5-0.25i"`` (``j`` accepted too)."""
    t = s.strip().replace(" ", "").replace("j", "i")
    t = re.sub(r"(^|[+-])i$", r"\g<1>1i", t)
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise ValidationError(f"cannot parse complex literal {s!r}") from None


def parse_f_coeffs(s: str) -> HierarchyHamiltonian:
    return HierarchyHamiltonian([parse_complex(c) for c in s.split(",")])


def _seeded(args) -> VerblunskyCoefficients:
    rng = np.random.default_rng(args.seed)
    return verblunsky_of_measure(acceptance.separated_measure(args.n, rng))


def _load_cmv(args) -> CMVMatrix:
    """CMV matrix from ``--input`` (coefficients, matrix or measure) or a seeded draw."""
    if args.input is None:
        return build_cmv(_seeded(args))
    d = io.read_json(args.input)
    if "atoms" in d:
        return cmv_of_measure(io.measure_from_json(d))
    return io.cmv_from_json(d)


def _emit(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
    else:
        io.write_text(args.output, text)


def _require_input(args) -> dict:
    if args.input is None:
        raise ValidationError(f"'{args.command}' needs --input")
    return io.read_json(args.input)


# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    if args.input is None:
        v = _seeded(args)
    else:
        v = io.coefficients_from_json(io.read_json(args.input))
    c = build_cmv(v)
    report = check_cmv_shape(c.matrix)
    _emit(args, io.dumps(io.cmv_to_json(c)))
    sys.stderr.write(io.dumps({"shape_report": report.as_dict()}))
    return EXIT_OK if report.is_cmv_shape else EXIT_NUMERICAL


def cmd_reduce(args) -> int:
    u = io.matrix_from_json(_require_input(args))
    try:
        c, w = cmvify(u)
    except NotCyclicError as exc:
        sys.stderr.write(f"e_1 not cyclic ({exc}); writing a block list\n")
        blocks = cmvify_split(u)
        out = {"blocks": [dict(io.cmv_to_json(b), start=r.start, stop=r.stop) for b, r in blocks]}
        _emit(args, io.dumps(out))
        return EXIT_OK
    _emit(args, io.dumps(io.cmv_to_json(c)))
    if args.output is not None:
        p = Path(args.output)
        io.write_json(p.with_name(p.stem + ".conjugator.json"), io.matrix_to_json(w))
    return EXIT_OK


def cmd_measure(args) -> int:
    d = _require_input(args)
    if args.invert:
        c = cmv_of_measure(io.measure_from_json(d))
        _emit(args, io.dumps(io.cmv_to_json(c)))
    else:
        c = io.cmv_from_json(d)
        _emit(args, io.dumps(io.measure_to_json(measure_of(c))))
    return EXIT_OK


def _times(args) -> np.ndarray:
    if args.steps < 1:
        raise ValidationError("--steps must be >= 1")
    if not args.t1 > args.t0:
        raise ValidationError("time grid must be strictly increasing (need t1 > t0)")
    return np.linspace(args.t0, args.t1, args.steps + 1)


def cmd_flow(args) -> int:
    c = _load_cmv(args)
    h = parse_f_coeffs(args.f_coeffs)
    h.check_degree(c.n)
    if args.method not in FLOWS:
        raise ValidationError(f"--method must be one of {sorted(FLOWS)}")
    tr = flow_trajectory(c, h, _times(args), args.method, args.ode_steps)
    _emit(args, io.trajectory_csv(tr))
    return EXIT_OK


def _check(name: str, value: float, tol_override) -> dict:
    tol = VERIFY_TOLS[name] if tol_override is None else tol_override
    value = float(value)
    return {"residual": value, "tol": tol, "passed": bool(np.isfinite(value) and value <= tol)}


def verify_instance(v: VerblunskyCoefficients, tol=None, seed: int = 0) -> dict:
    """Residual of every bracket and flow identity at one point."""
    n = v.n
    c = build_cmv(v)
    b = c.matrix
    rng = np.random.default_rng(seed)
    checks = {}
    checks["bracket_equality"] = verify_bracket_equality(v).max_residual if n >= 2 else 0.0
    rep = theta_mu_brackets(v)
    checks["theta_log_ratio_canonical"] = rep.canonical_residual
    checks["theta_theta_commute"] = rep.commuting_residual
    checks["mass_bracket_cotangent"] = max(
        (mass_brackets(v, q, r, rep).residual for q in range(n) for r in range(n)), default=0.0
    )
    if n >= 3:
        checks["log_ratio_psi"] = abs(log_ratio_bracket(rep, 1, 2, 0) - psi_qrs(rep.thetas[[0, 1, 2]]))
    checks["exposed_entry_flow"] = max(
        (np.abs(hamiltonian_field(entry_re(i, j), b) - exposed_flow_closed_form(b, i, j)).max() for i, j in exposed_entries(n)),
        default=0.0,
    )
    checks["casimir_det_phase"] = max(np.abs(hamiltonian_field(det_phase_observable(s), b)).max() for s in (0.0, 0.7))
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    obs = [linear_observable(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) for _ in range(3)]
    checks["jacobi_identity"] = jacobi_residual(*obs, g)
    num, closed = jacobian_check(v)
    checks["jacobian_relative"] = abs(num - closed) / abs(closed)
    h = HierarchyHamiltonian([0, 1])
    states = [FLOWS[m](c, h, 1.0) for m in ("measure", "qr")] + [FLOWS["ode"](c, h, 1.0, 4000)]
    checks["integrator_agreement"] = max(
        np.abs(states[i].alphas - states[j].alphas).max() for i in range(3) for j in range(i + 1, 3)
    )
    checks["shift_kernel_identity"] = max(
        abs(x * shift_kernel_derivative(x) + 2 * shift_kernel(x) - 2 / np.tan(x / 2)) for x in (0.5, 1.0, 2.0)
    )
    curl, psi = poincare_residual(np.array([-0.5, 0.2, 0.9]), 0.3)
    checks["poincare_curl"] = np.abs(curl - psi).max()
    report = {name: _check(name, val, tol) for name, val in checks.items()}
    return {
        "n": n,
        "alphas": [io.complex_to_json(a) for a in v.alphas],
        "identities": report,
        "all_passed": all(r["passed"] for r in report.values()),
    }


def cmd_verify(args) -> int:
    c = _load_cmv(args)
    report = verify_instance(c.coefficients or VerblunskyCoefficients(c.alphas), args.tol, args.seed)
    _emit(args, io.dumps(report))
    return EXIT_OK if report["all_passed"] else EXIT_NUMERICAL


def cmd_scatter(args) -> int:
    c = _load_cmv(args)
    h = parse_f_coeffs(args.f_coeffs)
    m = measure_of(c)
    o = asy.ordering(m, h)
    rep = asy.scattering_invariants(m, h)
    out = {
        "lambdas": [float(x) for x in o.lambdas],
        "order": [int(p) for p in o.perm],
        "z_sorted": [io.complex_to_json(z) for z in m.z[o.perm]],
    }
    out.update(rep.as_dict())
    _emit(args, io.dumps(out))
    return EXIT_OK


def cmd_jacobian(args) -> int:
    c = _load_cmv(args)
    num, closed = jacobian_check(c.coefficients or VerblunskyCoefficients(c.alphas))
    rel = abs(num - closed) / abs(closed)
    tol = 1e-5 if args.tol is None else args.tol
    out = {"numeric": num, "closed_form": closed, "relative_error": rel, "tol": tol, "passed": bool(rel <= tol)}
    _emit(args, io.dumps(out))
    return EXIT_OK if out["passed"] else EXIT_NUMERICAL


COMMANDS = {
    "build": cmd_build,
    "reduce": cmd_reduce,
    "measure": cmd_measure,
    "flow": cmd_flow,
    "verify": cmd_verify,
    "scatter": cmd_scatter,
    "jacobian": cmd_jacobian,
}


def self_test() -> int:
    results = acceptance.run_all(echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input JSON file")
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--f-coeffs", default="0,1", help='polynomial f as "c0,c1,..." (complex literals like 1+2i)')
    common.add_argument("--t0", type=float, default=0.0)
    common.add_argument("--t1", type=float, default=1.0)
    common.add_argument("--steps", type=int, default=10, help="number of time-grid intervals")
    common.add_argument("--ode-steps", type=int, default=400, help="RK4 steps per interval for --method ode")
    common.add_argument("--method", default="measure", help="flow integrator: measure, qr or ode")
    common.add_argument("--seed", type=int, default=0, help="seed for the built-in random instance")
    common.add_argument("--n", type=int, default=4, help="size of the built-in random instance")
    common.add_argument("--tol", type=float, default=None, help="override the acceptance tolerance")
    common.add_argument("--invert", action="store_true", help="measure: read a measure, write a CMV matrix")
    p = argparse.ArgumentParser(prog="cmvlab", description="CMV matrices, Ablowitz-Ladik flows and their Poisson geometry.")
    p.add_argument("--self-test", action="store_true", help="run the seeded acceptance suite")
    sub = p.add_subparsers(dest="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.self_test:
        return self_test()
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_VALIDATION
    try:
        return COMMANDS[args.command](args)
    except FormatError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    except NumericalError as exc:
        sys.stderr.write(f"numerical error ({type(exc).__name__}): {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
