"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 validation failure,
3 nonconvergence, 4 violated integer identity.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import _jsonfmt, bott
from . import galerkin as gk
from . import generators, ode
from .galerkin import NonconvergenceError
from .bott import IdentityViolation
from .system import load_system, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NONCONVERGENT = 3
EXIT_IDENTITY = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    p = _Parser(prog="morsesturm",
                description="Morse indices and Bott-type index functions "
                            "for Morse-Sturm systems of metric index 1")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--input", help="problem JSON file")
        src.add_argument("--generate",
                         help="built-in generator, e.g. 'oscillator' or "
                              "'oscillator:{\"n\": 2, \"k\": [88.8]}'")
        sp.add_argument("--mesh", type=int, default=gk.REFERENCE_MESH)
        sp.add_argument("--ode-steps", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--tol-eig", type=float, default=None)
        sp.add_argument("--tol-rank", type=float, default=None)
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        return sp

    common(sub.add_parser("validate", help="check the problem invariants"))
    common(sub.add_parser("poincare", help="Poincare map unit spectrum"))
    sp = common(sub.add_parser("index", help="one index lambda(rho, N)"))
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--N", type=int, default=1)
    sp.add_argument("--kind", choices=("star", "zero"), default="zero")
    common(sub.add_parser("scan", help="index function on the circle"))
    sp = common(sub.add_parser("iterate", help="iteration table"))
    sp.add_argument("--N-max", type=int, default=6)
    sp = common(sub.add_parser("fourier-check", help="Fourier identities"))
    sp.add_argument("--N", type=int, required=True)
    common(sub.add_parser("growth", help="growth statistics"))
    common(sub.add_parser("classify", help="spectral classification"))
    sp = common(sub.add_parser("report", help="full pipeline"))
    sp.add_argument("--N-max", type=int, default=6)
    return p


def _build_system(args):
    if args.input:
        return load_system(args.input)
    spec = args.generate
    if ":" in spec:
        name, _, params = spec.partition(":")
        kwargs = json.loads(params)
    else:
        name, kwargs = spec, {}
    kwargs = {k: (tuple(v) if isinstance(v, list) else v)
              for k, v in kwargs.items()}
    return generators.generate(name, **kwargs)


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _apply_tolerances(args):
    if args.tol_eig is not None:
        gk.TAU_EIG_SCALE = args.tol_eig
    if args.tol_rank is not None:
        ode.TAU_RANK = args.tol_rank
    if args.ode_steps is not None:
        ode.DEFAULT_STEPS_PER_PERIOD = args.ode_steps


def _scan_csv(profile):
    rows = []
    K = len(profile.spectral_angles)
    for j, th in enumerate(profile.spectral_angles):
        rows.append((float(th), profile.point_lambda[j],
                     profile.point_nullity[j], "point"))
        nxt = profile.spectral_angles[(j + 1) % K] + (1.0 if j == K - 1 else 0.0)
        mid = (float(th) + float(nxt)) / 2.0 % 1.0
        rows.append((mid, profile.plateau_values[j], 0, "arc"))
    return _jsonfmt.csv_lines(("theta", "lambda", "nullity", "kind"), rows)


def _iterate_csv(rows):
    return _jsonfmt.csv_lines(
        ("N", "mu", "mu0", "nu_star", "nu0", "epsilon"),
        [(r.N, r.mu, r.mu0, r.nu_star, r.nu0, r.epsilon) for r in rows])


def run(args) -> int:
    _apply_tolerances(args)
    try:
        system = _build_system(args)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except RuntimeError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION

    if not system.validated:
        report = validate(system)
        if args.command == "validate":
            _emit(args, _jsonfmt.dumps(report.to_json()))
            return EXIT_OK if report.passed else EXIT_VALIDATION
        if not report.passed:
            for c in report.failures():
                sys.stderr.write(f"validation failure: {c.name}: {c.detail} "
                                 f"(residual {c.residual:g})\n")
            return EXIT_VALIDATION
    elif args.command == "validate":
        _emit(args, _jsonfmt.dumps(validate(system).to_json()))
        return EXIT_OK

    try:
        if args.command == "poincare":
            pdata = ode.poincare(system)
            _emit(args, _jsonfmt.dumps(pdata.to_json()))
        elif args.command == "index":
            res = gk.lambda_with_refinement(system, args.N, args.theta,
                                            args.kind, mesh0=args.mesh)
            print(res.lam)
            if args.out:
                _emit(args, _jsonfmt.dumps({
                    "theta": args.theta, "N": args.N, "kind": args.kind,
                    "lambda": res.lam, "nullity": res.nullity,
                    "meshes": res.meshes, "values": res.values}))
        elif args.command == "scan":
            profile = bott.scan_circle(system, args.mesh, jobs=args.jobs)
            if args.format == "csv":
                _emit(args, _scan_csv(profile))
            else:
                _emit(args, _jsonfmt.dumps(profile.to_json()))
        elif args.command == "iterate":
            profile = bott.scan_circle(system, args.mesh, jobs=args.jobs)
            rows = bott.iterate_indices(system, profile, args.N_max)
            if args.format == "csv":
                _emit(args, _iterate_csv(rows))
            else:
                _emit(args, _jsonfmt.dumps({
                    "table": [{"N": r.N, "mu": r.mu, "mu0": r.mu0,
                               "nu_star": r.nu_star, "nu0": r.nu0,
                               "epsilon": r.epsilon} for r in rows]}))
        elif args.command == "fourier-check":
            rep = bott.fourier_check(system, args.N,
                                     mesh=args.mesh * args.N
                                     if args.mesh != gk.REFERENCE_MESH else None)
            terms = " + ".join(str(t) for t in rep["base_terms"])
            print(f"{rep['lambda0_iterate']} = {terms} OK")
            if args.out:
                _emit(args, _jsonfmt.dumps(rep))
        elif args.command == "growth":
            profile = bott.scan_circle(system, args.mesh, jobs=args.jobs)
            _emit(args, _jsonfmt.dumps(bott.growth_stats(profile).to_json()))
        elif args.command == "classify":
            profile = bott.scan_circle(system, args.mesh, jobs=args.jobs)
            _emit(args, _jsonfmt.dumps(bott.classify(system, profile)))
        elif args.command == "report":
            rep = bott.build_report(system, N_max=args.N_max, mesh0=args.mesh,
                                    jobs=args.jobs)
            out = rep.to_json()
            out["profile"] = rep.profile.to_json()
            out["jumps"] = [{"theta": j.theta, "left": j.left,
                             "right": j.right, "point": j.point,
                             "nullity": j.nullity} for j in
                            bott.jump_table(rep.profile)]
            _emit(args, _jsonfmt.dumps(out))
    except NonconvergenceError as exc:
        sys.stderr.write(f"nonconvergent: {exc}\n")
        return EXIT_NONCONVERGENT
    except IdentityViolation as exc:
        sys.stderr.write(f"identity violation: {exc}\n")
        return EXIT_IDENTITY
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
