from __future__ import annotations

import argparse
import json
import math
from pathlib import Path
import sys
import time
from typing import Any, Callable
import warnings

from pydantic import ValidationError

from .algebra import (
    BlockMatrix,
    HermitianElement,
    PositiveFunctional,
    SelfAdjointFunctional,
    operator_norm,
)
from .channels import (
    Channel,
    petz_dual,
    recovery,
    recovery_roundtrip_residual,
    restrict_to_support,
    sufficiency_report,
    transport_family,
)
from .config import DEFAULT_CONFIG, SolverOptions, load_profile, resolve_options
from .entropy import F_rho, f_lower_bound, relative_entropy, renyi_f
from .errors import ConvergenceError, DomainError, QigValidationError, QigWarning
from .kosaki import embed, lp_norm
from .manifold import (
    Chart,
    canonical_divergence,
    chart_forward,
    chart_identity_residual,
    chart_inverse,
    divergence_entropy_form,
    pythagorean_residual,
    transition,
    transition_residual,
)
from .orlicz import (
    decomposition_residual,
    exp_norm,
    exp_norm_bisection,
    log_norm_bisection,
    phi,
    psi_inf,
    psi_sup,
)
from .perturbation import c_gradient, gradient_mismatch, perturb
from .reports import Report
from .schema import ChannelPayload, MatrixPayload, parse_exponent

EXIT_OK = 0
EXIT_SUITE_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_DOMAIN = 4

DEFAULT_RENYI_GRID = (1.001, 1.01, 1.1, 1.5, 2.0)

Handler = Callable[[argparse.Namespace, SolverOptions], "tuple[Report, int]"]


# input ------------------------------------------------------------------------------


def _read_json(value: str, field: str) -> Any:
    """A path to a JSON file, or the JSON text itself."""
    text = value if value.lstrip().startswith(("{", "[")) else Path(value).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise QigValidationError(f"{field}: invalid JSON ({exc})", field=field) from exc


def _validation_field(exc: ValidationError, prefix: str) -> str:
    errors = exc.errors()
    loc = ".".join(str(part) for part in errors[0]["loc"]) if errors else ""
    return f"{prefix}.{loc}" if loc else prefix


def _matrix(value: str, field: str, kind: type[BlockMatrix]) -> BlockMatrix:
    try:
        payload = MatrixPayload.model_validate(_read_json(value, field))
    except ValidationError as exc:
        raise QigValidationError(f"{field}: {exc}", field=_validation_field(exc, field)) from exc
    return payload.to_element(kind)


def _state(value: str, field: str) -> PositiveFunctional:
    return _matrix(value, field, PositiveFunctional)


def _element(value: str, field: str) -> HermitianElement:
    return _matrix(value, field, HermitianElement)


def _functional(value: str, field: str) -> SelfAdjointFunctional:
    return _matrix(value, field, SelfAdjointFunctional)


def _channel(value: str, field: str = "channel") -> Channel:
    try:
        payload = ChannelPayload.model_validate(_read_json(value, field))
    except ValidationError as exc:
        raise QigValidationError(f"{field}: {exc}", field=_validation_field(exc, field)) from exc
    return payload.to_channel()


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _name_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _ascent_diagnostics(cert) -> dict[str, Any]:
    return {
        "iterations": cert.iterations,
        "gradient_norm": cert.gradient_norm,
        "stop_reason": cert.stop_reason,
    }


# commands -------------------------------------------------------------------------


def _cmd_entropy(args, options):
    omega, rho = _state(args.omega, "omega"), _state(args.rho, "rho")
    value = relative_entropy(omega, rho, support_tol=options.support_tol)
    return Report(command="entropy", results={"S": value}), EXIT_OK


def _cmd_f_rho(args, options):
    omega, rho = _functional(args.omega, "omega"), _state(args.rho, "rho")
    value = F_rho(omega, rho)
    results: dict[str, Any] = {"F": value}
    if math.isfinite(value):
        results["lower_bound"] = f_lower_bound(PositiveFunctional(omega.algebra, omega.blocks), rho)
    return Report(command="f-rho", results=results), EXIT_OK


def _cmd_perturb(args, options):
    rho, h = _state(args.rho, "rho"), _element(args.h, "h")
    result = perturb(rho, h)
    return (
        Report(
            command="perturb",
            results={"perturbed": result.perturbed, "C": result.c_value},
            diagnostics={"min_eigenvalue": result.perturbed.min_eigenvalue},
        ),
        EXIT_OK,
    )


def _cmd_c_rho(args, options):
    rho, h = _state(args.rho, "rho"), _element(args.h, "h")
    result = perturb(rho, h)
    residuals = {}
    if args.direction:
        direction = _element(args.direction, "direction")
        residuals["gradient_mismatch"] = gradient_mismatch(rho, h, direction, options.fd_step)
    return (
        Report(
            command="c-rho",
            results={"C": result.c_value, "gradient": c_gradient(rho, h)},
            residuals=residuals,
        ),
        EXIT_OK,
    )


def _cmd_norm_exp(args, options):
    rho, a = _state(args.rho, "rho"), _element(args.a, "a")
    found = exp_norm_bisection(rho, a, options)
    norm = found.scale
    diagnostics: dict[str, Any] = {"bisection_iterations": found.iterations}
    if norm > 0:
        diagnostics["phi_at_norm"] = phi(rho, a * (1.0 / norm))
    return (
        Report(command="norm-exp", results={"norm": norm, "phi": phi(rho, a)}, diagnostics=diagnostics),
        EXIT_OK,
    )


def _cmd_norm_log(args, options):
    rho, psi = _state(args.rho, "rho"), _functional(args.psi, "psi")
    cert = psi_sup(rho, psi, options=options)
    found = log_norm_bisection(rho, psi, options)
    results: dict[str, Any] = {"norm": found.scale, "Psi": cert.psi_value}
    residuals: dict[str, Any] = {"sup_inf_gap": cert.gap}
    diagnostics: dict[str, Any] = {"sup": _ascent_diagnostics(cert), "bisection_iterations": found.iterations}
    if args.inf_form:
        inf_cert = psi_inf(rho, psi, options=options)
        results["Psi_inf"] = inf_cert.psi_value
        residuals["duality_gap"] = abs(cert.psi_value - inf_cert.psi_value)
        residuals["decomposition"] = decomposition_residual(inf_cert, psi)
        diagnostics["inf"] = _ascent_diagnostics(inf_cert)
    return (
        Report(command="norm-log", results=results, residuals=residuals, diagnostics=diagnostics),
        EXIT_OK,
    )


def _cmd_norm_lp(args, options):
    rho = _state(args.rho, "rho")
    p = parse_exponent(args.p)
    if args.embedded:
        h = embed(_element(args.h, "h"), rho)
    else:
        h = _matrix(args.h, "h", BlockMatrix)
    return Report(command="norm-lp", params={"p": p}, results={"norm": lp_norm(h, rho, p)}), EXIT_OK


def _cmd_divergence(args, options):
    rho = _state(args.rho, "rho")
    h, k = _element(args.h, "h"), _element(args.k, "k")
    bregman = canonical_divergence(rho, h, k)
    entropy_form = divergence_entropy_form(rho, h, k)
    results: dict[str, Any] = {"D": bregman, "entropy_form": entropy_form}
    residuals: dict[str, Any] = {"forms": abs(bregman - entropy_form)}
    if args.l:
        l = _element(args.l, "l")
        results["D_hl"] = canonical_divergence(rho, h, l)
        results["D_kl"] = canonical_divergence(rho, k, l)
        residuals["pythagorean"] = pythagorean_residual(rho, h, k, l)
    return Report(command="divergence", results=results, residuals=residuals), EXIT_OK


def _cmd_petz_dual(args, options):
    channel, rho = _channel(args.channel), _state(args.rho, "rho")
    a = _element(args.a, "a")
    restricted = restrict_to_support(channel, rho, options.support_tol, warn=False)
    value = petz_dual(channel, rho, a, restrict=not args.no_restrict)
    unit = petz_dual(channel, rho, channel.source.identity(), restrict=not args.no_restrict)
    return (
        Report(
            command="petz-dual",
            results={"petz_dual": value},
            residuals={"unitality": operator_norm(unit - unit.algebra.identity())},
            diagnostics={
                "restricted": restricted.restricted,
                "target_dims": list(restricted.channel.target.block_dims),
            },
        ),
        EXIT_OK,
    )


def _cmd_recovery(args, options):
    channel, rho = _channel(args.channel), _state(args.rho, "rho")
    sigma = _functional(args.sigma, "sigma")
    value = recovery(channel, rho, sigma, restrict=not args.no_restrict)
    return (
        Report(
            command="recovery",
            results={"recovered": value},
            residuals={
                "roundtrip": recovery_roundtrip_residual(channel, rho, rho),
                "trace": abs(value.total - sigma.total),
            },
        ),
        EXIT_OK,
    )


def _cmd_check_sufficiency(args, options):
    channel, rho, h = _channel(args.channel), _state(args.rho, "rho"), _element(args.h, "h")
    report = sufficiency_report(channel, rho, h, options)
    return (
        Report(
            command="check-sufficiency",
            results={
                "sufficient": report.sufficient,
                "consistent": report.consistent,
                "flags": report.flags(),
                "transported_h0": report.transported_h0,
            },
            residuals={name: getattr(report, name).residual for name in report.certificates},
            diagnostics={"restricted": report.restricted},
        ),
        EXIT_OK,
    )


def _cmd_transport_family(args, options):
    channel, rho = _channel(args.channel), _state(args.rho, "rho")
    family = [_element(value, f"family[{i}]") for i, value in enumerate(args.family)]
    transported = transport_family(channel, rho, family, options, with_norms=not args.no_norms)
    return (
        Report(
            command="transport-family",
            results={
                "transported": [t.transported for t in transported],
                "sufficient": [t.sufficient for t in transported],
            },
            residuals={
                "transport": [t.transport_residual for t in transported],
                "exp_norm": [t.norm_residual for t in transported],
            },
        ),
        EXIT_OK,
    )


def _cmd_chart(args, options):
    chart = Chart(_state(args.rho, "rho"), args.radius)
    if (args.h is None) == (args.sigma is None):
        raise QigValidationError("chart needs exactly one of --h or --sigma", field="h")
    results: dict[str, Any] = {}
    residuals: dict[str, Any] = {}
    if args.h is not None:
        h = _element(args.h, "h")
        results["point"] = chart_forward(chart, h, options)
        results["exp_norm"] = exp_norm(chart.base, h, options)
        sigma = results["point"]
    else:
        sigma = _state(args.sigma, "sigma")
        results["h"] = chart_inverse(chart, sigma)
    if args.omega:
        residuals["identity"] = chart_identity_residual(chart, sigma, _state(args.omega, "omega"))
    return Report(command="chart", results=results, residuals=residuals), EXIT_OK


def _cmd_transition(args, options):
    rho1, rho2 = _state(args.rho1, "rho1"), _state(args.rho2, "rho2")
    h = _element(args.h, "h")
    return (
        Report(
            command="transition",
            results={"h": transition(rho1, rho2, h)},
            residuals={"consistency": transition_residual(rho1, rho2, h)},
        ),
        EXIT_OK,
    )


def _cmd_renyi_f(args, options):
    omega, rho = _state(args.omega, "omega"), _state(args.rho, "rho")
    alphas = [parse_exponent(a) for a in args.alpha] if args.alpha else list(DEFAULT_RENYI_GRID)
    values = [renyi_f(omega, rho, a) for a in alphas]
    violation = max([a - b for a, b in zip(values, values[1:])], default=0.0)
    return (
        Report(
            command="renyi-f",
            params={"alpha": alphas},
            results={"f": values, "limit": relative_entropy(omega, rho) / omega.trace},
            residuals={"monotonicity": max(0.0, violation)},
        ),
        EXIT_OK,
    )


def _first_set(*values):
    return next(v for v in values if v is not None)


def _cmd_property_suite(args, options):
    from .testing.suite import replay, run_suite, write_failures

    if args.replay:
        outcomes = replay(Path(args.replay))
        failed = [o for o in outcomes if not o.passed]
        return (
            Report(
                command="property-suite",
                params={"replay": args.replay},
                results={
                    "passed": not failed,
                    "instances": [
                        {"invariant": o.invariant, "dim": o.dim, "trial": o.trial, "residual": o.residual}
                        for o in outcomes
                    ],
                },
            ),
            EXIT_SUITE_FAILURE if failed else EXIT_OK,
        )

    profile = args.profile_settings
    dims = _first_set(args.dims, profile.dims, [2, 3])
    trials = _first_set(args.trials, profile.trials, 10)
    seed = _first_set(args.seed, profile.seed, 0)
    result = run_suite(dims, trials, seed, options, names=args.names, threads=args.threads)

    diagnostics: dict[str, Any] = {}
    if not result.passed:
        path = Path(args.failures)
        failures = write_failures(result, path)
        diagnostics = {"failures": len(failures), "failure_file": str(path)}
        print(f"{len(failures)} failing instance(s) written to {path}", file=sys.stderr)  # noqa: T201
    rows = result.summary_rows()
    return (
        Report(
            command="property-suite",
            params={"dims": dims, "trials": trials, "seed": seed},
            results={"passed": result.passed, "invariants": rows},
            residuals={row["invariant"]: row["max_residual"] for row in rows},
            diagnostics=diagnostics,
        ),
        EXIT_OK if result.passed else EXIT_SUITE_FAILURE,
    )


# parser ------------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=DEFAULT_CONFIG, help="Profiles YAML file.")
    common.add_argument("--profile", default=None, help="Profile name inside the config file.")
    common.add_argument("--output", default=None, help="Write the JSON report here instead of stdout.")
    common.add_argument("--omit-timing", action="store_true", help="Leave wall time out of the report.")
    common.add_argument("--quiet", action="store_true", help="Silence library warnings.")
    common.add_argument("--tol", type=float, default=None, help="Solver gradient tolerance.")
    common.add_argument("--max-iter", type=int, default=None, help="Solver iteration cap.")
    common.add_argument("--bisection-tol", type=float, default=None, help="Relative tolerance for norms.")
    common.add_argument("--fd-step", type=float, default=None, help="Central-difference step.")
    common.add_argument("--sufficiency-tol", type=float, default=None, help="Sufficiency flag threshold.")
    common.add_argument("--support-tol", type=float, default=None, help="Relative support threshold.")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="Qig",
        description="Quantum exponential-manifold computations on finite-dimensional matrix algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    def add(name: str, handler: Handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("entropy", _cmd_entropy, "Relative entropy S(omega||rho).")
    p.add_argument("--omega", required=True)
    p.add_argument("--rho", required=True)

    p = add("f-rho", _cmd_f_rho, "F_rho(omega) = S(omega||rho) - omega(1).")
    p.add_argument("--omega", required=True)
    p.add_argument("--rho", required=True)

    p = add("perturb", _cmd_perturb, "Perturbed functional rho^h and C_rho(h).")
    p.add_argument("--rho", required=True)
    p.add_argument("--h", required=True)

    p = add("c-rho", _cmd_c_rho, "C_rho(h) and its gradient rho^h.")
    p.add_argument("--rho", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--direction", default=None, help="Direction for a central-difference check.")

    p = add("norm-exp", _cmd_norm_exp, "Luxemburg norm of Phi_rho.")
    p.add_argument("--rho", required=True)
    p.add_argument("--a", required=True)

    p = add("norm-log", _cmd_norm_log, "Luxemburg norm of Psi_rho.")
    p.add_argument("--rho", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--inf-form", action="store_true", help="Also solve the decomposition form.")

    p = add("norm-lp", _cmd_norm_lp, "Kosaki L_p(M, rho) norm.")
    p.add_argument("--rho", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--p", required=True, help='Exponent in [1, inf]; "inf" accepted.')
    p.add_argument("--embedded", action="store_true", help="Treat --h as an element a and embed it first.")

    p = add("divergence", _cmd_divergence, "Canonical divergence D_rho(h||k).")
    p.add_argument("--rho", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--l", default=None, help="Third point for the Pythagorean relation.")

    p = add("petz-dual", _cmd_petz_dual, "Petz dual T*_rho(a).")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--no-restrict", action="store_true", help="Fail instead of restricting to supp T(rho).")

    p = add("recovery", _cmd_recovery, "Petz recovery T_rho(sigma).")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--no-restrict", action="store_true")

    p = add("check-sufficiency", _cmd_check_sufficiency, "Sufficiency certificates for {rho, rho^h}.")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--h", required=True)

    p = add("transport-family", _cmd_transport_family, "Transport an exponential family through T.")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--family", nargs="+", required=True)
    p.add_argument("--no-norms", action="store_true", help="Skip the exp-norm preservation check.")

    p = add("chart", _cmd_chart, "Chart map h -> rho^h or its inverse.")
    p.add_argument("--rho", required=True)
    p.add_argument("--h", default=None)
    p.add_argument("--sigma", default=None)
    p.add_argument("--omega", default=None, help="Probe for the entropy-difference identity.")
    p.add_argument("--radius", type=float, default=1.0)

    p = add("transition", _cmd_transition, "Chart transition from rho1 to rho2.")
    p.add_argument("--rho1", required=True)
    p.add_argument("--rho2", required=True)
    p.add_argument("--h", required=True)

    p = add("renyi-f", _cmd_renyi_f, "f(alpha) over a grid of alpha > 1.")
    p.add_argument("--omega", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--alpha", nargs="+", default=None)

    p = add("property-suite", _cmd_property_suite, "Seeded property suite over every invariant.")
    p.add_argument("--dims", type=_int_list, default=None, help="Comma-separated dimensions, e.g. 2,3.")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--names", type=_name_list, default=None, help="Comma-separated invariant names.")
    p.add_argument("--threads", type=int, default=None, help="Worker processes (capped by QIG_THREADS).")
    p.add_argument("--failures", default="qig-failures.json", help="Where failing instances are written.")
    p.add_argument("--replay", default=None, help="Re-run the instances recorded in a failure file.")

    return parser


def _report_error(kind: str, message: str, field: str | None = None) -> None:
    where = f" [{field}]" if field else ""
    print(f"error ({kind}){where}: {message}", file=sys.stderr)  # noqa: T201


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore", QigWarning)
        try:
            profile = load_profile(args.config, args.profile)
            options = resolve_options(
                profile,
                tol=args.tol,
                max_iter=args.max_iter,
                bisection_tol=args.bisection_tol,
                fd_step=args.fd_step,
                sufficiency_tol=args.sufficiency_tol,
                support_tol=args.support_tol,
            )
            args.profile_settings = profile
            started = time.perf_counter()
            report, code = args.handler(args, options)
            report.wall_time = time.perf_counter() - started
        except QigValidationError as exc:
            _report_error("validation", str(exc), exc.field)
            return EXIT_VALIDATION
        except ValidationError as exc:
            _report_error("validation", str(exc), _validation_field(exc, args.command))
            return EXIT_VALIDATION
        except ConvergenceError as exc:
            _report_error("convergence", str(exc))
            return EXIT_CONVERGENCE
        except DomainError as exc:
            _report_error("domain", str(exc), None if exc.value is None else f"value={exc.value}")
            return EXIT_DOMAIN
        except OSError as exc:
            _report_error("io", str(exc))
            return EXIT_VALIDATION

    text = report.to_json(omit_timing=args.omit_timing)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
