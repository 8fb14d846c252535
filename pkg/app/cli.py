"""Command-line surface: ``python main.py <command> [flags]``.

Structured output goes to stdout (or ``--out``); logging goes to stderr.
Exit status: 0 success, 1 numerical failure or failed verification, 2 usage error.
"""
import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, List, Optional

from pydantic import ValidationError

from app.config import settings
from app.critical import critical_locator
from app.curves import curve_tracer
from app.errors import E6Error
from app.exporters import render
from app.models import (
    CurveId,
    DenseSampleSpec,
    DomainName,
    EvalReport,
    FamilyKind,
    FamilyParam,
    Group,
    SolveResponse,
    UnimodularMatrix,
    VerificationReport,
    parse_complex,
)
from app.modular import eval_report
from app.monodromy import monodromy_solver
from app.verify import CHECKS, AcceptanceSuite

logger = logging.getLogger(__name__)


# Flag types
def _tau(text: str) -> complex:
    tau = parse_complex(text)
    if not tau.imag > 0:
        raise argparse.ArgumentTypeError(f"{text} is not in the upper half-plane")
    return tau


def _real(text: str) -> float:
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(text)


def _matrix(text: str) -> UnimodularMatrix:
    try:
        return UnimodularMatrix.model_validate(text)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(e.errors()[0]["msg"])


# Commands
def cmd_eval(args) -> EvalReport:
    return eval_report(args.tau)


def cmd_critical(args):
    return critical_locator.critical_points_in_domain(args.matrix, Group(args.group))


def cmd_count(args):
    value = args.t if args.family == FamilyKind.HOMOTOPY_T.value else args.C
    if value is None:
        raise argparse.ArgumentTypeError(f"--family {args.family} needs {'--t' if args.family == 't' else '--C'}")
    family = FamilyParam(kind=FamilyKind(args.family), value=value)
    return critical_locator.count_zeros(family, DomainName(args.domain), args.height, args.cusp_radius)


def cmd_solve(args) -> SolveResponse:
    lower, upper = critical_locator.solve_fC(args.C)
    return SolveResponse(lower=lower, upper=upper)


def cmd_trace(args):
    points = curve_tracer.trace_curve(CurveId(args.curve), args.Clo, args.Chi, max_step=args.max_step)
    if args.restrict_to_F:
        points = curve_tracer.restrict_to_F(points)
    return points


def cmd_dense(args):
    spec = DenseSampleSpec(max_denominator=args.max_den, group=Group(args.group), max_abs_C=args.max_abs_C)
    return curve_tracer.dense_sample(spec)


def cmd_monodromy(args):
    if args.local:
        return monodromy_solver.local_monodromy(args.tau)
    if args.ode:
        return monodromy_solver.ode_monodromy(args.tau)
    return monodromy_solver.chi_and_D(args.tau)


def cmd_verify(args) -> VerificationReport:
    suite = AcceptanceSuite(seed=args.seed, samples=args.samples, max_denominator=args.max_den)
    return suite.run(args.only)


def cmd_serve(args):
    import uvicorn

    uvicorn.run(
        "app.api:app",
        host=args.host,
        port=args.port,
        reload=args.reload,
        log_level=settings.LOG_LEVEL.lower(),
    )


def summary_table(report: VerificationReport) -> str:
    width = max(len(check.name) for check in report.checks) if report.checks else 4
    lines = [f"{'check':<{width}}  status  seconds  detail"]
    for check in sorted(report.checks, key=lambda c: c.name):
        status = "ok" if check.passed else "FAILED"
        lines.append(f"{check.name:<{width}}  {status:<6}  {check.seconds:7.2f}  {check.detail}")
    passed = sum(check.passed for check in report.checks)
    lines.append(f"{passed}/{len(report.checks)} checks passed")
    return "\n".join(lines) + "\n"


# Parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "svg"], default=None, help="output format")
    common.add_argument("--out", type=Path, default=None, help="write output to a file instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for random spot checks")
    common.add_argument("--precision", type=float, default=None, help="solver residual tolerance")
    common.add_argument("--log-level", default=None, help="logging level (default from E6_LOG_LEVEL)")

    parser = argparse.ArgumentParser(prog="e6crit", description="Critical points of E6 and related numerics")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("eval", parents=[common], help="Eisenstein and Weierstrass invariants at tau")
    p.add_argument("--tau", type=_tau, required=True)
    p.set_defaults(handler=cmd_eval)

    p = commands.add_parser("critical", parents=[common], help="critical points of E6 in g(F0) or g(F)")
    p.add_argument("--group", choices=[g.value for g in Group], required=True)
    p.add_argument("--matrix", type=_matrix, required=True, help="a,b,c,d")
    p.set_defaults(handler=cmd_critical)

    p = commands.add_parser("count", parents=[common], help="certified zero count by the argument principle")
    p.add_argument("--family", choices=[k.value for k in FamilyKind], default=FamilyKind.CURVE_C.value)
    p.add_argument("--C", type=_real, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--domain", choices=[d.value for d in DomainName], default=DomainName.F0.value)
    p.add_argument("--height", type=float, default=None)
    p.add_argument("--cusp-radius", type=float, default=None)
    p.set_defaults(handler=cmd_count)

    p = commands.add_parser("solve", parents=[common], help="both roots of f_C in F0")
    p.add_argument("--C", type=_real, required=True)
    p.set_defaults(handler=cmd_solve)

    p = commands.add_parser("trace", parents=[common], help="sample one of the curves C1, C2, C3")
    p.add_argument("--curve", choices=[c.value for c in CurveId], required=True)
    p.add_argument("--Clo", type=_real, required=True)
    p.add_argument("--Chi", type=_real, required=True)
    p.add_argument("--max-step", type=float, default=None)
    p.add_argument("--restrict-to-F", action="store_true")
    p.set_defaults(handler=cmd_trace)

    p = commands.add_parser("dense", parents=[common], help="reduced critical points for |c| <= max-den")
    p.add_argument("--max-den", type=int, default=20)
    p.add_argument("--group", choices=[g.value for g in Group], default=Group.GAMMA0_2.value)
    p.add_argument("--max-abs-C", type=float, default=4.0)
    p.set_defaults(handler=cmd_dense)

    p = commands.add_parser("monodromy", parents=[common], help="chi, D and the monodromy of the ODE")
    p.add_argument("--tau", type=_tau, required=True)
    p.add_argument("--ode", action="store_true", help="also integrate the ODE along both loops")
    p.add_argument("--local", action="store_true", help="local monodromy around 0 and the apparent singularities")
    p.set_defaults(handler=cmd_monodromy)

    p = commands.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--max-den", type=int, default=20)
    p.add_argument("--only", nargs="*", default=None, choices=list(CHECKS), help="names of checks to run")
    p.set_defaults(handler=cmd_verify)

    p = commands.add_parser("serve", parents=[common], help="start the HTTP API")
    p.add_argument("--host", default=settings.API_HOST)
    p.add_argument("--port", type=int, default=settings.API_PORT)
    p.add_argument("--reload", action="store_true")
    p.set_defaults(handler=cmd_serve)

    return parser


def _write(text: str, out: Optional[Path]):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    out.write_text(text, encoding="utf-8", newline="")
    logger.info(f"Wrote {out}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = (args.log_level or settings.LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.precision is not None:
        if not args.precision > 0:
            parser.error("--precision must be positive")
        settings.PRECISION = args.precision

    try:
        result: Any = args.handler(args)
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))
    except (E6Error, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1

    if args.command == "serve":
        return 0

    fmt = args.format or settings.OUTPUT_FORMAT
    if isinstance(result, VerificationReport) and args.format is None:
        text = summary_table(result)
    else:
        try:
            text = render(result, fmt)
        except ValueError as e:
            parser.error(str(e))
    _write(text, args.out)

    if isinstance(result, VerificationReport) and not result.passed:
        return 1
    return 0
