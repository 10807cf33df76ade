#!/usr/bin/env python
"""
Command-line front end for ECH capacity, embedding, billiard and packing computations
"""
import argparse
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv

from echcap import configure_logging
from echcap.config import get_config
from echcap.models import Bidisk, EchcapError
from echcap.services.billiard import make_model, moment_profile, ode_oracle, profile_chain
from echcap.services.capacities import capacities_of
from echcap.services.embedding import (
    EmbeddingError,
    explicit_map_check,
    obstruct,
    verdict_bidisk_into,
)
from echcap.services.geometry import omega0_curve, region_to_json, sample_omega0
from echcap.services.packing import (
    PlacementError,
    dump_placement,
    greedy_search,
    load_placement,
    verify_placement,
)
from echcap.services.weights import weight_sequence
from echcap.tasks.scenarios import ALIASES, SCENARIOS, UnknownScenarioError, run_all, run_scenario
from echcap.utils.domain_specs import DomainSpecError, parse_domain_spec, parse_region
from echcap.utils.formatting import format_float, render_csv, render_json
from echcap.utils.plotting import LabeledCurve, PlotError, emit_plot

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(EchcapError):
    """Raised for flag combinations a subcommand cannot serve."""
    pass


def _unsupported(fmt: str, command: str):
    raise UsageError(f"format {fmt!r} is not available for {command}")


def cmd_curve(args, config):
    """The inscribed polyline of omega0"""
    samples = args.samples or config.OMEGA0_SAMPLES
    region = sample_omega0(samples)
    if args.format == "json":
        return render_json(region_to_json(region)), EXIT_OK
    if args.format == "csv":
        return render_csv(["x", "y"], region.vertices.tolist()), EXIT_OK
    curve = omega0_curve(samples)
    return emit_plot([LabeledCurve(f"omega0:{samples}", curve.points)], title="Omega0"), EXIT_OK


def cmd_weights(args, config):
    region = parse_region(args.region)
    seq = weight_sequence(region, args.count, w_min=args.min_weight)
    if args.format == "json":
        return render_json(seq.to_dict()), EXIT_OK
    if args.format == "csv":
        return render_csv(["index", "weight"], [(i + 1, w) for i, w in enumerate(seq.weights)]), EXIT_OK
    _unsupported(args.format, "weights")


def cmd_capacities(args, config):
    spec = parse_domain_spec(args.domain, bidisk_samples=config.OMEGA0_SAMPLES)
    K = args.kmax if args.kmax is not None else config.DEFAULT_KMAX
    caps = capacities_of(spec, K)
    rows = list(enumerate(caps.values.tolist()))
    if args.format == "json":
        return render_json({"domain": args.domain, "capacities": caps.values}), EXIT_OK
    if args.format == "csv":
        return render_csv(["k", "c_k"], rows), EXIT_OK
    return emit_plot([LabeledCurve(args.domain, rows)], xlabel="k", ylabel="c_k"), EXIT_OK


def cmd_check_embedding(args, config):
    if args.format == "svg":
        _unsupported(args.format, "check-embedding")
    if args.explicit_map:
        report = explicit_map_check(args.explicit_map, seed=args.seed, step=config.FD_STEP,
                                    tol=config.SYMPLECTIC_TOLERANCE)
        payload = report.to_dict()
        code = EXIT_OK if report.passed else EXIT_FAILURE
    else:
        if args.source is None or args.target is None:
            raise UsageError("check-embedding needs --source and --target (or --explicit-map)")
        source = parse_domain_spec(args.source, bidisk_samples=config.OMEGA0_SAMPLES)
        target = parse_domain_spec(args.target, bidisk_samples=config.OMEGA0_SAMPLES)
        K = args.kmax if args.kmax is not None else config.DEFAULT_KMAX
        verdict = None
        if isinstance(source, Bidisk):
            try:
                verdict = verdict_bidisk_into(target)
            except EmbeddingError:
                logger.debug("No closed form for this target, using the capacity obstruction")
        if verdict is None:
            verdict = obstruct(source, target, K, slack=args.slack)
        payload = verdict.to_dict()
        code = EXIT_FAILURE if verdict.embeds == "no" else EXIT_OK
    if args.format == "csv":
        return render_csv(list(payload), [list(payload.values())]), code
    return render_json(payload), code


def _oracle_deviation(model, profile) -> float:
    """Largest relative gap between quadrature and ODE (G, alpha) over the positive samples."""
    worst = 0.0
    for v, G, alpha in zip(profile.v, profile.G, profile.alpha):
        if not 0.0 < v < model.M:
            continue
        G_ode, alpha_ode = ode_oracle(model, float(v))
        worst = max(worst, abs(G_ode - G) / G, abs(alpha_ode - alpha) / alpha)
    logger.info(f"ODE cross-check for epsilon={model.epsilon}: max relative deviation {worst:.3e}")
    return worst


def cmd_billiard(args, config):
    fmt = args.emit or args.format
    models = [make_model(eps) for eps in (args.epsilon or [0.1])]
    profiles = [moment_profile(m, args.samples) for m in models]
    deviations = [_oracle_deviation(m, p) for m, p in zip(models, profiles)] if args.oracle else []
    code = EXIT_FAILURE if any(d > config.ORACLE_TOLERANCE for d in deviations) else EXIT_OK
    if fmt == "json":
        payload = [{"epsilon": p.epsilon, "v": p.v, "G": p.G, "alpha": p.alpha,
                    "rho1": p.rho1, "rho2": p.rho2} for p in profiles]
        for entry, deviation in zip(payload, deviations):
            entry["oracle_max_deviation"] = deviation
        return render_json(payload), code
    if fmt == "csv":
        header = ["v", "G", "alpha", "rho1", "rho2"]
        if len(profiles) == 1:
            return render_csv(header, profiles[0].samples), code
        # one block per epsilon, each headed by a comment line
        return "\n".join(f"# epsilon={format_float(p.epsilon)}\n" + render_csv(header, p.samples)
                         for p in profiles), code
    curves = [LabeledCurve("omega0", omega0_curve(config.OMEGA0_SAMPLES).points)]
    curves.extend(LabeledCurve(f"epsilon={p.epsilon}", profile_chain(p)) for p in profiles)
    return emit_plot(curves, title="Moment images", xlabel="rho1", ylabel="rho2"), code


def cmd_verify_packing(args, config):
    if args.format == "svg":
        _unsupported(args.format, "verify-packing")
    placement = load_placement(args.placement or config.PACKING_CERTIFICATE)
    if args.search:
        found = greedy_search(placement.required, (placement.c, placement.d),
                              attempts=args.attempts or config.SEARCH_ATTEMPTS, seed=args.seed,
                              margin=placement.margin)
        return render_json(dump_placement(found)), EXIT_OK
    margin = args.margin if args.margin is not None else placement.margin
    ok, failures = verify_placement(placement, margin=margin, tol=config.PACKING_OVERLAP_TOLERANCE)
    if args.format == "csv":
        rows = [(f["kind"], "|".join(f.get("pair", [f.get("piece", "")]))) for f in failures]
        return render_csv(["kind", "pieces"], rows), EXIT_OK if ok else EXIT_FAILURE
    return render_json({"ok": ok, "failures": failures}), EXIT_OK if ok else EXIT_FAILURE


def cmd_scenario(args, config):
    if args.format == "svg":
        _unsupported(args.format, "scenario")
    reports = run_all(config) if args.name == "all" else [run_scenario(args.name, config)]
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAILURE
    if args.format == "csv":
        rows = [(r.scenario, c.name, str(c.expected), str(c.computed), str(c.tolerance),
                 "pass" if c.passed else "fail") for r in reports for c in r.records]
        return render_csv(["scenario", "name", "expected", "computed", "tolerance", "pass"], rows), code
    payload = [r.to_dict() for r in reports]
    return render_json(payload[0] if len(payload) == 1 else payload), code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='ECH capacities and symplectic embeddings of the lagrangian bidisk')
    parser.add_argument('--output', '-o', default='-', help='Output path, or "-" for stdout (default: -)')
    parser.add_argument('--format', '-f', choices=['json', 'csv', 'svg'], default='json',
                        help='Output format (default: json)')
    parser.add_argument('--log-level', default=None, help='Override the configured log level')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('curve', help='Sample the omega0 boundary curve')
    p.add_argument('--samples', '-n', type=int, default=None, help='Number of segments')
    p.set_defaults(handler=cmd_curve)

    p = sub.add_parser('weights', help='Weight expansion of a concave region')
    p.add_argument('--region', '-r', default='omega0:8192', help='omega0:n literal or region JSON file')
    p.add_argument('--count', '-k', type=int, default=10, help='Number of weights (default: 10)')
    p.add_argument('--min-weight', '--w-min', dest='min_weight', type=float, default=0.0,
                   help='Drop weights below this size')
    p.set_defaults(handler=cmd_weights)

    p = sub.add_parser('capacities', help='ECH capacities of a domain')
    p.add_argument('--domain', '-d', required=True, help='Domain spec JSON, e.g. \'{"ball": 4}\' or bidisk')
    p.add_argument('--kmax', '-K', type=int, default=None, help='Largest index k')
    p.set_defaults(handler=cmd_capacities)

    p = sub.add_parser('check-embedding', help='Embedding verdict or explicit map check')
    p.add_argument('--source', '-s', help='Source domain spec')
    p.add_argument('--target', '-t', help='Target domain spec')
    p.add_argument('--kmax', '-K', type=int, default=None, help='Largest index k for the obstruction')
    p.add_argument('--slack', type=float, default=0.0, help='Tolerance in capacity comparisons')
    p.add_argument('--explicit-map', type=int, default=None, metavar='SAMPLES',
                   help='Check the explicit map into P(4, 4) on random samples')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(handler=cmd_check_embedding)

    p = sub.add_parser('billiard', help='Moment profile of the smoothed billiard')
    p.add_argument('--epsilon', '-e', type=float, action='append', help='Smoothing parameter (repeatable)')
    p.add_argument('--samples', '-n', type=int, default=65, help='Profile samples (default: 65)')
    p.add_argument('--oracle', action='store_true', help='Cross-check G and alpha against the ODE flow')
    p.add_argument('--emit', choices=['csv', 'svg'], default=None, help='Output format, overrides --format')
    p.set_defaults(handler=cmd_billiard)

    p = sub.add_parser('verify-packing', help='Verify or search a triangle placement')
    p.add_argument('--placement', '-p', default=None, help='Placement JSON (default: shipped certificate)')
    p.add_argument('--margin', type=float, default=None, help='Override the placement margin')
    p.add_argument('--search', action='store_true', help='Search a placement for the required pieces')
    p.add_argument('--attempts', type=int, default=None)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(handler=cmd_verify_packing)

    p = sub.add_parser('scenario', help='Run a reproduction scenario')
    p.add_argument('name', choices=[*SCENARIOS, *ALIASES, 'all'], help='Scenario name or "all"')
    p.set_defaults(handler=cmd_scenario)
    return parser


def write_output(text: str, output: str) -> None:
    if output == '-':
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)
        logger.info(f"Wrote {output}")


def main(argv=None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    config = get_config()
    configure_logging(args.log_level or config.LOG_LEVEL)

    try:
        text, code = args.handler(args, config)
    except (DomainSpecError, PlacementError, UnknownScenarioError, UsageError, PlotError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except EchcapError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE

    write_output(text, args.output)
    return code


if __name__ == '__main__':
    sys.exit(main())
