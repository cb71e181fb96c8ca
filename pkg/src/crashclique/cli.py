"""Command-line front end.

Subcommands: family gen | family verify | run-tc | run-sim | lowerbound |
sweep | run. Every run prints a ``scenario=<name> seed=<n>`` banner first;
rerunning with the same flags and seed reproduces every byte (pass
--no-wallclock to zero the one timing column). Exit codes: 0 ok, 2 bad
configuration, 3 violated invariant, 4 adversary bug.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

from . import covering, harness
from .erasure import CodecError
from .netsim import AdversaryError, ConfigError, InvariantViolation


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _banner(name: str, seed: int) -> None:
    print(f"scenario={name} seed={seed}")


def _add_engine_flags(p: argparse.ArgumentParser, n_default: int) -> None:
    p.add_argument("--n", type=int, default=n_default, help="node count")
    p.add_argument("--alpha", type=float, default=0.25,
                   help="crash budget fraction")
    p.add_argument("--B", type=int, default=4, help="per-set load target")
    p.add_argument("--epsilon", type=float, default=0.3,
                   help="schedule shrink factor / balance slack")
    p.add_argument("--adversary", default="none",
                   choices=["none", "random", "frontload", "targeted",
                            "lowerbound"])
    p.add_argument("--p", type=float, default=0.02,
                   help="random adversary crash probability")
    p.add_argument("--target", type=int, default=1,
                   help="targeted adversary task id")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default=None, help="scenario name for the banner")
    p.add_argument("--csv", default=None, help="write the run CSV here")
    p.add_argument("--trace", default=None, help="write the message trace CSV")
    p.add_argument("--crash-log", default=None, help="write the crash CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crashclique",
        description="crash-tolerant clique protocols: task completion, "
                    "erasure-coded storage, and fault-masking simulation")
    parser.add_argument("--no-wallclock", action="store_true",
                        help="report 0.0 wallclock so output is byte-stable")
    sub = parser.add_subparsers(dest="command", required=True)

    fam = sub.add_parser("family", help="covering family tools")
    fsub = fam.add_subparsers(dest="action", required=True)
    gen = fsub.add_parser("gen", help="generate and save a family")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, default=0, help="sets (default n)")
    gen.add_argument("--k", type=int, default=0,
                     help="subset size (default 3B/2)")
    gen.add_argument("--B", type=int, default=4)
    gen.add_argument("--epsilon", type=float, default=0.3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    ver = fsub.add_parser("verify", help="check a saved family")
    ver.add_argument("path")
    ver.add_argument("--samples", type=int, default=1000)
    ver.add_argument("--rng-seed", type=int, default=0)

    tc = sub.add_parser("run-tc", help="task-completion loop")
    _add_engine_flags(tc, n_default=32)
    tc.add_argument("--tasks", type=int, default=0, help="M (default n)")
    tc.add_argument("--R", type=int, default=1, help="rounds per attempt")

    rs = sub.add_parser("run-sim", help="fault-masking simulation")
    _add_engine_flags(rs, n_default=16)
    rs.add_argument("--algo", default="echo",
                    choices=["echo", "allpairs", "token", "prefixsum"])
    rs.add_argument("--T", type=int, default=2, help="simulated rounds")

    lb = sub.add_parser("lowerbound", help="task-starving schedule, R=1 M=n")
    _add_engine_flags(lb, n_default=256)
    lb.add_argument("--steps", default=None, help="write the step CSV here")

    sw = sub.add_parser("sweep", help="scaling sweep across the suite")
    sw.add_argument("--scenario", default=None, help="base scenario file")
    sw.add_argument("--n-values", required=True,
                    help="comma-separated power-of-two sizes")
    sw.add_argument("--csv", default=None)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario_file")
    run.add_argument("--csv", default=None)
    run.add_argument("--explain", action="store_true",
                     help="print the resolved configuration and exit")

    return parser


def _scenario_from_flags(args, experiment: str) -> harness.Scenario:
    s = harness.Scenario(
        name=args.name or experiment,
        experiment=experiment,
        n=args.n,
        alpha=args.alpha,
        B=args.B,
        epsilon=args.epsilon,
        adversary=args.adversary,
        p=args.p,
        target=args.target,
        seed=args.seed,
    )
    if experiment == "run-tc":
        s = dataclasses.replace(s, M=args.tasks, R=args.R)
    elif experiment == "run-sim":
        s = dataclasses.replace(s, algorithm=args.algo, T=args.T)
    return s


def _engine_outputs(args, art: harness.RunArtifacts) -> None:
    if args.trace:
        art.engine.write_trace_csv(args.trace)
    if getattr(args, "crash_log", None):
        art.engine.write_crash_csv(args.crash_log)


def _cmd_family(args) -> int:
    if args.action == "gen":
        m = args.m or args.n
        k = args.k or min(m, max(args.B, 3 * args.B // 2))
        params = covering.FamilyParams(n=args.n, m=m, k=k, B=args.B,
                                       epsilon=args.epsilon, seed=args.seed)
        _banner(f"family-gen-n{args.n}", args.seed)
        family = covering.get_family(params)
        covering.save_family(family, args.out)
        sizes = family.sizes()
        print(f"sets={m} k={k} B={args.B} sizes={sizes.min()}..{sizes.max()} "
              f"-> {args.out}")
        return 0

    family = covering.load_family(args.path)
    params = family.params
    _banner(f"family-verify-n{params.n}", args.rng_seed)
    report = covering.verify_size_bounds(family)
    cert = covering.certify_load_balance(family, params.k, args.samples,
                                         rng_seed=args.rng_seed)
    mode = "exhaustive" if cert.exhaustive else "sampled"
    print(f"size bounds: {'pass' if report.ok else 'FAIL'}")
    if not report.ok:
        print(f"  violating sets: {report.violating[:10]}")
    balanced = cert.pass_fraction >= 0.99
    print(f"load balance ({mode}, {cert.samples} subsets): "
          f"pass fraction {cert.pass_fraction:.4f} "
          f"({'pass' if balanced else 'FAIL'} at 0.99), "
          f"worst uncovered fraction {cert.worst_bad_fraction:.4f}")
    return 0 if report.ok and balanced else 3


def _cmd_run_tc(args, wallclock: bool) -> int:
    s = _scenario_from_flags(args, "run-tc")
    resolved = s.resolved()
    _banner(resolved.name, resolved.seed)
    art = harness.run_one(s, record_trace=bool(args.trace or args.crash_log),
                          wallclock=wallclock)
    _write_or_print(harness.iteration_csv(art.ledger.rows), args.csv)
    _engine_outputs(args, art)
    m = art.metrics
    print(f"rounds={m.rounds_total} crashes={m.crashes_total} "
          f"iterations={m.iterations} messages={m.messages_total}")
    return 0


def _cmd_run_sim(args, wallclock: bool) -> int:
    s = _scenario_from_flags(args, "run-sim")
    resolved = s.resolved()
    _banner(resolved.name, resolved.seed)
    art = harness.run_one(s, record_trace=bool(args.trace or args.crash_log),
                          wallclock=wallclock)
    _write_or_print(harness.phase_csv(art.sim.rows), args.csv)
    _engine_outputs(args, art)
    m = art.metrics
    print(f"rounds={m.rounds_total} crashes={m.crashes_total} "
          f"messages={m.messages_total}")
    return 0


def _cmd_lowerbound(args, wallclock: bool) -> int:
    s = _scenario_from_flags(args, "lowerbound")
    resolved = s.resolved()
    _banner(resolved.name, resolved.seed)
    art = harness.run_one(s, record_trace=bool(args.trace or args.crash_log),
                          wallclock=wallclock)
    _write_or_print(harness.iteration_csv(art.ledger.rows), args.csv)
    steps = art.adversary.steps
    if args.steps:
        _write_or_print(harness.step_csv(steps), args.steps)
    for st in steps:
        print(f"step {st.step}: round={st.round} target={st.target_size} "
              f"crashed={st.crashed}")
    _engine_outputs(args, art)
    m = art.metrics
    print(f"rounds={m.rounds_total} crashes={m.crashes_total} "
          f"steps={len(steps)}")
    return 0


def _cmd_sweep(args) -> int:
    base = (harness.load_scenario(args.scenario) if args.scenario
            else harness.Scenario(experiment="run-tc", R=1))
    n_values = [int(v) for v in args.n_values.split(",") if v]
    _banner(f"sweep-{base.name}", base.seed)
    report = harness.scaling_sweep(base, n_values)
    _write_or_print(report.csv(), args.csv)
    print(f"ratio spread max/min = {report.spread:.4f}")
    return 0


def _cmd_run(args, wallclock: bool) -> int:
    scenario = harness.load_scenario(args.scenario_file)
    if args.explain:
        print(harness.explain(scenario))
        return 0
    resolved = scenario.resolved()
    _banner(resolved.name, resolved.seed)
    arts = harness.run_scenario(scenario, wallclock=wallclock)
    _write_or_print(harness.metrics_csv([a.metrics for a in arts]), args.csv)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    wallclock = not args.no_wallclock
    try:
        if args.command == "family":
            return _cmd_family(args)
        if args.command == "run-tc":
            return _cmd_run_tc(args, wallclock)
        if args.command == "run-sim":
            return _cmd_run_sim(args, wallclock)
        if args.command == "lowerbound":
            return _cmd_lowerbound(args, wallclock)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_run(args, wallclock)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except AdversaryError as exc:
        print(f"adversary bug: {exc}", file=sys.stderr)
        return 4
    except (InvariantViolation, CodecError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
