# lazy_eval/management/commands/lrp.py

import argparse
import dataclasses
import re
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from tabulate import tabulate

from lazy_eval.calculus import OracleOutcome, Strategy, compare_empty_context, evaluate
from lazy_eval.compiler import compile_expr, compile_pipeline, prepare
from lazy_eval.corpus import run_selftest
from lazy_eval.exceptions import BlackholeError, LrpError, StepLimitExceeded
from lazy_eval.harness import (
    EXPERIMENTS, emit_csv, emit_tikz, experiments, run_experiment, save_rows, trace_expr,
    trace_program,
)
from lazy_eval.machine import NODES, GcMode, Outcome, RunConfig, SizeMeasure, run
from lazy_eval.parser import parse_program
from lazy_eval.prelude import load_prelude
from lazy_eval.syntax import is_machine_expr, pretty

K_RANGE = re.compile(r"^(\d+)(?:\.\.(\d+)(?::(\d+))?)?$")


def gc_mode_arg(text):
    try:
        return GcMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def size_measure_arg(text):
    try:
        return SizeMeasure.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def trace_out_arg(text):
    kind, sep, path = text.partition(":")
    if not sep or kind not in ("csv", "tikz") or not path:
        raise argparse.ArgumentTypeError(f"expected csv:PATH or tikz:PATH, got '{text}'")
    return kind, Path(path)


def k_range_arg(text):
    """``A``, ``A..B`` (step A) or ``A..B:STEP``."""
    match = K_RANGE.match(text.strip())
    if not match:
        raise argparse.ArgumentTypeError(f"expected A..B:STEP, got '{text}'")
    start, stop, step = match.groups()
    start = int(start)
    if stop is None:
        ks = (start,)
    else:
        step = int(step) if step else start
        ks = tuple(range(start, int(stop) + 1, step)) if step > 0 else ()
    if not ks or ks[0] < 1:
        raise argparse.ArgumentTypeError(f"empty or non-positive k range '{text}'")
    return ks


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        value = 0
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got '{text}'")
    return value


class Command(BaseCommand):
    """
    Front end for the LRP interpreter: run programs on the abstract machine,
    evaluate them with the calculus, and reproduce the space/time experiments.
    """
    help = "Run, compile, trace and measure LRP programs."

    def add_arguments(self, parser):
        machine = argparse.ArgumentParser(add_help=False)
        machine.add_argument("--gc-mode", type=gc_mode_arg, default=None,
                             help="eager (default), every:N or never")
        machine.add_argument("--no-screm", action="store_true", help="Disable stack-chain removal")
        machine.add_argument("--size-measure", type=size_measure_arg, default=None,
                             metavar="{nodes,cells}", help="How states are weighed for mspmax")
        machine.add_argument("--max-steps", type=positive_int, default=None)
        machine.add_argument("--prelude", default=None, help="Library file replacing the built-in prelude")
        machine.add_argument("--trace-out", type=trace_out_arg, default=None, metavar="{csv|tikz}:PATH")

        subparsers = parser.add_subparsers(dest="subcommand", required=True)

        p = subparsers.add_parser("run", parents=[machine], help="Run a program and print its measures")
        p.add_argument("path")

        p = subparsers.add_parser("compile", parents=[machine], help="Print the compiled machine expression")
        p.add_argument("path")

        p = subparsers.add_parser("trace", parents=[machine], help="Per-step sizes as CSV or TikZ")
        p.add_argument("path")
        p.add_argument("--calculus", action="store_true", help="Trace the calculus instead of the machine")

        p = subparsers.add_parser("oracle", parents=[machine], help="Check the machine against the calculus")
        p.add_argument("path")

        p = subparsers.add_parser("compare", parents=[machine], help="Compare two programs in the empty context")
        p.add_argument("left")
        p.add_argument("right")

        p = subparsers.add_parser("bench", parents=[machine], help="Run a named experiment")
        p.add_argument("experiment", choices=sorted(EXPERIMENTS))
        p.add_argument("--k", dest="ks", type=k_range_arg, default=None, metavar="A..B:STEP")
        p.add_argument("--csv", default=None, help="Write the rows to this CSV file")
        p.add_argument("--save", action="store_true", help="Store the rows in the database")

        p = subparsers.add_parser("selftest", parents=[machine], help="Cross-check on a generated corpus")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--count", type=positive_int, default=200)
        p.add_argument("--min-checked", type=int, default=0,
                       help="Keep drawing until both adequacy checks decided this many expressions")

    def handle(self, *args, **options):
        handler = getattr(self, f"handle_{options['subcommand']}")
        try:
            handler(options)
        except BlackholeError as exc:
            if exc.result is not None:
                self.stdout.write(exc.result.measures.summary())
            raise CommandError(str(exc), returncode=2)
        except StepLimitExceeded as exc:
            raise CommandError(str(exc), returncode=3)
        except LrpError as exc:
            raise CommandError(str(exc), returncode=1)
        except OSError as exc:
            raise CommandError(f"{exc.filename or 'I/O'}: {exc.strerror or exc}", returncode=1)
        except RecursionError:
            raise CommandError("expression nests too deeply (raise LRP_RECURSION_LIMIT)", returncode=1)

    # --- helpers -------------------------------------------------------------

    def config(self, options, **changes):
        config = RunConfig.from_settings(
            gc_mode=options["gc_mode"],
            max_steps=options["max_steps"],
            size_measure=options["size_measure"],
        )
        if options["no_screm"]:
            config = dataclasses.replace(config, screm_enabled=False)
        return dataclasses.replace(config, **changes) if changes else config

    def prelude(self, options):
        return load_prelude(options["prelude"])

    def read_program(self, path):
        return parse_program(Path(path).read_text(encoding="utf-8"))

    def check_finished(self, result, config):
        if result.outcome is Outcome.STEP_LIMIT:
            self.stdout.write(result.measures.summary())
            raise StepLimitExceeded(config.max_steps, result)

    def write_trace(self, trace, target, title=None):
        kind, path = target if target else ("csv", None)
        if kind == "tikz":
            text = emit_tikz(trace, standalone=True, title=title)
            if path is None:
                self.stdout.write(text, ending="")
            else:
                path.write_text(text, encoding="utf-8")
        elif path is None:
            emit_csv(trace, self.stdout)
        else:
            emit_csv(trace, path)
        if path is not None:
            self.stderr.write(self.style.SUCCESS(f"✅ {len(trace)} trace records written to {path}"))

    # --- subcommands ------------------------------------------------------------

    def handle_run(self, options):
        config = self.config(options, record_trace=options["trace_out"] is not None)
        expr = compile_pipeline(self.read_program(options["path"]), self.prelude(options))
        result = run(expr, config)
        self.check_finished(result, config)
        self.stdout.write(result.measures.summary())
        self.stdout.write(f"result: {pretty(result.state.control)}")
        if config.exact_space:
            self.stdout.write("space: exact")
        else:
            screm = "on" if config.screm_enabled else "off"
            self.stdout.write(f"space: approximate (gc={config.gc_mode}, screm={screm}, "
                              f"size={config.size_measure})")
        if options["trace_out"]:
            self.write_trace(result.trace, options["trace_out"])

    def handle_compile(self, options):
        expr = compile_pipeline(self.read_program(options["path"]), self.prelude(options))
        self.stdout.write(pretty(expr))

    def handle_trace(self, options):
        prepared = prepare(self.read_program(options["path"]), self.prelude(options))
        config = self.config(options)
        if options["calculus"]:
            result = evaluate(prepared, Strategy.LRPGC, config.max_steps, record_trace=True)
            if result.outcome is OracleOutcome.STEP_LIMIT:
                raise StepLimitExceeded(config.max_steps)
            trace = result.trace
        else:
            result = trace_expr(prepared, config)
            self.check_finished(result, config)
            trace = result.trace
        self.write_trace(trace, options["trace_out"], title=Path(options["path"]).stem)

    def handle_oracle(self, options):
        config = self.config(options)
        prepared = prepare(self.read_program(options["path"]), self.prelude(options))
        oracle = evaluate(prepared, Strategy.LRPGC, config.max_steps)
        self.stdout.write(f"rln={oracle.rln} rlnall={oracle.rlnall} spmax={oracle.spmax} "
                          f"gc_steps={oracle.gc_steps}")
        if oracle.outcome is OracleOutcome.STUCK:
            raise CommandError("calculus evaluation is stuck", returncode=1)
        if not oracle.converged:
            raise StepLimitExceeded(config.max_steps)

        machine = run(compile_expr(prepared), config)
        self.check_finished(machine, config)
        self.stdout.write(machine.measures.summary())
        time_ok = machine.measures.mln == oracle.rln

        if not is_machine_expr(prepared):
            self.stdout.write(self.style.WARNING(
                "space check skipped: input is not a machine expression"))
            verdicts = ["mln==rln" if time_ok else "mln!=rln"]
            space_ok = True
        else:
            exact = dataclasses.replace(config, gc_mode=GcMode.EAGER, screm_enabled=True,
                                        size_measure=NODES)
            space = run(prepared, exact)
            self.check_finished(space, exact)
            space_ok = space.measures.mspmax == oracle.spmax
            verdicts = ["mln==rln" if time_ok else "mln!=rln",
                        "mspmax==spmax" if space_ok else "mspmax!=spmax"]
        if time_ok and space_ok:
            self.stdout.write(self.style.SUCCESS(f"adequate: {', '.join(verdicts)}"))
        else:
            self.stdout.write(self.style.ERROR(f"not adequate: {', '.join(verdicts)}"))
            raise CommandError("machine and calculus measures disagree", returncode=1)

    def handle_compare(self, options):
        config = self.config(options)
        prelude = self.prelude(options)
        left = prepare(self.read_program(options["left"]), prelude)
        right = prepare(self.read_program(options["right"]), prelude)
        report = compare_empty_context(left, right, config.max_steps)
        self.stdout.write(tabulate(report.rows(), headers=["measure", "left", "", "right"]))
        if report.inconclusive:
            self.stdout.write(self.style.WARNING("inconclusive: at least one side did not reach WHNF"))
        elif report.all_equal:
            self.stdout.write("equal in the empty context")

    def handle_bench(self, options):
        config = self.config(options)
        prelude = self.prelude(options)
        specs = experiments(options["experiment"], options["ks"], config)
        if options["experiment"] == "diagram":
            return self.bench_diagram(specs, config, prelude, options)
        for spec in specs:
            rows = run_experiment(spec, prelude)
            self.stdout.write(self.style.HTTP_INFO(f"{spec.family}: {spec.name}"))
            gc_columns = list(rows[0].gc_columns) if rows and rows[0].gc_columns else []
            table = [[r.k, r.mln, r.mlnall, r.mspmax] + [r.gc_columns[c] for c in gc_columns] for r in rows]
            self.stdout.write(tabulate(table, headers=["k", "mln", "mlnall", "mspmax"] + gc_columns))
            if options["csv"]:
                path = Path(options["csv"])
                if len(specs) > 1:
                    path = path.with_name(f"{path.stem}-{spec.name.replace(chr(39), '_prime')}{path.suffix}")
                emit_csv(rows, path)
                self.stderr.write(self.style.SUCCESS(f"✅ {len(rows)} rows written to {path}"))
            if options["save"]:
                saved = save_rows(spec.name, spec.family, spec.config, rows)
                self.stderr.write(self.style.SUCCESS(f"💾 Saved as run #{saved.pk}"))

    def bench_diagram(self, specs, config, prelude, options):
        spec = specs[0]
        if len(spec.ks) != 1:
            raise CommandError("the diagram experiment takes a single k", returncode=1)
        k = spec.ks[0]
        result = trace_program(spec.source(k), config, prelude)
        self.check_finished(result, config)
        self.write_trace(result.trace, options["trace_out"] or ("tikz", None),
                         title=f"{spec.name}, k={k}")

    def handle_selftest(self, options):
        seed = options["seed"]
        if seed is None:
            seed = settings.LRP.get("SEED", 0)
        max_steps = options["max_steps"] or 10 ** 4
        report = run_selftest(seed=seed, count=options["count"], max_steps=max_steps,
                              min_checked=options["min_checked"])
        self.stdout.write(f"seed={report.seed} count={report.count}")
        self.stdout.write(tabulate(report.rows(), headers=["check", "passed", "failed", "skipped"]))
        for check in report.checks.values():
            for text in check.failures:
                self.stdout.write(self.style.ERROR(f"{check.name}: {text}"))
        for example in report.counterexamples:
            self.stdout.write(self.style.WARNING(
                f"space counterexample: {example['expr']} "
                f"(mspmax={example['mspmax']}, spmax={example['spmax']})"))
        if not report.ok:
            raise CommandError("self-test found failures", returncode=1)
        self.stdout.write(self.style.SUCCESS("✅ all checks passed"))
