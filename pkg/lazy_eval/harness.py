# lazy_eval/harness.py
"""
Experiments over growing inputs: each one compiles a program template for a
series of input sizes ``k``, runs it on the machine and collects the measures.
"""

import csv
import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from string import Template
from typing import Dict, Optional, Tuple

from django.db import transaction
from django.template.loader import render_to_string

from .compiler import compile_expr, compile_pipeline, prepare
from .exceptions import StepLimitExceeded, TraceError
from .machine import GcMode, Outcome, RunConfig, run
from .parser import Program, parse_expr, parse_program
from .prelude import GENERATORS, load_prelude
from .trace import Trace

logger = logging.getLogger(__name__)

GC_COLUMNS = (
    ("eager", GcMode.EAGER),
    ("every1000", GcMode("every", 1000)),
    ("every2000", GcMode("every", 2000)),
    ("never", GcMode.NEVER),
)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    family: str
    template: str
    ks: Tuple[int, ...]
    config: RunConfig = RunConfig()
    mode: str = "single"
    # the fused (right-hand) program of a difference experiment
    fused_template: Optional[str] = None

    def __post_init__(self):
        ks = tuple(self.ks)
        object.__setattr__(self, "ks", ks)
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError(f"k values of {self.name} must be strictly increasing: {ks}")
        if any(k < 1 for k in ks):
            raise ValueError(f"k values of {self.name} must be positive")
        if self.mode not in ("single", "diff"):
            raise ValueError(f"unknown experiment mode '{self.mode}'")
        if self.mode == "diff" and not self.fused_template:
            raise ValueError(f"difference experiment {self.name} needs a fused template")

    def source(self, k, fused=False):
        return Template(self.fused_template if fused else self.template).substitute(k=k)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class MeasureRow:
    k: int
    mln: int
    mlnall: int
    mspmax: int
    gc_columns: Optional[Dict[str, int]] = None


def gen_list(k, shape):
    """Closed expression (prelude included) evaluating to a k-element list."""
    if k < 1:
        raise ValueError("k must be at least 1")
    try:
        text = Template(GENERATORS[shape]).substitute(k=k)
    except KeyError:
        raise ValueError(f"unknown list shape '{shape}' (choose from {', '.join(GENERATORS)})") from None
    return prepare(Program(main=parse_expr(text)), load_prelude())


def _measure(source, config, prelude):
    result = run(compile_pipeline(parse_program(source), prelude), config)
    if result.outcome is Outcome.STEP_LIMIT:
        raise StepLimitExceeded(config.max_steps, result)
    return result


def run_experiment(spec, prelude=None):
    if prelude is None:
        prelude = load_prelude()
    rows = []
    for k in spec.ks:
        if spec.mode == "single":
            m = _measure(spec.source(k), spec.config, prelude).measures
            row = MeasureRow(k, m.mln, m.mlnall, m.mspmax)
        else:
            unfused = compile_pipeline(parse_program(spec.source(k)), prelude)
            fused = compile_pipeline(parse_program(spec.source(k, fused=True)), prelude)
            deltas = {}
            for column, mode in GC_COLUMNS:
                config = dataclasses.replace(spec.config, gc_mode=mode)
                a, b = run(unfused, config), run(fused, config)
                for result in (a, b):
                    if result.outcome is Outcome.STEP_LIMIT:
                        raise StepLimitExceeded(config.max_steps, result)
                deltas[column] = (a.measures, b.measures)
            ua, fa = deltas["eager"]
            row = MeasureRow(
                k, ua.mln - fa.mln, ua.mlnall - fa.mlnall, ua.mspmax - fa.mspmax,
                {column: u.mspmax - f.mspmax for column, (u, f) in deltas.items()},
            )
        logger.info("experiment row", extra={"experiment": spec.name, **dataclasses.asdict(row)})
        rows.append(row)
    return rows


def trace_program(source, config=None, prelude=None):
    """Machine run of ``source`` with a recorded size trace."""
    config = dataclasses.replace(config or RunConfig(), record_trace=True)
    return run(compile_pipeline(parse_program(source), prelude), config)


def trace_expr(expr, config=None):
    """Machine run of a prepared source expression with a recorded size trace."""
    config = dataclasses.replace(config or RunConfig(), record_trace=True)
    return run(compile_expr(expr), config)


# --- Output --------------------------------------------------------------------

def _csv_records(data):
    if isinstance(data, Trace):
        return ["i", "rule", "size"], [(r.i, r.rule, r.size) for r in data]
    rows = list(data)
    header = ["k", "mln", "mlnall", "mspmax"]
    columns = list(rows[0].gc_columns) if rows and rows[0].gc_columns else []
    records = [[r.k, r.mln, r.mlnall, r.mspmax] + [r.gc_columns[c] for c in columns] for r in rows]
    return header + columns, records


def emit_csv(data, destination):
    """Write measure rows or a trace as CSV to a path or an open text file."""
    header, records = _csv_records(data)
    if hasattr(destination, "write"):
        writer = csv.writer(destination, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(records)
        return destination
    with open(destination, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(records)
    return Path(destination)


def emit_tikz(trace, standalone=False, title=None):
    """A pgfplots picture of (i, size) over the trace."""
    if not trace:
        raise TraceError("cannot draw an empty trace")
    return render_to_string("lazy_eval/size_diagram.tex", {
        "coordinates": " ".join(f"({r.i},{r.size})" for r in trace),
        "steps": len(trace),
        "peak": trace.peak(),
        "standalone": standalone,
        "title": title,
    })


# --- Persistence -----------------------------------------------------------------

def save_rows(name, family, config, rows):
    from .models import ExperimentRun, MeasureRecord

    with transaction.atomic():
        experiment = ExperimentRun.objects.create(
            name=name, family=family, gc_mode=str(config.gc_mode), screm=config.screm_enabled,
        )
        MeasureRecord.objects.bulk_create([
            MeasureRecord(run=experiment, k=r.k, mln=r.mln, mlnall=r.mlnall,
                          mspmax=r.mspmax, gc_columns=r.gc_columns)
            for r in rows
        ])
    return experiment


# --- Registry ------------------------------------------------------------------------

def _main(expr):
    return f"main = {expr};"


FOLD_INPUT = GENERATORS["OneTrueThenFalse"]
REVERSE_INPUT = GENERATORS["AllTrue"]
FUSION_INPUT = GENERATORS["InnerPairs"]
APPEND_LIST = GENERATORS["AllTrue"]
# one numeral shared by the four unshared lists
APPEND_COPY = "replicate n True"

EXPERIMENTS = {
    "fold": tuple(
        ExperimentSpec(variant, "fold", _main(f"{variant} xor False ({FOLD_INPUT})"), range(25, 251, 25))
        for variant in ("foldl", "foldl'", "foldr")
    ),
    "reverse": tuple(
        ExperimentSpec(variant, "reverse", _main(f"last ({variant} ({REVERSE_INPUT}))"), range(50, 501, 50))
        for variant in ("reverse", "reverse'")
    ),
    "fusion": (
        ExperimentSpec(
            "concatMap", "fusion",
            _main(f"last (comp concat (map tail) ({FUSION_INPUT}))"),
            range(100, 1001, 100), mode="diff",
            fused_template=_main(f"last (concatMap tail ({FUSION_INPUT}))"),
        ),
    ),
    "append": (
        ExperimentSpec(
            "shared", "append",
            _main(f"last (letrec xs = {APPEND_LIST}; ys = xs ++ xs in ys ++ ys)"),
            range(100, 1001, 100),
        ),
        ExperimentSpec(
            "unshared", "append",
            _main(f"last (letrec n = $k in ({APPEND_COPY} ++ {APPEND_COPY}) ++ ({APPEND_COPY} ++ {APPEND_COPY}))"),
            range(100, 1001, 100),
        ),
    ),
    "diagram": (
        ExperimentSpec("foldl", "diagram", _main(f"foldl xor False ({FOLD_INPUT})"), (250,)),
    ),
}


def experiments(family, ks=None, config=None):
    """The registered specs of ``family``, optionally with other k values or config."""
    try:
        specs = EXPERIMENTS[family]
    except KeyError:
        raise ValueError(f"unknown experiment '{family}' (choose from {', '.join(EXPERIMENTS)})") from None
    changes = {}
    if ks is not None:
        changes["ks"] = tuple(ks)
    if config is not None:
        changes["config"] = config
    return tuple(spec.replace(**changes) for spec in specs) if changes else specs
