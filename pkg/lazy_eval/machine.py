# lazy_eval/machine.py
"""
Lazy abstract machine over states (heap, control, stack).

The stack is kept as a Python list whose *last* element is the top entry.
Heap and stack sizes are maintained incrementally so that sampling the state
size after every transition costs constant time.
"""

import enum
import logging
from dataclasses import dataclass, field
from operator import attrgetter
from typing import Callable, Dict, List, Optional, Tuple

from django.conf import settings

from .compiler import live_binders
from .exceptions import BlackholeError, CompileError, MachineError
from .syntax import (
    Alt, App, Case, ConApp, Expr, Lam, LetRec, NameSupply, Seq, Var,
    all_names, alts_free_vars, is_machine_expr, rename, rename_alt, subexpressions,
)
from .trace import Trace

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10 ** 7

# steps counted by mln
ESSENTIAL_RULES = frozenset({"Subst", "Branch", "Seq"})


# --- Stack entries -----------------------------------------------------------

@dataclass(frozen=True)
class AppArg:
    name: str
    size = 1

    @property
    def refs(self):
        return frozenset((self.name,))

    def rename(self, mapping, supply):
        return AppArg(mapping.get(self.name, self.name))


@dataclass(frozen=True)
class SeqArg:
    name: str
    size = 1

    @property
    def refs(self):
        return frozenset((self.name,))

    def rename(self, mapping, supply):
        return SeqArg(mapping.get(self.name, self.name))


@dataclass(frozen=True)
class CaseAlts:
    tycon: str
    alts: Tuple[Alt, ...]

    @property
    def size(self):
        return 1 + sum(a.size for a in self.alts)

    @property
    def refs(self):
        return frozenset(alts_free_vars(self.alts))

    def alt_for(self, con):
        for alt in self.alts:
            if alt.con == con:
                return alt
        return None

    def rename(self, mapping, supply):
        return CaseAlts(self.tycon, tuple(rename_alt(a, mapping, supply) for a in self.alts))


@dataclass(frozen=True)
class Update:
    name: str
    size = 0

    @property
    def refs(self):
        return frozenset()

    def rename(self, mapping, supply):
        return Update(mapping.get(self.name, self.name))


@dataclass
class MachineState:
    heap: Dict[str, Expr]
    control: Expr
    stack: List[object] = field(default_factory=list)

    def copy(self):
        return MachineState(dict(self.heap), self.control, list(self.stack))

    def is_final(self):
        return not self.stack and isinstance(self.control, (Lam, ConApp))


def cells(expr):
    """Size that also counts variable occurrences, letrec labels and bindings."""
    total = expr.size
    for node in subexpressions(expr):
        if isinstance(node, Var):
            total += 1
        elif isinstance(node, LetRec):
            total += 1 + len(node.bindings)
    return total


def _entry_cells(entry):
    if isinstance(entry, CaseAlts):
        return 1 + sum(1 + cells(alt.rhs) for alt in entry.alts)
    if isinstance(entry, Update):
        return 1
    return 2


@dataclass(frozen=True)
class SizeMeasure:
    """Weights of expressions, heap bindings and stack entries in a state."""
    name: str
    expr: Callable[[Expr], int]
    entry: Callable[[object], int]
    binding: int = 0

    def heap_entry(self, rhs):
        return self.expr(rhs) + self.binding

    @classmethod
    def parse(cls, text):
        try:
            return SIZE_MEASURES[str(text).strip().lower()]
        except KeyError:
            raise ValueError(f"unknown size measure '{text}' (choose from {', '.join(SIZE_MEASURES)})") from None

    def __str__(self):
        return self.name


NODES = SizeMeasure("nodes", attrgetter("size"), attrgetter("size"))
CELLS = SizeMeasure("cells", cells, _entry_cells, binding=1)
SIZE_MEASURES = {m.name: m for m in (NODES, CELLS)}


def state_size(state, measure=NODES):
    return (sum(measure.heap_entry(rhs) for rhs in state.heap.values())
            + measure.expr(state.control)
            + sum(measure.entry(entry) for entry in state.stack))


# --- Configuration and results -----------------------------------------------

@dataclass(frozen=True)
class GcMode:
    kind: str
    every: int = 0

    @classmethod
    def parse(cls, text):
        text = str(text).strip().lower()
        if text in ("eager", "never"):
            return cls(text)
        if text.startswith("every:"):
            try:
                n = int(text.split(":", 1)[1])
            except ValueError:
                n = 0
            if n >= 1:
                return cls("every", n)
        raise ValueError(f"invalid GC mode '{text}' (expected eager, never or every:N)")

    def due(self, steps):
        if self.kind == "eager":
            return True
        if self.kind == "every":
            return steps % self.every == 0
        return False

    def __str__(self):
        return f"every:{self.every}" if self.kind == "every" else self.kind


GcMode.EAGER = GcMode("eager")
GcMode.NEVER = GcMode("never")


@dataclass(frozen=True)
class RunConfig:
    gc_mode: GcMode = GcMode.EAGER
    screm_enabled: bool = True
    max_steps: int = DEFAULT_MAX_STEPS
    record_trace: bool = False
    size_measure: SizeMeasure = NODES

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    @property
    def exact_space(self):
        """Whether mspmax is the space measure proper (eager GC with SCRem, node sizes)."""
        return self.gc_mode.kind == "eager" and self.screm_enabled and self.size_measure == NODES

    @classmethod
    def from_settings(cls, **overrides):
        conf = getattr(settings, "LRP", {})
        values = {
            "gc_mode": GcMode.parse(conf.get("GC_MODE", "eager")),
            "screm_enabled": bool(conf.get("SCREM", True)),
            "max_steps": int(conf.get("MAX_STEPS", DEFAULT_MAX_STEPS)),
            "size_measure": SizeMeasure.parse(conf.get("SIZE_MEASURE", "nodes")),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class Measures:
    mln: int = 0
    mlnall: int = 0
    mspmax: int = 0
    gc_runs: int = 0
    screm_steps: int = 0

    def summary(self):
        return (f"mln={self.mln} mlnall={self.mlnall} mspmax={self.mspmax} "
                f"gc_runs={self.gc_runs} screm_steps={self.screm_steps}")


class Outcome(enum.Enum):
    FINAL = "final"
    STEP_LIMIT = "step-limit"
    BLACKHOLE = "blackhole"


@dataclass
class RunResult:
    outcome: Outcome
    state: MachineState
    measures: Measures
    trace: Optional[Trace] = None


# --- The machine -------------------------------------------------------------

def _state_names(state):
    names = set(state.heap)
    for rhs in state.heap.values():
        names |= all_names(rhs)
    names |= all_names(state.control)
    for entry in state.stack:
        if isinstance(entry, CaseAlts):
            for alt in entry.alts:
                names.update(alt.binders)
                names |= all_names(alt.rhs)
        else:
            names.add(entry.name)
    return names


class Machine:
    def __init__(self, state, config=None):
        self.state = state
        self.config = config or RunConfig()
        self.measure = self.config.size_measure
        self.supply = NameSupply(_state_names(state))
        self.heap_size = sum(self.measure.heap_entry(rhs) for rhs in state.heap.values())
        self.stack_size = sum(self.measure.entry(entry) for entry in state.stack)
        self.pending = {e.name for e in state.stack if isinstance(e, Update)}
        self.measures = Measures()
        self.trace = Trace() if self.config.record_trace else None

    def size(self):
        return self.heap_size + self.measure.expr(self.state.control) + self.stack_size

    def _push(self, entry):
        self.state.stack.append(entry)
        self.stack_size += self.measure.entry(entry)
        if isinstance(entry, Update):
            self.pending.add(entry.name)

    def _pop(self):
        entry = self.state.stack.pop()
        self.stack_size -= self.measure.entry(entry)
        if isinstance(entry, Update):
            self.pending.discard(entry.name)
        return entry

    def step(self):
        """Apply the one transition rule that matches; returns its name."""
        st = self.state
        c = st.control
        if isinstance(c, App):
            if not isinstance(c.arg, Var):
                raise MachineError("application argument is not a variable")
            self._push(AppArg(c.arg.name))
            st.control = c.fun
            return "Unwind1"
        if isinstance(c, Seq):
            if not isinstance(c.second, Var):
                raise MachineError("second argument of seq is not a variable")
            self._push(SeqArg(c.second.name))
            st.control = c.first
            return "Unwind2"
        if isinstance(c, Case):
            self._push(CaseAlts(c.tycon, c.alts))
            st.control = c.scrutinee
            return "Unwind3"
        if isinstance(c, LetRec):
            self._letrec(c)
            return "Letrec"
        if isinstance(c, Var):
            rhs = st.heap.pop(c.name, None)
            if rhs is None:
                raise BlackholeError(c.name)
            self.heap_size -= self.measure.heap_entry(rhs)
            self._push(Update(c.name))
            st.control = rhs
            return "Lookup"

        if not st.stack:
            raise MachineError("final state has no successor")
        top = st.stack[-1]
        if isinstance(top, Update):
            self._pop()
            st.heap[top.name] = c
            self.heap_size += self.measure.heap_entry(c)
            return "Update"
        if isinstance(c, Lam) and isinstance(top, AppArg):
            self._pop()
            st.control = rename(c.body, {c.param: top.name}, self.supply)
            return "Subst"
        if isinstance(c, ConApp) and isinstance(top, CaseAlts):
            alt = top.alt_for(c.con)
            if alt is None:
                raise MachineError(f"no alternative for constructor '{c.con}' in case over {top.tycon}")
            if not all(isinstance(a, Var) for a in c.args):
                raise MachineError(f"constructor '{c.con}' applied to a non-variable")
            self._pop()
            mapping = dict(zip(alt.binders, (a.name for a in c.args)))
            st.control = rename(alt.rhs, mapping, self.supply)
            return "Branch"
        if isinstance(top, SeqArg):
            self._pop()
            st.control = Var(top.name)
            return "Seq"
        raise MachineError(f"no transition for {type(c).__name__} against {type(top).__name__}")

    def _letrec(self, c):
        heap = self.state.heap
        mapping = {b: self.supply.fresh(b) for b in c.binders if b in heap or b in self.pending}
        for name, rhs in c.bindings:
            rhs = rename(rhs, mapping, self.supply)
            heap[mapping.get(name, name)] = rhs
            self.heap_size += self.measure.heap_entry(rhs)
        self.state.control = rename(c.body, mapping, self.supply)

    def collect_garbage(self):
        """Remove every heap binding unreachable from control and stack; returns the count."""
        st = self.state
        roots = set(st.control.fv)
        for entry in st.stack:
            roots |= entry.refs
        live = live_binders(st.heap.items(), roots)
        dead = [n for n in st.heap if n not in live]
        for name in dead:
            self.heap_size -= self.measure.heap_entry(st.heap.pop(name))
        return len(dead)

    def stack_chain_removal(self):
        """Merge adjacent update markers until no two of them top the stack."""
        st, merged = self.state, 0
        while len(st.stack) >= 2 and isinstance(st.stack[-1], Update) and isinstance(st.stack[-2], Update):
            x = self._pop().name
            y = self._pop().name
            mapping = {y: x}
            for name, rhs in st.heap.items():
                if y in rhs.fv:
                    st.heap[name] = rename(rhs, mapping, self.supply)
            st.control = rename(st.control, mapping, self.supply)
            st.stack[:] = [e.rename(mapping, self.supply) if y in e.refs else e for e in st.stack]
            self._push(Update(x))
            merged += 1
        return merged

    def _sample(self):
        size = self.size()
        if size > self.measures.mspmax:
            self.measures.mspmax = size

    def _gc(self, excluded):
        if self.collect_garbage():
            self.measures.gc_runs += 1
            if not excluded:
                self._sample()

    def _result(self, outcome):
        return RunResult(outcome, self.state, self.measures, self.trace)

    def run(self):
        cfg, m = self.config, self.measures
        self._sample()
        if cfg.gc_mode.kind == "eager":
            self._gc(excluded=False)
        while not self.state.is_final():
            if m.mlnall >= cfg.max_steps:
                logger.info("machine step limit reached", extra={"max_steps": cfg.max_steps})
                return self._result(Outcome.STEP_LIMIT)
            try:
                rule = self.step()
            except BlackholeError as exc:
                exc.result = self._result(Outcome.BLACKHOLE)
                logger.info("machine blackhole", extra={"name": exc.name, "mlnall": m.mlnall})
                raise
            m.mlnall += 1
            if rule in ESSENTIAL_RULES:
                m.mln += 1
            # the state right after writing back a constructor is not counted
            excluded = rule == "Update" and isinstance(self.state.control, ConApp)
            if not excluded:
                self._sample()
            if cfg.screm_enabled:
                m.screm_steps += self.stack_chain_removal()
            if cfg.gc_mode.due(m.mlnall):
                self._gc(excluded)
            if self.trace is not None:
                self.trace.add(rule, self.size())
        logger.info("machine run finished", extra={
            "mln": m.mln, "mlnall": m.mlnall, "mspmax": m.mspmax, "gc_runs": m.gc_runs,
        })
        return self._result(Outcome.FINAL)


# --- Functional interface ----------------------------------------------------

def step(state):
    """One transition on a copy of ``state``: ``(rule, state)`` or ``Outcome.FINAL``."""
    if state.is_final():
        return Outcome.FINAL
    machine = Machine(state.copy())
    rule = machine.step()
    return rule, machine.state


def collect_garbage(state):
    machine = Machine(state.copy())
    machine.collect_garbage()
    return machine.state


def stack_chain_removal(state):
    machine = Machine(state.copy())
    machine.stack_chain_removal()
    return machine.state


def run(expr, config=None):
    if expr.fv:
        raise CompileError("unbound variable", expr.fv)
    if not is_machine_expr(expr):
        raise MachineError("input is not a machine expression")
    return Machine(MachineState({}, expr, []), config).run()
