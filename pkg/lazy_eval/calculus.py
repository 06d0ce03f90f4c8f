# lazy_eval/calculus.py
"""
Normal-order reduction of the calculus, with and without mandatory garbage
collection of the top letrec. Used as the reference for the machine measures.

A closed expression is either a top ``letrec`` (environment plus body) or any
other expression (empty environment). A position inside it is a *location*,
``BODY`` or ``("bind", name)``, plus a *path* of steps that only ever go into
the function of an application, the first argument of ``seq`` or the
scrutinee of ``case``. No binder lies on such a path.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .compiler import live_binders
from .exceptions import OracleError
from .syntax import (
    App, Case, ConApp, Expr, Lam, LetRec, NameSupply, Seq, Var,
    all_names, alts_free_vars, is_value, rename,
)
from .trace import Trace

logger = logging.getLogger(__name__)

BODY = "body"

# rules counted by rln
ESSENTIAL_RULES = frozenset({"lbeta", "case-c", "case-in", "case-e", "seq-c", "seq-in", "seq-e"})
GC_RULES = frozenset({"gc1", "gc2"})


class Strategy(enum.Enum):
    LRP = "lrp"
    LRPGC = "lrpgc"


class Verdict(enum.Enum):
    WHNF = "whnf"
    STUCK = "stuck"
    DIVERGENT = "divergent"


class OracleOutcome(enum.Enum):
    WHNF = "whnf"
    STEP_LIMIT = "step-limit"
    STUCK = "stuck"


@dataclass(frozen=True)
class RedexInfo:
    rule: str
    location: object = BODY
    path: Tuple[str, ...] = ()
    chain: Tuple[str, ...] = ()

    @property
    def target(self):
        """The binder holding the value at the end of the variable chain."""
        return self.chain[-1] if self.chain else None


@dataclass
class OracleResult:
    outcome: OracleOutcome
    expr: Expr
    rln: int = 0
    rlnall: int = 0
    spmax: int = 0
    gc_steps: int = 0
    divergent: bool = False
    trace: Optional[Trace] = None

    @property
    def converged(self):
        return self.outcome is OracleOutcome.WHNF


def _split(e):
    if isinstance(e, LetRec):
        return dict(e.bindings), e.body, True
    return {}, e, False


def _join(env, body, top):
    if top or env:
        return LetRec(tuple(env.items()), body) if env else body
    return body


# --- Redex search --------------------------------------------------------------

def find_redex(e):
    """Locate the normal-order redex of a closed expression, or classify it."""
    env, root, top = _split(e)
    active = set()
    location, node, path, demand = BODY, root, [], "bare"
    while True:
        if isinstance(node, App):
            head = node.fun
            if isinstance(head, Lam):
                return RedexInfo("lbeta", location, tuple(path))
            if isinstance(head, LetRec):
                return RedexInfo("lapp", location, tuple(path))
            path.append("fun")
            node, demand = head, "app"
            continue
        if isinstance(node, Seq):
            first = node.first
            if is_value(first):
                return RedexInfo("seq-c", location, tuple(path))
            if isinstance(first, LetRec):
                return RedexInfo("lseq", location, tuple(path))
            path.append("first")
            node, demand = first, "seq"
            continue
        if isinstance(node, Case):
            scrutinee = node.scrutinee
            if isinstance(scrutinee, ConApp):
                return RedexInfo("case-c", location, tuple(path))
            if isinstance(scrutinee, LetRec):
                return RedexInfo("lcase", location, tuple(path))
            if isinstance(scrutinee, Lam):
                return Verdict.STUCK
            path.append("scrut")
            node, demand = scrutinee, "case"
            continue
        if isinstance(node, LetRec):
            # only reachable at the root of a location
            if location == BODY and top:
                return RedexInfo("llet-in", BODY)
            if location != BODY:
                return RedexInfo("llet-e", location)
            return Verdict.STUCK
        if is_value(node):
            # a value at the root of the body; bindings are entered only when not values
            return Verdict.WHNF
        if not isinstance(node, Var):
            raise OracleError(f"not an expression: {node!r}")

        chain, name, seen = [], node.name, set()
        while True:
            if name not in env:
                return Verdict.STUCK
            if name in seen or name in active:
                return Verdict.DIVERGENT
            seen.add(name)
            chain.append(name)
            rhs = env[name]
            if not isinstance(rhs, Var):
                break
            name = rhs.name
        suffix = "-in" if location == BODY else "-e"
        if isinstance(rhs, Lam):
            if demand == "case":
                return Verdict.STUCK
            return RedexInfo("cp" + suffix, location, tuple(path), tuple(chain))
        if isinstance(rhs, ConApp):
            if demand == "seq":
                return RedexInfo("seq" + suffix, location, tuple(path[:-1]), tuple(chain))
            if demand == "case":
                return RedexInfo("case" + suffix, location, tuple(path[:-1]), tuple(chain))
            if demand == "bare":
                return Verdict.WHNF
            return Verdict.STUCK
        active |= seen
        location, node, path, demand = ("bind", name), rhs, [], "bare"


# --- Rule application --------------------------------------------------------

def _get(node, path):
    for step in path:
        if step == "fun":
            node = node.fun
        elif step == "first":
            node = node.first
        else:
            node = node.scrutinee
    return node


def _replace(node, path, new, i=0):
    if i == len(path):
        return new
    step = path[i]
    if step == "fun":
        return App(_replace(node.fun, path, new, i + 1), node.arg)
    if step == "first":
        return Seq(_replace(node.first, path, new, i + 1), node.second)
    return Case(node.tycon, _replace(node.scrutinee, path, new, i + 1), node.alts)


class _Supply:
    """Name supply created on first use."""

    def __init__(self, expr):
        self.expr = expr
        self._supply = None

    def get(self):
        if self._supply is None:
            self._supply = NameSupply(all_names(self.expr))
        return self._supply

    def fresh(self, hint):
        return self.get().fresh(hint)


def _rebind(letrec, avoid, supply):
    """Bindings and body of ``letrec`` with binders renamed away from ``avoid``."""
    clash = [b for b in letrec.binders if b in avoid]
    if not clash:
        return list(letrec.bindings), letrec.body
    s = supply.get()
    mapping = {b: s.fresh(b) for b in clash}
    bindings = [(mapping.get(n, n), rename(rhs, mapping, s)) for n, rhs in letrec.bindings]
    return bindings, rename(letrec.body, mapping, s)


def _expect(condition, info):
    if not condition:
        raise OracleError(f"rule {info.rule} does not match at {info.location} {info.path}")


def _local(node, info, supply):
    """Rules that rewrite the focused subexpression only."""
    rule = info.rule
    if rule == "lbeta":
        _expect(isinstance(node, App) and isinstance(node.fun, Lam), info)
        lam, arg = node.fun, node.arg
        param, body = lam.param, lam.body
        if param in arg.fv:
            s = supply.get()
            fresh = s.fresh(param)
            body, param = rename(body, {param: fresh}, s), fresh
        return LetRec(((param, arg),), body)
    if rule == "lapp":
        _expect(isinstance(node, App) and isinstance(node.fun, LetRec), info)
        bindings, body = _rebind(node.fun, node.arg.fv, supply)
        return LetRec(tuple(bindings), App(body, node.arg))
    if rule == "lseq":
        _expect(isinstance(node, Seq) and isinstance(node.first, LetRec), info)
        bindings, body = _rebind(node.first, node.second.fv, supply)
        return LetRec(tuple(bindings), Seq(body, node.second))
    if rule == "lcase":
        _expect(isinstance(node, Case) and isinstance(node.scrutinee, LetRec), info)
        bindings, body = _rebind(node.scrutinee, alts_free_vars(node.alts), supply)
        return LetRec(tuple(bindings), Case(node.tycon, body, node.alts))
    if rule == "seq-c":
        _expect(isinstance(node, Seq) and is_value(node.first), info)
        return node.second
    if rule == "case-c":
        _expect(isinstance(node, Case) and isinstance(node.scrutinee, ConApp), info)
        con = node.scrutinee
        alt = node.alt_for(con.con)
        _expect(alt is not None and len(alt.binders) == len(con.args), info)
        if not con.args:
            return alt.rhs
        avoid = set().union(*(a.fv for a in con.args))
        binders, rhs = alt.binders, alt.rhs
        clash = [b for b in binders if b in avoid]
        if clash:
            s = supply.get()
            mapping = {b: s.fresh(b) for b in clash}
            rhs = rename(rhs, mapping, s)
            binders = tuple(mapping.get(b, b) for b in binders)
        return LetRec(tuple(zip(binders, con.args)), rhs)
    raise OracleError(f"unknown rule '{rule}'")


def apply_rule(e, info):
    """Rewrite ``e`` by the rule ``info`` found by ``find_redex``."""
    env, body, top = _split(e)
    supply = _Supply(e)
    rule = info.rule

    if rule == "llet-in":
        _expect(top and isinstance(body, LetRec), info)
        bindings, inner = _rebind(body, set(env), supply)
        env.update(bindings)
        return LetRec(tuple(env.items()), inner)
    if rule == "llet-e":
        name = info.location[1]
        _expect(top and isinstance(env.get(name), LetRec), info)
        nested = env[name]
        bindings, inner = _rebind(nested, set(env), supply)
        env[name] = inner
        env.update(bindings)
        return LetRec(tuple(env.items()), body)

    site = body if info.location == BODY else env[info.location[1]]
    focus = _get(site, info.path)

    if rule in ("cp-in", "cp-e"):
        _expect(isinstance(focus, Var) and focus.name == info.chain[0], info)
        new = env[info.target]
        _expect(isinstance(new, Lam), info)
    elif rule in ("seq-in", "seq-e"):
        _expect(isinstance(focus, Seq) and isinstance(focus.first, Var)
                and focus.first.name == info.chain[0], info)
        _expect(isinstance(env[info.target], ConApp), info)
        new = focus.second
    elif rule in ("case-in", "case-e"):
        _expect(isinstance(focus, Case) and isinstance(focus.scrutinee, Var)
                and focus.scrutinee.name == info.chain[0], info)
        value = env[info.target]
        _expect(isinstance(value, ConApp), info)
        alt = focus.alt_for(value.con)
        _expect(alt is not None and len(alt.binders) == len(value.args), info)
        if not value.args:
            new = alt.rhs
        else:
            fresh = [supply.fresh("y") for _ in value.args]
            env[info.target] = ConApp(value.con, tuple(Var(y) for y in fresh))
            env.update(zip(fresh, value.args))
            new = LetRec(tuple((z, Var(y)) for z, y in zip(alt.binders, fresh)), alt.rhs)
    else:
        new = _local(focus, info, supply)

    site = _replace(site, info.path, new)
    if info.location == BODY:
        body = site
    else:
        env[info.location[1]] = site
    return _join(env, body, top)


# --- Garbage collection --------------------------------------------------------

def gc_top(e):
    """Remove the maximal dead binding set of the top letrec; ``None`` when nothing is dead."""
    if not isinstance(e, LetRec):
        return None
    live = live_binders(e.bindings, e.body.fv)
    if len(live) == len(e.bindings):
        return None
    if not live:
        return e.body
    return LetRec(tuple((n, rhs) for n, rhs in e.bindings if n in live), e.body)


# --- Evaluation ----------------------------------------------------------------

def evaluate(e, strategy=Strategy.LRPGC, max_steps=10 ** 5, record_trace=False):
    result = OracleResult(OracleOutcome.STEP_LIMIT, e, spmax=e.size)
    trace = result.trace = Trace() if record_trace else None
    current, steps = e, 0
    while steps < max_steps:
        if strategy is Strategy.LRPGC:
            collected = gc_top(current)
            if collected is not None:
                partial = isinstance(collected, LetRec) and collected.body is current.body
                rule = "gc1" if partial else "gc2"
                current = collected
                steps += 1
                result.gc_steps += 1
                result.spmax = max(result.spmax, current.size)
                if trace is not None:
                    trace.add(rule, current.size)
                continue
        info = find_redex(current)
        if info is Verdict.WHNF:
            result.outcome = OracleOutcome.WHNF
            break
        if info is Verdict.STUCK:
            result.outcome = OracleOutcome.STUCK
            break
        if info is Verdict.DIVERGENT:
            # a demanded binding depends on itself: no step can ever make progress
            result.divergent = True
            break
        current = apply_rule(current, info)
        steps += 1
        result.rlnall += 1
        if info.rule in ESSENTIAL_RULES:
            result.rln += 1
        result.spmax = max(result.spmax, current.size)
        if trace is not None:
            trace.add(info.rule, current.size)
    result.expr = current
    logger.info("oracle run finished", extra={
        "strategy": strategy.value, "outcome": result.outcome.value,
        "rln": result.rln, "rlnall": result.rlnall, "spmax": result.spmax,
    })
    return result


# --- Empty-context comparison --------------------------------------------------

def _order(a, b):
    return "<" if a < b else (">" if a > b else "=")


@dataclass
class ComparisonReport:
    left: OracleResult
    right: OracleResult
    ordering: dict = field(default_factory=dict)

    @property
    def inconclusive(self):
        return not (self.left.converged and self.right.converged)

    @property
    def all_equal(self):
        return all(v == "=" for v in self.ordering.values())

    def rows(self):
        return [(m, getattr(self.left, m), self.ordering[m], getattr(self.right, m))
                for m in ("rln", "rlnall", "spmax")]


def compare_empty_context(left, right, max_steps=10 ** 5, strategy=Strategy.LRPGC):
    a = evaluate(left, strategy, max_steps)
    b = evaluate(right, strategy, max_steps)
    ordering = {m: _order(getattr(a, m), getattr(b, m)) for m in ("rln", "rlnall", "spmax")}
    return ComparisonReport(a, b, ordering)
