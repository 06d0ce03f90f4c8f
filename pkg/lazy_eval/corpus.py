# lazy_eval/corpus.py
"""
Seeded generator of closed, well-typed expressions and the self-test that
cross-checks compiler, machine and calculus on them.

Types are ``"Bool"``, ``"Nat"``, ``"List"`` (lists of Bool) and first-order
function types ``("->", argument, result)``.
"""

import logging
import random
from itertools import islice
from dataclasses import dataclass, field
from typing import Dict, List

from .calculus import OracleOutcome, Strategy, evaluate
from .compiler import compile_expr, remove_indirections, translate_psi
from .exceptions import BlackholeError, LrpError
from .machine import Outcome, RunConfig, run
from .syntax import (
    Alt, App, Case, ConApp, Lam, LetRec, Seq, Var, is_machine_expr, is_value, pretty, subexpressions,
)

logger = logging.getLogger(__name__)

BASE_TYPES = ("Bool", "Nat", "List")


class _Generator:
    def __init__(self, seed, max_depth):
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.counter = 0

    def name(self, hint):
        self.counter += 1
        return f"{hint}{self.counter}"

    def type_(self, nesting=2):
        if nesting == 0 or self.rng.random() < 0.7:
            return self.rng.choice(BASE_TYPES)
        return ("->", self.rng.choice(BASE_TYPES), self.type_(nesting - 1))

    def leaf(self, ty, env):
        rng = self.rng
        names = [n for n, t in env if t == ty]
        if names and rng.random() < 0.5:
            return Var(rng.choice(names))
        if ty == "Bool":
            return ConApp(rng.choice(("True", "False")))
        if ty == "Nat":
            return ConApp("Zero")
        if ty == "List":
            return ConApp("Nil")
        x = self.name("x")
        return Lam(x, self.leaf(ty[2], env + [(x, ty[1])]))

    def expr(self, ty, env, depth):
        rng = self.rng
        if depth <= 0 or rng.random() < 0.2:
            return self.leaf(ty, env)
        kind = rng.choice(("con", "app", "app", "seq", "letrec", "letrec", "case", "case", "var"))
        # variables are only drawn at their own type
        if kind == "var":
            names = [n for n, t in env if t == ty]
            if names:
                return Var(rng.choice(names))
            kind = "con"
        if kind == "con":
            if isinstance(ty, tuple):
                x = self.name("x")
                return Lam(x, self.expr(ty[2], env + [(x, ty[1])], depth - 1))
            if ty == "Nat" and rng.random() < 0.6:
                return ConApp("Succ", (self.expr("Nat", env, depth - 1),))
            if ty == "List" and rng.random() < 0.7:
                return ConApp("Cons", (self.expr("Bool", env, depth - 1), self.expr("List", env, depth - 1)))
            return self.leaf(ty, [])
        if kind == "app":
            # the function is generated at the arrow type, so the application stays well typed
            arg_ty = rng.choice(BASE_TYPES)
            return App(self.expr(("->", arg_ty, ty), env, depth - 1), self.expr(arg_ty, env, depth - 1))
        # any type may be forced
        if kind == "seq":
            return Seq(self.expr(self.type_(), env, depth - 1), self.expr(ty, env, depth - 1))
        if kind == "letrec":
            names = [(self.name("v"), self.type_()) for _ in range(rng.randint(1, 2))]
            inner = env + names
            # recursive: every binding sees all binders
            bindings = tuple((n, self.expr(t, inner, depth - 1)) for n, t in names)
            return LetRec(bindings, self.expr(ty, inner, depth - 1))
        # case alternatives are always exhaustive
        scrutinee_ty = rng.choice(BASE_TYPES)
        scrutinee = self.expr(scrutinee_ty, env, depth - 1)
        if scrutinee_ty == "Bool":
            alts = (Alt("True", (), self.expr(ty, env, depth - 1)),
                    Alt("False", (), self.expr(ty, env, depth - 1)))
        elif scrutinee_ty == "Nat":
            m = self.name("m")
            alts = (Alt("Zero", (), self.expr(ty, env, depth - 1)),
                    Alt("Succ", (m,), self.expr(ty, env + [(m, "Nat")], depth - 1)))
        else:
            h, t = self.name("h"), self.name("t")
            alts = (Alt("Nil", (), self.expr(ty, env, depth - 1)),
                    Alt("Cons", (h, t), self.expr(ty, env + [(h, "Bool"), (t, "List")], depth - 1)))
        return Case(scrutinee_ty, scrutinee, alts)


def expressions(seed=0, max_depth=8):
    """Endless stream of closed well-typed expressions, fixed by ``seed``."""
    gen = _Generator(seed, max_depth)
    while True:
        ty = gen.rng.choice(BASE_TYPES + (("->", "Bool", "Bool"),))
        yield gen.expr(ty, [], gen.rng.randint(1, max_depth))


def generate(seed=0, count=100, max_depth=8):
    """``count`` closed well-typed expressions; the same seed gives the same list."""
    return list(islice(expressions(seed, max_depth), count))


def shrink(expr, still_fails):
    """Smallest closed subterm of ``expr`` (by repeated descent) that still fails."""
    current = expr
    while True:
        candidates = sorted(
            (s for s in subexpressions(current) if s is not current and not s.fv),
            key=lambda s: s.size,
        )
        for candidate in candidates:
            if still_fails(candidate):
                current = candidate
                break
        else:
            return current


def whnf_head(result):
    """Constructor name of a converged oracle result, ``"\\"`` for an abstraction."""
    if not result.converged:
        return None
    e = result.expr
    env = dict(e.bindings) if isinstance(e, LetRec) else {}
    body = e.body if isinstance(e, LetRec) else e
    seen = set()
    while isinstance(body, Var) and body.name in env and body.name not in seen:
        seen.add(body.name)
        body = env[body.name]
    if isinstance(body, ConApp):
        return body.con
    return "\\" if is_value(body) else None


# --- Self-test -----------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failures: List[str] = field(default_factory=list)

    def record(self, ok, expr=None):
        if ok is None:
            self.skipped += 1
        elif ok:
            self.passed += 1
        else:
            self.failed += 1
            if expr is not None and len(self.failures) < 5:
                self.failures.append(pretty(expr))


@dataclass
class SelftestReport:
    seed: int
    count: int
    checks: Dict[str, CheckResult] = field(default_factory=dict)
    counterexamples: List[dict] = field(default_factory=list)

    @property
    def ok(self):
        return all(c.failed == 0 for c in self.checks.values())

    def rows(self):
        return [(c.name, c.passed, c.failed, c.skipped) for c in self.checks.values()]


CHECKS = ("psi-size", "time-adequacy", "space-adequacy", "convergence", "indirections")


def _machine(expr, max_steps):
    try:
        result = run(expr, RunConfig(max_steps=max_steps))
    except BlackholeError:
        return None
    return result if result.outcome is Outcome.FINAL else None


def _oracle(expr, strategy, max_steps):
    """Evaluate, retrying once with a larger budget when the first budget ran out."""
    result = evaluate(expr, strategy, max_steps)
    if result.outcome is OracleOutcome.STEP_LIMIT and not result.divergent:
        result = evaluate(expr, strategy, max_steps * 10)
    return result


def _undecided(*results):
    return any(r.outcome is OracleOutcome.STEP_LIMIT and not r.divergent for r in results)


def space_measures(expr, max_steps):
    """``(mspmax, spmax)`` of a closed machine expression, ``None`` when it does not converge."""
    if expr.fv or not is_machine_expr(expr):
        return None
    oracle = evaluate(expr, Strategy.LRPGC, max_steps)
    if not oracle.converged:
        return None
    machine = _machine(expr, max_steps * 100)
    if machine is None:
        return None
    return machine.measures.mspmax, oracle.spmax


def _space_mismatch(expr, max_steps):
    measures = space_measures(expr, max_steps)
    return measures is not None and measures[0] != measures[1]


def _check(expr, report, max_steps):
    checks = report.checks
    psi = translate_psi(expr)
    checks["psi-size"].record(psi.size == expr.size and is_machine_expr(psi), expr)

    lrp = _oracle(expr, Strategy.LRP, max_steps)
    lrpgc = _oracle(expr, Strategy.LRPGC, max_steps)
    if _undecided(lrp, lrpgc):
        checks["convergence"].record(None)
    else:
        stuck = OracleOutcome.STUCK in (lrp.outcome, lrpgc.outcome)
        same = lrp.converged == lrpgc.converged and (not lrp.converged or lrp.rln == lrpgc.rln)
        checks["convergence"].record(same and not stuck, expr)

    after = _oracle(remove_indirections(expr), Strategy.LRPGC, max_steps)
    if _undecided(lrpgc, after):
        checks["indirections"].record(None)
    else:
        checks["indirections"].record(
            after.converged == lrpgc.converged and whnf_head(after) == whnf_head(lrpgc), expr)

    try:
        compiled = compile_expr(expr)
    except LrpError:
        checks["time-adequacy"].record(False, expr)
        checks["space-adequacy"].record(None)
        return
    if lrp.converged:
        machine = _machine(compiled, max_steps * 100)
        checks["time-adequacy"].record(machine is not None and machine.measures.mln == lrp.rln, expr)
    else:
        checks["time-adequacy"].record(None)

    measures = space_measures(compiled, max_steps)
    if measures is None:
        checks["space-adequacy"].record(None)
    elif measures[0] == measures[1]:
        checks["space-adequacy"].record(True)
    else:
        checks["space-adequacy"].record(False, compiled)
        small = shrink(compiled, lambda e: _space_mismatch(e, max_steps))
        mspmax, spmax = space_measures(small, max_steps) or measures
        report.counterexamples.append({"expr": pretty(small), "mspmax": mspmax, "spmax": spmax})
        logger.warning("space adequacy counterexample", extra={
            "expr": pretty(small), "mspmax": mspmax, "spmax": spmax, "seed": report.seed,
        })


def _decided(check):
    return check.passed + check.failed


def run_selftest(seed=0, count=500, max_steps=10 ** 4, max_depth=8, min_checked=0):
    """
    Cross-check at least ``count`` generated expressions.

    With ``min_checked`` the corpus keeps growing until both adequacy checks
    have decided that many expressions, up to ``max(count, 4 * min_checked)``.
    """
    report = SelftestReport(seed, 0, {name: CheckResult(name) for name in CHECKS})
    checks = report.checks
    limit = max(count, 4 * min_checked)
    for expr in expressions(seed, max_depth):
        if report.count >= limit:
            break
        if report.count >= count and min(
                _decided(checks["time-adequacy"]), _decided(checks["space-adequacy"])) >= min_checked:
            break
        _check(expr, report, max_steps)
        report.count += 1
    logger.info("selftest finished", extra={
        "seed": seed, "count": report.count,
        "failed": {c.name: c.failed for c in checks.values()},
    })
    return report
