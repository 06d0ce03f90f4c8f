# lazy_eval/compiler.py
"""
The compile pipeline: wrap a program into one closed expression, translate
it into a machine expression, then remove indirection chains and garbage.
"""

import logging

import networkx as nx

from .exceptions import CompileError
from .prelude import load_prelude
from .syntax import (
    Alt, App, Case, ConApp, Lam, LetRec, NameSupply, Seq, Var, all_names, freshen, rename,
)

logger = logging.getLogger(__name__)


def wrap(program):
    """Bind every definition in one letrec around ``main`` and check closedness."""
    if program.main is None:
        raise CompileError("program has no main expression")
    expr = LetRec(program.defs, program.main) if program.defs else program.main
    if expr.fv:
        raise CompileError("unbound variable", expr.fv)
    return expr


def prepare(program, prelude=None):
    """Source-level closed expression: wrapped, garbage-free, binders distinct."""
    if prelude is None:
        prelude = load_prelude()
    return freshen(static_gc(wrap(program.with_prelude(prelude))))


# --- psi translation -------------------------------------------------------

def translate_psi(expr, supply=None):
    if supply is None:
        supply = NameSupply(all_names(expr))
    return _psi(expr, supply)


def _psi(e, supply):
    if isinstance(e, Var):
        return e
    if isinstance(e, App):
        # every argument gets its own binding, variables included
        y = supply.fresh("y")
        return LetRec(((y, _psi(e.arg, supply)),), App(_psi(e.fun, supply), Var(y)))
    if isinstance(e, Lam):
        return Lam(e.param, _psi(e.body, supply))
    if isinstance(e, ConApp):
        if not e.args:
            return e
        # one binder per argument position
        names = [supply.fresh("y") for _ in e.args]
        return LetRec(
            tuple((y, _psi(a, supply)) for y, a in zip(names, e.args)),
            ConApp(e.con, tuple(Var(y) for y in names)),
        )
    if isinstance(e, Seq):
        # only the second operand moves into a binding
        y = supply.fresh("y")
        return LetRec(((y, _psi(e.second, supply)),), Seq(_psi(e.first, supply), Var(y)))
    if isinstance(e, LetRec):
        return LetRec(tuple((n, _psi(rhs, supply)) for n, rhs in e.bindings), _psi(e.body, supply))
    if isinstance(e, Case):
        return Case(e.tycon, _psi(e.scrutinee, supply),
                    tuple(Alt(a.con, a.binders, _psi(a.rhs, supply)) for a in e.alts))
    raise TypeError(f"not an expression: {e!r}")


# --- indirection chains ------------------------------------------------------

def remove_indirections(expr, supply=None):
    """Replace every variable-to-variable binding by its chain's terminal."""
    if supply is None:
        supply = NameSupply(all_names(expr))
    return _map_letrecs(expr, lambda e: _collapse_chains(e, supply))


def _collapse_chains(e, supply):
    links = {n: rhs.name for n, rhs in e.bindings if isinstance(rhs, Var)}
    if not links:
        return e
    bindings = e.bindings
    selfs = {n for n, target in links.items() if n == target}
    if selfs:
        # a self-binding nobody refers to is dead
        used = set(e.body.fv)
        for n, rhs in bindings:
            if n not in selfs:
                used.update(rhs.fv)
        dead = selfs - used
        if dead:
            bindings = [(n, rhs) for n, rhs in bindings if n not in dead]
            for n in dead:
                del links[n]
            if not links:
                return _rebuild(e, bindings, e.body)

    mapping, pending = _follow_links(links)
    loops = set()
    if pending:
        order = {n: i for i, (n, _) in enumerate(bindings)}
        graph = nx.DiGraph((x, links[x]) for x in pending)
        for component in nx.strongly_connected_components(graph):
            if len(component) == 1:
                (x,) = component
                if links[x] == x:
                    loops.add(x)
                continue
            representative = min(component, key=order.__getitem__)
            loops.add(representative)
            for x in component:
                if x != representative:
                    mapping[x] = representative
        # what is left leads into a cycle
        for start in pending:
            if start in mapping or start in loops:
                continue
            path, x = [], start
            while x not in mapping and x not in loops:
                path.append(x)
                x = links[x]
            terminal = mapping.get(x, x)
            for member in path:
                mapping[member] = terminal

    kept = [(n, Var(n) if n in loops else _rename_free(rhs, mapping, supply))
            for n, rhs in bindings if n not in mapping]
    return _rebuild(e, kept, _rename_free(e.body, mapping, supply))


def _follow_links(links):
    """Terminal of every acyclic link chain, plus the links that run into a cycle."""
    mapping, pending = {}, set()
    for start in links:
        if start in mapping or start in pending:
            continue
        path, on_path, x = [], set(), start
        while x in links and x not in mapping and x not in pending and x not in on_path:
            on_path.add(x)
            path.append(x)
            x = links[x]
        if x in links and x not in mapping:
            pending.update(path)
            continue
        terminal = mapping.get(x, x)
        for member in path:
            mapping[member] = terminal
    return mapping, pending


def _rename_free(expr, mapping, supply):
    hits = {v: mapping[v] for v in expr.fv if v in mapping}
    return rename(expr, hits, supply) if hits else expr


# --- static garbage collection -----------------------------------------------

def live_binders(bindings, roots):
    """Binders reachable from ``roots`` through the right-hand sides of ``bindings``."""
    env = dict(bindings)
    live, todo = set(), [n for n in roots if n in env]
    while todo:
        name = todo.pop()
        if name in live:
            continue
        live.add(name)
        todo.extend(n for n in env[name].fv if n in env and n not in live)
    return live


def static_gc(expr):
    """Drop unreachable bindings from every letrec; a fully dead letrec becomes its body."""
    return _map_letrecs(expr, _sweep)


def _sweep(e):
    live = live_binders(e.bindings, e.body.fv)
    return _rebuild(e, [(n, rhs) for n, rhs in e.bindings if n in live], e.body)


# --- shared traversal --------------------------------------------------------

def _rebuild(e, bindings, body):
    if not bindings:
        return body
    if body is e.body and len(bindings) == len(e.bindings) and all(
            rhs is old for (_, rhs), (_, old) in zip(bindings, e.bindings)):
        return e
    return LetRec(tuple(bindings), body)


def _map_letrecs(e, fn):
    """Rebuild ``e`` bottom-up, passing every letrec (children done) through ``fn``."""
    if isinstance(e, Var):
        return e
    if isinstance(e, App):
        fun, arg = _map_letrecs(e.fun, fn), _map_letrecs(e.arg, fn)
        return e if fun is e.fun and arg is e.arg else App(fun, arg)
    if isinstance(e, Seq):
        first, second = _map_letrecs(e.first, fn), _map_letrecs(e.second, fn)
        return e if first is e.first and second is e.second else Seq(first, second)
    if isinstance(e, Lam):
        body = _map_letrecs(e.body, fn)
        return e if body is e.body else Lam(e.param, body)
    if isinstance(e, ConApp):
        args = tuple(_map_letrecs(a, fn) for a in e.args)
        return e if all(a is b for a, b in zip(args, e.args)) else ConApp(e.con, args)
    if isinstance(e, Case):
        scrutinee = _map_letrecs(e.scrutinee, fn)
        alts = tuple(a if (r := _map_letrecs(a.rhs, fn)) is a.rhs else Alt(a.con, a.binders, r)
                     for a in e.alts)
        if scrutinee is e.scrutinee and all(a is b for a, b in zip(alts, e.alts)):
            return e
        return Case(e.tycon, scrutinee, alts)
    if isinstance(e, LetRec):
        bindings = [(n, _map_letrecs(rhs, fn)) for n, rhs in e.bindings]
        body = _map_letrecs(e.body, fn)
        inner = _rebuild(e, bindings, body)
        return fn(inner) if isinstance(inner, LetRec) else inner
    raise TypeError(f"not an expression: {e!r}")


# --- pipeline ----------------------------------------------------------------

def compile_expr(expr):
    """psi, then indirection removal, then static GC, on a closed expression."""
    if expr.fv:
        raise CompileError("unbound variable", expr.fv)
    supply = NameSupply(all_names(expr))
    psi = _psi(expr, supply)
    direct = remove_indirections(psi, supply)
    result = static_gc(direct)
    logger.debug("compiled expression", extra={
        "source_size": expr.size, "psi_size": psi.size, "result_size": result.size,
    })
    return result


def compile_pipeline(program, prelude=None):
    return compile_expr(prepare(program, prelude))
