# lazy_eval/syntax.py
"""
Abstract syntax of the untyped lazy core language.

Every node is immutable and caches its ``size`` and its free variables
(``fv``) at construction, so the machine and the calculus can ask for both in
constant time.
"""

import re
from dataclasses import dataclass, field
from typing import Tuple

IDENTIFIER = re.compile(r"[a-z_][A-Za-z0-9_']*\Z")
KEYWORDS = frozenset({"letrec", "let", "in", "case", "of", "seq", "data", "main"})


class Expr:
    __slots__ = ()


def _cache(node, size, fv):
    object.__setattr__(node, "size", size)
    object.__setattr__(node, "fv", fv)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        _cache(self, 0, frozenset((self.name,)))


@dataclass(frozen=True)
class Lam(Expr):
    param: str
    body: Expr
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        _cache(self, 1 + self.body.size, self.body.fv - {self.param})


@dataclass(frozen=True)
class App(Expr):
    fun: Expr
    arg: Expr
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        _cache(self, 1 + self.fun.size + self.arg.size, self.fun.fv | self.arg.fv)


@dataclass(frozen=True)
class Seq(Expr):
    first: Expr
    second: Expr
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        _cache(self, 1 + self.first.size + self.second.size, self.first.fv | self.second.fv)


@dataclass(frozen=True)
class LetRec(Expr):
    bindings: Tuple[Tuple[str, Expr], ...]
    body: Expr
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        bindings = tuple((name, rhs) for name, rhs in self.bindings)
        object.__setattr__(self, "bindings", bindings)
        if not bindings:
            raise ValueError("letrec needs at least one binding")
        names = [name for name, _ in bindings]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate letrec binder in {names}")
        fv = set(self.body.fv)
        size = self.body.size
        for _, rhs in bindings:
            fv.update(rhs.fv)
            size += rhs.size
        _cache(self, size, frozenset(fv.difference(names)))

    @property
    def binders(self):
        return tuple(name for name, _ in self.bindings)


@dataclass(frozen=True)
class ConApp(Expr):
    con: str
    args: Tuple[Expr, ...] = ()
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        args = tuple(self.args)
        object.__setattr__(self, "args", args)
        fv = frozenset().union(*(a.fv for a in args)) if args else frozenset()
        _cache(self, 1 + sum(a.size for a in args), fv)


@dataclass(frozen=True)
class Alt:
    con: str
    binders: Tuple[str, ...]
    rhs: Expr
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        binders = tuple(self.binders)
        object.__setattr__(self, "binders", binders)
        if len(set(binders)) != len(binders):
            raise ValueError(f"duplicate pattern variable in {self.con} {binders}")
        _cache(self, 1 + self.rhs.size, self.rhs.fv.difference(binders))


@dataclass(frozen=True)
class Case(Expr):
    tycon: str
    scrutinee: Expr
    alts: Tuple[Alt, ...]
    size: int = field(init=False, repr=False, compare=False, default=0)
    fv: frozenset = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        alts = tuple(self.alts)
        object.__setattr__(self, "alts", alts)
        fv = set(self.scrutinee.fv)
        for alt in alts:
            fv.update(alt.fv)
        _cache(self, 1 + self.scrutinee.size + sum(a.size for a in alts), frozenset(fv))

    def alt_for(self, con):
        for alt in self.alts:
            if alt.con == con:
                return alt
        return None


def alts_free_vars(alts):
    fv = set()
    for alt in alts:
        fv.update(alt.fv)
    return fv


# --- Data declarations -------------------------------------------------------

@dataclass(frozen=True)
class DataDecl:
    tycon: str
    constructors: Tuple[Tuple[str, int], ...]


class Signature:
    """Declared type constructors and their data constructors with arities."""

    def __init__(self, decls=()):
        self._decls = {}
        self._cons = {}
        for decl in decls:
            self.declare(decl)

    def declare(self, decl):
        if decl.tycon in self._decls:
            raise ValueError(f"type constructor '{decl.tycon}' declared twice")
        for con, arity in decl.constructors:
            if con in self._cons:
                raise ValueError(f"constructor '{con}' declared twice")
            if arity < 0:
                raise ValueError(f"constructor '{con}' has negative arity")
        self._decls[decl.tycon] = decl
        for con, arity in decl.constructors:
            self._cons[con] = (decl.tycon, arity)

    def extended(self, decls):
        sig = Signature(self._decls.values())
        for decl in decls:
            sig.declare(decl)
        return sig

    def has_constructor(self, con):
        return con in self._cons

    def arity(self, con):
        return self._cons[con][1]

    def tycon_of(self, con):
        return self._cons[con][0]

    def constructors(self, tycon):
        return tuple(con for con, _ in self._decls[tycon].constructors)

    def decls(self):
        return tuple(self._decls.values())


BUILTIN_DECLS = (
    DataDecl("Bool", (("True", 0), ("False", 0))),
    DataDecl("List", (("Nil", 0), ("Cons", 2))),
    DataDecl("Nat", (("Zero", 0), ("Succ", 1))),
) + tuple(DataDecl(f"T{n}", ((f"T{n}", n),)) for n in range(2, 11))

BUILTINS = Signature(BUILTIN_DECLS)


# --- Measures and predicates -------------------------------------------------

def size(expr):
    return expr.size


def free_vars(expr):
    return set(expr.fv)


def subexpressions(expr):
    """Pre-order walk over every expression node (alternatives are skipped)."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Lam):
            stack.append(node.body)
        elif isinstance(node, App):
            stack.extend((node.arg, node.fun))
        elif isinstance(node, Seq):
            stack.extend((node.second, node.first))
        elif isinstance(node, LetRec):
            stack.append(node.body)
            stack.extend(rhs for _, rhs in reversed(node.bindings))
        elif isinstance(node, ConApp):
            stack.extend(reversed(node.args))
        elif isinstance(node, Case):
            stack.extend(alt.rhs for alt in reversed(node.alts))
            stack.append(node.scrutinee)


def bound_vars(expr):
    bound = set()
    for node in subexpressions(expr):
        if isinstance(node, Lam):
            bound.add(node.param)
        elif isinstance(node, LetRec):
            bound.update(node.binders)
        elif isinstance(node, Case):
            for alt in node.alts:
                bound.update(alt.binders)
    return bound


def all_names(expr):
    return set(expr.fv) | bound_vars(expr)


def is_value(expr):
    return isinstance(expr, (Lam, ConApp))


def is_whnf(expr):
    if is_value(expr):
        return True
    if not isinstance(expr, LetRec):
        return False
    if is_value(expr.body):
        return True
    if not isinstance(expr.body, Var):
        return False
    env = dict(expr.bindings)
    name, seen = expr.body.name, set()
    while name in env and name not in seen:
        seen.add(name)
        rhs = env[name]
        if isinstance(rhs, ConApp):
            return True
        if not isinstance(rhs, Var):
            return False
        name = rhs.name
    return False


def is_machine_expr(expr):
    for node in subexpressions(expr):
        if isinstance(node, App) and not isinstance(node.arg, Var):
            return False
        if isinstance(node, Seq) and not isinstance(node.second, Var):
            return False
        if isinstance(node, ConApp) and not all(isinstance(a, Var) for a in node.args):
            return False
    return True


# --- Names -------------------------------------------------------------------

class NameSupply:
    """Deterministic source of names that were never handed out or reserved."""

    def __init__(self, used=()):
        self._used = set(used)
        self._next = {}

    def __contains__(self, name):
        return name in self._used

    def reserve(self, names):
        self._used.update(names)

    def fresh(self, hint):
        if hint not in self._used:
            self._used.add(hint)
            return hint
        base = hint.rstrip("0123456789") or hint
        n = self._next.get(base, 1)
        while f"{base}{n}" in self._used:
            n += 1
        name = f"{base}{n}"
        self._next[base] = n + 1
        self._used.add(name)
        return name


def fresh_name(hint, used):
    return NameSupply(used).fresh(hint)


def _enter(binders, mapping, scope_fv, supply):
    inner = {k: v for k, v in mapping.items() if k not in binders}
    targets = {v for k, v in inner.items() if k in scope_fv}
    renamed = []
    for b in binders:
        if b in targets:
            nb = supply.fresh(b)
            inner[b] = nb
            renamed.append(nb)
        else:
            renamed.append(b)
    return inner, tuple(renamed)


def _rename(e, m, supply):
    if e.fv.isdisjoint(m):
        return e
    if isinstance(e, Var):
        return Var(m[e.name])
    if isinstance(e, App):
        return App(_rename(e.fun, m, supply), _rename(e.arg, m, supply))
    if isinstance(e, Seq):
        return Seq(_rename(e.first, m, supply), _rename(e.second, m, supply))
    if isinstance(e, ConApp):
        return ConApp(e.con, tuple(_rename(a, m, supply) for a in e.args))
    if isinstance(e, Lam):
        inner, (param,) = _enter((e.param,), m, e.body.fv, supply)
        return Lam(param, _rename(e.body, inner, supply) if inner else e.body)
    if isinstance(e, LetRec):
        scope = set(e.body.fv)
        for _, rhs in e.bindings:
            scope.update(rhs.fv)
        inner, names = _enter(e.binders, m, scope, supply)
        return LetRec(
            tuple((n, _rename(rhs, inner, supply)) for n, (_, rhs) in zip(names, e.bindings)),
            _rename(e.body, inner, supply),
        )
    if isinstance(e, Case):
        return Case(e.tycon, _rename(e.scrutinee, m, supply),
                    tuple(rename_alt(alt, m, supply) for alt in e.alts))
    raise TypeError(f"not an expression: {e!r}")


def rename_alt(alt, mapping, supply):
    if alt.fv.isdisjoint(mapping):
        return alt
    inner, binders = _enter(alt.binders, mapping, alt.rhs.fv, supply)
    return Alt(alt.con, binders, _rename(alt.rhs, inner, supply))


def rename(expr, mapping, supply=None):
    """Capture-avoiding simultaneous replacement of variables by variables."""
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping or expr.fv.isdisjoint(mapping):
        return expr
    if supply is None:
        supply = NameSupply(all_names(expr) | set(mapping) | set(mapping.values()))
    return _rename(expr, mapping, supply)


def freshen(expr, supply=None):
    """Alpha-rename so that all binders are pairwise distinct and distinct from free names."""
    if supply is None:
        supply = NameSupply()
    supply.reserve(expr.fv)
    return _freshen(expr, {}, supply)


def _freshen(e, env, supply):
    if isinstance(e, Var):
        return Var(env.get(e.name, e.name))
    if isinstance(e, App):
        return App(_freshen(e.fun, env, supply), _freshen(e.arg, env, supply))
    if isinstance(e, Seq):
        return Seq(_freshen(e.first, env, supply), _freshen(e.second, env, supply))
    if isinstance(e, ConApp):
        return ConApp(e.con, tuple(_freshen(a, env, supply) for a in e.args))
    if isinstance(e, Lam):
        param = supply.fresh(e.param)
        return Lam(param, _freshen(e.body, {**env, e.param: param}, supply))
    if isinstance(e, LetRec):
        names = [supply.fresh(b) for b in e.binders]
        inner = {**env, **dict(zip(e.binders, names))}
        return LetRec(
            tuple((n, _freshen(rhs, inner, supply)) for n, (_, rhs) in zip(names, e.bindings)),
            _freshen(e.body, inner, supply),
        )
    if isinstance(e, Case):
        alts = []
        for alt in e.alts:
            names = [supply.fresh(b) for b in alt.binders]
            inner = {**env, **dict(zip(alt.binders, names))}
            alts.append(Alt(alt.con, tuple(names), _freshen(alt.rhs, inner, supply)))
        return Case(e.tycon, _freshen(e.scrutinee, env, supply), tuple(alts))
    raise TypeError(f"not an expression: {e!r}")


def alpha_equivalent(left, right):
    return _alpha(left, right, {}, {}, 0)


def _alpha(a, b, env_a, env_b, depth):
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        la, lb = env_a.get(a.name), env_b.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    if isinstance(a, App):
        return _alpha(a.fun, b.fun, env_a, env_b, depth) and _alpha(a.arg, b.arg, env_a, env_b, depth)
    if isinstance(a, Seq):
        return (_alpha(a.first, b.first, env_a, env_b, depth)
                and _alpha(a.second, b.second, env_a, env_b, depth))
    if isinstance(a, ConApp):
        return (a.con == b.con and len(a.args) == len(b.args)
                and all(_alpha(x, y, env_a, env_b, depth) for x, y in zip(a.args, b.args)))
    if isinstance(a, Lam):
        return _alpha(a.body, b.body, {**env_a, a.param: depth}, {**env_b, b.param: depth}, depth + 1)
    if isinstance(a, LetRec):
        if len(a.bindings) != len(b.bindings):
            return False
        levels = range(depth, depth + len(a.bindings))
        ea = {**env_a, **dict(zip(a.binders, levels))}
        eb = {**env_b, **dict(zip(b.binders, levels))}
        depth += len(a.bindings)
        return (all(_alpha(x, y, ea, eb, depth) for (_, x), (_, y) in zip(a.bindings, b.bindings))
                and _alpha(a.body, b.body, ea, eb, depth))
    if isinstance(a, Case):
        if a.tycon != b.tycon or len(a.alts) != len(b.alts):
            return False
        if not _alpha(a.scrutinee, b.scrutinee, env_a, env_b, depth):
            return False
        for x, y in zip(a.alts, b.alts):
            if x.con != y.con or len(x.binders) != len(y.binders):
                return False
            levels = range(depth, depth + len(x.binders))
            if not _alpha(x.rhs, y.rhs, {**env_a, **dict(zip(x.binders, levels))},
                          {**env_b, **dict(zip(y.binders, levels))}, depth + len(x.binders)):
                return False
        return True
    return False


# --- Printing ----------------------------------------------------------------

_EXPR, _APP, _ATOM = 0, 1, 2


def show_name(name):
    if IDENTIFIER.match(name) and name not in KEYWORDS:
        return name
    return f"({name})"


def pretty(expr):
    """Render in the surface syntax accepted by ``parser.parse_expr``."""
    return _show(expr, _EXPR)


def _paren(text, needed):
    return f"({text})" if needed else text


def _show(e, prec):
    if isinstance(e, Var):
        return show_name(e.name)
    if isinstance(e, ConApp):
        if not e.args:
            return e.con
        text = " ".join([e.con] + [_show(a, _ATOM) for a in e.args])
        return _paren(text, prec > _APP)
    if isinstance(e, App):
        return _paren(f"{_show(e.fun, _APP)} {_show(e.arg, _ATOM)}", prec > _APP)
    if isinstance(e, Lam):
        params, body = [e.param], e.body
        while isinstance(body, Lam):
            params.append(body.param)
            body = body.body
        return _paren(f"\\{','.join(params)}.{_show(body, _EXPR)}", prec > _EXPR)
    if isinstance(e, Seq):
        return _paren(f"seq {_show(e.first, _ATOM)} {_show(e.second, _ATOM)}", prec > _EXPR)
    if isinstance(e, LetRec):
        binds = "; ".join(f"{show_name(n)} = {_show(rhs, _EXPR)}" for n, rhs in e.bindings)
        return _paren(f"letrec {binds} in {_show(e.body, _EXPR)}", prec > _EXPR)
    if isinstance(e, Case):
        alts = "; ".join(
            " ".join([alt.con, *alt.binders]) + f" -> {_show(alt.rhs, _EXPR)}" for alt in e.alts
        )
        return _paren(f"case {_show(e.scrutinee, _EXPR)} of {{ {alts} }}", prec > _EXPR)
    raise TypeError(f"not an expression: {e!r}")
