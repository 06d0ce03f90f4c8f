# lazy_eval/parser.py
"""
Surface syntax for LRP programs.

Parsing runs in two passes: the pyparsing grammar produces a light raw tree
that remembers source positions, and ``_Resolver`` turns it into ``syntax``
nodes once every data declaration of the program is known. Semantic errors
(unknown constructor, arity, duplicate binder, incomplete case) therefore
still carry a line and a column.
"""

import logging
import string
from dataclasses import dataclass, field
from typing import Optional, Tuple

import pyparsing as pp

from .exceptions import LrpSyntaxError
from .syntax import (
    BUILTINS, KEYWORDS, Alt, App, Case, ConApp, DataDecl, Expr, Lam, LetRec, Seq, Var,
)

logger = logging.getLogger(__name__)

pp.ParserElement.enable_packrat()

IDENT_CHARS = string.ascii_letters + string.digits + "_'"


@dataclass(frozen=True)
class Program:
    data_decls: Tuple[DataDecl, ...] = ()
    defs: Tuple[Tuple[str, Expr], ...] = ()
    main: Optional[Expr] = None
    signature: object = field(default=BUILTINS, compare=False, repr=False)

    def def_names(self):
        return tuple(name for name, _ in self.defs)

    def with_prelude(self, prelude):
        """Prepend the prelude definitions this program does not redefine."""
        own = set(self.def_names())
        defs = tuple((n, e) for n, e in prelude.defs if n not in own) + self.defs
        return Program(prelude.data_decls + self.data_decls, defs, self.main, self.signature)


class _Raw:
    __slots__ = ("kind", "loc", "parts")

    def __init__(self, kind, loc, parts):
        self.kind = kind
        self.loc = loc
        self.parts = parts


def _raw(kind):
    def action(s, loc, toks):
        return _Raw(kind, loc, list(toks))
    return action


def _build_grammar():
    lbrace, rbrace, lpar, rpar, lbrack, rbrack = map(pp.Suppress, "{}()[]")
    semi, comma, dot, bar = map(pp.Suppress, ";,.|")
    equals = pp.Suppress(pp.Regex(r"=(?!=)"))
    arrow = pp.Suppress("->")
    annot_mark = pp.Suppress("::")

    def kw(word):
        return pp.Keyword(word, ident_chars=IDENT_CHARS)

    reserved = pp.MatchFirst([kw(k) for k in sorted(KEYWORDS)])
    ident = (~reserved + pp.Regex(r"[a-z_][A-Za-z0-9_']*")).set_name("identifier")
    conname = pp.Regex(r"[A-Z][A-Za-z0-9_']*").set_name("constructor")
    intlit = pp.Regex(r"\d+").set_name("integer")
    cons_op = pp.Regex(r":(?!:)").set_name("':'")
    append_op = pp.Literal("++")
    op_name = (lpar + append_op + rpar)
    binder_name = ident | op_name

    # types are accepted and thrown away
    type_ = pp.Forward()
    type_atom = (
        ident | conname
        | lpar + pp.Opt(type_ + pp.ZeroOrMore(comma + type_)) + rpar
        | lbrack + pp.Opt(type_) + rbrack
    )
    type_app = pp.OneOrMore(type_atom)
    type_ <<= pp.Opt(kw("forall") + pp.OneOrMore(ident) + dot) + type_app + pp.ZeroOrMore(arrow + type_app)
    annotation = pp.Suppress(annot_mark + type_)

    expr = pp.Forward()
    aexpr = pp.Forward()

    var = ident.copy().set_parse_action(_raw("var"))
    op_var = op_name.copy().set_parse_action(_raw("var"))
    con = conname.copy().set_parse_action(_raw("con"))
    num = intlit.copy().set_parse_action(_raw("int"))
    nil = (lbrack + rbrack).set_parse_action(_raw("nil"))
    listlit = (lbrack + expr + pp.ZeroOrMore(comma + expr) + rbrack).set_parse_action(_raw("list"))
    paren = lpar + expr + pp.Opt(annotation) + rpar
    aexpr <<= var | con | num | op_var | nil | listlit | paren

    param = ident + pp.Opt(annotation)
    lam = (pp.Suppress("\\") + pp.Group(param + pp.ZeroOrMore(comma + param)) + dot + expr
           ).set_parse_action(_raw("lam"))
    tylam = pp.Suppress("/\\") + pp.Suppress(ident) + dot + expr

    bind = pp.Group(binder_name.copy().set_parse_action(_raw("binder")) + pp.Opt(annotation) + equals + expr)
    letrec = ((pp.Suppress(kw("letrec")) | pp.Suppress(kw("let"))) + pp.Group(bind + pp.ZeroOrMore(semi + bind))
              + pp.Suppress(kw("in")) + expr).set_parse_action(_raw("letrec"))

    pattern = pp.Forward()
    pattern <<= (
        (conname + pp.ZeroOrMore(ident)).set_parse_action(_raw("pattern"))
        | (lbrack + rbrack).set_parse_action(lambda s, loc, t: _Raw("pattern", loc, ["Nil"]))
        | (ident + cons_op.suppress() + ident).set_parse_action(
            lambda s, loc, t: _Raw("pattern", loc, ["Cons"] + list(t)))
        | lpar + pattern + rpar
    )
    alt = pp.Group(pattern + arrow + expr)
    case = (pp.Suppress(kw("case")) + expr + pp.Suppress(kw("of")) + lbrace
            + pp.Group(alt + pp.ZeroOrMore(semi + alt) + pp.Opt(semi)) + rbrace
            ).set_parse_action(_raw("case"))
    seq = (pp.Suppress(kw("seq")) + aexpr + aexpr).set_parse_action(_raw("seq"))

    appexpr = pp.OneOrMore(aexpr).set_parse_action(
        lambda s, loc, t: t[0] if len(t) == 1 else _Raw("app", loc, list(t)))
    opexpr = pp.Forward()
    opexpr <<= (appexpr + pp.Opt((cons_op | append_op) + expr)).set_parse_action(_infix)
    expr <<= lam | tylam | letrec | case | seq | opexpr

    atype = ~(binder_name + (pp.Literal("=") | annot_mark)) + (
        ident | conname | lpar + pp.Opt(type_) + rpar | lbrack + pp.Opt(type_) + rbrack
    )
    constructor = pp.Group(conname + pp.Group(pp.ZeroOrMore(pp.Group(atype))))
    datadecl = (pp.Suppress(kw("data")) + conname + pp.Suppress(pp.ZeroOrMore(ident)) + equals
                + pp.Group(constructor + pp.ZeroOrMore(bar + constructor)) + pp.Opt(semi)
                ).set_parse_action(_raw("data"))
    definition = (binder_name.copy().set_parse_action(_raw("binder")) + pp.Opt(annotation) + equals + expr + semi
                  ).set_parse_action(_raw("def"))
    main = (pp.Suppress(kw("main")) + equals + expr + pp.Opt(semi)).set_parse_action(_raw("main"))

    comment = pp.Regex(r"--[^\n]*")
    program = pp.ZeroOrMore(datadecl | definition) + main + pp.StringEnd()
    library = pp.ZeroOrMore(datadecl | definition) + pp.StringEnd()
    single = expr + pp.StringEnd()
    for element in (program, library, single):
        element.ignore(comment)
    return program, library, single


def _infix(s, loc, toks):
    if len(toks) == 1:
        return toks[0]
    left, op, right = toks
    return _Raw("cons" if op == ":" else "append", loc, [left, right])


_PROGRAM, _LIBRARY, _SINGLE = _build_grammar()


class _Resolver:
    def __init__(self, text, signature):
        self.text = text
        self.sig = signature

    def error(self, message, loc):
        return LrpSyntaxError(message, pp.lineno(loc, self.text), pp.col(loc, self.text))

    def expr(self, raw):
        kind, loc, parts = raw.kind, raw.loc, raw.parts
        if kind == "var":
            return Var(parts[0])
        if kind == "con":
            return self.con_app(parts[0], [], loc)
        if kind == "int":
            result = ConApp("Zero")
            for _ in range(int(parts[0])):
                result = ConApp("Succ", (result,))
            return result
        if kind == "nil":
            return ConApp("Nil")
        if kind == "list":
            result = ConApp("Nil")
            for item in reversed(parts):
                result = ConApp("Cons", (self.expr(item), result))
            return result
        if kind == "cons":
            return ConApp("Cons", (self.expr(parts[0]), self.expr(parts[1])))
        if kind == "append":
            return App(App(Var("++"), self.expr(parts[0])), self.expr(parts[1]))
        if kind == "app":
            head, args = parts[0], parts[1:]
            if head.kind == "con":
                return self.con_app(head.parts[0], [self.expr(a) for a in args], head.loc)
            result = self.expr(head)
            for arg in args:
                result = App(result, self.expr(arg))
            return result
        if kind == "seq":
            return Seq(self.expr(parts[0]), self.expr(parts[1]))
        if kind == "lam":
            params, body = list(parts[0]), parts[1]
            if len(set(params)) != len(params):
                raise self.error(f"duplicate binder in lambda parameters {params}", loc)
            result = self.expr(body)
            for p in reversed(params):
                result = Lam(p, result)
            return result
        if kind == "letrec":
            return LetRec(self.bindings(parts[0], loc), self.expr(parts[1]))
        if kind == "case":
            return self.case(parts[0], parts[1], loc)
        raise self.error(f"unexpected syntax element '{kind}'", loc)

    def bindings(self, groups, loc):
        seen, result = {}, []
        for group in groups:
            binder, rhs = group[0], group[-1]
            name = binder.parts[0]
            if name in seen:
                raise self.error(f"duplicate binder '{name}'", binder.loc)
            seen[name] = binder.loc
            result.append((name, self.expr(rhs)))
        return tuple(result)

    def con_app(self, con, args, loc):
        if not self.sig.has_constructor(con):
            raise self.error(f"unknown constructor '{con}'", loc)
        arity = self.sig.arity(con)
        if len(args) != arity:
            raise self.error(f"constructor '{con}' expects {arity} argument(s), got {len(args)}", loc)
        return ConApp(con, tuple(args))

    def case(self, scrutinee, alt_groups, loc):
        alts, tycon = {}, None
        for group in alt_groups:
            pattern, rhs = group[0], group[1]
            con, binders = pattern.parts[0], list(pattern.parts[1:])
            if not self.sig.has_constructor(con):
                raise self.error(f"unknown constructor '{con}'", pattern.loc)
            if len(binders) != self.sig.arity(con):
                raise self.error(
                    f"pattern '{con}' expects {self.sig.arity(con)} variable(s), got {len(binders)}",
                    pattern.loc)
            if len(set(binders)) != len(binders):
                raise self.error(f"duplicate binder in pattern '{con} {' '.join(binders)}'", pattern.loc)
            owner = self.sig.tycon_of(con)
            if tycon is None:
                tycon = owner
            elif owner != tycon:
                raise self.error(f"constructor '{con}' does not belong to type '{tycon}'", pattern.loc)
            if con in alts:
                raise self.error(f"duplicate case alternative for '{con}'", pattern.loc)
            alts[con] = Alt(con, tuple(binders), self.expr(rhs))
        missing = [c for c in self.sig.constructors(tycon) if c not in alts]
        if missing:
            raise self.error(f"missing case alternative(s) for {', '.join(missing)}", loc)
        ordered = tuple(alts[c] for c in self.sig.constructors(tycon))
        return Case(tycon, self.expr(scrutinee), ordered)

    def program(self, items):
        decls = []
        for item in items:
            if item.kind == "data":
                tycon, constructors = item.parts[0], item.parts[1]
                decls.append(DataDecl(tycon, tuple((c[0], len(c[1])) for c in constructors)))
        try:
            self.sig = self.sig.extended(decls)
        except ValueError as exc:
            raise LrpSyntaxError(str(exc)) from exc
        defs, seen, main = [], set(), None
        for item in items:
            if item.kind == "def":
                binder, rhs = item.parts[0], item.parts[-1]
                name = binder.parts[0]
                if name in seen:
                    raise self.error(f"duplicate definition '{name}'", binder.loc)
                seen.add(name)
                defs.append((name, self.expr(rhs)))
            elif item.kind == "main":
                main = self.expr(item.parts[0])
        return Program(tuple(decls), tuple(defs), main, self.sig)


def _run(grammar, text):
    try:
        return grammar.parse_string(text, parse_all=True)
    except pp.ParseBaseException as exc:
        raise LrpSyntaxError(f"syntax error: {exc.msg}", exc.lineno, exc.column) from exc


def parse_program(text, signature=BUILTINS):
    items = _run(_PROGRAM, text)
    program = _Resolver(text, signature).program(list(items))
    logger.debug("parsed program", extra={"defs": len(program.defs), "data": len(program.data_decls)})
    return program


def parse_library(text, signature=BUILTINS):
    """Parse definitions and data declarations without a ``main``."""
    return _Resolver(text, signature).program(list(_run(_LIBRARY, text)))


def parse_expr(text, signature=BUILTINS):
    raw = _run(_SINGLE, text)[0]
    return _Resolver(text, signature).expr(raw)
