from django.test import SimpleTestCase

from lazy_eval.exceptions import LrpSyntaxError
from lazy_eval.parser import Program, parse_expr, parse_library, parse_program
from lazy_eval.prelude import load_prelude
from lazy_eval.syntax import App, Case, ConApp, Lam, LetRec, Seq, Var, alpha_equivalent, pretty

TRUE, FALSE, NIL = ConApp("True"), ConApp("False"), ConApp("Nil")


class ExpressionTests(SimpleTestCase):
    def test_lambda_with_several_parameters(self):
        self.assertEqual(parse_expr(r"\x,y.x"), Lam("x", Lam("y", Var("x"))))

    def test_application_is_left_associative(self):
        self.assertEqual(parse_expr("f x y"), App(App(Var("f"), Var("x")), Var("y")))

    def test_peano_literal(self):
        self.assertEqual(parse_expr("2"), ConApp("Succ", (ConApp("Succ", (ConApp("Zero"),)),)))

    def test_list_literal_and_cons(self):
        expected = ConApp("Cons", (TRUE, ConApp("Cons", (FALSE, NIL))))
        self.assertEqual(parse_expr("[True, False]"), expected)
        self.assertEqual(parse_expr("True : False : []"), expected)

    def test_append_is_right_associative_after_cons(self):
        expected = ConApp("Cons", (Var("a"), App(App(Var("++"), Var("b")), Var("c"))))
        self.assertEqual(parse_expr("a : b ++ c"), expected)

    def test_let_is_letrec(self):
        self.assertEqual(parse_expr("let x = True in x"), parse_expr("letrec x = True in x"))
        self.assertEqual(parse_expr("letrec x = True in x"), LetRec((("x", TRUE),), Var("x")))

    def test_seq(self):
        self.assertEqual(parse_expr("seq x (f y)"), Seq(Var("x"), App(Var("f"), Var("y"))))

    def test_types_are_erased(self):
        self.assertEqual(parse_expr("(True :: Bool)"), TRUE)
        self.assertEqual(parse_expr(r"/\a. \x.x"), Lam("x", Var("x")))
        self.assertEqual(parse_expr("(xs :: forall a. [a] -> [a])"), Var("xs"))

    def test_case_alternatives_follow_declaration_order(self):
        expr = parse_expr("case xs of { y:ys -> y; [] -> True; }")
        self.assertIsInstance(expr, Case)
        self.assertEqual(expr.tycon, "List")
        self.assertEqual([alt.con for alt in expr.alts], ["Nil", "Cons"])
        self.assertEqual(expr.alts[1].binders, ("y", "ys"))

    def test_parenthesised_cons_pattern(self):
        expr = parse_expr("case xs of { [] -> False; (h:t) -> True }")
        self.assertEqual(expr.alts[1].binders, ("h", "t"))

    def test_pretty_output_parses_back(self):
        sources = [
            r"letrec x = \y.y in x x",
            "case n of { Zero -> True; Succ m -> seq m False }",
            r"\f,xs. case xs of { [] -> []; y:ys -> f y : []}",
        ]
        for source in sources:
            with self.subTest(source=source):
                expr = parse_expr(source)
                self.assertTrue(alpha_equivalent(parse_expr(pretty(expr)), expr))


class ErrorTests(SimpleTestCase):
    def assertSyntaxError(self, text, fragment):
        with self.assertRaises(LrpSyntaxError) as ctx:
            parse_expr(text)
        self.assertIn(fragment, str(ctx.exception))
        return ctx.exception

    def test_unknown_constructor(self):
        self.assertSyntaxError("Maybe True", "unknown constructor 'Maybe'")

    def test_constructor_arity(self):
        self.assertSyntaxError("Cons True", "expects 2 argument(s), got 1")

    def test_pattern_arity(self):
        self.assertSyntaxError("case n of { Zero -> True; Succ -> False }", "pattern 'Succ'")

    def test_duplicate_letrec_binder(self):
        self.assertSyntaxError("letrec x = True; x = False in x", "duplicate binder 'x'")

    def test_duplicate_lambda_parameter(self):
        self.assertSyntaxError(r"\x,x.x", "duplicate binder")

    def test_missing_alternative(self):
        self.assertSyntaxError("case b of { True -> False }", "missing case alternative(s) for False")

    def test_duplicate_alternative(self):
        self.assertSyntaxError("case b of { True -> b; False -> b; True -> b }", "duplicate case alternative")

    def test_mixed_type_constructors(self):
        self.assertSyntaxError("case b of { True -> b; Nil -> b }", "does not belong to type 'Bool'")

    def test_position_of_a_lexical_error(self):
        error = self.assertSyntaxError("f (True", "syntax error")
        self.assertEqual(error.line, 1)
        self.assertIsNotNone(error.column)


class ProgramTests(SimpleTestCase):
    def test_definitions_and_main(self):
        program = parse_program("""
            -- the identity
            id = \\x.x;
            main = id True;
        """)
        self.assertEqual(program.def_names(), ("id",))
        self.assertEqual(program.main, App(Var("id"), TRUE))

    def test_main_is_required(self):
        with self.assertRaises(LrpSyntaxError):
            parse_program("id = \\x.x;")

    def test_data_declaration(self):
        program = parse_program("""
            data Colour = Red | Green | Blue;
            data Pair a b = MkPair a b;
            main = case Red of { Blue -> MkPair Red Blue; Red -> MkPair Green Green; Green -> MkPair Red Red };
        """)
        self.assertEqual(program.signature.constructors("Colour"), ("Red", "Green", "Blue"))
        self.assertEqual(program.signature.arity("MkPair"), 2)
        self.assertEqual([alt.con for alt in program.main.alts], ["Red", "Green", "Blue"])

    def test_duplicate_definition(self):
        with self.assertRaisesMessage(LrpSyntaxError, "duplicate definition 'f'"):
            parse_program("f = True; f = False; main = f;")

    def test_user_definitions_shadow_the_prelude(self):
        prelude = load_prelude()
        program = parse_program("map = True; main = map;").with_prelude(prelude)
        names = program.def_names()
        self.assertEqual(names.count("map"), 1)
        self.assertEqual(dict(program.defs)["map"], TRUE)

    def test_library_has_no_main(self):
        library = parse_library("not = \\b. case b of { True -> False; False -> True };")
        self.assertIsInstance(library, Program)
        self.assertIsNone(library.main)

    def test_prelude_parses(self):
        names = load_prelude().def_names()
        for name in ("foldl", "foldl'", "foldr", "++", "concatMap", "reverse'", "take", "last"):
            with self.subTest(name=name):
                self.assertIn(name, names)


# Reference definitions; an unmatched list case and a written bottom both demand ``bot``.
REFERENCE_DEFINITIONS = r"""
comp = \f,g.(\x. f (g x));
foldr = \f,z,xs. case xs of { [] -> z; y:ys -> f y (foldr f z ys) };
foldl = \f,z,xs. case xs of { [] -> z; y:ys -> foldl f (f z y) ys };
foldl' = \f,z,xs. case xs of { [] -> z; y:ys -> letrec w = (f z y) in seq w (foldl' f w ys) };
map = \f,lst. case lst of { [] -> []; x:xs -> (f x) : (map f xs) };
tail = \lst. case lst of { [] -> bot; x:xs -> xs };
replicate = \n,x. case n of { Zero -> []; Succ m -> x : (replicate m x) };
last = \lst. case lst of { [] -> bot; x:xs -> case xs of { [] -> x; y:ys -> last xs } };
reverse = \xs. case xs of { [] -> []; y:ys -> reverse ys ++ [y] };
reverse' = \xs. reversew [] xs;
reversew = \xs,ys. case ys of { [] -> xs; z:zs -> reversew (z:xs) zs };
(++) = \xs,ys. case xs of { [] -> ys; z:zs -> z : (zs ++ ys) };
xor = \x,y. case x of { True -> case y of { True -> False; False -> True }; False -> y };
"""


class PreludeTests(SimpleTestCase):
    def test_definitions_match_reference_text(self):
        prelude = dict(load_prelude().defs)
        for name, expected in parse_library(REFERENCE_DEFINITIONS).defs:
            with self.subTest(name=name):
                self.assertTrue(alpha_equivalent(prelude[name], expected),
                                f"{name}: {pretty(prelude[name])}")

    def test_reversew_takes_accumulator_first(self):
        reversew = dict(load_prelude().defs)["reversew"]
        self.assertIsInstance(reversew, Lam)
        self.assertEqual(reversew.body.param, "ys")
        self.assertEqual(reversew.body.body.scrutinee, Var("ys"))
