from django.test import SimpleTestCase

from lazy_eval.syntax import (
    BUILTINS, Alt, App, Case, ConApp, DataDecl, Lam, LetRec, NameSupply, Seq, Var,
    alpha_equivalent, bound_vars, free_vars, fresh_name, freshen, is_machine_expr, is_value,
    is_whnf, pretty, rename, size, subexpressions,
)


def binders_of(expr):
    names = []
    for node in subexpressions(expr):
        if isinstance(node, Lam):
            names.append(node.param)
        elif isinstance(node, LetRec):
            names.extend(node.binders)
        elif isinstance(node, Case):
            for alt in node.alts:
                names.extend(alt.binders)
    return names


ID = Lam("y", Var("y"))
SHARED_ID = LetRec((("x", ID),), App(Var("x"), Var("x")))


class SizeTests(SimpleTestCase):
    def test_examples(self):
        table = [
            (Var("x"), 0),
            (ConApp("True"), 1),
            (ID, 1),
            (App(Var("f"), Var("x")), 1),
            (Seq(ConApp("True"), Var("x")), 2),
            (SHARED_ID, 2),
            (ConApp("Cons", (ConApp("True"), ConApp("Nil"))), 3),
            (Case("Bool", Var("b"), (Alt("True", (), ConApp("False")), Alt("False", (), ConApp("True")))), 5),
        ]
        for expr, expected in table:
            with self.subTest(expr=pretty(expr)):
                self.assertEqual(size(expr), expected)

    def test_letrec_needs_distinct_binders(self):
        with self.assertRaises(ValueError):
            LetRec((("x", ConApp("True")), ("x", ConApp("False"))), Var("x"))
        with self.assertRaises(ValueError):
            LetRec((), Var("x"))


class VariableTests(SimpleTestCase):
    def test_free_and_bound(self):
        expr = LetRec((("x", App(Var("f"), Var("y"))),), Lam("z", App(Var("x"), Var("z"))))
        self.assertEqual(free_vars(expr), {"f", "y"})
        self.assertEqual(bound_vars(expr), {"x", "z"})

    def test_case_binders_are_bound(self):
        expr = Case("List", Var("xs"), (
            Alt("Nil", (), ConApp("True")),
            Alt("Cons", ("h", "t"), App(Var("h"), Var("t"))),
        ))
        self.assertEqual(free_vars(expr), {"xs"})

    def test_rename_avoids_capture(self):
        expr = Lam("y", App(Var("x"), Var("y")))
        renamed = rename(expr, {"x": "y"})
        self.assertNotEqual(renamed.param, "y")
        self.assertEqual(renamed.fv, {"y"})
        self.assertTrue(alpha_equivalent(renamed, Lam("w", App(Var("y"), Var("w")))))

    def test_rename_leaves_bound_occurrences(self):
        expr = LetRec((("x", ConApp("True")),), Var("x"))
        self.assertIs(rename(expr, {"x": "q"}), expr)

    def test_freshen_makes_binders_distinct(self):
        expr = App(Lam("x", Var("x")), LetRec((("x", Lam("x", Var("x"))),), Var("x")))
        fresh = freshen(expr)
        names = binders_of(fresh)
        self.assertEqual(len(names), len(set(names)))
        self.assertTrue(alpha_equivalent(expr, fresh))

    def test_name_supply_never_repeats(self):
        supply = NameSupply({"y", "y1"})
        names = [supply.fresh("y") for _ in range(3)]
        self.assertEqual(len(set(names) | {"y", "y1"}), 5)

    def test_fresh_name_takes_first_free_suffix(self):
        self.assertEqual(fresh_name("y", set()), "y")
        self.assertEqual(fresh_name("y", {"y"}), "y1")
        self.assertEqual(fresh_name("y", {"y", "y1"}), "y2")


class PredicateTests(SimpleTestCase):
    def test_values(self):
        self.assertTrue(is_value(ID))
        self.assertTrue(is_value(ConApp("Nil")))
        self.assertFalse(is_value(Var("x")))
        self.assertFalse(is_value(SHARED_ID))

    def test_whnf(self):
        table = [
            (ConApp("True"), True),
            (LetRec((("x", ConApp("True")),), ID), True),
            (LetRec((("x", ConApp("True")),), Var("x")), True),
            (LetRec((("x", Var("y")), ("y", ConApp("Nil"))), Var("x")), True),
            # an abstraction at the end of the chain is copied, not a result
            (LetRec((("x", ID),), Var("x")), False),
            (LetRec((("x", Var("x")),), Var("x")), False),
            (SHARED_ID, False),
        ]
        for expr, expected in table:
            with self.subTest(expr=pretty(expr)):
                self.assertEqual(is_whnf(expr), expected)

    def test_machine_expressions(self):
        self.assertTrue(is_machine_expr(SHARED_ID))
        self.assertFalse(is_machine_expr(App(Var("f"), ConApp("True"))))
        self.assertFalse(is_machine_expr(Seq(Var("x"), ConApp("True"))))
        self.assertFalse(is_machine_expr(ConApp("Succ", (ConApp("Zero"),))))
        self.assertTrue(is_machine_expr(ConApp("Cons", (Var("h"), Var("t")))))


class SignatureTests(SimpleTestCase):
    def test_builtins(self):
        self.assertEqual(BUILTINS.arity("Cons"), 2)
        self.assertEqual(BUILTINS.tycon_of("Succ"), "Nat")
        self.assertEqual(BUILTINS.constructors("Bool"), ("True", "False"))
        self.assertEqual(BUILTINS.arity("T3"), 3)

    def test_constructor_names_are_unique(self):
        with self.assertRaises(ValueError):
            BUILTINS.extended([DataDecl("Answer", (("True", 0),))])


class PrettyTests(SimpleTestCase):
    def test_shapes(self):
        self.assertEqual(pretty(SHARED_ID), r"letrec x = \y.y in x x")
        self.assertEqual(pretty(Lam("a", Lam("b", Var("a")))), r"\a,b.a")
        self.assertEqual(pretty(Seq(Var("a"), Var("b"))), "seq a b")
        self.assertEqual(pretty(App(Var("f"), App(Var("g"), Var("x")))), "f (g x)")
        self.assertEqual(pretty(Var("++")), "(++)")
