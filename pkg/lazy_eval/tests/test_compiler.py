import time

from django.test import SimpleTestCase

from lazy_eval.compiler import (
    compile_expr, compile_pipeline, live_binders, prepare, remove_indirections, static_gc,
    translate_psi, wrap,
)
from lazy_eval.corpus import generate
from lazy_eval.exceptions import CompileError
from lazy_eval.parser import Program, parse_expr, parse_program
from lazy_eval.syntax import (
    App, ConApp, LetRec, Seq, Var, alpha_equivalent, is_machine_expr, pretty,
)

TRUE = ConApp("True")


def chain(n):
    bindings = [(f"x{i}", Var(f"x{i + 1}")) for i in range(n)] + [(f"x{n}", TRUE)]
    return LetRec(tuple(bindings), Var("x0"))


class PsiTests(SimpleTestCase):
    def test_argument_is_shared_through_a_letrec(self):
        self.assertEqual(translate_psi(App(Var("f"), TRUE)),
                         LetRec((("y", TRUE),), App(Var("f"), Var("y"))))

    def test_seq_and_constructor_arguments(self):
        expr = Seq(Var("a"), ConApp("Cons", (TRUE, ConApp("Nil"))))
        psi = translate_psi(expr)
        self.assertTrue(is_machine_expr(psi))
        self.assertEqual(psi.size, expr.size)

    def test_constants_are_unchanged(self):
        self.assertIs(translate_psi(TRUE), TRUE)

    def test_size_is_preserved_on_the_corpus(self):
        for expr in generate(seed=3, count=300, max_depth=8):
            psi = translate_psi(expr)
            if psi.size != expr.size or not is_machine_expr(psi):
                self.fail(f"translation of {pretty(expr)} gave {pretty(psi)}")


class IndirectionTests(SimpleTestCase):
    def test_chain_collapses_to_its_end(self):
        result = remove_indirections(parse_expr("letrec x = y; y = True in x"))
        self.assertEqual(result, LetRec((("y", TRUE),), Var("y")))

    def test_cycle_keeps_one_self_binding(self):
        result = remove_indirections(parse_expr("letrec a = b; b = c; c = a in a"))
        self.assertEqual(result, LetRec((("a", Var("a")),), Var("a")))

    def test_unused_self_binding_is_dropped(self):
        result = remove_indirections(parse_expr("letrec x = x; y = True in y"))
        self.assertEqual(result, LetRec((("y", TRUE),), Var("y")))

    def test_chain_into_a_cycle(self):
        result = remove_indirections(parse_expr("letrec p = a; a = b; b = a; q = Cons p Nil in q"))
        self.assertTrue(alpha_equivalent(result, parse_expr("letrec a = a; q = Cons a Nil in q")))

    def test_used_self_binding_is_kept(self):
        expr = parse_expr("letrec x = x in x")
        self.assertEqual(remove_indirections(expr), expr)

    def test_nested_letrecs(self):
        result = remove_indirections(parse_expr(r"\z. letrec u = z; v = u in Cons v Nil"))
        self.assertTrue(alpha_equivalent(result, parse_expr(r"\z. Cons z Nil")))

    def test_long_chain(self):
        n = 2000
        self.assertEqual(remove_indirections(chain(n)), LetRec(((f"x{n}", TRUE),), Var(f"x{n}")))

    def test_scaling(self):
        def best_of_three(n):
            expr = chain(n)
            timings = []
            for _ in range(3):
                start = time.perf_counter()
                remove_indirections(expr)
                timings.append(time.perf_counter() - start)
            return min(timings)

        small, large = best_of_three(10 ** 4), best_of_three(10 ** 5)
        self.assertLessEqual(large / small, 15)


class GarbageTests(SimpleTestCase):
    def test_dead_bindings_are_removed(self):
        expr = parse_expr("letrec x = True; y = False; z = y in x")
        self.assertEqual(static_gc(expr), LetRec((("x", TRUE),), Var("x")))

    def test_fully_dead_letrec_becomes_its_body(self):
        self.assertEqual(static_gc(parse_expr("letrec x = True in False")), ConApp("False"))

    def test_live_binders_follow_right_hand_sides(self):
        bindings = parse_expr("letrec a = b; b = Cons c Nil; c = True; d = a in a").bindings
        self.assertEqual(live_binders(bindings, {"a"}), {"a", "b", "c"})


class PipelineTests(SimpleTestCase):
    def test_unbound_variable(self):
        with self.assertRaises(CompileError) as ctx:
            compile_pipeline(parse_program("main = g (h True);"))
        self.assertEqual(ctx.exception.names, ("g", "h"))
        self.assertIn("unbound variable: g, h", str(ctx.exception))

    def test_program_without_main(self):
        with self.assertRaisesMessage(CompileError, "no main expression"):
            wrap(Program())

    def test_unused_prelude_definitions_are_dropped(self):
        expr = prepare(parse_program(r"main = letrec x = \y.y in x x;"))
        self.assertTrue(alpha_equivalent(expr, parse_expr(r"letrec x = \y.y in x x")))

    def test_compiled_program_is_a_closed_machine_expression(self):
        expr = compile_pipeline(parse_program("main = last (map (xor True) [True, False]);"))
        self.assertTrue(is_machine_expr(expr))
        self.assertEqual(expr.fv, frozenset())

    def test_compiling_a_machine_expression_is_identity(self):
        expr = parse_expr(r"letrec x = \y.y in x x")
        self.assertEqual(compile_expr(expr), expr)
