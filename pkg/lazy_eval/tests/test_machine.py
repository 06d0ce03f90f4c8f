import dataclasses

from django.test import SimpleTestCase, override_settings

from lazy_eval.compiler import compile_pipeline
from lazy_eval.exceptions import BlackholeError, CompileError, MachineError
from lazy_eval.machine import (
    CELLS, NODES, AppArg, CaseAlts, GcMode, MachineState, Outcome, RunConfig, SizeMeasure, Update,
    collect_garbage, run, stack_chain_removal, state_size, step,
)
from lazy_eval.parser import parse_expr, parse_program
from lazy_eval.syntax import Alt, App, ConApp, Lam, Var

TRUE, FALSE = ConApp("True"), ConApp("False")
ID = Lam("y", Var("y"))
SHARED_ID = parse_expr(r"letrec x = \y.y in x x")


def compiled(source):
    return compile_pipeline(parse_program(source))


class RunTests(SimpleTestCase):
    def test_shared_identity(self):
        result = run(SHARED_ID)
        self.assertIs(result.outcome, Outcome.FINAL)
        m = result.measures
        self.assertEqual((m.mln, m.mlnall, m.mspmax), (1, 7, 3))
        self.assertEqual(m.summary(), "mln=1 mlnall=7 mspmax=3 gc_runs=1 screm_steps=0")
        self.assertEqual(result.state.control, ID)

    def test_constructor_is_already_final(self):
        m = run(TRUE).measures
        self.assertEqual((m.mln, m.mlnall, m.mspmax), (0, 0, 1))

    def test_trace_records_every_step(self):
        trace = run(SHARED_ID, RunConfig(record_trace=True)).trace
        self.assertEqual([r.rule for r in trace],
                         ["Letrec", "Unwind1", "Lookup", "Update", "Subst", "Lookup", "Update"])
        self.assertEqual([r.size for r in trace], [2, 2, 2, 3, 1, 1, 1])
        self.assertEqual([r.i for r in trace], list(range(1, 8)))
        self.assertEqual(trace.peak(), 3)

    def test_no_trace_unless_asked(self):
        self.assertIsNone(run(SHARED_ID).trace)

    def test_blackhole(self):
        with self.assertRaises(BlackholeError) as ctx:
            run(parse_expr("letrec x = x in x"))
        self.assertEqual(ctx.exception.name, "x")
        self.assertIs(ctx.exception.result.outcome, Outcome.BLACKHOLE)

    def test_step_limit(self):
        result = run(compiled(r"main = letrec f = \x. f x in f True;"), RunConfig(max_steps=100))
        self.assertIs(result.outcome, Outcome.STEP_LIMIT)
        self.assertEqual(result.measures.mlnall, 100)

    def test_open_expression_is_rejected(self):
        with self.assertRaises(CompileError):
            run(Var("x"))

    def test_non_machine_expression_is_rejected(self):
        with self.assertRaises(MachineError):
            run(App(ID, TRUE))

    def test_gc_schedule_changes_space_only(self):
        expr = compiled("main = last (replicate 6 True);")
        eager = run(expr).measures
        for mode in (GcMode.NEVER, GcMode("every", 3)):
            with self.subTest(mode=str(mode)):
                other = run(expr, RunConfig(gc_mode=mode)).measures
                self.assertEqual(other.mln, eager.mln)
                self.assertEqual(other.mlnall, eager.mlnall)
                self.assertGreaterEqual(other.mspmax, eager.mspmax)
        self.assertEqual(run(expr, RunConfig(gc_mode=GcMode.NEVER)).measures.gc_runs, 0)

    def test_stack_chain_removal_merges_updates(self):
        expr = parse_expr("letrec x = y; y = True in x")
        with_screm = run(expr)
        self.assertEqual(with_screm.measures.screm_steps, 1)
        self.assertEqual(with_screm.measures.mln, 0)
        without = run(expr, RunConfig(screm_enabled=False))
        self.assertEqual(without.measures.screm_steps, 0)
        self.assertEqual(without.measures.mlnall, with_screm.measures.mlnall + 1)

    def test_result_of_a_program(self):
        result = run(compiled("main = xor True False;"))
        self.assertEqual(result.state.control, TRUE)
        self.assertEqual(result.state.stack, [])


class StateTests(SimpleTestCase):
    def test_state_size(self):
        alts = CaseAlts("Bool", (Alt("True", (), TRUE), Alt("False", (), FALSE)))
        state = MachineState({"x": ID}, App(Var("x"), Var("x")), [AppArg("x"), Update("y"), alts])
        self.assertEqual(alts.size, 5)
        self.assertEqual(state_size(state), 8)

    def test_cell_measure_counts_variables_and_bindings(self):
        alts = CaseAlts("Bool", (Alt("True", (), TRUE), Alt("False", (), FALSE)))
        state = MachineState({"x": ID}, App(Var("x"), Var("x")), [AppArg("x"), Update("y"), alts])
        # binding 3, control 3, argument 2, update 1, alternatives 5
        self.assertEqual(state_size(state, CELLS), 14)

    def test_run_under_cell_measure(self):
        result = run(SHARED_ID, RunConfig(size_measure=CELLS))
        self.assertEqual((result.measures.mln, result.measures.mlnall), (1, 7))
        self.assertEqual(result.measures.mspmax, 7)

    def test_single_step(self):
        rule, state = step(MachineState({}, SHARED_ID, []))
        self.assertEqual(rule, "Letrec")
        self.assertEqual(state.heap, {"x": ID})
        self.assertEqual(state.control, App(Var("x"), Var("x")))

    def test_step_does_not_touch_its_input(self):
        original = MachineState({}, App(Var("x"), Var("x")), [])
        step(original)
        self.assertEqual(original.stack, [])

    def test_final_state(self):
        self.assertIs(step(MachineState({}, TRUE, [])), Outcome.FINAL)

    def test_value_against_wrong_entry(self):
        alts = CaseAlts("Bool", (Alt("True", (), TRUE), Alt("False", (), FALSE)))
        with self.assertRaises(MachineError):
            step(MachineState({}, ID, [alts]))

    def test_collect_garbage(self):
        state = MachineState(
            {"a": TRUE, "b": Var("c"), "c": ConApp("Nil"), "d": FALSE},
            Lam("q", Var("b")),
            [AppArg("d")],
        )
        self.assertEqual(set(collect_garbage(state).heap), {"b", "c", "d"})
        self.assertEqual(len(state.heap), 4)

    def test_stack_chain_removal(self):
        state = MachineState({"z": Var("a")}, TRUE, [Update("a"), Update("b")])
        merged = stack_chain_removal(state)
        self.assertEqual(merged.stack, [Update("b")])
        self.assertEqual(merged.heap, {"z": Var("b")})


class ConfigTests(SimpleTestCase):
    def test_gc_mode_parsing(self):
        self.assertEqual(GcMode.parse("eager"), GcMode.EAGER)
        self.assertEqual(GcMode.parse("never"), GcMode.NEVER)
        self.assertEqual(GcMode.parse("every:1000"), GcMode("every", 1000))
        self.assertEqual(str(GcMode.parse("every:7")), "every:7")
        for bad in ("every:0", "every:x", "sometimes"):
            with self.subTest(mode=bad), self.assertRaises(ValueError):
                GcMode.parse(bad)

    def test_gc_mode_schedule(self):
        mode = GcMode("every", 3)
        self.assertEqual([mode.due(n) for n in range(1, 7)], [False, False, True, False, False, True])
        self.assertFalse(GcMode.NEVER.due(1))

    def test_exact_space(self):
        self.assertTrue(RunConfig().exact_space)
        self.assertFalse(RunConfig(screm_enabled=False).exact_space)
        self.assertFalse(RunConfig(gc_mode=GcMode.NEVER).exact_space)
        self.assertFalse(RunConfig(size_measure=CELLS).exact_space)

    def test_size_measure_parsing(self):
        self.assertIs(SizeMeasure.parse("Nodes"), NODES)
        self.assertIs(SizeMeasure.parse("cells"), CELLS)
        self.assertEqual(str(CELLS), "cells")
        with self.assertRaises(ValueError):
            SizeMeasure.parse("bytes")

    def test_max_steps_must_be_positive(self):
        with self.assertRaises(ValueError):
            RunConfig(max_steps=0)

    @override_settings(LRP={"GC_MODE": "every:50", "SCREM": False, "MAX_STEPS": 1234, "SIZE_MEASURE": "cells"})
    def test_from_settings(self):
        config = RunConfig.from_settings()
        self.assertEqual(config.gc_mode, GcMode("every", 50))
        self.assertFalse(config.screm_enabled)
        self.assertEqual(config.max_steps, 1234)
        self.assertIs(config.size_measure, CELLS)
        self.assertEqual(RunConfig.from_settings(max_steps=9).max_steps, 9)
        self.assertEqual(dataclasses.replace(config, record_trace=True).max_steps, 1234)
