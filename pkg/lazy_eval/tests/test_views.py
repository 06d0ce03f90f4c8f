from django.contrib import admin
from django.test import TestCase
from django.urls import reverse

from lazy_eval.harness import MeasureRow, save_rows
from lazy_eval.machine import GcMode, RunConfig
from lazy_eval.models import ExperimentRun, MeasureRecord


class SaveRowsTests(TestCase):
    def test_rows_are_stored_with_the_run(self):
        run = save_rows("foldl", "fold", RunConfig(gc_mode=GcMode("every", 1000)),
                        [MeasureRow(50, 4, 5, 6), MeasureRow(25, 1, 2, 3)])
        self.assertEqual(run.gc_mode, "every:1000")
        self.assertTrue(run.screm)
        self.assertEqual([r.k for r in run.rows.all()], [25, 50])
        self.assertTrue(str(run).startswith("fold/foldl run at"))
        self.assertEqual(str(run.rows.first()), "k=25 mln=1 mlnall=2 mspmax=3")

    def test_difference_rows_keep_gc_columns(self):
        run = save_rows("concatMap", "fusion", RunConfig(),
                        [MeasureRow(100, 200, 600, -14, {"eager": -14, "never": 132})])
        self.assertEqual(run.rows.get().gc_columns, {"eager": -14, "never": 132})

    def test_models_are_registered(self):
        self.assertTrue(admin.site.is_registered(ExperimentRun))
        self.assertTrue(admin.site.is_registered(MeasureRecord))


class RunViewTests(TestCase):
    def setUp(self):
        self.older = save_rows("foldr", "fold", RunConfig(), [MeasureRow(25, 1, 2, 3)])
        self.newer = save_rows("reverse'", "reverse", RunConfig(screm_enabled=False),
                               [MeasureRow(50, 10, 20, 30), MeasureRow(100, 11, 21, 31)])

    def test_list(self):
        response = self.client.get(reverse("run_list_json"))
        self.assertEqual(response.status_code, 200)
        runs = response.json()["runs"]
        self.assertEqual([r["id"] for r in runs], [self.newer.id, self.older.id])
        self.assertEqual(runs[0]["row_count"], 2)
        self.assertFalse(runs[0]["screm"])

    def test_detail(self):
        response = self.client.get(reverse("run_detail_json", args=[self.older.id]))
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(data["name"], "foldr")
        self.assertEqual(data["rows"], [{"k": 25, "mln": 1, "mlnall": 2, "mspmax": 3, "gc_columns": None}])

    def test_latest(self):
        data = self.client.get(reverse("latest_run_json")).json()
        self.assertEqual(data["id"], self.newer.id)
        self.assertEqual([row["k"] for row in data["rows"]], [50, 100])

    def test_missing_run(self):
        response = self.client.get(reverse("run_detail_json", args=[9999]))
        self.assertEqual(response.status_code, 404)
        self.assertIn("error", response.json())


class EmptyDatabaseTests(TestCase):
    def test_latest_without_runs(self):
        response = self.client.get(reverse("latest_run_json"))
        self.assertEqual(response.status_code, 404)
        self.assertEqual(response.json(), {"error": "No experiment runs available"})

    def test_empty_list(self):
        self.assertEqual(self.client.get(reverse("run_list_json")).json(), {"runs": []})
