# apps/reports/tests.py

import json
from io import StringIO
from pathlib import Path
from unittest import mock

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from apps.pencils.core import INFINITY, is_infinite
from apps.pencils.exceptions import VerificationFailed

from .serializers import (
    PencilFileSerializer,
    RankOneFileSerializer,
    encode_complex,
    parse_complex,
    parse_targets,
)
from .services import EXIT_ERROR, EXIT_OK, EXIT_UNVERIFIED, execute, render_text

FIXTURES = Path(settings.BASE_DIR) / "fixtures"

JORDAN = {"format_version": "1", "n": 2, "E": [[1, 0], [0, 1]], "A": [[0, 1], [0, 0]]}


def fixture(name):
    return str(FIXTURES / name)


def eigenvalues(spectrum):
    """``{lam: root_dim}`` with eigenvalues rounded for comparison."""
    out = {}
    for eig in spectrum["eigs"]:
        lam = parse_complex(eig["lam"])
        out["inf" if is_infinite(lam) else complex(round(lam.real, 6), round(lam.imag, 6))] = eig["root_dim"]
    return out


class ComplexLiteralTest(SimpleTestCase):
    def test_parse(self):
        self.assertEqual(parse_complex(2), 2 + 0j)
        self.assertEqual(parse_complex([1.5, -2]), 1.5 - 2j)
        self.assertEqual(parse_complex("1+2i"), 1 + 2j)
        self.assertEqual(parse_complex("-i"), -1j)
        self.assertEqual(parse_complex("3-i"), 3 - 1j)
        self.assertEqual(parse_complex("inf"), INFINITY)

    def test_rejects_garbage(self):
        for bad in ("abc", [1, 2, 3], True, {"re": 1}):
            with self.assertRaises(ValueError):
                parse_complex(bad)

    def test_encode(self):
        self.assertEqual(encode_complex(2 + 0j), 2.0)
        self.assertEqual(encode_complex(1 - 1j), [1.0, -1.0])
        self.assertEqual(encode_complex(INFINITY), "inf")

    def test_targets(self):
        self.assertEqual(parse_targets("1:1,-1:1,inf:2"), ((1 + 0j, 1), (-1 + 0j, 1), (INFINITY, 2)))
        self.assertEqual(parse_targets("1+2i:1, 1-2i:1"), ((1 + 2j, 1), (1 - 2j, 1)))
        with self.assertRaises(ValueError):
            parse_targets("1,2")


class FileFormatTest(SimpleTestCase):
    def test_pencil_file(self):
        serializer = PencilFileSerializer(data=JORDAN)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data["pencil"].n, 2)

    def test_ragged_rows(self):
        serializer = PencilFileSerializer(data={**JORDAN, "A": [[0, 1], [0]]})
        self.assertFalse(serializer.is_valid())
        self.assertIn("A", serializer.errors)

    def test_dimension_mismatch(self):
        serializer = PencilFileSerializer(data={**JORDAN, "n": 3})
        self.assertFalse(serializer.is_valid())
        self.assertIn("E", serializer.errors)

    def test_infinite_entry(self):
        serializer = PencilFileSerializer(data={**JORDAN, "E": [[1, "inf"], [0, 1]]})
        self.assertFalse(serializer.is_valid())

    def test_unknown_version(self):
        serializer = PencilFileSerializer(data={**JORDAN, "format_version": "7"})
        self.assertFalse(serializer.is_valid())
        self.assertIn("format_version", serializer.errors)

    def test_rank_one_from_factors(self):
        serializer = RankOneFileSerializer(data={"form": "degenerate", "u": [1, 0], "w": [0, 1], "alpha": 1, "beta": 2})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data["rank_one"].ratio, 2)

    def test_rank_one_from_matrices(self):
        serializer = RankOneFileSerializer(data={"F": [[1, 1], [0, 0]], "G": [[-1, -1], [-1, -1]]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data["rank_one"].form, "left_vector")

    def test_rank_one_needs_structure(self):
        self.assertFalse(RankOneFileSerializer(data={"u": [1, 0]}).is_valid())
        self.assertFalse(RankOneFileSerializer(data={"F": [[1, 0], [0, 1]], "G": [[0, 0], [0, 0]]}).is_valid())


class ServicesTest(SimpleTestCase):
    def test_analyze(self):
        code, report = execute("analyze", JORDAN)
        self.assertEqual(code, EXIT_OK)
        spectrum = report["result"]["spectrum"]
        self.assertEqual(spectrum["M"], 2)
        self.assertEqual([eig["segre"] for eig in spectrum["eigs"]], [[2]])
        self.assertEqual(report["tolerances"]["tol_rank"], 1e-9)

    def test_tolerances_are_echoed(self):
        _, report = execute("analyze", {**JORDAN, "tol_rank": 1e-8, "tol_cluster": 1e-6, "seed": 4})
        self.assertEqual(report["tolerances"]["tol_rank"], 1e-8)
        self.assertEqual(report["tolerances"]["tol_cluster"], 1e-6)
        self.assertEqual(report["seed"], 4)

    def test_place_round_trip(self):
        code, report = execute("place", {**JORDAN, "targets": "1:1,-1:1", "seed": 0})
        self.assertEqual(code, EXIT_OK)
        placement = report["result"]["placement"]
        self.assertTrue(placement["verified"])
        self.assertEqual(eigenvalues(placement["achieved"]), {1.0: 1, -1.0: 1})

    def test_budget_mismatch_names_both_numbers(self):
        code, report = execute("place", {**JORDAN, "targets": "1:1"})
        self.assertEqual(code, EXIT_ERROR)
        self.assertEqual(report["error"]["code"], "budget_mismatch")
        self.assertEqual(report["error"]["context"], {"expected": 2, "got": 1})

    def test_invalid_input(self):
        code, report = execute("place", {**JORDAN, "targets": "one:1"})
        self.assertEqual(code, EXIT_ERROR)
        self.assertEqual(report["error"]["code"], "invalid")
        self.assertIn("targets", report["error"]["detail"])

    def test_verification_failure_keeps_report(self):
        with mock.patch("apps.reports.services.place", side_effect=VerificationFailed("forced")):
            code, report = execute("place", {**JORDAN, "targets": "1:1,-1:1"})
        self.assertEqual(code, EXIT_UNVERIFIED)
        self.assertEqual(report["status"], "verification_failed")
        self.assertEqual(report["error"]["detail"], "forced")

    def test_restricted(self):
        data = {**JORDAN, "v": [0, -1], "targets": "-1:1,-2:1"}
        code, report = execute("place-restricted", data)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["result"]["pole_profile"]["M_uv"], 2)
        self.assertEqual(eigenvalues(report["result"]["placement"]["achieved"]), {-1.0: 1, -2.0: 1})

    def test_feedback_needs_b(self):
        code, report = execute("feedback", {**JORDAN, "targets": "-1:1,-2:1"})
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("b", report["error"]["detail"])

    def test_feedback(self):
        code, report = execute("feedback", {**JORDAN, "b": [0, 1], "targets": "-1:1,-2:1"})
        self.assertEqual(code, EXIT_OK)
        f = report["result"]["f"]
        self.assertAlmostEqual(f[0], -2.0, places=7)
        self.assertAlmostEqual(f[1], -3.0, places=7)
        self.assertTrue(report["result"]["hautus"]["controllable"])

    def test_inverse(self):
        code, report = execute("inverse", {"before": "0:2", "after": "1:1,-1:1"})
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["result"]["pencil"]["n"], 2)

    def test_inverse_total_mismatch(self):
        code, report = execute("inverse", {"before": "0:2", "after": "1:1"})
        self.assertEqual(code, EXIT_ERROR)
        self.assertEqual(report["error"]["code"], "total_mismatch")

    def test_verify_bounds(self):
        rank_one = {"form": "left_vector", "u": [1, 0], "v": [0, 1], "w": [1, 1]}
        code, report = execute("verify-bounds", {"pencil": JORDAN, "rank_one": rank_one})
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(report["result"]["bounds"]["overall_pass"])

    def test_degenerate_regularity_verdict(self):
        rank_one = {"form": "degenerate", "u": [1, 0], "w": [1, 0], "alpha": 1, "beta": 5}
        _, report = execute("verify-bounds", {"pencil": JORDAN, "rank_one": rank_one})
        self.assertEqual(report["result"]["regularity"]["kind"], "regular_guaranteed")

    def test_trials(self):
        code, report = execute("trials", {"kind": "place", "count": 3, "size_max": 3, "seed": 1})
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["result"]["summary"]["attempted"], 3)
        self.assertEqual(report["result"]["summary"]["violations"], [])

    def test_json_report_round_trips(self):
        _, report = execute("place", {**JORDAN, "targets": "1:1,-1:1", "seed": 0})
        self.assertEqual(json.loads(json.dumps(report)), report)

    def test_render_text(self):
        _, report = execute("analyze", JORDAN)
        text = render_text(report)
        self.assertIn("command: analyze", text)
        self.assertIn("[2]", text)
        self.assertIn("tol_rank=1e-09", text)


class PencilCommandTest(SimpleTestCase):
    def call(self, *args):
        out = StringIO()
        call_command("pencil", *args, stdout=out)
        return out.getvalue()

    def test_analyze(self):
        output = self.call("analyze", fixture("jordan_block.json"))
        self.assertIn("M: 2", output)
        self.assertIn("analyze: verified", output)

    def test_analyze_json(self):
        output = self.call("analyze", fixture("jordan_block.json"), "--json")
        report = json.loads(output[: output.rindex("}") + 1])
        self.assertEqual(report["exit_code"], 0)
        self.assertEqual(report["result"]["spectrum"]["eigs"][0]["segre"], [2])

    def test_decompose(self):
        output = self.call("decompose", fixture("rank_one_left.json"), "--json")
        report = json.loads(output[: output.rindex("}") + 1])
        self.assertEqual(report["result"]["rank_one"]["form"], "left_vector")
        self.assertLess(report["result"]["residual"], 1e-10)

    def test_place(self):
        output = self.call("place", fixture("jordan_block.json"), "--targets", "1:1,-1:1", "--seed", "0")
        self.assertIn("place: verified", output)

    def test_place_restricted(self):
        output = self.call(
            "place-restricted", fixture("jordan_block.json"), "--v", "0,-1", "--targets", "-1:1,-2:1"
        )
        self.assertIn("place-restricted: verified", output)

    def test_feedback_on_singular_leading_matrix(self):
        output = self.call("feedback", fixture("descriptor_system.json"), "--targets", "-1:1", "--json")
        report = json.loads(output[: output.rindex("}") + 1])
        f = report["result"]["f"]
        self.assertAlmostEqual(f[0], 1.0, places=7)
        self.assertAlmostEqual(f[1], 0.0, places=7)

    def test_inverse(self):
        self.assertIn("inverse: verified", self.call("inverse", "--before", "0:2", "--after", "1:1,-1:1"))

    def test_verify_bounds(self):
        output = self.call("verify-bounds", fixture("jordan_block.json"), fixture("perturbation.json"))
        self.assertIn("verify-bounds: verified", output)
        self.assertNotIn("VIOLATED", output)

    def test_trials(self):
        output = self.call("trials", "bounds", "--count", "3", "--size-max", "3", "--seed", "2")
        self.assertIn("trials: verified", output)

    def test_error_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("place", fixture("jordan_block.json"), "--targets", "1:3")
        self.assertEqual(ctx.exception.returncode, EXIT_ERROR)

    def test_unverified_exit_code(self):
        with mock.patch("apps.reports.services.place", side_effect=VerificationFailed("forced")):
            with self.assertRaises(CommandError) as ctx:
                self.call("place", fixture("jordan_block.json"), "--targets", "1:1,-1:1")
        self.assertEqual(ctx.exception.returncode, EXIT_UNVERIFIED)

    def test_missing_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("analyze", fixture("missing.json"))
        self.assertEqual(ctx.exception.returncode, EXIT_ERROR)


class PencilAPITest(APISimpleTestCase):
    """Tests for the pencil endpoints (/api/v1/pencils/...)."""

    def test_analyze(self):
        response = self.client.post(reverse("pencil-analyze"), JORDAN, format="json")
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data["result"]["spectrum"]["M"], 2)

    def test_place(self):
        response = self.client.post(reverse("pencil-place"), {**JORDAN, "targets": "1:1,-1:1"}, format="json")
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertTrue(response.data["result"]["placement"]["verified"])

    def test_place_with_target_list(self):
        body = {**JORDAN, "targets": [["1+i", 1], ["1-i", 1]]}
        response = self.client.post(reverse("pencil-place"), body, format="json")
        self.assertEqual(response.status_code, status.HTTP_200_OK)

    def test_budget_mismatch(self):
        response = self.client.post(reverse("pencil-place"), {**JORDAN, "targets": "1:1"}, format="json")
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data["error"]["code"], "budget_mismatch")

    def test_ragged_matrix(self):
        response = self.client.post(reverse("pencil-wcf"), {**JORDAN, "E": [[1], [0, 1]]}, format="json")
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_verification_failure(self):
        with mock.patch("apps.reports.services.place", side_effect=VerificationFailed("forced")):
            response = self.client.post(reverse("pencil-place"), {**JORDAN, "targets": "1:1,-1:1"}, format="json")
        self.assertEqual(response.status_code, status.HTTP_409_CONFLICT)

    def test_restricted_and_bounds_routes(self):
        response = self.client.post(
            reverse("pencil-place-restricted"), {**JORDAN, "v": [0, -1], "targets": "-1:1,-2:1"}, format="json"
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        body = {"pencil": JORDAN, "rank_one": {"F": [[1, 1], [0, 0]], "G": [[-1, -1], [-1, -1]]}}
        response = self.client.post(reverse("pencil-verify-bounds"), body, format="json")
        self.assertEqual(response.status_code, status.HTTP_200_OK)

    def test_schema(self):
        response = self.client.get(reverse("schema"))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
