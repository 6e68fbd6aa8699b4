#!/usr/bin/env python3
"""Scenario documents, the verification runner, intersection signatures and the command line."""

import os

import pytest
import yaml
from typer.testing import CliRunner

from core.exceptions import DimensionMismatchError, ScenarioError, SimplicialError
from main import app
from modules.cli import (form_signature, fundamental_class, intersection_signature, load_scenario, parse_scenario,
                         run_verification, serialize_scenario)
from modules.simplicial_geometry import OrderedComplex

ROOT = os.path.dirname(os.path.abspath(__file__))
SCENARIOS = os.path.join(ROOT, "data", "scenarios")

E8 = [[2, -1, 0, 0, 0, 0, 0, 0], [-1, 2, -1, 0, 0, 0, 0, 0], [0, -1, 2, -1, 0, 0, 0, -1],
      [0, 0, -1, 2, -1, 0, 0, 0], [0, 0, 0, -1, 2, -1, 0, 0], [0, 0, 0, 0, -1, 2, -1, 0],
      [0, 0, 0, 0, 0, -1, 2, 0], [0, 0, -1, 0, 0, 0, 0, 2]]

CORRUPTED = """\
chain C integers
  rank 0 1
  rank 1 1
  d 1 : 1
end
quadratic Q on C dim 1
  psi 0 0 : 1
end
command verify_complex C
command verify_quadratic Q
"""


def block_diagonal(*blocks):
    size = sum(len(b) for b in blocks)
    out = [[0] * size for _ in range(size)]
    at = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[at + i][at:at + len(row)] = row
        at += len(b)
    return out


@pytest.fixture(scope="module")
def cp2():
    return load_scenario(os.path.join(SCENARIOS, "cp2.skn")).objects["CP2"]


# parsing

def test_empty_document():
    doc = parse_scenario("# nothing here\n\n")
    assert doc.is_empty()
    assert serialize_scenario(doc) == ""


def test_definition_and_command():
    doc = parse_scenario("complex S boundary 3\ncommand homology S betti=1,0,1\n")
    assert doc.kind_of("S") == "complex"
    assert len(doc.commands) == 1
    assert doc.commands[0].target == "S"
    assert doc.commands[0].params == {"betti": "1,0,1"}
    assert doc.objects["S"].dimension == 2


def test_undefined_identifier_reports_line_and_column():
    with pytest.raises(ScenarioError, match="undefined identifier 'T'") as info:
        parse_scenario("complex S boundary 2\ncommand homology T\n")
    assert info.value.line == 2
    assert info.value.column == 18


def test_undefined_reference_inside_a_definition():
    with pytest.raises(ScenarioError, match="undefined identifier 'D'") as info:
        parse_scenario("quadratic Q on D dim 0\n  psi 0 0 : 1\nend\n")
    assert info.value.line == 1
    assert info.value.column == 16


@pytest.mark.parametrize("text, fragment", [
    ("sphere S 3\n", "unknown keyword"),
    ("complex S boundary 3\ncomplex S cycle 4\n", "already defined"),
    ("form F degree 0\n  1\n", "never closed"),
    ("complex S boundary 3\ncommand homology S colour=red\n", "no parameter 'colour'"),
    ("command frobnicate\n", "unknown command"),
    ("ring R integers\ncommand homology R\n", "is a ring"),
    ("command homology\n", "needs a target"),
    ("form F degree 0\n  1 2\nend\n", "not a square matrix"),
    ("chain C integers\n  rank 0 1\n  rank 1 1\n  rank 2 1\n  d 1 : 1\n  d 2 : 1\nend\n", "d∘d = 0"),
    ("complex S boundary 3\ncommand signature S expect=big\n", "expected an integer"),
])
def test_malformed_documents(text, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        parse_scenario(text)


def test_round_trip_of_the_shipped_scenarios():
    for name in sorted(os.listdir(SCENARIOS)):
        doc = load_scenario(os.path.join(SCENARIOS, name))
        again = parse_scenario(serialize_scenario(doc))
        assert again == doc, name


def test_bare_names_resolve_through_the_search_path(monkeypatch):
    monkeypatch.chdir(ROOT)
    doc = load_scenario("transfer")
    assert len(doc.commands) == 3
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario("no_such_scenario")


# signatures

def test_e8_form():
    report = form_signature(E8)
    assert (report.signature, report.positive, report.negative) == (8, 8, 0)
    assert not report.degenerate


def test_signature_is_additive_and_odd_under_negation():
    hyperbolic = [[0, 1], [1, 0]]
    assert form_signature(hyperbolic).signature == 0
    assert form_signature(block_diagonal(E8, hyperbolic, [[-1]])).signature == 7
    assert form_signature([[-x for x in row] for row in E8]).signature == -8


def test_degenerate_form():
    report = form_signature([[1, 1], [1, 1]])
    assert (report.signature, report.rank, report.degenerate) == (1, 1, True)


def test_form_signature_rejects_asymmetric_input():
    with pytest.raises(DimensionMismatchError):
        form_signature([[1, 2], [0, 1]])
    with pytest.raises(DimensionMismatchError):
        form_signature([[1, 2]])


def test_sphere_has_zero_signature():
    report = intersection_signature(OrderedComplex.simplex_boundary(5))
    assert report.signature == 0
    assert report.middle_betti == 0


def test_cp2_signature_is_a_unit(cp2):
    report = intersection_signature(cp2)
    assert abs(report.signature) == 1
    assert report.middle_betti == 1
    assert not report.degenerate
    assert intersection_signature(cp2, reverse=True).signature == -report.signature


def test_opposite_orientation_negates(cp2):
    eps = fundamental_class(cp2)
    flipped = {t: -v for t, v in eps.items()}
    assert intersection_signature(cp2, flipped).signature == -intersection_signature(cp2, eps).signature


def test_fundamental_class_is_a_cycle():
    M = OrderedComplex.simplex_boundary(3)
    eps = fundamental_class(M)
    assert eps[min(eps)] == 1
    assert set(eps.values()) <= {1, -1}


def test_signature_needs_dimension_divisible_by_four():
    with pytest.raises(SimplicialError, match="4k"):
        intersection_signature(OrderedComplex.simplex_boundary(3))


def test_open_complex_has_no_fundamental_class():
    with pytest.raises(SimplicialError):
        fundamental_class(OrderedComplex.from_facets([(0, 1, 2), (1, 2, 3)]))


def test_bad_orientation_data():
    M = OrderedComplex.simplex_boundary(5)
    with pytest.raises(SimplicialError):
        intersection_signature(M, {t: 1 for t in M.of_dim(4)})


# verification runs

def test_corrupted_quadratic_is_localized():
    report = run_verification(parse_scenario(CORRUPTED), seed=0, count=1)
    assert not report.passed
    complex_check, quadratic_check = report.commands
    assert complex_check.passed
    assert not quadratic_check.passed
    first = quadratic_check.failures[0]
    assert (first["s"], first["r"]) == (0, 0)


def test_named_checks_pass():
    doc = parse_scenario("complex S2 boundary 3\ncomplex S4 boundary 5\n"
                         "command homology S2 betti=1,0,1\n"
                         "command dual_incidence S2\n"
                         "command signature S4 expect=0\n")
    report = run_verification(doc, seed=3, count=2)
    assert report.passed, report.to_yaml()


def test_wrong_expectation_fails():
    doc = parse_scenario("complex S2 boundary 3\ncommand homology S2 betti=1,1,1\n")
    report = run_verification(doc, seed=3, count=2)
    assert not report.passed
    assert report.commands[0].failures == [{"degree": 1, "expected": 1, "found": 0}]


def test_runs_are_deterministic():
    doc = parse_scenario("ring Z integers\ntransfer T cyclic 3\n"
                         "command suspension_laws Z\ncommand domination Z\ncommand transfer_laws T\n")
    first = run_verification(doc, seed=11, count=3, timing=False)
    second = run_verification(doc, seed=11, count=3, timing=False)
    assert first.passed
    assert first.to_yaml() == second.to_yaml()


def test_report_layout():
    doc = parse_scenario("complex S2 boundary 3\ncommand verify_complex S2\n")
    data = yaml.safe_load(run_verification(doc, seed=5, count=1, timing=False).to_yaml())
    assert list(data) == ["manifest_version", "seed", "count", "status", "commands"]
    assert data["seed"] == 5
    assert data["commands"][0]["status"] == "pass"
    assert yaml.safe_load(run_verification(doc, seed=5, count=1).render("json"))["status"] == "pass"


# command line

def test_cli_verify_machine_report(tmp_path):
    path = tmp_path / "ok.skn"
    path.write_text("complex S2 boundary 3\ncommand homology S2 betti=1,0,1\n", encoding="utf-8")
    out = tmp_path / "report.yaml"
    result = CliRunner().invoke(app, ["verify", str(path), "--machine", "--seed", "4", "-o", str(out)])
    assert result.exit_code == 0
    data = yaml.safe_load(result.stdout)
    assert data["status"] == "pass"
    assert data["seed"] == 4
    assert out.read_text(encoding="utf-8") == result.stdout


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.skn"
    bad.write_text("command homology Missing\n", encoding="utf-8")
    assert CliRunner().invoke(app, ["verify", str(bad)]).exit_code == 2
    assert CliRunner().invoke(app, ["verify", os.path.join(SCENARIOS, "corrupted.skn"),
                                    "--machine"]).exit_code == 1


def test_cli_signature_table():
    result = CliRunner().invoke(app, ["signature", os.path.join(SCENARIOS, "forms.skn"), "--name", "E8"])
    assert result.exit_code == 0
    assert "E8" in result.stdout


KBASED = """\
complex I path 1
kbased D on I {variance}
  gen a 0 : 0 1
  gen b 1 : 0
  gen c 0 : 1
  d a b 1
end
decomposition P product I
command homology D betti=1,0
command duality_axioms D
command partition P
"""


def test_k_based_definitions():
    doc = parse_scenario(KBASED.format(variance="covariant"))
    assert len(doc.objects["D"]) == 3
    report = run_verification(doc, seed=2, count=1)
    assert report.passed, report.to_yaml()


def test_k_based_definition_must_be_triangular():
    with pytest.raises(ScenarioError, match="triangular") as info:
        parse_scenario(KBASED.format(variance="contravariant"))
    assert info.value.line == 2


def test_k_based_generator_needs_a_host_simplex():
    with pytest.raises(ScenarioError, match="not a simplex") as info:
        parse_scenario("complex I path 1\nkbased D on I covariant\n  gen a 0 : 0 2\nend\n")
    assert (info.value.line, info.value.column) == (3, 13)


STRUCTURES = """\
complex I path 1
complex C3 cycle 3
decomposition P product I
cover H cyclic 3 2
command local_dual count=3
command product_pairs P count=1
command restrict_to_l P count=1
command cylinder P count=1
command cover_pair P count=1
command cover_pair H count=1
command partial_assembly H count=1
command infinite_transfer H count=1
command dual_exchange C3 count=2
"""


def test_structure_commands_pass():
    report = run_verification(parse_scenario(STRUCTURES), seed=7, count=1, timing=False)
    assert report.passed, report.to_yaml()
    assert [c.details["checked"] for c in report.commands] == [3, 1, 1, 1, 1, 1, 1, 1, 2]


def test_cover_pair_over_a_split_cover():
    doc = parse_scenario("complex I path 0\ndecomposition P product I\ncommand cover_pair P sheets=2 count=1\n")
    assert run_verification(doc, seed=1, count=1).passed


def test_structure_commands_check_their_targets():
    with pytest.raises(ScenarioError, match="needs a decomposition") as info:
        parse_scenario("complex I path 1\ncommand cylinder I\n")
    assert (info.value.line, info.value.column) == (2, 18)
    with pytest.raises(ScenarioError, match="needs a target"):
        parse_scenario("command infinite_transfer\n")
    with pytest.raises(ScenarioError, match="no parameter 'sheets'"):
        parse_scenario("complex I path 1\ncommand local_dual I sheets=2\n")


def test_split_cover_definition():
    doc = parse_scenario("complex C3 cycle 3\ncover H split C3 3\n")
    cover = doc.objects["H"]
    assert cover.order == 3
    assert len(cover.total) == 3 * len(cover.base)
