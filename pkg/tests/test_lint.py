import random

from conftest import fixture_text
from ottrkit import ExpansionContext, Instance, Iri, Literal, parse_instances, parse_library
from ottrkit.expand import expand_instance
from ottrkit.lint import (
    LintConfig,
    NamingRule,
    findings_report,
    has_lint_errors,
    lint_axiom_encapsulation,
    lint_headers,
    lint_instantiation_redundancy,
    lint_output_redundancy,
    render_findings,
)
from ottrkit.terms import OTTR_TRIPLE, XSD_NS
from randlib import random_ground_instance, random_library

EX = """
@prefix ex: <http://ex.org/t/> .
@prefix ottr: <http://ns.ottr.xyz/0.4/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
"""

A = Iri("http://ex.org/t/a")
B = Iri("http://ex.org/t/b")
P = Iri("http://ex.org/t/p")


class TestOutputRedundancy:
    def test_shared_triple_flagged_once(self, redundancy_library):
        insts = parse_instances(fixture_text("redundancy_shared.instances"), redundancy_library)
        findings = lint_output_redundancy(insts, redundancy_library)
        assert len(findings) == 1
        assert findings[0].rule == "R_OUTPUT_REDUNDANCY"
        assert findings[0].severity == "warning"
        assert findings[0].subjects == ("0", "1")

    def test_disjoint_instances_clean(self, redundancy_library):
        insts = parse_instances(fixture_text("redundancy_disjoint.instances"), redundancy_library)
        assert lint_output_redundancy(insts, redundancy_library) == []

    def test_three_producers_in_one_finding(self):
        lib = parse_library(EX)
        inst = Instance(Iri(OTTR_TRIPLE), [A, P, B])
        findings = lint_output_redundancy([inst, inst, inst], lib)
        assert len(findings) == 1
        assert findings[0].subjects == ("0", "1", "2")

    def test_agrees_with_pairwise_intersection_oracle(self):
        for seed in range(12):
            rng = random.Random(seed)
            lib = random_library(rng)
            instances = [
                i for i in (random_ground_instance(rng, lib) for _ in range(5)) if i is not None
            ]
            graphs = [
                expand_instance(inst, ExpansionContext(lib, i)).triples
                for i, inst in enumerate(instances)
            ]
            overlapping = set()
            for i in range(len(graphs)):
                for j in range(i + 1, len(graphs)):
                    overlapping |= graphs[i] & graphs[j]
            findings = lint_output_redundancy(instances, lib)
            assert len(findings) == len(overlapping), f"seed {seed}"


class TestInstantiationRedundancy:
    def test_byte_identical_instances(self):
        inst = Instance(Iri(OTTR_TRIPLE), [A, P, B])
        findings = lint_instantiation_redundancy([inst, inst])
        assert [f.rule for f in findings] == ["R_INSTANCE_DUPLICATE"]
        assert findings[0].subjects == ("0", "1")

    def test_shared_value_at_threshold(self):
        value = Literal("21.5", XSD_NS + "double")
        instances = [
            Instance(Iri(OTTR_TRIPLE), [A, P, value]),
            Instance(Iri(OTTR_TRIPLE), [B, P, value]),
            Instance(Iri(OTTR_TRIPLE), [Iri("http://ex.org/t/c"), P, value]),
        ]
        findings = lint_instantiation_redundancy(instances, LintConfig(shared_value_threshold=3))
        shared = [f for f in findings if f.rule == "R_SHARED_VALUE"]
        assert len(shared) == 1
        assert shared[0].severity == "info"
        assert shared[0].subjects == ("0", "1", "2")

    def test_all_distinct_clean(self):
        instances = [
            Instance(Iri(OTTR_TRIPLE), [A, P, Literal("one")]),
            Instance(Iri(OTTR_TRIPLE), [B, P, Literal("two")]),
        ]
        assert lint_instantiation_redundancy(instances) == []

    def test_shared_iri_not_reported(self):
        instances = [
            Instance(Iri(OTTR_TRIPLE), [A, P, B]),
            Instance(Iri(OTTR_TRIPLE), [Iri("http://ex.org/t/c"), P, B]),
            Instance(Iri(OTTR_TRIPLE), [Iri("http://ex.org/t/d"), P, B]),
        ]
        assert lint_instantiation_redundancy(instances) == []


class TestAxiomEncapsulation:
    def test_two_definers_flagged(self):
        lib = parse_library(fixture_text("axiom_scatter.stottr"))
        findings = lint_axiom_encapsulation(lib)
        assert len(findings) == 1
        finding = findings[0]
        assert finding.rule == "R_AXIOM_SCATTER"
        assert finding.severity == "error"
        assert set(finding.subjects) == {"pz:ToppingDomain", "pz:ToppingRange"}
        assert "hasTopping" in finding.message

    def test_encapsulating_template_keeps_single_owner(self):
        lib = parse_library(fixture_text("axiom_encapsulated.stottr"))
        assert lint_axiom_encapsulation(lib) == []

    def test_library_without_axioms(self, pizza_library):
        # pz:Pizza emits rdfs:subClassOf about its ?name parameter, which is
        # not ground, so nothing is attributed.
        assert lint_axiom_encapsulation(pizza_library) == []

    def test_ground_subclassof_counts_as_axiom(self):
        lib = parse_library(
            EX
            + "ex:T1[] :: { ottr:Triple(ex:Sub, <http://www.w3.org/2000/01/rdf-schema#subClassOf>, ex:S1) } .\n"
            + "ex:T2[] :: { ottr:Triple(ex:Sub, <http://www.w3.org/2000/01/rdf-schema#subClassOf>, ex:S2) } .\n"
        )
        findings = lint_axiom_encapsulation(lib)
        assert len(findings) == 1

    def test_custom_predicate_set(self):
        lib = parse_library(
            EX
            + "ex:T1[] :: { ottr:Triple(ex:Sub, ex:special, ex:S1) } .\n"
            + "ex:T2[] :: { ottr:Triple(ex:Sub, ex:special, ex:S2) } .\n"
        )
        assert lint_axiom_encapsulation(lib) == []
        config = LintConfig(axiom_predicates=frozenset({"http://ex.org/t/special"}))
        assert len(lint_axiom_encapsulation(lib, config)) == 1


class TestHeaders:
    def test_param_count_over_threshold(self):
        params = ", ".join(f"?p{i}" for i in range(8))
        lib = parse_library(EX + f"ex:Wide[{params}] .\n")
        findings = lint_headers(lib, LintConfig(param_count_threshold=7))
        assert [f.rule for f in findings] == ["R_PARAM_COUNT"]

    def test_param_count_at_threshold_is_fine(self):
        params = ", ".join(f"?p{i}" for i in range(7))
        lib = parse_library(EX + f"ex:Wide[{params}] .\n")
        assert lint_headers(lib, LintConfig(param_count_threshold=7)) == []

    def test_naming_rule_violation(self):
        lib = parse_library(
            "@prefix ottr: <http://ns.ottr.xyz/0.4/> .\n"
            "@prefix m: <http://ex.org/material/> .\n"
            "m:T[] :: { ottr:Triple(m:Sample_01, <http://ex.org/material/p>, m:ok-name) } .\n"
        )
        config = LintConfig(naming_rules=[
            NamingRule("http://ex.org/material/", r"^[a-z0-9-]+$"),
        ])
        findings = lint_headers(lib, config)
        naming = [f for f in findings if f.rule == "R_NAMING"]
        assert [f.subjects[0] for f in naming] == ["<http://ex.org/material/Sample_01>", "<http://ex.org/material/T>"]

    def test_no_rules_no_naming_findings(self, pizza_library):
        assert [f for f in lint_headers(pizza_library) if f.rule == "R_NAMING"] == []


class TestReporting:
    def test_findings_deterministic(self, redundancy_library):
        insts = parse_instances(fixture_text("redundancy_shared.instances"), redundancy_library)
        first = lint_output_redundancy(insts, redundancy_library)
        second = lint_output_redundancy(insts, redundancy_library)
        assert first == second

    def test_render_format(self):
        lib = parse_library(fixture_text("axiom_scatter.stottr"))
        text = render_findings(lint_axiom_encapsulation(lib))
        assert text.startswith("error R_AXIOM_SCATTER pz:ToppingDomain, pz:ToppingRange:")

    def test_report_keyed_by_rule(self):
        lib = parse_library(fixture_text("axiom_scatter.stottr"))
        findings = lint_axiom_encapsulation(lib)
        report = findings_report(findings)
        assert list(report) == ["R_AXIOM_SCATTER"]
        assert report["R_AXIOM_SCATTER"][0]["severity"] == "error"

    def test_error_detection(self):
        lib = parse_library(fixture_text("axiom_scatter.stottr"))
        assert has_lint_errors(lint_axiom_encapsulation(lib))
        assert not has_lint_errors([])
