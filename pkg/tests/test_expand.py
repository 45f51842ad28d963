import random

import pytest

from conftest import fixture_text
from oracle import oracle_expand
from ottrkit import (
    ExpansionContext,
    Instance,
    Iri,
    ListTerm,
    Literal,
    NONE,
    Triple,
    TripleGraph,
    parse_instances,
    parse_library,
)
from ottrkit.expand import (
    ArityMismatchError,
    DepthExceededError,
    ExpandAllError,
    InvalidTripleError,
    SignatureOnlyTemplateError,
    UnknownTemplateError,
    expand_all,
    expand_instance,
    filter_published,
    provenance_expand,
)
from ottrkit.terms import OTTR_TRIPLE, Blank
from randlib import random_ground_instance, random_library

EX = """
@prefix ex: <http://ex.org/t/> .
@prefix ottr: <http://ns.ottr.xyz/0.4/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
"""

A = Iri("http://ex.org/t/a")
B = Iri("http://ex.org/t/b")
C = Iri("http://ex.org/t/c")
P = Iri("http://ex.org/t/p")


def ctx(lib, counter=0):
    return ExpansionContext(lib, counter)


class TestExpandInstance:
    def test_base_template_emits_its_arguments(self):
        lib = parse_library(EX)
        graph = expand_instance(Instance(Iri(OTTR_TRIPLE), [A, P, B]), ctx(lib))
        assert graph.triples == frozenset({Triple(A, P, B)})

    def test_margherita(self, pizza_library):
        insts = parse_instances(fixture_text("margherita.instances"), pizza_library)
        graph = expand_instance(insts[0], ctx(pizza_library))
        m = Iri("http://ex.org/p/Margherita")
        assert graph.triples == frozenset({
            Triple(m, Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"),
                   Iri("http://www.w3.org/2002/07/owl#Class")),
            Triple(m, Iri("http://www.w3.org/2000/01/rdf-schema#subClassOf"),
                   Iri("http://tpl.ex.org/pizza/Pizza")),
            Triple(m, Iri("http://www.w3.org/2000/01/rdf-schema#label"),
                   Literal("Margherita", language="en")),
        })

    def test_cross_product_of_marked_lists(self):
        lib = parse_library(EX)
        inst = Instance(Iri(OTTR_TRIPLE), [ListTerm([A, B]), P, ListTerm([C])], "cross")
        graph = expand_instance(inst, ctx(lib))
        assert graph.triples == frozenset({Triple(A, P, C), Triple(B, P, C)})

    def test_domain_range_macro(self, axiom_library):
        inst = parse_instances(
            "@prefix ax: <http://tpl.ex.org/owl/axiom/> .\n"
            "@prefix pz: <http://tpl.ex.org/pizza/> .\n"
            "ax:DomainRange(pz:hasTopping, pz:Pizza, pz:Topping) .",
            axiom_library,
        )[0]
        graph = expand_instance(inst, ctx(axiom_library))
        ht = Iri("http://tpl.ex.org/pizza/hasTopping")
        assert graph.triples == frozenset({
            Triple(ht, Iri("http://www.w3.org/2000/01/rdf-schema#domain"),
                   Iri("http://tpl.ex.org/pizza/Pizza")),
            Triple(ht, Iri("http://www.w3.org/2000/01/rdf-schema#range"),
                   Iri("http://tpl.ex.org/pizza/Topping")),
        })

    def test_none_discards_innermost_instance_only(self):
        lib = parse_library(
            EX
            + "ex:Strict[?x] :: { ottr:Triple(?x, ex:p, ex:keep) } .\n"
            + "ex:T[? ?x] :: { ex:Strict(?x), ottr:Triple(ex:s, ex:p, ex:always) } .\n"
        )
        graph = expand_instance(
            Instance(Iri("http://ex.org/t/T"), [NONE]), ctx(lib)
        )
        assert graph.triples == frozenset({
            Triple(Iri("http://ex.org/t/s"), P, Iri("http://ex.org/t/always")),
        })

    def test_top_level_none_to_non_optional_discards_instance(self):
        lib = parse_library(EX + "ex:T[?x] :: { ottr:Triple(?x, ex:p, ex:o) } .\n")
        graph = expand_instance(Instance(Iri("http://ex.org/t/T"), [NONE]), ctx(lib))
        assert len(graph) == 0

    def test_default_fills_none(self):
        lib = parse_library(
            EX + "ex:T[?x = ex:fallback] :: { ottr:Triple(?x, ex:p, ex:o) } .\n"
        )
        graph = expand_instance(Instance(Iri("http://ex.org/t/T"), [NONE]), ctx(lib))
        assert graph.triples == frozenset({
            Triple(Iri("http://ex.org/t/fallback"), P, Iri("http://ex.org/t/o")),
        })

    def test_zipmin_and_zipmax(self):
        lib = parse_library(EX)
        lists = [ListTerm([A, B]), P, ListTerm([C])]
        zmin = expand_instance(Instance(Iri(OTTR_TRIPLE), lists, "zipMin"), ctx(lib))
        assert zmin.triples == frozenset({Triple(A, P, C)})
        # zipMax pads the short list with none, and none on a non-optional
        # parameter discards the padded instance.
        zmax = expand_instance(Instance(Iri(OTTR_TRIPLE), lists, "zipMax"), ctx(lib))
        assert zmax.triples == frozenset({Triple(A, P, C)})

    def test_zipmax_padding_uses_defaults(self):
        lib = parse_library(
            EX
            + "ex:Pair[?x, ?y = ex:dflt] :: { ottr:Triple(?x, ex:p, ?y) } .\n"
        )
        inst = Instance(
            Iri("http://ex.org/t/Pair"), [ListTerm([A, B]), ListTerm([C])], "zipMax",
        )
        graph = expand_instance(inst, ctx(lib))
        assert graph.triples == frozenset({
            Triple(A, P, C),
            Triple(B, P, Iri("http://ex.org/t/dflt")),
        })

    def test_blank_nodes_freshened_per_counter(self):
        lib = parse_library(
            EX + "ex:T[?x] :: { ottr:Triple(_:node, ex:p, ?x) } .\n"
        )
        inst = Instance(Iri("http://ex.org/t/T"), [A])
        g0 = expand_instance(inst, ctx(lib, 0))
        g7 = expand_instance(inst, ctx(lib, 7))
        assert {t.subject for t in g0} == {Blank("b0_node")}
        assert {t.subject for t in g7} == {Blank("b7_node")}

    def test_empty_marked_list_yields_empty_graph(self):
        lib = parse_library(EX)
        inst = Instance(Iri(OTTR_TRIPLE), [ListTerm([]), P, ListTerm([C])], "cross")
        assert len(expand_instance(inst, ctx(lib))) == 0


class TestExpandErrors:
    def test_unknown_template(self):
        lib = parse_library(EX)
        with pytest.raises(UnknownTemplateError):
            expand_instance(Instance(Iri("http://ex.org/t/Ghost"), []), ctx(lib))

    def test_signature_only(self):
        lib = parse_library(EX + "ex:Sig[?x] .\n")
        with pytest.raises(SignatureOnlyTemplateError):
            expand_instance(Instance(Iri("http://ex.org/t/Sig"), [A]), ctx(lib))

    def test_arity_mismatch(self):
        lib = parse_library(EX + "ex:T[?x] :: { ottr:Triple(?x, ex:p, ex:o) } .\n")
        with pytest.raises(ArityMismatchError):
            expand_instance(Instance(Iri("http://ex.org/t/T"), [A, B]), ctx(lib))

    def test_depth_exceeded_on_unchecked_cyclic_library(self):
        lib = parse_library(fixture_text("cycle.stottr"))
        with pytest.raises(DepthExceededError):
            expand_instance(Instance(Iri("http://tpl.ex.org/cyc/A"), [A]), ctx(lib))

    def test_literal_subject_is_invalid(self):
        lib = parse_library(EX)
        with pytest.raises(InvalidTripleError):
            expand_instance(Instance(Iri(OTTR_TRIPLE), [Literal("x"), P, A]), ctx(lib))

    def test_expand_all_aggregates_with_indices(self):
        lib = parse_library(EX + "ex:T[?x] :: { ottr:Triple(?x, ex:p, ex:o) } .\n")
        good = Instance(Iri("http://ex.org/t/T"), [A])
        bad = Instance(Iri("http://ex.org/t/Ghost"), [])
        with pytest.raises(ExpandAllError) as err:
            expand_all([good, bad, good, bad], ctx(lib))
        assert [i for i, _ in err.value.failures] == [1, 3]


class TestExpandAll:
    def test_empty_list(self, pizza_library):
        assert len(expand_all([], ctx(pizza_library))) == 0

    def test_duplicate_instances_are_idempotent(self, pizza_library):
        insts = parse_instances(fixture_text("margherita.instances"), pizza_library)
        doubled = insts + insts
        assert expand_all(doubled, ctx(pizza_library)) == expand_all(insts, ctx(pizza_library))

    def test_two_pizzas_give_six_triples(self, pizza_library):
        text = (
            "@prefix p: <http://ex.org/p/> .\n"
            "@prefix pz: <http://tpl.ex.org/pizza/> .\n"
            'pz:Pizza(p:Margherita, "Margherita"@en) .\n'
            'pz:Pizza(p:Hawaii, "Hawaii"@en) .\n'
        )
        insts = parse_instances(text, pizza_library)
        assert len(expand_all(insts, ctx(pizza_library))) == 6

    def test_homomorphism_with_counter_offsets(self):
        for seed in range(15):
            rng = random.Random(seed)
            lib = random_library(rng)
            instances = [
                i for i in (random_ground_instance(rng, lib) for _ in range(6)) if i is not None
            ]
            xs, ys = instances[:3], instances[3:]
            combined = expand_all(xs + ys, ctx(lib))
            split = expand_all(xs, ctx(lib, 0)) | expand_all(ys, ctx(lib, len(xs)))
            assert combined == split

    def test_defaults_equal_explicit_values(self):
        lib = parse_library(
            EX + "ex:T[?x = ex:fallback, ?y] :: { ottr:Triple(?x, ex:p, ?y) } .\n"
        )
        t = Iri("http://ex.org/t/T")
        with_none = expand_all([Instance(t, [NONE, A])], ctx(lib))
        with_value = expand_all([Instance(t, [Iri("http://ex.org/t/fallback"), A])], ctx(lib))
        assert with_none == with_value

    def test_cross_cardinality(self):
        lib = parse_library(
            EX
            + "ex:Pair[?a, ?b] :: { ottr:Triple(?a, ex:p, ?b), ottr:Triple(?a, ex:q, ?b) } .\n"
        )
        xs = ListTerm([A, B, C])
        ys = ListTerm([Iri("http://ex.org/t/y1"), Iri("http://ex.org/t/y2")])
        inst = Instance(Iri("http://ex.org/t/Pair"), [xs, ys], "cross")
        graph = expand_instance(inst, ctx(lib))
        assert len(graph) == 3 * 2 * 2


class TestProvenance:
    def test_single_instance_maps_to_zero(self, pizza_library):
        insts = parse_instances(fixture_text("margherita.instances"), pizza_library)
        pairs = provenance_expand(insts, ctx(pizza_library))
        assert len(pairs) == 3
        assert all(producers == frozenset({0}) for _, producers in pairs)

    def test_shared_triple_maps_to_both(self):
        lib = parse_library(EX)
        inst = Instance(Iri(OTTR_TRIPLE), [A, P, B])
        pairs = provenance_expand([inst, inst], ctx(lib))
        assert pairs == [(Triple(A, P, B), frozenset({0, 1}))]

    def test_disjoint_producers_are_singletons(self):
        lib = parse_library(EX)
        pairs = provenance_expand(
            [Instance(Iri(OTTR_TRIPLE), [A, P, B]), Instance(Iri(OTTR_TRIPLE), [B, P, C])],
            ctx(lib),
        )
        assert all(len(producers) == 1 for _, producers in pairs)

    def test_projection_equals_expand_all(self):
        for seed in range(10):
            rng = random.Random(seed)
            lib = random_library(rng)
            instances = [
                i for i in (random_ground_instance(rng, lib) for _ in range(5)) if i is not None
            ]
            pairs = provenance_expand(instances, ctx(lib))
            assert TripleGraph(t for t, _ in pairs) == expand_all(instances, ctx(lib))


class TestOracleEquivalence:
    def test_random_libraries_match_oracle(self):
        for seed in range(60):
            rng = random.Random(seed)
            lib = random_library(rng)
            instances = [
                i for i in (random_ground_instance(rng, lib) for _ in range(5)) if i is not None
            ]
            got = expand_all(instances, ctx(lib)).triples
            want = oracle_expand(instances, lib)
            assert got == frozenset(want), f"seed {seed}"


class TestPublishedFilter:
    def test_filter_drops_internal_data(self):
        lib = parse_library(
            EX
            + "ex:T[ottr:IRI ?s, xsd:string ?publicationStatus] :: "
            + "{ ottr:Triple(?s, ex:p, ex:o) } .\n"
        )
        t = Iri("http://ex.org/t/T")
        published = Instance(t, [A, Literal("published")])
        internal = Instance(t, [B, Literal("internal")])
        assert filter_published([published, internal], lib) == [published]

    def test_templates_without_status_param_pass(self, pizza_library):
        insts = parse_instances(fixture_text("margherita.instances"), pizza_library)
        assert filter_published(insts, pizza_library) == insts
