import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from amrkit.linearize import delinearize, from_line, linearize, to_line, validate_linear
from amrkit.repair import FALLBACK, repair, repair_pass_report, repair_with_report

from .helpers import random_graph

ALPHABET = [
    "(",
    ")",
    ":ARG0",
    ":ARG1",
    ":op1",
    ":mod",
    "want-01",
    "boy",
    "go-02",
    "-",
    '"New York"',
    "<V0>",
    "<V1>",
    "<V2>",
    "<V5>",
]

fuzz_tokens = st.lists(st.sampled_from(ALPHABET), max_size=200)


class TestFixtures:
    def test_parity_restoration(self):
        got = repair(from_line("( <V0> want-01 :ARG0 ( <V1> boy"))
        assert to_line(got) == "( <V0> want-01 :ARG0 ( <V1> boy ) )"

    def test_parity_restoration_report(self):
        rep = repair_pass_report(from_line("( <V0> want-01 :ARG0 ( <V1> boy"))
        assert rep.parens_added == 2
        assert rep.parens_dropped == 0
        assert rep.segments_removed == 0
        assert rep.concepts_inserted == 0
        assert rep.vars_renumbered == 0
        assert not rep.fell_back

    def test_valid_input_unchanged(self):
        tokens = from_line("( <V0> want-01 :ARG0 ( <V1> boy ) )")
        fixed, rep = repair_with_report(tokens)
        assert fixed == tokens
        assert rep.as_dict() == {
            "parens_added": 0,
            "parens_dropped": 0,
            "segments_removed": 0,
            "concepts_inserted": 0,
            "vars_renumbered": 0,
            "fell_back": False,
        }

    def test_dangling_relation_removed(self):
        tokens = from_line("( <V0> want-01 :ARG0 :ARG1 ( <V1> boy ) )")
        fixed, rep = repair_with_report(tokens)
        assert to_line(fixed) == "( <V0> want-01 :ARG1 ( <V1> boy ) )"
        assert rep.segments_removed == 1
        assert rep.parens_added == 0 and rep.concepts_inserted == 0


class TestScenarios:
    def test_empty_input_falls_back(self):
        fixed, rep = repair_with_report([])
        assert fixed == FALLBACK
        assert rep.fell_back

    def test_garbage_falls_back(self):
        assert repair(["boy", "girl"]) == FALLBACK

    def test_unmatched_close_dropped(self):
        fixed, rep = repair_with_report(from_line(") ( <V0> cat ) )"))
        assert to_line(fixed) == "( <V0> cat )"
        assert rep.parens_dropped == 2

    def test_missing_concept_inserted(self):
        fixed, rep = repair_with_report(from_line("( <V0> :ARG0 ( <V1> boy ) )"))
        assert to_line(fixed) == "( <V0> amr-unknown :ARG0 ( <V1> boy ) )"
        assert rep.concepts_inserted == 1

    def test_missing_variable_minted(self):
        fixed, _ = repair_with_report(from_line("( boy )"))
        assert to_line(fixed) == "( <V0> boy )"

    def test_duplicate_definition_renumbered(self):
        fixed, rep = repair_with_report(from_line("( <V0> a :ARG0 ( <V0> b ) )"))
        assert to_line(fixed) == "( <V0> a :ARG0 ( <V1> b ) )"
        assert rep.vars_renumbered == 1

    def test_noncanonical_indices_renumbered(self):
        fixed, rep = repair_with_report(from_line("( <V5> a :ARG0 ( <V2> b :ARG1 <V5> ) )"))
        assert to_line(fixed) == "( <V0> a :ARG0 ( <V1> b :ARG1 <V0> ) )"
        assert rep.vars_renumbered == 3

    def test_undefined_reference_dropped_with_its_relation(self):
        fixed, _ = repair_with_report(from_line("( <V0> a :ARG0 <V5> :ARG1 ( <V1> b ) )"))
        assert to_line(fixed) == "( <V0> a :ARG1 ( <V1> b ) )"

    def test_second_top_level_group_dropped(self):
        fixed, _ = repair_with_report(from_line("( <V0> a ) ( <V1> b )"))
        assert to_line(fixed) == "( <V0> a )"

    def test_empty_group_removed(self):
        fixed, _ = repair_with_report(from_line("( <V0> a :ARG0 ( ) )"))
        assert to_line(fixed) == "( <V0> a )"

    def test_stray_value_without_relation_dropped(self):
        fixed, _ = repair_with_report(from_line("( <V0> a boy )"))
        assert to_line(fixed) == "( <V0> a )"

    def test_fallback_delinearizes(self):
        g = delinearize(FALLBACK)
        assert g.node(g.root).concept == "amr-empty"


class TestProperties:
    @given(fuzz_tokens)
    @settings(max_examples=300, deadline=None)
    def test_totality(self, tokens):
        fixed = repair(tokens)
        delinearize(fixed)  # must not raise

    @given(fuzz_tokens)
    @settings(max_examples=300, deadline=None)
    def test_idempotence(self, tokens):
        once = repair(tokens)
        assert repair(once) == once

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=150, deadline=None)
    def test_conservativity_on_valid_sequences(self, seed):
        g = random_graph(np.random.RandomState(seed))
        tokens = linearize(g)
        fixed, rep = repair_with_report(tokens)
        assert fixed == tokens
        assert rep.as_dict()["fell_back"] is False
        assert sum(v for k, v in rep.as_dict().items() if k != "fell_back") == 0

    @given(fuzz_tokens)
    @settings(max_examples=200, deadline=None)
    def test_output_always_valid(self, tokens):
        assert validate_linear(repair(tokens))
