import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fusecalc import cli
from fusecalc.corpus import scenario_suite
from fusecalc.kernel import HAS_A_AT, IS_A_AT, Int, Var
from fusecalc.strat import (
    FAIL_STRATUM, analyse_rule, check_sbtp, compute_strata,
    dlcall_virtual_dependencies, explain_strata,
)
from fusecalc.syntax import parse_program


def violations_of(text):
    program = parse_program(text)
    return check_sbtp(program, compute_strata(program))


def conditions(text):
    return [v.condition for v in violations_of(text)]


class TestRuleAnalysis:
    def test_pivot_is_leftmost_timed_literal(self):
        rule = parse_program('Loaded(time+1, b) :- Happens(time, Load(b)).').rules[0]
        info = analyse_rule(rule)
        assert not info.static
        assert info.pivot_index == 0 and info.pivot == Var('time')
        assert info.pivot_var == 'time'
        [(_, bounds)] = info.head_bounds
        assert bounds == (1, 1)
        assert info.carry

    def test_integer_pivot(self):
        rule = parse_program('P(4) :- Q(3).').rules[0]
        info = analyse_rule(rule)
        assert info.pivot == Int(3)
        assert info.head_bounds[0][1] == (1, 1)
        assert info.pivot_var is None

    def test_step_bounds_previous_time(self):
        rule = parse_program('P(time) :- Step(time, prev), not P(prev).').rules[0]
        info = analyse_rule(rule)
        negative = [r for r in info.reads if not r.positive]
        assert len(negative) == 1
        assert negative[0].bounds[1] <= -1

    def test_static_rule(self):
        info = analyse_rule(parse_program('A :- B, not C.').rules[0])
        assert info.static
        assert [(r.key, r.positive) for r in info.reads] == [('B', True), ('C', False)]

    def test_implicit_dl_call_reads_dl_atoms_at_pivot(self):
        rule = parse_program('T(time, b) :- B(time, b), tbox ⊨ b : Box.').rules[0]
        keys = {(r.key, r.bounds) for r in analyse_rule(rule).reads}
        assert (IS_A_AT, (0, 0)) in keys and (HAS_A_AT, (0, 0)) in keys


class TestStrata:
    def test_negation_orders_strata(self):
        program = parse_program('Q(time) :- R(time).\n'
                                'P(time) :- R(time), not Q(time).\n')
        strata = compute_strata(program)
        assert strata.of('R') < strata.of('Q') < strata.of('P')
        assert strata.height == 3

    def test_fail_rules_sit_above_everything(self):
        program = parse_program('P(1).\nfail :- P(t).')
        strata = compute_strata(program)
        assert strata.of_rule(program.rules[1]) == FAIL_STRATUM

    def test_unknown_predicates_default_to_zero(self):
        strata = compute_strata(parse_program('A.'))
        assert strata.of('Nowhere') == 0

    def test_strictly_earlier_reads_add_no_edge(self):
        # P at time+1 depends on not P at time: no same-time cycle
        program = parse_program('P(time+1) :- Q(time), not P(time).')
        assert check_sbtp(program, compute_strata(program)) == []

    def test_disjunctive_heads_share_a_stratum(self):
        strata = compute_strata(parse_program('P(time) or Q(time) :- R(time).'))
        assert strata.of('P') == strata.of('Q')

    @pytest.mark.parametrize('s', scenario_suite(), ids=lambda s: s.name)
    def test_strata_are_deterministic(self, s):
        with_prelude = '--no-prelude' not in s.args
        first, _, a = cli.load([s.program], with_prelude)
        _, _, b = cli.load([s.program], with_prelude)
        assert a.stratum == b.stratum
        assert a.pivots == b.pivots
        assert explain_strata(first, a) == explain_strata(first, b)

    def test_strictly_past_reads_may_point_upwards(self):
        # R depends on P, but P only reads R strictly before its pivot
        strata = compute_strata(parse_program('P(time, x) :- Q(time, x), not(R(t, y), t < time).\n'
                                              'R(time, x) :- P(time, x).\n'))
        assert strata.of('P') < strata.of('R')

    def test_explain_strata(self):
        program = parse_program('Q(time) :- R(time).\n'
                                'P(time+1) :- R(time), not Q(time).\n'
                                'fail :- P(t), Q(t).\n')
        text = explain_strata(program, compute_strata(program))
        assert 'stratum 0: P, R' in text
        assert 'rule 1 (line 1): pivot time (literal 1), stratum 1' in text
        assert 'carry' in text
        assert 'fail' in text


class TestViolations:
    def test_same_time_negative_cycle(self):
        vs = violations_of('P(time) :- Q(time), not P(time).')
        assert [v.condition for v in vs] == ['negation']
        assert vs[0].rule_id == 1 and vs[0].line == 1
        assert str(vs[0]).endswith('[negation] in P(time)')

    def test_negation_at_previous_time_is_fine(self):
        assert conditions('P(time) :- Step(time, prev), Q(time), not P(prev).') == []

    def test_head_before_pivot(self):
        assert conditions('P(t) :- Q(time), t < time, R(t).') == ['head-time']

    def test_body_after_pivot(self):
        assert conditions('P(time) :- Q(time), R(time+1).') == ['body-time']

    def test_missing_pivot(self):
        assert conditions('P(t) :- t = 3.') == ['pivot-missing']

    def test_fail_rules_may_negate_anything(self):
        assert conditions('P(1).\nfail :- P(time), not P(time).') == []

    def test_static_negative_cycle(self):
        assert conditions('A :- not B.\nB :- not A.') == ['negation', 'negation']

    def test_negated_read_up_to_the_pivot(self):
        text = ('P(time, x) :- Q(time, x), not(R(t, y), t <= time).\n'
                'R(time, x) :- P(time, x).\n')
        assert conditions(text) == ['negation']

    def test_negated_read_strictly_before_the_pivot(self):
        text = ('P(time, x) :- Q(time, x), not(R(t, y), t < time).\n'
                'R(time, x) :- P(time, x).\n')
        assert conditions(text) == []

    def test_comprehension_reading_its_own_time(self):
        text = ('Last(time, t) :- Tick(time), Reading(t <= time).\n'
                'Reading(time) :- Last(time, t).\n')
        assert conditions(text) == ['negation']

    def test_comprehension_reading_strictly_earlier(self):
        text = ('Last(time, t) :- Tick(time), Reading(t < time).\n'
                'Reading(time) :- Last(time, t).\n')
        assert conditions(text) == []

    def test_negative_dl_call_over_past_aboxes(self):
        text = ('tbox tbox { }\n'
                'ColdBox(time, b) :- b : Box @ time, '
                'not(t < time, (ABOXAT(t), tbox) ⊨ (b, High) : Temp).\n')
        assert conditions(text) == []

    def test_negative_dl_call_over_current_abox(self):
        text = ('tbox tbox { }\n'
                'x : Box @ time :- x : Thing @ time, not tbox ⊨ x : Toy.\n')
        assert conditions(text) == ['negation']


class TestDLDependencies:
    def test_implicit_call_follows_context(self):
        rule = parse_program('T(time, b) :- B(time, b), tbox ⊨ b : Box.').rules[0]
        assert dlcall_virtual_dependencies(rule) == [(IS_A_AT, '+'), (HAS_A_AT, '+')]

    def test_explicit_aboxat_is_negative(self):
        rule = parse_program('C(time, b) :- B(time, b), not (ABOXAT(time), tbox) ⊨ b : Box.').rules[0]
        assert dlcall_virtual_dependencies(rule) == [(IS_A_AT, '-'), (HAS_A_AT, '-')]

    def test_fail_rules_contribute_nothing(self):
        rule = parse_program('fail :- B(time, b), tbox ⊨ b : Box.').rules[0]
        assert dlcall_virtual_dependencies(rule) == []
