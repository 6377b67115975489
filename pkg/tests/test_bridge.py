import itertools
import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fusecalc import cli, config, dl
from fusecalc.bridge import (
    DLCache, DlCall, assertion_set, eval_dl_call, induced_abox, monotonicity_lint,
    term_to_assertion, timed_dl_atom_assertion,
)
from fusecalc.engine import compute_possible_models, satisfies
from fusecalc.errors import EvaluationError, UnknownTBoxError
from fusecalc.kernel import (
    HAS_A_AT, IS_A_AT, Atom, Compound, Const, Int, Interpretation, SetTerm,
    apply, hasa, isa,
)
from fusecalc.syntax import parse_program

KB = 'tbox kb {\n  FruitBox ⊑ Box.\n  functional Temp.\n}\n'


def box(n):
    return Compound('Box', (Int(n),))


def is_a_at(time, x, concept):
    return Atom(IS_A_AT, Int(time), (x, Const(concept)))


def has_a_at(time, x, role, y):
    return Atom(HAS_A_AT, Int(time), (x, role, y))


def call_in(rule_text, index=1):
    """The program's tboxes and the DL-call at body position index."""
    program = parse_program(KB + rule_text)
    return program.tboxes, program.rules[0].body[index]


def interpretation():
    return Interpretation([
        is_a_at(1, box(0), 'FruitBox'),
        is_a_at(1, box(1), 'ToyBox'),
        has_a_at(1, box(0), Const('Temp'), Const('Low')),
        is_a_at(2, box(1), 'FruitBox'),
    ])


class TestInducedABox:
    def test_projects_one_time_point(self):
        abox = induced_abox(interpretation(), 1)
        assert len(abox.concepts) == 2 and len(abox.roles) == 1
        assert abox.individuals() == {box(0), box(1), Const('Low')}
        assert induced_abox(interpretation(), 2) == dl.ABox.of(
            [dl.ConceptAssertion(box(1), dl.name('FruitBox'))])

    def test_empty_time_point(self):
        assert len(induced_abox(interpretation(), 7)) == 0

    def test_inverse_role_atoms_are_normalised(self):
        atom = has_a_at(1, Const('Low'), Compound('Inverse', (Const('Temp'),)), box(0))
        assert timed_dl_atom_assertion(atom) == dl.RoleAssertion(box(0), Const('Low'), dl.Role('Temp'))

    def test_untimed_terms(self):
        assert term_to_assertion(isa(box(0), Const('Box'))) == dl.ConceptAssertion(box(0), dl.name('Box'))
        with pytest.raises(EvaluationError, match='not a DL assertion'):
            term_to_assertion(box(0))


class TestDLCalls:
    def test_implicit_entailment_uses_the_pivot_abox(self):
        tboxes, call = call_in('T(time, b) :- b : Box @ time, kb ⊨ b : Box.')
        beta = {'time': Int(1), 'b': box(0)}
        assert eval_dl_call(interpretation(), beta, 1, call, tboxes) == [beta]
        assert eval_dl_call(interpretation(), {'time': Int(1), 'b': box(1)}, 1, call, tboxes) == []
        assert eval_dl_call(interpretation(), {'time': Int(2), 'b': box(1)}, 2, call, tboxes) != []

    def test_open_query_variables_range_over_known_individuals(self):
        tboxes, call = call_in('T(time, b) :- P(time), kb ⊨ b : Box.')
        out = eval_dl_call(interpretation(), {'time': Int(1)}, 1, call, tboxes)
        assert out == [{'time': Int(1), 'b': box(0)}]

    def test_open_role_filler(self):
        tboxes, call = call_in('T(time, b, t) :- b : FruitBox @ time, kb ⊨ (b, t) : Temp.')
        out = eval_dl_call(interpretation(), {'time': Int(1), 'b': box(0)}, 1, call, tboxes)
        assert [beta['t'] for beta in out] == [Const('Low')]

    def test_explicit_abox_union(self):
        tboxes, call = call_in('fail :- P(time, s), DLISSAT(ABOXAT(time) ++ s, kb).')
        clash = SetTerm(frozenset({isa(box(0), Compound('Not', (Const('Box'),)))}))
        assert eval_dl_call(interpretation(), {'time': Int(1), 's': clash}, 1, call, tboxes) == []
        beta = {'time': Int(2), 's': clash}
        assert eval_dl_call(interpretation(), beta, 2, call, tboxes) == [beta]

    def test_explicit_call_applies_unique_names(self):
        tboxes, call = call_in('fail :- P(time, s), DLISUNSAT(s, kb).')
        roles = SetTerm(frozenset({hasa(Const('A'), Const('Temp'), Const('C')),
                                   hasa(Const('A'), Const('Temp'), Const('B'))}))
        beta = {'time': Int(1), 's': roles}
        assert eval_dl_call(Interpretation(), beta, 1, call, tboxes) == [beta]

    def test_entailment_over_a_past_abox(self):
        tboxes, call = call_in('C(time, b) :- P(time, b), (ABOXAT(1), kb) ⊨ (b, Low) : Temp.')
        beta = {'time': Int(5), 'b': box(0)}
        assert eval_dl_call(interpretation(), beta, 5, call, tboxes) == [beta]

    def test_unbound_aboxat_time(self):
        tboxes, call = call_in('C(time) :- P(time), (ABOXAT(t), kb) ⊨ Box(0) : Box.')
        with pytest.raises(EvaluationError, match='not bound'):
            eval_dl_call(interpretation(), {'time': Int(1)}, 1, call, tboxes)

    def test_implicit_call_needs_a_pivot(self):
        tboxes, call = call_in('T :- P, kb ⊨ Box(0) : Box.')
        with pytest.raises(EvaluationError, match='pivot'):
            eval_dl_call(interpretation(), {}, None, call, tboxes)

    def test_unknown_tbox(self):
        _, call = call_in('T(time) :- P(time), other ⊨ Box(0) : Box.')
        with pytest.raises(UnknownTBoxError):
            eval_dl_call(interpretation(), {'time': Int(1)}, 1, call, {})


class TestDLCache:
    def test_repeated_questions_hit(self):
        tboxes, call = call_in('T(time, b) :- b : Box @ time, kb ⊨ b : Box.')
        cache = DLCache()
        beta = {'time': Int(1), 'b': box(0)}
        eval_dl_call(interpretation(), beta, 1, call, tboxes, cache)
        eval_dl_call(interpretation(), beta, 1, call, tboxes, cache)
        assert cache.misses == 1 and cache.hits == 1

    def test_satisfiability_is_memoised(self):
        cache = DLCache()
        abox = induced_abox(interpretation(), 1)
        tbox = dl.TBox('kb')
        assert cache.is_satisfiable(abox, tbox)
        assert cache.is_satisfiable(abox, tbox)
        assert (cache.hits, cache.misses) == (1, 1)


class TestLint:
    def test_positive_implicit_sat(self):
        program = parse_program(KB + 'Ok(time) :- P(time), DLISSAT(kb).\n')
        (warning,) = monotonicity_lint(program)
        assert warning.rule_id == 1 and warning.line == 5
        assert 'not monotonic' in str(warning)

    def test_negated_unsat(self):
        program = parse_program(KB + 'Ok(time) :- P(time), not DLISUNSAT(ABOXAT(time), kb).\n')
        assert len(monotonicity_lint(program)) == 1

    def test_fail_rules_are_not_flagged(self):
        program = parse_program(KB + 'fail :- P(time), DLISSAT(kb).\n'
                                     'fail :- P(time), DLISUNSAT(kb).\n')
        assert monotonicity_lint(program) == []


def test_assertion_set():
    s = assertion_set([box(0), box(1)], Const('Temp'), Const('High'))
    assert s == SetTerm(frozenset({hasa(box(0), Const('Temp'), Const('High')),
                                   hasa(box(1), Const('Temp'), Const('High'))}))


# ---------- properties ----------

_rng = random.Random(1618)

RICH_KB = ('tbox kb {\n  FruitBox ⊑ Box.\n  FruitBox ⊑ Exists(Temp, TempClass).\n'
           '  ToyBox ⊑ Not(Exists(Temp, TempClass)).\n  functional Temp.\n}\n')


def random_dl_atoms(rng, times=(0, 1, 2)):
    atoms = []
    for _ in range(rng.randint(0, 6)):
        t = rng.choice(times)
        if rng.random() < 0.6:
            atoms.append(is_a_at(t, box(rng.randint(0, 2)), rng.choice(('Box', 'FruitBox', 'ToyBox'))))
        else:
            atoms.append(has_a_at(t, box(rng.randint(0, 2)), Const('Temp'),
                                  Const(rng.choice(('Low', 'High')))))
    if rng.random() < 0.3:
        atoms.append(Atom('Other', Int(rng.choice(times)), (box(0),)))
    return atoms


def prefix_matches(model, body, pivot, tboxes):
    betas = [{}]
    for lit in body:
        betas = [gamma for beta in betas for gamma in satisfies(model, beta, lit, pivot, tboxes)]
    return betas


class TestBridgeProperties:
    def test_induced_abox_is_a_union_homomorphism(self):
        for _ in range(200):
            first, second = random_dl_atoms(_rng), random_dl_atoms(_rng)
            both = Interpretation(first + second)
            for d in (0, 1, 2):
                assert induced_abox(both, d) == induced_abox(Interpretation(first), d).union(
                    induced_abox(Interpretation(second), d))

    def test_open_query_equals_every_ground_instance(self):
        tboxes = parse_program(RICH_KB).tboxes
        tbox = tboxes['kb']
        queries = (
            ('T(time, b) :- P(time), kb ⊨ b : Box.', ('b',), lambda v: isa(v['b'], Const('Box'))),
            ('T(time, b, t) :- P(time), kb ⊨ (b, t) : Temp.', ('b', 't'),
             lambda v: hasa(v['b'], Const('Temp'), v['t'])),
        )
        for _ in range(40):
            i = Interpretation(random_dl_atoms(_rng, times=(1,)))
            abox = induced_abox(i, 1)
            individuals = sorted(abox.individuals(), key=str)
            for text, names, ground in queries:
                call = parse_program(RICH_KB + text).rules[0].body[1]
                found = {tuple(beta[n] for n in names)
                         for beta in eval_dl_call(i, {'time': Int(1)}, 1, call, tboxes)}
                expected = set()
                for values in itertools.product(individuals, repeat=len(names)):
                    query = term_to_assertion(ground(dict(zip(names, values))))
                    if dl.entails(abox, tbox, [query]):
                        expected.add(values)
                assert found == expected

    @pytest.mark.parametrize('name', ['transport', 'transport_variant', 'ex1_materialize', 'ex4_sensor'])
    def test_repeated_calls_agree(self, name):
        program, _, strata = cli.load([os.path.join(config.CORPUS_DIR, name + config.PROGRAM_SUFFIX)])
        checked = 0
        for model in compute_possible_models(program, strata):
            for rule in program.rules:
                pivot = strata.rules[rule.rid].pivot
                for k, lit in enumerate(rule.body):
                    if not isinstance(lit, DlCall):
                        continue
                    for beta in prefix_matches(model, rule.body[:k], pivot, program.tboxes):
                        d = apply(beta, pivot).value
                        first = eval_dl_call(model, beta, d, lit, program.tboxes)
                        again = eval_dl_call(model, beta, d, lit, program.tboxes, DLCache())
                        assert first == again
                        checked += 1
        assert checked > 0
