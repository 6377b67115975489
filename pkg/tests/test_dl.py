import itertools
import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fusecalc.dl import (
    BOTTOM, TOP, ABox, ConceptAssertion, ConceptType, Role, RoleAssertion,
    TBox, conj, disj, entails, is_satisfiable, name, neg, nnf, only, some,
    term_to_concept, una,
)
from fusecalc.errors import DLUnknownError, EvaluationError
from fusecalc.kernel import Compound, Const, Int

_rng = random.Random(7331)

TEMP = Role('Temp')


def ind(label):
    return Const(label)


def box(n):
    return Compound('Box', (Int(n),))


def isa_(x, c):
    return ConceptAssertion(x, c)


def hasa_(x, role, y):
    return RoleAssertion(x, y, role)


def running_tbox():
    """The transport knowledge base's terminology."""
    temp_class = name('TempClass')
    return TBox('tbox', (
        (name('Box'), only(TEMP, temp_class)),
        (name('FruitBox'), some(TEMP, temp_class)),
        (name('ToyBox'), neg(some(TEMP, temp_class))),
        (name('FruitBox'), name('Box')),
        (name('ToyBox'), name('Box')),
    ), frozenset({TEMP}))


def running_abox():
    temp_class = name('TempClass')
    return ABox.of([
        isa_(ind('Low'), temp_class),
        isa_(ind('High'), temp_class),
        isa_(box(0), name('FruitBox')),
        isa_(box(1), name('FruitBox')),
        isa_(box(2), name('Box')),
        isa_(box(3), name('ToyBox')),
        isa_(box(4), conj(name('Box'), only(TEMP, neg(temp_class)))),
        isa_(box(5), conj(name('Box'), some(TEMP, temp_class))),
    ])


class TestConcepts:
    def test_nnf_pushes_negation_inwards(self):
        r = Role('r')
        c = neg(conj(name('A'), some(r, name('B'))))
        assert nnf(c) == disj(neg(name('A')), only(r, neg(name('B'))))
        assert nnf(neg(neg(name('A')))) == name('A')
        assert nnf(neg(TOP)) == BOTTOM

    def test_term_to_concept(self):
        t = Compound('And', (Const('Box'), Const('A'), Compound('Not', (Const('Top'),))))
        c = term_to_concept(t)
        assert c.kind is ConceptType.AND
        assert c.children[0] == name('Box')
        assert c.children[1] == conj(name('A'), neg(TOP))

    def test_inverse_roles(self):
        c = term_to_concept(Compound('Exists', (Compound('Inverse', (Const('r'),)), Const('A'))))
        assert c.role == Role('r', inverse=True)
        assert str(c) == '∃r⁻.A'

    def test_not_a_concept(self):
        with pytest.raises(EvaluationError):
            term_to_concept(Compound('Exists', (Const('r'),)))
        with pytest.raises(EvaluationError):
            term_to_concept(Int(3))


class TestSatisfiability:
    def test_direct_clash(self):
        assert not is_satisfiable(ABox.of([isa_(ind('x'), conj(name('A'), neg(name('A'))))]), TBox())

    def test_told_subsumption(self):
        tbox = TBox('t', ((name('A'), name('B')),))
        assert is_satisfiable(ABox.of([isa_(ind('a'), name('A'))]), tbox)
        assert not is_satisfiable(ABox.of([isa_(ind('a'), name('A')), isa_(ind('a'), neg(name('B')))]), tbox)

    def test_general_inclusion_is_internalised(self):
        r = Role('r')
        tbox = TBox('t', ((some(r, name('A')), name('B')),))
        abox = ABox.of([hasa_(ind('a'), r, ind('b')), isa_(ind('b'), name('A')),
                        isa_(ind('a'), neg(name('B')))])
        assert not is_satisfiable(abox, tbox)

    def test_exists_against_forall(self):
        r = Role('r')
        abox = ABox.of([isa_(ind('a'), some(r, name('C'))), isa_(ind('a'), only(r, neg(name('C'))))])
        assert not is_satisfiable(abox, TBox())

    def test_inverse_role_propagation(self):
        r = Role('r')
        abox = ABox.of([hasa_(ind('a'), r, ind('b')), isa_(ind('a'), name('A')),
                        isa_(ind('b'), only(r.inv(), neg(name('A'))))])
        assert not is_satisfiable(abox, TBox())

    def test_disjunction_branches(self):
        a, b = name('A'), name('B')
        base = [isa_(ind('x'), disj(a, b)), isa_(ind('x'), neg(a))]
        assert is_satisfiable(ABox.of(base), TBox())
        assert not is_satisfiable(ABox.of(base + [isa_(ind('x'), neg(b))]), TBox())

    def test_cyclic_tbox_terminates_by_blocking(self):
        r = Role('r')
        tbox = TBox('t', ((name('A'), some(r, name('A'))),))
        assert is_satisfiable(ABox.of([isa_(ind('a'), name('A'))]), tbox)

    def test_cyclic_tbox_pushes_back_along_inverse(self):
        r = Role('r')
        tbox = TBox('t', ((name('A'), some(r, name('A'))), (name('A'), only(r.inv(), name('B')))))
        assert is_satisfiable(ABox.of([isa_(ind('a'), name('A'))]), tbox)
        assert not is_satisfiable(ABox.of([isa_(ind('a'), name('A')), isa_(ind('a'), neg(name('B')))]), tbox)

    def test_functional_role_merges_fillers(self):
        r = Role('r')
        abox = ABox.of([hasa_(ind('a'), r, ind('b')), hasa_(ind('a'), r, ind('c')),
                        isa_(ind('b'), name('A')), isa_(ind('c'), neg(name('A')))])
        assert is_satisfiable(abox, TBox('t'))
        assert not is_satisfiable(abox, TBox('t', functional=frozenset({r})))

    def test_unique_names_against_functional_roles(self):
        r = Role('r')
        tbox = TBox('t', functional=frozenset({r}))
        abox = ABox.of([hasa_(ind('a'), r, ind('c')), hasa_(ind('a'), r, ind('b'))])
        assert is_satisfiable(abox, tbox)
        with_una = abox.union(ABox.of(una({ind('a'), ind('b'), ind('c')})))
        assert not is_satisfiable(with_una, tbox)

    def test_una_size(self):
        assertions = una({ind('a'), ind('b'), ind('c')})
        assert len(assertions) == 6
        assert len({a.concept for a in assertions if a.concept.kind is ConceptType.NAME}) == 3

    def test_toy_box_cannot_have_a_temperature(self):
        # ToyBox ⊑ ¬∃Temp.TempClass meets the Temp edge into Low : TempClass
        abox = ABox.of([isa_(box(3), name('ToyBox')), hasa_(box(3), TEMP, ind('Low')),
                        isa_(ind('Low'), name('TempClass'))])
        assert not is_satisfiable(abox, running_tbox())

    def test_running_knowledge_base_is_consistent(self):
        abox = running_abox()
        abox = abox.union(ABox.of(una(abox.individuals())))
        assert is_satisfiable(abox, running_tbox())

    def test_budget_exhaustion_is_reported(self):
        r = Role('r')
        tbox = TBox('t', ((name('A'), some(r, name('A'))),))
        with pytest.raises(DLUnknownError):
            is_satisfiable(ABox.of([isa_(ind('a'), name('A'))]), tbox, max_steps=1)


class TestEntailment:
    def test_materialised_box(self):
        abox = ABox.of([isa_(box(0), name('FruitBox'))])
        assert entails(abox, running_tbox(), [isa_(box(0), name('Box'))])
        assert entails(abox, running_tbox(), [isa_(box(0), some(TEMP, name('TempClass')))])

    def test_box_without_temperature_filler(self):
        # countermodel: Box(4) with no Temp successor at all
        abox = ABox.of([isa_(box(4), conj(name('Box'), only(TEMP, neg(name('TempClass')))))])
        assert not entails(abox, running_tbox(), [isa_(box(4), some(TEMP, name('TempClass')))])
        assert entails(abox, running_tbox(), [isa_(box(4), neg(some(TEMP, TOP)))])

    def test_role_query(self):
        abox = ABox.of([hasa_(box(2), TEMP, ind('High'))])
        assert entails(abox, running_tbox(), [hasa_(box(2), TEMP, ind('High'))])
        assert entails(abox, running_tbox(), [hasa_(ind('High'), TEMP.inv(), box(2))])
        assert not entails(abox, running_tbox(), [hasa_(box(2), TEMP, ind('Low'))])

    def test_functional_filler_inherits_constraints(self):
        abox = ABox.of([hasa_(box(0), TEMP, ind('Low')), isa_(box(0), some(TEMP, name('Hot')))])
        assert entails(abox, running_tbox(), [isa_(ind('Low'), name('Hot'))])

    def test_conjunctive_query(self):
        abox = ABox.of([isa_(box(0), name('FruitBox')), isa_(box(1), name('ToyBox'))])
        assert entails(abox, running_tbox(), [isa_(box(0), name('Box')), isa_(box(1), name('Box'))])
        assert not entails(abox, running_tbox(), [isa_(box(0), name('Box')), isa_(box(1), name('FruitBox'))])


# ---------- random knowledge bases ----------

_NAMES = ['A', 'B', 'C']
_ROLES = [Role('r'), Role('s')]
_INDIVIDUALS = [ind('a'), ind('b')]


def random_concept(rng, depth=2):
    if depth == 0 or rng.random() < 0.35:
        c = name(rng.choice(_NAMES))
        return neg(c) if rng.random() < 0.3 else c
    kind = rng.choice(['and', 'or', 'some', 'only', 'not'])
    if kind == 'not':
        return neg(random_concept(rng, depth - 1))
    if kind in ('and', 'or'):
        pair = random_concept(rng, depth - 1), random_concept(rng, depth - 1)
        return conj(*pair) if kind == 'and' else disj(*pair)
    role = rng.choice(_ROLES)
    if rng.random() < 0.3:
        role = role.inv()
    filler = random_concept(rng, depth - 1)
    return some(role, filler) if kind == 'some' else only(role, filler)


def random_kb(rng):
    gcis = tuple((random_concept(rng, 1), random_concept(rng)) for _ in range(rng.randint(0, 3)))
    functional = frozenset(r for r in _ROLES if rng.random() < 0.3)
    assertions = [isa_(rng.choice(_INDIVIDUALS), random_concept(rng)) for _ in range(rng.randint(1, 3))]
    if rng.random() < 0.5:
        assertions.append(hasa_(_INDIVIDUALS[0], rng.choice(_ROLES), rng.choice(_INDIVIDUALS)))
    return ABox.of(assertions), TBox('t', gcis, functional)


def _extension(c, domain, concepts, roles):
    k = c.kind
    if k is ConceptType.TOP:
        return set(domain)
    if k is ConceptType.BOTTOM:
        return set()
    if k is ConceptType.NAME:
        return {d for d in domain if (d, c.name) in concepts}
    if k is ConceptType.NOT:
        return set(domain) - _extension(c.children[0], domain, concepts, roles)
    if k in (ConceptType.AND, ConceptType.OR):
        left, right = (_extension(x, domain, concepts, roles) for x in c.children)
        return left & right if k is ConceptType.AND else left | right
    pairs = roles.get(c.role.name, set())
    if c.role.inverse:
        pairs = {(y, x) for x, y in pairs}
    filler = _extension(c.children[0], domain, concepts, roles)
    if k is ConceptType.EXISTS:
        return {d for d in domain if any(x == d and y in filler for x, y in pairs)}
    return {d for d in domain if all(y in filler for x, y in pairs if x == d)}


def _is_model(abox, tbox, domain, concepts, roles, mapping):
    for r in tbox.functional:
        pairs = roles.get(r.name, set())
        if any(len({y for x, y in pairs if x == d}) > 1 for d in domain):
            return False
    for lhs, rhs in tbox.gcis:
        if not _extension(lhs, domain, concepts, roles) <= _extension(rhs, domain, concepts, roles):
            return False
    for a in abox.concepts:
        if mapping[a.individual] not in _extension(a.concept, domain, concepts, roles):
            return False
    for a in abox.roles:
        if (mapping[a.subject], mapping[a.filler]) not in roles.get(a.role.name, set()):
            return False
    return True


def finite_model_exists(abox, tbox, rng, samples=150):
    """Search for a model with one element exhaustively, two by sampling."""
    individuals = sorted(abox.individuals(), key=str)
    domain = [0]
    mapping = {i: 0 for i in individuals}
    for bits in itertools.product([False, True], repeat=len(_NAMES) + len(_ROLES)):
        concepts = {(0, n) for n, on in zip(_NAMES, bits) if on}
        roles = {r.name: {(0, 0)} for r, on in zip(_ROLES, bits[len(_NAMES):]) if on}
        if _is_model(abox, tbox, domain, concepts, roles, mapping):
            return True
    domain = [0, 1]
    for _ in range(samples):
        mapping = {i: rng.choice(domain) for i in individuals}
        concepts = {(d, n) for d in domain for n in _NAMES if rng.random() < 0.5}
        roles = {r.name: {(x, y) for x in domain for y in domain if rng.random() < 0.4}
                 for r in _ROLES}
        if _is_model(abox, tbox, domain, concepts, roles, mapping):
            return True
    return False


def settled(abox, tbox):
    """Tableau verdict, None when the search budget runs out."""
    try:
        return is_satisfiable(abox, tbox)
    except DLUnknownError:
        return None


class TestRandomKnowledgeBases:
    def test_found_models_mean_satisfiable(self):
        checked = 0
        for _ in range(500):
            abox, tbox = random_kb(_rng)
            if finite_model_exists(abox, tbox, _rng):
                checked += 1
                assert settled(abox, tbox) is not False, (abox, tbox)
        assert checked > 0

    def test_unsatisfiability_survives_more_assertions(self):
        for _ in range(100):
            abox, tbox = random_kb(_rng)
            if settled(abox, tbox) is not False:
                continue
            extra, _ = random_kb(_rng)
            assert settled(abox.union(extra), tbox) is not True

    def test_entailment_is_consistent(self):
        for _ in range(100):
            abox, tbox = random_kb(_rng)
            if not settled(abox.union(ABox.of(una(abox.individuals()))), tbox):
                continue
            c = random_concept(_rng)
            x = _INDIVIDUALS[0]
            try:
                both = entails(abox, tbox, [isa_(x, c)]) and entails(abox, tbox, [isa_(x, neg(c))])
            except DLUnknownError:
                continue
            assert not both
