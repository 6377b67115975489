# Rules <-> DL coupling: DL-call body literals, induced ABoxes and their
# evaluation against the current interpretation.
#
# A DL-call either takes its ABox implicitly (the induced ABox at the rule's
# pivot time) or explicitly from an ABox expression: ABOXAT(tt) parts,
# variables bound to assertion sets (e.g. by MAPROLE) and literal sets,
# unioned together. Query variables that the body has not bound yet range
# over the known individuals of the call's ABox and query (weak DL-safety).

import itertools
import logging

from dataclasses import dataclass

from fusecalc import dl
from fusecalc.errors import EvaluationError, UnknownTBoxError
from fusecalc.kernel import (
    HAS_A_AT, HASA, IS_A_AT, ISA, Collect, Comprehension, Compound, Int, Not,
    SetTerm, Var, apply, format_term, is_ground, set_members, term_key,
    term_vars,
)

logger = logging.getLogger(__name__)

ENTAILS = 'entails'
IS_SAT = 'sat'
IS_UNSAT = 'unsat'


@dataclass(frozen=True, slots=True)
class AboxAt:
    """ABOXAT(tt): the induced ABox of the current interpretation at tt."""
    time: object


@dataclass(frozen=True, slots=True)
class DlCall:
    kind: str                 # ENTAILS | IS_SAT | IS_UNSAT
    tbox: str
    abox: tuple = None        # None: implicit; else AboxAt / term parts
    query: tuple = ()         # untimed DL-atom terms ($isa / $hasa)

    @property
    def implicit(self):
        return self.abox is None

    def free_vars(self):
        out = set()
        if self.kind == ENTAILS:
            for q in self.query:
                term_vars(q, out)
        return out

    def input_vars(self):
        """Variables the ABox expression needs bound before evaluation."""
        out = set()
        for part in self.abox or ():
            term_vars(part.time if isinstance(part, AboxAt) else part, out)
        return out


def timed_dl_atom_assertion(atom):
    """ABox assertion for a ground IsAAt / HasAAt atom."""
    if atom.pred == IS_A_AT:
        x, c = atom.args
        return dl.ConceptAssertion(x, dl.term_to_concept(c))
    x, r, y = atom.args
    return dl.RoleAssertion(x, y, dl.term_to_role(r)).normalized()


def term_to_assertion(t):
    """ABox assertion for a ground untimed DL-atom term."""
    if isinstance(t, Compound) and t.functor == ISA:
        return dl.ConceptAssertion(t.args[0], dl.term_to_concept(t.args[1]))
    if isinstance(t, Compound) and t.functor == HASA:
        x, r, y = t.args
        return dl.RoleAssertion(x, y, dl.term_to_role(r)).normalized()
    raise EvaluationError(f'{format_term(t)} is not a DL assertion')


def induced_abox(i, d):
    """Projection of the timed DL-atoms of i at time d."""
    assertions = [timed_dl_atom_assertion(a) for a in i.lookup(IS_A_AT, d)]
    assertions += [timed_dl_atom_assertion(a) for a in i.lookup(HAS_A_AT, d)]
    return dl.ABox.of(assertions)


def _explicit_abox(i, beta, call):
    parts = []
    for part in call.abox:
        if isinstance(part, AboxAt):
            t = apply(beta, part.time)
            if not isinstance(t, Int):
                raise EvaluationError(f'ABOXAT time {format_term(t)} is not bound')
            parts.append(induced_abox(i, t.value))
            continue
        value = apply(beta, part)
        if not is_ground(value):
            raise EvaluationError(f'ABox expression {format_term(value)} is not bound')
        members = set_members(value) if not _is_assertion(value) else (value,)
        parts.append(dl.ABox.of(term_to_assertion(m) for m in members))
    out = dl.ABox()
    for p in parts:
        out = out.union(p)
    return out


def _is_assertion(t):
    return isinstance(t, Compound) and t.functor in (ISA, HASA)


def _individual_positions(q):
    if q.functor == ISA:
        return (q.args[0],)
    return (q.args[0], q.args[2])


def _query_candidates(abox, queries):
    """Weak DL-safety: individuals the open query variables may range over."""
    known = set(abox.individuals())
    for q in queries:
        for t in _individual_positions(q):
            if is_ground(t):
                known.add(t)
    return sorted(known, key=term_key)


class DLCache:
    """Memo of DL verdicts keyed by (ABox, TBox, query); values are pure."""

    def __init__(self):
        self._sat = {}
        self._entails = {}
        self.hits = 0
        self.misses = 0

    def is_satisfiable(self, abox, tbox):
        key = (abox, tbox)
        if key in self._sat:
            self.hits += 1
            return self._sat[key]
        self.misses += 1
        result = dl.is_satisfiable(abox.union(dl.ABox.of(dl.una(abox.individuals()))), tbox)
        self._sat[key] = result
        return result

    def entails(self, abox, tbox, queries):
        key = (abox, tbox, queries)
        if key in self._entails:
            self.hits += 1
            return self._entails[key]
        self.misses += 1
        result = dl.entails(abox, tbox, list(queries))
        self._entails[key] = result
        return result


def eval_dl_call(i, beta, pivot, call, tboxes, cache=None):
    """Extensions of beta under which the DL-call holds ([] when it fails).

    pivot is the integer pivot time of the enclosing rule (used by implicit
    ABoxes)."""
    if cache is None:
        cache = DLCache()
    tbox = tboxes.get(call.tbox)
    if tbox is None:
        raise UnknownTBoxError(f'unknown tbox {call.tbox}')
    if call.implicit:
        if pivot is None:
            raise EvaluationError('DL-call with an implicit ABox needs a pivot time')
        abox = induced_abox(i, pivot)
    else:
        abox = _explicit_abox(i, beta, call)

    if call.kind == IS_SAT:
        return [beta] if cache.is_satisfiable(abox, tbox) else []
    if call.kind == IS_UNSAT:
        return [] if cache.is_satisfiable(abox, tbox) else [beta]

    queries = [apply(beta, q) for q in call.query]
    open_vars = sorted(set().union(*(term_vars(q) for q in queries))) if queries else []
    for q in queries:
        if not _is_assertion(q):
            raise EvaluationError(f'{format_term(q)} is not a DL query')
        # concept (isa) or role (hasa) position
        if not is_ground(q.args[1]):
            raise EvaluationError(f'DL query {format_term(q)} has an unbound concept or role')
        if any(not is_ground(t) and not isinstance(t, Var) for t in _individual_positions(q)):
            raise EvaluationError(f'DL query {format_term(q)} is not weakly DL-safe')
    if not open_vars:
        grounded = tuple(sorted((term_to_assertion(q) for q in queries), key=str))
        return [beta] if cache.entails(abox, tbox, grounded) else []

    out = []
    candidates = _query_candidates(abox, queries)
    for values in itertools.product(candidates, repeat=len(open_vars)):
        gamma = dict(zip(open_vars, values))
        grounded = tuple(sorted((term_to_assertion(apply(gamma, q)) for q in queries), key=str))
        if cache.entails(abox, tbox, grounded):
            extended = dict(beta)
            extended.update(gamma)
            out.append(extended)
    return out


# ---------- lint ----------

@dataclass(frozen=True)
class LintWarning:
    rule_id: int
    line: int
    message: str

    def __str__(self):
        where = f'line {self.line}' if self.line is not None else f'rule {self.rule_id}'
        return f'{where}: {self.message}'


def iter_dl_calls(body, positive=True):
    """(call, positive) for every DL-call in a body, negation flipping
    polarity and comprehension/COLLECT guards counting as negative context."""
    for lit in body:
        if isinstance(lit, DlCall):
            yield lit, positive
        elif isinstance(lit, Not):
            yield from iter_dl_calls(lit.body, not positive)
        elif isinstance(lit, (Comprehension, Collect)):
            yield from iter_dl_calls(lit.guard, False)


def monotonicity_lint(p):
    """Warn about DL-calls whose truth can flip as the interpretation grows."""
    warnings = []
    for rule in p.rules:
        for call, positive in iter_dl_calls(rule.body):
            if call.kind == IS_SAT and call.implicit and positive and not rule.is_fail:
                warnings.append(LintWarning(
                    rule.rid, rule.line,
                    f'DLISSAT({call.tbox}) over the induced ABox in a positive context '
                    f'is not monotonic; results may be incomplete'))
            elif call.kind == IS_UNSAT and not positive:
                warnings.append(LintWarning(
                    rule.rid, rule.line,
                    f'DLISUNSAT({call.tbox}) under negation is not monotonic; '
                    f'results may be unsound'))
    for w in warnings:
        logger.debug(f'lint: {w}')
    return warnings


def assertion_set(individuals, role, filler):
    """MAPROLE value: {(x, filler) : role | x in individuals}."""
    return SetTerm(frozenset(Compound(HASA, (x, role, filler)) for x in individuals))
