# Event-calculus prelude.
#
# The domain-independent axioms (H1-H4, EC3-EC6) and the rules that turn
# DL fluents into timed DL-atoms (DL1-DL3) are kept as program text and
# parsed once; each rule carries its axiom name as label. Around a user
# program the prelude adds
#   * Step(t', t) facts for consecutive active time points, where active
#     means mentioned by a fact, one after a Happens fact, or declared
#     with `#times`;
#   * one strong-negation guard per predicate that occurs under neg(...).
#
# Initially holding fluents are plain HoldsAt facts; nothing initiates
# them.

import logging

from dataclasses import replace
from functools import lru_cache

from fusecalc.errors import SortError
from fusecalc.kernel import STEP, Atom, Collect, Comprehension, Int, Not, Ordinary, Var
from fusecalc.syntax import Program, Rule, parse_program, render_rule

logger = logging.getLogger(__name__)

PRELUDE_SOURCE = """\
Initiated(time+1, f) :- Happens(time, a), Initiates(time, a, f). // H1
Terminated(time+1, f) :- Happens(time, a), Terminates(time, a, f). // H2
StronglyTerminated(time+1, f) :- Happens(time, a), StronglyTerminates(time, a, f). // H3
Terminated(time, f) :- StronglyTerminated(time, f). // H4
HoldsAt(time, f) :- Initiated(time, f), not Terminated(time, f). // EC3
neg(HoldsAt(time, f)) :- StronglyTerminated(time, f), not Initiated(time, f). // EC4
HoldsAt(time, f) :- Step(time, prev), HoldsAt(prev, f), not Terminated(time, f). // EC5
neg(HoldsAt(time, f)) :- Step(time, prev), neg(HoldsAt(prev, f)), not Initiated(time, f). // EC6
x : c @ time :- HoldsAt(time, x : c). // DL1
x : Neg(c) @ time :- neg(HoldsAt(time, x : c)). // DL2
(x, y) : r @ time :- HoldsAt(time, (x, y) : r). // DL3
"""

PRELUDE_LABELS = ('H1', 'H2', 'H3', 'H4', 'EC3', 'EC4', 'EC5', 'EC6', 'DL1', 'DL2', 'DL3')

HAPPENS = 'Happens'
GUARD_LABEL = 'guard'


@lru_cache(maxsize=1)
def prelude():
    """The eleven prelude rules, labelled H1 ... DL3."""
    rules = parse_program(PRELUDE_SOURCE).rules
    return tuple(replace(r, label=label, line=None) for r, label in zip(rules, PRELUDE_LABELS))


def dump_prelude():
    return '\n'.join(render_rule(r) for r in prelude()) + '\n'


def active_times(program):
    """Fact times, successors of Happens facts and `#times` declarations."""
    times = set(program.times)
    for rule in program.facts():
        for a in rule.head_atoms:
            if isinstance(a.time, Int):
                times.add(a.time.value)
                if a.pred == HAPPENS and not a.negated:
                    times.add(a.time.value + 1)
    return times


def generate_steps(times):
    """Step(t', t) facts chaining the sorted time points."""
    ordered = sorted(times)
    return [Rule(((Atom(STEP, Int(later), (Int(earlier),)),),))
            for earlier, later in zip(ordered, ordered[1:])]


def _negated_signatures(program):
    seen = {}

    def visit(atom):
        if atom.negated and atom.pred not in seen:
            seen[atom.pred] = (atom.timed, len(atom.args))

    def walk(lits):
        for lit in lits:
            if isinstance(lit, Ordinary):
                visit(lit.atom)
            elif isinstance(lit, Not):
                walk(lit.body)
            elif isinstance(lit, Comprehension):
                visit(lit.atom)
                walk(lit.guard)
            elif isinstance(lit, Collect):
                walk(lit.guard)

    for rule in program.rules:
        for a in rule.head_atoms:
            visit(a)
        walk(rule.body)
    return seen


def strong_negation_guards(program):
    """fail :- P(time, x...), neg(P(time, x...)) for every P used under neg."""
    guards = []
    for pred, (timed, arity) in sorted(_negated_signatures(program).items()):
        args = tuple(Var(f'x{k}') for k in range(1, arity + 1))
        positive = Atom(pred, Var('time') if timed else None, args)
        guards.append(Rule(None, (Ordinary(positive), Ordinary(replace(positive, negated=True))),
                           label=f'{GUARD_LABEL} {pred}'))
    return guards


def _check_reserved(program):
    for rule in program.rules:
        if any(a.pred == STEP for a in rule.head_atoms):
            raise SortError(f'{rule.where()}: {STEP} is generated by the prelude and '
                            f'cannot be defined', rule.line)


def assemble(program, with_prelude=True):
    """The program that actually runs: prelude rules first, then the user's
    rules, Step facts and strong-negation guards."""
    if with_prelude:
        _check_reserved(program)
        program = Program(prelude(), {}, frozenset()).merge(program)
        steps = generate_steps(active_times(program))
        program = program.with_rules(steps)
        logger.debug(f'prelude added with {len(steps)} Step facts')
    guards = strong_negation_guards(program)
    if guards:
        program = program.with_rules(guards)
        logger.debug(f'{len(guards)} strong-negation guard(s): '
                     f'{", ".join(g.label.split()[1] for g in guards)}')
    return program
