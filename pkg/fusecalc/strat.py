# Stratification by time and by predicates.
#
# Every timed rule is anchored at a pivot: the time term of its leftmost
# ordinary body literal. Each time term of the rule gets integer offset
# bounds [lo, hi] relative to the pivot, derived from `time+k` terms, time
# comparisons, comprehension operators, Step(a, b) (b < a) and LET. Heads
# must lie at or after the pivot (lo >= 0), body literals at or before it
# (hi <= 0).
#
# The call graph only records dependencies that can hold at one and the same
# time point: a body literal strictly before every head cannot be affected by
# the rule's own layer, so it contributes no edge. Negative reads (not,
# comprehensions, COLLECT guards, ABOXAT) that may coincide with a head need
# a strictly lower stratum. Strata are the SCCs of that graph, numbered by
# longest dependency path from 0 upwards.
#
# Untimed (static) rules are stratified classically and need no pivot.

import logging
import math

from dataclasses import dataclass, field

import networkx as nx

from fusecalc.bridge import AboxAt, DlCall
from fusecalc.kernel import (
    HAS_A_AT, IS_A_AT, STEP, Arith, Builtin, Collect, Comprehension, Int, Let,
    Not, Ordinary, TimeCmp, Var, format_atom, format_term,
)
from fusecalc.syntax import format_literal

logger = logging.getLogger(__name__)

INF = math.inf
FAIL_STRATUM = INF

_PROPAGATION_ROUNDS = 32


@dataclass(frozen=True)
class Violation:
    rule_id: int
    line: int
    condition: str       # pivot-missing | head-time | body-time | negation
    literal: str
    message: str

    def __str__(self):
        where = f'rule {self.rule_id}' + (f' (line {self.line})' if self.line is not None else '')
        return f'{where}: {self.message} [{self.condition}] in {self.literal}'


@dataclass(frozen=True)
class Read:
    """A predicate a rule body looks at, and where in time."""
    key: str
    time: object           # time term, None for static atoms
    positive: bool
    bounds: tuple          # (lo, hi) relative to the pivot, None when static
    text: str


@dataclass
class RuleInfo:
    rule: object
    static: bool
    pivot_index: int = None
    pivot: object = None               # Var or Int, None when missing
    head_bounds: list = field(default_factory=list)   # (atom, (lo, hi))
    reads: list = field(default_factory=list)
    carry: bool = False

    @property
    def pivot_var(self):
        return self.pivot.name if isinstance(self.pivot, Var) else None


@dataclass
class StratumMap:
    stratum: dict
    pivots: dict              # rule id -> (body index, pivot term)
    rules: dict               # rule id -> RuleInfo

    def of(self, key):
        return self.stratum.get(key, 0)

    def of_rule(self, rule):
        if rule.is_fail:
            return FAIL_STRATUM
        return max(self.of(a.key) for a in rule.head_atoms)

    @property
    def height(self):
        return max(self.stratum.values(), default=-1) + 1


# ---------- time bounds ----------

def _linear(t):
    """(variable name or None, offset) for time-like terms, None otherwise."""
    if isinstance(t, Var):
        return t.name, 0
    if isinstance(t, Int):
        return None, t.value
    if isinstance(t, Arith):
        left, right = _linear(t.left), _linear(t.right)
        if left is None or right is None:
            return None
        if t.op == '+':
            if left[0] is not None and right[0] is not None:
                return None
            return left[0] or right[0], left[1] + right[1]
        if right[0] is not None:
            return None
        return left[0], left[1] - right[1]
    return None


class _Bounds:
    """Difference-constraint propagation over the time variables of a rule."""

    def __init__(self, pivot):
        self.pivot = pivot
        self.values = {}
        if isinstance(pivot, Var):
            self.values[pivot.name] = (0, 0)

    def copy(self):
        clone = _Bounds(self.pivot)
        clone.values = dict(self.values)
        return clone

    def of_linear(self, lin):
        name, k = lin
        if name is None:
            if isinstance(self.pivot, Int):
                return k - self.pivot.value, k - self.pivot.value
            return -INF, INF
        lo, hi = self.values.get(name, (-INF, INF))
        return lo + k, hi + k

    def of(self, t):
        lin = _linear(t)
        if lin is None:
            return -INF, INF
        return self.of_linear(lin)

    def _fixed(self, name):
        return isinstance(self.pivot, Var) and name == self.pivot.name

    def solve(self, constraints):
        """constraints: (a, b, s) meaning a <= b + s over linear terms."""
        for _ in range(_PROPAGATION_ROUNDS):
            changed = False
            for a, b, s in constraints:
                la, ha = self.of_linear(a)
                lb, hb = self.of_linear(b)
                if a[0] is not None and not self._fixed(a[0]):
                    lo, hi = self.values.get(a[0], (-INF, INF))
                    new_hi = hb + s - a[1]
                    if new_hi < hi:
                        self.values[a[0]] = (lo, new_hi)
                        changed = True
                if b[0] is not None and not self._fixed(b[0]):
                    lo, hi = self.values.get(b[0], (-INF, INF))
                    new_lo = la - s - b[1]
                    if new_lo > lo:
                        self.values[b[0]] = (new_lo, hi)
                        changed = True
            if not changed:
                break
        return self


def _comparison_constraints(op, left, right):
    a, b = _linear(left), _linear(right)
    if a is None or b is None:
        return []
    if op == '<':
        return [(a, b, -1)]
    if op == '<=':
        return [(a, b, 0)]
    if op == '>':
        return [(b, a, -1)]
    if op == '>=':
        return [(b, a, 0)]
    if op == '=':
        return [(a, b, 0), (b, a, 0)]
    return []


def _scope_constraints(lits):
    """Constraints contributed by one literal list, nested scopes excluded."""
    out = []
    for lit in lits:
        if isinstance(lit, TimeCmp):
            out += _comparison_constraints(lit.op, lit.left, lit.right)
        elif isinstance(lit, Builtin) and len(lit.args) == 2:
            out += _comparison_constraints(lit.name, lit.args[0], lit.args[1])
        elif isinstance(lit, Let):
            out += _comparison_constraints('=', Var(lit.var), lit.value)
        elif isinstance(lit, Ordinary) and lit.atom.pred == STEP and lit.atom.args:
            out += _comparison_constraints('<', lit.atom.args[0], lit.atom.time)
    return out


# ---------- rule analysis ----------

def _has_timed_atoms(rule):
    if any(a.timed for a in rule.head_atoms):
        return True

    def walk(lits):
        for lit in lits:
            if isinstance(lit, Ordinary) and lit.atom.timed:
                return True
            if isinstance(lit, Comprehension):
                return True
            if isinstance(lit, DlCall):
                return True
            if isinstance(lit, Not) and walk(lit.body):
                return True
            if isinstance(lit, Collect) and walk(lit.guard):
                return True
        return False
    return walk(rule.body)


def _find_pivot(rule):
    for k, lit in enumerate(rule.body):
        if isinstance(lit, Ordinary) and lit.atom.timed:
            return k, lit.atom.time
    return None, None


def _collect_reads(lits, bounds, base_constraints, positive, pivot, out):
    constraints = base_constraints + _scope_constraints(lits)
    scope = bounds.copy().solve(constraints)

    def read(key, time, pos, text):
        out.append(Read(key, time, pos, scope.of(time) if time is not None else None, text))

    for lit in lits:
        if isinstance(lit, Ordinary):
            a = lit.atom
            read(a.key, a.time, positive, format_literal(lit))
        elif isinstance(lit, Not):
            _collect_reads(lit.body, scope, constraints, False, pivot, out)
        elif isinstance(lit, Comprehension):
            inner = constraints + _comparison_constraints(lit.op, Var(lit.var), lit.bound)
            inner_scope = scope.copy().solve(inner + _scope_constraints(lit.guard))
            a = lit.atom
            out.append(Read(a.key, a.time, False, inner_scope.of(a.time), format_literal(lit)))
            _collect_reads(lit.guard, inner_scope, inner, False, pivot, out)
        elif isinstance(lit, Collect):
            _collect_reads(lit.guard, scope, constraints, False, pivot, out)
        elif isinstance(lit, DlCall):
            text = format_literal(lit)
            if lit.implicit:
                if pivot is not None:
                    for key in (IS_A_AT, HAS_A_AT):
                        read(key, pivot, positive, text)
            else:
                for part in lit.abox:
                    if isinstance(part, AboxAt):
                        for key in (IS_A_AT, HAS_A_AT):
                            read(key, part.time, False, text)
    return scope


def analyse_rule(rule):
    """Pivot, time bounds, body reads and phase of one rule."""
    if not _has_timed_atoms(rule):
        info = RuleInfo(rule, static=True)
        _collect_reads(rule.body, _Bounds(None), [], True, None, info.reads)
        return info
    index, pivot = _find_pivot(rule)
    if pivot is not None and not isinstance(pivot, (Var, Int)):
        pivot = None
    info = RuleInfo(rule, static=False, pivot_index=index, pivot=pivot)
    if pivot is None:
        return info
    scope = _collect_reads(rule.body, _Bounds(pivot), [], True, pivot, info.reads)
    for a in rule.head_atoms:
        info.head_bounds.append((a, scope.of(a.time) if a.timed else None))
    info.carry = bool(info.head_bounds) and all(
        b is not None and b[0] >= 1 for _, b in info.head_bounds)
    return info


def _may_coincide(read_bounds, head_bounds):
    return read_bounds[0] <= head_bounds[1] and head_bounds[0] <= read_bounds[1]


def _dependencies(info):
    """(head key, read) pairs that can hold at the same time point."""
    rule = info.rule
    if rule.is_fail:
        return []
    out = []
    for a, hb in info.head_bounds or [(a, None) for a in rule.head_atoms]:
        for r in info.reads:
            if info.static:
                out.append((a.key, r))
            elif hb is not None and r.bounds is not None and _may_coincide(r.bounds, hb):
                out.append((a.key, r))
    return out


def dlcall_virtual_dependencies(rule):
    """(predicate, polarity) pairs a rule's DL-calls stand for.

    An induced-ABox call reads IsAAt and HasAAt at pivot time with the
    polarity of its context; ABOXAT(tt) parts read them negatively at tt.
    Fail rules have no head to depend on and contribute nothing."""
    if rule.is_fail:
        return []
    out = []
    _, pivot = _find_pivot(rule)

    def walk(lits, positive):
        for lit in lits:
            if isinstance(lit, DlCall):
                if lit.implicit:
                    sign = '+' if positive else '-'
                    out.extend([(IS_A_AT, sign), (HAS_A_AT, sign)])
                elif any(isinstance(p, AboxAt) for p in lit.abox):
                    out.extend([(IS_A_AT, '-'), (HAS_A_AT, '-')])
            elif isinstance(lit, Not):
                walk(lit.body, False)
            elif isinstance(lit, (Comprehension, Collect)):
                walk(lit.guard, False)
    walk(rule.body, True)
    return out


# ---------- strata ----------

def _call_graph(program, infos):
    graph = nx.DiGraph()
    for rule in program.rules:
        keys = [a.key for a in rule.head_atoms]
        graph.add_nodes_from(keys)
        for a, b in zip(keys, keys[1:]):
            graph.add_edge(a, b, negative=False)
            graph.add_edge(b, a, negative=False)
    for info in infos.values():
        for head_key, r in _dependencies(info):
            graph.add_node(r.key)
            negative = not r.positive
            if graph.has_edge(head_key, r.key):
                graph[head_key][r.key]['negative'] |= negative
            else:
                graph.add_edge(head_key, r.key, negative=negative)
    return graph


def compute_strata(program):
    """Assign every predicate signature a stratum (lowest 0)."""
    infos = {rule.rid: analyse_rule(rule) for rule in program.rules}
    graph = _call_graph(program, infos)
    condensed = nx.condensation(graph)
    level = {}
    for component in reversed(list(nx.topological_sort(condensed))):
        deps = [level[c] for c in condensed.successors(component)]
        level[component] = max(deps, default=-1) + 1
    stratum = {}
    for component, members in condensed.nodes(data='members'):
        for key in members:
            stratum[key] = level[component]
    pivots = {rid: (info.pivot_index, info.pivot)
              for rid, info in infos.items() if info.pivot is not None}
    logger.info(f'{len(stratum)} predicates in {max(level.values(), default=-1) + 1} strata')
    return StratumMap(stratum, pivots, infos)


def check_sbtp(program, strata):
    """Every SBTP violation of the program; empty when it is stratified."""
    violations = []
    for rule in program.rules:
        if rule.is_fact:
            continue
        info = strata.rules.get(rule.rid) or analyse_rule(rule)
        violations += _rule_violations(rule, info, strata)
    for v in violations:
        logger.debug(str(v))
    return violations


def _rule_violations(rule, info, strata):
    out = []

    def violation(condition, literal, message):
        out.append(Violation(rule.rid, rule.line, condition, literal, message))

    own = strata.of_rule(rule)
    if info.static:
        for r in info.reads:
            if not r.positive and not rule.is_fail and strata.of(r.key) >= own:
                violation('negation', r.text,
                          f'{r.key} is read under negation but is not in a lower stratum')
        return out
    if info.pivot is None:
        violation('pivot-missing', _body_text(rule),
                  'no ordinary body literal with a variable or integer time to act as pivot')
        return out
    for a, hb in info.head_bounds:
        if hb is None:
            violation('head-time', format_atom(a), 'untimed head in a timed rule')
        elif hb[0] < 0:
            violation('head-time', format_atom(a),
                      f'head time {format_term(a.time)} is not provably at or after the pivot')
    heads = [hb for _, hb in info.head_bounds if hb is not None]
    earliest_head = min((hb[0] for hb in heads), default=INF)
    for r in info.reads:
        if r.bounds is None:
            continue
        if r.bounds[1] > 0:
            violation('body-time', r.text,
                      f'time {format_term(r.time)} is not provably at or before the pivot')
            continue
        if r.positive:
            continue
        if rule.is_fail or r.bounds[1] < earliest_head:
            continue
        if strata.of(r.key) >= own:
            violation('negation', r.text,
                      f'{r.key} is read at pivot time under negation but is not in a '
                      f'strictly lower stratum')
    return out


def _body_text(rule):
    return ', '.join(format_literal(lit) for lit in rule.body) or '(empty body)'


def explain_strata(program, strata):
    """Human-readable stratum map and per-rule pivots."""
    lines = []
    by_level = {}
    for key, level in strata.stratum.items():
        by_level.setdefault(level, []).append(key)
    for level in sorted(by_level):
        lines.append(f'stratum {level}: {", ".join(sorted(by_level[level]))}')
    for rule in program.rules:
        if rule.is_fact:
            continue
        info = strata.rules[rule.rid]
        own = strata.of_rule(rule)
        phase = 'fail' if rule.is_fail else ('carry' if info.carry else f'stratum {own}')
        if info.static:
            pivot = 'static'
        elif info.pivot is None:
            pivot = 'no pivot'
        else:
            pivot = f'pivot {format_term(info.pivot)} (literal {info.pivot_index + 1})'
        label = f' {rule.label}' if rule.label else ''
        lines.append(f'{rule.where()}{label}: {pivot}, {phase}')
    return '\n'.join(lines)
