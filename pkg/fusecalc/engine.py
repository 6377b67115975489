# Possible-model computation.
#
# Every branch walks the same cursor:
#
#   static layer:  disjunctive facts, static strata ascending, static fail
#   each time t:   strata ascending, carry (heads strictly after t), fail
#
# Inside a phase the normal (single alternative) rules are saturated
# naively, then the first applicable disjunctive closure not yet decided on
# this branch is split: one child branch per non-empty subset of its
# alternatives, singletons first, depth first. The phase is re-entered on
# each child until no undecided closure is left. A fail phase closes the
# branch when any fail body matches or an atom and its strong negation
# hold at the same time point.
#
# Time points are visited in ascending order; the next one is the smallest
# time mentioned by the current interpretation or a `#times` directive that
# is larger than the current one. Rule heads never go back in time, so the
# frontier only grows forward.
#
# Bodies are matched left to right. Each literal maps a substitution to the
# list of its extensions; see satisfies().

import itertools
import logging

from collections import Counter
from dataclasses import dataclass, replace

import networkx as nx

from fusecalc import config
from fusecalc.bridge import AboxAt, DLCache, DlCall, assertion_set, eval_dl_call
from fusecalc.errors import (
    EvaluationError, LayerOrderError, OracleLimitError, ProgramError,
    StepBudgetExceeded, StratificationError,
)
from fusecalc.kernel import (
    HAS_A_AT, IS_A_AT, Builtin, Choose, Collect, Comprehension, Int, Interpretation, Let,
    MapRole, Not, Ordinary, SetTerm, TimeCmp, Var, apply, atom_key,
    evaluate_builtin, format_atom, format_term, is_ground, match_atom,
    match_term, set_members, term_key, term_vars,
)
from fusecalc.strat import check_sbtp, compute_strata

logger = logging.getLogger(__name__)
trace_logger = logging.getLogger('fusecalc.trace')

STATIC = None

FACTS = 'facts'
STRATUM = 'stratum'
CARRY = 'carry'
FAIL = 'fail'

_MEMBERSHIP = {'∋': (1, 0), '∈': (0, 1), 'member': (0, 1)}   # (element, set) positions

# read key for time points enumerated by a time comparison
TIME_POINTS = '$time'


# ---------- body literals ----------

class _Context:
    def __init__(self, tboxes=None, cache=None, reads=None):
        self.tboxes = tboxes or {}
        self.cache = cache if cache is not None else DLCache()
        self.reads = reads          # list of (key, time) while recording, else None

    def read(self, key, time):
        if self.reads is not None:
            self.reads.append((key, time))


def _pivot_time(beta, pivot):
    if pivot is None:
        return None
    if isinstance(pivot, int):
        return pivot
    t = apply(beta, pivot)
    if not isinstance(t, Int):
        raise EvaluationError(f'pivot time {format_term(pivot)} is not bound')
    return t.value


def _lookup(i, atom, beta):
    if atom.time is None:
        return i.lookup(atom.key, None)
    t = apply(beta, atom.time)
    if isinstance(t, Int):
        return i.lookup(atom.key, t.value)
    return i.lookup(atom.key)


def _ordinary(i, beta, atom, ctx):
    t = apply(beta, atom.time) if atom.time is not None else None
    if t is None or isinstance(t, Int):
        ctx.read(atom.key, None if t is None else t.value)
    out = []
    for candidate in _lookup(i, atom, beta):
        gamma = match_atom(atom, candidate, beta)
        if gamma is not None:
            out.append(gamma)
    return sorted(out, key=_subst_key)


def _comprehension(i, beta, lit, pivot, ctx):
    bound = apply(beta, lit.bound)
    if not isinstance(bound, Int):
        raise EvaluationError(f'comprehension bound {format_term(lit.bound)} is not bound')
    inner = {k: v for k, v in beta.items() if k != lit.var}
    exported = sorted(set().union(*(term_vars(t) for t in lit.atom.args)) - set(inner))
    latest = lit.op in ('<', '<=')
    if latest:
        ctx.read(lit.atom.key, bound.value if lit.op == '<=' else bound.value - 1)
    best = {}
    for candidate in i.lookup(lit.atom.key):
        t = candidate.time.value
        if not evaluate_builtin(lit.op, (Int(t), bound)):
            continue
        gamma = match_atom(lit.atom, candidate, inner)
        if gamma is None:
            continue
        if lit.guard and not any(True for _ in _matches(i, lit.guard, gamma, pivot, ctx)):
            continue
        group = tuple(gamma[v] for v in exported)
        chosen = best.get(group)
        if chosen is None or (t > chosen if latest else t < chosen):
            best[group] = t
    out = []
    for group in sorted(best, key=lambda g: tuple(term_key(x) for x in g)):
        if not latest:
            ctx.read(lit.atom.key, best[group])
        gamma = dict(beta)
        gamma.update(zip(exported, group))
        gamma = match_term(Var(lit.var), Int(best[group]), gamma)
        if gamma is not None:
            out.append(gamma)
    return out


def _builtin(beta, lit):
    args = tuple(apply(beta, a) for a in lit.args)
    if lit.name == '=':
        left, right = args
        if isinstance(left, Var) and is_ground(right):
            return [match_term(left, right, beta)]
        if isinstance(right, Var) and is_ground(left):
            return [match_term(right, left, beta)]
    if lit.name in _MEMBERSHIP:
        element, collection = (args[k] for k in _MEMBERSHIP[lit.name])
        if isinstance(element, Var) and is_ground(collection):
            members = sorted(set_members(collection), key=term_key)
            return [match_term(element, m, beta) for m in members]
    return [beta] if evaluate_builtin(lit.name, args) else []


def _time_comparison(i, beta, lit, ctx):
    left, right = apply(beta, lit.left), apply(beta, lit.right)
    if isinstance(left, Int) and isinstance(right, Int):
        return [beta] if evaluate_builtin(lit.op, (left, right)) else []
    open_vars = term_vars(left) | term_vars(right)
    if len(open_vars) != 1:
        raise EvaluationError(f'time comparison {format_term(left)} {lit.op} '
                              f'{format_term(right)} has unbound variables')
    # closed world: only time points the interpretation knows about
    name = open_vars.pop()
    out = []
    for t in sorted(i.times()):
        gamma = dict(beta)
        gamma[name] = Int(t)
        a, b = apply(gamma, left), apply(gamma, right)
        if isinstance(a, Int) and isinstance(b, Int) and evaluate_builtin(lit.op, (a, b)):
            ctx.read(TIME_POINTS, t)
            out.append(gamma)
    return out


def _ground_value(beta, t, what):
    value = apply(beta, t)
    if not is_ground(value):
        raise EvaluationError(f'{what} {format_term(value)} is not bound')
    return value


def _collect(i, beta, lit, pivot, ctx):
    local = lit.local_vars()
    inner = {k: v for k, v in beta.items() if k not in local}
    values = set()
    for gamma in _matches(i, lit.guard, inner, pivot, ctx):
        value = apply(gamma, lit.template)
        if not is_ground(value):
            raise EvaluationError(f'COLLECT template {format_term(lit.template)} '
                                  f'is not ground after its guard')
        values.add(value)
    gamma = match_term(Var(lit.var), SetTerm(frozenset(values)), beta)
    return [gamma] if gamma is not None else []


def satisfies(i, beta, lit, pivot=None, tboxes=None, cache=None):
    """Extensions of beta under which lit holds in i ([] when it does not).

    pivot is the integer pivot time (or the pivot term, resolved through
    beta); only DL-calls over the induced ABox need it."""
    return _satisfies(i, beta, lit, pivot, _Context(tboxes, cache))


def _satisfies(i, beta, lit, pivot, ctx):
    if isinstance(lit, Ordinary):
        return _ordinary(i, beta, lit.atom, ctx)
    if isinstance(lit, Comprehension):
        return _comprehension(i, beta, lit, pivot, ctx)
    if isinstance(lit, Builtin):
        return _builtin(beta, lit)
    if isinstance(lit, TimeCmp):
        return _time_comparison(i, beta, lit, ctx)
    if isinstance(lit, Let):
        gamma = match_term(Var(lit.var), _ground_value(beta, lit.value, 'LET value'), beta)
        return [gamma] if gamma is not None else []
    if isinstance(lit, Choose):
        options = _ground_value(beta, lit.options, 'CHOOSE options')
        out = []
        for m in sorted(set_members(options), key=term_key):
            gamma = match_term(Var(lit.var), m, beta)
            if gamma is not None:
                out.append(gamma)
        return out
    if isinstance(lit, Collect):
        return _collect(i, beta, lit, pivot, ctx)
    if isinstance(lit, MapRole):
        source = _ground_value(beta, lit.source, 'MAPROLE set')
        role = _ground_value(beta, lit.role, 'MAPROLE role')
        filler = _ground_value(beta, lit.filler, 'MAPROLE filler')
        gamma = match_term(Var(lit.out), assertion_set(set_members(source), role, filler), beta)
        return [gamma] if gamma is not None else []
    if isinstance(lit, Not):
        return [] if any(True for _ in _matches(i, lit.body, beta, pivot, ctx)) else [beta]
    if isinstance(lit, DlCall):
        d = _pivot_time(beta, pivot)
        if ctx.reads is not None:
            _record_abox_reads(ctx, beta, d, lit)
        return eval_dl_call(i, beta, d, lit, ctx.tboxes, ctx.cache)
    raise TypeError(f'not a body literal: {lit!r}')


# an atom read with an open time counts as read once the whole conjunction
# matches; later literals may still rule its time out
def _record_matched_times(ctx, body, beta):
    for lit in body:
        if isinstance(lit, Ordinary) and lit.atom.time is not None:
            t = apply(beta, lit.atom.time)
            if isinstance(t, Int):
                ctx.read(lit.atom.key, t.value)


def _record_abox_reads(ctx, beta, pivot, call):
    times = [pivot] if call.implicit else []
    for part in call.abox or ():
        if isinstance(part, AboxAt):
            t = apply(beta, part.time)
            if isinstance(t, Int):
                times.append(t.value)
    for t in times:
        if t is not None:
            ctx.read(IS_A_AT, t)
            ctx.read(HAS_A_AT, t)


def _matches(i, body, beta, pivot, ctx, k=0):
    if k == len(body):
        if ctx.reads is not None:
            _record_matched_times(ctx, body, beta)
        yield beta
        return
    for gamma in _satisfies(i, beta, body[k], pivot, ctx):
        yield from _matches(i, body, gamma, pivot, ctx, k + 1)


def _subst_key(beta):
    return tuple((k, term_key(v)) for k, v in sorted(beta.items()))


# ---------- closures ----------

@dataclass(frozen=True)
class Closure:
    rule: object
    beta: dict

    def heads(self):
        """Ground head alternatives, each a tuple of atoms."""
        out = []
        for alternative in self.rule.head:
            atoms = []
            for a in alternative:
                g = apply(self.beta, a)
                if not is_ground(g):
                    raise EvaluationError(f'head {format_atom(g)} is not ground', self.rule.rid)
                atoms.append(g)
            out.append(tuple(atoms))
        return tuple(out)

    def key(self):
        return (self.rule.rid, tuple(tuple(atom_key(a) for a in alt) for alt in self.heads()))


def split_closure(closure):
    """Head sets of the Horn closures a disjunctive closure splits into:
    one per non-empty subset of its alternatives, smallest subsets first."""
    alternatives = closure.heads()
    out = []
    for size in range(1, len(alternatives) + 1):
        for chosen in itertools.combinations(alternatives, size):
            atoms = []
            for alternative in chosen:
                atoms.extend(a for a in alternative if a not in atoms)
            out.append(tuple(atoms))
    return out


def _rule_closures(i, rule, beta0, pivot, ctx):
    try:
        return [Closure(rule, beta) for beta in _matches(i, rule.body, beta0, pivot, ctx)]
    except EvaluationError as e:
        if e.rule_id is None:
            raise EvaluationError(str(e), rule.rid) from e
        raise


# ---------- model search ----------

@dataclass
class _Branch:
    interp: Interpretation
    time: object          # STATIC or int
    phase: int
    decided: frozenset = frozenset()


class ModelSearch:
    """Depth-first possible-model enumeration for one stratified program."""

    def __init__(self, program, strata, max_steps=None, trace=False, record_reads=False):
        self.program = program
        self.strata = strata
        self.max_steps = max_steps or config.DEFAULT_MAX_STEPS
        self.trace = trace
        self.ctx = _Context(program.tboxes, reads=[] if record_reads else None)
        self.reads_checked = 0
        self.steps = 0
        self.produced = Counter()
        self.branches = 0
        self._schedule()

    def _schedule(self):
        static, timed = {}, {}
        self.disjunctive_facts, self.static_fail, self.carry, self.timed_fail = [], [], [], []
        for rule in self.program.rules:
            if rule.is_fact:
                if rule.is_disjunctive:
                    self.disjunctive_facts.append(rule)
                continue
            info = self.strata.rules[rule.rid]
            if rule.is_fail:
                (self.static_fail if info.static else self.timed_fail).append(rule)
            elif info.static:
                static.setdefault(self.strata.of_rule(rule), []).append(rule)
            elif info.carry:
                self.carry.append(rule)
            else:
                timed.setdefault(self.strata.of_rule(rule), []).append(rule)
        self.static_phases = ([(FACTS, None, self.disjunctive_facts)]
                              + [(STRATUM, s, static[s]) for s in sorted(static)]
                              + [(FAIL, None, self.static_fail)])
        self.timed_phases = ([(STRATUM, s, timed[s]) for s in sorted(timed)]
                             + [(CARRY, None, self.carry), (FAIL, None, self.timed_fail)])

    def _phases(self, time):
        return self.static_phases if time is STATIC else self.timed_phases

    def initial(self):
        i = Interpretation()
        for rule in self.program.facts():
            if not rule.is_disjunctive:
                for a in rule.head_atoms:
                    i.add(a)
        return i

    # binding of the pivot for a rule evaluated at the cursor time
    def _start(self, rule, time):
        info = self.strata.rules.get(rule.rid)
        if info is None or info.static or time is STATIC:
            return {}, None
        pivot = info.pivot
        if isinstance(pivot, Int):
            return ({}, pivot) if pivot.value == time else (None, None)
        return {pivot.name: Int(time)}, pivot

    def _closures(self, i, rule, time, kind, stratum):
        beta0, pivot = self._start(rule, time)
        if beta0 is None:
            return []
        if not rule.body:
            return [Closure(rule, {})]
        closures = _rule_closures(i, rule, beta0, pivot, self.ctx)
        if self.ctx.reads is not None:
            self._check_reads(rule, time, kind, stratum)
        return closures

    def _open(self, key, tau, time, kind, stratum):
        """Whether layer (key, tau) can still change at the cursor."""
        if time is STATIC:
            if tau is not None:
                return key != TIME_POINTS
            return kind == STRATUM and self.strata.of(key) > stratum
        if tau is None or tau < time:
            return False
        if tau > time:
            return True
        return kind == STRATUM and key != TIME_POINTS and self.strata.of(key) > stratum

    def _check_reads(self, rule, time, kind, stratum):
        reads, self.ctx.reads = self.ctx.reads, []
        self.reads_checked += len(reads)
        for key, tau in reads:
            if self._open(key, tau, time, kind, stratum):
                what = key if tau is None else f'{key} at time {tau}'
                layer = 'the static layer' if time is STATIC else f'time {time}'
                raise LayerOrderError(f'{rule.where()} read {what} while evaluating '
                                      f'{kind} phase of {layer}')

    def _check_layer(self, atom, time, kind, stratum):
        if time is STATIC:
            if (not atom.timed and kind == STRATUM
                    and self.strata.of(atom.key) < stratum):
                raise LayerOrderError(f'{format_atom(atom)} added after its static stratum closed')
            return
        if not atom.timed:
            raise LayerOrderError(f'static atom {format_atom(atom)} added at time {time}')
        tau = atom.time.value
        if tau < time:
            raise LayerOrderError(f'{format_atom(atom)} added at time {time}')
        if tau == time and (kind != STRATUM or self.strata.of(atom.key) < stratum):
            raise LayerOrderError(f'{format_atom(atom)} added after its layer at time '
                                  f'{time} closed')

    def _fire(self, branch, closure, atoms, kind, stratum):
        new = []
        for a in atoms:
            self._check_layer(a, branch.time, kind, stratum)
            if branch.interp.add(a):
                new.append(a)
        if not new:
            return False
        self.steps += 1
        self.produced.update(a.key for a in new)
        if self.trace:
            layer = 'static' if branch.time is STATIC else f't={branch.time}'
            shown = ', '.join(f'{k}={format_term(v)}' for k, v in sorted(closure.beta.items())
                              if not k.startswith('_'))
            trace_logger.info(f'{closure.rule.where()} {layer} {kind}'
                              f'{"" if stratum is None else " " + str(stratum)} '
                              f'[{shown}] -> {", ".join(format_atom(a) for a in new)}')
        if self.steps > self.max_steps:
            predicate, count = self.produced.most_common(1)[0]
            raise StepBudgetExceeded(self.max_steps, predicate, count)
        return True

    def _saturate(self, branch, rules, kind, stratum):
        normal = [r for r in rules if not r.is_disjunctive]
        changed = True
        while changed:
            changed = False
            for rule in normal:
                for closure in self._closures(branch.interp, rule, branch.time, kind, stratum):
                    (alternative,) = closure.heads()
                    changed |= self._fire(branch, closure, alternative, kind, stratum)

    def _undecided(self, branch, rules, kind, stratum):
        for rule in rules:
            if not rule.is_disjunctive:
                continue
            pending = [c for c in self._closures(branch.interp, rule, branch.time, kind, stratum)
                       if c.key() not in branch.decided]
            if pending:
                return min(pending, key=lambda c: c.key())
        return None

    def _closed(self, branch):
        i, time = branch.interp, branch.time
        for rule in self._phases(time)[branch.phase][2]:
            closures = self._closures(i, rule, time, FAIL, None)
            if closures:
                logger.debug(f'branch closed by {rule.where()} at '
                             f'{"static layer" if time is STATIC else time}')
                return True
        for key in i.keys():
            if not key.startswith('neg('):
                continue
            for a in i.lookup(key, time):
                if replace(a, negated=False) in i:
                    logger.debug(f'branch closed by {format_atom(a)} and its complement')
                    return True
        return False

    def _advance(self, branch):
        """Move the cursor one phase on; False when the branch is complete."""
        if branch.phase + 1 < len(self._phases(branch.time)):
            branch.phase += 1
            branch.decided = frozenset()
            return True
        later = {t for t in branch.interp.times() | self.program.times
                 if branch.time is STATIC or t > branch.time}
        if not later:
            return False
        branch.time, branch.phase, branch.decided = min(later), 0, frozenset()
        return True

    def run(self):
        """Yield every possible model (duplicates possible) depth first."""
        stack = [_Branch(self.initial(), STATIC, 0)]
        while stack:
            branch = stack.pop()
            self.branches += 1
            while True:
                kind, stratum, rules = self._phases(branch.time)[branch.phase]
                if kind == FAIL:
                    if self._closed(branch):
                        break
                else:
                    self._saturate(branch, rules, kind, stratum)
                    closure = self._undecided(branch, rules, kind, stratum)
                    if closure is not None:
                        decided = branch.decided | {closure.key()}
                        children = []
                        for atoms in split_closure(closure):
                            child = _Branch(branch.interp.copy(), branch.time, branch.phase, decided)
                            self._fire(child, closure, atoms, kind, stratum)
                            children.append(child)
                        stack.extend(reversed(children))
                        break
                if not self._advance(branch):
                    yield branch.interp
                    break


def model_sort_key(model):
    return tuple(atom_key(a) for a in sorted(model, key=atom_key))


def _dedupe(models):
    seen, out = set(), []
    for m in models:
        atoms = m.atoms()
        if atoms not in seen:
            seen.add(atoms)
            out.append(m)
    return sorted(out, key=model_sort_key)


def compute_possible_models(program, strata=None, max_steps=None, trace=False,
                            first_model=False, record_reads=False):
    """Possible models of an SBTP program, deduplicated, in a fixed order.

    With record_reads every body read is checked against the layer the
    engine is evaluating; a read of a layer that is still open raises
    LayerOrderError."""
    if strata is None:
        strata = compute_strata(program)
        violations = check_sbtp(program, strata)
        if violations:
            raise StratificationError(violations)
    search = ModelSearch(program, strata, max_steps=max_steps, trace=trace,
                         record_reads=record_reads)
    models = []
    for model in search.run():
        models.append(model)
        if first_model:
            break
    models = _dedupe(models)
    cache = search.ctx.cache
    logger.info(f'{len(models)} model(s) from {search.branches} branches, '
                f'{search.steps} firings, DL cache {cache.hits} hits / {cache.misses} misses')
    if record_reads:
        logger.debug(f'{search.reads_checked} body reads checked against open layers')
    return models


# ---------- post-hoc verification ----------

def verify_model(program, model, strata=None):
    """Problems found in a model, independently of how it was derived:
    unsatisfied closures, satisfied fail bodies, unsupported atoms and
    complementary pairs. Empty for a sound model."""
    if strata is None:
        strata = compute_strata(program)
    ctx = _Context(program.tboxes)
    problems = []
    supported = set()
    for rule in program.rules:
        if rule.is_fact:
            for alternative in rule.head:
                supported.update(a for a in alternative if a in model)
            if not any(all(a in model for a in alt) for alt in rule.head):
                problems.append(f'{rule.where()}: fact not satisfied')
            continue
        info = strata.rules.get(rule.rid)
        pivot = info.pivot if info is not None and not info.static else None
        for closure in _rule_closures(model, rule, {}, pivot, ctx):
            if rule.is_fail:
                problems.append(f'{rule.where()}: fail body satisfied')
                continue
            heads = closure.heads()
            satisfied = [alt for alt in heads if all(a in model for a in alt)]
            if not satisfied:
                problems.append(f'{rule.where()}: closure not satisfied '
                                f'({" or ".join(", ".join(map(format_atom, alt)) for alt in heads)})')
            for alt in satisfied:
                supported.update(alt)
    for a in sorted(model, key=atom_key):
        if a not in supported:
            problems.append(f'unsupported atom {format_atom(a)}')
        if a.negated and replace(a, negated=False) in model:
            problems.append(f'complementary atoms {format_atom(a)}')
    return problems


# ---------- ground oracle ----------

def _classical_strata(program):
    graph = nx.DiGraph()
    for rule in program.rules:
        heads = [a.key for a in rule.head_atoms]
        graph.add_nodes_from(heads)
        for a, b in zip(heads, heads[1:]):
            graph.add_edge(a, b, negative=False)
            graph.add_edge(b, a, negative=False)
        for lit in rule.body:
            negative = isinstance(lit, Not)
            for inner in (lit.body if negative else (lit,)):
                if not isinstance(inner, Ordinary):
                    raise ProgramError(f'{rule.where()}: the ground oracle only '
                                       f'handles ordinary literals')
                for h in heads:
                    if graph.has_edge(h, inner.atom.key):
                        graph[h][inner.atom.key]['negative'] |= negative
                    else:
                        graph.add_edge(h, inner.atom.key, negative=negative)
    condensed = nx.condensation(graph)
    for a, b, negative in graph.edges(data='negative'):
        if negative and condensed.graph['mapping'][a] == condensed.graph['mapping'][b]:
            raise ProgramError(f'negative cycle through {a} and {b}')
    level = {}
    for component in reversed(list(nx.topological_sort(condensed))):
        level[component] = max((level[c] for c in condensed.successors(component)),
                               default=-1) + 1
    return {key: level[condensed.graph['mapping'][key]] for key in graph.nodes}


def _ground_body_holds(atoms, body):
    for lit in body:
        if isinstance(lit, Not):
            if all(inner.atom in atoms for inner in lit.body):
                return False
        elif lit.atom not in atoms:
            return False
    return True


def ground_oracle(program):
    """Possible models of a ground program by brute force: every split
    selection, per-stratum least fixpoint, fail filter, dedupe."""
    for rule in program.rules:
        for a in rule.head_atoms:
            if not is_ground(a):
                raise ProgramError(f'{rule.where()}: the ground oracle needs a ground program')
    levels = _classical_strata(program)
    disjunctive = [r for r in program.rules if r.is_disjunctive]
    if len(disjunctive) > config.MAX_ORACLE_DISJUNCTIONS:
        raise OracleLimitError(f'{len(disjunctive)} disjunctive rules exceed the oracle '
                               f'limit of {config.MAX_ORACLE_DISJUNCTIONS}')
    normal = [r for r in program.rules if not r.is_fail and not r.is_disjunctive]
    fails = [r for r in program.rules if r.is_fail]
    choices = [split_closure(Closure(r, {})) for r in disjunctive]
    height = max(levels.values(), default=-1) + 1
    models = []
    for selection in itertools.product(*choices):
        horn = [(r.head_atoms, r.body) for r in normal]
        horn += [(atoms, r.body) for r, atoms in zip(disjunctive, selection)]
        atoms = set()
        for level in range(height):
            layer = [(h, b) for h, b in horn if levels[h[0].key] == level]
            changed = True
            while changed:
                changed = False
                for heads, body in layer:
                    if _ground_body_holds(atoms, body) and not set(heads) <= atoms:
                        atoms.update(heads)
                        changed = True
        if any(_ground_body_holds(atoms, r.body) for r in fails):
            continue
        if any(a.negated and replace(a, negated=False) in atoms for a in atoms):
            continue
        models.append(Interpretation(atoms))
    return _dedupe(models)
