# Core representation: terms, atoms, substitutions, body literals, built-ins
# and the interpretation store. Pure values, no I/O.
#
# Terms are immutable dataclasses so they hash and compare structurally and
# can be shared freely between branches. A substitution is a plain dict from
# variable name to ground term. Time is the integer sort: time positions
# hold Int, Var or Arith terms; a zero-argument atom has no time at all and
# belongs to the static layer that precedes every time point.
#
# Untimed DL-atoms used as terms (fluents, query items, assertion sets) are
# compounds with the reserved functors ISA / HASA:
#   x : C          -> $isa(x, C)
#   (x, y) : r     -> $hasa(x, r, y)
# Timed DL-atoms are ordinary atoms of the reserved predicates IsAAt(x, C)
# and HasAAt(x, r, y) with the time in the atom's time slot.

import logging
import operator

from dataclasses import dataclass

from fusecalc.errors import EvaluationError, UnknownBuiltinError

logger = logging.getLogger(__name__)

ISA = '$isa'
HASA = '$hasa'
IS_A_AT = 'IsAAt'
HAS_A_AT = 'HasAAt'
STEP = 'Step'
DL_PREDICATES = frozenset({IS_A_AT, HAS_A_AT})


# ---------- terms ----------

@dataclass(frozen=True, slots=True)
class Var:
    name: str

    @property
    def anonymous(self):
        return self.name.startswith('_')


@dataclass(frozen=True, slots=True)
class Const:
    name: str


@dataclass(frozen=True, slots=True)
class Int:
    value: int


@dataclass(frozen=True, slots=True)
class Str:
    value: str


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple


@dataclass(frozen=True, slots=True)
class SetTerm:
    """Finite set value; equal sets compare equal whatever their spelling."""
    items: frozenset


@dataclass(frozen=True, slots=True)
class Arith:
    op: str          # '+' or '-'
    left: object
    right: object


_ARITH = {'+': operator.add, '-': operator.sub}


def isa(x, concept):
    return Compound(ISA, (x, concept))


def hasa(x, role, y):
    return Compound(HASA, (x, role, y))


def term_vars(t, out=None):
    if out is None:
        out = set()
    if isinstance(t, Var):
        out.add(t.name)
    elif isinstance(t, Compound):
        for a in t.args:
            term_vars(a, out)
    elif isinstance(t, SetTerm):
        for a in t.items:
            term_vars(a, out)
    elif isinstance(t, Arith):
        term_vars(t.left, out)
        term_vars(t.right, out)
    return out


def is_ground(t):
    if isinstance(t, (Const, Int, Str)):
        return True
    if isinstance(t, Var):
        return False
    if isinstance(t, Compound):
        return all(is_ground(a) for a in t.args)
    if isinstance(t, SetTerm):
        return all(is_ground(a) for a in t.items)
    if isinstance(t, Arith):
        return False
    if isinstance(t, Atom):
        return (t.time is None or is_ground(t.time)) and all(is_ground(a) for a in t.args)
    return False


def term_key(t):
    """Total sort key over terms: numbers, strings, symbols, compounds, sets."""
    if isinstance(t, Int):
        return (0, t.value)
    if isinstance(t, Str):
        return (1, t.value)
    if isinstance(t, Const):
        return (2, t.name)
    if isinstance(t, Compound):
        return (3, t.functor, len(t.args), tuple(term_key(a) for a in t.args))
    if isinstance(t, SetTerm):
        return (4, len(t.items), tuple(sorted(term_key(a) for a in t.items)))
    if isinstance(t, Arith):
        return (5, t.op, term_key(t.left), term_key(t.right))
    return (6, t.name)


# ---------- atoms ----------

@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    time: object      # time term, or None for a static (propositional) atom
    args: tuple = ()
    negated: bool = False

    @property
    def key(self):
        """Predicate signature used for indexing and stratification."""
        return f'neg({self.pred})' if self.negated else self.pred

    @property
    def timed(self):
        return self.time is not None


def atom_vars(a, out=None):
    if out is None:
        out = set()
    if a.time is not None:
        term_vars(a.time, out)
    for t in a.args:
        term_vars(t, out)
    return out


def time_value(a):
    """Integer time of a ground atom, None for static atoms."""
    if a.time is None:
        return None
    return a.time.value


def atom_key(a):
    """Deterministic ordering: predicate, strong negation, time, arguments."""
    t = a.time.value if isinstance(a.time, Int) else -1
    return (a.pred, a.negated, t, tuple(term_key(x) for x in a.args))


# ---------- substitutions ----------

def apply(subst, e):
    """Apply a substitution to a term or atom, folding ground arithmetic."""
    if isinstance(e, Var):
        return subst.get(e.name, e)
    if isinstance(e, (Const, Int, Str)) or e is None:
        return e
    if isinstance(e, Compound):
        return Compound(e.functor, tuple(apply(subst, a) for a in e.args))
    if isinstance(e, SetTerm):
        return SetTerm(frozenset(apply(subst, a) for a in e.items))
    if isinstance(e, Arith):
        left, right = apply(subst, e.left), apply(subst, e.right)
        if isinstance(left, Int) and isinstance(right, Int):
            return Int(_ARITH[e.op](left.value, right.value))
        return Arith(e.op, left, right)
    if isinstance(e, Atom):
        return Atom(e.pred, apply(subst, e.time),
                    tuple(apply(subst, a) for a in e.args), e.negated)
    raise TypeError(f'cannot apply a substitution to {e!r}')


def match_term(pattern, value, subst):
    """One-way match of pattern against a ground value; None when it fails.

    The input substitution is never mutated."""
    if isinstance(pattern, Var):
        bound = subst.get(pattern.name)
        if bound is None:
            extended = dict(subst)
            extended[pattern.name] = value
            return extended
        return subst if bound == value else None
    if isinstance(pattern, Compound):
        if (not isinstance(value, Compound) or value.functor != pattern.functor
                or len(value.args) != len(pattern.args)):
            return None
        for p, v in zip(pattern.args, value.args):
            subst = match_term(p, v, subst)
            if subst is None:
                return None
        return subst
    if isinstance(pattern, Arith):
        ground = apply(subst, pattern)
        if isinstance(ground, Int):
            return subst if ground == value else None
        # x + k = v solves to x = v - k
        if (isinstance(ground.left, Var) and isinstance(ground.right, Int)
                and isinstance(value, Int)):
            inverse = _ARITH['-' if ground.op == '+' else '+']
            return match_term(ground.left, Int(inverse(value.value, ground.right.value)), subst)
        return None
    if isinstance(pattern, SetTerm):
        ground = apply(subst, pattern)
        return subst if ground == value else None
    return subst if pattern == value else None


def match_atom(pattern, atom, subst):
    if pattern.key != atom.key or len(pattern.args) != len(atom.args):
        return None
    if pattern.time is not None:
        subst = match_term(pattern.time, atom.time, subst)
        if subst is None:
            return None
    for p, v in zip(pattern.args, atom.args):
        subst = match_term(p, v, subst)
        if subst is None:
            return None
    return subst


# ---------- body literals ----------
#
# Each literal knows its free variables (fvar). DL-calls live in the bridge
# module and follow the same protocol.

@dataclass(frozen=True, slots=True)
class Ordinary:
    atom: Atom

    def free_vars(self):
        return atom_vars(self.atom)


@dataclass(frozen=True, slots=True)
class Comprehension:
    """p(x op bound, args) STH guard: x is the latest (for < and <=) or the
    earliest (for > and >=) time satisfying the atom and the guard."""
    var: str
    op: str
    bound: object
    atom: Atom        # time slot is Var(var)
    guard: tuple = ()

    def free_vars(self):
        out = {self.var}
        term_vars(self.bound, out)
        for t in self.atom.args:
            term_vars(t, out)
        return out


@dataclass(frozen=True, slots=True)
class Builtin:
    name: str
    args: tuple

    def free_vars(self):
        out = set()
        for t in self.args:
            term_vars(t, out)
        return out


@dataclass(frozen=True, slots=True)
class TimeCmp:
    op: str
    left: object
    right: object

    def free_vars(self):
        return term_vars(self.right, term_vars(self.left))


@dataclass(frozen=True, slots=True)
class Let:
    var: str
    value: object

    def free_vars(self):
        return term_vars(self.value, {self.var})


@dataclass(frozen=True, slots=True)
class Choose:
    var: str
    options: object

    def free_vars(self):
        return term_vars(self.options, {self.var})


@dataclass(frozen=True, slots=True)
class Collect:
    var: str
    template: object
    guard: tuple

    def free_vars(self):
        return {self.var}

    def local_vars(self):
        return term_vars(self.template)


@dataclass(frozen=True, slots=True)
class MapRole:
    """MAPROLE(out, set, role, filler): out = {(x, filler) : role | x in set}."""
    out: str
    source: object
    role: object
    filler: object

    def free_vars(self):
        out = {self.out}
        for t in (self.source, self.role, self.filler):
            term_vars(t, out)
        return out


@dataclass(frozen=True, slots=True)
class Not:
    body: tuple

    def free_vars(self):
        return set()


def fvar(b):
    """Free variables of a body literal or of a body (tuple/list)."""
    if isinstance(b, (tuple, list)):
        out = set()
        for lit in b:
            out |= lit.free_vars()
        return out
    return b.free_vars()


def literal_atoms(lit):
    """Ordinary atoms read by a literal, paired with the literal's polarity
    context: True when read positively, False inside not/comprehension/collect."""
    if isinstance(lit, Ordinary):
        yield lit.atom, True
    elif isinstance(lit, Comprehension):
        yield lit.atom, False
        for inner in lit.guard:
            for a, _ in literal_atoms(inner):
                yield a, False
    elif isinstance(lit, Collect):
        for inner in lit.guard:
            for a, _ in literal_atoms(inner):
                yield a, False
    elif isinstance(lit, Not):
        for inner in lit.body:
            for a, _ in literal_atoms(inner):
                yield a, False


# ---------- built-ins ----------

def _ordered(op):
    def compare(a, b):
        if isinstance(a, Int) and isinstance(b, Int):
            return op(a.value, b.value)
        return op(term_key(a), term_key(b))
    return compare


def _members(t):
    if isinstance(t, SetTerm):
        return t.items
    if isinstance(t, Compound) and t.functor in ('Set', 'List'):
        return frozenset(t.args)
    raise EvaluationError(f'expected a set, got {format_term(t)}')


BUILTINS = {
    '<': _ordered(operator.lt),
    '<=': _ordered(operator.le),
    '>': _ordered(operator.gt),
    '>=': _ordered(operator.ge),
    '=': operator.eq,
    '!=': operator.ne,
    '∋': lambda s, x: x in _members(s),
    '∈': lambda x, s: x in _members(s),
    'member': lambda x, s: x in _members(s),
    'subset': lambda a, b: _members(a) <= _members(b),
    'disjoint': lambda a, b: not (_members(a) & _members(b)),
}

BUILTIN_ARITY = {name: 2 for name in BUILTINS}

COMPARISONS = frozenset({'<', '<=', '>', '>='})


def evaluate_builtin(p, args):
    fn = BUILTINS.get(p)
    if fn is None:
        raise UnknownBuiltinError(f'unknown built-in {p}')
    for a in args:
        if not is_ground(a):
            raise EvaluationError(f'built-in {p} called with unbound argument {format_term(a)}')
    return bool(fn(*args))


def set_members(t):
    return _members(t)


# ---------- rendering ----------

def format_term(t):
    if isinstance(t, Var):
        return '_' if t.anonymous else t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Str):
        escaped = t.value.replace('\\', '\\\\').replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(t, Compound):
        if t.functor == ISA:
            return f'{format_term(t.args[0])} : {format_term(t.args[1])}'
        if t.functor == HASA:
            x, r, y = t.args
            return f'({format_term(x)}, {format_term(y)}) : {format_term(r)}'
        return f'{t.functor}({", ".join(format_term(a) for a in t.args)})'
    if isinstance(t, SetTerm):
        items = sorted(t.items, key=term_key)
        return '{' + ', '.join(format_term(a) for a in items) + '}'
    if isinstance(t, Arith):
        return f'{format_term(t.left)}{t.op}{format_term(t.right)}'
    raise TypeError(f'not a term: {t!r}')


def format_atom(a):
    if a.pred == IS_A_AT and len(a.args) == 2 and a.time is not None:
        x, c = a.args
        text = f'{format_term(x)} : {format_term(c)} @ {format_term(a.time)}'
    elif a.pred == HAS_A_AT and len(a.args) == 3 and a.time is not None:
        x, r, y = a.args
        text = f'({format_term(x)}, {format_term(y)}) : {format_term(r)} @ {format_term(a.time)}'
    elif a.time is None:
        text = a.pred
    else:
        args = ', '.join(format_term(t) for t in (a.time,) + a.args)
        text = f'{a.pred}({args})'
    return f'neg({text})' if a.negated else text


# ---------- interpretations ----------

class Interpretation:
    """Finite set of ground atoms indexed by predicate signature and time.

    Owned by one branch at a time; `copy()` before handing it to a sibling."""

    def __init__(self, atoms=()):
        self._index = {}      # key -> {time -> set(atom)}
        self._times = set()
        self._size = 0
        for a in atoms:
            self.add(a)

    def add(self, atom):
        t = time_value(atom)
        by_time = self._index.setdefault(atom.key, {})
        bucket = by_time.setdefault(t, set())
        if atom in bucket:
            return False
        bucket.add(atom)
        self._size += 1
        if t is not None:
            self._times.add(t)
        return True

    def __contains__(self, atom):
        bucket = self._index.get(atom.key, {}).get(time_value(atom))
        return bucket is not None and atom in bucket

    def __len__(self):
        return self._size

    def __iter__(self):
        for by_time in self._index.values():
            for bucket in by_time.values():
                yield from bucket

    def lookup(self, key, time=...):
        """Atoms of a signature, optionally restricted to one time (None = static)."""
        by_time = self._index.get(key)
        if not by_time:
            return ()
        if time is ...:
            return [a for bucket in by_time.values() for a in bucket]
        return by_time.get(time, ())

    def times_of(self, key):
        return sorted(t for t in self._index.get(key, {}) if t is not None)

    def times(self):
        return set(self._times)

    def keys(self):
        return set(self._index)

    def count(self, key):
        return sum(len(b) for b in self._index.get(key, {}).values())

    def copy(self):
        clone = Interpretation()
        clone._index = {k: {t: set(b) for t, b in v.items()} for k, v in self._index.items()}
        clone._times = set(self._times)
        clone._size = self._size
        return clone

    def atoms(self):
        return frozenset(self)

    def __eq__(self, other):
        if isinstance(other, Interpretation):
            return self.atoms() == other.atoms()
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        shown = ', '.join(format_atom(a) for a in sorted(self, key=atom_key))
        return f'Interpretation({{{shown}}})'
