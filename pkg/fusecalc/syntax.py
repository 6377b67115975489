# Program text <-> Program values.
#
# A lark grammar (Earley, positions propagated) turns `.fmp` text into a
# parse tree; _ProgramBuilder folds the tree into kernel/bridge values.
# Static checks that need a whole program (range restriction, sorts,
# arities, TBox references) run in check_program, after every input file
# and the prelude have been merged.
#
# Conventions carried by the grammar:
#   * uppercase identifiers are predicates, constants and concept names,
#     lowercase identifiers are variables, `_` is anonymous;
#   * the first argument of an ordinary atom is its time term, a bare
#     `P` is an untimed (static) atom;
#   * `x : C @ t` / `(x, y) : r @ t` are timed DL-atoms, `x : C` and
#     `(x, y) : r` untimed DL-atoms used as terms.

import logging
import re

from dataclasses import dataclass, field, replace

import lark

from lark import Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from fusecalc import dl
from fusecalc.bridge import (
    ENTAILS, IS_SAT, IS_UNSAT, AboxAt, DlCall, LintWarning, iter_dl_calls,
)
from fusecalc.errors import (
    ArityError, EvaluationError, FusecalcError, ParseError,
    RangeRestrictionError, SortError, UnknownBuiltinError, UnknownTBoxError,
)
from fusecalc.kernel import (
    BUILTIN_ARITY, BUILTINS, COMPARISONS, HAS_A_AT, HASA, IS_A_AT, ISA, STEP,
    Arith, Atom, Builtin, Choose, Collect, Comprehension, Compound, Const,
    Int, Let, MapRole, Not, Ordinary, SetTerm, Str, TimeCmp, Var, atom_key,
    atom_vars, format_atom, format_term, fvar, term_vars,
)

logger = logging.getLogger(__name__)

GRAMMAR = r"""
start: _item*
_item: rule | tbox_block | times_directive

rule: head (_IMPLIES body?)? "."

head: _FAIL                                     -> fail_head
    | alternative (_OR alternative)*            -> disjunctive_head
alternative: atom (_AND atom)*
           | "(" atom (_AND atom)* ")"

atom: NAME "(" args ")"                         -> ordinary_atom
    | NAME                                      -> static_atom
    | _NEG "(" atom ")"                         -> neg_atom
    | term ":" term "@" term                    -> isa_at
    | "(" term "," term ")" ":" term "@" term   -> hasa_at

body: literal ("," literal)*
guard: literal
     | "(" literal ("," literal)* ")"

?literal: atom                                  -> positive
    | _NOT literal                              -> negation
    | _NOT "(" literal ("," literal)* ")"       -> negation
    | NAME "(" VAR CMP term ("," arg)* ")" (_STH guard)?   -> comprehension
    | term CMP term                             -> comparison
    | VAR "(" args ")"                          -> named_builtin
    | _LET "(" VAR "," arg ")"                  -> let_form
    | _CHOOSE "(" VAR "," arg ")"               -> choose_form
    | _COLLECT "(" VAR "," arg _STH guard ")"   -> collect_form
    | _MAPROLE "(" VAR "," term "," term "," term ")"      -> maprole_form
    | IDENT _ENTAILS query                      -> implicit_entails
    | "(" abox_expr "," IDENT ")" _ENTAILS query           -> explicit_entails
    | DLSAT "(" IDENT ")"                       -> implicit_sat
    | DLSAT "(" abox_expr "," IDENT ")"         -> explicit_sat

query: dl_term
     | "[" dl_term ("," dl_term)* "]"

abox_expr: abox_part (_UNION abox_part)*
abox_part: _ABOXAT "(" term ")"                 -> aboxat_part
         | VAR                                  -> var_part
         | "{" [args] "}"                       -> set_part

args: arg ("," arg)*
?arg: term
    | dl_term
dl_term: term ":" term                          -> isa_term
       | "(" term "," term ")" ":" term         -> hasa_term

?term: term "+" primary                         -> add
     | term "-" primary                         -> sub
     | primary
?primary: VAR                                   -> var
        | ANON                                  -> anon
        | NAME                                  -> const
        | NAME "(" args ")"                     -> compound
        | INT                                   -> int
        | STRING                                -> string
        | "{" [args] "}"                        -> set_term

tbox_block: _TBOX IDENT "{" tbox_item* "}"
tbox_item: arg _SUBSUMED arg "."                -> gci
         | arg _EQUIV arg "."                   -> equivalence
         | _FUNCTIONAL IDENT "."                -> functional

times_directive: "#times" INT ("," INT)* "."

_IMPLIES: /:--?/
_FAIL: /fail(?![A-Za-z0-9_])/
_OR: /or(?![A-Za-z0-9_])/
_AND: /and(?![A-Za-z0-9_])/
_NOT: /not(?![A-Za-z0-9_])/
_NEG: /neg(?![A-Za-z0-9_])/
_STH: /STH(?![A-Za-z0-9_])/
_LET: /(?:LET|let)(?![A-Za-z0-9_])/
_CHOOSE: /(?:CHOOSE|choose)(?![A-Za-z0-9_])/
_COLLECT: /COLLECT(?![A-Za-z0-9_])/
_MAPROLE: /MAPROLE(?![A-Za-z0-9_])/
_ABOXAT: /ABOXAT(?![A-Za-z0-9_])/
_TBOX: /tbox(?![A-Za-z0-9_])/
_FUNCTIONAL: /functional(?![A-Za-z0-9_])/
DLSAT: /DLIS(?:UN)?SAT(?![A-Za-z0-9_])/
_ENTAILS: "⊨" | "|="
_UNION: "++" | "∪"
_SUBSUMED: "⊑" | "<="
_EQUIV: "≡" | "=="
CMP: "<=" | ">=" | "!=" | "≤" | "≥" | "<" | ">" | "=" | "∋" | "∈"

NAME: /(?!(?:LET|CHOOSE|COLLECT|MAPROLE|DLISSAT|DLISUNSAT|ABOXAT|STH)(?![A-Za-z0-9_]))[A-Z][A-Za-z0-9_]*/
VAR: /(?!(?:not|or|and|neg|fail|let|choose)(?![A-Za-z0-9_]))[a-z][A-Za-z0-9_]*/
IDENT: /[A-Za-z][A-Za-z0-9_]*/
ANON: /_[A-Za-z0-9_]*/
INT: /-?[0-9]+/
STRING: /"(?:\\.|[^"\\])*"/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_parser = lark.Lark(GRAMMAR, parser='earley', propagate_positions=True)

_OPERATOR_SPELLINGS = {'≤': '<=', '≥': '>='}

INFIX_BUILTINS = COMPARISONS | {'=', '!=', '∋', '∈'}


# ---------- program values ----------

@dataclass(frozen=True)
class Rule:
    """head: tuple of alternatives (each a tuple of atoms), None for fail."""
    head: tuple
    body: tuple = ()
    rid: int = field(default=0, compare=False)
    line: int = field(default=None, compare=False)
    label: str = field(default=None, compare=False)

    @property
    def is_fail(self):
        return self.head is None

    @property
    def is_fact(self):
        return not self.is_fail and not self.body

    @property
    def is_disjunctive(self):
        return not self.is_fail and len(self.head) > 1

    @property
    def head_atoms(self):
        if self.is_fail:
            return ()
        return tuple(a for alternative in self.head for a in alternative)

    def where(self):
        if self.line is not None:
            return f'rule {self.rid} (line {self.line})'
        if self.label:
            return f'rule {self.rid} ({self.label})'
        return f'rule {self.rid}'


@dataclass
class Program:
    rules: tuple = ()
    tboxes: dict = field(default_factory=dict)
    times: frozenset = frozenset()

    def merge(self, other):
        """Concatenate two programs; rule ids are renumbered from 1."""
        tboxes = dict(self.tboxes)
        for name, tbox in other.tboxes.items():
            tboxes[name] = _merge_tboxes(tboxes[name], tbox) if name in tboxes else tbox
        rules = self.rules + other.rules
        return Program(renumber(rules), tboxes, self.times | other.times)

    def with_rules(self, extra):
        return Program(renumber(self.rules + tuple(extra)), dict(self.tboxes), self.times)

    def facts(self):
        return [r for r in self.rules if r.is_fact]


def renumber(rules):
    return tuple(replace(r, rid=k) for k, r in enumerate(rules, start=1))


def _merge_tboxes(a, b):
    return dl.TBox(a.name, a.gcis + tuple(g for g in b.gcis if g not in a.gcis),
                   a.functional | b.functional)


# ---------- tree -> values ----------

def _line(meta):
    return getattr(meta, 'line', None) if not getattr(meta, 'empty', True) else None


def _unescape(token):
    return re.sub(r'\\(.)', r'\1', token[1:-1])


class _ProgramBuilder(Transformer):
    def __init__(self):
        super().__init__()
        self._anonymous = 0

    # terms
    def var(self, children):
        return Var(str(children[0]))

    def anon(self, children):
        self._anonymous += 1
        return Var(f'_{self._anonymous}')

    def const(self, children):
        return Const(str(children[0]))

    def compound(self, children):
        name, args = str(children[0]), children[1]
        if name in ('Set', 'List'):
            return SetTerm(frozenset(args))
        return Compound(name, tuple(args))

    def int(self, children):
        return Int(int(children[0]))

    def string(self, children):
        return Str(_unescape(str(children[0])))

    def set_term(self, children):
        return SetTerm(frozenset(children[0] or ()))

    def add(self, children):
        left, right = children
        if isinstance(left, Int) and isinstance(right, Int):
            return Int(left.value + right.value)
        return Arith('+', left, right)

    def sub(self, children):
        left, right = children
        if isinstance(left, Int) and isinstance(right, Int):
            return Int(left.value - right.value)
        return Arith('-', left, right)

    def args(self, children):
        return list(children)

    def isa_term(self, children):
        x, c = children
        return Compound(ISA, (x, c))

    def hasa_term(self, children):
        x, y, r = children
        return Compound(HASA, (x, r, y))

    # atoms
    @v_args(meta=True)
    def ordinary_atom(self, meta, children):
        name, args = str(children[0]), children[1]
        if name == IS_A_AT and len(args) == 3:
            return Atom(IS_A_AT, args[2], (args[0], args[1]))
        if name == HAS_A_AT and len(args) == 4:
            return Atom(HAS_A_AT, args[3], (args[0], args[1], args[2]))
        return Atom(name, args[0], tuple(args[1:]))

    def static_atom(self, children):
        return Atom(str(children[0]), None)

    @v_args(meta=True)
    def neg_atom(self, meta, children):
        atom = children[0]
        if atom.negated:
            raise ParseError('strong negation cannot be nested', _line(meta))
        return replace(atom, negated=True)

    def isa_at(self, children):
        x, c, t = children
        return Atom(IS_A_AT, t, (x, c))

    def hasa_at(self, children):
        x, y, r, t = children
        return Atom(HAS_A_AT, t, (x, r, y))

    # heads
    def alternative(self, children):
        return tuple(children)

    def disjunctive_head(self, children):
        return tuple(children)

    def fail_head(self, children):
        return None

    # bodies
    def body(self, children):
        return tuple(children)

    def guard(self, children):
        return tuple(children)

    def positive(self, children):
        return Ordinary(children[0])

    @v_args(meta=True)
    def negation(self, meta, children):
        if any(isinstance(lit, Not) for lit in children):
            raise ParseError('negation cannot be nested', _line(meta))
        return Not(tuple(children))

    @v_args(meta=True)
    def comprehension(self, meta, children):
        name, var, op, bound, *rest = children
        guard = ()
        if rest and isinstance(rest[-1], tuple):
            guard = rest.pop()
        op = _OPERATOR_SPELLINGS.get(str(op), str(op))
        if op not in COMPARISONS:
            raise ParseError(f'comprehension operator must be one of <, <=, >, >=, got {op}',
                             _line(meta))
        atom = Atom(str(name), Var(str(var)), tuple(rest))
        return Comprehension(str(var), op, bound, atom, guard)

    def comparison(self, children):
        left, op, right = children
        op = _OPERATOR_SPELLINGS.get(str(op), str(op))
        return Builtin(op, (left, right))

    @v_args(meta=True)
    def named_builtin(self, meta, children):
        name, args = str(children[0]), children[1]
        if name not in BUILTINS:
            raise UnknownBuiltinError(f'unknown built-in {name}', _line(meta))
        if len(args) != BUILTIN_ARITY[name]:
            raise ArityError(f'built-in {name} takes {BUILTIN_ARITY[name]} arguments, '
                             f'got {len(args)}', _line(meta))
        return Builtin(name, tuple(args))

    def let_form(self, children):
        var, value = children
        return Let(str(var), value)

    def choose_form(self, children):
        var, options = children
        return Choose(str(var), options)

    def collect_form(self, children):
        var, template, guard = children
        return Collect(str(var), template, guard)

    def maprole_form(self, children):
        out, source, role, filler = children
        return MapRole(str(out), source, role, filler)

    def query(self, children):
        return tuple(children)

    def abox_expr(self, children):
        return tuple(children)

    def aboxat_part(self, children):
        return AboxAt(children[0])

    def var_part(self, children):
        return Var(str(children[0]))

    def set_part(self, children):
        return SetTerm(frozenset(children[0] or ()))

    def implicit_entails(self, children):
        tbox, query = children
        return DlCall(ENTAILS, str(tbox), None, query)

    def explicit_entails(self, children):
        abox, tbox, query = children
        return DlCall(ENTAILS, str(tbox), abox, query)

    def implicit_sat(self, children):
        kind, tbox = children
        return DlCall(IS_SAT if kind == 'DLISSAT' else IS_UNSAT, str(tbox))

    def explicit_sat(self, children):
        kind, abox, tbox = children
        return DlCall(IS_SAT if kind == 'DLISSAT' else IS_UNSAT, str(tbox), abox)

    # top level
    @v_args(meta=True)
    def rule(self, meta, children):
        head = children[0]
        body = children[1] if len(children) > 1 else ()
        line = _line(meta)
        body = _classify_time_comparisons(head, body)
        return Rule(head, body, line=line)

    def gci(self, children):
        return ('gci', children[0], children[1])

    def equivalence(self, children):
        return ('equivalence', children[0], children[1])

    def functional(self, children):
        return ('functional', str(children[0]))

    @v_args(meta=True)
    def tbox_block(self, meta, children):
        name, items = str(children[0]), children[1:]
        gcis, functional = [], set()
        try:
            for item in items:
                if item[0] == 'functional':
                    functional.add(dl.Role(item[1]))
                    continue
                lhs, rhs = dl.term_to_concept(item[1]), dl.term_to_concept(item[2])
                gcis.append((lhs, rhs))
                if item[0] == 'equivalence':
                    gcis.append((rhs, lhs))
        except EvaluationError as e:
            raise SortError(f'tbox {name}: {e}', _line(meta)) from None
        return dl.TBox(name, tuple(gcis), frozenset(functional))

    def times_directive(self, children):
        return frozenset(int(t) for t in children)

    def start(self, children):
        rules, tboxes, times = [], {}, frozenset()
        for item in children:
            if isinstance(item, Rule):
                rules.append(item)
            elif isinstance(item, dl.TBox):
                tboxes[item.name] = (_merge_tboxes(tboxes[item.name], item)
                                     if item.name in tboxes else item)
            else:
                times |= item
        return Program(renumber(rules), tboxes, times)


def _time_terms(head, body):
    """Time positions of a rule: time slots, comprehension bounds, Step's
    second argument and ABOXAT arguments."""
    out = []
    for a in (head and [x for alt in head for x in alt]) or ():
        if a.time is not None:
            out.append(a.time)

    def walk(lits):
        for lit in lits:
            if isinstance(lit, Ordinary):
                if lit.atom.time is not None:
                    out.append(lit.atom.time)
                if lit.atom.pred == STEP and lit.atom.args:
                    out.append(lit.atom.args[0])
            elif isinstance(lit, Comprehension):
                out.extend((Var(lit.var), lit.bound))
                walk(lit.guard)
            elif isinstance(lit, Collect):
                walk(lit.guard)
            elif isinstance(lit, Not):
                walk(lit.body)
            elif isinstance(lit, DlCall):
                out.extend(p.time for p in lit.abox or () if isinstance(p, AboxAt))
    walk(body)
    return out


def _is_time_like(t):
    if isinstance(t, (Int, Var)):
        return True
    if isinstance(t, Arith):
        return _is_time_like(t.left) and _is_time_like(t.right)
    return False


def _classify_time_comparisons(head, body):
    """Ordering comparisons between time terms become TimeCmp literals."""
    time_vars = set()
    for t in _time_terms(head, body):
        term_vars(t, time_vars)

    def convert(lits):
        out = []
        for lit in lits:
            if (isinstance(lit, Builtin) and lit.name in COMPARISONS
                    and all(_is_time_like(a) for a in lit.args)
                    and any(term_vars(a) & time_vars for a in lit.args)):
                lit = TimeCmp(lit.name, lit.args[0], lit.args[1])
            elif isinstance(lit, Not):
                lit = Not(convert(lit.body))
            elif isinstance(lit, Comprehension) and lit.guard:
                lit = replace(lit, guard=convert(lit.guard))
            elif isinstance(lit, Collect):
                lit = replace(lit, guard=convert(lit.guard))
            out.append(lit)
        return tuple(out)
    return convert(body)


def _describe(e):
    if isinstance(e, UnexpectedEOF):
        return 'unexpected end of input'
    token = getattr(e, 'token', None)
    if token is not None:
        return f'unexpected {token!r}'
    char = getattr(e, 'char', None)
    if char is not None:
        return f'unexpected character {char!r}'
    return 'syntax error'


def parse_program(text):
    """Parse program text. Raises ParseError (with line/column) and the
    load-time errors detected while building (unknown built-ins, ...)."""
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as e:
        line = e.line if getattr(e, 'line', -1) not in (None, -1) else None
        column = e.column if getattr(e, 'column', -1) not in (None, -1) else None
        raise ParseError(_describe(e), line, column) from None
    try:
        program = _ProgramBuilder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, FusecalcError):
            raise e.orig_exc from None
        raise
    logger.debug(f'parsed {len(program.rules)} rules, {len(program.tboxes)} tboxes')
    return program


def parse_file(path):
    with open(path, encoding='utf-8') as f:
        text = f.read()
    program = parse_program(text)
    logger.info(f'loaded {path}: {len(program.rules)} rules')
    return program


# ---------- static checks ----------

def _rule_atoms(rule):
    """Every atom a rule mentions, heads included, nested bodies included."""
    yield from rule.head_atoms

    def walk(lits):
        for lit in lits:
            if isinstance(lit, Ordinary):
                yield lit.atom
            elif isinstance(lit, Comprehension):
                yield lit.atom
                yield from walk(lit.guard)
            elif isinstance(lit, Collect):
                yield from walk(lit.guard)
            elif isinstance(lit, Not):
                yield from walk(lit.body)
    yield from walk(rule.body)


def _check_range_restriction(rule):
    if rule.is_fail:
        return
    bound = fvar(rule.body)
    unbound = set()
    for a in rule.head_atoms:
        unbound |= atom_vars(a) - bound
    if unbound:
        shown = sorted('_' if v.startswith('_') else v for v in unbound)
        what = 'fact' if rule.is_fact else 'head'
        raise RangeRestrictionError(
            f'{rule.where()}: {what} variables {", ".join(shown)} are not bound by the body',
            unbound, rule.line)


def _check_sorts(rule):
    for a in _rule_atoms(rule):
        if a.time is not None and not _is_time_like(a.time):
            raise SortError(f'{rule.where()}: {format_term(a.time)} in the time position '
                            f'of {a.pred} is not a time term', rule.line)
        if a.pred in (IS_A_AT, HAS_A_AT) and len(a.args) != (2 if a.pred == IS_A_AT else 3):
            raise ArityError(f'{rule.where()}: malformed DL-atom {format_atom(a)}', rule.line)


def _check_arities(program):
    seen = {}
    for rule in program.rules:
        for a in _rule_atoms(rule):
            arity = len(a.args) + 1 if a.timed else 0
            first = seen.setdefault(a.pred, (arity, rule))
            if first[0] != arity:
                raise ArityError(
                    f'{rule.where()}: {a.pred} used with {arity} argument(s), '
                    f'but with {first[0]} in {first[1].where()}', rule.line)


def _collect_shadowing(rule):
    warnings = []
    outer = set()
    for a in rule.head_atoms:
        atom_vars(a, outer)
    for lit in rule.body:
        if not isinstance(lit, Collect):
            outer |= lit.free_vars()
    for lit in rule.body:
        if isinstance(lit, Collect):
            shadowed = lit.local_vars() & outer
            if shadowed:
                warnings.append(LintWarning(
                    rule.rid, rule.line,
                    f'COLLECT template variable(s) {", ".join(sorted(shadowed))} shadow '
                    f'bindings of the enclosing rule'))
    return warnings


def check_program(program):
    """Whole-program static checks; returns warnings, raises on errors."""
    warnings = []
    for rule in program.rules:
        _check_range_restriction(rule)
        _check_sorts(rule)
        for call, _ in iter_dl_calls(rule.body):
            if call.tbox not in program.tboxes:
                raise UnknownTBoxError(f'{rule.where()}: unknown tbox {call.tbox}', rule.line)
        warnings += _collect_shadowing(rule)
    _check_arities(program)
    for w in warnings:
        logger.debug(f'check: {w}')
    return warnings


# ---------- rendering ----------

def format_concept(c):
    k = c.kind
    if k is dl.ConceptType.TOP:
        return 'Top'
    if k is dl.ConceptType.BOTTOM:
        return 'Bottom'
    if k is dl.ConceptType.NAME:
        return c.name
    if k is dl.ConceptType.NOT:
        return f'Not({format_concept(c.children[0])})'
    if k in (dl.ConceptType.AND, dl.ConceptType.OR):
        functor = 'And' if k is dl.ConceptType.AND else 'Or'
        return f'{functor}({format_concept(c.children[0])}, {format_concept(c.children[1])})'
    functor = 'Exists' if k is dl.ConceptType.EXISTS else 'Forall'
    return f'{functor}({format_role(c.role)}, {format_concept(c.children[0])})'


def format_role(r):
    return f'Inverse({r.name})' if r.inverse else r.name


def _format_guard(guard):
    if len(guard) == 1:
        return format_literal(guard[0])
    return '(' + ', '.join(format_literal(g) for g in guard) + ')'


def _format_abox(parts):
    shown = []
    for p in parts:
        shown.append(f'ABOXAT({format_term(p.time)})' if isinstance(p, AboxAt) else format_term(p))
    return ' ++ '.join(shown)


def format_literal(lit):
    if isinstance(lit, Ordinary):
        return format_atom(lit.atom)
    if isinstance(lit, Comprehension):
        args = ''.join(f', {format_term(t)}' for t in lit.atom.args)
        text = f'{lit.atom.pred}({lit.var} {lit.op} {format_term(lit.bound)}{args})'
        return f'{text} STH {_format_guard(lit.guard)}' if lit.guard else text
    if isinstance(lit, (Builtin, TimeCmp)):
        name = lit.name if isinstance(lit, Builtin) else lit.op
        args = lit.args if isinstance(lit, Builtin) else (lit.left, lit.right)
        if name in INFIX_BUILTINS:
            return f'{format_term(args[0])} {name} {format_term(args[1])}'
        return f'{name}({", ".join(format_term(a) for a in args)})'
    if isinstance(lit, Let):
        return f'LET({lit.var}, {format_term(lit.value)})'
    if isinstance(lit, Choose):
        return f'CHOOSE({lit.var}, {format_term(lit.options)})'
    if isinstance(lit, Collect):
        return f'COLLECT({lit.var}, {format_term(lit.template)} STH {_format_guard(lit.guard)})'
    if isinstance(lit, MapRole):
        return (f'MAPROLE({lit.out}, {format_term(lit.source)}, {format_term(lit.role)}, '
                f'{format_term(lit.filler)})')
    if isinstance(lit, Not):
        if len(lit.body) == 1:
            return f'not {format_literal(lit.body[0])}'
        return 'not(' + ', '.join(format_literal(b) for b in lit.body) + ')'
    if isinstance(lit, DlCall):
        if lit.kind == ENTAILS:
            query = (format_term(lit.query[0]) if len(lit.query) == 1
                     else '[' + ', '.join(format_term(q) for q in lit.query) + ']')
            kb = lit.tbox if lit.implicit else f'({_format_abox(lit.abox)}, {lit.tbox})'
            return f'{kb} ⊨ {query}'
        keyword = 'DLISSAT' if lit.kind == IS_SAT else 'DLISUNSAT'
        if lit.implicit:
            return f'{keyword}({lit.tbox})'
        return f'{keyword}({_format_abox(lit.abox)}, {lit.tbox})'
    raise TypeError(f'not a body literal: {lit!r}')


def _format_head(head):
    if head is None:
        return 'fail'
    parts = []
    for alternative in head:
        text = ' and '.join(format_atom(a) for a in alternative)
        parts.append(f'({text})' if len(alternative) > 1 and len(head) > 1 else text)
    return ' or '.join(parts)


def render_rule(rule):
    head = _format_head(rule.head)
    if not rule.body:
        text = f'{head}.'
    else:
        text = f'{head} :- {", ".join(format_literal(lit) for lit in rule.body)}.'
    return f'{text} // {rule.label}' if rule.label else text


def render_tbox(tbox):
    lines = [f'tbox {tbox.name} {{']
    for lhs, rhs in tbox.gcis:
        lines.append(f'  {format_concept(lhs)} ⊑ {format_concept(rhs)}.')
    for role in sorted(tbox.functional, key=str):
        lines.append(f'  functional {role.name}.')
    lines.append('}')
    return '\n'.join(lines)


def render_program(program):
    parts = [render_tbox(t) for _, t in sorted(program.tboxes.items())]
    if program.times:
        parts.append('#times ' + ', '.join(str(t) for t in sorted(program.times)) + '.')
    parts += [render_rule(r) for r in program.rules]
    return '\n'.join(parts) + ('\n' if parts else '')


def sorted_atoms(i):
    return sorted(i, key=atom_key)


def render_model(i):
    """One atom per line in (predicate, negation, time, arguments) order."""
    return '\n'.join(format_atom(a) for a in sorted_atoms(i))
