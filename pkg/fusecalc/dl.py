# ALCIF reasoner: concept AST, ABox/TBox values, NNF, unique-name
# encoding, KB satisfiability by tableau and ground query entailment by
# refutation. Pure functions of (ABox, TBox); no I/O.
#
# Tableau outline:
#   * ABox individuals become root nodes, generated nodes form trees below
#     them; edges are stored in both directions (inverse role on the way
#     back), so r-neighbours of x are read off x's own edge map.
#   * GCIs with a concept name on the left are unfolded lazily (A in L(x)
#     adds the right side); every other GCI is internalised as
#     nnf(not C or D) in every label.
#   * Rule order per round: clash check, and, unfolding, forall,
#     functional merge, then or (branch, depth first) and exists (one new
#     node at a time, skipped for blocked nodes).
#   * Pairwise blocking over generated nodes; merging a generated node
#     prunes its generated subtree first.
#   * A step/node budget turns runaway searches into DLUnknownError instead
#     of a guess.

import logging

from dataclasses import dataclass
from enum import Enum, auto
from functools import cached_property

from fusecalc import config
from fusecalc.errors import DLUnknownError, EvaluationError
from fusecalc.kernel import Compound, Const, format_term, term_key

logger = logging.getLogger(__name__)


class ConceptType(Enum):
    TOP = auto()
    BOTTOM = auto()
    NAME = auto()
    NOT = auto()
    AND = auto()
    OR = auto()
    EXISTS = auto()
    FORALL = auto()


@dataclass(frozen=True)
class Role:
    name: str
    inverse: bool = False

    def inv(self):
        return Role(self.name, not self.inverse)

    def __str__(self):
        return f'{self.name}⁻' if self.inverse else self.name


@dataclass(frozen=True)
class Concept:
    kind: ConceptType
    name: str = None
    role: Role = None
    children: tuple = ()

    def __str__(self):
        k = self.kind
        if k is ConceptType.TOP:
            return '⊤'
        if k is ConceptType.BOTTOM:
            return '⊥'
        if k is ConceptType.NAME:
            return self.name
        if k is ConceptType.NOT:
            return f'¬{self.children[0]}'
        if k is ConceptType.AND:
            return f'({self.children[0]} ⊓ {self.children[1]})'
        if k is ConceptType.OR:
            return f'({self.children[0]} ⊔ {self.children[1]})'
        if k is ConceptType.EXISTS:
            return f'∃{self.role}.{self.children[0]}'
        return f'∀{self.role}.{self.children[0]}'


TOP = Concept(ConceptType.TOP)
BOTTOM = Concept(ConceptType.BOTTOM)


def name(n):
    return Concept(ConceptType.NAME, name=n)


def neg(c):
    return Concept(ConceptType.NOT, children=(c,))


def conj(a, b):
    return Concept(ConceptType.AND, children=(a, b))


def disj(a, b):
    return Concept(ConceptType.OR, children=(a, b))


def some(role, c):
    return Concept(ConceptType.EXISTS, role=role, children=(c,))


def only(role, c):
    return Concept(ConceptType.FORALL, role=role, children=(c,))


def nnf(c):
    """Push negation inwards until it only applies to concept names."""
    k = c.kind
    if k in (ConceptType.NAME, ConceptType.TOP, ConceptType.BOTTOM):
        return c
    if k in (ConceptType.AND, ConceptType.OR):
        return Concept(k, children=tuple(nnf(x) for x in c.children))
    if k in (ConceptType.EXISTS, ConceptType.FORALL):
        return Concept(k, role=c.role, children=(nnf(c.children[0]),))
    inner = c.children[0]
    ik = inner.kind
    if ik is ConceptType.NAME:
        return c
    if ik is ConceptType.TOP:
        return BOTTOM
    if ik is ConceptType.BOTTOM:
        return TOP
    if ik is ConceptType.NOT:
        return nnf(inner.children[0])
    if ik is ConceptType.AND:
        return Concept(ConceptType.OR, children=tuple(nnf(neg(x)) for x in inner.children))
    if ik is ConceptType.OR:
        return Concept(ConceptType.AND, children=tuple(nnf(neg(x)) for x in inner.children))
    if ik is ConceptType.EXISTS:
        return only(inner.role, nnf(neg(inner.children[0])))
    return some(inner.role, nnf(neg(inner.children[0])))


def _complement(c):
    """Complement of a literal concept in NNF, None for anything compound."""
    if c.kind is ConceptType.NAME:
        return neg(c)
    if c.kind is ConceptType.NOT:
        return c.children[0]
    if c.kind is ConceptType.TOP:
        return BOTTOM
    if c.kind is ConceptType.BOTTOM:
        return TOP
    return None


# ---------- knowledge bases ----------

@dataclass(frozen=True)
class ConceptAssertion:
    individual: object      # ground kernel term
    concept: Concept

    def __str__(self):
        return f'{format_term(self.individual)} : {self.concept}'


@dataclass(frozen=True)
class RoleAssertion:
    subject: object
    filler: object
    role: Role

    def normalized(self):
        if self.role.inverse:
            return RoleAssertion(self.filler, self.subject, self.role.inv())
        return self

    def __str__(self):
        return f'({format_term(self.subject)}, {format_term(self.filler)}) : {self.role}'


@dataclass(frozen=True)
class ABox:
    concepts: frozenset = frozenset()
    roles: frozenset = frozenset()

    @classmethod
    def of(cls, assertions):
        concepts, roles = set(), set()
        for a in assertions:
            if isinstance(a, ConceptAssertion):
                concepts.add(a)
            else:
                roles.add(a.normalized())
        return cls(frozenset(concepts), frozenset(roles))

    def individuals(self):
        out = {a.individual for a in self.concepts}
        for r in self.roles:
            out.add(r.subject)
            out.add(r.filler)
        return out

    def union(self, other):
        return ABox(self.concepts | other.concepts, self.roles | other.roles)

    def __len__(self):
        return len(self.concepts) + len(self.roles)

    def __iter__(self):
        yield from self.concepts
        yield from self.roles


@dataclass(frozen=True)
class TBox:
    name: str = 'tbox'
    gcis: tuple = ()                 # (C, D) pairs meaning C ⊑ D
    functional: frozenset = frozenset()

    @cached_property
    def _prepared(self):
        unfold, general = {}, []
        for lhs, rhs in self.gcis:
            if lhs.kind is ConceptType.NAME:
                unfold.setdefault(lhs.name, []).append(nnf(rhs))
            else:
                general.append(nnf(disj(neg(lhs), rhs)))
        return {k: tuple(v) for k, v in unfold.items()}, tuple(general)

    @property
    def unfolding(self):
        return self._prepared[0]

    @property
    def internalised(self):
        return self._prepared[1]


def una(individuals):
    """Pairwise distinctness of the given individuals via fresh concepts."""
    ordered = sorted(set(individuals), key=term_key)
    out = set()
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            fresh = name(f'N_({format_term(a)},{format_term(b)})')
            out.add(ConceptAssertion(a, fresh))
            out.add(ConceptAssertion(b, neg(fresh)))
    return out


# ---------- rule-level term conversion ----------

_CONCEPT_BINARY = {'And': ConceptType.AND, 'Or': ConceptType.OR}
_CONCEPT_QUANT = {'Exists': ConceptType.EXISTS, 'Forall': ConceptType.FORALL}


def term_to_role(t):
    if isinstance(t, Const):
        return Role(t.name)
    if isinstance(t, Compound) and t.functor == 'Inverse' and len(t.args) == 1:
        return term_to_role(t.args[0]).inv()
    raise EvaluationError(f'{format_term(t)} is not a role')


def term_to_concept(t):
    if isinstance(t, Const):
        if t.name == 'Top':
            return TOP
        if t.name == 'Bottom':
            return BOTTOM
        return name(t.name)
    if isinstance(t, Compound):
        f, args = t.functor, t.args
        if f in _CONCEPT_BINARY and len(args) >= 2:
            parts = [term_to_concept(a) for a in args]
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = Concept(_CONCEPT_BINARY[f], children=(p, out))
            return out
        if f in ('Not', 'Neg') and len(args) == 1:
            return neg(term_to_concept(args[0]))
        if f in _CONCEPT_QUANT and len(args) == 2:
            return Concept(_CONCEPT_QUANT[f], role=term_to_role(args[0]),
                           children=(term_to_concept(args[1]),))
    raise EvaluationError(f'{format_term(t)} is not a concept')


# ---------- tableau ----------

class _State:
    def __init__(self):
        self.labels = {}      # node -> set(Concept)
        self.edges = {}       # node -> {neighbour -> set(Role)}
        self.parent = {}      # generated node -> parent node
        self.roots = set()
        self.next_id = 0

    def copy(self):
        clone = _State()
        clone.labels = {n: set(l) for n, l in self.labels.items()}
        clone.edges = {n: {m: set(r) for m, r in e.items()} for n, e in self.edges.items()}
        clone.parent = dict(self.parent)
        clone.roots = set(self.roots)
        clone.next_id = self.next_id
        return clone

    def new_node(self, root=False):
        n = self.next_id
        self.next_id += 1
        self.labels[n] = set()
        self.edges[n] = {}
        if root:
            self.roots.add(n)
        return n

    def add_edge(self, x, y, role):
        self.edges[x].setdefault(y, set()).add(role)
        self.edges[y].setdefault(x, set()).add(role.inv())

    def neighbours(self, x, role):
        return [y for y, roles in self.edges[x].items() if role in roles]


class _Tableau:
    def __init__(self, tbox, max_nodes, max_steps):
        self.tbox = tbox
        self.max_nodes = max_nodes
        self.max_steps = max_steps
        self.steps = 0

    def _tick(self, state):
        self.steps += 1
        if self.steps > self.max_steps:
            raise DLUnknownError(f'tableau step budget ({self.max_steps}) exhausted')
        if len(state.labels) > self.max_nodes:
            raise DLUnknownError(f'tableau node budget ({self.max_nodes}) exhausted')

    def initial_state(self, abox):
        state = _State()
        nodes = {}
        for ind in sorted(abox.individuals(), key=term_key):
            nodes[ind] = state.new_node(root=True)
            state.labels[nodes[ind]].update(self.tbox.internalised)
        for a in abox.concepts:
            state.labels[nodes[a.individual]].add(nnf(a.concept))
        for r in abox.roles:
            state.add_edge(nodes[r.subject], nodes[r.filler], r.role)
        return state

    @staticmethod
    def _clash(label):
        if BOTTOM in label:
            return True
        for c in label:
            if c.kind is ConceptType.NOT and c.children[0] in label:
                return True
        return False

    def _saturate(self, state):
        """Apply deterministic rules to fixpoint; False on clash."""
        unfold = self.tbox.unfolding
        changed = True
        while changed:
            changed = False
            self._tick(state)
            for x in list(state.labels):
                if x not in state.labels:
                    continue
                label = state.labels[x]
                pending = list(label)
                while pending:
                    c = pending.pop()
                    k = c.kind
                    if k is ConceptType.AND:
                        for d in c.children:
                            if d not in label:
                                label.add(d)
                                pending.append(d)
                    elif k is ConceptType.NAME:
                        for d in unfold.get(c.name, ()):
                            if d not in label:
                                label.add(d)
                                pending.append(d)
                    elif k is ConceptType.FORALL:
                        filler = c.children[0]
                        for y in state.neighbours(x, c.role):
                            if filler not in state.labels[y]:
                                state.labels[y].add(filler)
                                changed = True
                if self._clash(label):
                    return False
            if self._merge_functional(state):
                changed = True
        return True

    def _merge_functional(self, state):
        for x in sorted(state.labels):
            for role in self.tbox.functional:
                ys = sorted(state.neighbours(x, role))
                if len(ys) >= 2:
                    self._merge(state, x, ys[0], ys[1])
                    return True
        return False

    def _merge(self, state, x, y, z):
        # Keep roots over generated nodes and the predecessor of x over a successor
        if z in state.roots and y not in state.roots:
            y, z = z, y
        elif y not in state.roots and z not in state.roots and state.parent.get(x) == z:
            y, z = z, y
        logger.debug(f'tableau merge {z} into {y}')
        self._prune(state, z)
        state.labels[y] |= state.labels[z]
        for w, roles in state.edges[z].items():
            target = y if w == z else w
            for role in roles:
                state.add_edge(y, target, role)
        for w in list(state.edges[z]):
            if w != z:
                state.edges[w].pop(z, None)
        del state.edges[z]
        del state.labels[z]
        state.parent.pop(z, None)
        state.roots.discard(z)

    def _prune(self, state, z):
        children = [n for n, p in state.parent.items() if p == z]
        for child in children:
            self._prune(state, child)
            for w in list(state.edges[child]):
                state.edges[w].pop(child, None)
            del state.edges[child]
            del state.labels[child]
            del state.parent[child]

    def _directly_blocked(self, state, x):
        y = state.parent[x]
        lx, ly, exy = state.labels[x], state.labels[y], state.edges[y].get(x)
        a = y
        while a in state.parent:
            b = state.parent[a]
            if state.labels[a] == lx and state.labels[b] == ly and state.edges[b].get(a) == exy:
                return True
            a = b
        return False

    def _blocked(self, state, x):
        node = x
        while node in state.parent:
            if self._directly_blocked(state, node):
                return True
            node = state.parent[node]
        return False

    def _branch(self, state):
        """Children for the first open disjunction, [] when all are settled."""
        for x in sorted(state.labels):
            label = state.labels[x]
            for c in sorted((c for c in label if c.kind is ConceptType.OR), key=str):
                if any(d in label for d in c.children):
                    continue
                children = []
                for d in c.children:
                    comp = _complement(d)
                    if comp is not None and comp in label:
                        continue
                    child = state.copy()
                    child.labels[x].add(d)
                    children.append(child)
                return children, True
        return [], False

    def _generate(self, state):
        for x in sorted(state.labels):
            if x in state.parent and self._blocked(state, x):
                continue
            label = state.labels[x]
            for c in sorted((c for c in label if c.kind is ConceptType.EXISTS), key=str):
                filler = c.children[0]
                if any(filler in state.labels[y] for y in state.neighbours(x, c.role)):
                    continue
                y = state.new_node()
                state.parent[y] = x
                state.labels[y].add(filler)
                state.labels[y].update(self.tbox.internalised)
                state.add_edge(x, y, c.role)
                return True
        return False

    def run(self, abox):
        stack = [self.initial_state(abox)]
        while stack:
            state = stack.pop()
            while True:
                if not self._saturate(state):
                    break
                children, branched = self._branch(state)
                if branched:
                    stack.extend(reversed(children))
                    break
                if not self._generate(state):
                    return True
        return False


def is_satisfiable(abox, tbox, max_nodes=None, max_steps=None):
    """True iff (abox, tbox) has a model. Raises DLUnknownError on budget."""
    tableau = _Tableau(tbox,
                       max_nodes or config.DEFAULT_DL_MAX_NODES,
                       max_steps or config.DEFAULT_DL_MAX_STEPS)
    result = tableau.run(abox)
    logger.debug(f'tableau {"SAT" if result else "UNSAT"} after {tableau.steps} steps '
                 f'({len(abox)} assertions, tbox {tbox.name})')
    return result


def query_individuals(queries):
    out = set()
    for q in queries:
        if isinstance(q, ConceptAssertion):
            out.add(q.individual)
        else:
            out.add(q.subject)
            out.add(q.filler)
    return out


def entails(abox, tbox, queries, **budget):
    """(abox ∪ UNA, tbox) entails every ground query assertion.

    UNA ranges over the individuals of the ABox and the query together."""
    base = abox.union(ABox.of(una(abox.individuals() | query_individuals(queries))))
    for q in queries:
        if isinstance(q, ConceptAssertion):
            refutation = ABox.of([ConceptAssertion(q.individual, nnf(neg(q.concept)))])
        else:
            q = q.normalized()
            fresh = name(f'B_({format_term(q.subject)},{q.role},{format_term(q.filler)})')
            refutation = ABox.of([
                ConceptAssertion(q.subject, only(q.role, neg(fresh))),
                ConceptAssertion(q.filler, fresh),
            ])
        if is_satisfiable(base.union(refutation), tbox, **budget):
            return False
    return True
