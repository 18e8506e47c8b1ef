"""Markov logic networks and tight logic programs as weighted counting problems.

Each encoder produces a theory whose counts answer probability queries by the
ratio count(theory + query) / count(theory). Both source languages also get a
direct enumeration oracle over their native semantics, so the encoder and the
counting pipeline can be checked against each other end to end.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .counting import wfomc
from .errors import CapExceededError, NonTightProgramError, WfomcError
from .frontends import BodyLiteral, LogicProgram, MlnModel, ProbFact, Rule
from .grounding import _expand
from .logic import (
    FLOAT,
    TRUE,
    And,
    Atom,
    Domain,
    Exists,
    FalseF,
    ForAll,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    PredicateSig,
    TrueF,
    Variable,
    Weight,
    WeightFn,
    WeightedTheory,
    children,
    constants as formula_constants,
    first_occurrence_vars,
    fold_and,
    fold_or,
    free_vars,
    predicates,
    substitute,
)
from .transform import FreshNamer, skolemize, to_cnf_distribute


@dataclass(frozen=True)
class WfomcEncoding:
    """A theory whose count ratios realize a model's probabilities.

    ``query_ready`` marks the post-Skolemization, clausal form; queries are
    conjoined to that form, which is sound because the elimination step stays
    correct under later conjunction of new sentences.
    """

    theory: WeightedTheory
    query_ready: bool = False

    def prepared(self) -> "WfomcEncoding":
        if self.query_ready:
            return self
        t = to_cnf_distribute(skolemize(self.theory))
        return WfomcEncoding(t, True)


# ---------------------------------------------------------------------------
# Markov logic networks


def encode_mln(m: MlnModel) -> WfomcEncoding:
    """Per soft formula: a parameter predicate over its free variables, tied
    by an equivalence and weighted (e^w, 1). Hard formulas become plain
    constraints. Float mode throughout (e^w is irrational)."""
    reserved = set()
    for r in m.rules:
        reserved |= {sig.name for sig in predicates(r.formula)}
    namer = FreshNamer(reserved)

    sentences: list[Formula] = []
    pairs: dict[PredicateSig, tuple[Weight, Weight]] = {}
    for r in m.rules:
        xbar = first_occurrence_vars(r.formula)
        if r.hard:
            sentences.append(_forall(xbar, r.formula))
        else:
            p = Atom(namer.fresh("P", len(xbar)), tuple(Variable(v) for v in xbar))
            sentences.append(_forall(xbar, Iff(p, r.formula)))
            pairs[p.pred] = (math.exp(r.weight), 1.0)
    return WfomcEncoding(WeightedTheory(tuple(sentences), WeightFn(pairs, FLOAT)))


def _forall(vars_: tuple[str, ...], body: Formula) -> Formula:
    for v in reversed(vars_):
        body = ForAll(v, body)
    return body


def mln_oracle(m: MlnModel, d: Domain, query: Formula, cap: int = 20) -> float:
    """Reference MLN semantics by world enumeration.

    A world's weight is the product of e^w over satisfied ground soft
    instances, zero if it violates any hard instance; the result is the
    normalized weight of the worlds satisfying the query.
    """
    instances: list[tuple[float, Formula]] = []
    for r in m.rules:
        xbar = first_occurrence_vars(r.formula)
        for combo in itertools.product(d.constants, repeat=len(xbar)):
            bound = substitute(r.formula, dict(zip(xbar, combo)))
            instances.append((r.weight, _expand(bound, d)))
    ground_query = _expand(query, d)
    if free_vars(ground_query):
        raise WfomcError("query must be a sentence")

    atoms: list[Atom] = []
    seen = set()
    for _, g in instances:
        _collect_atoms(g, seen, atoms)
    _collect_atoms(ground_query, seen, atoms)
    if len(atoms) > cap:
        raise CapExceededError(f"{len(atoms)} ground atoms exceed the oracle cap {cap}")

    z = 0.0
    hit = 0.0
    for bits in itertools.product((False, True), repeat=len(atoms)):
        world = {a for a, b in zip(atoms, bits) if b}
        w = 1.0
        for weight, g in instances:
            sat = _eval_ground(g, world)
            if math.isinf(weight):
                if not sat:
                    w = 0.0
                    break
            elif sat:
                w *= math.exp(weight)
        if w == 0.0:
            continue
        z += w
        if _eval_ground(ground_query, world):
            hit += w
    if z == 0.0:
        raise WfomcError("model has zero partition function")
    return hit / z


def _collect_atoms(f: Formula, seen: set, out: list[Atom]):
    if isinstance(f, Atom):
        if f not in seen:
            seen.add(f)
            out.append(f)
        return
    for c in children(f):
        _collect_atoms(c, seen, out)


def _eval_ground(f: Formula, world: set) -> bool:
    if isinstance(f, Atom):
        return f in world
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not _eval_ground(f.body, world)
    if isinstance(f, And):
        return _eval_ground(f.left, world) and _eval_ground(f.right, world)
    if isinstance(f, Or):
        return _eval_ground(f.left, world) or _eval_ground(f.right, world)
    if isinstance(f, Implies):
        return (not _eval_ground(f.left, world)) or _eval_ground(f.right, world)
    if isinstance(f, Iff):
        return _eval_ground(f.left, world) == _eval_ground(f.right, world)
    raise WfomcError(f"formula is not ground: {type(f).__name__}")


# ---------------------------------------------------------------------------
# Logic programs: tightness and completion


@dataclass(frozen=True)
class TightnessReport:
    ok: bool
    cycle: tuple[str, ...] = ()


def tightness_check(p: LogicProgram) -> TightnessReport:
    """Acyclicity of the positive predicate dependency graph."""
    edges: dict[str, set[str]] = {}
    for r in p.rules:
        out = edges.setdefault(r.head.pred.name, set())
        for lit in r.body:
            if lit.positive:
                out.add(lit.atom.pred.name)

    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(node: str) -> tuple[str, ...] | None:
        state[node] = 1
        stack.append(node)
        for succ in sorted(edges.get(node, ())):
            if state.get(succ, 0) == 1:
                return tuple(stack[stack.index(succ):])
            if state.get(succ, 0) == 0:
                cyc = visit(succ)
                if cyc:
                    return cyc
        stack.pop()
        state[node] = 2
        return None

    for node in sorted(edges):
        if state.get(node, 0) == 0:
            cyc = visit(node)
            if cyc:
                return TightnessReport(False, cyc)
    return TightnessReport(True)


def clarks_completion(p: LogicProgram) -> WeightedTheory:
    """One if-and-only-if sentence per derived predicate; body-only variables
    are existentially quantified. Predicates with neither rules nor a
    probabilistic fact are completed to false."""
    report = tightness_check(p)
    if not report.ok:
        raise NonTightProgramError(list(report.cycle))

    fact_preds = {f.head.pred for f in p.facts}
    for r in p.rules:
        if r.head.pred in fact_preds:
            raise WfomcError(
                f"predicate {r.head.pred.name} has both a probabilistic fact and rules"
            )

    by_head: dict[PredicateSig, list[Rule]] = {}
    head_order: list[PredicateSig] = []
    body_preds: list[PredicateSig] = []
    for r in p.rules:
        if r.head.pred not in by_head:
            head_order.append(r.head.pred)
        by_head.setdefault(r.head.pred, []).append(r)
        for lit in r.body:
            if lit.atom.pred not in body_preds:
                body_preds.append(lit.atom.pred)

    sentences: list[Formula] = []
    for pred in head_order:
        rules = by_head[pred]
        canon = _head_vars(rules[0])
        disjuncts: list[Formula] = []
        for r in rules:
            disjuncts.append(_rule_disjunct(r, canon))
        head = Atom(pred, tuple(Variable(v) for v in canon))
        sentences.append(_forall(canon, Iff(head, fold_or(disjuncts))))

    for pred in body_preds:
        if pred in by_head or pred in fact_preds:
            continue
        vars_ = tuple(f"x{i + 1}" for i in range(pred.arity))
        atom = Atom(pred, tuple(Variable(v) for v in vars_))
        sentences.append(_forall(vars_, Not(atom)))

    return WeightedTheory(tuple(sentences))


def _head_vars(rule: Rule) -> tuple[str, ...]:
    names = []
    for t in rule.head.args:
        if not isinstance(t, Variable):
            raise WfomcError(
                f"rule head {rule.head.pred.name} must use distinct variables, got a constant"
            )
        names.append(t.name)
    if len(set(names)) != len(names):
        raise WfomcError(f"rule head {rule.head.pred.name} repeats a variable")
    return tuple(names)


def _rule_disjunct(rule: Rule, canon: tuple[str, ...]) -> Formula:
    """Body of one rule with its head variables renamed to the canonical ones
    and the remaining variables existentially quantified."""
    own = _head_vars(rule)
    ren = dict(zip(own, canon))
    body_vars: list[str] = []
    for lit in rule.body:
        for t in lit.atom.args:
            if isinstance(t, Variable) and t.name not in own and t.name not in body_vars:
                body_vars.append(t.name)
    # Body-only variables that collide with canonical names get renamed.
    taken = set(canon) | set(own) | set(body_vars)
    for v in list(body_vars):
        if v in canon:
            k = 1
            while f"{v}_{k}" in taken:
                k += 1
            ren[v] = f"{v}_{k}"
            taken.add(f"{v}_{k}")
            body_vars[body_vars.index(v)] = f"{v}_{k}"

    parts: list[Formula] = []
    for lit in rule.body:
        args = tuple(
            Variable(ren.get(t.name, t.name)) if isinstance(t, Variable) else t
            for t in lit.atom.args
        )
        a = Atom(lit.atom.pred, args)
        parts.append(a if lit.positive else Not(a))
    body = fold_and(parts) if parts else TRUE
    for v in reversed(body_vars):
        body = Exists(v, body)
    return body


# ---------------------------------------------------------------------------
# ProbLog encoding


def encode_problog(p: LogicProgram) -> WfomcEncoding:
    """Completion of the rules; each probabilistic fact weights its predicate
    (p, 1-p). Multiple facts on one predicate are routed through fresh
    auxiliary predicates first."""
    p = _expand_multifacts(p)
    for f in p.facts:
        _fact_vars(f)
    theory = clarks_completion(p)
    pairs = {
        f.head.pred: (f.prob, 1 - f.prob)
        for f in p.facts
    }
    return WfomcEncoding(theory.replace(weights=WeightFn(pairs)))


def _fact_vars(f: ProbFact) -> tuple[str, ...]:
    names = []
    for t in f.head.args:
        if not isinstance(t, Variable):
            raise WfomcError(
                f"probabilistic fact {f.head.pred.name} must use distinct variables"
            )
        names.append(t.name)
    if len(set(names)) != len(names):
        raise WfomcError(f"probabilistic fact {f.head.pred.name} repeats a variable")
    return tuple(names)


def _expand_multifacts(p: LogicProgram) -> LogicProgram:
    counts: dict[PredicateSig, int] = {}
    for f in p.facts:
        counts[f.head.pred] = counts.get(f.head.pred, 0) + 1
    multi = {sig for sig, n in counts.items() if n > 1}
    if not multi:
        return p

    taken = {sig.name for sig in counts}
    for r in p.rules:
        taken.add(r.head.pred.name)
        taken |= {lit.atom.pred.name for lit in r.body}
    namer = FreshNamer(taken)

    facts: list[ProbFact] = []
    rules = list(p.rules)
    for f in p.facts:
        if f.head.pred not in multi:
            facts.append(f)
            continue
        aux = namer.fresh(f.head.pred.name + "_", f.head.pred.arity)
        vars_ = _fact_vars(f)
        aux_atom = Atom(aux, f.head.args)
        facts.append(ProbFact(f.prob, aux_atom))
        rules.append(Rule(f.head, (BodyLiteral(True, aux_atom),)))
    return LogicProgram(tuple(facts), tuple(rules))


# ---------------------------------------------------------------------------
# ProbLog oracle


def problog_oracle(p: LogicProgram, d: Domain, query: Formula,
                   cap: int = 20) -> Fraction:
    """Reference semantics: enumerate fact worlds, build each world's minimal
    model by a stratified fixpoint, and sum the weights of the worlds whose
    model satisfies the query."""
    strata = _stratify(p)

    coins: list[tuple[Fraction, Atom]] = []
    for f in p.facts:
        vars_ = _fact_vars(f)
        for combo in itertools.product(d.constants, repeat=len(vars_)):
            coins.append((f.prob, Atom(f.head.pred, combo)))
    if len(coins) > cap:
        raise CapExceededError(f"{len(coins)} ground facts exceed the oracle cap {cap}")

    ground_rules = _ground_rules(p, d)
    ground_query = _expand(query, d)
    if free_vars(ground_query):
        raise WfomcError("query must be a sentence")

    total = Fraction(0)
    for bits in itertools.product((False, True), repeat=len(coins)):
        weight = Fraction(1)
        world = set()
        for (prob, a), b in zip(coins, bits):
            weight *= prob if b else 1 - prob
            if b:
                world.add(a)
        model = _minimal_model(world, ground_rules, strata)
        if _eval_ground(ground_query, model):
            total += weight
    return total


def _stratify(p: LogicProgram) -> dict[str, int]:
    """Predicate strata: positive edges stay within a stratum or go down,
    negative edges strictly down. Errors on unstratifiable negation."""
    preds = set()
    for r in p.rules:
        preds.add(r.head.pred.name)
        preds |= {lit.atom.pred.name for lit in r.body}
    preds |= {f.head.pred.name for f in p.facts}
    stratum = {q: 0 for q in preds}
    for _ in range(len(preds) + 1):
        changed = False
        for r in p.rules:
            for lit in r.body:
                need = stratum[lit.atom.pred.name] + (0 if lit.positive else 1)
                if stratum[r.head.pred.name] < need:
                    stratum[r.head.pred.name] = need
                    changed = True
        if not changed:
            return stratum
    raise WfomcError("program is not stratified (negation through a cycle)")


def _ground_rules(p: LogicProgram, d: Domain) -> list[tuple[Atom, list[tuple[bool, Atom]]]]:
    out = []
    for r in p.rules:
        vars_: list[str] = []
        for t in r.head.args:
            if isinstance(t, Variable) and t.name not in vars_:
                vars_.append(t.name)
        for lit in r.body:
            for t in lit.atom.args:
                if isinstance(t, Variable) and t.name not in vars_:
                    vars_.append(t.name)
        for combo in itertools.product(d.constants, repeat=len(vars_)):
            binding = dict(zip(vars_, combo))
            head = _bind_atom(r.head, binding)
            body = [(lit.positive, _bind_atom(lit.atom, binding)) for lit in r.body]
            out.append((head, body))
    return out


def _bind_atom(a: Atom, binding: dict) -> Atom:
    return Atom(a.pred, tuple(
        binding[t.name] if isinstance(t, Variable) else t for t in a.args
    ))


def _minimal_model(facts: set, ground_rules, strata: dict[str, int]) -> set:
    model = set(facts)
    for level in sorted(set(strata.values())):
        rules_here = [(h, b) for h, b in ground_rules if strata[h.pred.name] == level]
        changed = True
        while changed:
            changed = False
            for head, body in rules_here:
                if head in model:
                    continue
                if all((a in model) == pos for pos, a in body):
                    model.add(head)
                    changed = True
    return model


# ---------------------------------------------------------------------------
# Probability queries through the counting pipeline


def query_probability(e: WfomcEncoding, d: Domain, query: Formula,
                      engine: str = "brute") -> Weight:
    """Pr(query) = count(theory + query) / count(theory).

    The query is conjoined after Skolemization; that is exactly the situation
    the elimination step is modular for.
    """
    if free_vars(query):
        raise WfomcError("query must be a sentence")
    prepared = e.prepared().theory
    names = {c.name for c in d.constants}
    missing = [c.name for c in formula_constants(query) if c.name not in names]
    if missing:
        raise WfomcError(f"query constant(s) {missing} not in the domain")

    denominator = wfomc(prepared, d, engine)
    if denominator == 0:
        raise WfomcError("model has zero partition function")
    with_query = prepared.replace(sentences=prepared.sentences + (query,))
    numerator = wfomc(with_query, d, engine)
    return numerator / denominator
