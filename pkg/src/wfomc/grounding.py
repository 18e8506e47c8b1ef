"""Herbrand grounding of weighted theories over finite domains."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import WfomcError
from .logic import (
    And,
    Atom,
    Domain,
    Exists,
    ForAll,
    Formula,
    Or,
    Weight,
    WeightedTheory,
    children,
    fold_and,
    fold_or,
    standardize_apart,
    substitute,
    with_children,
)


@dataclass(frozen=True)
class HerbrandBase:
    """All ground atoms over a theory's predicates and a domain's constants.

    Ordering is deterministic: predicates sorted by (name, arity), argument
    tuples in lexicographic domain order.
    """

    atoms: tuple[Atom, ...]
    index: dict = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class GroundProblem:
    base: HerbrandBase
    formula: Formula  # ground; conjunction of the theory's sentences
    weights: tuple[tuple[Weight, Weight], ...]  # per base index
    scalar: Weight
    mode: str


def herbrand_base(t: WeightedTheory, d: Domain) -> HerbrandBase:
    _check_constants(t, d)
    atoms: list[Atom] = []
    for sig in t.predicates():
        for combo in itertools.product(d.constants, repeat=sig.arity):
            atoms.append(Atom(sig, combo))
    return HerbrandBase(tuple(atoms), {a: i for i, a in enumerate(atoms)})


def ground(t: WeightedTheory, d: Domain) -> GroundProblem:
    """Expand quantifiers over the domain; sentences become one conjunction."""
    base = herbrand_base(t, d)
    apart = standardize_apart(t)  # shadowed binders would confuse substitution
    parts = [_expand(s, d) for s in apart.sentences]
    formula = fold_and(_unique(And, parts))
    weights = tuple(t.weights.get(a.pred) for a in base.atoms)
    scalar = t.weights.one()
    for sf in t.scale:
        scalar = scalar * (sf.base ** (len(d) ** sf.nvars))
    return GroundProblem(base, formula, weights, scalar, t.mode)


def _check_constants(t: WeightedTheory, d: Domain):
    names = {c.name for c in d.constants}
    missing = [c.name for c in t.constants() if c.name not in names]
    if missing:
        raise WfomcError(f"constant(s) {missing} of the theory missing from the domain")


def _expand(f: Formula, d: Domain) -> Formula:
    # Instances repeated across the expansion (a subformula not mentioning
    # the bound variable, a vacuous quantifier) are deduplicated after
    # flattening: conjunction and disjunction are associative and idempotent,
    # and this matches hand-written groundings.
    if isinstance(f, ForAll):
        return fold_and(_unique(And, (_expand(substitute(f.body, {f.var: c}), d) for c in d)))
    if isinstance(f, Exists):
        return fold_or(_unique(Or, (_expand(substitute(f.body, {f.var: c}), d) for c in d)))
    if isinstance(f, Atom):
        return f
    kids = tuple(_expand(c, d) for c in children(f))
    return with_children(f, kids)


def _unique(cls, parts) -> list[Formula]:
    seen: list[Formula] = []

    def add(p: Formula):
        if isinstance(p, cls):
            add(p.left)
            add(p.right)
        elif p not in seen:
            seen.append(p)

    for p in parts:
        add(p)
    return seen
