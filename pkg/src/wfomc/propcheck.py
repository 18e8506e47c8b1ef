"""Random-instance generation and the certification harness.

Everything here measures one thing: that quantifier elimination and its
relatives preserve exact weighted counts, judged against the brute-force
counter. Failures are shrunk to small witnesses before being reported.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .counting import wfomc
from .errors import CapExceededError, WfomcError
from .frontends import serialize_formula, serialize_theory
from .logic import (
    And,
    Atom,
    Domain,
    Exists,
    ForAll,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    PredicateSig,
    QUANT,
    Variable,
    Weight,
    WeightFn,
    WeightedTheory,
    children,
    fold_and,
    free_vars,
    predicates,
    standardize_apart,
    substitute,
)
from .transform import (
    ElimSite,
    StagedElimination,
    _skolemize,
    replace_at,
    skolemize,
    staged_elimination,
)

DEFAULT_WEIGHT_POOL = (
    Fraction(1), Fraction(1), Fraction(1), Fraction(1),
    Fraction(-1), Fraction(2), Fraction(1, 2), Fraction(3, 10),
)


@dataclass(frozen=True)
class GenConfig:
    """Caps for the random theory generator; generation is a pure function
    of the seed."""

    max_predicates: int = 2
    max_arity: int = 2
    max_quantifier_depth: int = 3
    max_connective_depth: int = 3
    max_sentences: int = 2
    domain_sizes: tuple[int, ...] = (1, 2)
    weight_pool: tuple[Fraction, ...] = DEFAULT_WEIGHT_POOL
    seed: int = 0

    def __post_init__(self):
        if self.max_arity > 2:
            raise WfomcError("generator arity cap is 2")
        if self.max_quantifier_depth > 3:
            raise WfomcError("generator quantifier depth cap is 3")
        if not set(self.domain_sizes) <= {1, 2, 3}:
            raise WfomcError("generator domain sizes must be within {1,2,3}")


def gen_theory(cfg: GenConfig) -> WeightedTheory:
    rng = random.Random(cfg.seed)
    n_preds = rng.randint(1, cfg.max_predicates)
    sigs = []
    for i in range(n_preds):
        arity = rng.choice([0, 1, 1, 2][: 2 + cfg.max_arity])
        arity = min(arity, cfg.max_arity)
        sigs.append(PredicateSig(f"P{i}", arity))
    if cfg.max_quantifier_depth == 0 and all(s.arity for s in sigs):
        sigs[0] = PredicateSig(sigs[0].name, 0)  # closed sentences need a leaf

    var_counter = [0]

    def fresh_var() -> str:
        var_counter[0] += 1
        return f"v{var_counter[0]}"

    # The quantifier budget is shared across a whole sentence (not per path):
    # every quantifier costs one elimination later, and each elimination adds
    # fresh predicates, so this is what keeps Herbrand bases enumerable.
    def gen(budget: list[int], dc: int, scope: tuple[str, ...]) -> Formula:
        usable = [s for s in sigs if s.arity == 0 or scope]
        must_quantify = not usable
        r = rng.random()
        if budget[0] > 0 and (must_quantify or r < 0.35):
            budget[0] -= 1
            v = fresh_var()
            cls = ForAll if rng.random() < 0.5 else Exists
            return cls(v, gen(budget, dc, scope + (v,)))
        if dc > 0 and r < 0.80 and not must_quantify:
            kind = rng.randrange(5)
            if kind == 0:
                return Not(gen(budget, dc - 1, scope))
            cls = (And, Or, Implies, Iff)[kind - 1]
            return cls(gen(budget, dc - 1, scope), gen(budget, dc - 1, scope))
        if must_quantify:  # out of quantifier budget and no usable predicate
            sig = min(sigs, key=lambda s: s.arity)
            v = fresh_var()
            body = Atom(sig, tuple(Variable(v) for _ in range(sig.arity)))
            return ForAll(v, body)
        sig = rng.choice(usable)
        args = tuple(Variable(rng.choice(scope)) for _ in range(sig.arity))
        return Atom(sig, args)

    sentences = []
    for _ in range(rng.randint(1, cfg.max_sentences)):
        f = gen([cfg.max_quantifier_depth], cfg.max_connective_depth, ())
        assert not free_vars(f)
        sentences.append(f)

    pairs = {}
    for sig in sigs:
        wt = rng.choice(cfg.weight_pool)
        wf = rng.choice(cfg.weight_pool)
        if (wt, wf) != (1, 1):
            pairs[sig] = (wt, wf)
    return WeightedTheory(tuple(sentences), WeightFn(pairs))


def gen_ground_conjunction(rng: random.Random, t: WeightedTheory, d: Domain,
                           max_literals: int = 3) -> Formula:
    """Conjunction of up to three ground literals over the theory's own
    predicates (never over predicates a transformation introduced)."""
    sigs = list(t.predicates())
    if not sigs:
        return fold_and([])  # a theory without atoms admits only trivial queries
    lits = []
    for _ in range(rng.randint(1, max_literals)):
        sig = rng.choice(sigs)
        args = tuple(rng.choice(d.constants) for _ in range(sig.arity))
        a = Atom(sig, args)
        lits.append(a if rng.random() < 0.5 else Not(a))
    return fold_and(lits)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Counterexample:
    theory: WeightedTheory
    domain_size: int
    before: Weight
    after: Weight
    query: Formula | None = None


@dataclass(frozen=True)
class CheckReport:
    checked: int = 0
    skipped: int = 0
    failures: tuple[Counterexample, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures


def _base_size(t: WeightedTheory, n: int) -> int:
    return sum(n ** sig.arity for sig in t.predicates())


# ---------------------------------------------------------------------------
# Soundness


def check_soundness(t: WeightedTheory, sizes=(1, 2), max_atoms: int | None = None,
                    transform=skolemize, shrink: bool = True) -> CheckReport:
    """Exact count equality before and after the transformation, at every
    domain size; the smallest failing size is reported with a shrunk witness."""
    checked = skipped = 0
    failures: list[Counterexample] = []
    out = transform(t)
    for n in sorted(sizes):
        if max(_base_size(t, n), _base_size(out, n)) > (max_atoms or 26):
            skipped += 1
            continue
        d = Domain.of_size(n, extra=t.constants())
        before = wfomc(t, d)
        after = wfomc(out, d)
        checked += 1
        if before != after:
            witness = t
            if shrink:
                witness = shrink_theory(t, lambda s: _count_mismatch(s, transform, n))
                before = wfomc(witness, d)
                after = wfomc(transform(witness), d)
            failures.append(Counterexample(witness, n, before, after))
            break
    return CheckReport(checked, skipped, tuple(failures))


def _count_mismatch(t: WeightedTheory, transform, n: int) -> bool:
    try:
        d = Domain.of_size(n, extra=t.constants())
        return wfomc(t, d) != wfomc(transform(t), d)
    except (WfomcError, CapExceededError):
        return False


# ---------------------------------------------------------------------------
# Modularity


def check_modularity(t: WeightedTheory, sizes=(1, 2), samples: int = 3,
                     rng: random.Random | None = None,
                     max_atoms: int | None = None,
                     queries: list[Formula] | None = None) -> CheckReport:
    """Counts with a ground conjunction added after the transformation must
    match the untransformed theory with the same conjunction.

    Queries range over the theory's own predicates only; one that mentions a
    predicate the transformation introduced is rejected as unsupported.
    """
    rng = rng or random.Random(0)
    checked = skipped = 0
    failures: list[Counterexample] = []
    sk = skolemize(t)
    original = set(t.predicates())
    for n in sorted(sizes):
        if max(_base_size(t, n), _base_size(sk, n)) > (max_atoms or 26):
            skipped += 1
            continue
        d = Domain.of_size(n, extra=t.constants())
        phis = queries if queries is not None else [
            gen_ground_conjunction(rng, t, d) for _ in range(samples)
        ]
        for phi in phis:
            if not predicates(phi) <= original:
                raise WfomcError("query ranges outside the original predicates")
            before = wfomc(_conjoin(t, phi), d)
            after = wfomc(_conjoin(sk, phi), d)
            checked += 1
            if before != after:
                failures.append(Counterexample(t, n, before, after, phi))
    return CheckReport(checked, skipped, tuple(failures))


def _conjoin(t: WeightedTheory, phi: Formula) -> WeightedTheory:
    return t.replace(sentences=t.sentences + (phi,))


# ---------------------------------------------------------------------------
# Staged elimination checks


def check_staged_counts(t: WeightedTheory, site: ElimSite,
                        sizes=(1, 2)) -> CheckReport:
    """The four intermediate theories of one elimination all count the same
    as the input."""
    stages = staged_elimination(t, site)
    checked = 0
    failures: list[Counterexample] = []
    for n in sorted(sizes):
        d = Domain.of_size(n)
        want = wfomc(standardize_apart(t), d)
        for staged in (stages.isolate, stages.split, stages.feature, stages.implication):
            got = wfomc(staged, d)
            checked += 1
            if got != want:
                failures.append(Counterexample(staged, n, want, got))
    return CheckReport(checked, 0, tuple(failures))


def staged_case_table(stages: StagedElimination, d: Domain, stage: str) -> dict:
    """Conditioned counts for one grounding of the cancellation predicate.

    Keys are (sigma_value, s_value); values are (measured, expected) where
    expected follows the per-grounding weight argument: rows that violate the
    stage's sentence contribute 0, the others factor into the cancellation
    predicate's weight times the count of the remaining sentences.
    Needs |domain| = 1 so the predicate has a single grounding.
    """
    if len(d) != 1:
        raise WfomcError("case table is defined over a single grounding; use |domain| = 1")
    theory = stages.feature if stage == "feature" else stages.implication
    wt, wf = theory.weights.get(stages.s)
    gamma = theory.replace(sentences=tuple(
        s for s in theory.sentences if stages.s not in predicates(s)
    ))
    c = d.constants[0]
    binding = {v: c for v in stages.ys}
    s_atom = Atom(stages.s, tuple(c for _ in stages.ys))
    sigma = substitute(stages.sigma, binding)

    rows = {}
    for sigma_val in (True, False):
        for s_val in (True, False):
            lits = [s_atom if s_val else Not(s_atom),
                    sigma if sigma_val else Not(sigma)]
            measured = wfomc(_conjoin(_conjoin(theory, lits[0]), lits[1]), d)
            side = wfomc(_conjoin(gamma, sigma if sigma_val else Not(sigma)), d)
            if stage == "feature":
                expected = (wt if s_val else wf) * side if sigma_val == s_val else Fraction(0)
            else:
                if sigma_val and not s_val:
                    expected = Fraction(0)
                else:
                    expected = (wt if s_val else wf) * side
            rows[(sigma_val, s_val)] = (measured, expected)
    return rows


# ---------------------------------------------------------------------------
# Sabotaged transformations (mutation sensitivity)


def skolemize_wrong_cancellation_weight(t: WeightedTheory) -> WeightedTheory:
    """Deliberately wrong: the cancellation predicate's negative branch gets
    weight +1, so relaxation models no longer cancel."""
    return _skolemize(t, use_shortcut=True, _skolem_false_weight=Fraction(1))


def skolemize_skip_universal_rewrite(t: WeightedTheory) -> WeightedTheory:
    """Deliberately wrong: universal sites are eliminated as if existential,
    skipping the double-negation rewrite."""
    return _skolemize(t, use_shortcut=True, _treat_forall_as_exists=True)


# ---------------------------------------------------------------------------
# Shrinking


def shrink_theory(t: WeightedTheory, still_fails, max_steps: int = 200) -> WeightedTheory:
    """Greedy minimization: fewer sentences, then smaller formulas, as long
    as the failure persists."""
    steps = 0
    while steps < max_steps:
        for candidate in _shrink_candidates(t):
            steps += 1
            try:
                failing = still_fails(candidate)
            except (WfomcError, CapExceededError):
                failing = False
            if failing:
                t = candidate
                break
        else:
            return t
    return t


def _shrink_candidates(t: WeightedTheory):
    if len(t.sentences) > 1:
        for i in range(len(t.sentences)):
            yield t.replace(sentences=t.sentences[:i] + t.sentences[i + 1:])
    for i, s in enumerate(t.sentences):
        for smaller in _shrink_formula(s):
            if free_vars(smaller):
                continue
            yield t.replace(sentences=t.sentences[:i] + (smaller,) + t.sentences[i + 1:])
    # Finally try neutral weights.
    for sig, pair in t.weights.pairs.items():
        if pair != (1, 1):
            pairs = dict(t.weights.pairs)
            pairs[sig] = (Fraction(1), Fraction(1))
            yield t.replace(weights=WeightFn(pairs, t.weights.mode))


def _shrink_formula(f: Formula):
    """Yield formulas with one node replaced by one of its children (or a
    vacuous quantifier dropped)."""
    for path, node in _paths(f):
        for smaller in _node_shrinks(node):
            yield replace_at(f, path, smaller)


def _paths(f: Formula, prefix: tuple[int, ...] = ()):
    yield prefix, f
    for i, c in enumerate(children(f)):
        yield from _paths(c, prefix + (i,))


def _node_shrinks(f: Formula):
    if isinstance(f, (And, Or, Implies, Iff)):
        yield f.left
        yield f.right
    elif isinstance(f, Not):
        yield f.body
    elif isinstance(f, QUANT):
        if f.var not in free_vars(f.body):
            yield f.body


# ---------------------------------------------------------------------------
# Suite driver (CLI `check`)


@dataclass
class SuiteResult:
    ok: bool
    lines: list[str] = field(default_factory=list)


def run_suite(seeds: int = 100, sizes=(1, 2), max_atoms: int | None = None,
              modularity_samples: int = 1) -> SuiteResult:
    """Soundness on every seed plus sampled modularity queries."""
    lines = []
    checked = skipped = 0
    failures = 0
    for seed in range(seeds):
        cfg = GenConfig(seed=seed, domain_sizes=tuple(sizes))
        t = gen_theory(cfg)
        rep = check_soundness(t, sizes, max_atoms=max_atoms)
        checked += rep.checked
        skipped += rep.skipped
        for c in rep.failures:
            failures += 1
            lines.append(f"FAIL soundness seed={seed} size={c.domain_size} "
                         f"before={c.before} after={c.after}")
            lines.append("  shrunk witness:")
            for ln in serialize_theory(c.theory).strip().splitlines():
                lines.append("    " + ln)
        if modularity_samples and not rep.failures:
            mrep = check_modularity(t, sizes, samples=modularity_samples,
                                    rng=random.Random(seed), max_atoms=max_atoms)
            checked += mrep.checked
            skipped += mrep.skipped
            for c in mrep.failures:
                failures += 1
                lines.append(f"FAIL modularity seed={seed} size={c.domain_size} "
                             f"query={serialize_formula(c.query)} "
                             f"before={c.before} after={c.after}")
    lines.append(f"{checked} checks, {skipped} skipped (atom cap), {failures} failure(s)")
    return SuiteResult(failures == 0, lines)
