import pytest

from conftest import domain, formula, theory
from wfomc.errors import WfomcError
from wfomc.grounding import ground, herbrand_base
from wfomc.logic import Atom, Constant, Domain, PredicateSig


class TestHerbrandBase:
    def test_two_unary_predicates_two_constants(self):
        t = theory("forall x (Stress(x) -> Smokes(x))")
        base = herbrand_base(t, domain("A", "B"))
        assert len(base) == 4

    def test_unary_plus_binary_is_n_plus_n_squared(self):
        t = theory("forall x forall y (S(x) & F(x,y) -> S(y))")
        for n in (1, 2, 3):
            base = herbrand_base(t, Domain.of_size(n))
            assert len(base) == n + n * n

    def test_employment_model_has_six_atoms_at_two(self):
        t = theory("forall x exists y (WorksFor(x,y) | Boss(x))")
        base = herbrand_base(t, domain("A", "B"))
        assert len(base) == 6

    def test_deterministic_order(self):
        t = theory("forall x forall y (S(x) & F(x,y) -> S(y))")
        base = herbrand_base(t, domain("A", "B"))
        names = [
            f"{a.pred.name}({','.join(c.name for c in a.args)})" for a in base.atoms
        ]
        assert names == ["F(A,A)", "F(A,B)", "F(B,A)", "F(B,B)", "S(A)", "S(B)"]

    def test_missing_constant_is_an_error(self):
        t = theory("P(A)")
        with pytest.raises(WfomcError):
            herbrand_base(t, domain("B"))


class TestGround:
    def test_universal_becomes_conjunction_of_clauses(self):
        from wfomc.counting import clauses_of

        t = theory("forall x exists y (WorksFor(x,y) | Boss(x))")
        g = ground(t, domain("A", "B"))
        clauses = clauses_of(g)
        assert clauses is not None and len(clauses) == 2

        def lit(name, *args):
            a = Atom(PredicateSig(name, len(args)), tuple(Constant(c) for c in args))
            return g.base.index[a] + 1

        want = {
            frozenset({lit("WorksFor", "A", "A"), lit("WorksFor", "A", "B"), lit("Boss", "A")}),
            frozenset({lit("WorksFor", "B", "A"), lit("WorksFor", "B", "B"), lit("Boss", "B")}),
        }
        assert set(clauses) == want

    def test_ground_sentence_maps_to_itself(self):
        t = theory("P(A) -> Q(A)")
        g = ground(t, domain("A"))
        assert g.formula == t.sentences[0]

    def test_singleton_existential_collapses(self):
        t = theory("exists x P(x)")
        g = ground(t, domain("A"))
        assert g.formula == formula("P(A)")

    def test_weights_follow_base_order(self):
        t = theory("weight P 1 2 3\nforall x (P(x) | Q(x))")
        g = ground(t, domain("A"))
        by_atom = dict(zip(g.base.atoms, g.weights))
        p = Atom(PredicateSig("P", 1), (Constant("A"),))
        q = Atom(PredicateSig("Q", 1), (Constant("A"),))
        assert by_atom[p] == (2, 3)
        assert by_atom[q] == (1, 1)
