import unittest
from fractions import Fraction

from errors import GroundSetError, NotAPolymatroid, PreconditionFailed
from polymatroid import (GroundSet, Polymatroid, free_vector, is_polymatroid, parse_expr,
                         r_vector, to_functional, u_vector, vamos_vector)
from polymatroid_ops import (EquivalenceRelation, closure_of, connected_components, contract, delete,
                             direct_sum, embed_functional, factor, gak, helgason_expand, is_connected,
                             is_flat, is_modular_pair, is_tight, modular_decomposition, parallel_extend,
                             principal_extension, reorder, restrict, split, substitute, tighten,
                             tighten_at)
from tests.helpers import random_polymatroid, rng_for

ABCD = GroundSet.of("abcd")
PROPERTY_ROUNDS = 500


class TestMinors(unittest.TestCase):

    def test_restrict_vamos(self):
        g = restrict(vamos_vector(ABCD, "cd"), "abc")
        self.assertEqual(g.ground.labels, ("a", "b", "c"))
        self.assertEqual(g, Polymatroid.from_function("abc", lambda m: min(4, m.bit_count() + 1)))

    def test_delete_and_contract_free(self):
        f = free_vector(ABCD)
        self.assertEqual(delete(f, "d"), free_vector("abc"))
        self.assertEqual(contract(f, "d"), free_vector("abc"))

    def test_contract_bad_set(self):
        with self.assertRaises(GroundSetError):
            contract(free_vector(ABCD), "abcd")

    def test_minors_stay_polymatroids(self):
        rng = rng_for(self)
        for _ in range(PROPERTY_ROUNDS):
            f = random_polymatroid(ABCD, rng)
            self.assertTrue(is_polymatroid(contract(f, "ab")))
            self.assertTrue(is_polymatroid(delete(f, "c")))

    def test_reorder(self):
        f = r_vector(ABCD, "a")
        g = reorder(f, "dcba")
        self.assertEqual(g.value("a"), 1)
        self.assertEqual(g(1), 0)


class TestExtensions(unittest.TestCase):

    def test_parallel_extension(self):
        f = vamos_vector(ABCD, "cd")
        g = parallel_extend(f, "a", "e")
        self.assertEqual(g.value("e"), f.value("a"))
        self.assertEqual(g.value("ae"), f.value("a"))
        self.assertEqual(g.value("bce"), f.value("abc"))
        self.assertTrue(is_polymatroid(g))

    def test_principal_extension(self):
        f = u_vector("abc")
        g = principal_extension(f, "ab", 1, "z")
        self.assertEqual(g.value("z"), 1)
        self.assertEqual(g.value("abz"), 2)
        self.assertTrue(is_polymatroid(g))

    def test_gak_with_large_alpha_is_identity(self):
        f = vamos_vector(ABCD, "cd")
        self.assertEqual(gak(f, "c", f.value("c")), f)

    def test_split_and_merge_back(self):
        f = free_vector("ab").scaled(2)
        g = split(f, "a", 1, 1)
        self.assertEqual(g.ground.labels, ("b", "a0", "a1"))
        self.assertEqual(g.value("a0a1"), 2)
        merged = factor(g, EquivalenceRelation.from_blocks(g.ground, ["b", "a0a1"], ["b", "a"]))
        self.assertEqual(merged, reorder(f, "ba"))

    def test_split_needs_matching_ranks(self):
        with self.assertRaises(PreconditionFailed):
            split(free_vector("ab"), "a", 1, 1)

    def test_helgason_expansion(self):
        f = free_vector("ab").scaled(2)
        h, rel = helgason_expand(f, with_relation=True)
        self.assertEqual(h, free_vector(["a_1", "a_2", "b_1", "b_2"]))
        self.assertTrue(h.is_matroid())
        self.assertEqual(factor(h, rel), f)

    def test_gak_is_contracted_principal_extension(self):
        rng = rng_for(self)
        checked = 0
        for _ in range(PROPERTY_ROUNDS):
            f = random_polymatroid(ABCD, rng)
            z = rng.randrange(1, ABCD.full + 1)
            fz = int(f(z))
            if fz == 0:
                continue
            alpha = rng.randrange(fz)
            ext = principal_extension(f, z, fz - alpha, "z")
            self.assertEqual(gak(f, z, alpha), contract(ext, "z"), (f, z, alpha))
            checked += 1
        self.assertTrue(checked)

    def test_split_factor_round_trip(self):
        rng = rng_for(self)
        for _ in range(PROPERTY_ROUNDS):
            f = random_polymatroid(ABCD, rng)
            a = rng.choice(ABCD.labels)
            fa = int(f.value(a))
            alpha0 = rng.randint(0, fa)
            g = split(f, a, alpha0, fa - alpha0)
            self.assertTrue(is_polymatroid(g))
            others = [x for x in ABCD.labels if x != a]
            rel = EquivalenceRelation.from_blocks(g.ground, others + [f"{a}0{a}1"], others + [a])
            self.assertEqual(factor(g, rel), reorder(f, others + [a]))

    def test_helgason_factors_back(self):
        rng = rng_for(self)
        for _ in range(PROPERTY_ROUNDS):
            f = random_polymatroid("abc", rng, terms=2, max_weight=1)
            h, rel = helgason_expand(f, with_relation=True)
            self.assertTrue(h.is_matroid())
            self.assertEqual(factor(h, rel), f)

    def test_direct_sum_labels_disjoint(self):
        with self.assertRaises(GroundSetError):
            direct_sum(free_vector("ab"), free_vector("bc"))


class TestTightening(unittest.TestCase):

    def test_free_vector_is_all_modular(self):
        tight, lam = modular_decomposition(free_vector("abc"))
        self.assertEqual(tight, Polymatroid.zero("abc"))
        self.assertEqual(lam, {"a": 1, "b": 1, "c": 1})

    def test_uniform_is_tight(self):
        self.assertTrue(is_tight(u_vector("abc")))

    def test_decomposition_reconstructs(self):
        rng = rng_for(self)
        for _ in range(PROPERTY_ROUNDS):
            f = random_polymatroid(ABCD, rng)
            tight, lam = modular_decomposition(f)
            self.assertTrue(is_tight(tight))
            self.assertTrue(is_polymatroid(tight))
            rebuilt = tight
            for label, value in lam.items():
                rebuilt = rebuilt + r_vector(ABCD, label).scaled(value)
            self.assertEqual(rebuilt, f)

    def test_tighten_idempotent_and_order_free(self):
        rng = rng_for(self)
        for _ in range(PROPERTY_ROUNDS):
            f = random_polymatroid(ABCD, rng)
            tight = tighten(f)
            self.assertEqual(tighten(tight), tight)
            order = list(ABCD.labels)
            rng.shuffle(order)
            g = f
            for label in order:
                g = tighten_at(g, label)
            self.assertEqual(g, tight)

    def test_tighten_rejects_non_polymatroid(self):
        bad = Polymatroid.from_function(ABCD, lambda m: 1 if m != ABCD.full else 0)
        with self.assertRaises(NotAPolymatroid):
            tighten(bad)


class TestFlats(unittest.TestCase):

    def test_closure(self):
        u = u_vector(ABCD)
        self.assertEqual(closure_of(u, "ab"), ABCD.full)
        self.assertEqual(closure_of(vamos_vector(ABCD, "cd"), "c"), ABCD.mask("c"))
        self.assertTrue(is_flat(u, "a"))
        self.assertFalse(is_flat(u, "ab"))

    def test_modular_pairs(self):
        self.assertFalse(is_modular_pair(u_vector(ABCD), "ab", "cd"))
        self.assertTrue(is_modular_pair(free_vector(ABCD), "ab", "bc"))

    def test_components(self):
        f = direct_sum(u_vector("abc"), free_vector("de"))
        self.assertEqual(connected_components(f), [0b00111, 0b01000, 0b10000])
        self.assertTrue(is_connected(u_vector("abc")))


class TestFunctionalMaps(unittest.TestCase):

    def test_substitute_merges_elements(self):
        e = to_functional(parse_expr("(a,b|c)", "abc"))
        got = substitute(e, {"a": "ax", "b": "b", "c": "c"}, "abcx")
        self.assertEqual(got, to_functional(parse_expr("(ax,b|c)", "abcx")))

    def test_embed(self):
        e = to_functional(parse_expr("H(a) - H(b)", "ab"))
        got = embed_functional(e, "xab")
        self.assertEqual(got.coeffs, {0b010: Fraction(1), 0b100: Fraction(-1)})


if __name__ == "__main__":
    unittest.main()
