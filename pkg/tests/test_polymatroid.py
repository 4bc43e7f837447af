import unittest
from fractions import Fraction

from defaults import SHANNON_COUNTS
from errors import FormatError, GroundSetError
from polymatroid import (EntropyProfile, GroundSet, LinearFunctional, PartialPermutation, Polymatroid,
                         apply_permutation, balance, eval_expr, free_vector, ingleton,
                         ingleton_instances, is_polymatroid, monotone_basic, mutual_info, parse_expr,
                         parse_functional, parse_polymatroid, r_vector, shannon_basic,
                         shannon_count, submasks, to_functional, tokenize_labels, u_vector,
                         vamos_vector)
from tests.helpers import random_polymatroid, rng_for

ABCD = GroundSet.of("abcd")


class TestGroundSet(unittest.TestCase):

    def test_masks_and_names(self):
        self.assertEqual(ABCD.mask("ac"), 0b101)
        self.assertEqual(ABCD.name(0b1010), "bd")
        self.assertEqual(ABCD.name(0), "∅")
        self.assertEqual(list(ABCD.subsets()), list(range(1, 16)))

    def test_multi_character_labels(self):
        g = GroundSet.of("a1 b1 a2")
        self.assertEqual(g.n, 3)
        self.assertEqual(g.mask("a1a2"), 0b101)
        self.assertEqual(tokenize_labels("a1b1c"), ["a1", "b1", "c"])

    def test_bad_grounds(self):
        with self.assertRaises(GroundSetError):
            GroundSet.of("aa")
        with self.assertRaises(GroundSetError):
            ABCD.mask("ax")
        with self.assertRaises(GroundSetError):
            GroundSet.of([])

    def test_submasks_include_empty(self):
        self.assertEqual(submasks(0b101), [0, 1, 4, 5])


class TestPermutations(unittest.TestCase):

    def test_cycles_and_inverse(self):
        p = PartialPermutation.from_cycles(ABCD, "(a b c)")
        self.assertEqual(p.image(ABCD.mask("a")), ABCD.mask("b"))
        self.assertEqual(p.inverse().compose(p), PartialPermutation.identity(4))
        self.assertEqual(p.describe(ABCD), "(a b c)")

    def test_not_injective(self):
        with self.assertRaises(GroundSetError):
            PartialPermutation.from_dict({0: 1, 1: 1})

    def test_apply_permutation_moves_coordinates(self):
        f = r_vector(ABCD, "a")
        g = apply_permutation(f, PartialPermutation.swap(ABCD, "a", "b"))
        self.assertEqual(g, r_vector(ABCD, "b"))


class TestShannon(unittest.TestCase):

    def test_counts(self):
        for n, count in SHANNON_COUNTS.items():
            self.assertEqual(shannon_count(n), count)
            if n <= 5:
                self.assertEqual(len(shannon_basic(GroundSet.of("abcdef"[:n]))), count)

    def test_balanced_drops_monotone_rows(self):
        rows = shannon_basic(ABCD, balanced=True)
        self.assertEqual(len(rows), 24)
        self.assertTrue(all(e.is_balanced() for e in rows))

    def test_named_vectors_are_polymatroids(self):
        for f in (r_vector(ABCD, "ab"), u_vector(ABCD), free_vector(ABCD), vamos_vector(ABCD, "cd")):
            self.assertTrue(is_polymatroid(f), f)

    def test_violation_carries_witness(self):
        f = Polymatroid.from_function(ABCD, lambda m: 1 if m != ABCD.full else 0)
        res = is_polymatroid(f)
        self.assertFalse(res)
        self.assertLess(res.witness(f), 0)

    def test_random_polymatroids(self):
        rng = rng_for(self)
        for _ in range(25):
            f = random_polymatroid(ABCD, rng)
            self.assertTrue(is_polymatroid(f))
            for e in shannon_basic(ABCD):
                self.assertGreaterEqual(e(f), 0)

    def test_profile_tolerance(self):
        f = EntropyProfile(GroundSet.of("ab"), (1.0, 1.0, 2.0 + 1e-12))
        self.assertTrue(is_polymatroid(f))


class TestExpressions(unittest.TestCase):

    def test_zhang_yeung_on_vamos(self):
        expr = parse_expr("[a,b,c,d] + (a,b|c) + (a,c|b) + (b,c|a)", ABCD)
        self.assertEqual(eval_expr(expr, vamos_vector(ABCD, "cd")), -1)

    def test_ingleton_values_of_vamos(self):
        v = vamos_vector(ABCD, "cd")
        values = [e(v) for e in ingleton_instances(ABCD)]
        self.assertEqual(sorted(values), [-1, 1, 1, 1, 1, 1])
        self.assertEqual(ingleton(ABCD, "a", "b", "c", "d")(v), -1)

    def test_eval_agrees_with_functional(self):
        rng = rng_for(self)
        expr = parse_expr("2 I(a;b|c) - H(d|ab) + 1/2 (c,d) + [a,b,c,d]", ABCD)
        e = to_functional(expr)
        for _ in range(10):
            f = random_polymatroid(ABCD, rng)
            self.assertEqual(eval_expr(expr, f), e(f))

    def test_bracket_notation_matches_mutual_info(self):
        e = to_functional(parse_expr("(a,b|c)", ABCD))
        self.assertEqual(e, mutual_info(ABCD, 1, 2, 4))

    def test_coefficients_and_trailing_relation(self):
        e = to_functional(parse_expr("0.8(a,b) - H(c) >= 0", ABCD))
        self.assertEqual(e.coeffs[ABCD.mask("a")], Fraction(4, 5))
        self.assertEqual(e.coeffs[ABCD.mask("c")], -1)

    def test_parse_errors(self):
        with self.assertRaises(FormatError):
            parse_expr("(a,b", ABCD)
        with self.assertRaises(FormatError):
            parse_expr("(a,x)", ABCD)
        with self.assertRaises(FormatError):
            parse_expr("(a,b) (c,d)", ABCD)


class TestFunctionals(unittest.TestCase):

    def test_canonical_keeps_sign(self):
        e = LinearFunctional.from_names(ABCD, {"a": Fraction(-2, 3), "ab": Fraction(4, 3)})
        c = e.canonical()
        self.assertEqual(c.coeffs, {ABCD.mask("a"): -1, ABCD.mask("ab"): 2})
        self.assertEqual(e.key(), (e * 6).key())

    def test_balance_removes_monotone_part(self):
        e = LinearFunctional.from_names(ABCD, {"a": 1})
        residual, mu = balance(e)
        self.assertTrue(residual.is_balanced())
        self.assertEqual(mu, {"a": 1, "b": 0, "c": 0, "d": 0})

    def test_balance_reconstructs(self):
        rng = rng_for(self)
        rows = shannon_basic(ABCD)
        b1 = monotone_basic(ABCD)
        for _ in range(500):
            e = LinearFunctional(ABCD, {})
            for row in rng.sample(rows, 4):
                e = e + row * rng.randint(1, 3)
            residual, mu = balance(e)
            self.assertTrue(residual.is_balanced())
            self.assertTrue(all(m >= 0 for m in mu.values()))
            rebuilt = residual
            for i, label in enumerate(ABCD.labels):
                rebuilt = rebuilt + b1[i] * mu[label]
            self.assertEqual(rebuilt, e)

    def test_vector_round_trip(self):
        e = ingleton(ABCD, "a", "b", "c", "d")
        self.assertEqual(LinearFunctional.from_vector(ABCD, e.to_vector()), e)


class TestTextFormats(unittest.TestCase):

    def test_polymatroid_text(self):
        f = parse_polymatroid("base: a b\n# comment\na 1\nb 1/2\nab 3/2\n")
        self.assertEqual(f(3), Fraction(3, 2))
        self.assertEqual(parse_polymatroid(f.to_text()), f)

    def test_missing_subset(self):
        with self.assertRaises(FormatError) as ctx:
            parse_polymatroid("base: a b\na 1\nab 1\n", "x.poly")
        self.assertIn("x.poly", str(ctx.exception))

    def test_duplicate_subset_reports_line(self):
        with self.assertRaises(FormatError) as ctx:
            parse_polymatroid("base: a b\na 1\na 1\nb 1\nab 1\n")
        self.assertEqual(ctx.exception.line, 3)

    def test_functional_omits_zeros(self):
        e = parse_functional("base: a b c\nab 1\nc -1\n")
        self.assertEqual(len(e.coeffs), 2)


if __name__ == "__main__":
    unittest.main()
