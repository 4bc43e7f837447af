import math
import unittest

import numpy as np

from distributions import from_linear_rep, profile
from errors import FormatError, GroundSetError
from linear_rep import (LinearRep, common_info_extend, contract_rep, generic_principal_extension,
                        gf_nullspace, gf_rank, ingleton_all, linear_copy, parse_rep, random_rep,
                        rank_of, restrict_rep, to_polymatroid)
from polymatroid import GroundSet, free_vector, is_polymatroid, u_vector
from polymatroid_ops import contract, principal_extension, restrict

PRIMES = (2, 3, 5)


def identity_rep(p, labels):
    ground = GroundSet.of(labels)
    eye = np.eye(ground.n, dtype=int)
    return LinearRep(p, ground.n, ground, tuple((tuple(row),) for row in eye))


class TestFieldArithmetic(unittest.TestCase):

    def test_rank_mod_p(self):
        mat = [[1, 1], [1, 2]]
        self.assertEqual(gf_rank(mat, 3), 2)
        self.assertEqual(gf_rank([[2, 4], [1, 2]], 5), 1)

    def test_nullspace(self):
        mat = np.array([[1, 1, 0]])
        null = gf_nullspace(mat, 3, 2)
        self.assertEqual(len(null), 2)
        self.assertFalse(np.any((mat @ null.T) % 2))


class TestLinearPolymatroids(unittest.TestCase):

    def test_uniform_over_gf2(self):
        rep = LinearRep.build(2, "abc", {"a": [(1, 0)], "b": [(0, 1)], "c": [(1, 1)]})
        self.assertEqual(to_polymatroid(rep), u_vector("abc"))
        self.assertEqual(rank_of(rep, "ab"), 2)

    def test_dependent_vectors_rejected(self):
        with self.assertRaises(GroundSetError):
            LinearRep.build(3, "a", {"a": [(1, 2), (2, 1)]})

    def test_random_reps_satisfy_ingleton(self):
        rng = np.random.default_rng(20240611)
        for k in range(60):
            p = PRIMES[k % 3]
            rep = random_rep(p, 4, "abcd", rng)
            f = to_polymatroid(rep)
            self.assertTrue(is_polymatroid(f))
            self.assertTrue(all(v >= 0 for v in ingleton_all(rep)), rep)

    def test_distribution_matches_rank(self):
        rng = np.random.default_rng(7)
        for p in PRIMES:
            rep = random_rep(p, 3, "abc", rng)
            f = to_polymatroid(rep)
            h = profile(from_linear_rep(rep))
            for m in f.ground.subsets():
                self.assertAlmostEqual(h(m), math.log2(p) * f(m), delta=1e-9)


class TestExtensions(unittest.TestCase):

    def test_common_information(self):
        rep = LinearRep.build(2, "ab", {"a": [(1, 0, 0), (0, 1, 0)], "b": [(0, 1, 0), (0, 0, 1)]})
        ext = common_info_extend(rep, "a", "b", "z")
        g = to_polymatroid(ext)
        self.assertEqual(g.value("z"), 1)
        self.assertEqual(g.value("az"), g.value("a"))
        self.assertEqual(g.value("bz"), g.value("b"))

    def test_generic_principal_extension(self):
        rep = identity_rep(5, "abc")
        ext = generic_principal_extension(rep, "ab", 1, "z", rng_seed=3)
        self.assertEqual(to_polymatroid(ext), principal_extension(free_vector("abc"), "ab", 1, "z"))

    def test_generic_extension_needs_seed(self):
        with self.assertRaises(GroundSetError):
            generic_principal_extension(identity_rep(5, "ab"), "ab", 1, "z", rng_seed=None)

    def test_linear_copy(self):
        rng = np.random.default_rng(11)
        for p in PRIMES:
            rep = random_rep(p, 4, "abcd", rng)
            f = to_polymatroid(rep)
            g = to_polymatroid(linear_copy(rep, "a", "cd"))
            self.assertEqual(g.ground.labels, ("a", "b", "c", "d", "a'"))
            self.assertEqual(restrict(g, "abcd"), f)
            for k in ("", "c", "d", "cd"):
                self.assertEqual(g.value("a'" + k), g.value("a" + k))
            self.assertEqual(g.value("abcda'") + g.value("cd"), g.value("abcd") + g.value("a'cd"))


class TestMinors(unittest.TestCase):

    def test_minors_match_polymatroid_minors(self):
        rng = np.random.default_rng(5)
        for p in PRIMES:
            rep = random_rep(p, 4, "abcd", rng)
            f = to_polymatroid(rep)
            self.assertEqual(to_polymatroid(restrict_rep(rep, "abd")), restrict(f, "abd"))
            self.assertEqual(to_polymatroid(contract_rep(rep, "d")), contract(f, "d"))


class TestTextFormat(unittest.TestCase):

    def test_parse(self):
        rep = parse_rep("prime: 3\ndim: 2\nbase: a b c\nvec a 1 0\nvec b 0 1\nvec c 1 1\n")
        self.assertEqual(to_polymatroid(rep), u_vector("abc"))

    def test_wrong_length(self):
        with self.assertRaises(FormatError) as ctx:
            parse_rep("prime: 3\ndim: 2\nvec a 1 0 1\n", "x.rep")
        self.assertEqual(ctx.exception.line, 3)

    def test_not_prime(self):
        with self.assertRaises(FormatError):
            parse_rep("prime: 4\ndim: 1\nvec a 1\n")


if __name__ == "__main__":
    unittest.main()
