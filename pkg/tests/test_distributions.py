import math
import unittest

import numpy as np

from errors import FormatError, GroundSetError, ResourceCapExceeded
from distributions import (FiniteGroup, JointDistribution, condition_on, conditioning_mixture, dilute,
                           entropy, from_groups, independent_join, is_quasi_uniform, marginal,
                           mod3_pm, mod_n_sum, parse_distribution, profile, ringing_bells,
                           tensor_power, uniform_bits)
from polymatroid import GroundSet, ingleton, is_polymatroid, u_vector
from polymatroid_ops import tighten

LOG3 = math.log2(3)
TOL = 1e-9


def scaled_u(labels, factor):
    return u_vector(labels).scaled(factor)


class TestNamedExamples(unittest.TestCase):

    def test_mod_n_sum_is_scaled_u(self):
        p = profile(mod_n_sum(3))
        self.assertTrue(p.close_to(scaled_u("abc", LOG3), TOL))
        self.assertTrue(is_quasi_uniform(mod_n_sum(3)))

    def test_mod3_pm_values(self):
        p = profile(mod3_pm())
        g = p.ground
        self.assertAlmostEqual(p(g.mask("a")), LOG3, delta=TOL)
        self.assertAlmostEqual(p(g.mask("ab")), 2 * LOG3, delta=TOL)
        self.assertAlmostEqual(p(g.full), 1 + 2 * LOG3, delta=TOL)

    def test_mod3_pm_tightening(self):
        tight = tighten(profile(mod3_pm()))
        expected = [(LOG3 - 1) * min(m.bit_count(), 2) for m in tight.ground.subsets()]
        for got, want in zip(tight.ranks, expected):
            self.assertAlmostEqual(got, want, delta=TOL)

    def test_mod3_pm_literal_loses_entropy(self):
        self.assertLess(entropy(mod3_pm(literal=True), "abc"), 1 + 2 * LOG3 - 0.1)

    def test_ringing_bells(self):
        p = profile(ringing_bells())
        g = p.ground
        a, b, c, d = (g.mask(x) for x in "abcd")
        self.assertAlmostEqual(p.mutual(a, b, c), 0, delta=TOL)
        self.assertAlmostEqual(p.mutual(a, b, d), 0, delta=TOL)
        self.assertAlmostEqual(p.mutual(c, d), 0, delta=TOL)
        value = ingleton(g, "a", "b", "c", "d")(p)
        self.assertLess(value, 0)
        self.assertAlmostEqual(value, -0.1226, delta=1e-4)
        self.assertFalse(is_quasi_uniform(ringing_bells()))

    def test_conditioning_mixture(self):
        cond = condition_on(conditioning_mixture(), "d")
        self.assertEqual(len(cond.slices), 2)
        self.assertTrue(cond.averaged.close_to(scaled_u("abc", 1.5), TOL))

    def test_profiles_are_polymatroids(self):
        for d in (mod_n_sum(4), mod3_pm(), ringing_bells(), uniform_bits(3), conditioning_mixture()):
            self.assertTrue(is_polymatroid(profile(d)))


class TestConstructions(unittest.TestCase):

    def test_independent_join_adds_profiles(self):
        d, e = mod_n_sum(2), mod3_pm()
        joined = profile(independent_join(d, e))
        self.assertTrue(joined.close_to(profile(d) + profile(e), TOL))

    def test_tensor_power(self):
        d = mod_n_sum(2)
        self.assertTrue(profile(tensor_power(d, 2)).close_to(profile(d).scaled(2.0), TOL))

    def test_tensor_power_cell_cap(self):
        with self.assertRaises(ResourceCapExceeded) as ctx:
            tensor_power(mod_n_sum(3), 4, max_cells=1000)
        self.assertEqual(ctx.exception.cap, "max-cells")

    def test_marginal(self):
        m = marginal(ringing_bells(), "cd")
        self.assertEqual(m.ground.labels, ("c", "d"))
        self.assertAlmostEqual(entropy(m, "cd"), 2.0, delta=TOL)

    def test_dilution_keeps_a_distribution(self):
        d = dilute(mod_n_sum(2), 0.5)
        self.assertEqual(d.alphabet_sizes, (3, 3, 3))
        self.assertTrue(is_polymatroid(profile(d)))
        with self.assertRaises(GroundSetError):
            dilute(mod_n_sum(2), 1.5)

    def test_masses_must_sum_to_one(self):
        with self.assertRaises(GroundSetError):
            JointDistribution(GroundSet.of("a"), (2,), np.array([0.5, 0.4]))


class TestGroups(unittest.TestCase):

    def test_klein_group_gives_u(self):
        klein = FiniteGroup.direct_product(FiniteGroup.cyclic(2), FiniteGroup.cyclic(2))
        d = from_groups(klein, [[0, 1], [0, 2], [0, 3]])
        self.assertTrue(profile(d).close_to(u_vector("abc"), TOL))
        self.assertTrue(is_quasi_uniform(d))

    def test_not_a_subgroup(self):
        with self.assertRaises(GroundSetError):
            from_groups(FiniteGroup.cyclic(4), [[0, 1]])

    def test_bad_table(self):
        with self.assertRaises(GroundSetError):
            FiniteGroup(np.array([[0, 1], [1, 1]]))


class TestTextFormat(unittest.TestCase):

    TEXT = "base: a b\nalphabets: 2 2\nmass 0 0 0.5\nmass 1 1 0.5\n"

    def test_parse(self):
        d = parse_distribution(self.TEXT)
        self.assertAlmostEqual(entropy(d, "ab"), 1.0, delta=TOL)
        again = parse_distribution(d.to_text())
        self.assertTrue(np.allclose(again.mass, d.mass))

    def test_symbol_out_of_range(self):
        with self.assertRaises(FormatError) as ctx:
            parse_distribution("base: a\nalphabets: 2\nmass 2 1.0\n", "bad.dist")
        self.assertEqual(ctx.exception.line, 3)

    def test_mass_before_header(self):
        with self.assertRaises(FormatError):
            parse_distribution("mass 0 1.0\n")

    def test_cell_cap(self):
        with self.assertRaises(ResourceCapExceeded):
            parse_distribution("base: a b\nalphabets: 100 100\nmass 0 0 1.0\n", max_cells=1000)


if __name__ == "__main__":
    unittest.main()
