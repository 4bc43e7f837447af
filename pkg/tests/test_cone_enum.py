import itertools
import random
import unittest
from fractions import Fraction

import inequality_catalog
from cone_enum import (_dot, consequence_cone, dd_rays, filter_shannon, fme_project, is_vamos_type,
                       orbit_dedup, polymatroid_rays, primitive, rational_nullspace, reduce_generators,
                       symmetric_group_generators)
from copy_lemma import CopySequence, CopyStep, build_copy_system
from defaults import LONG_TESTS, SHANNON_RAY_COUNTS, VAMOS_TYPE_RAYS_N4
from errors import ConeNotPointed, ResourceCapExceeded
from exact_lp import EQ, GEQ, ConstraintSystem, implies, shannon_system
from max_entropy import build_maxe_system, parse_maxe_spec
from polymatroid import GroundSet, LinearFunctional, mutual_info, r_vector, u_vector


def brute_force_rays(ineqs, eqs, dim):
    """Rays as solutions of dim - 1 independent tight rows."""
    found = set()
    for size in range(dim):
        for tight in itertools.combinations(ineqs, size):
            rows = list(eqs) + list(tight)
            null = rational_nullspace(rows, dim)
            if len(null) != 1:
                continue
            for v in (null[0], [-x for x in null[0]]):
                if all(_dot(r, v) >= 0 for r in ineqs):
                    found.add(tuple(primitive(v)))
    return found


class TestDoubleDescription(unittest.TestCase):

    def test_orthant(self):
        rays = dd_rays([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        self.assertEqual(set(rays), {(1, 0, 0), (0, 1, 0), (0, 0, 1)})

    def test_matches_brute_force(self):
        rng = random.Random(1234)
        for _ in range(100):
            dim = rng.randint(2, 5)
            ineqs = [[int(i == j) for j in range(dim)] for i in range(dim)]
            ineqs += [[rng.randint(-2, 2) for _ in range(dim)] for _ in range(rng.randint(1, 4))]
            ineqs = [r for r in ineqs if any(r)]
            eqs = []
            if dim > 2 and rng.random() < 0.3:
                eqs = [[rng.randint(-1, 1) for _ in range(dim)]]
                eqs = [r for r in eqs if any(r)]
            got = set(dd_rays(ineqs, eqs, dim=dim))
            self.assertEqual(got, brute_force_rays(ineqs, eqs, dim), (ineqs, eqs))

    def test_not_pointed(self):
        with self.assertRaises(ConeNotPointed) as ctx:
            dd_rays([[1, 0]], dim=2)
        self.assertEqual(len(ctx.exception.lineality), 1)
        with self.assertRaises(ConeNotPointed):
            dd_rays([], [[1, -1]], dim=2)

    def test_equalities_can_close_the_cone(self):
        self.assertEqual(len(dd_rays([[1, 0], [0, 1]], [[1, 1]], dim=2)), 0)

    def test_insertion_order_independent(self):
        rows = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, -1], [-1, 2, 1]]
        self.assertEqual(dd_rays(rows).rays, dd_rays(list(reversed(rows))).rays)

    def test_ray_cap(self):
        with self.assertRaises(ResourceCapExceeded):
            polymatroid_rays(GroundSet.of("abc"), max_rays=3)


class TestShannonRays(unittest.TestCase):

    def check_counts(self, n):
        ground = GroundSet.of("abcde"[:n])
        rays = polymatroid_rays(ground)
        orbits = orbit_dedup(rays, symmetric_group_generators(n))
        self.assertEqual((len(rays), len(orbits)), SHANNON_RAY_COUNTS[n])
        self.assertEqual(sum(o.size for o in orbits), len(rays))
        return rays

    def test_two_elements(self):
        rays = self.check_counts(2)
        ground = GroundSet.of("ab")
        self.assertEqual(set(rays), {r_vector(ground, j) for j in ("a", "b", "ab")})

    def test_three_elements(self):
        rays = self.check_counts(3)
        self.assertIn(u_vector("abc"), rays)

    def test_four_elements(self):
        rays = self.check_counts(4)
        self.assertEqual(sum(1 for r in rays if is_vamos_type(r)), VAMOS_TYPE_RAYS_N4)

    @unittest.skipUnless(LONG_TESTS, "hours-scale enumeration; set ENTROPY_LONG_TESTS=1")
    def test_five_elements(self):
        self.check_counts(5)


class TestProjection(unittest.TestCase):

    def test_fme_chain(self):
        rows = [({"x": 1, "y": -1}, GEQ), ({"y": 1, "z": -1}, GEQ)]
        self.assertEqual(fme_project(rows, ["y"]), [{"x": Fraction(1), "z": Fraction(-1)}])

    def test_fme_substitutes_equalities(self):
        rows = [({"x": 1, "y": -1}, EQ), ({"y": 1}, GEQ)]
        self.assertEqual(fme_project(rows, ["y"]), [{"x": Fraction(1)}])

    def small_system(self):
        ground = GroundSet.of("ab")
        sys_ = ConstraintSystem(ground, "chain")
        sys_.declare_ground(ground)
        sys_.declare("t")
        sys_.add_row({"t": 1, "a": -1}, GEQ, "t>=a")
        sys_.add_row({"b": 1, "t": -1}, GEQ, "b>=t")
        return sys_

    def test_consequence_cone_both_methods(self):
        expected = LinearFunctional.from_names("ab", {"b": 1, "a": -1})
        for method in ("fme", "dd"):
            cons = consequence_cone(self.small_system(), method=method)
            self.assertEqual(cons, [expected], method)

    def test_shannon_filter(self):
        ground = GroundSet.of("abcd")
        zy = inequality_catalog.get("zy").functional
        kept = filter_shannon([mutual_info(ground, 1, 2), zy])
        self.assertEqual(kept, [zy])

    def test_reduce_generators(self):
        ground = GroundSet.of("ab")
        a = LinearFunctional.from_names(ground, {"a": 1})
        b = LinearFunctional.from_names(ground, {"b": 1})
        kept = reduce_generators([a, b, a + b], ground)
        self.assertEqual(kept, [a, b])


class TestConsequenceProperties(unittest.TestCase):

    def check_sound_and_irredundant(self, sys_, ground):
        found = consequence_cone(sys_, shannon_ground=ground)
        for e in found:
            res = implies(sys_, e)
            self.assertTrue(res, e.tag)
            self.assertTrue(res.certificate.verify(sys_))
        for i, e in enumerate(found):
            rest = shannon_system(ground)
            for other in found[:i] + found[i + 1:]:
                rest.add_functional(other)
            self.assertFalse(implies(rest, e), e.tag)
        return found

    def test_copy_over_ab(self):
        ground = GroundSet.of("abcd")
        seq = CopySequence(ground, (CopyStep.auto(("c",), ("a", "b"), ground.labels),))
        found = self.check_sound_and_irredundant(build_copy_system(seq, balanced=True).system, ground)
        self.assertTrue(found)

    @unittest.skipUnless(LONG_TESTS, "large multiplier cone; set ENTROPY_LONG_TESTS=1")
    def test_maxe_cd_z_over_ab(self):
        ground = GroundSet.of("abcdz")
        built = build_maxe_system(parse_maxe_spec("base: a b c d z\nindep: cd,z|ab\n"), balanced=True)
        found = self.check_sound_and_irredundant(built.system, ground)
        self.assertTrue(found)


class TestOrbits(unittest.TestCase):

    def test_orbit_sizes(self):
        ground = GroundSet.of("abc")
        items = [r_vector(ground, j) for j in ("a", "b", "c", "ab")]
        orbits = orbit_dedup(items, symmetric_group_generators(3))
        self.assertEqual(sorted(o.size for o in orbits), [3, 3])
        self.assertEqual(sorted(len(o.members) for o in orbits), [1, 3])


if __name__ == "__main__":
    unittest.main()
