import unittest

import inequality_catalog
from cone_enum import consequence_cone
from copy_lemma import parse_copy_sequence
from errors import FormatError, GroundSetError
from exact_lp import CONSTANT, EQ, GEQ, Infeasible, feasible, implies
from inequality_catalog import fivek
from max_entropy import (POTENTIALLY_USEFUL, USELESS, GmaxeSpec, MaxeSpec, Partition3,
                         build_gmaxe_system, build_maxe_system, components, family_of,
                         fivek_step_system, gmaxe_from_copy_sequence, is_separated, no4_check,
                         parse_gmaxe_spec, parse_maxe_spec, separating_partitions)
from polymatroid import GroundSet, shannon_basic, vamos_vector

ABCDZ = GroundSet.of("abcdz")

MMRV_MAXE = "base: a b c d z\nindep: cd,z|ab\n"

EQ13 = """
base: a1 b1 c1 d1
copy: d2=d1:a1b1; a2=a1:b1d1d2; b2=b1:a1a2d1d2
full: yes
"""


def implied(sys_, name):
    res = implies(sys_, inequality_catalog.get(name).functional)
    return bool(res) and res.certificate.verify(sys_)


class TestSeparation(unittest.TestCase):

    def test_partition_normalised(self):
        p = Partition3(ABCDZ.mask("z"), ABCDZ.mask("cd"), ABCDZ.mask("ab"))
        self.assertEqual(p.x, ABCDZ.mask("cd"))
        self.assertEqual(p.describe(ABCDZ), "<cd,z|ab>")
        with self.assertRaises(GroundSetError):
            Partition3(0, 1, 2)
        with self.assertRaises(GroundSetError):
            Partition3(1, 3, 0)

    def test_components(self):
        edges = [ABCDZ.mask("abcd"), ABCDZ.mask("abz")]
        rest = ABCDZ.full & ~ABCDZ.mask("ab")
        self.assertEqual(components(rest, edges), [ABCDZ.mask("cd"), ABCDZ.mask("z")])
        self.assertEqual(components(ABCDZ.full, edges), [ABCDZ.full])

    def test_is_separated(self):
        family = [ABCDZ.mask("abcd"), ABCDZ.mask("abz")]
        c, z, a = (ABCDZ.index(x) for x in "cza")
        self.assertTrue(is_separated(family, c, z, ABCDZ.mask("ab")))
        self.assertFalse(is_separated(family, a, z, 0))

    def test_galois_closure(self):
        p = Partition3(ABCDZ.mask("cd"), ABCDZ.mask("z"), ABCDZ.mask("ab"))
        family = family_of(ABCDZ, [p])
        self.assertIn(ABCDZ.mask("abcd"), family)
        self.assertIn(ABCDZ.mask("abz"), family)
        self.assertNotIn(ABCDZ.mask("cz"), family)
        partitions = separating_partitions(ABCDZ, family)
        self.assertIn(p, partitions)
        self.assertTrue(all(q.separates(family) for q in partitions))
        self.assertEqual(family_of(ABCDZ, partitions), family)


class TestMaxe(unittest.TestCase):

    def test_mmrv_pair_implied(self):
        built = build_maxe_system(parse_maxe_spec(MMRV_MAXE))
        self.assertTrue(implied(built.system, "mmrv-pair-1"))
        self.assertTrue(implied(built.system, "mmrv-pair-2"))
        self.assertTrue(implied(built.system, "mmineq"))

    def test_fivek_family_implied(self):
        built = build_maxe_system(parse_maxe_spec(MMRV_MAXE))
        for k in range(4):
            self.assertTrue(implied(built.system, f"fivek({k})-top"), k)
            self.assertTrue(implied(built.system, f"fivek({k})-bottom"), k)

    def test_negated_rows_equivalent(self):
        built = build_maxe_system(parse_maxe_spec(MMRV_MAXE), ci_rows="negate")
        self.assertTrue(implied(built.system, "mmrv-pair-1"))
        self.assertTrue(any(r.tag.startswith("-B2[") for r in built.system.rows))
        with self.assertRaises(ValueError):
            build_maxe_system(parse_maxe_spec(MMRV_MAXE), ci_rows="drop")

    def test_forced_statements(self):
        built = build_maxe_system(parse_maxe_spec(MMRV_MAXE))
        self.assertIn("B2[c,z|ab]", built.independences)
        self.assertIn("B2[d,z|abc]", built.independences)
        self.assertNotIn("B2[a,z|b]", built.independences)

    def test_rows_follow_basic_inequalities(self):
        built = build_maxe_system(parse_maxe_spec(MMRV_MAXE))
        self.assertEqual([r.tag for r in built.system.rows], [e.tag for e in shannon_basic(ABCDZ)])
        relations = {r.tag: r.relation for r in built.system.rows}
        self.assertTrue(all(relations[t] == EQ for t in built.independences))
        self.assertEqual(relations["B2[a,b|]"], GEQ)
        self.assertEqual(relations["B1[z]"], GEQ)

    def test_single_element_over_set_gives_nothing(self):
        ground = GroundSet.of("abcd")
        spec = parse_maxe_spec("base: a b c d\nindep: cd,b|a\n")
        built = build_maxe_system(spec, balanced=True)
        self.assertEqual(consequence_cone(built.system, shannon_ground=ground), [])

    def test_two_singletons_over_pair_gives_nothing(self):
        ground = GroundSet.of("abxy")
        spec = parse_maxe_spec("base: a b x y\nindep: x,y|ab\n")
        built = build_maxe_system(spec, balanced=True)
        self.assertEqual(consequence_cone(built.system, shannon_ground=ground), [])

    def test_three_element_over_set(self):
        built = build_maxe_system(parse_maxe_spec("base: a b c x y\nindep: x,y|abc\n"))
        self.assertTrue(implied(built.system, "i-iv-3-xx"))

    def test_partition_must_separate_family(self):
        p = Partition3(ABCDZ.mask("cd"), ABCDZ.mask("z"), ABCDZ.mask("ab"))
        spec = MaxeSpec(ABCDZ, (ABCDZ.mask("acz"),), (p,))
        with self.assertRaises(GroundSetError):
            build_maxe_system(spec)
        with self.assertRaises(GroundSetError):
            MaxeSpec(ABCDZ)

    def test_parse_errors(self):
        with self.assertRaises(FormatError) as ctx:
            parse_maxe_spec("indep: cd,z|ab\n")
        self.assertEqual(ctx.exception.line, 1)
        with self.assertRaises(FormatError) as ctx:
            parse_maxe_spec("base: a b c d z\nindep: cdz|ab\n")
        self.assertEqual(ctx.exception.line, 2)
        with self.assertRaises(FormatError):
            parse_maxe_spec("base: a b\n")


class TestGmaxe(unittest.TestCase):

    def setUp(self):
        self.spec = gmaxe_from_copy_sequence(parse_copy_sequence("base: a b c d\ncopy: cd:ab\n"))

    def test_full_copy_as_two_transversals(self):
        parsed = parse_gmaxe_spec("base: a b c d\n"
                                  "map: a->a b->b c->c d->d c'->c d'->d\n"
                                  "transversal: abcd, abc'd'\n")
        self.assertEqual(parsed, self.spec)
        self.assertTrue(self.spec.is_sunflower())

    def test_book_extension_refutes_vamos(self):
        built = build_gmaxe_system(self.spec)
        self.assertTrue(built.book_extension)
        tsys = built.system.with_target(vamos_vector("abcd", "cd"))
        res = feasible(tsys, normalization={CONSTANT: 1})
        self.assertIsInstance(res, Infeasible)
        self.assertTrue(res.certificate.verify(tsys))
        self.assertTrue(implied(built.system, "zy"))

    def test_full_copy_potentially_useful(self):
        res = no4_check(self.spec)
        self.assertEqual(res.verdict, POTENTIALLY_USEFUL)
        self.assertEqual(res.witness.d, self.spec.big.mask("ab"))

    def test_single_transversal_useless(self):
        ground = GroundSet.of("abcd")
        spec = GmaxeSpec(ground, ground, (0, 1, 2, 3), (ground.full,))
        self.assertTrue(no4_check(spec).useless)
        self.assertFalse(spec.is_sunflower())

    def test_eq13_transversals(self):
        spec = gmaxe_from_copy_sequence(parse_copy_sequence(EQ13))
        self.assertEqual(len(spec.transversals), 8)
        target = vamos_vector(spec.ground, ["c1", "d1"])
        res = no4_check(spec, target)
        self.assertEqual(res.verdict, USELESS)
        self.assertEqual(res.failures, [])
        self.assertEqual(res.g.ground, spec.big)

    def test_invalid_transversal(self):
        ground = GroundSet.of("ab")
        big = GroundSet.of(["a", "b", "a'"])
        with self.assertRaises(GroundSetError):
            GmaxeSpec(ground, big, (0, 1, 0), (big.mask(["a", "a'"]),))
        with self.assertRaises(GroundSetError):
            GmaxeSpec(ground, big, (0, 0, 0), (big.mask(["a"]),))

    def test_parse_errors(self):
        with self.assertRaises(FormatError):
            parse_gmaxe_spec("base: a b\n")
        with self.assertRaises(FormatError) as ctx:
            parse_gmaxe_spec("base: a b\nmap: a=a\n")
        self.assertEqual(ctx.exception.line, 2)


class TestFiveKInduction(unittest.TestCase):

    def test_steps_certify_next_member(self):
        for k in (1, 2, 3):
            for bracket in ("top", "bottom"):
                sys_ = fivek_step_system(k, bracket)
                self.assertIsNotNone(sys_.row(f"fivek({k - 1})@subst"))
                res = implies(sys_, fivek(k, bracket).functional)
                self.assertTrue(res, f"fivek({k})-{bracket}")
                self.assertTrue(res.certificate.verify(sys_))

    def test_needs_positive_k(self):
        with self.assertRaises(GroundSetError):
            fivek_step_system(0)


if __name__ == "__main__":
    unittest.main()
