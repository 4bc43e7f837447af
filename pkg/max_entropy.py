"""
Maximum entropy constraint systems.

Fixing the marginals on a family F of subsets, a maximum entropy extension
keeps f on F and makes X, Y independent given D for every 3-partition
<X,Y|D> separating F (no member of F meets both X and Y). The generalized
form fixes several instances of f inside a larger ground set M, each marked
by a transversal.

Separation questions reduce to connectivity: the basic statement (a,b|K)
is forced to zero iff a and b fall in different components of the
hypergraph {A - K : A in F} on N - K.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations

from errors import FormatError, GroundSetError
from exact_lp import EQ, GEQ, ConstraintSystem, shannon_system
from inequality_catalog import fivek
from polymatroid import (GroundSet, Polymatroid, bits, is_polymatroid, mutual_info, popcount,
                         shannon_basic, submasks, tokenize_labels)
from polymatroid_ops import substitute

logger = logging.getLogger(__name__)

USELESS = "Useless"
POTENTIALLY_USEFUL = "PotentiallyUseful"


# =============================================================================
# 3-PARTITIONS AND CONNECTIVITY
# =============================================================================

@dataclass(frozen=True)
class Partition3:
    """<X,Y|D>: X, Y non-empty, all three disjoint, X holding the least element of XY."""

    x: int
    y: int
    d: int

    def __post_init__(self):
        if not self.x or not self.y:
            raise GroundSetError("3-partition needs non-empty X and Y")
        if self.x & self.y or self.x & self.d or self.y & self.d:
            raise GroundSetError("3-partition parts must be disjoint")
        if (self.y & -self.y) < (self.x & -self.x):
            x, y = self.y, self.x
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "y", y)

    def separates(self, family):
        return all(not (a & self.x and a & self.y) for a in family)

    def describe(self, ground):
        d = ground.name(self.d) if self.d else ""
        return f"<{ground.name(self.x)},{ground.name(self.y)}|{d}>"


def components(rest, edges):
    """Connected components (masks) of the hypergraph ``edges`` on the elements of ``rest``."""
    parent = {i: i for i in bits(rest)}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in edges:
        idx = bits(e & rest)
        for j in idx[1:]:
            ri, rj = find(idx[0]), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    comps = {}
    for i in bits(rest):
        r = find(i)
        comps[r] = comps.get(r, 0) | 1 << i
    return [comps[r] for r in sorted(comps)]


def maximal_sets(family):
    family = sorted(set(family), key=popcount, reverse=True)
    out = []
    for a in family:
        if not any(a & b == a for b in out):
            out.append(a)
    return out


class _Separation:
    """Cached connectivity test: is (a,b|K) forced to zero by the hyperedges."""

    def __init__(self, edges, full):
        self.edges = maximal_sets(edges)
        self.full = full
        self._labels = {}

    def __call__(self, a, b, k):
        label = self._labels.get(k)
        if label is None:
            label = {}
            for c in components(self.full & ~k, self.edges):
                for i in bits(c):
                    label[i] = c
            self._labels[k] = label
        return label[a] != label[b]


def is_separated(family, a, b, k, full=None):
    """True iff some 3-partition separating ``family`` has a in X, b in Y and D inside K."""
    if full is None:
        full = (1 << a) | (1 << b)
        for e in family:
            full |= e
    return _Separation(family, full)(a, b, k)


def separating_partitions(ground, family, max_d=None):
    """Every 3-partition of the ground separating ``family``, grouped by D."""
    ground = GroundSet.of(ground)
    edges = maximal_sets(family)
    out = []
    for d in range(ground.full + 1):
        if max_d is not None and popcount(d) > max_d:
            continue
        rest = ground.full & ~d
        if popcount(rest) < 2:
            continue
        comps = components(rest, edges)
        if len(comps) < 2:
            continue
        head, tail = comps[0], comps[1:]
        for pick in range(1 << len(tail)):
            if pick == (1 << len(tail)) - 1:
                continue
            x = head
            for t, c in enumerate(tail):
                if pick >> t & 1:
                    x |= c
            out.append(Partition3(x, rest & ~x, d))
    return out


def family_of(ground, partitions):
    """P-perp: the subsets meeting at most one of X, Y in every partition."""
    ground = GroundSet.of(ground)
    return [a for a in ground.subsets()
            if all(not (a & p.x and a & p.y) for p in partitions)]


# =============================================================================
# MAXE
# =============================================================================

@dataclass(frozen=True)
class MaxeSpec:
    ground: GroundSet
    family: tuple = ()       # masks of fixed subsets
    partitions: tuple = ()   # requested independences

    def __post_init__(self):
        if not self.family and not self.partitions:
            raise GroundSetError("give fixed subsets or 3-partitions")

    def closed(self):
        """(F, P) with F = P-perp and P = F-perp."""
        base = list(self.family) if self.family else family_of(self.ground, self.partitions)
        partitions = separating_partitions(self.ground, base)
        for p in self.partitions:
            if not p.separates(base):
                raise GroundSetError(
                    f"{p.describe(self.ground)} does not separate the fixed subsets")
        family = family_of(self.ground, partitions)
        return family, partitions


@dataclass
class MaxeSystem:
    system: ConstraintSystem
    family: list
    partitions: list
    independences: list = field(default_factory=list)   # row tags forced to zero


def _statement_of(e):
    """(a, b, K) of a B2 row as (index, index, mask); None for B1 rows."""
    plus = [m for m, c in e.coeffs.items() if c > 0]
    if len(plus) != 2:
        return None
    k = plus[0] & plus[1]
    return bits(plus[0] & ~k)[0], bits(plus[1] & ~k)[0], k


def _lowered(e, var):
    row = {}
    for m, c in e.coeffs.items():
        v = var(m)
        row[v] = row.get(v, 0) + c
    return row


def _add_shannon_rows(sys_, ground, var, separated, balanced, ci_rows):
    forced = []
    for e in shannon_basic(ground, balanced=balanced):
        row = _lowered(e, var)
        statement = _statement_of(e)
        if statement is None or not separated(*statement):
            sys_.add_row(row, GEQ, e.tag)
            continue
        forced.append(e.tag)
        if ci_rows == "equal":
            sys_.add_row(row, EQ, e.tag)
        elif ci_rows == "negate":
            sys_.add_row(row, GEQ, e.tag)
            sys_.add_row({v: -c for v, c in row.items()}, GEQ, "-" + e.tag)
        else:
            raise ValueError(f"unknown ci_rows mode {ci_rows!r}")
    return forced


def build_maxe_system(spec, balanced=False, ci_rows="equal"):
    """Main variables on the closed family, auxiliary on the rest, forced independences as equalities."""
    ground = spec.ground
    family, partitions = spec.closed()
    fixed = set(family)
    edges = maximal_sets(family)
    sys_ = ConstraintSystem(ground, f"MAXE {' '.join(p.describe(ground) for p in partitions[:4])}")
    for m in ground.subsets():
        sys_.declare(ground.name(m), main=m in fixed, mask=m)

    def var(m):
        return ground.name(m)

    forced = _add_shannon_rows(sys_, ground, var,
                               _Separation(edges, ground.full), balanced, ci_rows)
    logger.info("MAXE system: %d fixed subsets, %d separating partitions, %d forced statements, %s",
                len(family), len(partitions), len(forced), sys_.summary())
    return MaxeSystem(sys_, family, partitions, forced)


# =============================================================================
# GMAXE
# =============================================================================

@dataclass(frozen=True)
class GmaxeSpec:
    ground: GroundSet     # N
    big: GroundSet        # M
    phi: tuple            # index in N for each element of M
    transversals: tuple   # masks of M

    def __post_init__(self):
        if len(self.phi) != self.big.n:
            raise GroundSetError("map must send every element of the big ground")
        if set(self.phi) != set(range(self.ground.n)):
            raise GroundSetError("map must be onto the ground set")
        if not self.transversals:
            raise GroundSetError("need at least one transversal")
        for t in self.transversals:
            if sorted(self.phi[i] for i in bits(t)) != list(range(self.ground.n)):
                raise GroundSetError(f"{self.big.name(t)} is not a transversal")

    def image(self, m):
        out = 0
        for i in bits(m):
            out |= 1 << self.phi[i]
        return out

    def is_sunflower(self):
        """Pairwise intersections share one core and the petals are disjoint."""
        ts = self.transversals
        if len(ts) < 2:
            return False
        core = ts[0] & ts[1]
        if any(s & t != core for s, t in combinations(ts, 2)):
            return False
        petals = 0
        for t in ts:
            if petals & (t & ~core):
                return False
            petals |= t & ~core
        return True


@dataclass
class GmaxeSystem:
    system: ConstraintSystem
    spec: GmaxeSpec
    independences: list = field(default_factory=list)
    book_extension: bool = False


def build_gmaxe_system(spec, balanced=False, ci_rows="equal"):
    """Subsets of the transversals glued to the main variables on N through the map."""
    ground, big = spec.ground, spec.big
    book = spec.is_sunflower()
    name = "GMAXE" + (" (book extension)" if book else "")
    sys_ = ConstraintSystem(ground, f"{name} {len(spec.transversals)} transversals on {big.n} elements")
    sys_.declare_ground(ground)
    main_names = set(sys_.main)
    cache = {}

    def var(m):
        if m in cache:
            return cache[m]
        if any(m & t == m for t in spec.transversals):
            v = ground.name(spec.image(m))
        else:
            v = big.name(m)
            if v in main_names:
                v = "M." + v
            sys_.declare(v)
        cache[m] = v
        return v

    edges = list(spec.transversals)
    forced = _add_shannon_rows(sys_, big, var,
                               _Separation(edges, big.full), balanced, ci_rows)
    if book:
        logger.info("transversals form a sunflower: book extension")
    logger.info("%s: %d forced statements, %s", name, len(forced), sys_.summary())
    return GmaxeSystem(sys_, spec, forced, book)


def gmaxe_from_copy_sequence(seq):
    """Instances tracked through a copy sequence: each one meeting the copied set doubles."""
    seq = seq.expanded()
    ground0 = seq.ground0
    origin = {lab: lab for lab in ground0.labels}
    instances = [tuple(ground0.labels)]
    for step in seq.steps:
        naming = dict(step.naming)
        for old, new in naming.items():
            origin[new] = origin[old]
        images = [tuple(naming.get(x, x) for x in t) for t in instances
                  if any(x in naming for x in t)]
        instances += images
    big = seq.final_ground
    phi = tuple(ground0.index(origin[lab]) for lab in big.labels)
    return GmaxeSpec(ground0, big, phi, tuple(big.mask(list(t)) for t in instances))


# =============================================================================
# FIVE-VARIABLE FAMILY
# =============================================================================

FIVEK_SUBSTITUTION = {"a": "az", "b": "bz", "c": "cz", "d": "d", "z": "cz"}


def fivek_step_system(k, bracket="top"):
    """Shannon(abcdz), (cd,z|ab) = 0 and fivek(k-1) taken at (az, bz, cz, d, cz)."""
    if k < 1:
        raise GroundSetError("the induction step needs k >= 1")
    ground = GroundSet.of("abcdz")
    sys_ = shannon_system(ground, name=f"fivek({k}) step")
    m = ground.mask
    sys_.add_functional(mutual_info(ground, m("cd"), m("z"), m("ab")), EQ, "(cd,z|ab)=0")
    previous = fivek(k - 1, bracket).functional
    sys_.add_functional(substitute(previous, FIVEK_SUBSTITUTION, ground), GEQ, f"fivek({k - 1})@subst")
    logger.info("fivek induction step %d (%s): %s", k, bracket, sys_.summary())
    return sys_


# =============================================================================
# NO-4 CHECK
# =============================================================================

@dataclass
class No4Result:
    verdict: str
    witness: Partition3 = None
    g: Polymatroid = None
    failures: list = field(default_factory=list)

    @property
    def useless(self):
        return self.verdict == USELESS


def _no4_extension(spec, f):
    """g(A) = f(phi(A)) on transversal subsets and singletons, f(N) elsewhere."""
    top = f(f.ground.full)

    def rank(m):
        if popcount(m) == 1 or any(m & t == m for t in spec.transversals):
            return f(spec.image(m))
        return top

    return Polymatroid.from_function(spec.big, rank)


def verify_gmaxe_extension(spec, f, g):
    """Polymatroid, isomorphic on every transversal, zero across every separating split."""
    failures = []
    if not is_polymatroid(g):
        failures.append("polymatroid")
    for t in spec.transversals:
        if any(g(m) != f(spec.image(m)) for m in submasks(t) if m):
            failures.append(f"isomorphism on {spec.big.name(t)}")
    edges = list(spec.transversals)
    full = spec.big.full
    for d in range(full + 1):
        rest = full & ~d
        comps = components(rest, edges) if rest else []
        if len(comps) < 2:
            continue
        for c in comps:
            if g.mutual(c, rest & ~c, d) != 0:
                failures.append(f"independence over {spec.big.name(d) if d else '∅'}")
                break
        if len(failures) > 8:
            break
    return failures


def no4_check(spec, target=None):
    """Useless when every separating 3-partition has |D| >= 3; then build the extension for ``target``."""
    if spec.ground.n != 4:
        raise GroundSetError("the no-4 check needs a 4 element ground")
    edges = list(spec.transversals)
    for d in range(spec.big.full + 1):
        if popcount(d) > 2:
            continue
        rest = spec.big.full & ~d
        if popcount(rest) < 2:
            continue
        comps = components(rest, edges)
        if len(comps) >= 2:
            witness = Partition3(comps[0], rest & ~comps[0], d)
            logger.info("separating partition %s with |D| = %d",
                        witness.describe(spec.big), popcount(d))
            return No4Result(POTENTIALLY_USEFUL, witness)
    if target is None:
        return No4Result(USELESS)
    if target.ground.n != 4:
        raise GroundSetError("target must live on the 4 element ground")
    g = _no4_extension(spec, target)
    failures = verify_gmaxe_extension(spec, target, g)
    return No4Result(USELESS, None, g, failures)


# =============================================================================
# TEXT FORMATS
# =============================================================================

def _parse_partition(text, ground):
    body, _, given = text.replace("‖", "|").partition("|")
    x, sep, y = body.partition(",")
    if not sep:
        raise GroundSetError(f"3-partition {text!r} needs 'X,Y|D'")
    xm, ym, dm = ground.mask(x), ground.mask(y), ground.mask(given)
    if (xm | ym | dm) != ground.full:
        # the rest of the ground joins D
        dm = ground.full & ~(xm | ym)
    return Partition3(xm, ym, dm)


def parse_maxe_spec(text, filename=None):
    """``base:``, ``fix: abcd, abz`` and ``indep: cd,z|ab`` lines."""
    ground, family, partitions = None, [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        try:
            if not sep:
                raise FormatError(f"unrecognised line {line!r}", filename, lineno)
            if key == "base":
                ground = GroundSet.of(value.split())
            elif ground is None:
                raise FormatError("'base:' must come first", filename, lineno)
            elif key == "fix":
                family += [ground.mask(part) for part in value.split(",") if part.strip()]
            elif key == "indep":
                partitions += [_parse_partition(part, ground) for part in value.split(";") if part.strip()]
            else:
                raise FormatError(f"unknown key {key!r}", filename, lineno)
        except FormatError:
            raise
        except GroundSetError as exc:
            raise FormatError(str(exc), filename, lineno) from None
    if ground is None:
        raise FormatError("MAXE spec needs a 'base:' line", filename)
    try:
        return MaxeSpec(ground, tuple(family), tuple(partitions))
    except GroundSetError as exc:
        raise FormatError(str(exc), filename) from None


def parse_gmaxe_spec(text, filename=None):
    """``base:``, ``map: a1->a b1->b ...`` and ``transversal: a1 b1 c1 d1`` lines."""
    ground, pairs, transversals = None, [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        try:
            if not sep:
                raise FormatError(f"unrecognised line {line!r}", filename, lineno)
            if key == "base":
                ground = GroundSet.of(value.split())
            elif key == "map":
                for item in value.split():
                    src, arrow, dst = item.partition("->")
                    if not arrow:
                        raise FormatError(f"map entry {item!r} needs 'x->y'", filename, lineno)
                    pairs.append((src, dst))
            elif key == "transversal":
                transversals += [(tokenize_labels(part), lineno) for part in value.split(",") if part.strip()]
            else:
                raise FormatError(f"unknown key {key!r}", filename, lineno)
        except FormatError:
            raise
        except GroundSetError as exc:
            raise FormatError(str(exc), filename, lineno) from None
    if ground is None or not pairs:
        raise FormatError("GMAXE spec needs 'base:' and 'map:' lines", filename)
    try:
        big = GroundSet.of([src for src, _ in pairs])
        phi = tuple(ground.index(dst) for _, dst in pairs)
        masks = tuple(big.mask(labels) for labels, _ in transversals)
        return GmaxeSpec(ground, big, phi, masks)
    except GroundSetError as exc:
        raise FormatError(str(exc), filename) from None


def read_maxe_spec(path):
    with open(path, "r") as fh:
        return parse_maxe_spec(fh.read(), str(path))


def read_gmaxe_spec(path):
    with open(path, "r") as fh:
        return parse_gmaxe_spec(fh.read(), str(path))
