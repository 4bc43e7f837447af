"""
Polymatroid operations: minors, factors, sums, one-point extensions,
tightening, the GAK map, splitting and Helgason expansion, flats.

Every operation works on exact ``Polymatroid`` values and on floating
``EntropyProfile`` values alike; the result has the input's class.
"""

import logging
from dataclasses import dataclass

from defaults import PROFILE_TOLERANCE
from errors import GroundSetError, NotAPolymatroid, PreconditionFailed
from polymatroid import (EntropyProfile, GroundSet, LinearFunctional, bits,
                         is_polymatroid, translate_mask)

logger = logging.getLogger(__name__)


def _tol(f):
    return PROFILE_TOLERANCE if isinstance(f, EntropyProfile) else 0


def _same(f, x, y):
    return abs(x - y) <= _tol(f)


# =============================================================================
# MINORS
# =============================================================================

def restrict(f, m):
    """f restricted to the subsets of M."""
    m = f.ground.mask(m)
    if m == 0:
        raise GroundSetError("cannot restrict to the empty set")
    table = bits(m)
    ground = f.ground.select(m)
    return f.like(ground, (f(translate_mask(a, table)) for a in ground.subsets()))


def delete(f, k):
    k = f.ground.mask(k)
    return restrict(f, f.ground.full & ~k)


def contract(f, k):
    """A -> f(AK) - f(K) on N - K."""
    k = f.ground.mask(k)
    if k == 0 or k == f.ground.full:
        raise GroundSetError("contraction set must be non-empty and proper")
    rest = f.ground.full & ~k
    table = bits(rest)
    ground = f.ground.select(rest)
    base = f(k)
    return f.like(ground, (f(translate_mask(a, table) | k) - base for a in ground.subsets()))


def reorder(f, labels):
    """Same function with the ground listed in the order ``labels``."""
    ground = GroundSet.of(labels)
    if sorted(ground.labels) != sorted(f.ground.labels):
        raise GroundSetError("reorder needs a permutation of the ground labels")
    table = [f.ground.index(lab) for lab in ground.labels]
    return f.like(ground, (f(translate_mask(a, table)) for a in ground.subsets()))


# =============================================================================
# FACTORS
# =============================================================================

@dataclass(frozen=True)
class EquivalenceRelation:
    """Partition of the ground into blocks, each named by a representative."""

    ground: GroundSet
    blocks: tuple   # masks
    names: tuple

    def __post_init__(self):
        covered = 0
        for block in self.blocks:
            if block == 0 or block & covered:
                raise GroundSetError("blocks must be non-empty and disjoint")
            covered |= block
        if covered != self.ground.full:
            raise GroundSetError("blocks must cover the ground set")
        if len(self.names) != len(self.blocks):
            raise GroundSetError("one name per block")

    @classmethod
    def from_blocks(cls, ground, blocks, names=None):
        masks = tuple(ground.mask(b) for b in blocks)
        if names is None:
            names = tuple(ground.labels[bits(m)[0]] for m in masks)
        return cls(ground, masks, tuple(names))

    @classmethod
    def identity(cls, ground):
        return cls(ground, tuple(1 << i for i in range(ground.n)), ground.labels)

    def merged_ground(self):
        return GroundSet(self.names)


def factor(f, rel):
    """Rank of a set of classes is the rank of their union."""
    if rel.ground != f.ground:
        raise GroundSetError("relation is on a different ground")
    ground = rel.merged_ground()

    def union(s):
        out = 0
        for i in bits(s):
            out |= rel.blocks[i]
        return out

    return f.like(ground, (f(union(s)) for s in ground.subsets()))


# =============================================================================
# SUMS
# =============================================================================

def sum_polymatroids(f, g):
    return f + g


def direct_sum(f, g):
    """f on N plus g on M, for disjoint label sets."""
    clash = set(f.ground.labels) & set(g.ground.labels)
    if clash:
        raise GroundSetError(f"direct sum needs disjoint labels, shared: {sorted(clash)}")
    ground = f.ground.extend(*g.ground.labels)
    n, low = f.ground.n, f.ground.full
    return f.like(ground, (f(a & low) + g(a >> n) for a in ground.subsets()))


def scale(factor_, f):
    if factor_ < 0:
        raise GroundSetError("scale factor must be non-negative")
    return f.scaled(factor_)


# =============================================================================
# ONE POINT EXTENSIONS
# =============================================================================

def parallel_extend(f, a, newlabel):
    """New element a' parallel to a: f*(a'A) = f(aA)."""
    ai = f.ground.bit(a) if isinstance(a, str) else f.ground.mask(a)
    ground = f.ground.extend(newlabel)
    n, low = f.ground.n, f.ground.full
    return f.like(ground, (f((m & low) | (ai if m >> n & 1 else 0)) for m in ground.subsets()))


def principal_extension(f, z, alpha, newlabel):
    """Append z' with f'(Az') = min(f(A) + alpha, f(AZ))."""
    z = f.ground.mask(z)
    if z == 0:
        raise GroundSetError("principal extension needs a non-empty Z")
    alpha = f._coerce(alpha)
    if alpha < 0:
        raise GroundSetError("alpha must be non-negative")
    ground = f.ground.extend(newlabel)
    n, low = f.ground.n, f.ground.full

    def rank(m):
        a = m & low
        if m >> n & 1:
            return min(f(a) + alpha, f(a | z))
        return f(a)

    return f.like(ground, (rank(m) for m in ground.subsets()))


def gak(f, z, alpha):
    """A -> min(f(A), alpha + f(A|Z)) on the same ground."""
    z = f.ground.mask(z)
    alpha = f._coerce(alpha)
    if alpha < 0:
        raise GroundSetError("alpha must be non-negative")
    fz = f(z)
    return f.like(f.ground, (min(f(a), alpha + f(a | z) - fz) for a in f.ground.subsets()))


def split(f, a, alpha0, alpha1, labels=None):
    """Replace a by a0, a1 of ranks alpha0, alpha1 whose union acts as a."""
    ai = f.ground.bit(a)
    alpha0, alpha1 = f._coerce(alpha0), f._coerce(alpha1)
    if alpha0 < 0 or alpha1 < 0 or not _same(f, alpha0 + alpha1, f(ai)):
        raise PreconditionFailed(f"split ranks must be non-negative and sum to f({a}) = {f(ai)}")
    l0, l1 = labels or (f"{a}0", f"{a}1")
    g = principal_extension(f, ai, alpha0, l0)
    g = principal_extension(g, ai, alpha1, l1)
    return delete(g, ai)


# =============================================================================
# TIGHTENING
# =============================================================================

def private_part(f, z):
    """f(z | N - z)."""
    zi = f.ground.mask(z)
    return f(f.ground.full) - f(f.ground.full & ~zi)


def tighten_at(f, z):
    """f - f(z|N-z) r_z."""
    zi = f.ground.bit(z) if isinstance(z, str) else z
    lam = private_part(f, zi)
    if lam < -_tol(f):
        raise NotAPolymatroid(f"negative private information at {f.ground.name(zi)}")
    return f.like(f.ground, (f(m) - (lam if m & zi else 0) for m in f.ground.subsets()))


def modular_decomposition(f):
    """(tight part, lambda per element) with f = tight + sum lambda_z r_z."""
    check = is_polymatroid(f)
    if not check:
        raise NotAPolymatroid("tightening needs a polymatroid", check.witness)
    lam = {label: private_part(f, 1 << i) for i, label in enumerate(f.ground.labels)}
    tight = f
    for i in range(f.ground.n):
        tight = tighten_at(tight, 1 << i)
    return tight, lam


def tighten(f):
    return modular_decomposition(f)[0]


def is_tight(f):
    return all(_same(f, private_part(f, 1 << i), 0) for i in range(f.ground.n))


# =============================================================================
# HELGASON EXPANSION
# =============================================================================

def helgason_expand(f, with_relation=False):
    """Split singletons of rank r >= 2 into r unit-rank elements a_1..a_r."""
    if not f.is_integer():
        raise PreconditionFailed("Helgason expansion needs integer ranks")
    order, blocks, names = [], [], []
    g = f
    for i, label in enumerate(f.ground.labels):
        r = int(f(1 << i))
        if r < 2:
            order.append(label)
            blocks.append([label])
            names.append(label)
            continue
        current = label
        parts = []
        for k in range(1, r):
            rest = f"{label}_{r}" if k == r - 1 else f"{label}__{k}"
            g = split(g, current, 1, g.value(current) - 1, labels=(f"{label}_{k}", rest))
            parts.append(f"{label}_{k}")
            current = rest
        parts.append(current)
        order.extend(parts)
        blocks.append(parts)
        names.append(label)
    g = reorder(g, order)
    logger.debug("helgason expansion: %d -> %d elements", f.ground.n, g.ground.n)
    if with_relation:
        rel = EquivalenceRelation.from_blocks(g.ground, ["".join(b) for b in blocks], names)
        return g, rel
    return g


# =============================================================================
# FLATS AND MODULARITY
# =============================================================================

def is_flat(f, a):
    a = f.ground.mask(a)
    base = f(a)
    return all(f(a | (1 << x)) - base > _tol(f)
               for x in range(f.ground.n) if not a >> x & 1)


def closure_of(f, a):
    """A plus every x with f(Ax) = f(A), saturated to a fixed point."""
    a = f.ground.mask(a)
    changed = True
    while changed:
        changed = False
        base = f(a)
        for x in range(f.ground.n):
            if not a >> x & 1 and _same(f, f(a | (1 << x)), base):
                a |= 1 << x
                changed = True
    return a


def is_modular_pair(f, a, b):
    a, b = f.ground.mask(a), f.ground.mask(b)
    return _same(f, f(a) + f(b), f(a | b) + f(a & b))


def connected_components(f):
    """Finest partition of N into blocks B with f(N) = sum f(B)."""
    full = f.ground.full
    total = f(full)
    separators = [s for s in f.ground.subsets()
                  if _same(f, f(s) + f(full & ~s), total)]
    comps, seen = [], 0
    for i in range(f.ground.n):
        if seen >> i & 1:
            continue
        block = full
        for s in separators:
            if s >> i & 1:
                block &= s
        comps.append(block)
        seen |= block
    return comps


def is_connected(f):
    return len(connected_components(f)) == 1


# =============================================================================
# FUNCTIONAL SUBSTITUTION
# =============================================================================

def substitute(e, mapping, ground):
    """Pull e back along element -> subset: coordinate A goes to the union of the images."""
    ground = GroundSet.of(ground)
    image = [ground.mask(mapping[label]) for label in e.ground.labels]
    coeffs = {}
    for m, c in e.coeffs.items():
        target = 0
        for i in bits(m):
            target |= image[i]
        if target:
            coeffs[target] = coeffs.get(target, 0) + c
    return LinearFunctional(ground, coeffs, e.tag)


def embed_functional(e, ground):
    """Same functional written over a larger ground containing its labels."""
    ground = GroundSet.of(ground)
    table = ground.embed(e.ground)
    return LinearFunctional(ground, {translate_mask(m, table): c for m, c in e.coeffs.items()}, e.tag)

