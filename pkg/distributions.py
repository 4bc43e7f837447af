"""
Discrete joint distributions and their entropy profiles.

Masses are dense numpy tables over the product alphabet (one axis per
element). Entropies are in bits and computed from exact marginal sums,
so every profile here is reproducible bit for bit.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from defaults import MASS_TOLERANCE, MAX_TABLE_CELLS
from errors import FormatError, GroundSetError, ResourceCapExceeded
from polymatroid import EntropyProfile, GroundSet, bits

logger = logging.getLogger(__name__)


def _check_cells(sizes, max_cells):
    cells = math.prod(sizes)
    if cells > max_cells:
        raise ResourceCapExceeded("max-cells", f"table with {cells} cells exceeds {max_cells}")
    return cells


def _entropy(masses):
    p = masses[masses > 0]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(p):
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


# =============================================================================
# JOINT DISTRIBUTIONS
# =============================================================================

@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense mass table with one axis per ground element."""

    ground: GroundSet
    alphabet_sizes: tuple
    mass: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.alphabet_sizes)
        if len(sizes) != self.ground.n or any(k < 1 for k in sizes):
            raise GroundSetError("one positive alphabet size per element")
        mass = np.asarray(self.mass, dtype=np.float64).reshape(sizes)
        if np.any(mass < 0):
            raise GroundSetError("probability masses must be non-negative")
        total = float(mass.sum())
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise GroundSetError(f"masses sum to {total!r}, not 1")
        mass.setflags(write=False)
        object.__setattr__(self, "alphabet_sizes", sizes)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_dict(cls, ground, alphabet_sizes, masses, max_cells=MAX_TABLE_CELLS):
        """``masses`` maps symbol tuples to probabilities; missing tuples have mass 0."""
        ground = GroundSet.of(ground)
        sizes = tuple(alphabet_sizes)
        _check_cells(sizes, max_cells)
        table = np.zeros(sizes, dtype=np.float64)
        for outcome, p in masses.items():
            table[tuple(outcome)] += p
        return cls(ground, sizes, table)

    @classmethod
    def uniform_over(cls, ground, alphabet_sizes, outcomes, max_cells=MAX_TABLE_CELLS):
        """Each listed outcome gets equal mass (repeats count twice)."""
        outcomes = list(outcomes)
        if not outcomes:
            raise GroundSetError("need at least one outcome")
        w = 1.0 / len(outcomes)
        table = {}
        for t in outcomes:
            table[tuple(t)] = table.get(tuple(t), 0.0) + w
        return cls.from_dict(ground, alphabet_sizes, table, max_cells)

    @property
    def cells(self):
        return self.mass.size

    def support(self):
        """Outcomes with positive mass, in index order."""
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.mass > 0)]

    def relabel(self, labels):
        return JointDistribution(GroundSet.of(labels), self.alphabet_sizes, self.mass)

    def to_text(self):
        lines = [f"base: {self.ground}",
                 "alphabets: " + " ".join(str(k) for k in self.alphabet_sizes)]
        for t in self.support():
            lines.append("mass " + " ".join(str(x) for x in t) + f" {float(self.mass[t])!r}")
        return "\n".join(lines) + "\n"


def marginal_masses(d, a):
    """Mass table of the elements of A (axes in ground order)."""
    a = d.ground.mask(a)
    drop = tuple(i for i in range(d.ground.n) if not a >> i & 1)
    return d.mass.sum(axis=drop) if drop else d.mass


def marginal(d, a):
    a = d.ground.mask(a)
    if a == 0:
        raise GroundSetError("marginal on the empty set")
    keep = bits(a)
    return JointDistribution(d.ground.select(a), tuple(d.alphabet_sizes[i] for i in keep),
                             marginal_masses(d, a))


def entropy(d, a):
    a = d.ground.mask(a)
    if a == 0:
        return 0.0
    return _entropy(marginal_masses(d, a))


def profile(d):
    """H(A) in bits for every non-empty A."""
    return EntropyProfile(d.ground, tuple(_entropy(marginal_masses(d, m)) for m in d.ground.subsets()))


# =============================================================================
# CONSTRUCTIONS
# =============================================================================

def independent_join(d, e, max_cells=MAX_TABLE_CELLS):
    """Element i takes the pair (d_i, e_i) with d and e independent."""
    if d.ground != e.ground:
        raise GroundSetError("independent join needs the same ground")
    n = d.ground.n
    sizes = tuple(x * y for x, y in zip(d.alphabet_sizes, e.alphabet_sizes))
    _check_cells(sizes, max_cells)
    outer = np.multiply.outer(d.mass, e.mass)
    order = [ax for i in range(n) for ax in (i, n + i)]
    return JointDistribution(d.ground, sizes, outer.transpose(order).reshape(sizes))


def tensor_power(d, n, max_cells=MAX_TABLE_CELLS):
    """n independent copies, element i taking the n-tuple of its copies."""
    if n < 1:
        raise GroundSetError("tensor power needs n >= 1")
    _check_cells([k ** n for k in d.alphabet_sizes], max_cells)
    out = d
    for _ in range(n - 1):
        out = independent_join(out, d, max_cells)
    return out


@dataclass
class Conditioning:
    slices: list     # (weight, condition outcome, distribution on N - K)
    averaged: EntropyProfile


def condition_on(d, k):
    """Conditional slices given each outcome of K, with their average profile."""
    k = d.ground.mask(k)
    if k == 0 or k == d.ground.full:
        raise GroundSetError("conditioning set must be non-empty and proper")
    keep = [i for i in range(d.ground.n) if not k >> i & 1]
    cond = bits(k)
    ground = d.ground.select(d.ground.full & ~k)
    sizes = tuple(d.alphabet_sizes[i] for i in keep)
    moved = np.moveaxis(d.mass, cond, list(range(len(cond))))
    slices = []
    avg = np.zeros(ground.full)
    for z in itertools.product(*(range(d.alphabet_sizes[i]) for i in cond)):
        table = moved[z]
        w = float(table.sum())
        if w <= 0:
            continue
        piece = JointDistribution(ground, sizes, table / w)
        slices.append((w, z, piece))
        avg += w * np.array(profile(piece).ranks)
    logger.debug("conditioning on %s: %d slices", d.ground.name(k), len(slices))
    return Conditioning(slices, EntropyProfile(ground, tuple(avg)))


def dilute(d, p):
    """With probability p the original outcome, else the fresh symbol everywhere."""
    if not 0 <= p <= 1:
        raise GroundSetError("dilution probability must lie in [0, 1]")
    sizes = tuple(k + 1 for k in d.alphabet_sizes)
    table = np.zeros(sizes)
    table[tuple(slice(0, k) for k in d.alphabet_sizes)] = p * d.mass
    table[tuple(k for k in d.alphabet_sizes)] += 1 - p
    return JointDistribution(d.ground, sizes, table)


def is_quasi_uniform(d, tol=MASS_TOLERANCE):
    """Every marginal is uniform on its support."""
    for m in d.ground.subsets():
        p = marginal_masses(d, m)
        p = p[p > tol]
        if p.size and float(p.max() - p.min()) > tol:
            return False
    return True


# =============================================================================
# GROUPS
# =============================================================================

@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Multiplication table over element indices 0..m-1."""

    table: np.ndarray
    identity: int = 0

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        m = t.shape[0]
        if t.shape != (m, m) or t.min() < 0 or t.max() >= m:
            raise GroundSetError("group table must be m x m over 0..m-1")
        e = self.identity
        rng = np.arange(m)
        if not (np.array_equal(t[e], rng) and np.array_equal(t[:, e], rng)):
            raise GroundSetError(f"{e} is not an identity")
        if any(len(set(row)) != m for row in t) or any(len(set(col)) != m for col in t.T):
            raise GroundSetError("group table must be a Latin square")
        if m <= 64 and not np.array_equal(t[t], t[:, t]):
            raise GroundSetError("group table is not associative")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def order(self):
        return self.table.shape[0]

    def mul(self, g, h):
        return int(self.table[g, h])

    def is_subgroup(self, elements):
        s = set(elements)
        return self.identity in s and all(self.mul(a, b) in s for a in s for b in s)

    def left_coset(self, g, subgroup):
        return frozenset(self.mul(g, h) for h in subgroup)

    @classmethod
    def cyclic(cls, m):
        idx = np.arange(m)
        return cls((idx[:, None] + idx[None, :]) % m)

    @classmethod
    def direct_product(cls, g, h):
        """Element (x, y) has index x * |H| + y."""
        m, k = g.order, h.order
        table = np.zeros((m * k, m * k), dtype=np.int64)
        for x1, y1, x2, y2 in itertools.product(range(m), range(k), range(m), range(k)):
            table[x1 * k + y1, x2 * k + y2] = g.mul(x1, x2) * k + h.mul(y1, y2)
        return cls(table, g.identity * k + h.identity)


def from_groups(group, subgroups, labels=None, max_cells=MAX_TABLE_CELLS):
    """g uniform in G, element i takes the left coset g G_i."""
    subgroups = [sorted(set(s)) for s in subgroups]
    for s in subgroups:
        if not group.is_subgroup(s):
            raise GroundSetError(f"{s} is not a subgroup")
    ground = GroundSet.of(labels if labels is not None else "abcdefghijklmnopqrstuvwxyz"[:len(subgroups)])
    if ground.n != len(subgroups):
        raise GroundSetError("one subgroup per element")
    codes = [{} for _ in subgroups]
    sizes = tuple(group.order // len(s) for s in subgroups)
    outcomes = []
    for g in range(group.order):
        t = []
        for i, s in enumerate(subgroups):
            coset = group.left_coset(g, s)
            t.append(codes[i].setdefault(coset, len(codes[i])))
        outcomes.append(t)
    return JointDistribution.uniform_over(ground, sizes, outcomes, max_cells)


# =============================================================================
# LINEAR DISTRIBUTIONS
# =============================================================================

def from_linear_rep(rep, max_cells=MAX_TABLE_CELLS):
    """x uniform in GF(p)^d, element i takes the inner products with V_i."""
    p, dim = rep.prime, rep.dim
    sizes = tuple(p ** len(v) for v in rep.vectors)
    _check_cells(sizes, max_cells)
    if p ** dim > max_cells:
        raise ResourceCapExceeded("max-cells", f"{p}^{dim} points exceed {max_cells}")
    points = np.indices((p,) * dim).reshape(dim, -1).T.astype(np.int64)
    columns = []
    for vecs in rep.vectors:
        if not vecs:
            columns.append(np.zeros(len(points), dtype=np.int64))
            continue
        values = (points @ np.array(vecs, dtype=np.int64).T) % p
        weights = p ** np.arange(len(vecs), dtype=np.int64)
        columns.append(values @ weights)
    table = np.zeros(sizes)
    np.add.at(table, tuple(columns), 1.0 / len(points))
    return JointDistribution(rep.ground, sizes, table)


# =============================================================================
# NAMED EXAMPLES
# =============================================================================

def constant(labels="a"):
    ground = GroundSet.of(labels)
    return JointDistribution(ground, (1,) * ground.n, np.ones((1,) * ground.n))


def uniform_bits(k, labels=None):
    """k independent fair bits."""
    ground = GroundSet.of(labels if labels is not None else "abcdefghijklmnopqrstuvwxyz"[:k])
    return JointDistribution(ground, (2,) * k, np.full((2,) * k, 0.5 ** k))


def mod_n_sum(n, labels="abc"):
    """a, b uniform mod n and c with a + b + c = 0 mod n; profile (log2 n) u."""
    if n < 2:
        raise GroundSetError("modulus must be at least 2")
    outcomes = [(a, b, (-a - b) % n) for a in range(n) for b in range(n)]
    return JointDistribution.uniform_over(labels, (n, n, n), outcomes)


def ringing_bells(labels="abcd"):
    """c, d independent bits; a = max(c, d), b = min(c, d)."""
    outcomes = [(max(c, d), min(c, d), c, d) for c in range(2) for d in range(2)]
    return JointDistribution.uniform_over(labels, (2, 2, 2, 2), outcomes)


def mod3_pm(literal=False, labels="abc"):
    """a, b uniform mod 3 and a fair coin s.

    By default c = a + b + s, giving pairwise independent triples with one
    extra bit on abc. ``literal=True`` takes c = a + b or a - b by the coin,
    which loses that bit whenever b = 0.
    """
    outcomes = []
    for a, b, s in itertools.product(range(3), range(3), range(2)):
        if literal:
            c = (a + b) % 3 if s == 0 else (a - b) % 3
        else:
            c = (a + b + s) % 3
        outcomes.append((a, b, c))
    return JointDistribution.uniform_over(labels, (3, 3, 3), outcomes)


def conditioning_mixture(labels="abcd"):
    """d a fair bit; abc has profile u when d = 0 and 2u when d = 1."""
    outcomes = []
    for a, b in itertools.product(range(2), range(2)):
        # repeated so both branches weigh 1/2
        outcomes += [(a, b, a ^ b, 0)] * 4
    for a, b in itertools.product(range(4), range(4)):
        outcomes.append((a, b, a ^ b, 1))
    return JointDistribution.uniform_over(labels, (4, 4, 4, 2), outcomes)


def ak2_vamos_witness(labels="abcd"):
    """a, b, d get private bits x1, x2, x3 plus a shared bit w; c = w."""
    outcomes = []
    for x1, x2, x3, w in itertools.product(range(2), repeat=4):
        outcomes.append((2 * x1 + w, 2 * x2 + w, w, 2 * x3 + w))
    return JointDistribution.uniform_over(labels, (4, 4, 2, 4), outcomes)


# =============================================================================
# TEXT FORMAT
# =============================================================================

def parse_distribution(text, filename=None, max_cells=MAX_TABLE_CELLS):
    """``base:``, ``alphabets:`` and ``mass <t1> .. <tn> <p>`` lines."""
    ground = sizes = None
    masses = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("base:"):
                ground = GroundSet.of(line[5:].split())
            elif line.startswith("alphabets:"):
                sizes = tuple(int(x) for x in line[10:].split())
            elif line.startswith("mass"):
                if ground is None or sizes is None:
                    raise FormatError("mass line before base/alphabets", filename, lineno)
                parts = line.split()[1:]
                if len(parts) != ground.n + 1:
                    raise FormatError(f"expected {ground.n} symbols and a mass", filename, lineno)
                t = tuple(int(x) for x in parts[:-1])
                if any(not 0 <= x < k for x, k in zip(t, sizes)):
                    raise FormatError(f"symbol out of range in {t}", filename, lineno)
                masses[t] = masses.get(t, 0.0) + float(parts[-1])
            else:
                raise FormatError(f"unrecognised line {line!r}", filename, lineno)
        except FormatError:
            raise
        except (ValueError, GroundSetError) as exc:
            raise FormatError(str(exc), filename, lineno) from None
    if ground is None or sizes is None:
        raise FormatError("distribution needs 'base:' and 'alphabets:' lines", filename)
    if len(sizes) != ground.n:
        raise FormatError("one alphabet size per element", filename)
    try:
        return JointDistribution.from_dict(ground, sizes, masses, max_cells)
    except GroundSetError as exc:
        raise FormatError(str(exc), filename) from None


def read_distribution(path, max_cells=MAX_TABLE_CELLS):
    with open(path, "r") as fh:
        return parse_distribution(fh.read(), str(path), max_cells)
